#ifndef HOLOFG_TRANSFORM_HPP
#define HOLOFG_TRANSFORM_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "holofg/quantum.hpp"
#include "holofg/report.hpp"
#include "holofg/superop.hpp"

namespace holofg {

enum class TransformMode { Strong, Diagonal };

const char* mode_name(TransformMode m);

// Labels of the per-edge spaces for variable i and factor a.
SpaceLabel hat_label(const std::string& variable, const std::string& factor,
                     int dim);
SpaceLabel prime_label(const std::string& variable, const std::string& factor,
                       int dim);

// One edge's transform pair: Phi maps operators on the hat space to
// operators on the variable's base space, Phi_hat maps operators on the
// prime space to operators on the hat space.
struct EdgeTransform {
  std::string variable;
  std::string factor;
  TransformMode mode = TransformMode::Strong;
  SuperOperator phi;
  SuperOperator phi_hat;

  // CJ matrices as labeled operators (phi on [base, hat], phi_hat on
  // [hat, prime]).
  LabeledOperator phi_cj() const { return phi.cj_operator(); }
  LabeledOperator phi_hat_cj() const { return phi_hat.cj_operator(); }

  // Both transfer matrices are the identity within `tol_entry`, i.e. the
  // pair is a pure relabeling.
  bool is_identity_pair(double tol_entry = 1e-12) const;
};

class QuantumTransformSet {
 public:
  QuantumTransformSet() = default;

  // Validates the label scheme of the pair against the declared edge.
  void add(EdgeTransform t);

  const EdgeTransform& at(const std::string& variable,
                          const std::string& factor) const;
  bool has(const std::string& variable, const std::string& factor) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::pair<std::string, std::string>, EdgeTransform>& entries()
      const {
    return entries_;
  }

 private:
  std::map<std::pair<std::string, std::string>, EdgeTransform> entries_;
};

// f_a with its base labels re-tiered to the factor's prime spaces.
LabeledOperator factor_on_prime(const QuantumFactorGraph& g,
                                const std::string& factor_id);

// Computes the hatted factor by both the partial-trace form and the
// map-application form, asserts agreement within tol.identity, and returns
// the map form (an operator on the factor's hat spaces).
LabeledOperator transform_factor(const QuantumFactorGraph& g,
                                 const std::string& factor_id,
                                 const QuantumTransformSet& ts,
                                 const Tolerances& tol = {});

// Same dual-form computation for the hatted variable operator; the per-edge
// maps are folded in `edge_order` (factor ids covering exactly the variable's
// neighborhood). Degree-zero variables are not accepted here.
LabeledOperator transform_variable(const QuantumFactorGraph& g,
                                   const std::string& variable_id,
                                   const QuantumTransformSet& ts,
                                   const std::vector<std::string>& edge_order,
                                   const Tolerances& tol = {});

struct TransformedQuantumGraph {
  std::vector<std::pair<std::string, LabeledOperator>> factor_tables;
  // Degree-zero variables carry a scalar table holding Tr(f_i).
  std::vector<std::pair<std::string, LabeledOperator>> variable_tables;
};

// Hatted tables for the whole graph; per-variable edge order is the stored
// factor order restricted to the neighborhood.
TransformedQuantumGraph transform_graph(const QuantumFactorGraph& g,
                                        const QuantumTransformSet& ts,
                                        const Tolerances& tol = {});

// Trace over the hat spaces of the product of all hatted factor tables and
// all hatted variable tables. Also evaluates the transposed form and asserts
// the two traces agree within tol.identity. Every hat space must be covered
// exactly once by each family; an empty edge set is an error.
std::complex<double> z_transformed(const TransformedQuantumGraph& t,
                                   const Tolerances& tol = {});

// || Tr_prime(f'_a prod_i F_{i,a}) - f_a ||_F / ||f_a||_F: the swap-witness
// teleportation identity behind the transformed expression.
double swap_teleport_check(const LabeledOperator& f_prime);

// Full verification of the transformed partition function: per-edge inverse
// residuals (FAIL names the edges), per-node commutation of the phi CJ
// operators (non-exempt failures downgrade to EXPLORATORY), the discrepancy
// |Z - Z^| / max(1, |Z|), and an order-sensitivity probe re-evaluating Z^
// under three seeded permutations of the factor order.
HolantReport verify_quantum_holant(const QuantumFactorGraph& g,
                                   const QuantumTransformSet& ts,
                                   const Tolerances& tol = {});

// --- instance generation ---

enum class Family { Diagonal, Deg1, Pauli, Identity };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

struct GenParams {
  int variables = 4;
  int factors = 3;
  int max_dim = 2;
  // Cap on both the base-space and hat-space total dimensions.
  std::int64_t dim_limit = 256;
};

struct Instance {
  QuantumFactorGraph graph;
  QuantumTransformSet transforms;
};

// Deterministic in (family, params, seed).
Instance gen_instance(Family family, const GenParams& params,
                      std::uint64_t seed);

// Extracts the classical pair embedded in a diagonal-mode transform set; the
// graph supplies domain sizes. Throws if any edge is not diagonal-mode.
ClassicalTransformSet induced_classical_transforms(
    const QuantumFactorGraph& g, const QuantumTransformSet& ts);

}  // namespace holofg

#endif
