#ifndef HOLOFG_QUANTUM_HPP
#define HOLOFG_QUANTUM_HPP

#include <optional>
#include <string>
#include <vector>

#include "holofg/classical.hpp"
#include "holofg/labeled_operator.hpp"
#include "holofg/types.hpp"

namespace holofg {

struct QuantumVariable {
  std::string id;
  int dim = 0;
  LabeledOperator weight;  // f_i, PSD on the variable's base space
};

struct QuantumFactor {
  std::string id;
  std::vector<std::string> neighbors;  // variable ids
  LabeledOperator table;  // f_a, PSD on the base spaces of the neighbors
};

// Factor graph over finite Hilbert spaces. Construction validates PSD-ness of
// every weight, pairwise commutation of the factors, and the dimension guard.
class QuantumFactorGraph {
 public:
  QuantumFactorGraph(std::vector<QuantumVariable> variables,
                     std::vector<QuantumFactor> factors,
                     const Tolerances& tol = {});

  const std::vector<QuantumVariable>& variables() const { return variables_; }
  const std::vector<QuantumFactor>& factors() const { return factors_; }
  const QuantumVariable& variable(const std::string& id) const;
  const QuantumFactor& factor(const std::string& id) const;

  std::vector<std::pair<std::string, std::string>> edges() const;
  std::vector<std::string> neighbors_of_variable(const std::string& id) const;

  // All base labels, canonical order.
  std::vector<SpaceLabel> full_space() const;
  std::int64_t total_dim() const;

  // Max pairwise commutation residual between identity-extended factors.
  double factor_commutation_residual() const;

 private:
  std::vector<QuantumVariable> variables_;
  std::vector<QuantumFactor> factors_;
};

// Lambda *(n) Lambda' = (L^(1/2n) L'^(1/n) L^(1/2n))^n on the label union.
LabeledOperator star_n(const LabeledOperator& lambda,
                       const LabeledOperator& lambda_prime, int n,
                       const Tolerances& tol = {});

// exp(log L|_S + log L'|_S) on the intersection S of the supports, zero off
// S; the n -> infinity limit of star_n.
LabeledOperator odot(const LabeledOperator& lambda,
                     const LabeledOperator& lambda_prime,
                     const Tolerances& tol = {});

// Tr((prod_a f_a)(tensor_i f_i)); the factor product is taken in stored
// order after a commutation pre-check. Declared real after an imaginary-part
// sanity check.
double z_quantum(const QuantumFactorGraph& g, const Tolerances& tol = {});

// (1/Z) (prod_a f_a) * (tensor_i f_i). Throws NumericError when Z is not
// safely positive.
LabeledOperator density_operator(const QuantumFactorGraph& g,
                                 const Tolerances& tol = {});

// |Tr(L_AB * L_BC) - Tr_B(Tr_A(L_AB) * Tr_C(L_BC))| / max(1, |lhs|).
// Operands must overlap in at least one label and each own at least one
// private label.
double check_star_distributivity(const LabeledOperator& lambda_ab,
                                 const LabeledOperator& lambda_bc,
                                 const Tolerances& tol = {});

// Same discrepancy with odot in place of star; the quantity the witness
// search below drives above threshold.
double odot_distributivity_discrepancy(const LabeledOperator& lambda_ab,
                                       const LabeledOperator& lambda_bc,
                                       const Tolerances& tol = {});

struct OdotWitness {
  LabeledOperator lambda_ab;
  LabeledOperator lambda_bc;
  double discrepancy = 0.0;
  int trial = 0;
};

// Random search over PSD qubit triples for a violation of odot
// distributivity with the partial trace; returns the first witness with
// relative discrepancy above `threshold`.
std::optional<OdotWitness> find_odot_nondistributivity(
    std::uint64_t seed, int trials, double threshold = 1e-3);

// Diagonal embedding: requires every weight and table diagonal within
// tol.identity (relative to its largest diagonal entry) and produces the
// classical graph with the same Z.
ClassicalFactorGraph induced_classical(const QuantumFactorGraph& g,
                                       const Tolerances& tol = {});

}  // namespace holofg

#endif
