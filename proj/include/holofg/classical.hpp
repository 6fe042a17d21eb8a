#ifndef HOLOFG_CLASSICAL_HPP
#define HOLOFG_CLASSICAL_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "holofg/report.hpp"
#include "holofg/types.hpp"

namespace holofg {

struct ClassicalVariable {
  std::string id;
  int domain_size = 0;
  Eigen::VectorXd weight;  // f_i, length domain_size, nonnegative
};

struct ClassicalFactor {
  std::string id;
  std::vector<std::string> neighbors;  // variable ids, order fixes the table
  Eigen::VectorXd table;  // f_a, row-major over neighbor domains, nonnegative
};

// Bipartite factor graph over finite domains. Validation happens at
// construction; instances are immutable afterwards.
class ClassicalFactorGraph {
 public:
  ClassicalFactorGraph(std::vector<ClassicalVariable> variables,
                       std::vector<ClassicalFactor> factors);

  const std::vector<ClassicalVariable>& variables() const { return variables_; }
  const std::vector<ClassicalFactor>& factors() const { return factors_; }

  const ClassicalVariable& variable(const std::string& id) const;
  std::size_t variable_index(const std::string& id) const;

  // Edges (variable id, factor id) in factor storage order, then neighbor
  // order within each factor.
  std::vector<std::pair<std::string, std::string>> edges() const;

  // Factors incident to a variable, in factor storage order.
  std::vector<std::string> neighbors_of_variable(const std::string& id) const;

  std::int64_t state_space_size() const;

 private:
  std::vector<ClassicalVariable> variables_;
  std::vector<ClassicalFactor> factors_;
  std::map<std::string, std::size_t> variable_index_;
};

// Exact brute-force partition function. Throws SizeError past the
// 2^20-state guard.
double z_classical(const ClassicalFactorGraph& g);

struct ClassicalEdgeTransform {
  std::string variable;
  std::string factor;
  Eigen::MatrixXd phi;      // |X_i| x |X_i|
  Eigen::MatrixXd phi_hat;  // |X_i| x |X_i|
};

class ClassicalTransformSet {
 public:
  ClassicalTransformSet() = default;
  void add(ClassicalEdgeTransform t);
  const ClassicalEdgeTransform& at(const std::string& variable,
                                   const std::string& factor) const;
  bool has(const std::string& variable, const std::string& factor) const;
  std::size_t size() const { return transforms_.size(); }
  const std::map<std::pair<std::string, std::string>, ClassicalEdgeTransform>&
  entries() const {
    return transforms_;
  }

 private:
  std::map<std::pair<std::string, std::string>, ClassicalEdgeTransform>
      transforms_;
};

// Max-entry |phi * phi_hat - I|.
double check_biorthogonality(const ClassicalEdgeTransform& t);

// The per-edge index universe of a transformed graph plus the hatted tables.
struct TransformedClassicalGraph {
  struct Edge {
    std::string variable;
    std::string factor;
    int domain_size = 0;
  };
  struct Table {
    std::string id;
    std::vector<std::size_t> edge_indices;  // positions into `edges`
    Eigen::VectorXd values;  // row-major over the edge domains, may be negative
  };
  std::vector<Edge> edges;
  std::vector<Table> factor_tables;    // \hat f_a
  std::vector<Table> variable_tables;  // \hat f_i
};

// Builds both hatted families by direct summation. Throws on a missing or
// extra edge transform and on biorthogonality violations beyond
// tol.biorthogonality.
TransformedClassicalGraph classical_transform(const ClassicalFactorGraph& g,
                                              const ClassicalTransformSet& ts,
                                              const Tolerances& tol = {});

// Brute-force sum of the transformed graph over the edge universe.
double z_transformed_classical(const TransformedClassicalGraph& t);

// Computes Z and the transformed sum, records per-edge biorthogonality
// residuals, and issues a verdict. Residual or discrepancy failures are
// verdicts, not exceptions.
HolantReport verify_classical_holant(const ClassicalFactorGraph& g,
                                     const ClassicalTransformSet& ts,
                                     const Tolerances& tol = {});

}  // namespace holofg

#endif
