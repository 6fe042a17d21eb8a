#include "holofg/classical.hpp"

#include <algorithm>
#include <cmath>

#include "holofg/indexing.hpp"

namespace holofg {

ClassicalFactorGraph::ClassicalFactorGraph(
    std::vector<ClassicalVariable> variables,
    std::vector<ClassicalFactor> factors)
    : variables_(std::move(variables)), factors_(std::move(factors)) {
  for (std::size_t k = 0; k < variables_.size(); ++k) {
    const ClassicalVariable& var = variables_[k];
    if (var.id.empty()) throw ShapeError("variable with empty id");
    if (!variable_index_.emplace(var.id, k).second) {
      throw ShapeError("duplicate variable id " + var.id);
    }
    if (var.domain_size < 1) {
      throw ShapeError("variable " + var.id + " has domain size " +
                       std::to_string(var.domain_size));
    }
    if (var.weight.size() != var.domain_size) {
      throw ShapeError("variable " + var.id + " weight vector has length " +
                       std::to_string(var.weight.size()) + ", expected " +
                       std::to_string(var.domain_size));
    }
    if ((var.weight.array() < 0.0).any()) {
      throw ShapeError("variable " + var.id + " has a negative weight");
    }
  }

  std::vector<std::string> factor_ids;
  for (const ClassicalFactor& f : factors_) {
    if (f.id.empty()) throw ShapeError("factor with empty id");
    if (std::find(factor_ids.begin(), factor_ids.end(), f.id) !=
        factor_ids.end()) {
      throw ShapeError("duplicate factor id " + f.id);
    }
    factor_ids.push_back(f.id);
    if (f.neighbors.empty()) {
      throw ShapeError("factor " + f.id + " has no neighbors");
    }
    std::int64_t expect = 1;
    std::vector<std::string> seen;
    for (const std::string& n : f.neighbors) {
      auto it = variable_index_.find(n);
      if (it == variable_index_.end()) {
        throw ShapeError("factor " + f.id + " references unknown variable " + n);
      }
      if (std::find(seen.begin(), seen.end(), n) != seen.end()) {
        throw ShapeError("factor " + f.id + " lists variable " + n + " twice");
      }
      seen.push_back(n);
      expect *= variables_[it->second].domain_size;
    }
    if (f.table.size() != expect) {
      throw ShapeError("factor " + f.id + " table has length " +
                       std::to_string(f.table.size()) + ", expected " +
                       std::to_string(expect));
    }
    if ((f.table.array() < 0.0).any()) {
      throw ShapeError("factor " + f.id + " has a negative table entry");
    }
  }
}

const ClassicalVariable& ClassicalFactorGraph::variable(
    const std::string& id) const {
  return variables_[variable_index(id)];
}

std::size_t ClassicalFactorGraph::variable_index(const std::string& id) const {
  auto it = variable_index_.find(id);
  if (it == variable_index_.end()) {
    throw ShapeError("unknown variable id " + id);
  }
  return it->second;
}

std::vector<std::pair<std::string, std::string>> ClassicalFactorGraph::edges()
    const {
  std::vector<std::pair<std::string, std::string>> e;
  for (const ClassicalFactor& f : factors_) {
    for (const std::string& n : f.neighbors) e.emplace_back(n, f.id);
  }
  return e;
}

std::vector<std::string> ClassicalFactorGraph::neighbors_of_variable(
    const std::string& id) const {
  std::vector<std::string> out;
  for (const ClassicalFactor& f : factors_) {
    if (std::find(f.neighbors.begin(), f.neighbors.end(), id) !=
        f.neighbors.end()) {
      out.push_back(f.id);
    }
  }
  return out;
}

std::int64_t ClassicalFactorGraph::state_space_size() const {
  std::int64_t t = 1;
  for (const ClassicalVariable& var : variables_) {
    t *= var.domain_size;
    if (t > kMaxClassicalStates) return t;
  }
  return t;
}

double z_classical(const ClassicalFactorGraph& g) {
  if (g.state_space_size() > kMaxClassicalStates) {
    throw SizeError("classical state space exceeds guard of " +
                    std::to_string(kMaxClassicalStates));
  }

  std::vector<int> dims;
  dims.reserve(g.variables().size());
  for (const ClassicalVariable& var : g.variables()) {
    dims.push_back(var.domain_size);
  }

  // Per-factor: strides of each neighbor within the factor table plus the
  // position of the neighbor in the global assignment.
  struct FactorPlan {
    const Eigen::VectorXd* table;
    std::vector<std::size_t> var_pos;
    std::vector<std::int64_t> table_strides;
  };
  std::vector<FactorPlan> plans;
  for (const ClassicalFactor& f : g.factors()) {
    FactorPlan p;
    p.table = &f.table;
    std::vector<int> fdims;
    for (const std::string& n : f.neighbors) {
      p.var_pos.push_back(g.variable_index(n));
      fdims.push_back(g.variable(n).domain_size);
    }
    p.table_strides = indexing::strides(fdims);
    plans.push_back(std::move(p));
  }

  const std::int64_t states = indexing::total(dims);
  std::vector<int> assignment;
  double z = 0.0;
  for (std::int64_t s = 0; s < states; ++s) {
    indexing::decompose(s, dims, assignment);
    double w = 1.0;
    for (std::size_t k = 0; k < g.variables().size(); ++k) {
      w *= g.variables()[k].weight[assignment[k]];
    }
    for (const FactorPlan& p : plans) {
      std::int64_t idx = 0;
      for (std::size_t k = 0; k < p.var_pos.size(); ++k) {
        idx += assignment[p.var_pos[k]] * p.table_strides[k];
      }
      w *= (*p.table)[idx];
    }
    z += w;
  }
  return z;
}

void ClassicalTransformSet::add(ClassicalEdgeTransform t) {
  auto key = std::make_pair(t.variable, t.factor);
  if (!transforms_.emplace(key, std::move(t)).second) {
    throw ShapeError("duplicate transform for edge (" + key.first + ", " +
                     key.second + ")");
  }
}

const ClassicalEdgeTransform& ClassicalTransformSet::at(
    const std::string& variable, const std::string& factor) const {
  auto it = transforms_.find({variable, factor});
  if (it == transforms_.end()) {
    throw ShapeError("missing transform for edge (" + variable + ", " +
                     factor + ")");
  }
  return it->second;
}

bool ClassicalTransformSet::has(const std::string& variable,
                                const std::string& factor) const {
  return transforms_.count({variable, factor}) > 0;
}

double check_biorthogonality(const ClassicalEdgeTransform& t) {
  if (t.phi.rows() != t.phi.cols() || t.phi_hat.rows() != t.phi_hat.cols() ||
      t.phi.cols() != t.phi_hat.rows()) {
    throw ShapeError("transform for edge (" + t.variable + ", " + t.factor +
                     ") has mismatched matrix shapes");
  }
  const Eigen::MatrixXd prod = t.phi * t.phi_hat;
  return (prod - Eigen::MatrixXd::Identity(prod.rows(), prod.cols()))
      .cwiseAbs()
      .maxCoeff();
}

namespace {

void check_edge_cover(const ClassicalFactorGraph& g,
                      const ClassicalTransformSet& ts) {
  const auto edges = g.edges();
  for (const auto& [var, fac] : edges) {
    if (!ts.has(var, fac)) {
      throw ShapeError("missing transform for edge (" + var + ", " + fac + ")");
    }
  }
  if (ts.size() != edges.size()) {
    for (const auto& [key, t] : ts.entries()) {
      if (std::find(edges.begin(), edges.end(), key) == edges.end()) {
        throw ShapeError("transform for nonexistent edge (" + key.first +
                         ", " + key.second + ")");
      }
    }
  }
}

// Builds the hatted tables without the biorthogonality gate; callers decide
// whether violations are exceptions (classical_transform) or verdicts
// (verify_classical_holant).
TransformedClassicalGraph transform_tables(const ClassicalFactorGraph& g,
                                           const ClassicalTransformSet& ts) {
  TransformedClassicalGraph out;
  std::map<std::pair<std::string, std::string>, std::size_t> edge_index;
  for (const auto& [var, fac] : g.edges()) {
    edge_index[{var, fac}] = out.edges.size();
    out.edges.push_back({var, fac, g.variable(var).domain_size});
  }

  // \hat f_a(y) = sum_z f_a(z) prod_{i in da} phi_hat_{i,a}(y_i, z_i)
  for (const ClassicalFactor& f : g.factors()) {
    TransformedClassicalGraph::Table table;
    table.id = f.id;
    std::vector<int> fdims;
    std::vector<const Eigen::MatrixXd*> hats;
    for (const std::string& n : f.neighbors) {
      table.edge_indices.push_back(edge_index.at({n, f.id}));
      fdims.push_back(g.variable(n).domain_size);
      hats.push_back(&ts.at(n, f.id).phi_hat);
    }
    const std::int64_t side = indexing::total(fdims);
    table.values = Eigen::VectorXd::Zero(side);
    std::vector<int> y, z;
    for (std::int64_t yi = 0; yi < side; ++yi) {
      indexing::decompose(yi, fdims, y);
      long double acc = 0.0L;
      for (std::int64_t zi = 0; zi < side; ++zi) {
        indexing::decompose(zi, fdims, z);
        long double w = f.table[zi];
        for (std::size_t k = 0; k < hats.size() && w != 0.0L; ++k) {
          w *= (*hats[k])(y[k], z[k]);
        }
        acc += w;
      }
      table.values[yi] = static_cast<double>(acc);
    }
    out.factor_tables.push_back(std::move(table));
  }

  // \hat f_i(y) = sum_x f_i(x) prod_{a in di} phi_{i,a}(x, y_a)
  for (const ClassicalVariable& var : g.variables()) {
    TransformedClassicalGraph::Table table;
    table.id = var.id;
    std::vector<int> vdims;
    std::vector<const Eigen::MatrixXd*> phis;
    for (const std::string& fac : g.neighbors_of_variable(var.id)) {
      table.edge_indices.push_back(edge_index.at({var.id, fac}));
      vdims.push_back(var.domain_size);
      phis.push_back(&ts.at(var.id, fac).phi);
    }
    const std::int64_t side = indexing::total(vdims);
    table.values = Eigen::VectorXd::Zero(side);
    std::vector<int> y;
    for (std::int64_t yi = 0; yi < side; ++yi) {
      indexing::decompose(yi, vdims, y);
      long double acc = 0.0L;
      for (int x = 0; x < var.domain_size; ++x) {
        long double w = var.weight[x];
        for (std::size_t k = 0; k < phis.size() && w != 0.0L; ++k) {
          w *= (*phis[k])(x, y[k]);
        }
        acc += w;
      }
      table.values[yi] = static_cast<double>(acc);
    }
    out.variable_tables.push_back(std::move(table));
  }
  return out;
}

}  // namespace

TransformedClassicalGraph classical_transform(const ClassicalFactorGraph& g,
                                              const ClassicalTransformSet& ts,
                                              const Tolerances& tol) {
  check_edge_cover(g, ts);
  for (const auto& [key, t] : ts.entries()) {
    const double residual = check_biorthogonality(t);
    if (residual > tol.biorthogonality) {
      throw NumericError("edge (" + key.first + ", " + key.second +
                         ") violates biorthogonality: residual " +
                         std::to_string(residual));
    }
  }
  return transform_tables(g, ts);
}

double z_transformed_classical(const TransformedClassicalGraph& t) {
  std::vector<int> dims;
  std::int64_t states = 1;
  for (const auto& e : t.edges) {
    dims.push_back(e.domain_size);
    states *= e.domain_size;
    if (states > kMaxClassicalStates) {
      throw SizeError("transformed state space exceeds guard of " +
                      std::to_string(kMaxClassicalStates));
    }
  }

  struct Plan {
    const Eigen::VectorXd* values;
    std::vector<std::size_t> edge_pos;
    std::vector<std::int64_t> strides;
  };
  std::vector<Plan> plans;
  auto add_plans = [&](const std::vector<TransformedClassicalGraph::Table>& ts_) {
    for (const auto& table : ts_) {
      Plan p;
      p.values = &table.values;
      std::vector<int> tdims;
      for (std::size_t e : table.edge_indices) {
        p.edge_pos.push_back(e);
        tdims.push_back(t.edges[e].domain_size);
      }
      p.strides = indexing::strides(tdims);
      plans.push_back(std::move(p));
    }
  };
  add_plans(t.factor_tables);
  add_plans(t.variable_tables);

  // Hatted tables carry mixed signs, so this sum cancels; extended-precision
  // accumulation keeps the Holant comparison meaningful at 1e-9.
  std::vector<int> y;
  long double z = 0.0L;
  for (std::int64_t s = 0; s < states; ++s) {
    indexing::decompose(s, dims, y);
    long double w = 1.0L;
    for (const Plan& p : plans) {
      std::int64_t idx = 0;
      for (std::size_t k = 0; k < p.edge_pos.size(); ++k) {
        idx += y[p.edge_pos[k]] * p.strides[k];
      }
      w *= (*p.values)[idx];
      if (w == 0.0L) break;
    }
    z += w;
  }
  return static_cast<double>(z);
}

HolantReport verify_classical_holant(const ClassicalFactorGraph& g,
                                     const ClassicalTransformSet& ts,
                                     const Tolerances& tol) {
  check_edge_cover(g, ts);

  HolantReport report;
  bool edges_ok = true;
  for (const auto& [key, t] : ts.entries()) {
    HolantReport::EdgeResidual er;
    er.variable = key.first;
    er.factor = key.second;
    er.mode = "classical";
    er.residual = check_biorthogonality(t);
    er.ok = er.residual <= tol.biorthogonality;
    if (!er.ok) {
      edges_ok = false;
      report.failures.push_back("edge (" + er.variable + ", " + er.factor +
                                ") biorthogonality residual " +
                                std::to_string(er.residual));
    }
    report.edge_residuals.push_back(std::move(er));
  }

  const double z = z_classical(g);
  const double zt = z_transformed_classical(transform_tables(g, ts));
  report.z_original = z;
  report.z_transformed = zt;
  report.discrepancy = std::abs(z - zt) / std::max(1.0, std::abs(z));

  if (!edges_ok) {
    report.verdict = Verdict::Fail;
  } else if (report.discrepancy <= tol.discrepancy_classical) {
    report.verdict = Verdict::Pass;
  } else {
    report.verdict = Verdict::Fail;
    report.failures.push_back("partition functions disagree: discrepancy " +
                              std::to_string(report.discrepancy));
  }
  return report;
}

}  // namespace holofg
