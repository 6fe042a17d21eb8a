#include "holofg/transform.hpp"

#include <algorithm>
#include <cmath>

#include "holofg/rng.hpp"

namespace holofg {

const char* mode_name(TransformMode m) {
  return m == TransformMode::Strong ? "strong" : "diagonal";
}

SpaceLabel hat_label(const std::string& variable, const std::string& factor,
                     int dim) {
  return SpaceLabel::hat(variable, factor, dim);
}

SpaceLabel prime_label(const std::string& variable, const std::string& factor,
                       int dim) {
  return SpaceLabel::prime(variable, factor, dim);
}

bool EdgeTransform::is_identity_pair(double tol_entry) const {
  const Eigen::Index qa = phi.domain_dim();
  if (phi.codomain_dim() != qa || phi_hat.domain_dim() != qa ||
      phi_hat.codomain_dim() != qa) {
    return false;
  }
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(qa * qa, qa * qa);
  return (phi.transfer() - id).cwiseAbs().maxCoeff() <= tol_entry &&
         (phi_hat.transfer() - id).cwiseAbs().maxCoeff() <= tol_entry;
}

void QuantumTransformSet::add(EdgeTransform t) {
  const int q = static_cast<int>(t.phi.codomain_dim());
  const SpaceLabel base = SpaceLabel::base(t.variable, q);
  const SpaceLabel hat = hat_label(t.variable, t.factor, q);
  const SpaceLabel prime = prime_label(t.variable, t.factor, q);
  const std::vector<SpaceLabel> want_phi_dom = {hat};
  const std::vector<SpaceLabel> want_phi_cod = {base};
  const std::vector<SpaceLabel> want_hat_dom = {prime};
  const std::vector<SpaceLabel> want_hat_cod = {hat};
  if (t.phi.domain() != want_phi_dom || t.phi.codomain() != want_phi_cod ||
      t.phi_hat.domain() != want_hat_dom ||
      t.phi_hat.codomain() != want_hat_cod) {
    throw ShapeError("transform for edge (" + t.variable + ", " + t.factor +
                     ") does not follow the hat/prime label scheme");
  }
  auto key = std::make_pair(t.variable, t.factor);
  if (!entries_.emplace(key, std::move(t)).second) {
    throw ShapeError("duplicate transform for edge (" + key.first + ", " +
                     key.second + ")");
  }
}

const EdgeTransform& QuantumTransformSet::at(const std::string& variable,
                                             const std::string& factor) const {
  auto it = entries_.find({variable, factor});
  if (it == entries_.end()) {
    throw ShapeError("missing transform for edge (" + variable + ", " +
                     factor + ")");
  }
  return it->second;
}

bool QuantumTransformSet::has(const std::string& variable,
                              const std::string& factor) const {
  return entries_.count({variable, factor}) > 0;
}

LabeledOperator factor_on_prime(const QuantumFactorGraph& g,
                                const std::string& factor_id) {
  const QuantumFactor& f = g.factor(factor_id);
  std::vector<SpaceLabel> primed;
  for (const SpaceLabel& l : f.table.labels()) {
    primed.push_back(prime_label(l.node, factor_id, l.dim));
  }
  return f.table.relabeled(primed);
}

namespace {

void check_edge_cover(const QuantumFactorGraph& g,
                      const QuantumTransformSet& ts) {
  const auto edges = g.edges();
  for (const auto& [var, fac] : edges) {
    if (!ts.has(var, fac)) {
      throw ShapeError("missing transform for edge (" + var + ", " + fac +
                       ")");
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

double form_agreement(const LabeledOperator& a, const LabeledOperator& b) {
  return (a.entries() - b.entries()).norm() /
         std::max(1.0, b.entries().norm());
}

// Trace-form hatted variable operator; shared by transform_variable and the
// order-sensitivity probe.
LabeledOperator variable_trace_form(const QuantumFactorGraph& g,
                                    const std::string& variable_id,
                                    const QuantumTransformSet& ts,
                                    const std::vector<std::string>& edge_order) {
  const QuantumVariable& v = g.variable(variable_id);
  const SpaceLabel base = SpaceLabel::base(v.id, v.dim);

  std::vector<SpaceLabel> ext = {base};
  for (const std::string& fac : edge_order) {
    ext.push_back(hat_label(v.id, fac, v.dim));
  }
  std::sort(ext.begin(), ext.end(), label_less);

  Eigen::MatrixXcd acc =
      extend_identity(transpose(v.weight), ext).entries();
  for (const std::string& fac : edge_order) {
    const LabeledOperator phi = ts.at(v.id, fac).phi_cj();
    acc = acc * extend_identity(transpose(phi), ext).entries();
  }
  return partial_trace(LabeledOperator(ext, std::move(acc)), {base});
}

}  // namespace

LabeledOperator transform_factor(const QuantumFactorGraph& g,
                                 const std::string& factor_id,
                                 const QuantumTransformSet& ts,
                                 const Tolerances& tol) {
  const QuantumFactor& f = g.factor(factor_id);
  const LabeledOperator f_prime = factor_on_prime(g, factor_id);

  // Map form: apply each edge's Phi_hat to the corresponding prime leg.
  LabeledOperator map_form = f_prime;
  for (const std::string& n : f.neighbors) {
    map_form = apply(ts.at(n, factor_id).phi_hat, map_form);
  }

  // Trace form: Tr_prime((tensor of phi_hat CJs) f'^T). The CJ factors live
  // on disjoint leg pairs, so the prime legs trace out one edge at a time;
  // intermediates then stay one leg larger than the factor itself.
  LabeledOperator trace_form = transpose(f_prime);
  for (const std::string& n : f.neighbors) {
    const SpaceLabel prime = prime_label(n, factor_id, g.variable(n).dim);
    trace_form = partial_trace(
        extended_product(ts.at(n, factor_id).phi_hat_cj(), trace_form),
        {prime});
  }

  const double agreement = form_agreement(trace_form, map_form);
  if (agreement > tol.identity) {
    throw NumericError("transform_factor forms disagree for factor " +
                       factor_id + ": residual " + std::to_string(agreement));
  }
  return map_form;
}

LabeledOperator transform_variable(const QuantumFactorGraph& g,
                                   const std::string& variable_id,
                                   const QuantumTransformSet& ts,
                                   const std::vector<std::string>& edge_order,
                                   const Tolerances& tol) {
  const auto neighbors = g.neighbors_of_variable(variable_id);
  if (neighbors.empty()) {
    throw ShapeError("variable " + variable_id + " has no incident edges");
  }
  if (edge_order.size() != neighbors.size()) {
    throw ShapeError("edge order does not cover the neighborhood of " +
                     variable_id);
  }
  for (const std::string& fac : neighbors) {
    if (std::find(edge_order.begin(), edge_order.end(), fac) ==
        edge_order.end()) {
      throw ShapeError("edge order misses factor " + fac + " at variable " +
                       variable_id);
    }
  }

  const QuantumVariable& v = g.variable(variable_id);

  // Map form: adjoint of the bar-tensor fold, applied to f_i. The trace form
  // multiplies transposed CJ matrices in edge order, which pairs against
  // images multiplied in the opposite order, so the fold runs reversed to
  // make the two forms define the same operator.
  SuperOperator fold = ts.at(variable_id, edge_order.back()).phi;
  for (std::size_t k = edge_order.size() - 1; k-- > 0;) {
    fold = bar_otimes(fold, ts.at(variable_id, edge_order[k]).phi);
  }
  const LabeledOperator map_form = apply(adjoint(fold), v.weight);

  const LabeledOperator trace_form =
      variable_trace_form(g, variable_id, ts, edge_order);

  const double agreement = form_agreement(trace_form, map_form);
  if (agreement > tol.identity) {
    throw NumericError("transform_variable forms disagree for variable " +
                       variable_id + ": residual " +
                       std::to_string(agreement));
  }
  return map_form;
}

TransformedQuantumGraph transform_graph(const QuantumFactorGraph& g,
                                        const QuantumTransformSet& ts,
                                        const Tolerances& tol) {
  check_edge_cover(g, ts);
  TransformedQuantumGraph out;
  for (const QuantumFactor& f : g.factors()) {
    out.factor_tables.emplace_back(f.id, transform_factor(g, f.id, ts, tol));
  }
  for (const QuantumVariable& v : g.variables()) {
    const auto order = g.neighbors_of_variable(v.id);
    if (order.empty()) {
      out.variable_tables.emplace_back(v.id, LabeledOperator(trace(v.weight)));
    } else {
      out.variable_tables.emplace_back(
          v.id, transform_variable(g, v.id, ts, order, tol));
    }
  }
  return out;
}

std::complex<double> z_transformed(const TransformedQuantumGraph& t,
                                   const Tolerances& tol) {
  auto fold_tensor = [](const std::vector<std::pair<std::string, LabeledOperator>>&
                            tables) {
    LabeledOperator acc(std::complex<double>(1.0));
    for (const auto& [id, op] : tables) acc = tensor_product(acc, op);
    return acc;
  };
  const LabeledOperator from_factors = fold_tensor(t.factor_tables);
  const LabeledOperator from_variables = fold_tensor(t.variable_tables);

  if (from_factors.labels().empty()) {
    throw ShapeError("transformed graph has no hat spaces to trace over");
  }
  if (from_factors.labels() != from_variables.labels()) {
    std::string msg = "hat spaces are not covered exactly once per family:";
    for (const SpaceLabel& l : from_factors.labels()) {
      if (!from_variables.has_label(l)) msg += " " + l.str();
    }
    for (const SpaceLabel& l : from_variables.labels()) {
      if (!from_factors.has_label(l)) msg += " " + l.str();
    }
    throw ShapeError(msg);
  }

  const std::complex<double> z =
      (from_factors.entries() * from_variables.entries()).trace();
  const std::complex<double> z_t = (from_factors.entries().transpose() *
                                    from_variables.entries().transpose())
                                       .trace();
  if (std::abs(z - z_t) > tol.identity * std::max(1.0, std::abs(z))) {
    throw NumericError(
        "transformed trace and its transposed form disagree: |dz| = " +
        std::to_string(std::abs(z - z_t)));
  }
  return z;
}

double swap_teleport_check(const LabeledOperator& f_prime) {
  std::vector<SpaceLabel> primes = f_prime.labels();
  if (primes.empty()) throw ShapeError("empty operator");
  std::string factor_id;
  for (const SpaceLabel& l : primes) {
    if (l.tier != Tier::Prime) {
      throw ShapeError("swap_teleport_check expects prime-tier legs, got " +
                       l.str());
    }
    if (factor_id.empty()) {
      factor_id = l.factor;
    } else if (l.factor != factor_id) {
      throw ShapeError("legs belong to different factors");
    }
  }

  LabeledOperator swaps(std::complex<double>(1.0));
  std::vector<SpaceLabel> bases;
  for (const SpaceLabel& l : primes) {
    const SpaceLabel base = SpaceLabel::base(l.node, l.dim);
    bases.push_back(base);
    swaps = tensor_product(swaps, swap_operator(base, l));
  }

  const LabeledOperator prod = extended_product(f_prime, swaps);
  const LabeledOperator teleported = partial_trace(prod, primes);
  const LabeledOperator expected = f_prime.relabeled(bases);
  const double denom = std::max(1e-300, expected.entries().norm());
  return (teleported.entries() - expected.entries()).norm() / denom;
}

HolantReport verify_quantum_holant(const QuantumFactorGraph& g,
                                   const QuantumTransformSet& ts,
                                   const Tolerances& tol) {
  check_edge_cover(g, ts);

  HolantReport report;
  bool edges_ok = true;

  for (const auto& [key, t] : ts.entries()) {
    HolantReport::EdgeResidual er;
    er.variable = key.first;
    er.factor = key.second;
    er.mode = mode_name(t.mode);
    if (t.mode == TransformMode::Strong) {
      const InversePairCheck c = check_strong_inverse(t.phi_cj(), t.phi_hat_cj());
      er.residual = std::max(c.swap_residual, c.compose_residual);
    } else {
      // Diagonal mode restricts the CJ matrices to the computational
      // diagonal; off-diagonal mass violates the mode, not just the final
      // trace condition (which is blind to it).
      auto offdiag = [](const Eigen::MatrixXcd& m) {
        double scale = 1.0, worst = 0.0;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          scale = std::max(scale, std::abs(m(r, r)));
          for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (r != c) worst = std::max(worst, std::abs(m(r, c)));
          }
        }
        return worst / scale;
      };
      er.residual =
          std::max({check_diagonal_inverse(t.phi_cj(), t.phi_hat_cj()),
                    offdiag(t.phi.cj()), offdiag(t.phi_hat.cj())});
    }
    er.ok = er.residual <= tol.inverse;
    if (!er.ok) {
      edges_ok = false;
      report.failures.push_back("edge (" + er.variable + ", " + er.factor +
                                ") fails its " + er.mode +
                                " inverse condition: residual " +
                                std::to_string(er.residual));
    }
    report.edge_residuals.push_back(std::move(er));
  }

  // Per-node commutation of the extended phi CJ operators. Pure relabeling
  // pairs never commute as operators at degree >= 2, but the transformed
  // trace is provably order-independent for them; they are exempt.
  bool commutation_ok = true;
  for (const QuantumVariable& v : g.variables()) {
    const auto neighbors = g.neighbors_of_variable(v.id);
    if (neighbors.size() < 2) continue;
    HolantReport::NodeResidual nr;
    nr.node = v.id;
    nr.identity_exempt = true;
    for (const std::string& fac : neighbors) {
      if (!ts.at(v.id, fac).is_identity_pair()) {
        nr.identity_exempt = false;
        break;
      }
    }
    for (std::size_t a = 0; a < neighbors.size(); ++a) {
      for (std::size_t b = a + 1; b < neighbors.size(); ++b) {
        nr.residual = std::max(
            nr.residual,
            commutation_residual(ts.at(v.id, neighbors[a]).phi_cj(),
                                 ts.at(v.id, neighbors[b]).phi_cj()));
      }
    }
    nr.ok = nr.residual <= tol.commute || nr.identity_exempt;
    if (!nr.ok) {
      commutation_ok = false;
      report.failures.push_back(
          "node " + v.id + " transform commutation residual " +
          std::to_string(nr.residual) + "; verification is exploratory");
    }
    report.node_commutation.push_back(std::move(nr));
  }

  for (std::size_t a = 0; a < g.factors().size(); ++a) {
    for (std::size_t b = a + 1; b < g.factors().size(); ++b) {
      report.factor_commutation.push_back(
          {g.factors()[a].id, g.factors()[b].id,
           commutation_residual(g.factors()[a].table, g.factors()[b].table)});
    }
  }

  report.z_original = z_quantum(g, tol);

  const TransformedQuantumGraph transformed = transform_graph(g, ts, tol);
  report.z_transformed = z_transformed(transformed, tol);
  report.discrepancy = std::abs(report.z_original - report.z_transformed) /
                       std::max(1.0, std::abs(report.z_original));

  // Order-sensitivity probe: re-evaluate the transformed trace with the
  // per-node edge orders induced by permuted factor orders.
  {
    std::vector<std::string> factor_ids;
    for (const QuantumFactor& f : g.factors()) factor_ids.push_back(f.id);
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
      Rng rng(0x9E3779B97F4A7C15ull + trial);
      std::vector<std::string> order = factor_ids;
      rng.shuffle(order);
      TransformedQuantumGraph probe;
      probe.factor_tables = transformed.factor_tables;
      for (const QuantumVariable& v : g.variables()) {
        const auto neighbors = g.neighbors_of_variable(v.id);
        if (neighbors.empty()) {
          probe.variable_tables.emplace_back(v.id,
                                             LabeledOperator(trace(v.weight)));
          continue;
        }
        std::vector<std::string> edge_order;
        for (const std::string& fac : order) {
          if (std::find(neighbors.begin(), neighbors.end(), fac) !=
              neighbors.end()) {
            edge_order.push_back(fac);
          }
        }
        probe.variable_tables.emplace_back(
            v.id, variable_trace_form(g, v.id, ts, edge_order));
      }
      const std::complex<double> zp = z_transformed(probe, tol);
      report.order_probe = std::max(
          report.order_probe,
          std::abs(zp - report.z_transformed) /
              std::max(1.0, std::abs(report.z_transformed)));
    }
  }

  if (!edges_ok) {
    report.verdict = Verdict::Fail;
  } else if (!commutation_ok) {
    report.verdict = Verdict::Exploratory;
  } else if (report.discrepancy <= tol.discrepancy_quantum) {
    report.verdict = Verdict::Pass;
  } else {
    report.verdict = Verdict::Fail;
    report.failures.push_back("partition functions disagree: discrepancy " +
                              std::to_string(report.discrepancy));
  }
  return report;
}

ClassicalTransformSet induced_classical_transforms(
    const QuantumFactorGraph& g, const QuantumTransformSet& ts) {
  ClassicalTransformSet out;
  for (const auto& [key, t] : ts.entries()) {
    if (t.mode != TransformMode::Diagonal) {
      throw ShapeError("edge (" + key.first + ", " + key.second +
                       ") is not diagonal-mode");
    }
    const int q = g.variable(key.first).dim;
    Eigen::MatrixXd phi(q, q), phi_hat(q, q);
    for (int x = 0; x < q; ++x) {
      for (int y = 0; y < q; ++y) {
        phi(x, y) = t.phi.cj()(x * q + y, x * q + y).real();
        phi_hat(x, y) = t.phi_hat.cj()(x * q + y, x * q + y).real();
      }
    }
    out.add({key.first, key.second, phi, phi_hat});
  }
  return out;
}

}  // namespace holofg
