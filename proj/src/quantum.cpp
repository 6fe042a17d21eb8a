#include "holofg/quantum.hpp"

#include <algorithm>
#include <cmath>

#include "holofg/rng.hpp"

namespace holofg {

namespace {

void check_psd(const LabeledOperator& op, const std::string& what,
               const Tolerances& tol) {
  try {
    psd_spectrum(op.entries(), tol, what.c_str());
  } catch (const NumericError& e) {
    throw NumericError(what + ": " + e.what());
  }
}

}  // namespace

QuantumFactorGraph::QuantumFactorGraph(std::vector<QuantumVariable> variables,
                                       std::vector<QuantumFactor> factors,
                                       const Tolerances& tol)
    : variables_(std::move(variables)), factors_(std::move(factors)) {
  std::int64_t total = 1;
  std::vector<std::string> ids;
  for (const QuantumVariable& v : variables_) {
    if (v.id.empty()) throw ShapeError("variable with empty id");
    if (std::find(ids.begin(), ids.end(), v.id) != ids.end()) {
      throw ShapeError("duplicate variable id " + v.id);
    }
    ids.push_back(v.id);
    if (v.dim < 1) {
      throw ShapeError("variable " + v.id + " has dim " +
                       std::to_string(v.dim));
    }
    total *= v.dim;
    if (total > kMaxOperatorDim) {
      throw SizeError("total Hilbert dimension exceeds guard of " +
                      std::to_string(kMaxOperatorDim));
    }
    const std::vector<SpaceLabel> expect = {SpaceLabel::base(v.id, v.dim)};
    if (v.weight.labels() != expect) {
      throw ShapeError("variable " + v.id +
                       " weight operator is not on its own base space");
    }
    check_psd(v.weight, "variable " + v.id, tol);
  }

  std::vector<std::string> fids;
  for (const QuantumFactor& f : factors_) {
    if (f.id.empty()) throw ShapeError("factor with empty id");
    if (std::find(fids.begin(), fids.end(), f.id) != fids.end()) {
      throw ShapeError("duplicate factor id " + f.id);
    }
    fids.push_back(f.id);
    if (f.neighbors.empty()) {
      throw ShapeError("factor " + f.id + " has no neighbors");
    }
    std::vector<SpaceLabel> expect;
    std::vector<std::string> seen;
    for (const std::string& n : f.neighbors) {
      if (std::find(seen.begin(), seen.end(), n) != seen.end()) {
        throw ShapeError("factor " + f.id + " lists variable " + n + " twice");
      }
      seen.push_back(n);
      expect.push_back(SpaceLabel::base(n, variable(n).dim));
    }
    std::sort(expect.begin(), expect.end(), label_less);
    if (f.table.labels() != expect) {
      throw ShapeError("factor " + f.id +
                       " operator labels do not match its neighbor spaces");
    }
    check_psd(f.table, "factor " + f.id, tol);
  }

  for (std::size_t a = 0; a < factors_.size(); ++a) {
    for (std::size_t b = a + 1; b < factors_.size(); ++b) {
      const double r =
          commutation_residual(factors_[a].table, factors_[b].table);
      if (r > tol.commute) {
        throw NumericError("factors " + factors_[a].id + " and " +
                           factors_[b].id + " do not commute: residual " +
                           std::to_string(r));
      }
    }
  }
}

const QuantumVariable& QuantumFactorGraph::variable(
    const std::string& id) const {
  for (const QuantumVariable& v : variables_) {
    if (v.id == id) return v;
  }
  throw ShapeError("unknown variable id " + id);
}

const QuantumFactor& QuantumFactorGraph::factor(const std::string& id) const {
  for (const QuantumFactor& f : factors_) {
    if (f.id == id) return f;
  }
  throw ShapeError("unknown factor id " + id);
}

std::vector<std::pair<std::string, std::string>> QuantumFactorGraph::edges()
    const {
  std::vector<std::pair<std::string, std::string>> e;
  for (const QuantumFactor& f : factors_) {
    for (const std::string& n : f.neighbors) e.emplace_back(n, f.id);
  }
  return e;
}

std::vector<std::string> QuantumFactorGraph::neighbors_of_variable(
    const std::string& id) const {
  std::vector<std::string> out;
  for (const QuantumFactor& f : factors_) {
    if (std::find(f.neighbors.begin(), f.neighbors.end(), id) !=
        f.neighbors.end()) {
      out.push_back(f.id);
    }
  }
  return out;
}

std::vector<SpaceLabel> QuantumFactorGraph::full_space() const {
  std::vector<SpaceLabel> labels;
  for (const QuantumVariable& v : variables_) {
    labels.push_back(SpaceLabel::base(v.id, v.dim));
  }
  std::sort(labels.begin(), labels.end(), label_less);
  return labels;
}

std::int64_t QuantumFactorGraph::total_dim() const {
  std::int64_t t = 1;
  for (const QuantumVariable& v : variables_) t *= v.dim;
  return t;
}

double QuantumFactorGraph::factor_commutation_residual() const {
  double worst = 0.0;
  for (std::size_t a = 0; a < factors_.size(); ++a) {
    for (std::size_t b = a + 1; b < factors_.size(); ++b) {
      worst = std::max(
          worst, commutation_residual(factors_[a].table, factors_[b].table));
    }
  }
  return worst;
}

LabeledOperator star_n(const LabeledOperator& lambda,
                       const LabeledOperator& lambda_prime, int n,
                       const Tolerances& tol) {
  if (n < 1) throw ShapeError("star_n order must be a positive integer");
  const auto u = label_union(lambda.labels(), lambda_prime.labels());
  const LabeledOperator l = extend_identity(lambda, u);
  const LabeledOperator lp = extend_identity(lambda_prime, u);

  const LabeledOperator a = frac_power(l, 2 * n, tol);
  const LabeledOperator b = frac_power(lp, n, tol);
  const Eigen::MatrixXcd core = a.entries() * b.entries() * a.entries();

  // core is PSD up to rounding; its n-th power via the clamped spectrum.
  PsdSpectrum s = psd_spectrum(core, tol, "star_n core");
  Eigen::VectorXd powered(s.eigenvalues.size());
  for (Eigen::Index k = 0; k < powered.size(); ++k) {
    powered[k] = std::pow(s.eigenvalues[k], static_cast<double>(n));
  }
  return LabeledOperator(
      u, s.eigenvectors * powered.asDiagonal() * s.eigenvectors.adjoint());
}

LabeledOperator odot(const LabeledOperator& lambda,
                     const LabeledOperator& lambda_prime,
                     const Tolerances& tol) {
  const auto labels = label_union(lambda.labels(), lambda_prime.labels());
  const LabeledOperator l = extend_identity(lambda, labels);
  const LabeledOperator lp = extend_identity(lambda_prime, labels);

  const LabeledOperator p = support_projector(l, tol);
  const LabeledOperator pp = support_projector(lp, tol);

  // The intersection of the supports is the eigenvalue-2 eigenspace of the
  // projector sum.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(p.entries() +
                                                         pp.entries());
  if (solver.info() != Eigen::Success) {
    throw NumericError("odot: support intersection eigensolve failed");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    if (solver.eigenvalues()[k] >= 2.0 - 1e-7) keep.push_back(k);
  }
  const Eigen::Index rank = static_cast<Eigen::Index>(keep.size());
  if (rank == 0) {
    return LabeledOperator(labels,
                           Eigen::MatrixXcd::Zero(l.dim(), l.dim()));
  }
  Eigen::MatrixXcd q(l.dim(), rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    q.col(k) = solver.eigenvectors().col(keep[static_cast<std::size_t>(k)]);
  }

  auto restricted_log = [&](const LabeledOperator& op) {
    const Eigen::MatrixXcd r = q.adjoint() * op.entries() * q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (r + r.adjoint().eval()));
    if (es.info() != Eigen::Success) {
      throw NumericError("odot: restricted eigensolve failed");
    }
    Eigen::VectorXd logs(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < logs.size(); ++k) {
      const double v = es.eigenvalues()[k];
      if (v <= 0.0) {
        throw NumericError(
            "odot: restriction to the support intersection is singular");
      }
      logs[k] = std::log(v);
    }
    return Eigen::MatrixXcd(es.eigenvectors() * logs.asDiagonal() *
                            es.eigenvectors().adjoint());
  };

  const Eigen::MatrixXcd sum = restricted_log(l) + restricted_log(lp);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (sum + sum.adjoint().eval()));
  Eigen::VectorXd exps(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < exps.size(); ++k) {
    exps[k] = std::exp(es.eigenvalues()[k]);
  }
  const Eigen::MatrixXcd on_s =
      es.eigenvectors() * exps.asDiagonal() * es.eigenvectors().adjoint();
  return LabeledOperator(labels, q * on_s * q.adjoint());
}

namespace {

// Full-space product of identity-extended factors, stored order.
LabeledOperator factor_product(const QuantumFactorGraph& g,
                               const std::vector<SpaceLabel>& space) {
  LabeledOperator prod = LabeledOperator::identity(space);
  Eigen::MatrixXcd acc = prod.entries();
  for (const QuantumFactor& f : g.factors()) {
    acc = acc * extend_identity(f.table, space).entries();
  }
  return LabeledOperator(space, std::move(acc));
}

LabeledOperator variable_tensor(const QuantumFactorGraph& g) {
  LabeledOperator acc;  // scalar one
  for (const QuantumVariable& v : g.variables()) {
    acc = tensor_product(acc, v.weight);
  }
  return acc;
}

}  // namespace

double z_quantum(const QuantumFactorGraph& g, const Tolerances& tol) {
  const double comm = g.factor_commutation_residual();
  if (comm > tol.commute) {
    throw NumericError("factor commutation residual " + std::to_string(comm) +
                       " exceeds " + std::to_string(tol.commute));
  }
  const auto space = g.full_space();
  const LabeledOperator fp = factor_product(g, space);
  const LabeledOperator vt = extend_identity(variable_tensor(g), space);
  const std::complex<double> z = (fp.entries() * vt.entries()).trace();
  if (std::abs(z.imag()) > tol.imag * std::max(1.0, std::abs(z.real()))) {
    throw NumericError("partition function has imaginary part " +
                       std::to_string(z.imag()) +
                       "; inputs violate PSD or commutation assumptions");
  }
  return z.real();
}

LabeledOperator density_operator(const QuantumFactorGraph& g,
                                 const Tolerances& tol) {
  const double z = z_quantum(g, tol);
  if (z <= 1e-12) {
    throw NumericError("partition function " + std::to_string(z) +
                       " is not safely positive; model is degenerate");
  }
  const auto space = g.full_space();
  const LabeledOperator fp = factor_product(g, space);
  const LabeledOperator vt = extend_identity(variable_tensor(g), space);
  const LabeledOperator s = star_n(fp, vt, 1, tol);
  return LabeledOperator(space, s.entries() / z);
}

namespace {

struct OverlapShape {
  std::vector<SpaceLabel> a, b, c;  // private-left, shared, private-right
};

OverlapShape overlap_shape(const LabeledOperator& lab,
                           const LabeledOperator& lbc) {
  OverlapShape s;
  for (const SpaceLabel& l : lab.labels()) {
    (lbc.has_label(l) ? s.b : s.a).push_back(l);
  }
  for (const SpaceLabel& l : lbc.labels()) {
    if (!lab.has_label(l)) s.c.push_back(l);
  }
  if (s.a.empty() || s.b.empty() || s.c.empty()) {
    throw ShapeError(
        "operands must overlap in one part and each own a private part");
  }
  return s;
}

}  // namespace

double check_star_distributivity(const LabeledOperator& lambda_ab,
                                 const LabeledOperator& lambda_bc,
                                 const Tolerances& tol) {
  const OverlapShape s = overlap_shape(lambda_ab, lambda_bc);
  const double lhs = trace(star_n(lambda_ab, lambda_bc, 1, tol)).real();
  const LabeledOperator ta = partial_trace(lambda_ab, s.a);
  const LabeledOperator tc = partial_trace(lambda_bc, s.c);
  const double rhs = trace(star_n(ta, tc, 1, tol)).real();
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

double odot_distributivity_discrepancy(const LabeledOperator& lambda_ab,
                                       const LabeledOperator& lambda_bc,
                                       const Tolerances& tol) {
  const OverlapShape s = overlap_shape(lambda_ab, lambda_bc);
  const double lhs = trace(odot(lambda_ab, lambda_bc, tol)).real();
  const LabeledOperator ta = partial_trace(lambda_ab, s.a);
  const LabeledOperator tc = partial_trace(lambda_bc, s.c);
  const double rhs = trace(odot(ta, tc, tol)).real();
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

std::optional<OdotWitness> find_odot_nondistributivity(std::uint64_t seed,
                                                       int trials,
                                                       double threshold) {
  Rng rng(seed);
  const SpaceLabel a = SpaceLabel::base("A", 2);
  const SpaceLabel b = SpaceLabel::base("B", 2);
  const SpaceLabel c = SpaceLabel::base("C", 2);
  for (int t = 0; t < trials; ++t) {
    const LabeledOperator lab({a, b}, rng.random_psd(4));
    const LabeledOperator lbc({b, c}, rng.random_psd(4));
    const double d = odot_distributivity_discrepancy(lab, lbc);
    if (d > threshold) {
      return OdotWitness{lab, lbc, d, t};
    }
  }
  return std::nullopt;
}

ClassicalFactorGraph induced_classical(const QuantumFactorGraph& g,
                                       const Tolerances& tol) {
  auto diagonal_of = [&](const LabeledOperator& op, const std::string& what) {
    const Eigen::MatrixXcd& m = op.entries();
    const Eigen::VectorXd diag = m.diagonal().real();
    const double scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
    Eigen::MatrixXcd off = m;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > tol.identity * scale ||
        m.diagonal().imag().cwiseAbs().maxCoeff() > tol.identity * scale) {
      throw NumericError(what + " is not diagonal in the computational basis");
    }
    return diag;
  };

  std::vector<ClassicalVariable> vars;
  for (const QuantumVariable& v : g.variables()) {
    ClassicalVariable cv;
    cv.id = v.id;
    cv.domain_size = v.dim;
    cv.weight = diagonal_of(v.weight, "variable " + v.id).cwiseMax(0.0);
    vars.push_back(std::move(cv));
  }
  std::vector<ClassicalFactor> facs;
  for (const QuantumFactor& f : g.factors()) {
    ClassicalFactor cf;
    cf.id = f.id;
    // The quantum operator is stored in canonical label order; the classical
    // table uses the stored neighbor order, so index through the leg order.
    std::vector<std::string> sorted_neighbors = f.neighbors;
    std::sort(sorted_neighbors.begin(), sorted_neighbors.end());
    cf.neighbors = sorted_neighbors;
    cf.table = diagonal_of(f.table, "factor " + f.id).cwiseMax(0.0);
    facs.push_back(std::move(cf));
  }
  return ClassicalFactorGraph(std::move(vars), std::move(facs));
}

}  // namespace holofg
