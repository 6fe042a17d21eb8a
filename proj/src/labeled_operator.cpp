#include "holofg/labeled_operator.hpp"

#include <algorithm>
#include <numeric>
#include <unsupported/Eigen/KroneckerProduct>

#include "holofg/indexing.hpp"

namespace holofg {

SpaceLabel SpaceLabel::base(std::string node, int dim) {
  if (dim < 1) throw ShapeError("label dim must be >= 1: " + node);
  return SpaceLabel{std::move(node), "", Tier::Base, dim};
}

SpaceLabel SpaceLabel::hat(std::string node, std::string factor, int dim) {
  if (dim < 1) throw ShapeError("label dim must be >= 1: " + node);
  if (factor.empty()) throw ShapeError("hat label needs a factor id: " + node);
  return SpaceLabel{std::move(node), std::move(factor), Tier::Hat, dim};
}

SpaceLabel SpaceLabel::prime(std::string node, std::string factor, int dim) {
  if (dim < 1) throw ShapeError("label dim must be >= 1: " + node);
  if (factor.empty())
    throw ShapeError("prime label needs a factor id: " + node);
  return SpaceLabel{std::move(node), std::move(factor), Tier::Prime, dim};
}

std::string SpaceLabel::str() const {
  switch (tier) {
    case Tier::Base:
      return node;
    case Tier::Hat:
      return node + ":" + factor + "^";
    default:
      return node + ":" + factor + "'";
  }
}

namespace {

std::int64_t guarded_total_dim(const std::vector<SpaceLabel>& labels) {
  std::int64_t t = 1;
  for (const SpaceLabel& l : labels) {
    t *= l.dim;
    if (t > kMaxOperatorDim) {
      throw SizeError("operator dimension exceeds guard of " +
                      std::to_string(kMaxOperatorDim));
    }
  }
  return t;
}

void check_unique(const std::vector<SpaceLabel>& sorted) {
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (label_same_space(sorted[k - 1], sorted[k])) {
      throw ShapeError("duplicate label in operator: " + sorted[k].str());
    }
  }
}

// Permutes the tensor legs of a square matrix. perm[k] is the position in the
// old leg order of the k-th new leg.
Eigen::MatrixXcd permute_legs(const Eigen::MatrixXcd& m,
                              const std::vector<int>& old_dims,
                              const std::vector<std::size_t>& perm) {
  std::vector<int> new_dims(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) new_dims[k] = old_dims[perm[k]];
  const auto new_strides = indexing::strides(new_dims);
  const Eigen::Index d = m.rows();

  std::vector<std::int64_t> map(static_cast<std::size_t>(d));
  std::vector<int> digits;
  for (std::int64_t o = 0; o < d; ++o) {
    indexing::decompose(o, old_dims, digits);
    std::int64_t n = 0;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      n += digits[perm[k]] * new_strides[k];
    }
    map[static_cast<std::size_t>(o)] = n;
  }

  Eigen::MatrixXcd out(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const std::int64_t nc = map[static_cast<std::size_t>(c)];
    for (Eigen::Index r = 0; r < d; ++r) {
      out(map[static_cast<std::size_t>(r)], nc) = m(r, c);
    }
  }
  return out;
}

}  // namespace

LabeledOperator::LabeledOperator()
    : labels_(), entries_(Eigen::MatrixXcd::Ones(1, 1)) {}

LabeledOperator::LabeledOperator(std::complex<double> scalar)
    : labels_(), entries_(Eigen::MatrixXcd::Constant(1, 1, scalar)) {}

LabeledOperator::LabeledOperator(std::vector<SpaceLabel> labels,
                                 Eigen::MatrixXcd entries) {
  const std::int64_t d = guarded_total_dim(labels);
  if (entries.rows() != entries.cols() || entries.rows() != d) {
    throw ShapeError("operator matrix is " + std::to_string(entries.rows()) +
                     "x" + std::to_string(entries.cols()) +
                     " but labels imply side " + std::to_string(d));
  }

  std::vector<std::size_t> perm(labels.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return label_less(labels[a], labels[b]);
  });

  labels_.reserve(labels.size());
  for (std::size_t k : perm) labels_.push_back(labels[k]);
  check_unique(labels_);

  bool already_sorted = true;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    if (perm[k] != k) {
      already_sorted = false;
      break;
    }
  }
  if (already_sorted) {
    entries_ = std::move(entries);
  } else {
    std::vector<int> old_dims(labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) old_dims[k] = labels[k].dim;
    entries_ = permute_legs(entries, old_dims, perm);
  }
}

LabeledOperator LabeledOperator::identity(std::vector<SpaceLabel> labels) {
  const std::int64_t d = guarded_total_dim(labels);
  return LabeledOperator(std::move(labels), Eigen::MatrixXcd::Identity(d, d));
}

bool LabeledOperator::has_label(const SpaceLabel& l) const {
  for (const SpaceLabel& mine : labels_) {
    if (label_same_space(mine, l)) return true;
  }
  return false;
}

std::vector<int> LabeledOperator::dims() const {
  std::vector<int> d(labels_.size());
  for (std::size_t k = 0; k < labels_.size(); ++k) d[k] = labels_[k].dim;
  return d;
}

LabeledOperator LabeledOperator::relabeled(
    const std::vector<SpaceLabel>& new_labels) const {
  if (new_labels.size() != labels_.size()) {
    throw ShapeError("relabel list has " + std::to_string(new_labels.size()) +
                     " entries for " + std::to_string(labels_.size()) +
                     " legs");
  }
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (new_labels[k].dim != labels_[k].dim) {
      throw ShapeError("relabel changes dim of leg " + labels_[k].str());
    }
  }
  return LabeledOperator(new_labels, entries_);
}

Eigen::MatrixXcd LabeledOperator::entries_in_leg_order(
    const std::vector<SpaceLabel>& order) const {
  if (order.size() != labels_.size()) {
    throw ShapeError("leg order lists " + std::to_string(order.size()) +
                     " labels for " + std::to_string(labels_.size()) +
                     " legs");
  }
  // perm[k] = position in the canonical order of the k-th requested leg.
  std::vector<std::size_t> perm(order.size());
  std::vector<bool> used(order.size(), false);
  for (std::size_t k = 0; k < order.size(); ++k) {
    bool found = false;
    for (std::size_t p = 0; p < labels_.size(); ++p) {
      if (!used[p] && label_same_space(labels_[p], order[k])) {
        perm[k] = p;
        used[p] = true;
        found = true;
        break;
      }
    }
    if (!found) {
      throw ShapeError("leg order names unknown label " + order[k].str());
    }
  }
  return permute_legs(entries_, dims(), perm);
}

LabeledOperator tensor_product(const LabeledOperator& a,
                               const LabeledOperator& b) {
  for (const SpaceLabel& l : b.labels()) {
    if (a.has_label(l)) {
      throw ShapeError("tensor_product operands share label " + l.str());
    }
  }
  std::vector<SpaceLabel> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  guarded_total_dim(labels);  // fail before materializing the product
  Eigen::MatrixXcd kron =
      Eigen::kroneckerProduct(a.entries(), b.entries()).eval();
  return LabeledOperator(std::move(labels), std::move(kron));
}

std::vector<SpaceLabel> label_union(const std::vector<SpaceLabel>& a,
                                    const std::vector<SpaceLabel>& b) {
  std::vector<SpaceLabel> u = a;
  for (const SpaceLabel& l : b) {
    bool found = false;
    for (const SpaceLabel& have : u) {
      if (label_same_space(have, l)) {
        if (have.dim != l.dim) {
          throw ShapeError("label " + l.str() + " declared with dims " +
                           std::to_string(have.dim) + " and " +
                           std::to_string(l.dim));
        }
        found = true;
        break;
      }
    }
    if (!found) u.push_back(l);
  }
  std::sort(u.begin(), u.end(), label_less);
  return u;
}

LabeledOperator extend_identity(const LabeledOperator& a,
                                const std::vector<SpaceLabel>& target) {
  std::vector<SpaceLabel> missing;
  for (const SpaceLabel& l : target) {
    if (!a.has_label(l)) missing.push_back(l);
  }
  for (const SpaceLabel& l : a.labels()) {
    bool found = false;
    for (const SpaceLabel& t : target) {
      if (label_same_space(t, l)) {
        if (t.dim != l.dim) {
          throw ShapeError("extension target redeclares " + l.str() +
                           " with dim " + std::to_string(t.dim));
        }
        found = true;
        break;
      }
    }
    if (!found) {
      throw ShapeError("extension target misses label " + l.str());
    }
  }
  if (missing.empty()) return a;
  return tensor_product(a, LabeledOperator::identity(std::move(missing)));
}

LabeledOperator partial_trace(const LabeledOperator& a,
                              const std::vector<SpaceLabel>& traced) {
  std::vector<bool> drop(a.labels().size(), false);
  for (const SpaceLabel& t : traced) {
    bool found = false;
    for (std::size_t k = 0; k < a.labels().size(); ++k) {
      if (label_same_space(a.labels()[k], t)) {
        drop[k] = true;
        found = true;
        break;
      }
    }
    if (!found) {
      throw ShapeError("partial_trace over unknown label " + t.str());
    }
  }

  // A sorted list stays sorted after dropping elements, so the kept legs are
  // already in canonical order.
  std::vector<SpaceLabel> kept;
  std::vector<int> kept_dims, traced_dims;
  std::vector<std::int64_t> kept_strides_in_a, traced_strides_in_a;
  const auto a_strides = indexing::strides(a.dims());
  for (std::size_t k = 0; k < a.labels().size(); ++k) {
    if (drop[k]) {
      traced_dims.push_back(a.labels()[k].dim);
      traced_strides_in_a.push_back(a_strides[k]);
    } else {
      kept.push_back(a.labels()[k]);
      kept_dims.push_back(a.labels()[k].dim);
      kept_strides_in_a.push_back(a_strides[k]);
    }
  }

  const std::int64_t dk = indexing::total(kept_dims);
  const std::int64_t dt = indexing::total(traced_dims);

  // Map composite kept/traced indices to offsets in A's index space.
  std::vector<std::int64_t> kept_offset(static_cast<std::size_t>(dk));
  std::vector<int> digits;
  for (std::int64_t i = 0; i < dk; ++i) {
    indexing::decompose(i, kept_dims, digits);
    std::int64_t off = 0;
    for (std::size_t k = 0; k < digits.size(); ++k) {
      off += digits[k] * kept_strides_in_a[k];
    }
    kept_offset[static_cast<std::size_t>(i)] = off;
  }
  std::vector<std::int64_t> traced_offset(static_cast<std::size_t>(dt));
  for (std::int64_t i = 0; i < dt; ++i) {
    indexing::decompose(i, traced_dims, digits);
    std::int64_t off = 0;
    for (std::size_t k = 0; k < digits.size(); ++k) {
      off += digits[k] * traced_strides_in_a[k];
    }
    traced_offset[static_cast<std::size_t>(i)] = off;
  }

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
  for (std::int64_t c = 0; c < dk; ++c) {
    for (std::int64_t r = 0; r < dk; ++r) {
      std::complex<double> sum = 0.0;
      for (std::int64_t t = 0; t < dt; ++t) {
        sum += a.entries()(kept_offset[static_cast<std::size_t>(r)] +
                               traced_offset[static_cast<std::size_t>(t)],
                           kept_offset[static_cast<std::size_t>(c)] +
                               traced_offset[static_cast<std::size_t>(t)]);
      }
      out(r, c) = sum;
    }
  }
  return LabeledOperator(std::move(kept), std::move(out));
}

LabeledOperator transpose(const LabeledOperator& a) {
  return LabeledOperator(a.labels(), a.entries().transpose());
}

PsdSpectrum psd_spectrum(const Eigen::MatrixXcd& m, const Tolerances& tol,
                         const char* what) {
  const double norm = m.norm();
  const double herm = (m - m.adjoint()).norm();
  if (herm > tol.hermitian * std::max(1.0, norm)) {
    throw NumericError(std::string(what) +
                       " is not Hermitian: asymmetry residual " +
                       std::to_string(herm / std::max(1.0, norm)));
  }
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericError(std::string(what) + ": eigendecomposition failed");
  }
  Eigen::VectorXd vals = solver.eigenvalues();
  const double lmax = std::max(vals.maxCoeff(), 0.0);
  const double floor = -tol.psd * lmax;
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    if (vals[k] < floor) {
      throw NumericError(std::string(what) + " has eigenvalue " +
                         std::to_string(vals[k]) +
                         " below the PSD floor of " + std::to_string(floor));
    }
    if (vals[k] < 0.0) vals[k] = 0.0;
  }
  return PsdSpectrum{std::move(vals), solver.eigenvectors()};
}

LabeledOperator frac_power(const LabeledOperator& p, int n,
                           const Tolerances& tol) {
  if (n < 1) throw ShapeError("frac_power root must be a positive integer");
  PsdSpectrum s = psd_spectrum(p.entries(), tol, "frac_power input");
  Eigen::VectorXd powered(s.eigenvalues.size());
  for (Eigen::Index k = 0; k < powered.size(); ++k) {
    powered[k] = std::pow(s.eigenvalues[k], 1.0 / n);
  }
  Eigen::MatrixXcd out = s.eigenvectors * powered.asDiagonal() *
                         s.eigenvectors.adjoint();
  return LabeledOperator(p.labels(), std::move(out));
}

LabeledOperator support_projector(const LabeledOperator& p,
                                  const Tolerances& tol) {
  PsdSpectrum s = psd_spectrum(p.entries(), tol, "support_projector input");
  const double lmax = s.eigenvalues.size() ? s.eigenvalues.maxCoeff() : 0.0;
  const double cutoff =
      static_cast<double>(p.dim()) * tol.rank_factor * std::max(lmax, 0.0);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(p.dim(), p.dim());
  for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
    if (s.eigenvalues[k] > cutoff && s.eigenvalues[k] > 0.0) {
      out += s.eigenvectors.col(k) * s.eigenvectors.col(k).adjoint();
    }
  }
  return LabeledOperator(p.labels(), std::move(out));
}

double commutation_residual(const LabeledOperator& a,
                            const LabeledOperator& b) {
  const auto u = label_union(a.labels(), b.labels());
  const LabeledOperator ea = extend_identity(a, u);
  const LabeledOperator eb = extend_identity(b, u);
  const double num =
      (ea.entries() * eb.entries() - eb.entries() * ea.entries()).norm();
  return num / std::max(1.0, ea.entries().norm() * eb.entries().norm());
}

std::complex<double> trace(const LabeledOperator& a) {
  return a.entries().trace();
}

double frobenius(const LabeledOperator& a) { return a.entries().norm(); }

LabeledOperator extended_product(const LabeledOperator& a,
                                 const LabeledOperator& b) {
  const auto u = label_union(a.labels(), b.labels());
  const LabeledOperator ea = extend_identity(a, u);
  const LabeledOperator eb = extend_identity(b, u);
  return LabeledOperator(u, ea.entries() * eb.entries());
}

}  // namespace holofg
