#ifndef HOLOFG_LABELED_OPERATOR_HPP
#define HOLOFG_LABELED_OPERATOR_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "holofg/types.hpp"

namespace holofg {

// A dense complex square operator bound to an ordered list of labeled tensor
// factors. Constructors normalize the leg order to the canonical label order
// (see label_less); all index arithmetic is row-major over the label dims.
class LabeledOperator {
 public:
  // Scalar operator on zero labels (1x1 matrix).
  LabeledOperator();
  explicit LabeledOperator(std::complex<double> scalar);

  // `entries` is indexed in the leg order given by `labels`; the constructor
  // permutes legs into canonical order. Throws ShapeError on duplicate
  // labels or a size mismatch, SizeError past the dimension guard.
  LabeledOperator(std::vector<SpaceLabel> labels, Eigen::MatrixXcd entries);

  static LabeledOperator identity(std::vector<SpaceLabel> labels);

  const std::vector<SpaceLabel>& labels() const { return labels_; }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }

  bool has_label(const SpaceLabel& l) const;
  std::vector<int> dims() const;

  // Same operator with each leg's label replaced positionally; the result is
  // re-canonicalized, so entry layout follows the new labels' order.
  LabeledOperator relabeled(const std::vector<SpaceLabel>& new_labels) const;

  // Entries permuted into the requested leg order, which must be a
  // permutation of labels().
  Eigen::MatrixXcd entries_in_leg_order(
      const std::vector<SpaceLabel>& order) const;

 private:
  std::vector<SpaceLabel> labels_;  // canonical order
  Eigen::MatrixXcd entries_;
};

// --- linalg-core operations ---

// Kronecker product re-permuted into canonical order over the label union.
// The label sets must be disjoint.
LabeledOperator tensor_product(const LabeledOperator& a,
                               const LabeledOperator& b);

// a (x) identity on the labels of `target` missing from `a`. Every label of
// `a` must appear in `target`.
LabeledOperator extend_identity(const LabeledOperator& a,
                                const std::vector<SpaceLabel>& target);

// Partial trace over `traced` labels; tracing everything yields a scalar
// operator holding the full trace.
LabeledOperator partial_trace(const LabeledOperator& a,
                              const std::vector<SpaceLabel>& traced);

// Entrywise transpose in the fixed computational basis; labels unchanged.
LabeledOperator transpose(const LabeledOperator& a);

// P^(1/n) of a Hermitian PSD operator, by eigendecomposition. Eigenvalues in
// [-psd_tol*lmax, 0) are clamped to zero; anything more negative throws.
LabeledOperator frac_power(const LabeledOperator& p, int n,
                           const Tolerances& tol = {});

// Orthogonal projector onto the span of eigenvectors with eigenvalue above
// dim * rank_factor * lmax.
LabeledOperator support_projector(const LabeledOperator& p,
                                  const Tolerances& tol = {});

// ||AB - BA||_F / max(1, ||A||_F * ||B||_F) after extending both operands to
// the union of their labels.
double commutation_residual(const LabeledOperator& a, const LabeledOperator& b);

// --- utilities shared across modules ---

std::complex<double> trace(const LabeledOperator& a);
double frobenius(const LabeledOperator& a);

// Matrix product after extending both operands to the label union.
LabeledOperator extended_product(const LabeledOperator& a,
                                 const LabeledOperator& b);

// Sorted union of two label lists; throws ShapeError if a shared label is
// declared with two different dims.
std::vector<SpaceLabel> label_union(const std::vector<SpaceLabel>& a,
                                    const std::vector<SpaceLabel>& b);

// Hermitian eigendecomposition with the PSD contract shared by frac_power,
// support_projector and the product modules: checks Hermiticity within
// tol.hermitian, throws NumericError on eigenvalues below -psd_tol*lmax, and
// clamps the in-tolerance negative tail to zero.
struct PsdSpectrum {
  Eigen::VectorXd eigenvalues;  // clamped, ascending
  Eigen::MatrixXcd eigenvectors;
};
PsdSpectrum psd_spectrum(const Eigen::MatrixXcd& m, const Tolerances& tol = {},
                         const char* what = "operator");

}  // namespace holofg

#endif
