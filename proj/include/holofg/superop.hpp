#ifndef HOLOFG_SUPEROP_HPP
#define HOLOFG_SUPEROP_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "holofg/labeled_operator.hpp"
#include "holofg/types.hpp"

namespace holofg {

// A linear map between operator spaces, held in two equivalent views:
//
//  - cj: the Choi matrix tau = sum_kl T(E_kl) (x) E_kl, stored raw with leg
//    order [codomain legs..., domain legs...] (each part in canonical label
//    order). Kept raw because domain and codomain may share labels.
//  - transfer: the matrix acting on row-major vectorized operators,
//    vec(T(X)) = transfer * vec(X). Composition and inversion are matrix
//    products in this view.
//
// The two are exact reshuffles of each other; both are cached.
class SuperOperator {
 public:
  SuperOperator() = default;

  static SuperOperator from_transfer(std::vector<SpaceLabel> domain,
                                     std::vector<SpaceLabel> codomain,
                                     Eigen::MatrixXcd transfer);
  static SuperOperator from_cj(std::vector<SpaceLabel> domain,
                               std::vector<SpaceLabel> codomain,
                               const Eigen::MatrixXcd& cj);
  // Splits a CJ matrix held as a LabeledOperator into the declared domain
  // and codomain parts (labels must partition the operator's labels).
  static SuperOperator from_cj_operator(const LabeledOperator& cj,
                                        const std::vector<SpaceLabel>& domain,
                                        const std::vector<SpaceLabel>& codomain);

  // E_kl on `from` maps to E_kl on `to`; dims must agree.
  static SuperOperator identity_relabel(const SpaceLabel& from,
                                        const SpaceLabel& to);
  static SuperOperator identity(const SpaceLabel& on);

  const std::vector<SpaceLabel>& domain() const { return domain_; }
  const std::vector<SpaceLabel>& codomain() const { return codomain_; }
  Eigen::Index domain_dim() const { return da_; }
  Eigen::Index codomain_dim() const { return db_; }
  const Eigen::MatrixXcd& transfer() const { return transfer_; }
  const Eigen::MatrixXcd& cj() const { return cj_; }

  // CJ matrix as a labeled operator; requires domain and codomain disjoint.
  LabeledOperator cj_operator() const;

  // Metadata relabels; the new labels must sort in the same relative order
  // and carry the same dims.
  SuperOperator with_domain(const std::vector<SpaceLabel>& domain) const;
  SuperOperator with_codomain(const std::vector<SpaceLabel>& codomain) const;

 private:
  std::vector<SpaceLabel> domain_;
  std::vector<SpaceLabel> codomain_;
  Eigen::Index da_ = 1;
  Eigen::Index db_ = 1;
  Eigen::MatrixXcd transfer_;
  Eigen::MatrixXcd cj_;
};

// tau built from the images of all matrix units of the domain. `action(k,l)`
// must return the image of E_kl as a codomain-sized matrix.
SuperOperator cj_from_action(
    std::vector<SpaceLabel> domain, std::vector<SpaceLabel> codomain,
    const std::function<Eigen::MatrixXcd(Eigen::Index, Eigen::Index)>& action);

// Applies T to the legs of `g` carrying T's domain labels; remaining legs are
// untouched. For g living exactly on the domain this is plain application.
LabeledOperator apply(const SuperOperator& t, const LabeledOperator& g);

// Adjoint with respect to the bilinear pairing Tr(B T(A)) = Tr(T*(B) A).
SuperOperator adjoint(const SuperOperator& t);

// (t . u): transfer matrices multiply; u's codomain must equal t's domain.
SuperOperator compose(const SuperOperator& t, const SuperOperator& u);

// Transfer-matrix inverse; throws NumericError when the condition number
// exceeds max_condition.
SuperOperator invert(const SuperOperator& t, double max_condition = 1e8);

// (T (x)bar T')(E (x) E') := T(E) T'(E'), extended linearly. Codomains must
// be identical label lists; domains must be disjoint. Argument order matters.
SuperOperator bar_otimes(const SuperOperator& t, const SuperOperator& u);

// Ordinary tensor product of maps: (T (x) T')(E (x) E') = T(E) (x) T'(E').
// Domains and codomains must both be disjoint.
SuperOperator superop_tensor(const SuperOperator& t, const SuperOperator& u);

// F = sum_kl E_kl (x) E_lk on [a, b]; dims must agree.
LabeledOperator swap_operator(const SpaceLabel& a, const SpaceLabel& b);

struct InversePairCheck {
  double swap_residual;     // || Tr_hat(phi_hat^T phi) - F ||_F / ||F||_F
  double compose_residual;  // || Phi Phi_hat - id ||_F / ||id||_F
};

// phi on [base, hat], phi_hat on [hat, prime], all dims equal. Evaluates the
// swap-witness form and the composed-map form of the inverse condition.
InversePairCheck check_strong_inverse(const LabeledOperator& phi,
                                      const LabeledOperator& phi_hat);

// Same shapes, compared against the diagonal witness sum_j E_jj (x) E_jj.
double check_diagonal_inverse(const LabeledOperator& phi,
                              const LabeledOperator& phi_hat);

// Max over matrix units of the difference between applying via the CJ
// partial-trace formula and via the transfer matrix.
double view_agreement_residual(const SuperOperator& t);

}  // namespace holofg

#endif
