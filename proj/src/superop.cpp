#include "holofg/superop.hpp"

#include <algorithm>

#include "holofg/indexing.hpp"

namespace holofg {

namespace {

std::vector<SpaceLabel> sorted_unique(std::vector<SpaceLabel> labels) {
  std::sort(labels.begin(), labels.end(), label_less);
  for (std::size_t k = 1; k < labels.size(); ++k) {
    if (label_same_space(labels[k - 1], labels[k])) {
      throw ShapeError("duplicate label " + labels[k].str());
    }
  }
  return labels;
}

Eigen::Index part_dim(const std::vector<SpaceLabel>& labels) {
  std::int64_t t = 1;
  for (const SpaceLabel& l : labels) {
    t *= l.dim;
    if (t > kMaxOperatorDim) {
      throw SizeError("map side exceeds the operator dimension guard");
    }
  }
  return static_cast<Eigen::Index>(t);
}

// cj[(i,k),(j,l)] = transfer[(i,j),(k,l)]
Eigen::MatrixXcd cj_of_transfer(const Eigen::MatrixXcd& m, Eigen::Index da,
                                Eigen::Index db) {
  Eigen::MatrixXcd cj(da * db, da * db);
  for (Eigen::Index i = 0; i < db; ++i)
    for (Eigen::Index j = 0; j < db; ++j)
      for (Eigen::Index k = 0; k < da; ++k)
        for (Eigen::Index l = 0; l < da; ++l)
          cj(i * da + k, j * da + l) = m(i * db + j, k * da + l);
  return cj;
}

Eigen::MatrixXcd transfer_of_cj(const Eigen::MatrixXcd& cj, Eigen::Index da,
                                Eigen::Index db) {
  Eigen::MatrixXcd m(db * db, da * da);
  for (Eigen::Index i = 0; i < db; ++i)
    for (Eigen::Index j = 0; j < db; ++j)
      for (Eigen::Index k = 0; k < da; ++k)
        for (Eigen::Index l = 0; l < da; ++l)
          m(i * db + j, k * da + l) = cj(i * da + k, j * da + l);
  return m;
}

void check_relabel(const std::vector<SpaceLabel>& from,
                   const std::vector<SpaceLabel>& to) {
  if (from.size() != to.size()) {
    throw ShapeError("relabel changes the number of legs");
  }
  for (std::size_t k = 0; k < from.size(); ++k) {
    if (from[k].dim != to[k].dim) {
      throw ShapeError("relabel changes dim of " + from[k].str());
    }
  }
}

}  // namespace

SuperOperator SuperOperator::from_transfer(std::vector<SpaceLabel> domain,
                                           std::vector<SpaceLabel> codomain,
                                           Eigen::MatrixXcd transfer) {
  SuperOperator t;
  t.domain_ = sorted_unique(std::move(domain));
  t.codomain_ = sorted_unique(std::move(codomain));
  t.da_ = part_dim(t.domain_);
  t.db_ = part_dim(t.codomain_);
  if (transfer.rows() != t.db_ * t.db_ || transfer.cols() != t.da_ * t.da_) {
    throw ShapeError("transfer matrix is " + std::to_string(transfer.rows()) +
                     "x" + std::to_string(transfer.cols()) + ", expected " +
                     std::to_string(t.db_ * t.db_) + "x" +
                     std::to_string(t.da_ * t.da_));
  }
  t.transfer_ = std::move(transfer);
  t.cj_ = cj_of_transfer(t.transfer_, t.da_, t.db_);
  return t;
}

SuperOperator SuperOperator::from_cj(std::vector<SpaceLabel> domain,
                                     std::vector<SpaceLabel> codomain,
                                     const Eigen::MatrixXcd& cj) {
  SuperOperator t;
  t.domain_ = sorted_unique(std::move(domain));
  t.codomain_ = sorted_unique(std::move(codomain));
  t.da_ = part_dim(t.domain_);
  t.db_ = part_dim(t.codomain_);
  if (cj.rows() != t.da_ * t.db_ || cj.cols() != t.da_ * t.db_) {
    throw ShapeError("cj matrix is " + std::to_string(cj.rows()) + "x" +
                     std::to_string(cj.cols()) + ", expected side " +
                     std::to_string(t.da_ * t.db_));
  }
  t.cj_ = cj;
  t.transfer_ = transfer_of_cj(cj, t.da_, t.db_);
  return t;
}

SuperOperator SuperOperator::from_cj_operator(
    const LabeledOperator& cj, const std::vector<SpaceLabel>& domain,
    const std::vector<SpaceLabel>& codomain) {
  std::vector<SpaceLabel> order = sorted_unique(codomain);
  std::vector<SpaceLabel> dom = sorted_unique(domain);
  order.insert(order.end(), dom.begin(), dom.end());
  if (order.size() != cj.labels().size()) {
    throw ShapeError("domain and codomain do not partition the CJ labels");
  }
  return from_cj(dom, sorted_unique(codomain), cj.entries_in_leg_order(order));
}

SuperOperator SuperOperator::identity_relabel(const SpaceLabel& from,
                                              const SpaceLabel& to) {
  if (from.dim != to.dim) {
    throw ShapeError("identity relabel between dims " +
                     std::to_string(from.dim) + " and " +
                     std::to_string(to.dim));
  }
  const Eigen::Index q2 = static_cast<Eigen::Index>(from.dim) * from.dim;
  return from_transfer({from}, {to}, Eigen::MatrixXcd::Identity(q2, q2));
}

SuperOperator SuperOperator::identity(const SpaceLabel& on) {
  return identity_relabel(on, on);
}

LabeledOperator SuperOperator::cj_operator() const {
  std::vector<SpaceLabel> labels = codomain_;
  labels.insert(labels.end(), domain_.begin(), domain_.end());
  return LabeledOperator(labels, cj_);  // ctor rejects shared labels
}

SuperOperator SuperOperator::with_domain(
    const std::vector<SpaceLabel>& domain) const {
  SuperOperator t = *this;
  t.domain_ = sorted_unique(domain);
  check_relabel(domain_, t.domain_);
  return t;
}

SuperOperator SuperOperator::with_codomain(
    const std::vector<SpaceLabel>& codomain) const {
  SuperOperator t = *this;
  t.codomain_ = sorted_unique(codomain);
  check_relabel(codomain_, t.codomain_);
  return t;
}

SuperOperator cj_from_action(
    std::vector<SpaceLabel> domain, std::vector<SpaceLabel> codomain,
    const std::function<Eigen::MatrixXcd(Eigen::Index, Eigen::Index)>& action) {
  const std::vector<SpaceLabel> dom = sorted_unique(std::move(domain));
  const std::vector<SpaceLabel> cod = sorted_unique(std::move(codomain));
  const Eigen::Index da = part_dim(dom);
  const Eigen::Index db = part_dim(cod);
  Eigen::MatrixXcd cj(da * db, da * db);
  for (Eigen::Index k = 0; k < da; ++k) {
    for (Eigen::Index l = 0; l < da; ++l) {
      const Eigen::MatrixXcd img = action(k, l);
      if (img.rows() != db || img.cols() != db) {
        throw ShapeError("action image of unit (" + std::to_string(k) + "," +
                         std::to_string(l) + ") is " +
                         std::to_string(img.rows()) + "x" +
                         std::to_string(img.cols()) + ", expected side " +
                         std::to_string(db));
      }
      for (Eigen::Index i = 0; i < db; ++i)
        for (Eigen::Index j = 0; j < db; ++j)
          cj(i * da + k, j * da + l) = img(i, j);
    }
  }
  return SuperOperator::from_cj(dom, cod, cj);
}

LabeledOperator apply(const SuperOperator& t, const LabeledOperator& g) {
  // Positions of the domain legs inside g.
  const auto& labels = g.labels();
  std::vector<bool> is_domain(labels.size(), false);
  for (const SpaceLabel& d : t.domain()) {
    bool found = false;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (!is_domain[k] && label_same_space(labels[k], d)) {
        if (labels[k].dim != d.dim) {
          throw ShapeError("operand leg " + d.str() + " has dim " +
                           std::to_string(labels[k].dim) + ", map expects " +
                           std::to_string(d.dim));
        }
        is_domain[k] = true;
        found = true;
        break;
      }
    }
    if (!found) {
      throw ShapeError("operand lacks map domain label " + d.str());
    }
  }

  std::vector<SpaceLabel> env;
  std::vector<int> env_dims, dom_dims;
  std::vector<std::int64_t> env_strides_in_g, dom_strides_in_g;
  const auto g_strides = indexing::strides(g.dims());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (is_domain[k]) {
      dom_dims.push_back(labels[k].dim);
      dom_strides_in_g.push_back(g_strides[k]);
    } else {
      env.push_back(labels[k]);
      env_dims.push_back(labels[k].dim);
      env_strides_in_g.push_back(g_strides[k]);
    }
  }
  for (const SpaceLabel& c : t.codomain()) {
    for (const SpaceLabel& e : env) {
      if (label_same_space(e, c)) {
        throw ShapeError("codomain label " + c.str() +
                         " collides with an untouched operand leg");
      }
    }
  }

  const Eigen::Index da = t.domain_dim();
  const Eigen::Index db = t.codomain_dim();
  const std::int64_t de = indexing::total(env_dims);

  std::vector<std::int64_t> dom_offset(static_cast<std::size_t>(da));
  std::vector<int> digits;
  for (Eigen::Index i = 0; i < da; ++i) {
    indexing::decompose(i, dom_dims, digits);
    std::int64_t off = 0;
    for (std::size_t k = 0; k < digits.size(); ++k)
      off += digits[k] * dom_strides_in_g[k];
    dom_offset[static_cast<std::size_t>(i)] = off;
  }
  std::vector<std::int64_t> env_offset(static_cast<std::size_t>(de));
  for (std::int64_t i = 0; i < de; ++i) {
    indexing::decompose(i, env_dims, digits);
    std::int64_t off = 0;
    for (std::size_t k = 0; k < digits.size(); ++k)
      off += digits[k] * env_strides_in_g[k];
    env_offset[static_cast<std::size_t>(i)] = off;
  }

  // Result legs: [env..., codomain...] before canonicalization.
  std::vector<SpaceLabel> out_labels = env;
  out_labels.insert(out_labels.end(), t.codomain().begin(), t.codomain().end());

  Eigen::MatrixXcd out(de * db, de * db);
  Eigen::VectorXcd in_vec(da * da), out_vec;
  for (std::int64_t er = 0; er < de; ++er) {
    for (std::int64_t ec = 0; ec < de; ++ec) {
      for (Eigen::Index k = 0; k < da; ++k) {
        for (Eigen::Index l = 0; l < da; ++l) {
          in_vec[k * da + l] =
              g.entries()(env_offset[static_cast<std::size_t>(er)] +
                              dom_offset[static_cast<std::size_t>(k)],
                          env_offset[static_cast<std::size_t>(ec)] +
                              dom_offset[static_cast<std::size_t>(l)]);
        }
      }
      out_vec = t.transfer() * in_vec;
      for (Eigen::Index i = 0; i < db; ++i) {
        for (Eigen::Index j = 0; j < db; ++j) {
          out(er * db + i, ec * db + j) = out_vec[i * db + j];
        }
      }
    }
  }
  return LabeledOperator(std::move(out_labels), std::move(out));
}

SuperOperator adjoint(const SuperOperator& t) {
  const Eigen::Index da = t.domain_dim();
  const Eigen::Index db = t.codomain_dim();
  const Eigen::MatrixXcd& m = t.transfer();
  Eigen::MatrixXcd adj(da * da, db * db);
  for (Eigen::Index k = 0; k < da; ++k)
    for (Eigen::Index l = 0; l < da; ++l)
      for (Eigen::Index i = 0; i < db; ++i)
        for (Eigen::Index j = 0; j < db; ++j)
          adj(k * da + l, i * db + j) = m(j * db + i, l * da + k);
  return SuperOperator::from_transfer(t.codomain(), t.domain(), std::move(adj));
}

SuperOperator compose(const SuperOperator& t, const SuperOperator& u) {
  if (t.domain().size() != u.codomain().size()) {
    throw ShapeError("compose: inner spaces do not match");
  }
  for (std::size_t k = 0; k < t.domain().size(); ++k) {
    if (!label_same_space(t.domain()[k], u.codomain()[k]) ||
        t.domain()[k].dim != u.codomain()[k].dim) {
      throw ShapeError("compose: inner label mismatch at " +
                       t.domain()[k].str() + " vs " + u.codomain()[k].str());
    }
  }
  return SuperOperator::from_transfer(u.domain(), t.codomain(),
                                      t.transfer() * u.transfer());
}

SuperOperator invert(const SuperOperator& t, double max_condition) {
  if (t.domain_dim() != t.codomain_dim()) {
    throw ShapeError("invert: map is not square");
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      t.transfer(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  if (smin <= 0.0 || sv[0] / smin > max_condition) {
    throw NumericError("invert: transfer matrix condition number " +
                       std::to_string(smin > 0.0 ? sv[0] / smin : 0.0) +
                       " exceeds " + std::to_string(max_condition) +
                       (smin > 0.0 ? "" : " (singular)"));
  }
  Eigen::MatrixXcd inv = svd.matrixV() * sv.cwiseInverse().asDiagonal() *
                         svd.matrixU().adjoint();
  return SuperOperator::from_transfer(t.codomain(), t.domain(), std::move(inv));
}

namespace {

// Digit split of a composite index over union legs into the sub-indices of
// two disjoint parts, by leg membership.
struct UnionSplit {
  std::vector<int> union_dims;
  std::vector<std::int64_t> first_stride;   // stride into first part index
  std::vector<std::int64_t> second_stride;  // stride into second part index
};

UnionSplit make_split(const std::vector<SpaceLabel>& united,
                      const std::vector<SpaceLabel>& first) {
  UnionSplit s;
  std::vector<int> fdims, sdims;
  std::vector<bool> in_first;
  for (const SpaceLabel& l : united) {
    s.union_dims.push_back(l.dim);
    bool f = false;
    for (const SpaceLabel& c : first) {
      if (label_same_space(c, l)) {
        f = true;
        break;
      }
    }
    in_first.push_back(f);
    if (f) {
      fdims.push_back(l.dim);
    } else {
      sdims.push_back(l.dim);
    }
  }
  const auto fstr = indexing::strides(fdims);
  const auto sstr = indexing::strides(sdims);
  std::size_t fi = 0, si = 0;
  for (std::size_t k = 0; k < united.size(); ++k) {
    if (in_first[k]) {
      s.first_stride.push_back(fstr[fi]);
      s.second_stride.push_back(0);
      ++fi;
    } else {
      s.first_stride.push_back(0);
      s.second_stride.push_back(sstr[si]);
      ++si;
    }
  }
  return s;
}

void split_index(std::int64_t idx, const UnionSplit& s, std::int64_t& first,
                 std::int64_t& second) {
  static thread_local std::vector<int> digits;
  indexing::decompose(idx, s.union_dims, digits);
  first = 0;
  second = 0;
  for (std::size_t k = 0; k < digits.size(); ++k) {
    first += digits[k] * s.first_stride[k];
    second += digits[k] * s.second_stride[k];
  }
}

enum class CombineMode { MatrixProduct, TensorProduct };

SuperOperator combine_maps(const SuperOperator& t, const SuperOperator& u,
                           CombineMode mode) {
  // Domains must be disjoint in both modes.
  const std::vector<SpaceLabel> dom = label_union(t.domain(), u.domain());
  if (dom.size() != t.domain().size() + u.domain().size()) {
    throw ShapeError("combined map domains overlap");
  }

  std::vector<SpaceLabel> cod;
  if (mode == CombineMode::MatrixProduct) {
    if (t.codomain().size() != u.codomain().size()) {
      throw ShapeError("bar_otimes: codomains differ");
    }
    for (std::size_t k = 0; k < t.codomain().size(); ++k) {
      if (!label_same_space(t.codomain()[k], u.codomain()[k]) ||
          t.codomain()[k].dim != u.codomain()[k].dim) {
        throw ShapeError("bar_otimes: codomain mismatch at " +
                         t.codomain()[k].str());
      }
    }
    cod = t.codomain();
  } else {
    cod = label_union(t.codomain(), u.codomain());
    if (cod.size() != t.codomain().size() + u.codomain().size()) {
      throw ShapeError("map tensor product: codomains overlap");
    }
  }

  const Eigen::Index dat = t.domain_dim();
  const Eigen::Index dau = u.domain_dim();
  const Eigen::Index da = dat * dau;
  const Eigen::Index dbt = t.codomain_dim();
  const Eigen::Index dbu = u.codomain_dim();
  const Eigen::Index db =
      mode == CombineMode::MatrixProduct ? dbt : dbt * dbu;

  // Cache the devectorized images of all matrix units of both maps.
  auto images = [](const SuperOperator& m) {
    const Eigen::Index d = m.domain_dim(), b = m.codomain_dim();
    std::vector<Eigen::MatrixXcd> img(static_cast<std::size_t>(d * d));
    for (Eigen::Index c = 0; c < d * d; ++c) {
      Eigen::MatrixXcd x(b, b);
      for (Eigen::Index i = 0; i < b; ++i)
        for (Eigen::Index j = 0; j < b; ++j) x(i, j) = m.transfer()(i * b + j, c);
      img[static_cast<std::size_t>(c)] = std::move(x);
    }
    return img;
  };
  const auto t_img = images(t);
  const auto u_img = images(u);

  const UnionSplit split = make_split(dom, t.domain());

  Eigen::MatrixXcd transfer(db * db, da * da);
  for (Eigen::Index r = 0; r < da; ++r) {
    std::int64_t kt, ku;
    split_index(r, split, kt, ku);
    for (Eigen::Index c = 0; c < da; ++c) {
      std::int64_t lt, lu;
      split_index(c, split, lt, lu);
      Eigen::MatrixXcd img;
      if (mode == CombineMode::MatrixProduct) {
        img = t_img[static_cast<std::size_t>(kt * dat + lt)] *
              u_img[static_cast<std::size_t>(ku * dau + lu)];
        for (Eigen::Index i = 0; i < db; ++i)
          for (Eigen::Index j = 0; j < db; ++j)
            transfer(i * db + j, r * da + c) = img(i, j);
      } else {
        // Tensor image in the canonical order of the combined codomain.
        const LabeledOperator timg(t.codomain(),
                                   t_img[static_cast<std::size_t>(kt * dat + lt)]);
        const LabeledOperator uimg(u.codomain(),
                                   u_img[static_cast<std::size_t>(ku * dau + lu)]);
        const LabeledOperator prod = tensor_product(timg, uimg);
        const Eigen::MatrixXcd& pm = prod.entries();
        for (Eigen::Index i = 0; i < db; ++i)
          for (Eigen::Index j = 0; j < db; ++j)
            transfer(i * db + j, r * da + c) = pm(i, j);
      }
    }
  }
  return SuperOperator::from_transfer(dom, cod, std::move(transfer));
}

}  // namespace

SuperOperator bar_otimes(const SuperOperator& t, const SuperOperator& u) {
  return combine_maps(t, u, CombineMode::MatrixProduct);
}

SuperOperator superop_tensor(const SuperOperator& t, const SuperOperator& u) {
  return combine_maps(t, u, CombineMode::TensorProduct);
}

LabeledOperator swap_operator(const SpaceLabel& a, const SpaceLabel& b) {
  if (a.dim != b.dim) {
    throw ShapeError("swap_operator between dims " + std::to_string(a.dim) +
                     " and " + std::to_string(b.dim));
  }
  const Eigen::Index q = a.dim;
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(q * q, q * q);
  for (Eigen::Index k = 0; k < q; ++k)
    for (Eigen::Index l = 0; l < q; ++l) f(k * q + l, l * q + k) = 1.0;
  return LabeledOperator({a, b}, std::move(f));
}

namespace {

struct EdgePairShape {
  SpaceLabel base, hat, prime;
};

EdgePairShape edge_pair_shape(const LabeledOperator& phi,
                              const LabeledOperator& phi_hat) {
  if (phi.labels().size() != 2 || phi_hat.labels().size() != 2) {
    throw ShapeError("inverse check expects two-leg CJ operators");
  }
  EdgePairShape s;
  bool have_base = false, have_hat = false;
  for (const SpaceLabel& l : phi.labels()) {
    if (l.tier == Tier::Base && !have_base) {
      s.base = l;
      have_base = true;
    } else if (l.tier == Tier::Hat && !have_hat) {
      s.hat = l;
      have_hat = true;
    }
  }
  if (!have_base || !have_hat) {
    throw ShapeError("phi must live on a base and a hat space");
  }
  bool have_prime = false, hat_matches = false;
  for (const SpaceLabel& l : phi_hat.labels()) {
    if (l.tier == Tier::Prime && !have_prime) {
      s.prime = l;
      have_prime = true;
    } else if (l.tier == Tier::Hat && label_same_space(l, s.hat)) {
      hat_matches = true;
    }
  }
  if (!have_prime || !hat_matches) {
    throw ShapeError("phi_hat must live on phi's hat space and a prime space");
  }
  if (s.base.dim != s.hat.dim || s.hat.dim != s.prime.dim) {
    throw ShapeError("inverse check legs have unequal dims");
  }
  return s;
}

}  // namespace

InversePairCheck check_strong_inverse(const LabeledOperator& phi,
                                      const LabeledOperator& phi_hat) {
  const EdgePairShape s = edge_pair_shape(phi, phi_hat);

  const LabeledOperator prod = extended_product(transpose(phi_hat), phi);
  const LabeledOperator traced = partial_trace(prod, {s.hat});
  const LabeledOperator f = swap_operator(s.base, s.prime);
  const double swap_residual =
      (traced.entries() - f.entries()).norm() / f.entries().norm();

  const SuperOperator phi_map =
      SuperOperator::from_cj_operator(phi, {s.hat}, {s.base});
  const SuperOperator phi_hat_map =
      SuperOperator::from_cj_operator(phi_hat, {s.prime}, {s.hat});
  const SuperOperator composed = compose(phi_map, phi_hat_map);
  const SuperOperator id = SuperOperator::identity_relabel(s.prime, s.base);
  const double compose_residual =
      (composed.transfer() - id.transfer()).norm() / id.transfer().norm();

  return {swap_residual, compose_residual};
}

double check_diagonal_inverse(const LabeledOperator& phi,
                              const LabeledOperator& phi_hat) {
  const EdgePairShape s = edge_pair_shape(phi, phi_hat);
  const LabeledOperator prod = extended_product(transpose(phi_hat), phi);
  const LabeledOperator traced = partial_trace(prod, {s.hat});

  const Eigen::Index q = s.base.dim;
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(q * q, q * q);
  for (Eigen::Index j = 0; j < q; ++j) w(j * q + j, j * q + j) = 1.0;
  const LabeledOperator witness({s.base, s.prime}, std::move(w));
  return (traced.entries() - witness.entries()).norm() /
         witness.entries().norm();
}

double view_agreement_residual(const SuperOperator& t) {
  const Eigen::Index da = t.domain_dim();
  const Eigen::Index db = t.codomain_dim();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < da; ++k) {
    for (Eigen::Index l = 0; l < da; ++l) {
      // Transfer route: column (k,l) devectorized.
      Eigen::MatrixXcd via_transfer(db, db);
      for (Eigen::Index i = 0; i < db; ++i)
        for (Eigen::Index j = 0; j < db; ++j)
          via_transfer(i, j) = t.transfer()(i * db + j, k * da + l);

      // CJ route: T(G) = Tr_dom(tau (I (x) G^T)) with G = E_kl.
      Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(da, da);
      g(k, l) = 1.0;
      const Eigen::MatrixXcd gt = g.transpose();
      Eigen::MatrixXcd via_cj = Eigen::MatrixXcd::Zero(db, db);
      for (Eigen::Index i = 0; i < db; ++i) {
        for (Eigen::Index j = 0; j < db; ++j) {
          std::complex<double> sum = 0.0;
          for (Eigen::Index m = 0; m < da; ++m) {
            for (Eigen::Index n = 0; n < da; ++n) {
              sum += t.cj()(i * da + m, j * da + n) * gt(n, m);
            }
          }
          via_cj(i, j) = sum;
        }
      }
      worst = std::max(worst, (via_transfer - via_cj).norm());
    }
  }
  return worst;
}

}  // namespace holofg
