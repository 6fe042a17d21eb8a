#include "holofg/quantum.hpp"

#include <cmath>

#include "doctest.h"
#include "holofg/rng.hpp"

using namespace holofg;
using cd = std::complex<double>;

namespace {

const SpaceLabel kA = SpaceLabel::base("A", 2);
const SpaceLabel kB = SpaceLabel::base("B", 2);
const SpaceLabel kC = SpaceLabel::base("C", 2);

LabeledOperator diag_op(const SpaceLabel& l, std::vector<double> d) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d.size(), d.size());
  for (std::size_t k = 0; k < d.size(); ++k) m(k, k) = d[k];
  return LabeledOperator({l}, std::move(m));
}

// Closed-form square root of a 2x2 PSD matrix: sqrt(M) = (M + sqrt(det) I)
// / sqrt(tr + 2 sqrt(det)). Independent of the eigensolver route.
Eigen::MatrixXcd sqrt2x2(const Eigen::MatrixXcd& m) {
  const cd det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double s = std::sqrt(det.real());
  const double t = std::sqrt(m.trace().real() + 2.0 * s);
  return (m + s * Eigen::MatrixXcd::Identity(2, 2)) / t;
}

QuantumVariable qvar(const std::string& id, const Eigen::MatrixXcd& w) {
  const int q = static_cast<int>(w.rows());
  return {id, q, LabeledOperator({SpaceLabel::base(id, q)}, w)};
}

}  // namespace

TEST_CASE("star_n") {
  Rng rng(3);

  SUBCASE("commuting diagonal operands give the plain product") {
    const auto l = diag_op(kA, {1.0, 2.0});
    const auto lp = diag_op(kA, {3.0, 0.5});
    for (int n : {1, 2, 5}) {
      const auto s = star_n(l, lp, n);
      CHECK((s.entries() - (l.entries() * lp.entries())).norm() <= 1e-12);
    }
  }

  SUBCASE("identity left operand returns the right operand") {
    const auto i = LabeledOperator::identity({kA});
    const LabeledOperator lp({kA}, rng.random_psd(2));
    for (int n : {1, 3}) {
      const auto s = star_n(i, lp, n);
      CHECK((s.entries() - lp.entries()).norm() <= 1e-12);
    }
  }

  SUBCASE("n=1 matches the closed-form 2x2 evaluation") {
    Eigen::MatrixXcd l(2, 2), lp(2, 2);
    l << 2, 1, 1, 1;
    lp << 1, 0, 0, 3;
    const auto s = star_n(LabeledOperator({kA}, l), LabeledOperator({kA}, lp), 1);
    const Eigen::MatrixXcd root = sqrt2x2(l);
    const Eigen::MatrixXcd expect = root * lp * root;
    CHECK((s.entries() - expect).norm() <= 1e-12);
  }

  SUBCASE("result is PSD for random PSD inputs") {
    for (int trial = 0; trial < 30; ++trial) {
      const LabeledOperator l({kA}, rng.random_psd(2));
      const LabeledOperator lp({kA}, rng.random_psd(2));
      const auto s = star_n(l, lp, rng.uniform_int(1, 8));
      const auto spec = psd_spectrum(s.entries());  // throws if not PSD
      CHECK(spec.eigenvalues.minCoeff() >= 0.0);
    }
  }

  SUBCASE("extends operands with different labels") {
    const LabeledOperator l({kA}, rng.random_psd(2));
    const LabeledOperator lp({kB}, rng.random_psd(2));
    const auto s = star_n(l, lp, 1);
    CHECK(s.labels().size() == 2);
    // Disjoint labels commute, so star is the tensor-extended product.
    const auto prod = extended_product(l, lp);
    CHECK((s.entries() - prod.entries()).norm() <= 1e-10);
  }

  SUBCASE("rejects non-PSD input") {
    CHECK_THROWS_AS(star_n(diag_op(kA, {1.0, -1.0}), diag_op(kA, {1.0, 1.0}), 1),
                    NumericError);
  }
}

TEST_CASE("star is neither commutative nor associative, witnessed") {
  Rng rng(11);
  bool found = false;
  for (int trial = 0; trial < 100 && !found; ++trial) {
    const LabeledOperator l({kA}, rng.random_psd(2));
    const LabeledOperator lp({kA}, rng.random_psd(2));
    const auto ab = star_n(l, lp, 1);
    const auto ba = star_n(lp, l, 1);
    if ((ab.entries() - ba.entries()).norm() > 1e-6) found = true;
  }
  CHECK(found);
}

TEST_CASE("odot") {
  Rng rng(13);

  SUBCASE("full-rank commuting pair multiplies") {
    const auto l = diag_op(kA, {1.0, 2.0});
    const auto lp = diag_op(kA, {3.0, 0.5});
    const auto o = odot(l, lp);
    CHECK((o.entries() - (l.entries() * lp.entries())).norm() <= 1e-12);
  }

  SUBCASE("disjoint supports give the zero operator") {
    const auto o = odot(diag_op(kA, {1.0, 0.0}), diag_op(kA, {0.0, 1.0}));
    CHECK(o.entries().norm() == 0.0);
  }

  SUBCASE("star_n converges to odot") {
    const LabeledOperator l({kA}, rng.random_psd(2));
    const LabeledOperator lp({kA}, rng.random_psd(2));
    const auto target = odot(l, lp);
    double prev = -1.0;
    for (int n : {1, 4, 16, 64, 256}) {
      const double err = (star_n(l, lp, n).entries() - target.entries()).norm();
      if (prev >= 0.0) CHECK(err < prev);
      prev = err;
    }
    CHECK(prev <= 1e-4 * std::max(1.0, target.entries().norm()));
  }

  SUBCASE("second-order convergence ratio") {
    for (int trial = 0; trial < 5; ++trial) {
      LabeledOperator l({kA}, rng.random_psd(2));
      LabeledOperator lp({kA}, rng.random_psd(2));
      while (commutation_residual(l, lp) < 0.02) {
        l = LabeledOperator({kA}, rng.random_psd(2));
        lp = LabeledOperator({kA}, rng.random_psd(2));
      }
      const auto target = odot(l, lp);
      auto err = [&](int n) {
        return (star_n(l, lp, n).entries() - target.entries()).norm();
      };
      for (int n : {16, 32, 64}) {
        const double ratio = err(n) / err(2 * n);
        CHECK(ratio >= 2.5);
        CHECK(ratio <= 6.0);
      }
    }
  }

  SUBCASE("commutative and associative on full-rank triples") {
    const SpaceLabel a3 = SpaceLabel::base("A", 3);
    for (int trial = 0; trial < 10; ++trial) {
      const LabeledOperator x({a3}, rng.random_psd(3).eval() +
                                        0.1 * Eigen::MatrixXcd::Identity(3, 3));
      const LabeledOperator y({a3}, rng.random_psd(3).eval() +
                                        0.1 * Eigen::MatrixXcd::Identity(3, 3));
      const LabeledOperator z({a3}, rng.random_psd(3).eval() +
                                        0.1 * Eigen::MatrixXcd::Identity(3, 3));
      const auto xy = odot(x, y);
      const auto yx = odot(y, x);
      CHECK((xy.entries() - yx.entries()).norm() <=
            1e-8 * std::max(1.0, xy.entries().norm()));
      const auto left = odot(xy, z);
      const auto right = odot(x, odot(y, z));
      CHECK((left.entries() - right.entries()).norm() <=
            1e-8 * std::max(1.0, left.entries().norm()));
    }
  }
}

TEST_CASE("quantum graph validation") {
  Rng rng(17);

  SUBCASE("non-PSD weight is rejected with the variable named") {
    Eigen::MatrixXcd bad(2, 2);
    bad << 1, 0, 0, -1;
    CHECK_THROWS_WITH_AS(
        QuantumFactorGraph({qvar("v1", bad)}, {}),
        doctest::Contains("v1"), NumericError);
  }

  SUBCASE("non-commuting factors are rejected") {
    Eigen::MatrixXcd x(2, 2), z(2, 2);
    x << 0.5, 0.4, 0.4, 0.5;
    z << 1, 0, 0, 0.1;
    QuantumFactor fx{"fx", {"v1"},
                     LabeledOperator({SpaceLabel::base("v1", 2)}, x)};
    QuantumFactor fz{"fz", {"v1"},
                     LabeledOperator({SpaceLabel::base("v1", 2)}, z)};
    CHECK_THROWS_AS(
        QuantumFactorGraph(
            {qvar("v1", Eigen::MatrixXcd::Identity(2, 2))}, {fx, fz}),
        NumericError);
  }

  SUBCASE("factor labels must match neighbor spaces") {
    QuantumFactor f{"f", {"v1"},
                    LabeledOperator({SpaceLabel::base("v2", 2)},
                                    Eigen::MatrixXcd::Identity(2, 2))};
    CHECK_THROWS_AS(
        QuantumFactorGraph({qvar("v1", Eigen::MatrixXcd::Identity(2, 2))},
                           {f}),
        ShapeError);
  }
}

TEST_CASE("z_quantum") {
  Rng rng(19);

  SUBCASE("no factors: product of traces") {
    const Eigen::MatrixXcd w1 = rng.random_psd(2);
    const Eigen::MatrixXcd w2 = rng.random_psd(3);
    QuantumFactorGraph g({qvar("v1", w1), qvar("v2", w2)}, {});
    CHECK(z_quantum(g) ==
          doctest::Approx(w1.trace().real() * w2.trace().real()));
  }

  SUBCASE("identity factor changes nothing") {
    const Eigen::MatrixXcd w1 = rng.random_psd(2);
    QuantumFactor f{"f", {"v1"},
                    LabeledOperator::identity({SpaceLabel::base("v1", 2)})};
    QuantumFactorGraph g({qvar("v1", w1)}, {f});
    CHECK(z_quantum(g) == doctest::Approx(w1.trace().real()));
  }

  SUBCASE("diagonal graph matches the classical pipeline") {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<QuantumVariable> vars;
      for (int i = 0; i < 3; ++i) {
        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
        d(0, 0) = rng.uniform(0.1, 2.0);
        d(1, 1) = rng.uniform(0.1, 2.0);
        vars.push_back(qvar("v" + std::to_string(i), d));
      }
      std::vector<QuantumFactor> facs;
      for (int a = 0; a < 2; ++a) {
        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
        for (int k = 0; k < 4; ++k) d(k, k) = rng.uniform(0.1, 2.0);
        const std::string left = "v" + std::to_string(a);
        const std::string right = "v" + std::to_string(a + 1);
        facs.push_back({"f" + std::to_string(a),
                        {left, right},
                        LabeledOperator({SpaceLabel::base(left, 2),
                                         SpaceLabel::base(right, 2)},
                                        d)});
      }
      QuantumFactorGraph g(std::move(vars), std::move(facs));
      const double zq = z_quantum(g);
      const double zc = z_classical(induced_classical(g));
      CHECK(std::abs(zq - zc) <= 1e-10 * std::max(1.0, std::abs(zc)));
    }
  }
}

TEST_CASE("density_operator") {
  Rng rng(23);

  SUBCASE("single variable with identity factor") {
    const Eigen::MatrixXcd w = rng.random_psd(2);
    QuantumFactor f{"f", {"v1"},
                    LabeledOperator::identity({SpaceLabel::base("v1", 2)})};
    QuantumFactorGraph g({qvar("v1", w)}, {f});
    const auto rho = density_operator(g);
    CHECK((rho.entries() - w / w.trace().real()).norm() <= 1e-12);
  }

  SUBCASE("trace one and PSD across random graphs") {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXcd w1 = rng.random_psd(2);
      const Eigen::MatrixXcd w2 = rng.random_psd(2);
      const Eigen::MatrixXcd f12 = rng.random_psd(4);
      QuantumFactor f{"f", {"v1", "v2"},
                      LabeledOperator({SpaceLabel::base("v1", 2),
                                       SpaceLabel::base("v2", 2)},
                                      f12)};
      QuantumFactorGraph g({qvar("v1", w1), qvar("v2", w2)}, {f});
      const auto rho = density_operator(g);
      CHECK(std::abs(trace(rho).real() - 1.0) <= 1e-10);
      const auto spec = psd_spectrum(rho.entries());
      CHECK(spec.eigenvalues.minCoeff() >= 0.0);
    }
  }

  SUBCASE("degenerate model is rejected") {
    QuantumFactor f{"f", {"v1"},
                    LabeledOperator({SpaceLabel::base("v1", 2)},
                                    Eigen::MatrixXcd::Zero(2, 2))};
    QuantumFactorGraph g(
        {qvar("v1", Eigen::MatrixXcd::Identity(2, 2))}, {f});
    CHECK_THROWS_AS(density_operator(g), NumericError);
  }
}

TEST_CASE("check_star_distributivity") {
  Rng rng(29);

  SUBCASE("identity operands") {
    const auto lab = LabeledOperator::identity({kA, kB});
    const auto lbc = LabeledOperator::identity({kB, kC});
    CHECK(check_star_distributivity(lab, lbc) <= 1e-12);
  }

  SUBCASE("product states factorize") {
    const auto la = LabeledOperator({kA}, rng.random_psd(2));
    const auto lb = LabeledOperator({kB}, rng.random_psd(2));
    const auto lb2 = LabeledOperator({kB}, rng.random_psd(2));
    const auto lc = LabeledOperator({kC}, rng.random_psd(2));
    const auto lab = tensor_product(la, lb);
    const auto lbc = tensor_product(lb2, lc);
    CHECK(check_star_distributivity(lab, lbc) <= 1e-12);
  }

  SUBCASE("random PSD pairs stay within tolerance") {
    for (int trial = 0; trial < 50; ++trial) {
      const LabeledOperator lab({kA, kB}, rng.random_psd(4));
      const LabeledOperator lbc({kB, kC}, rng.random_psd(4));
      CHECK(check_star_distributivity(lab, lbc) <= 1e-9);
    }
  }

  SUBCASE("bad overlap shape is rejected") {
    const LabeledOperator lab({kA, kB}, rng.random_psd(4));
    const LabeledOperator same({kA, kB}, rng.random_psd(4));
    CHECK_THROWS_AS(check_star_distributivity(lab, same), ShapeError);
  }
}

TEST_CASE("find_odot_nondistributivity") {
  SUBCASE("a witness exists among random qubit triples") {
    const auto w = find_odot_nondistributivity(424242, 100);
    REQUIRE(w.has_value());
    CHECK(w->discrepancy > 1e-3);

    // Deterministic: the same seed reproduces the same witness bit for bit.
    const auto w2 = find_odot_nondistributivity(424242, 100);
    REQUIRE(w2.has_value());
    CHECK(w2->trial == w->trial);
    CHECK(w2->discrepancy == w->discrepancy);
    CHECK(w2->lambda_ab.entries() == w->lambda_ab.entries());
  }

  SUBCASE("commuting diagonal pairs show no discrepancy") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXcd dab = Eigen::MatrixXcd::Zero(4, 4);
      Eigen::MatrixXcd dbc = Eigen::MatrixXcd::Zero(4, 4);
      for (int k = 0; k < 4; ++k) {
        dab(k, k) = rng.uniform(0.1, 2.0);
        dbc(k, k) = rng.uniform(0.1, 2.0);
      }
      const LabeledOperator lab({kA, kB}, dab);
      const LabeledOperator lbc({kB, kC}, dbc);
      CHECK(odot_distributivity_discrepancy(lab, lbc) <= 1e-10);
    }
  }
}
