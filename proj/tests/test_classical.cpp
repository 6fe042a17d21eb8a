#include "holofg/classical.hpp"

#include <cmath>

#include "doctest.h"
#include "holofg/rng.hpp"

using namespace holofg;

namespace {

ClassicalVariable var(std::string id, std::vector<double> w) {
  ClassicalVariable v;
  v.id = std::move(id);
  v.domain_size = static_cast<int>(w.size());
  v.weight = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
  return v;
}

ClassicalFactor fac(std::string id, std::vector<std::string> neighbors,
                    std::vector<double> table) {
  ClassicalFactor f;
  f.id = std::move(id);
  f.neighbors = std::move(neighbors);
  f.table = Eigen::Map<Eigen::VectorXd>(table.data(), table.size());
  return f;
}

Eigen::MatrixXd hadamard2() {
  Eigen::MatrixXd h(2, 2);
  h << 1, 1, 1, -1;
  return h;
}

// Independent oracle: nested-loop enumeration that shares no index machinery
// with the library (odometer over explicit per-variable counters).
double enumerate_z(const ClassicalFactorGraph& g) {
  const auto& vars = g.variables();
  std::vector<int> x(vars.size(), 0);
  double z = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < vars.size(); ++k) w *= vars[k].weight[x[k]];
    for (const auto& f : g.factors()) {
      std::int64_t idx = 0;
      for (const auto& n : f.neighbors) {
        const std::size_t vi = g.variable_index(n);
        idx = idx * vars[vi].domain_size + x[vi];
      }
      w *= f.table[idx];
    }
    z += w;

    std::size_t k = vars.size();
    while (k > 0) {
      --k;
      if (++x[k] < vars[k].domain_size) break;
      x[k] = 0;
      if (k == 0) return z;
    }
    if (vars.empty()) return z;
  }
}

ClassicalFactorGraph random_graph(Rng& rng, int nv, int nf) {
  std::vector<ClassicalVariable> vs;
  for (int i = 0; i < nv; ++i) {
    const int dom = rng.uniform_int(2, 3);
    std::vector<double> w(dom);
    for (double& e : w) e = rng.uniform(0.0, 2.0);
    vs.push_back(var("v" + std::to_string(i), w));
  }
  std::vector<ClassicalFactor> fs;
  for (int a = 0; a < nf; ++a) {
    const int arity = rng.uniform_int(1, std::min(3, nv));
    std::vector<int> pool(nv);
    for (int i = 0; i < nv; ++i) pool[i] = i;
    rng.shuffle(pool);
    std::vector<std::string> nb;
    std::int64_t side = 1;
    for (int k = 0; k < arity; ++k) {
      nb.push_back("v" + std::to_string(pool[k]));
      side *= vs[pool[k]].domain_size;
    }
    std::vector<double> table(side);
    for (double& e : table) e = rng.uniform(0.0, 2.0);
    fs.push_back(fac("f" + std::to_string(a), nb, table));
  }
  return ClassicalFactorGraph(std::move(vs), std::move(fs));
}

ClassicalTransformSet random_invertible_transforms(Rng& rng,
                                                   const ClassicalFactorGraph& g) {
  ClassicalTransformSet ts;
  for (const auto& [vid, fid] : g.edges()) {
    const int q = g.variable(vid).domain_size;
    Eigen::MatrixXd phi;
    Eigen::MatrixXd inv;
    while (true) {
      phi = rng.gaussian_real(q, q);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(phi);
      if (!lu.isInvertible()) continue;
      inv = lu.inverse();
      if ((phi * inv - Eigen::MatrixXd::Identity(q, q)).cwiseAbs().maxCoeff() <
          1e-11) {
        break;
      }
    }
    ts.add({vid, fid, phi, inv});
  }
  return ts;
}

ClassicalTransformSet identity_transforms(const ClassicalFactorGraph& g) {
  ClassicalTransformSet ts;
  for (const auto& [vid, fid] : g.edges()) {
    const int q = g.variable(vid).domain_size;
    ts.add({vid, fid, Eigen::MatrixXd::Identity(q, q),
            Eigen::MatrixXd::Identity(q, q)});
  }
  return ts;
}

}  // namespace

TEST_CASE("z_classical hand values") {
  SUBCASE("one binary variable, one unary factor") {
    ClassicalFactorGraph g({var("v1", {1, 1})}, {fac("a1", {"v1"}, {2, 3})});
    CHECK(z_classical(g) == doctest::Approx(5.0));
  }

  SUBCASE("all-ones graph counts states") {
    ClassicalFactorGraph g(
        {var("v1", {1, 1}), var("v2", {1, 1, 1})},
        {fac("a1", {"v1", "v2"}, {1, 1, 1, 1, 1, 1})});
    CHECK(z_classical(g) == doctest::Approx(6.0));
  }

  SUBCASE("no factors degenerates to a product of sums") {
    ClassicalFactorGraph g({var("v1", {0.5, 2.0}), var("v2", {1, 2, 3})}, {});
    CHECK(z_classical(g) == 2.5 * 6.0);
  }
}

TEST_CASE("z_classical matches an independent enumerator") {
  Rng rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = random_graph(rng, 4, 3);
    const double z = z_classical(g);
    const double oracle = enumerate_z(g);
    CHECK(std::abs(z - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("z_classical guards the state space") {
  std::vector<ClassicalVariable> vs;
  for (int i = 0; i < 21; ++i) {
    vs.push_back(var("v" + std::to_string(i), {1, 1}));
  }
  // 21 binary variables give 2^21 states, past the 2^20 guard.
  ClassicalFactorGraph too_big(std::move(vs), {});
  CHECK_THROWS_AS(z_classical(too_big), SizeError);
}

TEST_CASE("check_biorthogonality") {
  CHECK(check_biorthogonality({"v", "f", Eigen::MatrixXd::Identity(2, 2),
                               Eigen::MatrixXd::Identity(2, 2)}) == 0.0);
  CHECK(check_biorthogonality({"v", "f", hadamard2(), 0.5 * hadamard2()}) ==
        0.0);

  Rng rng(7);
  Eigen::MatrixXd phi = rng.gaussian_real(3, 3);
  while (std::abs(phi.determinant()) < 1e-3) phi = rng.gaussian_real(3, 3);
  CHECK(check_biorthogonality({"v", "f", phi, phi.inverse()}) <= 1e-12);

  CHECK_THROWS_AS(check_biorthogonality(
                      {"v", "f", Eigen::MatrixXd::Identity(2, 3),
                       Eigen::MatrixXd::Identity(3, 2)}),
                  ShapeError);
}

TEST_CASE("classical_transform identity collapse") {
  ClassicalFactorGraph g(
      {var("v1", {1, 2}), var("v2", {3, 1})},
      {fac("a1", {"v1", "v2"}, {1, 2, 3, 4}), fac("a2", {"v1"}, {1, 5})});
  const auto t = classical_transform(g, identity_transforms(g));

  // Hatted factor tables equal the originals.
  CHECK(t.factor_tables[0].values.isApprox(g.factors()[0].table));
  CHECK(t.factor_tables[1].values.isApprox(g.factors()[1].table));

  // Hatted variable tables put f_i(y) on the all-copies-equal diagonal.
  // v1 has degree 2: table over (y_{v1,a1}, y_{v1,a2}).
  const auto& tv1 = t.variable_tables[0].values;
  CHECK(tv1[0] == doctest::Approx(1.0));   // y = (0,0)
  CHECK(tv1[1] == doctest::Approx(0.0));   // y = (0,1)
  CHECK(tv1[2] == doctest::Approx(0.0));   // y = (1,0)
  CHECK(tv1[3] == doctest::Approx(2.0));   // y = (1,1)
}

TEST_CASE("classical_transform Hadamard pair on an equality factor") {
  // f_a(z1,z2) = delta(z1,z2); phi_hat = H/2 on both edges.
  ClassicalFactorGraph g(
      {var("v1", {1, 1}), var("v2", {1, 1})},
      {fac("a1", {"v1", "v2"}, {1, 0, 0, 1})});
  ClassicalTransformSet ts;
  ts.add({"v1", "a1", hadamard2(), 0.5 * hadamard2()});
  ts.add({"v2", "a1", hadamard2(), 0.5 * hadamard2()});
  const auto t = classical_transform(g, ts);

  // Direct 2x2 summation: f^(y1,y2) = sum_z phihat(y1,z) phihat(y2,z).
  const Eigen::MatrixXd hh = 0.5 * hadamard2();
  Eigen::VectorXd expect(4);
  for (int y1 = 0; y1 < 2; ++y1)
    for (int y2 = 0; y2 < 2; ++y2)
      expect[y1 * 2 + y2] = hh(y1, 0) * hh(y2, 0) + hh(y1, 1) * hh(y2, 1);
  CHECK(t.factor_tables[0].values.isApprox(expect, 1e-14));
  CHECK(expect[0] == doctest::Approx(0.5));
  CHECK(expect[1] == doctest::Approx(0.0));
  CHECK(expect[3] == doctest::Approx(0.5));
}

TEST_CASE("classical_transform single-edge specialization") {
  ClassicalFactorGraph g({var("v1", {1, 1, 1})},
                         {fac("a1", {"v1"}, {0.3, 1.7, 0.2})});
  Rng rng(3);
  Eigen::MatrixXd phi = rng.gaussian_real(3, 3);
  while (std::abs(phi.determinant()) < 1e-3) phi = rng.gaussian_real(3, 3);
  ClassicalTransformSet ts;
  ts.add({"v1", "a1", phi, phi.inverse()});
  const auto t = classical_transform(g, ts);
  const Eigen::VectorXd expect = phi.inverse() * g.factors()[0].table;
  CHECK(t.factor_tables[0].values.isApprox(expect, 1e-10));
}

TEST_CASE("classical_transform error cases") {
  ClassicalFactorGraph g({var("v1", {1, 1})}, {fac("a1", {"v1"}, {2, 3})});

  SUBCASE("missing edge transform") {
    CHECK_THROWS_AS(classical_transform(g, ClassicalTransformSet{}),
                    ShapeError);
  }
  SUBCASE("extra edge transform") {
    auto ts = identity_transforms(g);
    ts.add({"v1", "ghost", Eigen::MatrixXd::Identity(2, 2),
            Eigen::MatrixXd::Identity(2, 2)});
    CHECK_THROWS_AS(classical_transform(g, ts), ShapeError);
  }
  SUBCASE("biorthogonality violation") {
    ClassicalTransformSet ts;
    ts.add({"v1", "a1", hadamard2(), hadamard2()});  // H*H = 2I != I
    CHECK_THROWS_AS(classical_transform(g, ts), NumericError);
  }
}

TEST_CASE("verify_classical_holant") {
  SUBCASE("identity transforms give zero discrepancy") {
    Rng rng(55);
    const auto g = random_graph(rng, 4, 3);
    const auto report = verify_classical_holant(g, identity_transforms(g));
    CHECK(report.verdict == Verdict::Pass);
    CHECK(report.discrepancy <= 1e-12);
  }

  SUBCASE("Hadamard pairs on a 3-cycle of equality factors") {
    std::vector<ClassicalVariable> vs = {var("v0", {1, 1}), var("v1", {1, 1}),
                                         var("v2", {1, 1})};
    std::vector<ClassicalFactor> fs;
    for (int k = 0; k < 3; ++k) {
      fs.push_back(fac("e" + std::to_string(k),
                       {"v" + std::to_string(k), "v" + std::to_string((k + 1) % 3)},
                       {1, 0, 0, 1}));
    }
    ClassicalFactorGraph g(std::move(vs), std::move(fs));
    ClassicalTransformSet ts;
    for (const auto& [vid, fid] : g.edges()) {
      ts.add({vid, fid, hadamard2(), 0.5 * hadamard2()});
    }
    const auto report = verify_classical_holant(g, ts);
    CHECK(report.verdict == Verdict::Pass);
    CHECK(report.discrepancy <= 1e-10);
    CHECK(report.z_original.real() == doctest::Approx(2.0));  // two equal cycles
  }

  SUBCASE("random graphs and random invertible pairs") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
      const auto g = random_graph(rng, rng.uniform_int(2, 5),
                                  rng.uniform_int(1, 4));
      const auto ts = random_invertible_transforms(rng, g);
      const auto report = verify_classical_holant(g, ts);
      CHECK(report.verdict == Verdict::Pass);
      CHECK(report.discrepancy <= 1e-9);
    }
  }

  SUBCASE("corrupted pair is a FAIL verdict naming the edge") {
    Rng rng(9);
    const auto g = random_graph(rng, 3, 2);
    auto ts = identity_transforms(g);
    const auto edge = g.edges().front();
    ClassicalTransformSet bad;
    for (const auto& [key, t] : ts.entries()) {
      ClassicalEdgeTransform copy = t;
      if (key == edge) copy.phi_hat(0, 0) += 0.1;
      bad.add(std::move(copy));
    }
    const auto report = verify_classical_holant(g, bad);
    CHECK(report.verdict == Verdict::Fail);
    REQUIRE(!report.failures.empty());
    CHECK(report.failures.front().find(edge.first) != std::string::npos);
    CHECK(report.failures.front().find(edge.second) != std::string::npos);
  }
}

TEST_CASE("scaling covariance") {
  Rng rng(66);
  auto g = random_graph(rng, 3, 2);
  const auto ts = random_invertible_transforms(rng, g);
  const double z = z_classical(g);
  const double zt = z_transformed_classical(classical_transform(g, ts));

  std::vector<ClassicalVariable> vs(g.variables().begin(), g.variables().end());
  std::vector<ClassicalFactor> fs(g.factors().begin(), g.factors().end());
  fs[0].table *= 2.0;
  ClassicalFactorGraph scaled(std::move(vs), std::move(fs));
  CHECK(z_classical(scaled) == 2.0 * z);
  CHECK(z_transformed_classical(classical_transform(scaled, ts)) == 2.0 * zt);
}

TEST_CASE("graph validation") {
  CHECK_THROWS_AS(ClassicalFactorGraph({var("v1", {1, -1})}, {}), ShapeError);
  CHECK_THROWS_AS(ClassicalFactorGraph({var("v1", {1, 1})},
                                       {fac("a1", {"vX"}, {1, 1})}),
                  ShapeError);
  CHECK_THROWS_AS(ClassicalFactorGraph({var("v1", {1, 1})},
                                       {fac("a1", {"v1"}, {1, 1, 1})}),
                  ShapeError);
  CHECK_THROWS_AS(ClassicalFactorGraph({var("v1", {1, 1})},
                                       {fac("a1", {"v1", "v1"}, {1, 1, 1, 1})}),
                  ShapeError);
}
