#include <algorithm>
#include <cmath>

#include "holofg/rng.hpp"
#include "holofg/transform.hpp"

namespace holofg {

const char* family_name(Family f) {
  switch (f) {
    case Family::Diagonal:
      return "DIAGONAL";
    case Family::Deg1:
      return "DEG1";
    case Family::Pauli:
      return "PAULI";
    default:
      return "IDENTITY";
  }
}

Family family_from_name(const std::string& name) {
  if (name == "DIAGONAL") return Family::Diagonal;
  if (name == "DEG1") return Family::Deg1;
  if (name == "PAULI") return Family::Pauli;
  if (name == "IDENTITY") return Family::Identity;
  throw ParseError("unknown family " + name);
}

namespace {

struct Structure {
  std::vector<int> dims;                       // per variable
  std::vector<std::vector<int>> neighbors;     // per factor, variable indices
};

std::string var_id(int i) { return "v" + std::to_string(i); }
std::string fac_id(int a) { return "f" + std::to_string(a); }

// Random bipartite structure with min degree one and both the base and hat
// total dimensions within params.dim_limit.
Structure sample_structure(Rng& rng, const GenParams& params, int fixed_dim) {
  const int nv = std::max(1, params.variables);
  const int nf = std::max(1, params.factors);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Structure s;
    for (int i = 0; i < nv; ++i) {
      s.dims.push_back(fixed_dim > 0 ? fixed_dim
                                     : rng.uniform_int(2, std::max(2, params.max_dim)));
    }
    s.neighbors.assign(nf, {});
    for (int a = 0; a < nf; ++a) {
      const int arity = rng.uniform_int(1, std::min(3, nv));
      std::vector<int> pool(nv);
      for (int i = 0; i < nv; ++i) pool[i] = i;
      rng.shuffle(pool);
      s.neighbors[a].assign(pool.begin(), pool.begin() + arity);
      std::sort(s.neighbors[a].begin(), s.neighbors[a].end());
    }
    // Attach isolated variables to a random factor.
    for (int i = 0; i < nv; ++i) {
      bool used = false;
      for (const auto& nb : s.neighbors) {
        if (std::find(nb.begin(), nb.end(), i) != nb.end()) used = true;
      }
      if (!used) {
        auto& nb = s.neighbors[rng.uniform_int(0, nf - 1)];
        nb.push_back(i);
        std::sort(nb.begin(), nb.end());
      }
    }

    std::int64_t base_dim = 1, hat_dim = 1;
    for (int d : s.dims) base_dim *= d;
    for (const auto& nb : s.neighbors) {
      for (int i : nb) hat_dim *= s.dims[i];
    }
    if (base_dim <= params.dim_limit && hat_dim <= params.dim_limit) {
      return s;
    }
  }
  throw SizeError("could not sample a structure within the dimension limit");
}

// Degree-one structure: variables partitioned among factors.
Structure sample_deg1_structure(Rng& rng, const GenParams& params) {
  const int nv = std::max(params.variables, params.factors);
  const int nf = std::max(1, params.factors);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Structure s;
    for (int i = 0; i < nv; ++i) {
      s.dims.push_back(rng.uniform_int(2, std::max(2, params.max_dim)));
    }
    std::vector<int> pool(nv);
    for (int i = 0; i < nv; ++i) pool[i] = i;
    rng.shuffle(pool);
    s.neighbors.assign(nf, {});
    for (int a = 0; a < nf; ++a) s.neighbors[a].push_back(pool[a]);
    for (int k = nf; k < nv; ++k) {
      s.neighbors[rng.uniform_int(0, nf - 1)].push_back(pool[k]);
    }
    for (auto& nb : s.neighbors) std::sort(nb.begin(), nb.end());

    std::int64_t base_dim = 1;
    for (int d : s.dims) base_dim *= d;
    // Every variable has degree one, so the hat dimension equals base_dim.
    if (base_dim <= params.dim_limit) return s;
  }
  throw SizeError("could not sample a structure within the dimension limit");
}

Eigen::MatrixXd random_invertible_real(Rng& rng, int q, double max_cond) {
  while (true) {
    Eigen::MatrixXd m = rng.gaussian_real(q, q);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv[sv.size() - 1] > 0.0 && sv[0] / sv[sv.size() - 1] <= max_cond) {
      return m;
    }
  }
}

Eigen::MatrixXcd random_invertible_complex(Rng& rng, Eigen::Index n,
                                           double max_cond) {
  while (true) {
    Eigen::MatrixXcd m = rng.gaussian_complex(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv[sv.size() - 1] > 0.0 && sv[0] / sv[sv.size() - 1] <= max_cond) {
      return m;
    }
  }
}

EdgeTransform identity_edge(const std::string& var, const std::string& fac,
                            int q) {
  EdgeTransform t;
  t.variable = var;
  t.factor = fac;
  t.mode = TransformMode::Strong;
  t.phi = SuperOperator::identity_relabel(hat_label(var, fac, q),
                                          SpaceLabel::base(var, q));
  t.phi_hat = SuperOperator::identity_relabel(prime_label(var, fac, q),
                                              hat_label(var, fac, q));
  return t;
}

// Diagonal quantum pair embedding a classical biorthogonal pair.
EdgeTransform diagonal_edge(Rng& rng, const std::string& var,
                            const std::string& fac, int q) {
  const Eigen::MatrixXd phi_c = random_invertible_real(rng, q, 1e3);
  const Eigen::MatrixXd phi_hat_c = phi_c.inverse();

  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(q * q, q * q);
  Eigen::MatrixXcd phi_hat = Eigen::MatrixXcd::Zero(q * q, q * q);
  for (int x = 0; x < q; ++x) {
    for (int y = 0; y < q; ++y) {
      phi(x * q + y, x * q + y) = phi_c(x, y);
      phi_hat(x * q + y, x * q + y) = phi_hat_c(x, y);
    }
  }

  EdgeTransform t;
  t.variable = var;
  t.factor = fac;
  t.mode = TransformMode::Diagonal;
  t.phi = SuperOperator::from_cj({hat_label(var, fac, q)},
                                 {SpaceLabel::base(var, q)}, phi);
  t.phi_hat = SuperOperator::from_cj({prime_label(var, fac, q)},
                                     {hat_label(var, fac, q)}, phi_hat);
  return t;
}

EdgeTransform random_strong_edge(Rng& rng, const std::string& var,
                                 const std::string& fac, int q) {
  const SpaceLabel base = SpaceLabel::base(var, q);
  const SpaceLabel hat = hat_label(var, fac, q);
  const SpaceLabel prime = prime_label(var, fac, q);

  EdgeTransform t;
  t.variable = var;
  t.factor = fac;
  t.mode = TransformMode::Strong;
  t.phi = SuperOperator::from_transfer(
      {hat}, {base},
      random_invertible_complex(rng, static_cast<Eigen::Index>(q) * q, 1e3));
  t.phi_hat = invert(t.phi).with_domain({prime});
  return t;
}

Eigen::VectorXd positive_diagonal(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd d(n);
  for (Eigen::Index k = 0; k < n; ++k) d[k] = rng.uniform(0.2, 2.0);
  return d;
}

LabeledOperator diagonal_operator(const std::vector<SpaceLabel>& labels,
                                  const Eigen::VectorXd& diag) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(diag.size(), diag.size());
  m.diagonal() = diag.cast<std::complex<double>>();
  return LabeledOperator(labels, std::move(m));
}

std::vector<SpaceLabel> base_labels(const Structure& s,
                                    const std::vector<int>& vars) {
  std::vector<SpaceLabel> labels;
  for (int i : vars) labels.push_back(SpaceLabel::base(var_id(i), s.dims[i]));
  return labels;
}

// --- Pauli machinery (qubits) ---

struct PauliString {
  std::uint64_t x = 0;  // X component mask over variables
  std::uint64_t z = 0;  // Z component mask
};

bool pauli_commute(const PauliString& a, const PauliString& b) {
  const int overlap = __builtin_popcountll(a.x & b.z) +
                      __builtin_popcountll(a.z & b.x);
  return overlap % 2 == 0;
}

Eigen::Matrix2cd pauli_matrix(bool x, bool z) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  const std::complex<double> i(0.0, 1.0);
  if (x && z) {  // Y
    m(0, 1) = -i;
    m(1, 0) = i;
  } else if (x) {  // X
    m(0, 1) = 1;
    m(1, 0) = 1;
  } else if (z) {  // Z
    m(0, 0) = 1;
    m(1, 1) = -1;
  } else {  // I
    m.setIdentity();
  }
  return m;
}

}  // namespace

Instance gen_instance(Family family, const GenParams& params,
                      std::uint64_t seed) {
  Rng rng(seed ^ (0xD1B54A32D192ED03ull + static_cast<std::uint64_t>(family)));

  std::vector<QuantumVariable> variables;
  std::vector<QuantumFactor> factors;
  QuantumTransformSet transforms;

  auto add_variable = [&](int i, int dim, LabeledOperator weight) {
    variables.push_back({var_id(i), dim, std::move(weight)});
  };
  auto add_factor = [&](int a, const Structure& s, LabeledOperator table) {
    QuantumFactor f;
    f.id = fac_id(a);
    for (int i : s.neighbors[a]) f.neighbors.push_back(var_id(i));
    f.table = std::move(table);
    factors.push_back(std::move(f));
  };

  switch (family) {
    case Family::Diagonal: {
      const Structure s = sample_structure(rng, params, 0);
      for (std::size_t i = 0; i < s.dims.size(); ++i) {
        const SpaceLabel l = SpaceLabel::base(var_id(static_cast<int>(i)),
                                              s.dims[i]);
        add_variable(static_cast<int>(i), s.dims[i],
                     diagonal_operator({l}, positive_diagonal(rng, s.dims[i])));
      }
      for (std::size_t a = 0; a < s.neighbors.size(); ++a) {
        const auto labels = base_labels(s, s.neighbors[a]);
        std::int64_t side = 1;
        for (const SpaceLabel& l : labels) side *= l.dim;
        add_factor(static_cast<int>(a), s,
                   diagonal_operator(labels, positive_diagonal(rng, side)));
        for (int i : s.neighbors[a]) {
          transforms.add(diagonal_edge(rng, var_id(i),
                                       fac_id(static_cast<int>(a)), s.dims[i]));
        }
      }
      break;
    }

    case Family::Deg1: {
      const Structure s = sample_deg1_structure(rng, params);
      for (std::size_t i = 0; i < s.dims.size(); ++i) {
        const SpaceLabel l =
            SpaceLabel::base(var_id(static_cast<int>(i)), s.dims[i]);
        add_variable(static_cast<int>(i), s.dims[i],
                     LabeledOperator({l}, rng.random_psd(s.dims[i])));
      }
      for (std::size_t a = 0; a < s.neighbors.size(); ++a) {
        const auto labels = base_labels(s, s.neighbors[a]);
        std::int64_t side = 1;
        for (const SpaceLabel& l : labels) side *= l.dim;
        add_factor(static_cast<int>(a), s,
                   LabeledOperator(labels, rng.random_psd(side)));
        for (int i : s.neighbors[a]) {
          transforms.add(random_strong_edge(rng, var_id(i),
                                            fac_id(static_cast<int>(a)),
                                            s.dims[i]));
        }
      }
      break;
    }

    case Family::Pauli: {
      const Structure s = sample_structure(rng, params, 2);
      for (std::size_t i = 0; i < s.dims.size(); ++i) {
        const SpaceLabel l = SpaceLabel::base(var_id(static_cast<int>(i)), 2);
        add_variable(static_cast<int>(i), 2,
                     LabeledOperator({l}, rng.random_psd(2)));
      }

      std::vector<PauliString> accepted;
      std::vector<bool> factor_is_identity;
      for (std::size_t a = 0; a < s.neighbors.size(); ++a) {
        PauliString str;
        bool ok = false;
        for (int attempt = 0; attempt < 500 && !ok; ++attempt) {
          str = PauliString{};
          for (int i : s.neighbors[a]) {
            const int letter = rng.uniform_int(1, 3);  // 1=X, 2=Y, 3=Z
            if (letter != 3) str.x |= (1ull << i);
            if (letter != 1) str.z |= (1ull << i);
          }
          ok = true;
          for (const PauliString& prev : accepted) {
            if (!pauli_commute(str, prev)) {
              ok = false;
              break;
            }
          }
        }
        factor_is_identity.push_back(!ok);
        if (!ok) str = PauliString{};  // exp(0) = I still commutes
        accepted.push_back(str);

        const double theta = rng.uniform(-1.0, 1.0);
        LabeledOperator p(std::complex<double>(1.0));
        for (int i : s.neighbors[a]) {
          const bool x = (str.x >> i) & 1, z = (str.z >> i) & 1;
          p = tensor_product(
              p, LabeledOperator({SpaceLabel::base(var_id(i), 2)},
                                 pauli_matrix(x, z)));
        }
        Eigen::MatrixXcd table =
            Eigen::MatrixXcd::Identity(p.dim(), p.dim());
        if (!factor_is_identity[a]) {
          table = std::cosh(theta) * table + std::sinh(theta) * p.entries();
        }
        add_factor(static_cast<int>(a), s,
                   LabeledOperator(p.labels(), std::move(table)));
      }

      // Transform mode is chosen per node so the CJ operators meeting at a
      // node commute: diagonal pairs on every edge, or pure relabels on
      // every edge. Diagonal pairs are valid only where every incident
      // factor is diagonal on this variable's leg (letter Z or identity).
      for (int i = 0; i < static_cast<int>(s.dims.size()); ++i) {
        bool diagonal_safe = true;
        std::vector<int> incident;
        for (std::size_t a = 0; a < s.neighbors.size(); ++a) {
          if (std::find(s.neighbors[a].begin(), s.neighbors[a].end(), i) ==
              s.neighbors[a].end()) {
            continue;
          }
          incident.push_back(static_cast<int>(a));
          const bool x = (accepted[a].x >> i) & 1;
          if (x && !factor_is_identity[a]) diagonal_safe = false;
        }
        const bool use_diagonal = diagonal_safe && rng.uniform() < 0.5;
        for (int a : incident) {
          if (use_diagonal) {
            transforms.add(diagonal_edge(rng, var_id(i), fac_id(a), 2));
          } else {
            transforms.add(identity_edge(var_id(i), fac_id(a), 2));
          }
        }
      }
      break;
    }

    case Family::Identity: {
      const int variant = static_cast<int>(seed % 3);
      Structure s = variant == 1 ? sample_deg1_structure(rng, params)
                                 : sample_structure(rng, params,
                                                    variant == 2 ? 2 : 0);
      for (std::size_t i = 0; i < s.dims.size(); ++i) {
        const SpaceLabel l =
            SpaceLabel::base(var_id(static_cast<int>(i)), s.dims[i]);
        add_variable(static_cast<int>(i), s.dims[i],
                     LabeledOperator({l}, rng.random_psd(s.dims[i])));
      }
      std::vector<PauliString> accepted;
      for (std::size_t a = 0; a < s.neighbors.size(); ++a) {
        const auto labels = base_labels(s, s.neighbors[a]);
        std::int64_t side = 1;
        for (const SpaceLabel& l : labels) side *= l.dim;

        if (variant == 1) {
          add_factor(static_cast<int>(a), s,
                     LabeledOperator(labels, rng.random_psd(side)));
        } else if (variant == 0) {
          add_factor(static_cast<int>(a), s,
                     diagonal_operator(labels, positive_diagonal(rng, side)));
        } else {
          PauliString str;
          bool ok = false;
          for (int attempt = 0; attempt < 500 && !ok; ++attempt) {
            str = PauliString{};
            for (int i : s.neighbors[a]) {
              const int letter = rng.uniform_int(1, 3);
              if (letter != 3) str.x |= (1ull << i);
              if (letter != 1) str.z |= (1ull << i);
            }
            ok = true;
            for (const PauliString& prev : accepted) {
              if (!pauli_commute(str, prev)) {
                ok = false;
                break;
              }
            }
          }
          if (!ok) str = PauliString{};
          accepted.push_back(str);
          const double theta = rng.uniform(-1.0, 1.0);
          LabeledOperator p(std::complex<double>(1.0));
          for (int i : s.neighbors[a]) {
            const bool x = (str.x >> i) & 1, z = (str.z >> i) & 1;
            p = tensor_product(p,
                               LabeledOperator({SpaceLabel::base(var_id(i), 2)},
                                               pauli_matrix(x, z)));
          }
          Eigen::MatrixXcd table =
              Eigen::MatrixXcd::Identity(p.dim(), p.dim());
          if (ok) {
            table = std::cosh(theta) * table + std::sinh(theta) * p.entries();
          }
          add_factor(static_cast<int>(a), s,
                     LabeledOperator(p.labels(), std::move(table)));
        }
        for (int i : s.neighbors[a]) {
          transforms.add(
              identity_edge(var_id(i), fac_id(static_cast<int>(a)), s.dims[i]));
        }
      }
      break;
    }
  }

  QuantumFactorGraph graph(std::move(variables), std::move(factors));
  return Instance{std::move(graph), std::move(transforms)};
}

}  // namespace holofg
