#ifndef HOLOFG_TYPES_HPP
#define HOLOFG_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <tuple>

namespace holofg {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

// Hard cap on the Hilbert-space dimension of any single dense operator.
inline constexpr std::int64_t kMaxOperatorDim = 4096;
// Hard cap on the classical joint state space enumerated by brute force.
inline constexpr std::int64_t kMaxClassicalStates = std::int64_t{1} << 20;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Label sets, matrix shapes, or index coverage do not line up.
struct ShapeError : Error {
  using Error::Error;
};

// A size guard (operator dimension, state-space bound) was exceeded.
struct SizeError : Error {
  using Error::Error;
};

// A numerical precondition failed: non-Hermitian input, negative spectrum
// beyond tolerance, ill-conditioned inversion, broken commutation.
struct NumericError : Error {
  using Error::Error;
};

// Document-level failure: unreadable file, bad schema, unresolved ids.
struct ParseError : Error {
  using Error::Error;
};

// Copies of a variable's space. Base is the space H_i attached to the
// variable itself; Hat and Prime are the per-edge copies introduced by a
// holographic transformation.
enum class Tier : int { Base = 0, Hat = 1, Prime = 2 };

// A labeled tensor factor. Base labels identify a variable node; Hat and
// Prime labels identify an edge (variable, factor).
struct SpaceLabel {
  std::string node;
  std::string factor;  // empty for Base tier
  Tier tier = Tier::Base;
  int dim = 1;

  static SpaceLabel base(std::string node, int dim);
  static SpaceLabel hat(std::string node, std::string factor, int dim);
  static SpaceLabel prime(std::string node, std::string factor, int dim);

  std::tuple<const std::string&, const std::string&, int> key() const {
    return {node, factor, static_cast<int>(tier)};
  }
  std::string str() const;

  friend bool operator==(const SpaceLabel& a, const SpaceLabel& b) {
    return a.node == b.node && a.factor == b.factor && a.tier == b.tier &&
           a.dim == b.dim;
  }
  friend bool operator!=(const SpaceLabel& a, const SpaceLabel& b) {
    return !(a == b);
  }
};

// Canonical label order: (node, factor, tier), tier rank Base < Hat < Prime.
// The dimension does not participate; two labels with equal keys but
// different dims are a shape error wherever they meet.
inline bool label_less(const SpaceLabel& a, const SpaceLabel& b) {
  return a.key() < b.key();
}
inline bool label_same_space(const SpaceLabel& a, const SpaceLabel& b) {
  return a.key() == b.key();
}

// Every tolerance used by the library, with the defaults the verdicts are
// defined against. CLI flags may override a subset.
struct Tolerances {
  double psd = 1e-9;              // relative negative-eigenvalue floor
  double rank_factor = 1e-12;     // support cutoff = dim * rank_factor * lmax
  double identity = 1e-10;        // relative Frobenius identity checks
  double hermitian = 1e-8;        // relative Frobenius Hermiticity check
  double commute = 1e-9;          // commutation residual bound
  double inverse = 1e-9;          // per-edge inverse-condition bound
  double biorthogonality = 1e-10; // classical Eq-pair max-entry bound
  double imag = 1e-10;            // relative imaginary-part bound on Z
  double discrepancy_quantum = 1e-8;
  double discrepancy_classical = 1e-9;
  double invert_condition = 1e8;  // max condition number for map inversion
};

}  // namespace holofg

#endif
