#ifndef HOLOFG_REPORT_HPP
#define HOLOFG_REPORT_HPP

#include <complex>
#include <string>
#include <vector>

namespace holofg {

enum class Verdict { Pass, Fail, Exploratory };

const char* verdict_name(Verdict v);

// The outcome of a Holant verification run, classical or quantum. Classical
// runs leave the commutation and probe fields empty.
struct HolantReport {
  std::complex<double> z_original;
  std::complex<double> z_transformed;
  double discrepancy = 0.0;  // |Z - Z^| / max(1, |Z|)

  struct EdgeResidual {
    std::string variable;
    std::string factor;
    std::string mode;  // "strong" | "diagonal" | "classical"
    double residual = 0.0;
    bool ok = true;
  };
  std::vector<EdgeResidual> edge_residuals;

  struct NodeResidual {
    std::string node;
    double residual = 0.0;
    bool identity_exempt = false;  // all incident transforms identity-relabel
    bool ok = true;
  };
  std::vector<NodeResidual> node_commutation;

  struct PairResidual {
    std::string first;
    std::string second;
    double residual = 0.0;
  };
  std::vector<PairResidual> factor_commutation;

  // Max |Z^_perm - Z^| / max(1, |Z^|) over re-evaluations of the transformed
  // side under permuted factor orders. Zero when no permutation was sampled.
  double order_probe = 0.0;

  Verdict verdict = Verdict::Pass;
  std::vector<std::string> failures;  // human-readable, names offenders
};

}  // namespace holofg

#endif
