#include "holofg/report.hpp"

namespace holofg {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "PASS";
    case Verdict::Fail:
      return "FAIL";
    default:
      return "EXPLORATORY";
  }
}

}  // namespace holofg
