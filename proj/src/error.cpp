#include "tsncalc/error.hpp"

namespace tsncalc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::Cycle: return "cycle";
    case ErrorKind::Horizon: return "horizon";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Dependency: return "dependency";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Starvation: return "starvation";
    case ErrorKind::NotApplicable: return "not-applicable";
    case ErrorKind::Generation: return "generation";
  }
  return "unknown";
}

}  // namespace tsncalc
