#pragma once

#include <stdexcept>
#include <string>

namespace tsncalc {

// Every failure raised by the library derives from Error. The kind drives the
// CLI exit status.
enum class ErrorKind {
  Parse,
  Validation,
  Configuration,
  Instability,
  Cycle,
  Horizon,
  Divergence,
  Argument,
  Dependency,
  Infeasible,
  Starvation,
  NotApplicable,
  Generation,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define TSNCALC_DEFINE_ERROR(Name, Kind)                \
  class Name : public Error {                           \
   public:                                              \
    explicit Name(const std::string& what)              \
        : Error(ErrorKind::Kind, what) {}               \
  };

TSNCALC_DEFINE_ERROR(ParseError, Parse)
TSNCALC_DEFINE_ERROR(ValidationError, Validation)
TSNCALC_DEFINE_ERROR(ConfigurationError, Configuration)
TSNCALC_DEFINE_ERROR(InstabilityError, Instability)
TSNCALC_DEFINE_ERROR(CycleError, Cycle)
TSNCALC_DEFINE_ERROR(HorizonError, Horizon)
TSNCALC_DEFINE_ERROR(DivergenceError, Divergence)
TSNCALC_DEFINE_ERROR(ArgumentError, Argument)
TSNCALC_DEFINE_ERROR(DependencyError, Dependency)
TSNCALC_DEFINE_ERROR(InfeasibleError, Infeasible)
TSNCALC_DEFINE_ERROR(StarvationError, Starvation)
TSNCALC_DEFINE_ERROR(NotApplicableError, NotApplicable)
TSNCALC_DEFINE_ERROR(GenerationError, Generation)

#undef TSNCALC_DEFINE_ERROR

}  // namespace tsncalc
