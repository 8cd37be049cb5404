#pragma once

#include <stdexcept>
#include <string>

namespace evershell {

// Base class for all domain errors. `code()` is the stable identifier the
// CLI maps to exit status 2; the message carries run-specific detail.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define EVERSHELL_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

// shell_model
EVERSHELL_DEFINE_ERROR(InvalidGeometry);
EVERSHELL_DEFINE_ERROR(ResolutionTooCoarse);
EVERSHELL_DEFINE_ERROR(AlreadyEverted);
EVERSHELL_DEFINE_ERROR(DegenerateElement);
EVERSHELL_DEFINE_ERROR(DimensionMismatch);

// equilibria
EVERSHELL_DEFINE_ERROR(NonConvergence);
EVERSHELL_DEFINE_ERROR(LineSearchFailure);
EVERSHELL_DEFINE_ERROR(InvalidGuess);
EVERSHELL_DEFINE_ERROR(NotConverged);
EVERSHELL_DEFINE_ERROR(ZeroBending);

// stability
EVERSHELL_DEFINE_ERROR(EigenSolverFailure);
EVERSHELL_DEFINE_ERROR(FitFailure);

// snap_dynamics
EVERSHELL_DEFINE_ERROR(NotBistable);
EVERSHELL_DEFINE_ERROR(ContactFailure);
EVERSHELL_DEFINE_ERROR(UndefinedCritical);
EVERSHELL_DEFINE_ERROR(IncompleteCollapse);
EVERSHELL_DEFINE_ERROR(Instability);

// granular
EVERSHELL_DEFINE_ERROR(BoxTooSmall);
EVERSHELL_DEFINE_ERROR(OverlapUnresolvable);
EVERSHELL_DEFINE_ERROR(QuasiStaticViolated);
EVERSHELL_DEFINE_ERROR(LedgerBreach);

// metrics
EVERSHELL_DEFINE_ERROR(NoDensification);
EVERSHELL_DEFINE_ERROR(WindowEmpty);
EVERSHELL_DEFINE_ERROR(OpenLoop);
EVERSHELL_DEFINE_ERROR(NonPositiveStored);

// cli / config
EVERSHELL_DEFINE_ERROR(ParseError);
EVERSHELL_DEFINE_ERROR(UnknownKey);
EVERSHELL_DEFINE_ERROR(UnitViolation);
EVERSHELL_DEFINE_ERROR(UsageError);

#undef EVERSHELL_DEFINE_ERROR

}  // namespace evershell
