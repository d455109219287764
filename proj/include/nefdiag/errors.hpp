#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nefdiag {

enum class ErrorCode {
  InvalidParams,
  NonRoot,
  NRootDeficit,
  WeightCountMismatch,
  UnsupportedArity,
  NotAdmissible,
  DomainViolation,
  OutOfMeanDomain,
  Degenerate,
  NoDominantAtom,
  NotNormalized,
  InvalidForm,
  ParseError,
  NoConvergence,
};

std::string_view to_string(ErrorCode code);

// Every failure signalled by the library carries one of the codes above so
// that callers (the CLI in particular) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nefdiag
