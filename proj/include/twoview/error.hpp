#ifndef TWOVIEW_ERROR_HPP_
#define TWOVIEW_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace twoview {

enum class Errc {
  InvalidInput,
  AmbiguousNullSpace,
  DegeneratePolynomial,
  DegenerateConfiguration,
  DegenerateSample,
  EpipoleDegenerate,
  NoBaseline,
  BehindCamera,
  InsufficientData,
  EstimationFailed,
  NonOverlappingGeometry,
  InfeasibleScene,
  ContractViolation,
  ParseError,
  IoError,
};

/// Exception carrying a machine-checkable error code next to the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace twoview

#endif  // TWOVIEW_ERROR_HPP_
