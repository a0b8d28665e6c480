#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace accretive {

/// Scalar or planar boundary solve failed to converge.
class RootNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal failure in the polynomial lifting of a resonant rate.
class DegenerateRate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfRange : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The supplied pair does not violate the Lipschitz bound it was meant to violate.
class NotAViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A map that was required to be 1-Lipschitz expanded a sampled pair.
class NotNonexpansive : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A resolvent trajectory pair moved apart.
class ContractionViolated : public std::runtime_error {
 public:
  ContractionViolated(std::size_t step, double before, double after)
      : std::runtime_error("distance increased at step " + std::to_string(step) + ": " +
                           std::to_string(before) + " -> " + std::to_string(after)),
        step_(step),
        before_(before),
        after_(after) {}

  std::size_t step() const { return step_; }
  double before() const { return before_; }
  double after() const { return after_; }

 private:
  std::size_t step_;
  double before_;
  double after_;
};

/// A resolvent call failed inside a time-stepping loop.
class StepFailed : public std::runtime_error {
 public:
  StepFailed(std::size_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Malformed JSON input.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace accretive
