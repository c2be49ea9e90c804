#pragma once

#include <stdexcept>
#include <string>

namespace masep {

/// Malformed or out-of-range input (bad labels, unsorted positions, p outside (0,1), ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A rational amplitude was evaluated too close to one of its poles.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, int beta, int alpha)
      : std::runtime_error(what), beta_(beta), alpha_(alpha) {}

  int beta() const { return beta_; }
  int alpha() const { return alpha_; }

 private:
  int beta_;
  int alpha_;
};

/// Node refinement ran out before two successive quadratures agreed.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double previous, double last, int nodes)
      : std::runtime_error(what), previous_(previous), last_(last), nodes_(nodes) {}

  double previous() const { return previous_; }
  double last() const { return last_; }
  int nodes() const { return nodes_; }

 private:
  double previous_;
  double last_;
  int nodes_;
};

/// A numerically computed quantity violated a property it must satisfy
/// (real-valuedness, probability range, window mass).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace masep
