#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace svi {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Per-path random stream. Every stochastic routine takes one explicitly.
using Rng = std::mt19937_64;

/// Raised when a set or oracle lacks a capability an operation needs.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative solve hit its iteration cap before reaching tolerance.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, double last_residual, long iterations)
      : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  long iterations_;
};

/// A stochastic step produced a non-finite value; the path cannot continue.
class PoisonedState : public std::runtime_error {
 public:
  PoisonedState(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

inline void require_dimension(const Vector& x, Index expected, const char* context) {
  if (x.size() != expected) {
    throw std::invalid_argument(std::string(context) + ": dimension mismatch (got " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(expected) + ")");
  }
}

/// Neumaier-compensated scalar accumulator.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace svi
