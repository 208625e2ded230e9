#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace semilinear {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimensionError : public Error {
 public:
  using Error::Error;
};

class OutOfDomainError : public Error {
 public:
  using Error::Error;
};

class UnderResolvedScaleError : public Error {
 public:
  UnderResolvedScaleError(double radius, double spacing);
  double radius() const { return radius_; }
  double spacing() const { return spacing_; }

 private:
  double radius_;
  double spacing_;
};

/// Inner linear solve failed to reach its tolerance within the refinement cap.
class SolverStallError : public Error {
 public:
  SolverStallError(const std::string& what, double final_residual)
      : Error(what), final_residual_(final_residual) {}
  double final_residual() const { return final_residual_; }

 private:
  double final_residual_;
};

/// Outer (Picard / active-set) iteration exceeded its cap. Carries the trace of
/// successive sup-differences and per-iteration sign flips.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> trace, std::vector<int> flips)
      : Error(what), trace_(std::move(trace)), flips_(std::move(flips)) {}
  const std::vector<double>& trace() const { return trace_; }
  const std::vector<int>& sign_flips() const { return flips_; }

 private:
  std::vector<double> trace_;
  std::vector<int> flips_;
};

class InvalidModulusError : public Error {
 public:
  using Error::Error;
};

class UnknownNameError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace semilinear
