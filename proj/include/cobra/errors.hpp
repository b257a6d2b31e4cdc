#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cobra {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Spring/damper parameters with h*kp + kd == 0.
class DegenerateParameters : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(double residual, int iterations)
      : Error("constraint solver did not converge: residual " +
              std::to_string(residual) + " after " +
              std::to_string(iterations) + " iterations"),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

class NanDetected : public Error {
 public:
  explicit NanDetected(std::size_t body)
      : Error("non-finite state on body " + std::to_string(body)),
        body_(body) {}

  std::size_t body() const noexcept { return body_; }

 private:
  std::size_t body_;
};

/// An episode aborted by a physics error; carries the simulated time.
class EpisodeError : public Error {
 public:
  EpisodeError(double t, const std::string& what)
      : Error("episode failed at t=" + std::to_string(t) + " s: " + what),
        time_(t) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class FitFailure : public Error {
 public:
  using Error::Error;
};

class ZeroHeading : public Error {
 public:
  using Error::Error;
};

}  // namespace cobra
