#pragma once

#include <stdexcept>
#include <string>

namespace circlelab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A small divisor 1 - E[exp(2i pi q alpha)] fell below the resonance floor.
class ResonanceError : public Error {
 public:
  ResonanceError(int mode, double divisor);
  int mode() const { return mode_; }
  double divisor() const { return divisor_; }

 private:
  int mode_;
  double divisor_;
};

/// Energy left above the band limit after re-projecting grid samples.
class SpectralUnderresolution : public Error {
 public:
  explicit SpectralUnderresolution(double residual);
  double residual() const { return residual_; }

 private:
  double residual_;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// A map that should be an orientation-preserving diffeomorphism is not.
class NotADiffeomorphism : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace circlelab
