#include "circlelab/errors.hpp"

#include <cstdio>

namespace circlelab {

namespace {
std::string format_resonance(int mode, double divisor) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "resonant mode q = %d: |1 - E[exp(2i pi q alpha)]| = %.3e", mode,
                divisor);
  return buf;
}
}  // namespace

ResonanceError::ResonanceError(int mode, double divisor)
    : Error(format_resonance(mode, divisor)), mode_(mode), divisor_(divisor) {}

SpectralUnderresolution::SpectralUnderresolution(double residual)
    : Error("spectral under-resolution: residual above band limit = " + std::to_string(residual)),
      residual_(residual) {}

ConfigError::ConfigError(std::string key, const std::string& what)
    : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

}  // namespace circlelab
