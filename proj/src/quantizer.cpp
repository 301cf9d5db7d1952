#include "secagg/quantizer.hpp"

#include <cmath>

#include "secagg/errors.hpp"
#include "secagg/masking.hpp"

namespace secagg {

int64_t QuantConfig::levels() const { return (int64_t{1} << (bit_width - 1)) - 1; }

int64_t QuantConfig::budget() const { return levels() / summands; }

double QuantConfig::step() const {
  return static_cast<double>(summands) * clip_bound / static_cast<double>(levels());
}

void QuantConfig::validate() const {
  if (bit_width != 8 && bit_width != 16) throw ParamError("quantizer bit width must be 8 or 16");
  if (!(clip_bound > 0) || !std::isfinite(clip_bound)) throw ParamError("clip bound must be positive");
  if (summands < 1) throw ParamError("summand count must be at least 1");
  if (budget() < 1) throw ParamError("summand count exceeds the level range");
}

double clip(double v, double bound) {
  if (!(bound > 0)) throw ParamError("clip bound must be positive");
  if (std::isnan(v)) throw RangeError("cannot clip NaN");
  return v > bound ? bound : (v < -bound ? -bound : v);
}

int64_t quantize(const QuantConfig& cfg, double v) {
  cfg.validate();
  if (std::isnan(v)) throw RangeError("cannot quantize NaN");
  double range = static_cast<double>(cfg.summands) * cfg.clip_bound;
  double mag = std::fabs(v);
  if (mag > range) {
    // One-ulp overshoot happens when re-quantizing dequantized top levels.
    if (mag > range * (1.0 + 1e-9)) throw RangeError("value outside quantizer range");
    mag = range;
  }
  int64_t q = std::llround(mag * static_cast<double>(cfg.levels()) / range);
  if (mag <= cfg.clip_bound && q > cfg.budget()) q = cfg.budget();
  return v < 0 ? -q : q;
}

double dequantize(const QuantConfig& cfg, int64_t u) {
  cfg.validate();
  if (u < -cfg.levels() || u > cfg.levels()) throw RangeError("level outside quantizer range");
  return static_cast<double>(u) * cfg.step();
}

int64_t recover_sign(uint64_t a, uint8_t bits) {
  uint64_t mask = modulus_mask(bits);
  if (a > mask) throw RangeError("value exceeds message space");
  if (bits == 64) return static_cast<int64_t>(a);
  uint64_t half = mask >> 1;  // 2^(bits-1) - 1
  return a <= half ? static_cast<int64_t>(a)
                   : static_cast<int64_t>(a) - static_cast<int64_t>(mask + 1);
}

uint64_t wrap_signed(int64_t v, uint8_t bits) {
  return static_cast<uint64_t>(v) & modulus_mask(bits);
}

int64_t scale_to_int(double v, int64_t scale) {
  if (scale < 1) throw ParamError("scale factor must be positive");
  if (std::isnan(v)) throw RangeError("cannot scale NaN");
  double prod = v * static_cast<double>(scale);
  if (!std::isfinite(prod) || std::fabs(prod) >= 4.6e18) {
    throw RangeError("scaled value exceeds 64-bit range");
  }
  return static_cast<int64_t>(std::floor(prod));
}

double descale(double v, int64_t scale) {
  if (scale < 1) throw ParamError("scale factor must be positive");
  return v / static_cast<double>(scale);
}

}  // namespace secagg
