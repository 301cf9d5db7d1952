#pragma once

#include <cstdint>

namespace secagg {

/// Symmetric r-bit quantizer over [-c*B, c*B]. c is the aggregation-group
/// size: widening the range by c gives sums of up to c per-client values
/// (each clipped to [-B, B]) headroom inside the signed r-bit space.
struct QuantConfig {
  uint32_t bit_width = 8;   // 8 or 16
  double clip_bound = 0.5;  // B
  uint32_t summands = 1;    // c

  /// Largest level magnitude: 2^(r-1) - 1.
  int64_t levels() const;
  /// Per-summand magnitude budget floor(levels / c); sums of up to c values
  /// within the budget can never wrap mod 2^r.
  int64_t budget() const;
  /// Real-value width of one level: c * B / levels.
  double step() const;

  void validate() const;
};

double clip(double v, double bound);

/// sgn(v) * round(|v| * levels / (c*B)), rounding half away from zero, with
/// per-client inputs (|v| <= B) capped at budget() so any sum of <= c such
/// values stays inside [-levels, levels]. Inputs up to c*B are accepted
/// (re-quantizing a dequantized sum) and map onto the full level range.
int64_t quantize(const QuantConfig& cfg, double v);

/// sgn(u) * |u| * c * B / levels.
double dequantize(const QuantConfig& cfg, int64_t u);

/// Centered lift of a mod-2^bits value: a > 2^(bits-1) - 1 means a - 2^bits.
int64_t recover_sign(uint64_t a, uint8_t bits);

/// Two's-complement style reduction of a signed value into [0, 2^bits).
uint64_t wrap_signed(int64_t v, uint8_t bits);

/// floor(v * L) for fixed-point scaling of real updates.
int64_t scale_to_int(double v, int64_t scale);
double descale(double v, int64_t scale);

}  // namespace secagg
