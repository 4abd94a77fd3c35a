#pragma once

#include <cstdint>

#include "stqc/linalg.hpp"

namespace stqc {

/// encode() tolerates frame violations up to this slack, relative to the
/// range; anything beyond signals a broken range sequence upstream.
inline constexpr double kFrameSlack = 1e-9;

/// Uniform box quantizer with N levels per output axis. Indices are
/// 1-based: the wire payload lives in {1, ..., N^n_y}.
struct QuantizerSpec {
  long levels = 2;  // N >= 2
  long ny = 1;
};

/// Validates N >= 2 and that N^n_y fits a 64-bit unsigned integer.
QuantizerSpec make_quantizer_spec(long levels, long ny);

/// Hypercube { y : ||y - center||_inf <= range }. range = 0 is legal and
/// degenerates to the single point `center`.
struct QuantizationFrame {
  Vector center;
  double range = 0.0;
};

/// Per axis, bin j = floor((y_i - c_i + E) N / (2E)) clamped to [0, N-1];
/// boundary ties resolve to the lower clamped bin. Composite index is
/// 1 + sum_i j_i N^i. Throws OutOfRangeError when y leaves the hypercube
/// beyond the numeric slack.
std::uint64_t encode(const QuantizerSpec& spec, const QuantizationFrame& frame,
                     const Vector& y);

/// Bin midpoint c_i - E + (j_i + 0.5)(2E/N) per axis, digits extracted by
/// base-N decomposition of index - 1. Throws BadIndexError outside
/// [1, N^n_y].
Vector decode(const QuantizerSpec& spec, const QuantizationFrame& frame,
              std::uint64_t index);

}  // namespace stqc
