#include "stqc/quantizer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stqc/errors.hpp"

namespace stqc {

namespace {

std::uint64_t index_space_size(long levels, long ny) {
  std::uint64_t size = 1;
  for (long i = 0; i < ny; ++i) {
    const auto n = static_cast<std::uint64_t>(levels);
    if (size > std::numeric_limits<std::uint64_t>::max() / n) {
      throw ValidationError("quantizer: N^n_y does not fit a 64-bit unsigned integer");
    }
    size *= n;
  }
  return size;
}

}  // namespace

QuantizerSpec make_quantizer_spec(long levels, long ny) {
  if (levels < 2) throw ValidationError("quantizer: N must be at least 2");
  if (ny < 1) throw DimensionError("quantizer: output dimension must be at least 1");
  (void)index_space_size(levels, ny);
  return QuantizerSpec{levels, ny};
}

std::uint64_t encode(const QuantizerSpec& spec, const QuantizationFrame& frame,
                     const Vector& y) {
  if (y.size() != spec.ny || frame.center.size() != spec.ny) {
    throw DimensionError("encode: dimension mismatch");
  }
  if (!(frame.range >= 0.0) || !frame.center.allFinite()) {
    throw ValidationError("encode: malformed frame");
  }
  const double e = frame.range;
  const auto n = static_cast<double>(spec.levels);

  std::uint64_t index = 1;
  std::uint64_t stride = 1;
  for (long i = 0; i < spec.ny; ++i) {
    const double d = y[i] - frame.center[i];
    if (std::abs(d) > e + kFrameSlack * e) {
      throw OutOfRangeError("encode: output lies outside the quantization hypercube (axis " +
                            std::to_string(i) + ", |d| = " + std::to_string(std::abs(d)) +
                            ", E = " + std::to_string(e) + ")");
    }
    long bin = 0;
    if (e > 0.0) {
      bin = static_cast<long>(std::floor((d + e) * n / (2.0 * e)));
      bin = std::max(0L, std::min(spec.levels - 1, bin));
    }
    index += static_cast<std::uint64_t>(bin) * stride;
    stride *= static_cast<std::uint64_t>(spec.levels);
  }
  return index;
}

Vector decode(const QuantizerSpec& spec, const QuantizationFrame& frame,
              std::uint64_t index) {
  if (frame.center.size() != spec.ny) throw DimensionError("decode: dimension mismatch");
  const std::uint64_t size = index_space_size(spec.levels, spec.ny);
  if (index < 1 || index > size) {
    throw BadIndexError("decode: index " + std::to_string(index) +
                        " outside [1, " + std::to_string(size) + "]");
  }
  const double e = frame.range;
  const auto n = static_cast<double>(spec.levels);
  Vector value = frame.center;
  std::uint64_t rest = index - 1;
  for (long i = 0; i < spec.ny; ++i) {
    const auto bin = static_cast<double>(rest % static_cast<std::uint64_t>(spec.levels));
    rest /= static_cast<std::uint64_t>(spec.levels);
    // centered form of c - E + (bin + 0.5)(2E/N): exact at the middle bin
    value[i] = frame.center[i] + (bin + 0.5 - 0.5 * n) * (2.0 * e / n);
  }
  return value;
}

}  // namespace stqc
