#pragma once

// Temporal coding primitives: spike times, volleys and the binary-image
// encoders that turn pixels into volleys.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tnn/error.hpp"

namespace tnn {

/// A point in discrete time, or "no spike". The no-spike value is a separate
/// state rather than a large integer, so arithmetic on finite times can never
/// silently produce it.
class SpikeTime {
 public:
  /// Default-constructed spike time is "no spike".
  constexpr SpikeTime() noexcept = default;

  static constexpr SpikeTime inf() noexcept { return SpikeTime{}; }

  static SpikeTime at(std::int64_t t) {
    if (t < 0) throw InvalidArgument("spike time must be non-negative, got " + std::to_string(t));
    if (t > kMaxFinite) throw InvalidArgument("spike time out of range: " + std::to_string(t));
    SpikeTime s;
    s.t_ = static_cast<std::int32_t>(t);
    return s;
  }

  constexpr bool finite() const noexcept { return t_ != kNone; }
  constexpr bool is_inf() const noexcept { return t_ == kNone; }

  /// Precondition: finite().
  constexpr std::int32_t value() const noexcept { return t_; }

  friend constexpr bool operator==(SpikeTime a, SpikeTime b) noexcept { return a.t_ == b.t_; }

  // INF is greater than every finite time.
  friend constexpr std::strong_ordering operator<=>(SpikeTime a, SpikeTime b) noexcept {
    if (a.finite() && b.finite()) return a.t_ <=> b.t_;
    if (a.finite()) return std::strong_ordering::less;
    if (b.finite()) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, SpikeTime s) {
    if (s.finite()) return os << s.t_;
    return os << "inf";
  }

  static constexpr std::int32_t kMaxFinite = 1 << 30;

 private:
  static constexpr std::int32_t kNone = -1;
  std::int32_t t_ = kNone;
};

inline constexpr SpikeTime kInf = SpikeTime::inf();

/// One spike time per input line.
using Volley = std::vector<SpikeTime>;

/// Builds a volley from integers; any negative entry means "no spike".
inline Volley make_volley(std::initializer_list<std::int64_t> times) {
  Volley v;
  v.reserve(times.size());
  for (auto t : times) v.push_back(t < 0 ? kInf : SpikeTime::at(t));
  return v;
}

inline bool is_null(std::span<const SpikeTime> v) {
  return std::none_of(v.begin(), v.end(), [](SpikeTime s) { return s.finite(); });
}

inline std::size_t spike_count(std::span<const SpikeTime> v) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [](SpikeTime s) { return s.finite(); }));
}

/// Earliest spike of the volley, INF for the null volley.
inline SpikeTime min_time(std::span<const SpikeTime> v) {
  SpikeTime best = kInf;
  for (auto s : v) best = std::min(best, s);
  return best;
}

/// Latest finite spike, INF for the null volley.
inline SpikeTime max_finite_time(std::span<const SpikeTime> v) {
  SpikeTime best = kInf;
  for (auto s : v) {
    if (s.finite() && (best.is_inf() || s > best)) best = s;
  }
  return best;
}

/// Flattens all temporal information: every spike moves to t = 0.
inline Volley binarize(std::span<const SpikeTime> v) {
  Volley out(v.size());
  std::transform(v.begin(), v.end(), out.begin(),
                 [](SpikeTime s) { return s.finite() ? SpikeTime::at(0) : kInf; });
  return out;
}

inline std::string to_string(std::span<const SpikeTime> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += v[i].finite() ? std::to_string(v[i].value()) : std::string("inf");
  }
  return s + "]";
}

/// Row-major 0/1 image.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  BinaryImage() = default;
  BinaryImage(int w, int h, std::vector<std::uint8_t> px) : width(w), height(h), pixels(std::move(px)) {
    validate();
  }
  BinaryImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {
    validate();
  }

  std::size_t size() const noexcept { return pixels.size(); }
  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }

  void validate() const {
    if (width < 0 || height < 0) throw InvalidArgument("negative image dimension");
    if (pixels.size() != static_cast<std::size_t>(width) * height)
      throw DimensionMismatch("image has " + std::to_string(pixels.size()) + " pixels, expected " +
                              std::to_string(width * height));
    for (auto p : pixels)
      if (p > 1) throw InvalidArgument("binary image pixel must be 0 or 1");
  }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;
};

/// PosNeg encoding: lines [0, n) carry the image, lines [n, 2n) its complement.
/// Exactly n of the 2n lines spike, all at t = 0.
inline Volley posneg_encode(const BinaryImage& img) {
  const std::size_t n = img.size();
  Volley v(2 * n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    if (img.pixels[i])
      v[i] = SpikeTime::at(0);
    else
      v[n + i] = SpikeTime::at(0);
  }
  return v;
}

/// Positive half of a PosNeg volley viewed as an image (inverse of posneg_encode).
inline BinaryImage posneg_decode(std::span<const SpikeTime> v, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (v.size() != 2 * n) throw DimensionMismatch("posneg volley length does not match image size");
  BinaryImage img(width, height);
  for (std::size_t i = 0; i < n; ++i) img.pixels[i] = v[i].finite() ? 1 : 0;
  return img;
}

}  // namespace tnn
