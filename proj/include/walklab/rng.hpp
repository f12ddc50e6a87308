#pragma once

// Counter-based pseudo-random generation. Every draw is a pure function of
// (seed, stream, counter), so parallel replicas are reproducible without any
// coordination and a run can be replayed bit-exactly from its seed manifest.
//
// The output function is the SplitMix64 / SplittableRandom finalizer:
//
//   out(n) = mix64(key + n * 2^64/phi),  key = mix of (seed, stream).
//
// Distinct streams get statistically unrelated keys through the same
// avalanche mix. The generator passes the usual empirical batteries and is
// cheap enough for 1e10-step walk simulations on a single core.

#include <cmath>
#include <cstdint>

namespace walklab {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

class RngState {
 public:
  RngState() : RngState(0, 0) {}
  explicit RngState(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed + kGoldenGamma) ^ mix64(mix64(stream) + 0x6A09E667F3BCC909ull)),
        seed_(seed),
        stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept { return mix64(key_ + ++counter_ * kGoldenGamma); }

  // Bulk generation. Key and counter live in locals so the stores cannot be
  // taken to alias the generator state; the loop vectorizes.
  void fill_u64(std::uint64_t* out, std::size_t n) noexcept {
    const std::uint64_t key = key_;
    const std::uint64_t base = counter_;
    for (std::size_t i = 0; i < n; ++i)
      out[i] = mix64(key + (base + i + 1) * kGoldenGamma);
    counter_ = base + n;
  }

  // Uniform on [0,1), 53 random bits.
  double u01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform on (0,1]; safe under log().
  double u01_inc() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }
  // Uniform on the open interval (0,1).
  double u01_open() noexcept {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  double exponential() noexcept { return exponential_with(next_u64()); }  // Exp(1)
  // Ziggurat draw whose first word is supplied by the caller (bits 8..10 of
  // that word are unused here and stay available, e.g. for a sign).
  double exponential_with(std::uint64_t bits) noexcept;

  double normal() noexcept {  // N(0,1), Box-Muller with one cached value
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(u01_inc()));
    const double t = 6.283185307179586476925286766559 * u01();
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t seed_;
  std::uint64_t stream_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

namespace detail {

// Ziggurat tables for the standard exponential: a base region (rectangle
// [0,r] x [0,f(r)] plus the tail beyond r) and 255 horizontal strips, all of
// area kV. Strip i in {0..254} spans x in [0, x[i]], y in [f[i], f[i+1]],
// with the curve crossing it between x[i+1] and x[i].
struct ZigguratExp {
  static constexpr int kStrips = 255;
  static constexpr double kR = 7.69711747013104972;
  static constexpr double kV = 3.9496598225815571993e-3;

  double x[kStrips + 1];  // x[0] = r, strictly decreasing; x[255] ~ 1e-4
  double f[kStrips + 1];  // f[i] = exp(-x[i]), increasing towards 1
  double w[kStrips + 1];  // layer L: mantissa -> candidate abscissa
  std::uint64_t k[kStrips + 1];  // layer L: fast-accept threshold

  ZigguratExp() {
    x[0] = kR;
    f[0] = std::exp(-kR);
    for (int i = 1; i <= kStrips; ++i) {
      f[i] = f[i - 1] + kV / x[i - 1];
      if (f[i] > 1.0) f[i] = 1.0;
      x[i] = -std::log(f[i]);
      if (x[i] < 0.0) x[i] = 0.0;
    }
    // Layer 0 is the base region; its candidate span v/f(r) exceeds r.
    w[0] = (kV / f[0]) * 0x1.0p-53;
    k[0] = static_cast<std::uint64_t>((kR * f[0] / kV) * 0x1.0p53);
    // Layer L in {1..255} is strip i = L-1.
    for (int L = 1; L <= kStrips; ++L) {
      w[L] = x[L - 1] * 0x1.0p-53;
      k[L] = static_cast<std::uint64_t>((x[L] / x[L - 1]) * 0x1.0p53);
    }
  }
};

inline const ZigguratExp& ziggurat_exp() {
  static const ZigguratExp table;
  return table;
}

}  // namespace detail

inline double RngState::exponential_with(std::uint64_t bits) noexcept {
  const detail::ZigguratExp& z = detail::ziggurat_exp();
  for (;;) {
    const unsigned layer = static_cast<unsigned>(bits & 0xFF);
    const std::uint64_t mant = bits >> 11;
    if (mant < z.k[layer]) return static_cast<double>(mant) * z.w[layer];
    if (layer == 0) {
      // Tail beyond r: memorylessness gives an exact shifted exponential.
      return detail::ZigguratExp::kR - std::log(u01_inc());
    }
    const int i = static_cast<int>(layer) - 1;
    const double xx = static_cast<double>(mant) * z.w[layer];
    if (z.f[i] + u01() * (z.f[i + 1] - z.f[i]) < std::exp(-xx)) return xx;
    bits = next_u64();
  }
}

}  // namespace walklab
