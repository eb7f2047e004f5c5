#pragma once

#include <cmath>
#include <cstdint>

namespace spotvol {

/// Philox4x32-10 counter-based generator (Salmon et al. constants).
///
/// A stream is keyed by (seed, stream_id), so every Monte Carlo path owns an
/// independent generator that can be reproduced regardless of the order in
/// which paths are executed.
class Philox4x32 {
 public:
  Philox4x32(std::uint64_t seed, std::uint64_t stream_id)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream_id)),
        ctr3_(static_cast<std::uint32_t>(stream_id >> 32)) {}

  /// Next 128-bit block as four 32-bit words.
  void next_block(std::uint32_t out[4]) {
    std::uint32_t c0 = static_cast<std::uint32_t>(block_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
    std::uint32_t c2 = ctr2_;
    std::uint32_t c3 = ctr3_;
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
    ++block_;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint64_t block_ = 0;  // position within the stream
  std::uint32_t key0_, key1_;
  std::uint32_t ctr2_, ctr3_;
};

/// Standard normal draws on top of Philox, via Box-Muller.
///
/// The mapping from (seed, stream_id, draw index) to output is fixed by
/// construction; no global state, no platform-defined distributions.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream_id)
      : gen_(seed, stream_id) {}

  /// Uniform draw in (0, 1].
  double uniform_pos() {
    return (static_cast<double>(next_u53()) + 1.0) * 0x1.0p-53;
  }

  /// Uniform draw in [0, 1).
  double uniform() { return static_cast<double>(next_u53()) * 0x1.0p-53; }

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * kPi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t next_u53() {
    if (word_pos_ == 0) {
      gen_.next_block(words_);
      word_pos_ = 2;
    }
    const int base = (word_pos_ == 2) ? 0 : 2;
    --word_pos_;
    const std::uint64_t w =
        (static_cast<std::uint64_t>(words_[base]) << 32) | words_[base + 1];
    return w >> 11;
  }

  Philox4x32 gen_;
  std::uint32_t words_[4] = {};
  int word_pos_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace spotvol
