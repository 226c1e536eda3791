#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace spde {

/// Counter-based random bit generator (Philox-4x32 with 10 rounds).
///
/// Streams are addressed, not seeked: the pair (seed, stream) selects an
/// independent substream, and the block counter walks through it.  Two
/// streams with distinct ids never share output, which is what makes
/// trajectory-parallel Monte Carlo reproducible independently of the
/// worker schedule.
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
      ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
             std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// Sequential view of one Philox substream, producing uniforms and standard
/// Gaussians (Box-Muller, pairwise, no rejection).  Consumption order is part
/// of the reproducibility contract: callers draw in a fixed order (for
/// trajectories: step-major, then mode-major).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        stream_lo_(std::uint32_t(stream)),
        stream_hi_(std::uint32_t(stream >> 32)) {}

  /// Uniform draw in (0, 1]; granularity 2^-32.
  double next_uniform() { return (double(next_word()) + 1.0) * 0x1p-32; }

  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint32_t next_word() {
    if (word_index_ == 4) {
      buffer_ = Philox4x32::block(
          {std::uint32_t(block_), std::uint32_t(block_ >> 32), stream_lo_,
           stream_hi_},
          key_);
      ++block_;
      word_index_ = 0;
    }
    return buffer_[word_index_++];
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int word_index_ = 4;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

inline constexpr const char* kRngName = "philox4x32-10";

}  // namespace spde
