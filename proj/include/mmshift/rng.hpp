#pragma once

#include <cstdint>

#include "mmshift/numerics.hpp"

namespace mmshift {

/// Identifies one reproducible random stream: (seed, stream) becomes the
/// Philox key, so disjoint streams never overlap.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Philox4x64-10 counter-based generator (Salmon et al., Random123).
/// Key = (seed, stream), 256-bit counter starting at zero. Output blocks
/// match the reference algorithm bit-for-bit, so any Random123-compatible
/// implementation keyed the same way reproduces the streams.
///
/// Derived variates: uniform doubles take the top 53 bits of one 64-bit
/// word; normals come from the trigonometric Box-Muller transform on two
/// uniforms (no rejection, so consumption per variate is fixed).
class Philox {
 public:
  explicit Philox(RngSeed s) : Philox(s.seed, s.stream) {}
  Philox(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open0();
  /// Standard normal.
  double normal();

  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

  /// Raw block generation, exposed for known-answer tests.
  static void block(const std::uint64_t counter[4], const std::uint64_t key[2],
                    std::uint64_t out[4]);

 private:
  void refill();

  std::uint64_t key_[2];
  std::uint64_t counter_[4];
  std::uint64_t buffer_[4];
  int buffer_pos_;
  double cached_normal_;
  bool has_cached_normal_;
};

}  // namespace mmshift
