#pragma once

#include <array>
#include <cstdint>

namespace matpred {

// Counter-based random stream (Philox4x32-10). The 128-bit Philox counter is
// split into a 64-bit block index and the 64-bit stream index, keyed by the
// master seed, so two streams with the same (master_seed, stream_index)
// replay identical sequences and streams with distinct indices never share a
// block for fewer than 2^64 blocks.
//
// A RandomStream is a plain value: copying it snapshots its position, which
// is how common-random-number evaluations replay the same draws.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed), stream_index_(stream_index) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  // Independent child stream. The child's key is a hash of this stream's
  // (master_seed, stream_index), so children of different parents differ.
  RandomStream split(std::uint64_t child_index) const;

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  // Gamma(shape, scale = 1), shape > 0.
  double gamma(double shape);
  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

 private:
  void refill();

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

}  // namespace matpred
