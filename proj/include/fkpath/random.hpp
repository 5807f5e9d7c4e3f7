#ifndef FKPATH_RANDOM_HPP
#define FKPATH_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace fkpath {

/**
 * Seeded randomness source identified by (seed, stream).
 *
 * The engine is std::mt19937_64 initialised through std::seed_seq from the
 * four 32-bit halves of seed and stream, so every (seed, stream) pair gives a
 * bit-identical sequence and different streams are decorrelated by the
 * seed_seq mixing. Uniform and normal variates are produced here rather than
 * by the <random> distributions, whose output is implementation-defined.
 *
 * One RandomSource is owned by one replication; parallel work splits by
 * stream id, never by sharing an instance.
 */
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal (Box-Muller, second variate cached).
  double normal();

  /// Index drawn from the distribution whose cumulative sums are given;
  /// `cumulative.back()` is the total mass and need not be 1.
  std::size_t categorical(std::span<const double> cumulative);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fkpath

#endif  // FKPATH_RANDOM_HPP
