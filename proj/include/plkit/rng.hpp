#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace plkit::rng {

// Deterministic random source. Everything is built on next_u64()/uniform()
// so scripted test doubles can reproduce any consumption pattern, and so
// the stream is identical across platforms (std::mt19937_64 is fully
// specified by the standard; the std distributions are not, which is why
// none are used here).
class Source {
 public:
  virtual ~Source() = default;

  virtual std::uint64_t next_u64() = 0;

  // Uniform draw in (0, 1]: ((next_u64() >> 11) + 1) * 2^-53. The open lower
  // end makes "u > max_score" a sure skip for zero-score groups and keeps
  // log(u) finite.
  virtual double uniform();

  // Unbiased draw in [0, n) by rejection.
  std::uint64_t bounded(std::uint64_t n);

  // Irwin-Hall 12-sum approximation: sum of 12 uniforms minus 6. No libm
  // transcendentals, so the stream's outputs are bit-stable across libcs.
  double normal(double mean, double sigma);

  // Knuth's multiplicative method; consumes a variable but seed-determined
  // number of draws. lambda <= 0 returns 0 without consuming the stream.
  int poisson(double lambda);
};

class Mt64 final : public Source {
 public:
  explicit Mt64(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

// Folds salts into a seed so per-image / per-trial / per-strategy streams
// are independent and insensitive to scheduling order.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> salts);

}  // namespace plkit::rng
