#include "plkit/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace plkit::rng {

double Source::uniform() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t Source::bounded(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("bounded(0)");
  // Reject the partial top interval so every residue is equally likely.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % n;
  }
}

double Source::normal(double mean, double sigma) {
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += uniform();
  return mean + sigma * (s - 6.0);
}

int Source::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    p *= uniform();
    ++k;
  } while (p > limit);
  return k - 1;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> salts) {
  std::uint64_t x = splitmix64(seed);
  for (const std::uint64_t s : salts) x = splitmix64(x ^ splitmix64(s));
  return x;
}

}  // namespace plkit::rng
