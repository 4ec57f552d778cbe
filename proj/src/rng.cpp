#include "roversim/rng.hpp"

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace roversim {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::string_view label) {
  // FNV-1a over the label, mixed with the seed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return Rng(splitmix64(seed ^ splitmix64(h)));
}

double Rng::uniform01() { return boost::random::uniform_01<double>{}(engine_); }

double Rng::uniform(double lo, double hi) {
  if (hi <= lo) return lo;
  return boost::random::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double stddev) {
  if (stddev <= 0.0) return mean;
  return boost::random::normal_distribution<double>(mean, stddev)(engine_);
}

double Rng::beta(double a, double b) {
  return boost::random::beta_distribution<double>(a, b)(engine_);
}

bool Rng::bernoulli(double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return uniform01() < p;
}

std::uint64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  // Split large means; a sum of Poisson draws is Poisson.
  std::uint64_t total = 0;
  while (mean > 200.0) {
    total += boost::random::poisson_distribution<std::uint64_t, double>(200.0)(engine_);
    mean -= 200.0;
  }
  if (mean > 0.0) total += boost::random::poisson_distribution<std::uint64_t, double>(mean)(engine_);
  return total;
}

}  // namespace roversim
