#pragma once

#include <cstdint>
#include <string_view>

#include <boost/random/mersenne_twister.hpp>

namespace roversim {

// Seedable random stream. Distributions come from Boost.Random, whose
// algorithms are fixed in the library source, so a seed yields the same
// sequence on every platform (std:: distributions do not promise that).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream derived from a base seed and a label.
  static Rng derive(std::uint64_t seed, std::string_view label);

  double uniform01();
  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  double beta(double alpha, double beta);
  bool bernoulli(double p);
  std::uint64_t poisson(double mean);
  std::uint64_t next_u64() { return engine_(); }

private:
  boost::random::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace roversim
