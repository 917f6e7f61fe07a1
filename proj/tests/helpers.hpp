#pragma once

#include <complex>
#include <random>

#include "jbt/specfun.hpp"

namespace testing {

using jbt::cplx;

inline double rel_err(cplx got, cplx want) { return std::abs(got - want) / std::max(1e-300, std::abs(want)); }

// Fixed seed so failures reproduce.
inline std::mt19937_64& rng() {
  static std::mt19937_64 r(7919);
  return r;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

}  // namespace testing
