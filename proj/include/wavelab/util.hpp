#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavelab {

// ---- error types -----------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define WAVELAB_ERROR(NAME)                    \
  struct NAME : Error {                        \
    explicit NAME(const std::string& m = #NAME) : Error(m) {} \
  }

WAVELAB_ERROR(CoincidentPositions);
WAVELAB_ERROR(TripleCollisionAnomaly);
WAVELAB_ERROR(ChartDomainExceeded);
WAVELAB_ERROR(StepSizeUnderflow);
WAVELAB_ERROR(PlanInvalid);
WAVELAB_ERROR(DomainMismatch);
WAVELAB_ERROR(CollisionInWindow);
WAVELAB_ERROR(NotInClass);
WAVELAB_ERROR(Diverged);
WAVELAB_ERROR(CFLViolation);
WAVELAB_ERROR(WeightInvalid);
WAVELAB_ERROR(FrameMismatch);
WAVELAB_ERROR(PastBlowup);
WAVELAB_ERROR(ConfigInvalid);

#undef WAVELAB_ERROR

// ---- numerics helpers -------------------------------------------------------

inline double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

inline double sqr(double x) { return x * x; }

/// Pairwise-tree summation: deterministic and accurate independent of the
/// traversal order an eventual parallel reduction would use.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v.data(), v.size()));
}

// ---- deterministic RNG ------------------------------------------------------

/// SplitMix64 core; stable across platforms and standard-library versions,
/// unlike std::uniform_real_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

// ---- printf-style double formatting (17 significant digits) -----------------

inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace wavelab
