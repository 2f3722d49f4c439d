#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "wavelab/util.hpp"

namespace wavelab {

/// 8-point Gauss-Legendre on [a,b]
template <typename F>
double gauss8(F&& f, double a, double b) {
  static constexpr std::array<double, 4> x = {0.18343464249564980494,
                                              0.52553240991632898582,
                                              0.79666647741362673959,
                                              0.96028985649753623168};
  static constexpr std::array<double, 4> w = {0.36268378337836198297,
                                              0.31370664587788728734,
                                              0.22238103445337447054,
                                              0.10122853629037625915};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
  return s * h;
}

namespace detail {

// 15-point Kronrod / 7-point Gauss pair (QUADPACK constants)
inline constexpr std::array<double, 8> gk_x = {
    0.99145537112081263921, 0.94910791234275852453, 0.86486442335976907279,
    0.74153118559939443986, 0.58608723546769113029, 0.40584515137739716691,
    0.20778495500789846760, 0.0};
inline constexpr std::array<double, 8> gk_wk = {
    0.02293532201052922496, 0.06309209262997855329, 0.10479001032225018384,
    0.14065325971552591875, 0.16900472663926790283, 0.19035057806478540991,
    0.20443294007529889241, 0.20948214108472782801};
inline constexpr std::array<double, 4> gk_wg = {
    0.12948496616886969327, 0.27970539148927666790, 0.38183005050511894495,
    0.41795918367346938776};

template <typename F>
std::pair<double, double> gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = gk_wk[7] * fc;
  double g = gk_wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double v = f(c - h * gk_x[i]) + f(c + h * gk_x[i]);
    k += gk_wk[i] * v;
    if (i % 2 == 1) g += gk_wg[i / 2] * v;
  }
  return {k * h, std::abs((k - g) * h)};
}

template <typename F>
double adapt_gk(F&& f, double a, double b, double tol, int depth) {
  auto [v, err] = gk15(f, a, b);
  if (err <= tol || depth <= 0) return v;
  const double m = 0.5 * (a + b);
  return adapt_gk(f, a, m, 0.5 * tol, depth - 1) + adapt_gk(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// adaptive Gauss-Kronrod 15(7) with absolute tolerance
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10, int max_depth = 24) {
  if (a == b) return 0.0;
  return detail::adapt_gk(f, a, b, abs_tol, max_depth);
}

/// integrate with interior breakpoints (piecewise-smooth integrands)
template <typename F>
double integrate_segmented(F&& f, const std::vector<double>& breaks, double abs_tol = 1e-10) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i])
      total += integrate(f, breaks[i], breaks[i + 1],
                         abs_tol / static_cast<double>(breaks.size()));
  }
  return total;
}

}  // namespace wavelab
