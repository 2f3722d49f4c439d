#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "wavelab/domain.hpp"
#include "wavelab/util.hpp"

namespace wavelab {

/// Between adjacent peakon crests a multipeakon profile is u(y) = A e^y + B e^{-y}
/// (on both domains; the periodic kernel is kappa*cosh(frac(x)-1/2)).  This
/// representation makes energies, variation, L1 norms and the source
/// convolution P exactly integrable, which the solver uses instead of
/// quadrature.  Quadrature versions survive only as test oracles.
class ExpPieces {
 public:
  explicit ExpPieces(const MultipeakonState& s) : periodic_(s.domain.is_periodic()) {
    const auto& pk = s.peakons;
    const std::size_t n = pk.size();
    if (periodic_) {
      if (n == 0) {
        edges_ = {0.0, 1.0};
        A_ = {0.0};
        B_ = {0.0};
        return;
      }
      const double kap = kernel::kappa_chi();
      edges_.resize(n + 1);
      A_.assign(n, 0.0);
      B_.assign(n, 0.0);
      for (std::size_t k = 0; k < n; ++k) edges_[k] = pk[k].q;
      edges_[n] = pk[0].q + 1.0;
      // interval k = [q_k, q_{k+1}]: peaks j<=k sit left of it, peaks j>k wrap once
      for (std::size_t k = 0; k < n; ++k) {
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j <= k) {  // y - q_j in [0,1): chi term = kap*cosh(y - q_j - 1/2)
            a += pk[j].p * std::exp(-pk[j].q - 0.5);
            b += pk[j].p * std::exp(pk[j].q + 0.5);
          } else {  // y - q_j in (-1,0): chi term = kap*cosh(y - q_j + 1/2)
            a += pk[j].p * std::exp(-pk[j].q + 0.5);
            b += pk[j].p * std::exp(pk[j].q - 0.5);
          }
        }
        A_[k] = 0.5 * kap * a;
        B_[k] = 0.5 * kap * b;
      }
    } else {
      edges_.resize(n);
      A_.assign(n + 1, 0.0);
      B_.assign(n + 1, 0.0);
      for (std::size_t k = 0; k < n; ++k) edges_[k] = pk[k].q;
      for (std::size_t k = 0; k <= n; ++k) {
        double a = 0.0, b = 0.0;
        for (std::size_t j = k; j < n; ++j) a += pk[j].p * std::exp(-pk[j].q);
        for (std::size_t j = 0; j < k; ++j) b += pk[j].p * std::exp(pk[j].q);
        A_[k] = a;
        B_[k] = b;
      }
    }
  }

  bool periodic() const { return periodic_; }

  /// integral of u^2 + u_x^2 over the whole domain (one period if periodic)
  double energy_density_integral() const {
    double total = 0.0;
    visit_all([&](double A, double B, double lo, double hi) {
      total += 2.0 * term(A * A, 2.0, lo, hi) + 2.0 * term(B * B, -2.0, lo, hi);
    });
    return total;
  }

  /// integral of (u^2 + u_x^2) e^{alpha |y|}, real line only
  double weighted_energy(double alpha) const {
    double total = 0.0;
    visit_all([&](double A, double B, double lo, double hi) {
      auto piece = [&](double sign_y, double a, double b) {
        total += 2.0 * term(A * A, 2.0 + sign_y * alpha, a, b) +
                 2.0 * term(B * B, -2.0 + sign_y * alpha, a, b);
      };
      if (hi <= 0.0) {
        piece(-1.0, lo, hi);
      } else if (lo >= 0.0) {
        piece(+1.0, lo, hi);
      } else {
        piece(-1.0, lo, 0.0);
        piece(+1.0, 0.0, hi);
      }
    });
    return total;
  }

  /// integral of u^2 + u_x^2 over [a,b] (real line; infinite bounds allowed)
  double energy_density_integral(double a, double b) const {
    double total = 0.0;
    visit_range(a, b, [&](double A, double B, double lo, double hi) {
      total += 2.0 * term(A * A, 2.0, lo, hi) + 2.0 * term(B * B, -2.0, lo, hi);
    });
    return total;
  }

  /// integral of u_x^2 over [a,b]
  double ux2_integral(double a, double b) const {
    double total = 0.0;
    visit_range(a, b, [&](double A, double B, double lo, double hi) {
      total += term(A * A, 2.0, lo, hi) + term(B * B, -2.0, lo, hi) -
               2.0 * A * B * term(1.0, 0.0, lo, hi);
    });
    return total;
  }

  /// total variation of u = \int |u_x| over the domain
  double ux_l1() const {
    double total = 0.0;
    visit_all([&](double A, double B, double lo, double hi) {
      total += abs_integral(A, B, lo, hi, /*derivative=*/true);
    });
    return total;
  }

  /// \int |u| over the domain
  double u_l1() const {
    double total = 0.0;
    visit_all([&](double A, double B, double lo, double hi) {
      total += abs_integral(A, B, lo, hi, /*derivative=*/false);
    });
    return total;
  }

  /// source convolution P(x) = 1/2 K * (u^2 + u_x^2/2) and its derivative
  std::pair<double, double> P_Px(double x) const {
    if (!periodic_) {
      // L = int_{y<x} e^{y-x} f,  R = int_{y>x} e^{x-y} f,  f = u^2 + u_x^2/2
      double L = 0.0, R = 0.0;
      visit_all([&](double A, double B, double lo, double hi) {
        const double a = std::max(lo, -inf());
        if (hi <= x) {
          L += f_weighted(A, B, +1.0, a, hi, -x);
        } else if (lo >= x) {
          R += f_weighted(A, B, -1.0, lo, hi, +x);
        } else {
          L += f_weighted(A, B, +1.0, a, x, -x);
          R += f_weighted(A, B, -1.0, x, hi, +x);
        }
      });
      return {0.5 * (L + R), 0.5 * (R - L)};
    }
    // periodic: P(x) = (kappa/4)[ e^{x-1/2} R~ + e^{1/2-x} L~ ] over (x-1, x]
    const double kap = kernel::kappa_chi();
    const double x0 = edges_.front();
    const double xl = x0 + wrap_unit(x - x0);  // lift of x into [x0, x0+1)
    double Lt = 0.0, Rt = 0.0;                 // \int e^{y} f and \int e^{-y} f over (xl-1, xl]
    visit_all([&](double A, double B, double lo, double hi) {
      auto add = [&](double Ai, double Bi, double a, double b) {
        Lt += f_weighted(Ai, Bi, +1.0, a, b, 0.0);
        Rt += f_weighted(Ai, Bi, -1.0, a, b, 0.0);
      };
      if (hi <= xl) {
        add(A, B, lo, hi);
      } else if (lo >= xl) {  // shift down by one period: u(y) there = (Ae) e^{y} + (B/e) e^{-y}
        add(A * kernel::euler_e, B / kernel::euler_e, lo - 1.0, hi - 1.0);
      } else {
        add(A, B, lo, xl);
        add(A * kernel::euler_e, B / kernel::euler_e, xl - 1.0, hi - 1.0);
      }
    });
    const double P = 0.25 * kap * (std::exp(xl - 0.5) * Rt + std::exp(0.5 - xl) * Lt);
    const double Px = 0.25 * kap * (std::exp(xl - 0.5) * Rt - std::exp(0.5 - xl) * Lt);
    return {P, Px};
  }

 private:
  static double inf() { return std::numeric_limits<double>::infinity(); }

  // coef * \int_a^b e^{c y} dy, skipping zero coefficients so that infinite
  // bounds never produce 0 * inf
  static double term(double coef, double c, double a, double b) {
    if (coef == 0.0 || a == b) return 0.0;
    return coef * int_exp(c, a, b);
  }

  static double int_exp(double c, double a, double b) {
    if (c == 0.0) return b - a;
    if (std::isinf(a)) return std::exp(c * b) / c;  // requires c > 0
    if (std::isinf(b)) return -std::exp(c * a) / c; // requires c < 0
    return std::exp(c * a) * std::expm1(c * (b - a)) / c;
  }

  // \int e^{s(y + shift)} f(y) dy with f = 1.5 A^2 e^{2y} + 1.5 B^2 e^{-2y} + AB
  double f_weighted(double A, double B, double s, double a, double b, double shift) const {
    if (a == b) return 0.0;
    const double w = std::exp(s * shift);
    double r = 0.0;
    r += term(1.5 * A * A * w, s + 2.0, a, b);
    r += term(1.5 * B * B * w, s - 2.0, a, b);
    r += term(A * B * w, s, a, b);
    return r;
  }

  // exact \int |A e^y + B e^{-y}| or |A e^y - B e^{-y}| over [lo, hi]
  double abs_integral(double A, double B, double lo, double hi, bool derivative) const {
    const double a = A;
    const double b = derivative ? -B : B;
    auto segment = [&](double l, double h) {
      // integral of a e^y + b e^{-y}, sign constant on the segment
      double v = term(a, 1.0, l, h) + term(b, -1.0, l, h);
      return std::abs(v);
    };
    // root of a e^y + b e^{-y}: e^{2y} = -b/a
    if (a != 0.0 && b != 0.0 && -b / a > 0.0) {
      const double y0 = 0.5 * std::log(-b / a);
      if (y0 > lo && y0 < hi) return segment(lo, y0) + segment(y0, hi);
    }
    return segment(lo, hi);
  }

  void visit_all(const std::function<void(double, double, double, double)>& cb) const {
    if (periodic_) {
      for (std::size_t k = 0; k + 1 < edges_.size(); ++k) cb(A_[k], B_[k], edges_[k], edges_[k + 1]);
      return;
    }
    if (edges_.empty()) return;  // u == 0
    cb(A_.front(), 0.0, -inf(), edges_.front());
    for (std::size_t k = 0; k + 1 < edges_.size(); ++k)
      cb(A_[k + 1], B_[k + 1], edges_[k], edges_[k + 1]);
    cb(0.0, B_.back(), edges_.back(), inf());
  }

  // real line only: visit pieces intersected with [a,b]
  void visit_range(double a, double b,
                   const std::function<void(double, double, double, double)>& cb) const {
    visit_all([&](double A, double B, double lo, double hi) {
      const double l = std::max(lo, a), h = std::min(hi, b);
      if (l < h) cb(A, B, l, h);
    });
  }

  bool periodic_;
  std::vector<double> edges_;
  std::vector<double> A_, B_;
};

}  // namespace wavelab
