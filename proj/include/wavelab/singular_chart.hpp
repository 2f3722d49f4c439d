#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "wavelab/domain.hpp"
#include "wavelab/peakon_core.hpp"
#include "wavelab/util.hpp"

namespace wavelab {

inline constexpr double pi = 3.14159265358979323846;

/// Collision-resolving coordinates for one interacting peakon pair:
///   z = p1 + p2, w = 2 arctan(p2 - p1), eta = q1 + q2,
///   zeta = (p2 - p1)^2 (q2 - q1),
/// with labels chosen so q1 <= q2.  w lives on (0, 2pi) and crosses pi exactly
/// at the collision instant, where the strengths diverge but (z,w,eta,zeta)
/// stay smooth.  Peakons not involved ride along unchanged in (p,q) form.
struct SingularChart {
  double z = 0.0;
  double w = pi;
  double eta = 0.0;
  double zeta = 0.0;
  std::vector<Peakon> background;
  Domain domain = Domain::real_line();
  double time = 0.0;

  // filled when the crossing w = pi is located
  double collision_position = std::numeric_limits<double>::quiet_NaN();
  double collision_time = std::numeric_limits<double>::quiet_NaN();
  double concentrated_energy = std::numeric_limits<double>::quiet_NaN();

  double cot_half() const { return 1.0 / std::tan(0.5 * w); }
  double gap() const {  // s = q2 - q1 = zeta cot^2(w/2)
    const double c = cot_half();
    return zeta * c * c;
  }
};

struct ChartDeriv {
  double dz = 0.0, dw = 0.0, deta = 0.0, dzeta = 0.0;
  std::vector<double> dp_bg, dq_bg;
};

namespace chart_detail {

/// d * sinh(s/2) = sinh(zeta c^2 / 2) / c, smooth through c = 0
inline double h_fun(double zeta, double c) {
  const double s = zeta * c * c;
  if (s < 1e-4) return 0.5 * zeta * c * (1.0 + s * s / 24.0);
  return std::sinh(0.5 * s) / c;
}

/// g(s)/c^3 with g(s) = K0 - K(s) + s K'(s); factored series keeps it smooth
/// and cancellation-free as c -> 0
inline double g_over_c3(const Kernel& k, double zeta, double c) {
  const double s = zeta * c * c;
  if (s < 1e-4) {
    const double k0 = k.K0();
    return zeta * zeta * c *
           (0.5 * k0 + s * (-1.0 / 3.0 + s * (k0 / 8.0 - s / 30.0)));
  }
  return k.g_removable(s) / (c * c * c);
}

/// T(s) = cosh(s/2) - sinh(s/2)/s, limit 1/2
inline double t_fun(double s) {
  if (s < 1e-4) return 0.5 + 5.0 * s * s / 48.0;
  return std::cosh(0.5 * s) - std::sinh(0.5 * s) / s;
}

}  // namespace chart_detail

/// Right-hand side of the chart ODEs, the removable singularities at w = pi
/// filled by their limits.  Re-derived by substituting the change of variables
/// into the Hamiltonian system; every potentially singular product is written
/// through the helpers above.
inline ChartDeriv rhs_singular(const SingularChart& ch) {
  if (!(std::abs(ch.w - pi) < 0.5 * pi)) throw ChartDomainExceeded();
  if (ch.zeta < 0.0) throw ChartDomainExceeded("negative zeta");
  const Kernel k(ch.domain);
  const double c = ch.cot_half();          // cot(w/2), 0 at the collision
  const double s = ch.zeta * c * c;        // gap q2 - q1 >= 0
  if (ch.domain.is_periodic() && s >= 1.0) throw ChartDomainExceeded("gap exceeds period");
  const double half_w = 0.5 * ch.w;
  const double cos2 = sqr(std::cos(half_w));
  const double sin2 = sqr(std::sin(half_w));
  const double sinw = std::sin(ch.w);
  const double z = ch.z, zeta = ch.zeta;
  const double Ks = k.K_right(s), Kps = k.Kp_right(s), K0 = k.K0();
  const double ch2 = std::cosh(0.5 * s), sh2 = std::sinh(0.5 * s);
  const double hf = chart_detail::h_fun(zeta, c);

  const double mid = 0.5 * ch.eta;
  double SK = 0.0, SKp = 0.0;
  for (const auto& b : ch.background) {
    double r = b.q - mid;
    if (ch.domain.is_periodic()) r = wrap_half(r);
    if (std::abs(r) <= 0.5 * s) throw ChartDomainExceeded("background peakon inside the pair");
    SK += b.p * k.K(r);
    SKp += b.p * k.Kp(r);
  }

  ChartDeriv d;
  d.dz = z * ch2 * SKp - hf * SK;
  d.dw = -Kps * (z * z * cos2 - sin2) - 2.0 * z * cos2 * sh2 * SK + sinw * ch2 * SKp;
  d.deta = z * (K0 + Ks) + 2.0 * ch2 * SK;
  d.dzeta = -zeta * c * z * z * Kps + chart_detail::g_over_c3(k, zeta, c) -
            2.0 * zeta * c * z * sh2 * SK + 2.0 * zeta * chart_detail::t_fun(s) * SKp;

  const std::size_t m = ch.background.size();
  d.dp_bg.assign(m, 0.0);
  d.dq_bg.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double r = ch.background[j].q - mid;
    if (ch.domain.is_periodic()) r = wrap_half(r);
    const double Kr = k.K(r), Kpr = k.Kp(r);
    double dq = z * ch2 * Kr - hf * Kpr;
    double fac = z * ch2 * Kpr - hf * Kr;  // pair part of sum_i p_i K'(q_j - q_i)
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      const double diff = ch.background[j].q - ch.background[l].q;
      dq += ch.background[l].p * k.K(diff);
      fac += ch.background[l].p * k.Kp(diff);
    }
    dq += ch.background[j].p * K0;
    d.dq_bg[j] = dq;
    d.dp_bg[j] = -ch.background[j].p * fac;
  }
  return d;
}

/// Energy in chart coordinates, free of the strength cancellation that ruins
/// the (p,q)-form close to the collision.
inline double chart_energy(const SingularChart& ch) {
  const Kernel k(ch.domain);
  const double c = ch.cot_half();
  const double s = ch.zeta * c * c;
  const double Ks = k.K_right(s), K0 = k.K0();
  double e = ch.z * ch.z * (K0 + Ks) + ch.zeta * k.v_diff(s);
  const double mid = 0.5 * ch.eta;
  const double ch2 = std::cosh(0.5 * s);
  const double hf = chart_detail::h_fun(ch.zeta, c);
  for (const auto& b : ch.background) {
    double r = b.q - mid;
    if (ch.domain.is_periodic()) r = wrap_half(r);
    e += 4.0 * b.p * (ch.z * ch2 * k.K(r) - hf * k.Kp(r));
  }
  for (std::size_t j = 0; j < ch.background.size(); ++j)
    for (std::size_t l = 0; l < ch.background.size(); ++l)
      e += 2.0 * ch.background[j].p * ch.background[l].p *
           k.K(ch.background[j].q - ch.background[l].q);
  return e;
}

/// Map a regular state into the chart around the adjacent pair (i, i+1).
/// For periodic states the pair may wrap; positions are lifted locally.
inline SingularChart enter_chart(const MultipeakonState& s, std::pair<int, int> pair_idx) {
  const int i = pair_idx.first;
  const int n = static_cast<int>(s.peakons.size());
  if (n < 2 || i < 0 || i >= n) throw Error("enter_chart: bad pair index");
  SingularChart ch;
  ch.domain = s.domain;
  ch.time = s.time;
  double q1 = s.peakons[i].q, p1 = s.peakons[i].p;
  int i2 = pair_idx.second;
  if (i2 != (i + 1) % n) throw Error("enter_chart: pair must be adjacent");
  double q2 = s.peakons[i2].q, p2 = s.peakons[i2].p;
  if (s.domain.is_periodic() && i2 < i) q2 += 1.0;  // wrap pair
  if (q2 < q1) throw Error("enter_chart: pair not ordered");
  const double d = p2 - p1;
  ch.z = p1 + p2;
  ch.w = 2.0 * std::atan(d) + (d < 0.0 ? 2.0 * pi : 0.0);
  ch.eta = q1 + q2;
  ch.zeta = d * d * (q2 - q1);
  for (int j = 0; j < n; ++j) {
    if (j == i || j == i2) continue;
    ch.background.push_back(s.peakons[j]);
  }
  return ch;
}

/// Invert the chart into a regular state.  Valid whenever w != pi.
inline MultipeakonState reconstruct_state(const SingularChart& ch) {
  if (ch.w == pi) throw ChartDomainExceeded("cannot reconstruct at the collision instant");
  const double d = std::tan(0.5 * ch.w);
  const double c = ch.cot_half();
  const double s = ch.zeta * c * c;
  std::vector<Peakon> pk = ch.background;
  pk.push_back({0.5 * (ch.z - d), 0.5 * (ch.eta - s)});
  pk.push_back({0.5 * (ch.z + d), 0.5 * (ch.eta + s)});
  return MultipeakonState(ch.domain, std::move(pk), ch.time);
}

enum class ContinuationMode { Conservative, Dissipative };

/// Chart exit thresholds: conservative exit once |w - pi| >= pi/4 on the
/// outgoing side; dissipative exit happens at the crossing itself.
inline constexpr double chart_exit_angle = 0.25 * pi;

/// Leave the chart.  Conservative: reconstruct the outgoing pair.
/// Dissipative: replace the pair by a single peakon of strength z at the
/// collision point (pruned when negligible); the concentrated energy is
/// reported by the caller as lost, never stored as a state atom.
inline MultipeakonState exit_chart(const SingularChart& ch, ContinuationMode mode) {
  if (mode == ContinuationMode::Conservative) {
    if (!(std::abs(ch.w - pi) >= chart_exit_angle * 0.999999)) throw ChartDomainExceeded("conservative exit before |w - pi| >= pi/4");
    return reconstruct_state(ch);
  }
  if (!(std::abs(ch.w - pi) < 1e-6)) throw ChartDomainExceeded("dissipative exit away from the collision instant");
  std::vector<Peakon> pk = ch.background;
  const double scale = std::max(1.0, std::abs(ch.z));
  double pbar = ch.z;
  if (std::abs(pbar) > 1e-12 * scale) pk.push_back({pbar, 0.5 * ch.eta});
  return MultipeakonState(ch.domain, std::move(pk), ch.time);
}

}  // namespace wavelab
