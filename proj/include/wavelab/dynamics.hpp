#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wavelab/domain.hpp"
#include "wavelab/peakon_core.hpp"
#include "wavelab/singular_chart.hpp"
#include "wavelab/util.hpp"

namespace wavelab {

// ---- integrator configuration ------------------------------------------------

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double collision_gap = 1e-3;  // position gap that arms the chart switch
  double strength_cap = 1e3;    // |p| beyond this also arms it
  double max_step = 0.1;
  ContinuationMode mode = ContinuationMode::Conservative;

  void validate() const {
    if (!(rel_tol > 0 && abs_tol > 0 && collision_gap > 0 && strength_cap > 0 && max_step > 0))
      throw ConfigInvalid("integrator tolerances must be strictly positive");
  }
};

// ---- regular-chart vector field ------------------------------------------------

struct PeakonDeriv {
  std::vector<double> dq, dp;
};

/// Hamiltonian right-hand side; requires pairwise distinct positions.
inline PeakonDeriv rhs_regular(const MultipeakonState& s) {
  const Kernel k(s.domain);
  const auto& pk = s.peakons;
  const std::size_t n = pk.size();
  PeakonDeriv d;
  d.dq.assign(n, 0.0);
  d.dp.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double dq = 0.0, dp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = pk[i].q - pk[j].q;
      if (i != j && diff == 0.0) throw CoincidentPositions();
      dq += pk[j].p * k.K(diff);
      if (i != j) dp += pk[j].p * k.Kp(diff);
    }
    d.dq[i] = dq;
    d.dp[i] = -pk[i].p * dp;
  }
  return d;
}

// ---- collision detection -------------------------------------------------------

/// Adjacent opposite-sign pair with closing gap below collision_gap (or a
/// strength blow-up past strength_cap).  Clusters of three or more positions
/// within the gap are anomalous: only binary interactions can occur.
inline std::optional<std::pair<int, int>> detect_collision(const MultipeakonState& s,
                                                           const IntegratorConfig& cfg,
                                                           double direction = 1.0) {
  const auto& pk = s.peakons;
  const int n = static_cast<int>(pk.size());
  if (n < 2) return std::nullopt;
  const bool per = s.domain.is_periodic();

  auto gap_of = [&](int i) {  // gap between i and its cyclic successor
    const int j = (i + 1) % n;
    double g = pk[j].q - pk[i].q;
    if (per && j <= i) g += 1.0;
    return g;
  };
  const int pairs = per ? n : n - 1;

  // triple-cluster check: two consecutive small gaps
  for (int i = 0; i + 1 < pairs + (per ? 1 : 0) && n >= 3; ++i) {
    const int i2 = (i + 1) % n;
    if (gap_of(i) < cfg.collision_gap && gap_of(i2) < cfg.collision_gap)
      throw TripleCollisionAnomaly();
  }

  std::optional<PeakonDeriv> deriv;
  auto closing = [&](int i) {
    if (!deriv) deriv = rhs_regular(s);
    const int j = (i + 1) % n;
    return direction * (deriv->dq[j] - deriv->dq[i]) < 0.0;
  };

  int best = -1;
  double best_gap = cfg.collision_gap;
  for (int i = 0; i < pairs; ++i) {
    const int j = (i + 1) % n;
    if (pk[i].p * pk[j].p >= 0.0) continue;  // same-sign pairs never collide
    const double g = gap_of(i);
    if (g < best_gap && closing(i)) {
      best = i;
      best_gap = g;
    }
  }
  if (best >= 0) return std::make_pair(best, (best + 1) % n);

  // strength blow-up: find the adjacent opposite-sign pair holding the peak
  double pmax = 0.0;
  int imax = -1;
  for (int i = 0; i < n; ++i)
    if (std::abs(pk[i].p) > pmax) pmax = std::abs(pk[i].p), imax = i;
  if (pmax > cfg.strength_cap) {
    double bg = std::numeric_limits<double>::infinity();
    int bi = -1;
    for (int i : {imax - 1, imax}) {
      if (i < 0 || i >= pairs) continue;
      const int j = (i + 1) % n;
      if (pk[i].p * pk[j].p < 0.0 && gap_of(i) < bg && closing(i)) bg = gap_of(i), bi = i;
    }
    if (bi >= 0) return std::make_pair(bi, (bi + 1) % n);
  }
  return std::nullopt;
}

// ---- Dormand-Prince 5(4) --------------------------------------------------------

namespace dp54 {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace dp54

/// Adaptive embedded RK5(4) on a generic vector field.  The field is called
/// as rhs(t, y, dy).  Step-size control is the usual PI-free 0.9 err^{-1/5}.
template <typename RHS>
class AdaptiveRk54 {
 public:
  AdaptiveRk54(RHS rhs, double rel_tol, double abs_tol, double max_step)
      : rhs_(std::move(rhs)), rtol_(rel_tol), atol_(abs_tol), hmax_(max_step) {}

  void init(double t, std::vector<double> y, double h_guess) {
    t_ = t;
    y_ = std::move(y);
    const std::size_t n = y_.size();
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &yerr_}) k->assign(n, 0.0);
    rhs_(t_, y_, k1_);
    h_ = std::clamp(h_guess, 1e-12, hmax_);
  }

  double t() const { return t_; }
  const std::vector<double>& y() const { return y_; }

  /// One accepted step, never stepping past t_limit (t_limit >= t).
  void advance(double t_limit) {
    using namespace dp54;
    const std::size_t n = y_.size();
    int rejects = 0;
    for (;;) {
      double h = std::min({h_, hmax_, t_limit - t_});
      if (!(h > 0.0)) throw StepSizeUnderflow("advance past limit");
      const bool clipped = (h < h_);
      for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * a21 * k1_[i];
      rhs_(t_ + c2 * h, ytmp_, k2_);
      for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
      rhs_(t_ + c3 * h, ytmp_, k3_);
      for (std::size_t i = 0; i < n; ++i)
        ytmp_[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
      rhs_(t_ + c4 * h, ytmp_, k4_);
      for (std::size_t i = 0; i < n; ++i)
        ytmp_[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
      rhs_(t_ + c5 * h, ytmp_, k5_);
      for (std::size_t i = 0; i < n; ++i)
        ytmp_[i] =
            y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
      rhs_(t_ + h, ytmp_, k6_);
      for (std::size_t i = 0; i < n; ++i)
        ytmp_[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
      rhs_(t_ + h, ytmp_, k7_);

      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                              e6 * k6_[i] + e7 * k7_[i]);
        const double sc = atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(ytmp_[i]));
        err += sqr(e / sc);
      }
      err = n ? std::sqrt(err / static_cast<double>(n)) : 0.0;

      if (err <= 1.0) {
        t_ += h;
        y_.swap(ytmp_);
        k1_.swap(k7_);  // FSAL
        const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        const double hn = h * std::clamp(fac, 0.2, 5.0);
        if (!clipped || hn > h_) h_ = hn;
        return;
      }
      h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      if (h_ < 1e-14 * std::max(1.0, std::abs(t_)) || ++rejects > 60)
        throw StepSizeUnderflow("step controller stalled");
    }
  }

 private:
  RHS rhs_;
  double rtol_, atol_, hmax_;
  double t_ = 0.0, h_ = 1e-3;
  std::vector<double> y_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, yerr_;
};

// ---- trajectories ---------------------------------------------------------------

struct CollisionEvent {
  double t = 0.0;       // tau
  double q_bar = 0.0;   // interaction point
  double e_tau = 0.0;   // concentrated energy
  std::string mode;     // "conservative" | "dissipative"
};

struct Trajectory {
  MultipeakonState initial;
  IntegratorConfig config;
  double t_end = 0.0;
  std::vector<std::pair<double, MultipeakonState>> samples;
  std::vector<CollisionEvent> events;
  std::vector<std::pair<double, double>> energy_drift;  // (t, |E - E0|/max(1,|E0|))
  double lost_energy = 0.0;                             // dissipative mode diagnostic

  double max_drift() const {
    double m = 0.0;
    for (const auto& [t, d] : energy_drift) m = std::max(m, d);
    return m;
  }
  const MultipeakonState& state_at(double t, double tol = 1e-9) const {
    for (const auto& [ts, s] : samples)
      if (std::abs(ts - t) <= tol) return s;
    throw Error("no sample at requested time");
  }
};

// ---- simulate -------------------------------------------------------------------

namespace sim_detail {

inline std::vector<double> pack_regular(const MultipeakonState& s) {
  std::vector<double> y;
  y.reserve(2 * s.peakons.size());
  for (const auto& pk : s.peakons) y.push_back(pk.q);
  for (const auto& pk : s.peakons) y.push_back(pk.p);
  return y;
}

inline MultipeakonState unpack_regular(const MultipeakonState& proto, const std::vector<double>& y,
                                       double t) {
  const std::size_t n = y.size() / 2;
  std::vector<Peakon> pk(n);
  for (std::size_t i = 0; i < n; ++i) pk[i] = {y[n + i], y[i]};
  MultipeakonState s;
  s.domain = proto.domain;
  s.time = t;
  s.peakons = std::move(pk);
  // keep raw ordering; positions may drift across each other only via events
  std::stable_sort(s.peakons.begin(), s.peakons.end(),
                   [](const Peakon& a, const Peakon& b) { return a.q < b.q; });
  return s;
}

inline std::vector<double> pack_chart(const SingularChart& ch) {
  std::vector<double> y = {ch.z, ch.w, ch.eta, ch.zeta};
  for (const auto& b : ch.background) y.push_back(b.p);
  for (const auto& b : ch.background) y.push_back(b.q);
  return y;
}

inline SingularChart unpack_chart(const SingularChart& proto, const std::vector<double>& y,
                                  double t) {
  SingularChart ch = proto;
  ch.z = y[0];
  ch.w = y[1];
  ch.eta = y[2];
  ch.zeta = std::max(0.0, y[3]);
  const std::size_t m = (y.size() - 4) / 2;
  for (std::size_t j = 0; j < m; ++j) {
    ch.background[j].p = y[4 + j];
    ch.background[j].q = y[4 + m + j];
  }
  ch.time = t;
  return ch;
}

}  // namespace sim_detail

/// Integrate a multipeakon state to t_end (forward or backward), switching to
/// the singular chart through peakon collisions.  Samples are emitted exactly
/// at the requested times; collision events are logged with (tau, q_bar, e_tau).
inline Trajectory simulate(const MultipeakonState& initial, double t_end,
                           const IntegratorConfig& cfg, std::vector<double> sample_times = {}) {
  cfg.validate();
  Trajectory traj;
  traj.initial = initial;
  traj.config = cfg;
  traj.t_end = t_end;

  const double t0 = initial.time;
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  std::sort(sample_times.begin(), sample_times.end());
  if (dir < 0) std::reverse(sample_times.begin(), sample_times.end());
  std::size_t next_sample = 0;
  // skip sample times outside [t0, t_end]
  auto in_range = [&](double ts) { return dir * (ts - t0) >= -1e-14 && dir * (t_end - ts) >= -1e-14; };
  while (next_sample < sample_times.size() && !in_range(sample_times[next_sample])) ++next_sample;

  const double E0 = energy(initial);
  const double drift_scale = std::max(1.0, std::abs(E0));

  MultipeakonState state = initial;
  auto emit_if_due = [&](double t, const std::function<MultipeakonState()>& make) {
    while (next_sample < sample_times.size() &&
           std::abs(sample_times[next_sample] - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
      traj.samples.emplace_back(sample_times[next_sample], make());
      ++next_sample;
    }
  };

  emit_if_due(t0, [&] { return state; });
  if (t0 == t_end) return traj;

  // sigma = dir * t so the stepper always advances increasing sigma
  enum class Mode { Regular, Chart };
  Mode mode = state.size() >= 2 ? Mode::Regular : Mode::Regular;
  double t = t0;

  // --- regular-field functor (operates on the raw packing order)
  auto reg_rhs = [&](double /*sigma*/, const std::vector<double>& y, std::vector<double>& dy) {
    const std::size_t n = y.size() / 2;
    std::vector<Peakon> pk(n);
    for (std::size_t i = 0; i < n; ++i) pk[i] = {y[n + i], y[i]};
    MultipeakonState raw;
    raw.domain = state.domain;
    raw.peakons = std::move(pk);
    PeakonDeriv d = rhs_regular(raw);
    dy.resize(y.size());
    for (std::size_t i = 0; i < n; ++i) dy[i] = dir * d.dq[i];
    for (std::size_t i = 0; i < n; ++i) dy[n + i] = dir * d.dp[i];
  };

  SingularChart chart;
  auto chart_rhs = [&](double /*sigma*/, const std::vector<double>& y, std::vector<double>& dy) {
    SingularChart ch = sim_detail::unpack_chart(chart, y, 0.0);
    ChartDeriv d = rhs_singular(ch);
    dy.resize(y.size());
    dy[0] = dir * d.dz;
    dy[1] = dir * d.dw;
    dy[2] = dir * d.deta;
    dy[3] = dir * d.dzeta;
    const std::size_t m = ch.background.size();
    for (std::size_t j = 0; j < m; ++j) {
      dy[4 + j] = dir * d.dp_bg[j];
      dy[4 + m + j] = dir * d.dq_bg[j];
    }
  };

  using RegStepper = AdaptiveRk54<decltype(reg_rhs)>;
  using ChartStepper = AdaptiveRk54<decltype(chart_rhs)>;

  RegStepper reg(reg_rhs, cfg.rel_tol, cfg.abs_tol, cfg.max_step);
  ChartStepper chs(chart_rhs, cfg.rel_tol, cfg.abs_tol, cfg.max_step);

  const double span = std::abs(t_end - t0);
  double h0 = std::min(cfg.max_step, span / 64.0 + 1e-12);
  reg.init(dir * t0, sim_detail::pack_regular(state), h0);

  auto next_stop_sigma = [&]() {
    double stop = dir * t_end;
    if (next_sample < sample_times.size()) stop = std::min(stop, dir * sample_times[next_sample]);
    return stop;
  };

  int guard = 0;
  const int guard_max = 2'000'000;
  while (dir * t < dir * t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
    if (++guard > guard_max) throw Error("simulate: step budget exhausted");
    if (mode == Mode::Regular) {
      reg.advance(next_stop_sigma());
      t = dir * reg.t();
      state = sim_detail::unpack_regular(state, reg.y(), t);
      traj.energy_drift.emplace_back(t, std::abs(energy(state) - E0) / drift_scale);
      emit_if_due(t, [&] { return state; });

      auto hit = detect_collision(state, cfg, dir);
      if (hit) {
        const auto& pk = state.peakons;
        const double d = pk[hit->second].p - pk[hit->first].p;
        if (std::abs(d) >= 2.0) {
          chart = enter_chart(state, *hit);
          chart.time = t;
          chs.init(dir * t, sim_detail::pack_chart(chart), 1e-4);
          mode = Mode::Chart;
        }
        // else: strengths not yet developed; keep integrating the regular field
      }
      continue;
    }

    // ---- chart mode
    const double w_prev = chs.y()[1];
    std::vector<double> y_prev = chs.y();
    const double sig_prev = chs.t();
    chs.advance(next_stop_sigma());
    t = dir * chs.t();
    chart = sim_detail::unpack_chart(chart, chs.y(), t);
    traj.energy_drift.emplace_back(t, std::abs(chart_energy(chart) - E0) / drift_scale);

    const double w_now = chart.w;
    const bool crossed_now = (w_prev - pi) * (w_now - pi) < 0.0;
    if (crossed_now) {
      // locate the crossing by bisection on re-integrated sub-steps
      double lo = sig_prev, hi = chs.t();
      std::vector<double> ylo = y_prev;
      auto integrate_to = [&](double sig_target, const std::vector<double>& from,
                              double sig_from) {
        ChartStepper local(chart_rhs, std::min(cfg.rel_tol, 1e-11), cfg.abs_tol * 1e-2,
                           cfg.max_step);
        local.init(sig_from, from, std::max(1e-12, (sig_target - sig_from) * 0.5));
        while (local.t() < sig_target - 1e-15 * std::max(1.0, std::abs(sig_target)))
          local.advance(sig_target);
        return local.y();
      };
      for (int it = 0; it < 80 && (hi - lo) > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        auto ymid = integrate_to(mid, ylo, lo);
        if ((ymid[1] - pi) * (w_prev - pi) > 0.0) {
          lo = mid;
          ylo = ymid;
        } else {
          hi = mid;
        }
      }
      SingularChart at_cross = sim_detail::unpack_chart(chart, ylo, dir * lo);
      CollisionEvent ev;
      ev.t = dir * lo;
      ev.q_bar = 0.5 * at_cross.eta;
      if (chart.domain.is_periodic()) ev.q_bar = wrap_unit(ev.q_bar);
      ev.e_tau = at_cross.zeta;
      ev.mode = cfg.mode == ContinuationMode::Conservative ? "conservative" : "dissipative";
      traj.events.push_back(ev);
      chart.collision_time = ev.t;
      chart.collision_position = ev.q_bar;
      chart.concentrated_energy = ev.e_tau;

      if (cfg.mode == ContinuationMode::Dissipative) {
        at_cross.w = pi;  // exit precondition: at the instant
        at_cross.time = ev.t;
        MultipeakonState merged = exit_chart(at_cross, ContinuationMode::Dissipative);
        traj.lost_energy += ev.e_tau;
        state = merged;
        t = ev.t;
        state.time = t;
        traj.energy_drift.emplace_back(t, std::abs(energy(state) - (E0 - traj.lost_energy)) / drift_scale);
        emit_if_due(t, [&] { return state; });
        reg.init(dir * t, sim_detail::pack_regular(state), 1e-4);
        mode = Mode::Regular;
        continue;
      }
    }

    emit_if_due(t, [&] {
      MultipeakonState s = reconstruct_state(chart);
      s.time = t;
      return s;
    });

    // conservative exit once safely past the crossing
    const bool past = dir * (pi - chart.w) > 0.0 || (dir < 0 && (chart.w - pi) > 0.0);
    const bool far_enough = std::abs(chart.w - pi) >= chart_exit_angle;
    bool background_near = false;
    if (!chart.background.empty() && std::abs(chart.w - pi) > 0.05) {
      const double s_gap = chart.gap();
      for (const auto& b : chart.background) {
        double r = b.q - 0.5 * chart.eta;
        if (chart.domain.is_periodic()) r = wrap_half(r);
        if (std::abs(r) < 0.5 * s_gap + 2.0 * cfg.collision_gap) background_near = true;
      }
    }
    if (!std::isnan(chart.collision_time) && past && (far_enough || background_near)) {
      state = reconstruct_state(chart);
      state.time = t;
      reg.init(dir * t, sim_detail::pack_regular(state), 1e-4);
      mode = Mode::Regular;
    } else if (std::isnan(chart.collision_time) && std::abs(chart.w - pi) >= 0.49 * pi) {
      // entered but moving away from the collision: fall back to the regular chart
      state = reconstruct_state(chart);
      state.time = t;
      reg.init(dir * t, sim_detail::pack_regular(state), 1e-4);
      mode = Mode::Regular;
    }
  }

  // emit any samples that coincide with t_end within tolerance
  if (mode == Mode::Chart) {
    state = reconstruct_state(chart);
    state.time = t;
  }
  while (next_sample < sample_times.size() &&
         std::abs(sample_times[next_sample] - t_end) <= 1e-9 * std::max(1.0, std::abs(t_end))) {
    traj.samples.emplace_back(sample_times[next_sample], state);
    ++next_sample;
  }
  return traj;
}

}  // namespace wavelab
