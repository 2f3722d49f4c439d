#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wavelab/util.hpp"

#include "json.hpp"

namespace wavelab {

// ---- domains ----------------------------------------------------------------

enum class DomainKind { RealLine, Periodic };

/// Spatial domain: the real line with an exponential-decay weight exponent
/// alpha in (0,1), or the unit-period circle.
struct Domain {
  DomainKind kind = DomainKind::RealLine;
  double alpha = 0.5;  // decay class exponent, RealLine only

  static Domain real_line(double a = 0.5) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigInvalid("real_line alpha must be in (0,1)");
    return Domain{DomainKind::RealLine, a};
  }
  static Domain periodic() { return Domain{DomainKind::Periodic, 0.0}; }

  bool is_periodic() const { return kind == DomainKind::Periodic; }
  bool operator==(const Domain& o) const {
    return kind == o.kind && (kind == DomainKind::Periodic || alpha == o.alpha);
  }
};

/// reduce x to [0,1)
inline double wrap_unit(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;  // guards x = -eps rounding to 1.0
  return y;
}

/// reduce x to [-1/2, 1/2)
inline double wrap_half(double x) { return wrap_unit(x + 0.5) - 0.5; }

// ---- interaction kernels ----------------------------------------------------
//
// Both domains share the structure u(x) = sum_j p_j K(x - q_j) with an even
// kernel K whose one-sided derivative at 0+ equals -1 and which solves
// K'' = K away from its peaks:
//   real line:  K(x) = exp(-|x|)
//   periodic:   K(x) = chi(x) = (e^x + e^{1-x})/(e-1) on [0,1], 1-periodic
//
// chi can be written kappa*cosh(frac(x) - 1/2) with kappa = 2 sqrt(e)/(e-1).

namespace kernel {

inline constexpr double euler_e = 2.7182818284590452354;
inline constexpr double sqrt_e = 1.6487212707001281468;

inline constexpr double kappa_chi() { return 2.0 * sqrt_e / (euler_e - 1.0); }

inline double chi(double x) {
  return kappa_chi() * std::cosh(wrap_unit(x) - 0.5);
}
inline double chi_prime(double x) {  // derivative on (0,1), extended periodically
  return kappa_chi() * std::sinh(wrap_unit(x) - 0.5);
}
inline constexpr double chi0() { return (euler_e + 1.0) / (euler_e - 1.0); }

}  // namespace kernel

/// Kernel view bound to a domain.
struct Kernel {
  bool periodic;

  explicit Kernel(const Domain& d) : periodic(d.is_periodic()) {}

  double K(double x) const { return periodic ? kernel::chi(x) : std::exp(-std::abs(x)); }
  /// odd derivative; value 0 at x = 0 (symmetric convention)
  double Kp(double x) const {
    if (x == 0.0) return 0.0;
    return periodic ? kernel::chi_prime(x) : -sgn(x) * std::exp(-std::abs(x));
  }
  double K0() const { return periodic ? kernel::chi0() : 1.0; }

  /// one-sided branch for s >= 0, with Kp_right(0) = -1 (the limit from s>0)
  double K_right(double s) const { return periodic ? kernel::kappa_chi() * std::cosh(s - 0.5) : std::exp(-s); }
  double Kp_right(double s) const { return periodic ? kernel::kappa_chi() * std::sinh(s - 0.5) : -std::exp(-s); }

  /// g(s) = K(0) - K(s) + s K'(s): the removable-singularity factor of the
  /// collision chart; behaves like K''(0) s^2/2 as s->0+.  Series below 1e-4
  /// to avoid cancellation.
  double g_removable(double s) const {
    if (s < 1e-4) {
      // g = sum_{n>=2} (n-1) a_n s^n with a_n the Taylor coefficients of the
      // right branch: a_2 = K0/2, a_3 = -1/6, a_4 = K0/24, a_5 = -1/120.
      const double k0 = K0();
      return s * s * (k0 / 2.0 + s * (-1.0 / 3.0 + s * (k0 / 8.0 - s / 30.0)));
    }
    return K0() - K_right(s) + s * Kp_right(s);
  }

  /// v(s) = (K(0) - K(s))/s, limit 1 as s->0+ (since K'(0+) = -1)
  double v_diff(double s) const {
    if (s < 1e-4) {
      const double k0 = K0();
      return 1.0 - s * (k0 / 2.0 - s * (1.0 / 6.0 - s * k0 / 24.0));
    }
    return (K0() - K_right(s)) / s;
  }
};

// ---- multipeakon state ------------------------------------------------------

/// One peaked wave: strength p, crest position q.
struct Peakon {
  double p = 0.0;
  double q = 0.0;
};

/// Energy concentrated at a point (present only at collision instants).
struct EnergyAtom {
  double x = 0.0;
  double mass = 0.0;
};

/// Superposition of peakons plus point atoms of the energy measure.
/// Positions are kept nondecreasing; periodic positions live in [0,1).
struct MultipeakonState {
  Domain domain = Domain::real_line();
  std::vector<Peakon> peakons;
  double time = 0.0;
  std::vector<EnergyAtom> atoms;

  MultipeakonState() = default;
  MultipeakonState(Domain d, std::vector<Peakon> pk, double t = 0.0,
                   std::vector<EnergyAtom> at = {})
      : domain(d), peakons(std::move(pk)), time(t), atoms(std::move(at)) {
    normalize();
  }

  std::size_t size() const { return peakons.size(); }

  /// sort by position, wrap periodic positions, drop zero-strength peakons
  void normalize() {
    for (auto& pk : peakons) {
      if (!std::isfinite(pk.p) || !std::isfinite(pk.q)) throw Error("non-finite peakon");
      if (domain.is_periodic()) pk.q = wrap_unit(pk.q);
    }
    std::erase_if(peakons, [](const Peakon& pk) { return pk.p == 0.0; });
    std::stable_sort(peakons.begin(), peakons.end(),
                     [](const Peakon& a, const Peakon& b) { return a.q < b.q; });
    for (const auto& a : atoms)
      if (!(a.mass > 0.0)) throw Error("energy atom mass must be positive");
  }
};

// ---- serialization ----------------------------------------------------------
//
// {domain: {"real_line": {"alpha": a}} | "periodic", time, peakons: [{p,q}],
//  atoms: [{x, mass}]}, field order fixed, numbers with 17 significant digits.

inline std::string to_json(const MultipeakonState& s) {
  std::ostringstream os;
  os << "{\"domain\":";
  if (s.domain.is_periodic())
    os << "\"periodic\"";
  else
    os << "{\"real_line\":{\"alpha\":" << format_g17(s.domain.alpha) << "}}";
  os << ",\"time\":" << format_g17(s.time) << ",\"peakons\":[";
  for (std::size_t i = 0; i < s.peakons.size(); ++i) {
    if (i) os << ",";
    os << "{\"p\":" << format_g17(s.peakons[i].p) << ",\"q\":" << format_g17(s.peakons[i].q) << "}";
  }
  os << "],\"atoms\":[";
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    if (i) os << ",";
    os << "{\"x\":" << format_g17(s.atoms[i].x) << ",\"mass\":" << format_g17(s.atoms[i].mass) << "}";
  }
  os << "]}";
  return os.str();
}

inline MultipeakonState state_from_json(const nlohmann::json& j) {
  MultipeakonState s;
  if (!j.contains("domain")) throw ConfigInvalid("state: missing 'domain'");
  const auto& dj = j.at("domain");
  if (dj.is_string() && dj.get<std::string>() == "periodic") {
    s.domain = Domain::periodic();
  } else if (dj.is_object() && dj.contains("real_line")) {
    s.domain = Domain::real_line(dj.at("real_line").value("alpha", 0.5));
  } else {
    throw ConfigInvalid("state: bad 'domain'");
  }
  s.time = j.value("time", 0.0);
  if (j.contains("peakons"))
    for (const auto& pj : j.at("peakons"))
      s.peakons.push_back({pj.at("p").get<double>(), pj.at("q").get<double>()});
  if (j.contains("atoms"))
    for (const auto& aj : j.at("atoms"))
      s.atoms.push_back({aj.at("x").get<double>(), aj.at("mass").get<double>()});
  s.normalize();
  return s;
}

inline MultipeakonState state_from_json_string(const std::string& text) {
  return state_from_json(nlohmann::json::parse(text));
}

}  // namespace wavelab
