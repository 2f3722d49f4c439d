#pragma once

#include <cmath>
#include <utility>

#include "wavelab/domain.hpp"
#include "wavelab/piecewise_exp.hpp"
#include "wavelab/util.hpp"

namespace wavelab {

/// u(x) = sum_j p_j K(x - q_j)
inline double evaluate_u(const MultipeakonState& s, double x) {
  const Kernel k(s.domain);
  double u = 0.0;
  for (const auto& pk : s.peakons) u += pk.p * k.K(x - pk.q);
  return u;
}

/// u_x(x); at a crest the symmetric convention sign(0) = 0 applies.
inline double evaluate_ux(const MultipeakonState& s, double x) {
  const Kernel k(s.domain);
  double ux = 0.0;
  for (const auto& pk : s.peakons) ux += pk.p * k.Kp(x - pk.q);
  return ux;
}

/// Convolution source P = 1/2 K * (u^2 + u_x^2/2) and its x-derivative,
/// evaluated in closed form from the inter-peak exponential pieces.
inline std::pair<double, double> convolve_P(const MultipeakonState& s, double x) {
  if (s.peakons.empty()) return {0.0, 0.0};
  return ExpPieces(s).P_Px(x);
}

/// H(p,q) = 1/2 sum_{ij} p_i p_j K(q_i - q_j): the generator of the peakon ODEs.
inline double hamiltonian(const MultipeakonState& s) {
  const Kernel k(s.domain);
  const auto& pk = s.peakons;
  double h = 0.0;
  for (std::size_t i = 0; i < pk.size(); ++i) {
    h += 0.5 * pk[i].p * pk[i].p * k.K0();
    for (std::size_t j = i + 1; j < pk.size(); ++j)
      h += pk[i].p * pk[j].p * k.K(pk[i].q - pk[j].q);
  }
  return h;
}

/// E = \int (u^2 + u_x^2) dx plus any concentrated atoms.  The closed form
/// 2 sum_{ij} p_i p_j K(q_i - q_j) holds on both domains (= 4H).
inline double energy(const MultipeakonState& s) {
  double e = 4.0 * hamiltonian(s);
  for (const auto& a : s.atoms) e += a.mass;
  return e;
}

/// C^{alpha,u} = \int (u^2 + u_x^2) e^{alpha |x|} dx, closed form (real line).
inline double weighted_energy(const MultipeakonState& s, double alpha) {
  if (s.domain.is_periodic()) throw DomainMismatch("weighted_energy needs a real-line state");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigInvalid("alpha must be in (0,1)");
  if (s.peakons.empty()) return 0.0;
  return ExpPieces(s).weighted_energy(alpha);
}

/// \|u_x\|_{L^1} = total variation of u, exact.
inline double ux_l1_norm(const MultipeakonState& s) {
  if (s.peakons.empty()) return 0.0;
  return ExpPieces(s).ux_l1();
}

/// \|u\|_{L^1}, exact.
inline double u_l1_norm(const MultipeakonState& s) {
  if (s.peakons.empty()) return 0.0;
  return ExpPieces(s).u_l1();
}

/// H^1 inner-product distance between two states on the same domain:
/// peakons are the kernel's H^1 reproducing elements, <K(.-a),K(.-b)>_{H^1} = 2K(a-b),
/// so the difference is the energy of the signed concatenation.
inline double h1_distance(const MultipeakonState& u, const MultipeakonState& v) {
  if (!(u.domain == v.domain)) throw DomainMismatch("h1_distance: domains differ");
  MultipeakonState diff;
  diff.domain = u.domain;
  diff.peakons = u.peakons;
  for (auto pk : v.peakons) {
    pk.p = -pk.p;
    diff.peakons.push_back(pk);
  }
  diff.normalize();
  const double e2 = 4.0 * hamiltonian(diff);
  return std::sqrt(std::max(0.0, e2));
}

/// L^1 distance, exact via the piecewise-exponential form of u - v.
inline double l1_distance(const MultipeakonState& u, const MultipeakonState& v) {
  if (!(u.domain == v.domain)) throw DomainMismatch("l1_distance: domains differ");
  MultipeakonState diff;
  diff.domain = u.domain;
  diff.peakons = u.peakons;
  for (auto pk : v.peakons) {
    pk.p = -pk.p;
    diff.peakons.push_back(pk);
  }
  diff.normalize();
  return u_l1_norm(diff);
}

}  // namespace wavelab
