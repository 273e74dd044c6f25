#include "sirsynth/reach.hpp"

#include <algorithm>
#include <cmath>

namespace sirsynth {

IntervalBox IntervalBox::clipped_to_unit() const {
  auto clip = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return {{clip(lo.S), clip(lo.I)}, {clip(hi.S), clip(hi.I)}};
}

IntervalBox over_approx_reach(const IntervalBox& box, double u, double t,
                              const ModelParams& p, const IntegratorConfig& cfg) {
  if (!box.valid()) throw std::invalid_argument("interval box must satisfy lo <= hi");
  const EmbeddedState out = integrate_embedded({box.lo, box.hi}, u, t, p, cfg);
  return {out.lower, out.upper};
}

namespace {
/* infinity-norm induced Jacobian norm of f at one point */
double jacobian_norm(const State& x, double u, const ModelParams& p) {
  const double row_S = std::abs(u * x.I + p.xi) + std::abs(u * x.S + p.xi);
  const double row_I = std::abs(u * x.I) + std::abs(u * x.S - p.gamma);
  return std::max(row_S, row_I);
}
}  // namespace

double estimate_lipschitz_constant(const ModelParams& p, const IntervalBox& domain) {
  if (!domain.valid()) throw std::invalid_argument("interval box must satisfy lo <= hi");
  const State corners[4] = {{domain.lo.S, domain.lo.I},
                            {domain.lo.S, domain.hi.I},
                            {domain.hi.S, domain.lo.I},
                            {domain.hi.S, domain.hi.I}};
  double best = 0.0;
  for (double u : p.u_levels)
    for (const State& c : corners) best = std::max(best, jacobian_norm(c, u, p));
  return best;
}

BallApprox lipschitz_ball_reach(const State& center, double eps, double u, double t,
                                const ModelParams& p, const IntegratorConfig& cfg,
                                const IntervalBox& lipschitz_domain) {
  if (!(eps >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
  const double L = estimate_lipschitz_constant(p, lipschitz_domain);
  const State c = integrate(center, u, t, p, cfg);
  return {c, eps * std::exp(L * t)};
}

BallApprox lipschitz_ball_reach(const State& center, double eps, double u, double t,
                                const ModelParams& p, const IntegratorConfig& cfg) {
  return lipschitz_ball_reach(center, eps, u, t, p, cfg, {{0.0, 0.0}, {1.0, 1.0}});
}

}  // namespace sirsynth
