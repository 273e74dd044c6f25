/*
 * reach.hpp
 *
 * Reachable-set over-approximation: interval boxes propagated through the
 * mixed-monotone embedding, and the coarser Lipschitz/Gronwall ball bound
 * used for comparison.
 */

#ifndef SIRSYNTH_REACH_HPP_
#define SIRSYNTH_REACH_HPP_

#include "sirsynth/dynamics.hpp"

namespace sirsynth {

/* Axis-aligned rectangle [lo, hi]. The corners of a propagated box may
 * leave the simplex; that is an over-approximation artifact, detectable via
 * exits_simplex() and removable with clipped_to_unit() for grid queries. */
struct IntervalBox {
  State lo;
  State hi;

  bool valid() const { return lo.S <= hi.S && lo.I <= hi.I; }
  bool contains(const State& x, double tol = 0.0) const {
    return x.S >= lo.S - tol && x.S <= hi.S + tol && x.I >= lo.I - tol && x.I <= hi.I + tol;
  }
  bool contains_box(const IntervalBox& inner, double tol = 0.0) const {
    return contains(inner.lo, tol) && contains(inner.hi, tol);
  }
  double width_S() const { return hi.S - lo.S; }
  double width_I() const { return hi.I - lo.I; }
  double area() const { return width_S() * width_I(); }
  bool exits_simplex(double tol = 1e-12) const {
    return !(lo.in_simplex(tol) && hi.in_simplex(tol) && hi.S + hi.I <= 1.0 + tol);
  }
  IntervalBox clipped_to_unit() const;
};

/* Ball in the infinity norm, i.e. a square of half-width radius. */
struct BallApprox {
  State center;
  double radius = 0.0;

  bool contains(const State& x, double tol = 0.0) const {
    return std::max(std::abs(x.S - center.S), std::abs(x.I - center.I)) <= radius + tol;
  }
  IntervalBox bounding_box() const {
    return {{center.S - radius, center.I - radius}, {center.S + radius, center.I + radius}};
  }
};

/* Box enclosing the reachable set at time t from box under constant input,
 * obtained as the embedded flow of the box corners. */
IntervalBox over_approx_reach(const IntervalBox& box, double u, double t,
                              const ModelParams& p, const IntegratorConfig& cfg);

/* Upper bound on the infinity-norm induced Jacobian norm of the vector
 * field over domain x u_levels. Every row sum of |df/dx| is convex in
 * (S, I), so the maximum over the box is attained at its corners. */
double estimate_lipschitz_constant(const ModelParams& p, const IntervalBox& domain);

/* Gronwall-Bellman bound: the reachable set from B(center, eps) at time t is
 * contained in B(flow(center), eps * exp(L*t)). The default overload bounds
 * L over the unit box. */
BallApprox lipschitz_ball_reach(const State& center, double eps, double u, double t,
                                const ModelParams& p, const IntegratorConfig& cfg,
                                const IntervalBox& lipschitz_domain);
BallApprox lipschitz_ball_reach(const State& center, double eps, double u, double t,
                                const ModelParams& p, const IntegratorConfig& cfg);

}  // namespace sirsynth

#endif  // SIRSYNTH_REACH_HPP_
