/*
 * dynamics.hpp
 *
 * SIRS vector field with R eliminated, its mixed-monotone decomposition,
 * the embedded envelope system, and event/crossing-time detection on
 * fixed-step RK4 flows.
 */

#ifndef SIRSYNTH_DYNAMICS_HPP_
#define SIRSYNTH_DYNAMICS_HPP_

#include <optional>
#include <stdexcept>
#include <vector>

namespace sirsynth {

/* Model constants of the SIRS system. u_levels holds the admissible
 * infection-rate levels in strictly descending order (weakest measure
 * first). */
struct ModelParams {
  double gamma = 0.15;            // recovery rate (1/day)
  double xi = 0.02;               // immunity-loss rate (1/day)
  std::vector<double> u_levels;   // strictly descending, all positive

  void validate() const;
  double u_max() const { return u_levels.front(); }
  double u_min() const { return u_levels.back(); }
};

/* Point (S, I) in the unit simplex; R is implied as 1 - S - I. */
struct State {
  double S = 0.0;
  double I = 0.0;

  double R() const { return 1.0 - S - I; }
  bool in_simplex(double tol = 1e-9) const {
    return S >= -tol && I >= -tol && S + I <= 1.0 + tol;
  }
};

inline State operator+(const State& a, const State& b) { return {a.S + b.S, a.I + b.I}; }
inline State operator*(double c, const State& a) { return {c * a.S, c * a.I}; }

/* Lower/upper corner pair evolved by the embedded system. */
struct EmbeddedState {
  State lower;
  State upper;

  bool ordered(double tol = 0.0) const {
    return lower.S <= upper.S + tol && lower.I <= upper.I + tol;
  }
};

struct IntegratorConfig {
  double step = 0.01;          // RK4 step (day)
  double horizon = 1000.0;     // maximum search/integration time (day)
  double crossing_tol = 1e-9;  // bisection tolerance on crossing times (day)

  void validate() const;
};

/* dS/dt = -u*S*I + xi*(1-S-I),  dI/dt = (u*S - gamma)*I */
State derivative(const State& x, double u, const ModelParams& p);

/* Decomposition function of the mixed-monotone embedding; collapses to
 * derivative() when (x,u) == (xhat,uhat). The second component switches on
 * the sign of u*S - gamma. */
State decomposition(const State& x, double u, const State& xhat, double uhat,
                    const ModelParams& p);

/* One embedded derivative evaluation: lower evolves by d(lower,u,upper,u),
 * upper by d(upper,u,lower,u). */
EmbeddedState embedded_derivative(const EmbeddedState& c, double u, const ModelParams& p);

void rk4_step(State& x, double u, double h, const ModelParams& p);
void rk4_step_embedded(EmbeddedState& c, double u, double h, const ModelParams& p);

/* Flow of the true system under constant input, evaluated canonically as
 * full RK4 steps plus one partial step. */
State integrate(State x, double u, double t, const ModelParams& p,
                const IntegratorConfig& cfg);

/* Flow of the embedded envelope system; preserves lower <= upper. */
EmbeddedState integrate_embedded(EmbeddedState c, double u, double t,
                                 const ModelParams& p, const IntegratorConfig& cfg);

enum class Envelope { lower, upper };

/* Recorded embedded trajectory on the step grid t_k = k*step. at(t) is the
 * canonical evaluation of the same flow for any t within the recorded span. */
class EmbeddedTrajectory {
 public:
  EmbeddedTrajectory(EmbeddedState start, double u, double step, const ModelParams& p)
      : u_(u), step_(step), params_(&p) {
    samples_.push_back(start);
  }

  /* extend until t_max or until stop(k, state) returns true */
  template <class Stop>
  void extend_until(double t_max, Stop&& stop) {
    while (duration() < t_max - 1e-12) {
      EmbeddedState next = samples_.back();
      rk4_step_embedded(next, u_, step_, *params_);
      samples_.push_back(next);
      if (stop(samples_.size() - 1, next)) break;
    }
  }
  void extend(double t_max) {
    extend_until(t_max, [](std::size_t, const EmbeddedState&) { return false; });
  }

  std::size_t size() const { return samples_.size(); }
  double step() const { return step_; }
  double duration() const { return step_ * static_cast<double>(samples_.size() - 1); }
  const EmbeddedState& sample(std::size_t k) const { return samples_[k]; }
  double input() const { return u_; }

  EmbeddedState at(double t) const;

  /* First t > 0 with the selected I-envelope equal to target, located by
   * per-step sign-change bracketing plus bisection to tol. */
  std::optional<double> first_crossing(double target_I, Envelope env, double tol) const;

 private:
  double u_;
  double step_;
  const ModelParams* params_;
  std::vector<EmbeddedState> samples_;
};

/* First t > 0 at which the selected I-envelope of the embedded flow from
 * box0 equals target_I; nullopt if no crossing before cfg.horizon. */
std::optional<double> crossing_time(const EmbeddedState& box0, double u, double target_I,
                                    Envelope env, const ModelParams& p,
                                    const IntegratorConfig& cfg);

struct Event {
  double t;
  State state;
};

/* First t > 0 with |I(t) - I(0)| >= eps under constant input, plus the state
 * there; nullopt if the threshold is not reached before cfg.horizon. */
std::optional<Event> concrete_event_time(const State& x0, double u, double eps,
                                         const ModelParams& p, const IntegratorConfig& cfg);

/* Number of whole steps and the partial remainder of t on the step grid. */
inline std::pair<long, double> split_time(double t, double step) {
  long k = static_cast<long>(t / step + 1e-9);
  double r = t - static_cast<double>(k) * step;
  if (r < 0) {  // t marginally below a grid point
    --k;
    r = t - static_cast<double>(k) * step;
  }
  return {k, r};
}

}  // namespace sirsynth

#endif  // SIRSYNTH_DYNAMICS_HPP_
