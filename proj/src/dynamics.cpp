#include "sirsynth/dynamics.hpp"

#include <cmath>

namespace sirsynth {

void ModelParams::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (!(xi >= 0.0)) throw std::invalid_argument("xi must be >= 0");
  if (u_levels.empty()) throw std::invalid_argument("u_levels must be nonempty");
  for (std::size_t i = 0; i < u_levels.size(); ++i) {
    if (!(u_levels[i] > 0.0)) throw std::invalid_argument("u_levels must be positive");
    if (i > 0 && !(u_levels[i] < u_levels[i - 1]))
      throw std::invalid_argument("u_levels must be strictly descending");
  }
}

void IntegratorConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("integrator step must be > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("integrator horizon must be > 0");
  if (!(step <= horizon)) throw std::invalid_argument("integrator step must be <= horizon");
  if (!(crossing_tol > 0.0 && crossing_tol < step))
    throw std::invalid_argument("crossing_tol must lie in (0, step)");
}

State derivative(const State& x, double u, const ModelParams& p) {
  return {-u * x.S * x.I + p.xi * (1.0 - x.S - x.I), (u * x.S - p.gamma) * x.I};
}

State decomposition(const State& x, double u, const State& xhat, double uhat,
                    const ModelParams& p) {
  const double d1 = -uhat * xhat.S * xhat.I + p.xi * (1.0 - xhat.S - xhat.I);
  const double rate = u * x.S - p.gamma;
  const double d2 = rate >= 0.0 ? rate * x.I : rate * xhat.I;
  return {d1, d2};
}

EmbeddedState embedded_derivative(const EmbeddedState& c, double u, const ModelParams& p) {
  return {decomposition(c.lower, u, c.upper, u, p),
          decomposition(c.upper, u, c.lower, u, p)};
}

void rk4_step(State& x, double u, double h, const ModelParams& p) {
  const State k1 = derivative(x, u, p);
  const State k2 = derivative(x + (h / 2.0) * k1, u, p);
  const State k3 = derivative(x + (h / 2.0) * k2, u, p);
  const State k4 = derivative(x + h * k3, u, p);
  x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {
EmbeddedState axpy(const EmbeddedState& c, double a, const EmbeddedState& d) {
  return {{c.lower.S + a * d.lower.S, c.lower.I + a * d.lower.I},
          {c.upper.S + a * d.upper.S, c.upper.I + a * d.upper.I}};
}
}  // namespace

void rk4_step_embedded(EmbeddedState& c, double u, double h, const ModelParams& p) {
  const EmbeddedState k1 = embedded_derivative(c, u, p);
  const EmbeddedState k2 = embedded_derivative(axpy(c, h / 2.0, k1), u, p);
  const EmbeddedState k3 = embedded_derivative(axpy(c, h / 2.0, k2), u, p);
  const EmbeddedState k4 = embedded_derivative(axpy(c, h, k3), u, p);
  c = axpy(axpy(axpy(axpy(c, h / 6.0, k1), h / 3.0, k2), h / 3.0, k3), h / 6.0, k4);
}

State integrate(State x, double u, double t, const ModelParams& p,
                const IntegratorConfig& cfg) {
  cfg.validate();
  if (t < 0.0) throw std::invalid_argument("integration time must be >= 0");
  if (t > cfg.horizon + 1e-12) throw std::invalid_argument("integration time exceeds horizon");
  auto [k, r] = split_time(t, cfg.step);
  for (long i = 0; i < k; ++i) rk4_step(x, u, cfg.step, p);
  if (r > 1e-12) rk4_step(x, u, r, p);
  return x;
}

EmbeddedState integrate_embedded(EmbeddedState c, double u, double t, const ModelParams& p,
                                 const IntegratorConfig& cfg) {
  cfg.validate();
  if (!c.ordered(1e-12)) throw std::invalid_argument("embedded state must satisfy lower <= upper");
  if (t < 0.0) throw std::invalid_argument("integration time must be >= 0");
  if (t > cfg.horizon + 1e-12) throw std::invalid_argument("integration time exceeds horizon");
  auto [k, r] = split_time(t, cfg.step);
  for (long i = 0; i < k; ++i) rk4_step_embedded(c, u, cfg.step, p);
  if (r > 1e-12) rk4_step_embedded(c, u, r, p);
  if (!c.ordered(1e-7))
    throw std::runtime_error("embedded integration lost the lower <= upper ordering");
  return c;
}

EmbeddedState EmbeddedTrajectory::at(double t) const {
  auto [k, r] = split_time(t, step_);
  if (k < 0 || static_cast<std::size_t>(k) >= samples_.size())
    throw std::out_of_range("time outside recorded trajectory");
  EmbeddedState c = samples_[static_cast<std::size_t>(k)];
  if (r > 1e-12) rk4_step_embedded(c, u_, r, *params_);
  return c;
}

namespace {
double env_I(const EmbeddedState& c, Envelope env) {
  return env == Envelope::lower ? c.lower.I : c.upper.I;
}
}  // namespace

std::optional<double> EmbeddedTrajectory::first_crossing(double target_I, Envelope env,
                                                         double tol) const {
  double g_prev = env_I(samples_[0], env) - target_I;
  for (std::size_t k = 1; k < samples_.size(); ++k) {
    const double g = env_I(samples_[k], env) - target_I;
    const bool bracket = (g_prev < 0.0 && g >= 0.0) || (g_prev > 0.0 && g <= 0.0);
    if (bracket) {
      double a = step_ * static_cast<double>(k - 1);
      double b = step_ * static_cast<double>(k);
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        const double gm = env_I(at(mid), env) - target_I;
        if ((g_prev < 0.0 && gm >= 0.0) || (g_prev > 0.0 && gm <= 0.0))
          b = mid;
        else
          a = mid;
      }
      return 0.5 * (a + b);
    }
    if (g_prev == 0.0 && g != 0.0) {
      // left the target after starting on it; keep scanning for a return
      g_prev = g;
      continue;
    }
    g_prev = g;
  }
  return std::nullopt;
}

std::optional<double> crossing_time(const EmbeddedState& box0, double u, double target_I,
                                    Envelope env, const ModelParams& p,
                                    const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(target_I > 0.0 && target_I < 1.0))
    throw std::invalid_argument("crossing target must lie in (0,1)");
  if (!box0.ordered(1e-12)) throw std::invalid_argument("embedded state must satisfy lower <= upper");
  EmbeddedTrajectory traj(box0, u, cfg.step, p);
  double g0 = env_I(box0, env) - target_I;
  traj.extend_until(cfg.horizon, [&](std::size_t, const EmbeddedState& c) {
    const double g = env_I(c, env) - target_I;
    const bool bracket = (g0 < 0.0 && g >= 0.0) || (g0 > 0.0 && g <= 0.0);
    if (!bracket && g0 == 0.0) g0 = g;
    return bracket;
  });
  return traj.first_crossing(target_I, env, cfg.crossing_tol);
}

std::optional<Event> concrete_event_time(const State& x0, double u, double eps,
                                         const ModelParams& p, const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("event threshold must be > 0");
  const double I0 = x0.I;
  State x = x0;
  double t_prev = 0.0;
  State x_prev = x0;
  double t = 0.0;
  while (t < cfg.horizon - 1e-12) {
    const double h = std::min(cfg.step, cfg.horizon - t);
    x_prev = x;
    t_prev = t;
    rk4_step(x, u, h, p);
    t += h;
    if (std::fabs(x.I - I0) >= eps) {
      // bisect [t_prev, t] for the first time |I - I0| reaches eps
      double a = t_prev, b = t;
      while (b - a > cfg.crossing_tol) {
        const double mid = 0.5 * (a + b);
        State xm = x_prev;
        rk4_step(xm, u, mid - t_prev, p);
        if (std::fabs(xm.I - I0) >= eps)
          b = mid;
        else
          a = mid;
      }
      State xe = x_prev;
      if (b - t_prev > 1e-15) rk4_step(xe, u, b - t_prev, p);
      return Event{b, xe};
    }
  }
  return std::nullopt;
}

}  // namespace sirsynth
