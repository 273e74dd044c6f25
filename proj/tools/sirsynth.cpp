/*
 * sirsynth — event-triggered controller synthesis for the SIRS model.
 *
 * Subcommands:
 *   abstract      build the symbolic model and save it
 *   synth         solve the safety and reachability games, save policies
 *   simulate      closed-loop run(s) of the true model under the policies
 *   compare-reach emit both reachable-set over-approximations as CSV
 *   check         initial-coverage and policy-closure verification
 *
 * Exit codes: 0 ok, 2 config error, 3 stale model, 4 domain violation,
 * 5 synthesis failure, 6 I/O error, 7 monitor failure.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"

#include "sirsynth/config.hpp"
#include "sirsynth/model_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStaleModel = 3;
constexpr int kExitDomain = 4;
constexpr int kExitSynthFail = 5;
constexpr int kExitIo = 6;
constexpr int kExitMonitor = 7;

using namespace sirsynth;

std::string out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SIRSYNTH_OUT")) return env;
  return ".";
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int cmd_abstract(const RunConfig& cfg, const std::string& dir) {
  const SymbolicModel model =
      build_symbolic_model(cfg.bounds, cfg.grid, cfg.thresholds, cfg.params, cfg.abstraction());
  std::filesystem::create_directories(dir);
  save_model(model, join(dir, "model.bin"));
  std::size_t transitions = 0;
  for (const TransitionEntry& e : model.trans)
    transitions += static_cast<std::size_t>(e.up.count() + e.down.count());
  std::printf("abstract: %zu states, %zu pairs/state, %zu transitions -> %s\n",
              model.sets.geom.state_count(), model.pair_count(), transitions,
              join(dir, "model.bin").c_str());
  return kExitOk;
}

SymbolicModel load_model_for(const RunConfig& cfg, const std::string& dir) {
  SymbolicModel probe;
  probe.grid = cfg.grid;
  probe.bounds = cfg.bounds;
  probe.params = cfg.params;
  probe.thresholds = cfg.thresholds;
  probe.config = cfg.abstraction();
  return load_model_checked(join(dir, "model.bin"), probe.config_digest());
}

int cmd_synth(const RunConfig& cfg, const std::string& dir) {
  const SymbolicModel model = load_model_for(cfg, dir);
  const SynthesisResult synth = synthesize(model);
  if (synth.safety.empty()) {
    std::fprintf(stderr, "synth: terminal safety game is empty\n");
    return kExitSynthFail;
  }
  std::size_t n_win = 0, n_win0 = 0, n_winF = 0;
  for (std::size_t i = 0; i < synth.reach.winning.size(); ++i) {
    n_win += synth.reach.winning[i];
    n_win0 += synth.reach.winning0[i];
    n_winF += synth.safety.winning[i];
  }
  save_synthesis(synth, model.config_digest(), join(dir, "synthesis.bin"));
  std::printf("synth: |terminal|=%zu |reach|=%zu |initial|=%zu -> %s\n", n_winF, n_win, n_win0,
              join(dir, "synthesis.bin").c_str());

  ConcretePolicy policy(model, synth);
  const CoverageReport cov = check_initial_coverage(
      cfg.bounds, policy.winning_states(synth.reach.winning0), cfg.grid);
  if (!cov.covered) {
    std::fprintf(stderr, "synth: initial winning set does not cover X_0 (%zu holes)\n",
                 cov.uncovered.size());
    return kExitSynthFail;
  }
  std::printf("synth: initial set coverage ok\n");
  return kExitOk;
}

std::string phase_name(Phase p) {
  switch (p) {
    case Phase::reach_initial: return "reach_initial";
    case Phase::reach: return "reach";
    case Phase::terminal: return "terminal";
  }
  return "?";
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,S,I,R,u,epsilon,event,phase\n";
  char buf[256];
  for (const TraceSample& s : trace.samples) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%s\n", s.t, s.x.S,
                  s.x.I, s.x.R(), s.u, s.eps, s.event ? 1 : 0, phase_name(s.phase).c_str());
    out << buf;
  }
}

void write_events_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "k,t,S,I,R,u,epsilon,phase,rank\n";
  char buf[256];
  for (std::size_t k = 0; k < trace.events.size(); ++k) {
    const TraceEvent& e = trace.events[k];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%s,%d\n", k, e.t,
                  e.x.S, e.x.I, e.x.R(), e.choice.u, e.choice.eps, phase_name(e.phase).c_str(),
                  e.rank);
    out << buf;
  }
}

int simulate_one(const RunConfig& cfg, const ConcretePolicy& policy, const State& x0,
                 const std::string& dir, const std::string& tag) {
  const SimulationTrace trace =
      simulate_closed_loop(x0, policy, cfg.selection, cfg.params, cfg.integrator, cfg.t_end);
  write_trace_csv(trace, join(dir, "trace_" + tag + ".csv"));
  write_events_csv(trace, join(dir, "events_" + tag + ".csv"));
  const MonitorReport rep = monitor(trace, cfg.bounds, cfg.grid);
  write_file(join(dir, "monitor_" + tag + ".json"), rep.to_json() + "\n");
  if (!trace.failure.empty()) {
    std::fprintf(stderr, "simulate %s: %s\n", tag.c_str(), trace.failure.c_str());
    return kExitDomain;
  }
  std::printf("simulate %s: events=%zu entry=%.6g monitor=%s\n", tag.c_str(),
              trace.events.size(), rep.first_target_entry, rep.ok ? "ok" : "FAIL");
  return rep.ok ? kExitOk : kExitMonitor;
}

int cmd_simulate(const RunConfig& cfg, const std::string& dir, const std::string& x0_str,
                 bool batch) {
  const SymbolicModel model = load_model_for(cfg, dir);
  const SynthesisResult synth =
      load_synthesis(join(dir, "synthesis.bin"), model.config_digest(),
                     model.sets.geom.state_count());
  ConcretePolicy policy(model, synth);

  if (batch) {
    // sweep the corners and center of the initial box
    const double Ss[3] = {cfg.bounds.S0_min, (cfg.bounds.S0_min + cfg.bounds.S0_max) / 2,
                          cfg.bounds.S0_max};
    const double Is[3] = {cfg.bounds.I0_min, (cfg.bounds.I0_min + cfg.bounds.I0_max) / 2,
                          cfg.bounds.I0_max};
    int rc = kExitOk;
    int i = 0;
    for (double S : Ss)
      for (double I : Is) {
        const int one = simulate_one(cfg, policy, {S, I}, dir, "b" + std::to_string(i++));
        rc = rc == kExitOk ? one : rc;
      }
    return rc;
  }

  double S = 0, I = 0;
  if (std::sscanf(x0_str.c_str(), "%lf,%lf", &S, &I) != 2) {
    std::fprintf(stderr, "simulate: --x0 expects S,I\n");
    return kExitConfig;
  }
  char tag[64];
  std::snprintf(tag, sizeof(tag), "%g_%g", S, I);
  std::string t(tag);
  for (auto& ch : t)
    if (ch == '.') ch = 'p';
  return simulate_one(cfg, policy, {S, I}, dir, t);
}

int cmd_compare_reach(const RunConfig& cfg, const std::string& dir, const std::string& box_str,
                      double u, double t, int samples) {
  double s0, i0, s1, i1;
  if (std::sscanf(box_str.c_str(), "%lf,%lf,%lf,%lf", &s0, &i0, &s1, &i1) != 4) {
    std::fprintf(stderr, "compare-reach: --box expects Slo,Ilo,Shi,Ihi\n");
    return kExitConfig;
  }
  const IntervalBox box{{s0, i0}, {s1, i1}};
  const IntervalBox mm = over_approx_reach(box, u, t, cfg.params, cfg.integrator);
  const State center{(s0 + s1) / 2, (i0 + i1) / 2};
  const double eps = std::max(box.width_S(), box.width_I()) / 2;
  const BallApprox ball = lipschitz_ball_reach(center, eps, u, t, cfg.params, cfg.integrator);

  std::filesystem::create_directories(dir);
  const std::string path = join(dir, "compare_reach.csv");
  std::ofstream out(path);
  if (!out) return kExitIo;
  out << "kind,S,I\n";
  char buf[128];
  auto emit = [&](const char* kind, const State& x) {
    std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g\n", kind, x.S, x.I);
    out << buf;
  };
  emit("initial_lo", box.lo);
  emit("initial_hi", box.hi);
  emit("mm_lo", mm.lo);
  emit("mm_hi", mm.hi);
  emit("ball_center", ball.center);
  emit("ball_lo", ball.bounding_box().lo);
  emit("ball_hi", ball.bounding_box().hi);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> us(box.lo.S, box.hi.S);
  std::uniform_real_distribution<double> ui(box.lo.I, box.hi.I);
  for (int k = 0; k < samples; ++k) {
    const State x = integrate({us(rng), ui(rng)}, u, t, cfg.params, cfg.integrator);
    emit("sample", x);
  }
  std::printf("compare-reach: box area %.3e, ball bbox area %.3e -> %s\n", mm.area(),
              ball.bounding_box().area(), path.c_str());
  return kExitOk;
}

int cmd_check(const RunConfig& cfg, const std::string& dir) {
  const SymbolicModel model = load_model_for(cfg, dir);
  const SynthesisResult synth =
      load_synthesis(join(dir, "synthesis.bin"), model.config_digest(),
                     model.sets.geom.state_count());
  ConcretePolicy policy(model, synth);

  const CoverageReport cov = check_initial_coverage(
      cfg.bounds, policy.winning_states(synth.reach.winning0), cfg.grid);
  std::printf("check: initial coverage %s (%zu holes)\n", cov.covered ? "ok" : "FAIL",
              cov.uncovered.size());

  // closure of the terminal policy and rank descent of the reach policy
  const Arena arena = arena_from_model(model);
  bool closure_ok = true, descent_ok = true;
  for (std::size_t x = 0; x < arena.n_states; ++x) {
    for (std::int32_t p : synth.safety.policy[x]) {
      if (!arena.lf[arena.slot(x, static_cast<std::size_t>(p))]) closure_ok = false;
      for (std::int32_t s : arena.succ[arena.slot(x, static_cast<std::size_t>(p))])
        if (!synth.safety.winning[static_cast<std::size_t>(s)]) closure_ok = false;
    }
    for (std::int32_t p : synth.reach.policy[x]) {
      const auto& succ = arena.succ[arena.slot(x, static_cast<std::size_t>(p))];
      if (succ.empty()) descent_ok = false;
      for (std::int32_t s : succ)
        if (synth.reach.rank[static_cast<std::size_t>(s)] < 0 ||
            synth.reach.rank[static_cast<std::size_t>(s)] >= synth.reach.rank[x])
          descent_ok = false;
    }
  }
  std::printf("check: terminal closure %s, rank descent %s\n", closure_ok ? "ok" : "FAIL",
              descent_ok ? "ok" : "FAIL");
  return (cov.covered && closure_ok && descent_ok) ? kExitOk : kExitSynthFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered controller synthesis for the SIRS epidemic model"};
  app.require_subcommand(1);

  std::string config_path;
  std::string dir_flag;
  app.add_option("-c,--config", config_path, "configuration file")->required();
  app.add_option("-o,--out", dir_flag, "output directory (or SIRSYNTH_OUT)");

  auto* sub_abstract = app.add_subcommand("abstract", "build and save the symbolic model");
  auto* sub_synth = app.add_subcommand("synth", "solve both games and save the policies");
  auto* sub_sim = app.add_subcommand("simulate", "closed-loop simulation");
  std::string x0_str;
  bool batch = false;
  sub_sim->add_option("--x0", x0_str, "initial state S,I");
  sub_sim->add_flag("--batch", batch, "sweep a 3x3 grid over the initial box");
  auto* sub_cmp = app.add_subcommand("compare-reach", "emit both over-approximations as CSV");
  std::string box_str = "0.595,0.045,0.605,0.055";
  double cmp_u = 0.17, cmp_t = 1.0;
  int cmp_samples = 500;
  sub_cmp->add_option("--box", box_str, "initial box Slo,Ilo,Shi,Ihi");
  sub_cmp->add_option("--u", cmp_u, "input level");
  sub_cmp->add_option("--t", cmp_t, "time horizon");
  sub_cmp->add_option("--samples", cmp_samples, "number of sampled endpoints");
  auto* sub_check = app.add_subcommand("check", "coverage and closure verification");

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  }
  const std::string dir = out_dir(dir_flag);

  try {
    if (sub_abstract->parsed()) return cmd_abstract(cfg, dir);
    if (sub_synth->parsed()) return cmd_synth(cfg, dir);
    if (sub_sim->parsed()) {
      if (!batch && x0_str.empty()) {
        std::fprintf(stderr, "simulate: need --x0 or --batch\n");
        return kExitConfig;
      }
      return cmd_simulate(cfg, dir, x0_str, batch);
    }
    if (sub_cmp->parsed()) return cmd_compare_reach(cfg, dir, box_str, cmp_u, cmp_t, cmp_samples);
    if (sub_check->parsed()) return cmd_check(cfg, dir);
  } catch (const StaleModelError& e) {
    std::fprintf(stderr, "stale model: %s\n", e.what());
    return kExitStaleModel;
  } catch (const CorruptFileError& e) {
    std::fprintf(stderr, "corrupt file: %s\n", e.what());
    return kExitIo;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "domain violation: %s\n", e.what());
    return kExitDomain;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}
