#include "sirsynth/model_io.hpp"

#include <cstring>
#include <fstream>

namespace sirsynth {

namespace {

constexpr char kModelMagic[8] = {'S', 'I', 'R', 'S', 'M', 'D', 'L', '1'};
constexpr char kSynthMagic[8] = {'S', 'I', 'R', 'S', 'S', 'Y', 'N', '1'};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                         static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
    bytes(b, 4);
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void close() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failure");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open " + path);
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n))
      throw CorruptFileError("unexpected end of file");
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint8_t b[4];
    bytes(b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | (hi << 32);
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  bool at_end() {
    in_.peek();
    return in_.eof();
  }

 private:
  std::ifstream in_;
};

void write_entry(Writer& w, const TransitionEntry& e) {
  const std::uint8_t flags =
      static_cast<std::uint8_t>((e.up.present ? 1 : 0) | (e.down.present ? 2 : 0));
  w.u8(flags);
  w.i32(e.up.lo);
  w.i32(e.up.hi);
  w.i32(e.down.lo);
  w.i32(e.down.hi);
}

TransitionEntry read_entry(Reader& r) {
  TransitionEntry e;
  const std::uint8_t flags = r.u8();
  e.up.present = flags & 1;
  e.down.present = flags & 2;
  e.up.lo = r.i32();
  e.up.hi = r.i32();
  e.down.lo = r.i32();
  e.down.hi = r.i32();
  return e;
}

void write_mask(Writer& w, const std::vector<std::uint8_t>& mask) {
  w.u64(mask.size());
  for (std::uint8_t v : mask) w.u8(v);
}

std::vector<std::uint8_t> read_mask(Reader& r, std::size_t expected) {
  const std::uint64_t n = r.u64();
  if (n != expected) throw CorruptFileError("mask size mismatch");
  std::vector<std::uint8_t> mask(n);
  for (auto& v : mask) v = r.u8();
  return mask;
}

}  // namespace

void save_model(const SymbolicModel& model, const std::string& path) {
  Writer w(path);
  w.bytes(kModelMagic, 8);
  w.u64(model.config_digest());
  w.f64(model.params.gamma);
  w.f64(model.params.xi);
  w.u32(static_cast<std::uint32_t>(model.params.u_levels.size()));
  for (double u : model.params.u_levels) w.f64(u);
  w.f64(model.grid.eta_S);
  w.f64(model.grid.eta_I);
  w.u32(static_cast<std::uint32_t>(model.thresholds.multiples.size()));
  for (std::int32_t k : model.thresholds.multiples) w.i32(k);
  for (double v : {model.bounds.S0_min, model.bounds.S0_max, model.bounds.I0_min,
                   model.bounds.I0_max, model.bounds.SS_min, model.bounds.IS_max,
                   model.bounds.SF_min, model.bounds.IF_max})
    w.f64(v);
  w.f64(model.config.integrator.step);
  w.f64(model.config.integrator.horizon);
  w.f64(model.config.integrator.crossing_tol);
  w.u8(model.config.strict_direction_check ? 1 : 0);

  w.u64(model.sets.geom.state_count());
  write_mask(w, model.sets.is_initial);
  write_mask(w, model.sets.is_safe);
  write_mask(w, model.sets.is_target);

  w.u64(model.trans.size());
  for (const TransitionEntry& e : model.trans) write_entry(w, e);
  write_mask(w, model.label_lf);
  w.u64(model.trans0.size());
  for (const TransitionEntry& e : model.trans0) write_entry(w, e);
  write_mask(w, model.label_l);
  w.close();
}

SymbolicModel load_model(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kModelMagic, 8) != 0)
    throw CorruptFileError("not a symbolic model file");
  const std::uint64_t digest = r.u64();

  SymbolicModel model;
  model.params.gamma = r.f64();
  model.params.xi = r.f64();
  const std::uint32_t nu = r.u32();
  if (nu == 0 || nu > 1024) throw CorruptFileError("implausible input level count");
  model.params.u_levels.resize(nu);
  for (auto& u : model.params.u_levels) u = r.f64();
  model.grid.eta_S = r.f64();
  model.grid.eta_I = r.f64();
  const std::uint32_t nk = r.u32();
  if (nk == 0 || nk > 1024) throw CorruptFileError("implausible threshold count");
  model.thresholds.multiples.resize(nk);
  for (auto& k : model.thresholds.multiples) k = r.i32();
  for (double* v : {&model.bounds.S0_min, &model.bounds.S0_max, &model.bounds.I0_min,
                    &model.bounds.I0_max, &model.bounds.SS_min, &model.bounds.IS_max,
                    &model.bounds.SF_min, &model.bounds.IF_max})
    *v = r.f64();
  model.config.integrator.step = r.f64();
  model.config.integrator.horizon = r.f64();
  model.config.integrator.crossing_tol = r.f64();
  model.config.strict_direction_check = r.u8() != 0;

  model.sets = build_grid_sets(model.bounds, model.grid);
  const std::size_t N = model.sets.geom.state_count();
  if (r.u64() != N) throw CorruptFileError("state count mismatch");
  const auto is_initial = read_mask(r, N);
  const auto is_safe = read_mask(r, N);
  const auto is_target = read_mask(r, N);
  if (is_initial != model.sets.is_initial || is_safe != model.sets.is_safe ||
      is_target != model.sets.is_target)
    throw CorruptFileError("grid set mismatch");

  const std::size_t P = model.pair_count();
  if (r.u64() != N * P) throw CorruptFileError("transition table size mismatch");
  model.trans.resize(N * P);
  for (auto& e : model.trans) e = read_entry(r);
  model.label_lf = read_mask(r, N * P);
  const std::size_t N0 = model.sets.initial_states.size();
  if (r.u64() != N0 * P) throw CorruptFileError("initial transition table size mismatch");
  model.trans0.resize(N0 * P);
  for (auto& e : model.trans0) e = read_entry(r);
  model.label_l = read_mask(r, N0 * P);
  if (!r.at_end()) throw CorruptFileError("trailing bytes");

  if (model.config_digest() != digest) throw CorruptFileError("embedded digest mismatch");
  return model;
}

SymbolicModel load_model_checked(const std::string& path, std::uint64_t expected_digest) {
  SymbolicModel model = load_model(path);
  if (model.config_digest() != expected_digest)
    throw StaleModelError("model file was built from a different configuration");
  return model;
}

void save_synthesis(const SynthesisResult& synth, std::uint64_t model_digest,
                    const std::string& path) {
  Writer w(path);
  w.bytes(kSynthMagic, 8);
  w.u64(model_digest);
  write_mask(w, synth.safety.winning);
  w.u64(synth.safety.policy.size());
  for (const auto& pairs : synth.safety.policy) {
    w.u32(static_cast<std::uint32_t>(pairs.size()));
    for (std::int32_t p : pairs) w.i32(p);
  }
  write_mask(w, synth.reach.winning);
  write_mask(w, synth.reach.winning0);
  w.i32(synth.reach.init_rank);
  w.u64(synth.reach.rank.size());
  for (std::int32_t v : synth.reach.rank) w.i32(v);
  for (const PolicyTable* table : {&synth.reach.policy, &synth.reach.policy0}) {
    w.u64(table->size());
    for (const auto& pairs : *table) {
      w.u32(static_cast<std::uint32_t>(pairs.size()));
      for (std::int32_t p : pairs) w.i32(p);
    }
  }
  w.close();
}

SynthesisResult load_synthesis(const std::string& path, std::uint64_t model_digest,
                               std::size_t n_states) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kSynthMagic, 8) != 0)
    throw CorruptFileError("not a synthesis artifact file");
  if (r.u64() != model_digest)
    throw StaleModelError("synthesis artifacts belong to a different model");

  SynthesisResult synth;
  auto read_policy = [&](PolicyTable& table) {
    if (r.u64() != n_states) throw CorruptFileError("policy table size mismatch");
    table.resize(n_states);
    for (auto& pairs : table) {
      const std::uint32_t n = r.u32();
      if (n > 4096) throw CorruptFileError("implausible policy size");
      pairs.resize(n);
      for (auto& p : pairs) p = r.i32();
    }
  };
  synth.safety.winning = read_mask(r, n_states);
  read_policy(synth.safety.policy);
  synth.reach.winning = read_mask(r, n_states);
  synth.reach.winning0 = read_mask(r, n_states);
  synth.reach.init_rank = r.i32();
  if (r.u64() != n_states) throw CorruptFileError("rank table size mismatch");
  synth.reach.rank.resize(n_states);
  for (auto& v : synth.reach.rank) v = r.i32();
  read_policy(synth.reach.policy);
  read_policy(synth.reach.policy0);
  if (!r.at_end()) throw CorruptFileError("trailing bytes");
  return synth;
}

}  // namespace sirsynth
