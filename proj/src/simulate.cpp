#include "msb/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "msb/io.hpp"
#include "msb/ode.hpp"

namespace msb {

const char* to_string(JumpSource s) {
  switch (s) {
    case JumpSource::kN1: return "jump:n1";
    case JumpSource::kN2: return "jump:n2";
    case JumpSource::kImmigration: return "jump:imm";
  }
  return "jump";
}

std::string PathRecord::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,y1,y2,event\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << times[i] << ',' << states[i].y1 << ',' << states[i].y2 << ','
       << (kinds[i] ? to_string(*kinds[i]) : "step") << '\n';
  }
  return os.str();
}

std::string EnsembleSample::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "replica,y1,y2\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << i << ',' << rows[i].y1 << ',' << rows[i].y2 << '\n';
  }
  return os.str();
}

std::string EnsembleSample::sidecar_json() const {
  const nlohmann::json j = {{"seed", seed},
                            {"t", t},
                            {"dt", dt},
                            {"replicas", rows.size()},
                            {"config_digest", config_digest},
                            {"steps", stats.steps},
                            {"jumps", stats.jumps},
                            {"rejected_jumps", stats.rejected_jumps},
                            {"clamped_steps", stats.clamped_steps},
                            {"positivity_violations", stats.positivity_violations}};
  return j.dump(2) + "\n";
}

namespace {

struct Scheme {
  const BranchingMechanism& mech;
  const ImmigrationMechanism* imm;
  double n1_mass = 0.0;
  double n2_mass = 0.0;
  double m_mass = 0.0;
  double n1_z1 = 0.0;  ///< compensator int z1 n1
  double b = 0.0;

  Scheme(const BranchingMechanism& m, const ImmigrationMechanism* i) : mech(m), imm(i) {
    n1_mass = m.n1.total_mass();
    n2_mass = m.n2.total_mass();
    n1_z1 = m.n1.moment_z1();
    if (imm) {
      m_mass = imm->m.total_mass();
      b = imm->b;
    }
  }
};

struct PendingJump {
  double u;
  JumpSource source;
  std::size_t atom;
};

/// Picks an atom with probability proportional to its frozen rate.
PendingJump attribute(const Scheme& s, double y1, std::int64_t y2, double total, double u_time,
                      Philox& rng) {
  double target = rng.uniform() * total;
  const double f1 = y1, f2 = static_cast<double>(y2);
  const auto& a1 = s.mech.n1.atoms;
  for (std::size_t j = 0; j < a1.size(); ++j) {
    target -= f1 * a1[j].weight;
    if (target < 0.0) return {u_time, JumpSource::kN1, j};
  }
  const auto& a2 = s.mech.n2.atoms;
  for (std::size_t j = 0; j < a2.size(); ++j) {
    target -= f2 * a2[j].weight;
    if (target < 0.0) return {u_time, JumpSource::kN2, j};
  }
  if (s.imm) {
    const auto& am = s.imm->m.atoms;
    for (std::size_t j = 0; j < am.size(); ++j) {
      target -= am[j].weight;
      if (target < 0.0) return {u_time, JumpSource::kImmigration, j};
    }
  }
  // Round-off at the top of the cumulative sum: last positive-rate atom.
  if (s.imm && !s.imm->m.atoms.empty()) {
    return {u_time, JumpSource::kImmigration, s.imm->m.atoms.size() - 1};
  }
  if (y2 > 0 && !a2.empty()) return {u_time, JumpSource::kN2, a2.size() - 1};
  return {u_time, JumpSource::kN1, a1.empty() ? 0 : a1.size() - 1};
}

const LevyAtom& atom_of(const Scheme& s, const PendingJump& p) {
  switch (p.source) {
    case JumpSource::kN1: return s.mech.n1.atoms[p.atom];
    case JumpSource::kN2: return s.mech.n2.atoms[p.atom];
    default: return s.imm->m.atoms[p.atom];
  }
}

/// Observer hooks: start(t, y), jump(event, y_after), step(t, y, h), done().
template <class Observer>
void run_path(const Scheme& s, MixedState x0, double horizon, double dt, Philox& rng,
              SchemeStats& st, Observer& obs) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
  if (!x0.valid()) throw ValidationError("initial state must satisfy y1 >= 0, y2 >= 0");
  const UniformGrid grid = UniformGrid::cover(horizon, dt);
  const double h = grid.h;
  const double sqrt_h = std::sqrt(h);
  const BranchingMechanism& m = s.mech;
  double y1 = x0.y1;
  std::int64_t y2 = x0.y2;
  std::vector<PendingJump> pending;
  obs.start(0.0, x0);
  for (std::size_t i = 1; i <= grid.intervals; ++i) {
    const double t0 = grid.time(i - 1);
    const double total = y1 * s.n1_mass + static_cast<double>(y2) * s.n2_mass + s.m_mass;
    if (total * h > kMaxLeapMass) {
      std::ostringstream os;
      os << "jump rate * dt = " << total * h << " exceeds " << kMaxLeapMass << " at t = " << t0
         << "; reduce dt";
      throw NumericError(os.str());
    }
    double next = y1 + (-m.a11 * y1 + m.a21 * static_cast<double>(y2) - y1 * s.n1_z1 + s.b) * h;
    if (m.alpha > 0.0) next += std::sqrt(2.0 * m.alpha * std::max(y1, 0.0)) * sqrt_h * rng.normal();
    if (next < 0.0) {
      next = 0.0;
      ++st.clamped_steps;
    }
    const std::uint64_t count = rng.poisson(total * h);
    const double f1 = y1;
    const std::int64_t f2 = y2;
    y1 = next;
    if (count > 0) {
      pending.clear();
      for (std::uint64_t c = 0; c < count; ++c) {
        const double u = rng.uniform();
        pending.push_back(attribute(s, f1, f2, total, u, rng));
      }
      std::sort(pending.begin(), pending.end(),
                [](const PendingJump& a, const PendingJump& b) { return a.u < b.u; });
      for (const PendingJump& p : pending) {
        const LevyAtom& a = atom_of(s, p);
        if (y2 + a.z2 < 0) {
          ++st.rejected_jumps;
          continue;
        }
        y1 += a.z1;
        y2 += a.z2;
        ++st.jumps;
        obs.jump(JumpEvent{t0 + p.u * h, p.source, p.atom, a.z1, a.z2}, MixedState{y1, y2});
      }
    }
    ++st.steps;
    const MixedState state{y1, y2};
    if (!state.valid()) ++st.positivity_violations;
    obs.step(grid.time(i), state, h);
    if (obs.done()) break;
  }
}

struct RecordObserver {
  PathRecord& rec;
  void start(double t, MixedState y) {
    rec.times.push_back(t);
    rec.states.push_back(y);
    rec.kinds.emplace_back();
  }
  void jump(const JumpEvent& e, MixedState y) {
    rec.jumps.push_back(e);
    rec.times.push_back(e.time);
    rec.states.push_back(y);
    rec.kinds.emplace_back(e.source);
  }
  void step(double t, MixedState y, double) {
    rec.times.push_back(t);
    rec.states.push_back(y);
    rec.kinds.emplace_back();
  }
  bool done() const { return false; }
};

struct TerminalObserver {
  MixedState last;
  void start(double, MixedState y) { last = y; }
  void jump(const JumpEvent&, MixedState) {}
  void step(double, MixedState y, double) { last = y; }
  bool done() const { return false; }
};

struct FirstJumpObserver {
  Vec2 r;
  JumpCriterion criterion;
  double first = std::numeric_limits<double>::infinity();
  void start(double, MixedState) {}
  void jump(const JumpEvent& e, MixedState) {
    if (e.time < first && is_large_jump(e.dy1, e.dy2, r, criterion)) first = e.time;
  }
  void step(double, MixedState, double) {}
  bool done() const { return std::isfinite(first); }
};

struct IntegralObserver {
  Vec2 lambda;
  double integral = 0.0;
  double prev = 0.0;
  void start(double, MixedState y) { prev = dot(lambda, y.as_vec()); }
  void jump(const JumpEvent&, MixedState) {}
  void step(double, MixedState y, double h) {
    const double f = dot(lambda, y.as_vec());
    integral += 0.5 * h * (prev + f);
    prev = f;
  }
  bool done() const { return false; }
};

PathRecord simulate_path(const BranchingMechanism& mech, const ImmigrationMechanism* imm,
                         MixedState x0, double horizon, double dt, Philox& rng) {
  const Scheme s(mech, imm);
  PathRecord rec;
  RecordObserver obs{rec};
  SchemeStats st;
  run_path(s, x0, horizon, dt, rng, st, obs);
  rec.rejected_jumps = st.rejected_jumps;
  return rec;
}

Estimate mean_and_se(const std::vector<double>& v) {
  if (v.empty()) throw ValidationError("empty sample");
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

PathRecord simulate_msb(const BranchingMechanism& mech, MixedState x0, double horizon, double dt,
                        Philox& rng) {
  return simulate_path(mech, nullptr, x0, horizon, dt, rng);
}

PathRecord simulate_msbi(const BranchingMechanism& mech, const ImmigrationMechanism& imm,
                         MixedState x0, double horizon, double dt, Philox& rng) {
  return simulate_path(mech, &imm, x0, horizon, dt, rng);
}

MixedState terminal_state(const BranchingMechanism& mech, const ImmigrationMechanism* imm,
                          MixedState x0, double horizon, double dt, Philox& rng,
                          SchemeStats* stats) {
  const Scheme s(mech, imm);
  TerminalObserver obs;
  SchemeStats local;
  run_path(s, x0, horizon, dt, rng, stats ? *stats : local, obs);
  return obs.last;
}

EnsembleSample ensemble(const BranchingMechanism& mech, const ImmigrationMechanism* imm,
                        MixedState x0, double t, const EnsembleOptions& opt) {
  if (opt.replicas < 1) throw ValidationError("replicas must be >= 1");
  EnsembleSample out;
  out.seed = opt.seed;
  out.t = t;
  out.dt = opt.dt;
  nlohmann::json cfg = {{"branching", to_json(mech)}, {"x0", {x0.y1, x0.y2}}, {"t", t},
                        {"dt", opt.dt}, {"replicas", opt.replicas}};
  if (imm) cfg["immigration"] = to_json(*imm);
  out.config_digest = digest(cfg);
  out.rows.resize(opt.replicas);
  std::vector<SchemeStats> per(opt.replicas);
  const Scheme s(mech, imm);
  parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
    Philox rng = stream(opt.seed, i);
    TerminalObserver obs;
    run_path(s, x0, t, opt.dt, rng, per[i], obs);
    out.rows[i] = obs.last;
  });
  for (const auto& st : per) out.stats += st;
  return out;
}

Estimate empirical_laplace(const std::vector<MixedState>& rows, Vec2 lambda) {
  require_nonneg(lambda, "empirical_laplace");
  if (rows.empty()) throw ValidationError("empirical_laplace: empty sample");
  std::vector<double> v(rows.size());
  std::transform(rows.begin(), rows.end(), v.begin(),
                 [lambda](const MixedState& y) { return std::exp(-dot(lambda, y.as_vec())); });
  return mean_and_se(v);
}

Estimate empirical_laplace(const EnsembleSample& sample, Vec2 lambda) {
  return empirical_laplace(sample.rows, lambda);
}

std::pair<Estimate, Estimate> empirical_mean(const std::vector<MixedState>& rows) {
  std::vector<double> a(rows.size()), b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a[i] = rows[i].y1;
    b[i] = static_cast<double>(rows[i].y2);
  }
  return {mean_and_se(a), mean_and_se(b)};
}

std::optional<double> first_large_jump(const PathRecord& path, Vec2 r, JumpCriterion criterion) {
  for (const JumpEvent& e : path.jumps) {
    if (is_large_jump(e.dy1, e.dy2, r, criterion)) return e.time;
  }
  return std::nullopt;
}

std::vector<double> first_jump_times(const BranchingMechanism& mech, MixedState y, Vec2 r,
                                     double horizon, const EnsembleOptions& opt,
                                     JumpCriterion criterion, SchemeStats* stats) {
  if (opt.replicas < 1) throw ValidationError("replicas must be >= 1");
  std::vector<double> out(opt.replicas);
  std::vector<SchemeStats> per(opt.replicas);
  const Scheme s(mech, nullptr);
  parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
    Philox rng = stream(opt.seed, i);
    FirstJumpObserver obs{r, criterion};
    run_path(s, y, horizon, opt.dt, rng, per[i], obs);
    out[i] = obs.first;
  });
  if (stats) {
    for (const auto& st : per) *stats += st;
  }
  return out;
}

Estimate empirical_survival(const std::vector<double>& times, double t) {
  if (times.empty()) throw ValidationError("empirical_survival: empty sample");
  const double n = static_cast<double>(times.size());
  const double p =
      static_cast<double>(std::count_if(times.begin(), times.end(), [t](double s) { return s > t; })) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

Estimate integrated_functional_mc(const BranchingMechanism& mech, MixedState y, Vec2 lambda,
                                  double t, const EnsembleOptions& opt) {
  require_nonneg(lambda, "integrated_functional_mc");
  if (opt.replicas < 1) throw ValidationError("replicas must be >= 1");
  std::vector<double> v(opt.replicas);
  const Scheme s(mech, nullptr);
  parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
    Philox rng = stream(opt.seed, i);
    IntegralObserver obs{lambda};
    SchemeStats st;
    run_path(s, y, t, opt.dt, rng, st, obs);
    v[i] = std::exp(-obs.integral);
  });
  return mean_and_se(v);
}

}  // namespace msb
