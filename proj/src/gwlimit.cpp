#include "msb/gwlimit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "msb/laplace.hpp"

namespace msb {

GW1Model build_gw1(double rate, const std::vector<double>& offspring, std::size_t k) {
  if (k == 0) throw ValidationError("build_gw1: k must be >= 1");
  if (!(rate > 0.0)) throw ValidationError("build_gw1: rate must be > 0");
  validate_offspring(offspring);
  GW1Model model;
  model.k = k;
  model.gamma_k = rate * static_cast<double>(k);
  const double kk = static_cast<double>(k);
  model.offspring.assign(std::max<std::size_t>(offspring.size(), 2), 0.0);
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    model.offspring[i] = i == 1 ? (offspring[1] - 1.0) / kk + 1.0 : offspring[i] / kk;
  }
  if (offspring.size() < 2) model.offspring[1] = 1.0 - 1.0 / kk;
  return model;
}

double gw1_generator(const GW1Model& model, double z) {
  return model.gamma_k * (pgf(model.offspring, z) - z);
}

std::size_t gw_generations(double gamma_k, double t) {
  if (!(t >= 0.0)) throw DomainError("t must be >= 0");
  return static_cast<std::size_t>(std::floor(gamma_k * t * (1.0 + 1e-12)));
}

double gw1_flow(const GW1Model& model, double z, double t) {
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("gw1_flow: z must lie in [0, 1]");
  const std::size_t n = gw_generations(model.gamma_k, t);
  double f = z;
  for (std::size_t i = 0; i < n; ++i) f = pgf(model.offspring, f);
  return f;
}

double OffspringMixture::weight_sum() const {
  double s = 0.0;
  for (const auto& c : components) s += c.weight;
  return s;
}

std::vector<Outcome> OffspringMixture::flatten() const {
  std::map<std::pair<std::int64_t, std::int64_t>, double> acc;
  for (const auto& c : components) {
    for (const auto& o : c.outcomes) acc[{o.d1, o.d2}] += c.weight * o.prob;
  }
  std::vector<Outcome> out;
  for (const auto& [key, p] : acc) {
    if (p > 0.0) out.push_back({key.first, key.second, p});
  }
  return out;
}

double OffspringMixture::pgf(double x1, double x2) const {
  double s = 0.0;
  for (const auto& c : components) {
    for (const auto& o : c.outcomes) {
      s += c.weight * o.prob * std::pow(x1, static_cast<double>(o.d1)) *
           std::pow(x2, static_cast<double>(o.d2));
    }
  }
  return s;
}

namespace {

std::int64_t scaled_count(double z1, double k) {
  return static_cast<std::int64_t>(std::llround(k * z1));
}

void push(OffspringMixture& g, std::string label, double gamma_part, std::vector<Outcome> outs) {
  if (gamma_part <= 0.0) return;
  g.components.push_back({std::move(label), gamma_part, std::move(outs)});
}

}  // namespace

GW2Model build_gw2(const BranchingMechanism& mech, std::size_t k) {
  if (k == 0) throw ValidationError("build_gw2: k must be >= 1");
  if (const auto v = validate_branching(mech); !v.empty()) {
    throw ValidationError("build_gw2: invalid mechanism: " + v.front().message);
  }
  if (mech.a11 < 0.0) {
    throw UnsupportedError("build_gw2: a11 < 0 gives a negative mixture weight");
  }
  const double kk = static_cast<double>(k);
  const double cut = 1.0 / std::sqrt(kk);
  GW2Model model;
  model.k = k;

  // Type 1 (the continuous coordinate), unnormalized weights first.
  double death = mech.a11;
  double sigma = 0.0, mass_d = 0.0;
  std::vector<Outcome> jump_atoms;
  std::vector<std::pair<double, Outcome>> residual1;
  for (const auto& a : mech.n1.atoms) {
    if (a.z1 > cut) {
      sigma += a.weight * (a.z1 - 1.0 / kk);
      mass_d += a.weight;
      jump_atoms.push_back({scaled_count(a.z1, kk), a.z2, a.weight});
    } else {
      const std::int64_t m = scaled_count(a.z1, kk);
      residual1.push_back({a.weight / kk, Outcome{1 + m, a.z2, 1.0}});
      death += a.weight * static_cast<double>(m) / kk;
    }
  }
  const double quad = (2.0 * mech.alpha + 1.0) * kk;
  const double c = mech.alpha / (2.0 * mech.alpha + 1.0);
  const double gamma3 = sigma + mass_d / kk + 1.0;
  std::vector<Outcome> g3;
  for (const auto& o : jump_atoms) g3.push_back({o.d1, o.d2, o.prob / (kk * gamma3)});
  g3.push_back({1, 0, 1.0 / gamma3});
  g3.push_back({0, 0, sigma / gamma3});
  double gamma_tilde = death + quad + gamma3;
  for (const auto& r : residual1) gamma_tilde += r.first;

  // Type 2 (the integer coordinate).
  const double birth = mech.a21 * kk;
  double jump2 = 0.0, resid2 = 0.0;
  std::vector<Outcome> j2, r2;
  for (const auto& a : mech.n2.atoms) {
    const Outcome o{scaled_count(a.z1, kk), a.z2 + 1, a.weight};
    if (a.z1 > cut) {
      jump2 += a.weight;
      j2.push_back(o);
    } else {
      resid2 += a.weight;
      r2.push_back(o);
    }
  }
  for (auto& o : j2) o.prob /= jump2;
  for (auto& o : r2) o.prob /= resid2;
  const double gamma_bar = birth + jump2 + resid2;

  model.gamma_k = gamma_tilde + gamma_bar;
  const double g = model.gamma_k;
  push(model.g1, "death", death / g, {{0, 0, 1.0}});
  push(model.g1, "quadratic", quad / g, {{0, 0, c}, {1, 0, 1.0 - 2.0 * c}, {2, 0, c}});
  push(model.g1, "jump", gamma3 / g, g3);
  for (std::size_t i = 0; i < residual1.size(); ++i) {
    push(model.g1, "small-jump", residual1[i].first / g, {residual1[i].second});
  }
  push(model.g1, "copy", gamma_bar / g, {{1, 0, 1.0}});

  push(model.g2, "birth", birth / g, {{1, 1, 1.0}});
  push(model.g2, "jump", jump2 / g, j2);
  push(model.g2, "small-jump", resid2 / g, r2);
  push(model.g2, "idle", gamma_tilde / g, {{0, 1, 1.0}});

  for (const auto* mix : {&model.g1, &model.g2}) {
    if (std::fabs(mix->weight_sum() - 1.0) > 1e-12) {
      throw NumericError("build_gw2: mixture weights do not sum to 1");
    }
  }
  model.flat1 = model.g1.flatten();
  model.flat2 = model.g2.flatten();
  return model;
}

namespace {

/// Adds the children of `count` individuals with law `flat` via sequential
/// conditional binomials (exact multinomial draw).
bool spawn(const std::vector<Outcome>& flat, std::int64_t count, Philox& rng, GWState& out) {
  std::uint64_t left = static_cast<std::uint64_t>(count);
  double mass = 1.0;
  for (std::size_t j = 0; j < flat.size() && left > 0; ++j) {
    std::uint64_t c;
    if (j + 1 == flat.size() || flat[j].prob >= mass) {
      c = left;
    } else {
      c = rng.binomial(left, flat[j].prob / mass);
    }
    left -= c;
    mass -= flat[j].prob;
    const auto cc = static_cast<std::int64_t>(c);
    if (flat[j].d1 > 0 && cc > (kPopulationCap - out[0]) / flat[j].d1) return false;
    if (flat[j].d2 > 0 && cc > (kPopulationCap - out[1]) / flat[j].d2) return false;
    out[0] += cc * flat[j].d1;
    out[1] += cc * flat[j].d2;
  }
  return true;
}

}  // namespace

bool gw2_generation(const GW2Model& model, GWState& state, Philox& rng) {
  GWState next{0, 0};
  if (!spawn(model.flat1, state[0], rng, next) || !spawn(model.flat2, state[1], rng, next) ||
      next[0] + next[1] > kPopulationCap) {
    return false;
  }
  state = next;
  return true;
}

GWPath simulate_gw2(const GW2Model& model, GWState x0, std::size_t steps, Philox& rng) {
  if (x0[0] < 0 || x0[1] < 0) throw ValidationError("simulate_gw2: negative initial population");
  GWPath path;
  path.states.reserve(steps + 1);
  path.states.push_back(x0);
  GWState s = x0;
  for (std::size_t i = 0; i < steps; ++i) {
    if (!gw2_generation(model, s, rng)) {
      path.truncated = true;
      break;
    }
    path.states.push_back(s);
  }
  return path;
}

namespace {

std::vector<GWState> terminal_states(const GW2Model& model, MixedState x, double t,
                                     const GWRunOptions& opt) {
  if (opt.replicas < 1) throw ValidationError("replicas must be >= 1");
  const std::size_t n = gw_generations(model.gamma_k, t);
  const GWState x0{static_cast<std::int64_t>(std::floor(static_cast<double>(model.k) * x.y1)), x.y2};
  std::vector<GWState> out(opt.replicas);
  parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
    Philox rng = stream(opt.seed, i);
    GWState s = x0;
    for (std::size_t g = 0; g < n; ++g) {
      if (!gw2_generation(model, s, rng)) break;
    }
    out[i] = s;
  });
  return out;
}

Estimate stats_of(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

}  // namespace

Estimate rescaled_laplace_gw(const GW2Model& model, MixedState x, Vec2 lambda, double t,
                             const GWRunOptions& opt) {
  require_nonneg(lambda, "rescaled_laplace_gw");
  const auto states = terminal_states(model, x, t, opt);
  const double kk = static_cast<double>(model.k);
  std::vector<double> v(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    v[i] = std::exp(-lambda.x1 * static_cast<double>(states[i][0]) / kk -
                    lambda.x2 * static_cast<double>(states[i][1]));
  }
  return stats_of(v);
}

std::pair<Estimate, Estimate> rescaled_mean_gw(const GW2Model& model, MixedState x, double t,
                                               const GWRunOptions& opt) {
  const auto states = terminal_states(model, x, t, opt);
  const double kk = static_cast<double>(model.k);
  std::vector<double> a(states.size()), b(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    a[i] = static_cast<double>(states[i][0]) / kk;
    b[i] = static_cast<double>(states[i][1]);
  }
  return {stats_of(a), stats_of(b)};
}

std::vector<ConvergenceRow> convergence_report(const BranchingMechanism& mech, MixedState x,
                                               Vec2 lambda, double t,
                                               const std::vector<std::size_t>& k_list,
                                               const GWRunOptions& opt) {
  if (!std::is_sorted(k_list.begin(), k_list.end())) {
    throw ValidationError("convergence_report: k_list must be increasing");
  }
  const double continuum = transition_laplace(mech, x, lambda, t);
  std::vector<ConvergenceRow> rows;
  for (std::size_t j = 0; j < k_list.size(); ++j) {
    const GW2Model model = build_gw2(mech, k_list[j]);
    GWRunOptions o = opt;
    o.seed = opt.seed + j;
    const Estimate e = rescaled_laplace_gw(model, x, lambda, t, o);
    rows.push_back({k_list[j], e.mean, continuum, std::fabs(e.mean - continuum), e.std_error});
  }
  return rows;
}

std::string to_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "k,estimate,continuum,abs_error,stderr\n";
  for (const auto& r : rows) {
    os << r.k << ',' << r.estimate << ',' << r.continuum << ',' << r.abs_error << ','
       << r.std_error << '\n';
  }
  return os.str();
}

std::vector<ConvergenceRow> gw1_convergence(double rate, const std::vector<double>& offspring,
                                            double z, double t,
                                            const std::vector<std::size_t>& k_list) {
  const double exact = db_flow(rate, offspring, z, t, 1e-4).final_value();
  std::vector<ConvergenceRow> rows;
  for (std::size_t k : k_list) {
    const double fk = gw1_flow(build_gw1(rate, offspring, k), z, t);
    rows.push_back({k, fk, exact, std::fabs(fk - exact), 0.0});
  }
  return rows;
}

}  // namespace msb
