#include "cpn/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpn/parallel.hpp"

namespace cpn {
namespace {

void check_params(const CouplingParams& p) {
  if (p.population < 1) throw ConfigError("coupling: population must be >= 1");
  if (p.n_ref < 2) throw ConfigError("coupling: n_ref must be >= 2");
  if (p.replications < 2)
    throw ConfigError("coupling: replications must be >= 2");
  if (p.replications > kMaxReplication)
    throw ConfigError("coupling: too many replications");
  if (p.coupled < 1) throw ConfigError("coupling: coupled must be >= 1");
  if (p.w2_times < 1) throw ConfigError("coupling: w2_times must be >= 1");
  if (!(p.horizon > 0.0) || !(p.dt > 0.0))
    throw ConfigError("coupling: horizon and dt must be positive");
}

SimConfig base_config(const CouplingParams& p, std::uint32_t replication) {
  SimConfig cfg;
  cfg.horizon = p.horizon;
  cfg.dt = p.dt;
  cfg.population = 1;
  cfg.seeds = p.seeds;
  cfg.replication = replication;
  return cfg;
}

std::vector<double> eval_times(const CouplingParams& p) {
  std::vector<double> ts;
  ts.reserve(p.w2_times + 1);
  for (std::size_t j = 0; j <= p.w2_times; ++j)
    ts.push_back(j == p.w2_times
                     ? p.horizon
                     : p.horizon * static_cast<double>(j) /
                           static_cast<double>(p.w2_times));
  return ts;
}

double sup_sq_gap(const TrajectorySet& fin, std::size_t i,
                  const TrajectorySet& cond) {
  if (fin.grid.size() != cond.grid.size())
    throw InputError("coupling: finite and conditioned grids differ");
  double worst = 0.0;
  for (std::size_t g = 0; g < fin.grid.size(); ++g) {
    const auto a = fin.state(g, i);
    const auto b = cond.state(g, 0);
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double d = a[c] - b[c];
      s += d * d;
    }
    worst = std::max(worst, s);
  }
  return worst;
}

// Everything one replication contributes to every row of a study.
struct RepSlot {
  std::vector<double> path_mean;            // per row
  std::vector<std::vector<double>> w2sq;    // per row, per eval time
};

struct RawStudy {
  std::vector<double> times;
  std::vector<RepSlot> reps;
};

RawStudy run_raw_study(const CoefficientSet& model, const CouplingParams& p,
                       std::span<const std::size_t> n_grid) {
  check_params(p);
  if (n_grid.empty()) throw ConfigError("coupling: empty population grid");
  for (std::size_t n : n_grid) {
    if (n < 1) throw ConfigError("coupling: population sizes must be >= 1");
    if (n > p.n_ref)
      throw ConfigError("coupling: population exceeds the reference size");
  }

  RawStudy raw;
  raw.times = eval_times(p);
  raw.reps.assign(p.replications, {});

  parallel_for(p.replications, p.threads, [&](std::size_t r) {
    const auto rep = static_cast<std::uint32_t>(r);
    const SimConfig cfg = base_config(p, rep);
    const BasePointField base =
        model_base_field(model, p.seeds, rep, p.horizon);

    MeasurePath proxy;
    {
      TrajectorySet ref = simulate_reference(model, cfg, p.n_ref, base);
      proxy = std::move(ref.path);
    }

    // Conditioned particles are n-independent; reuse them for every row.
    std::vector<TrajectorySet> cond;
    cond.reserve(p.coupled);
    for (std::size_t i = 0; i < p.coupled; ++i)
      cond.push_back(simulate_conditioned_particle(
          model, cfg, base, proxy, static_cast<std::uint32_t>(i)));

    RepSlot& slot = raw.reps[r];
    slot.path_mean.assign(n_grid.size(), 0.0);
    slot.w2sq.assign(n_grid.size(),
                     std::vector<double>(raw.times.size(), 0.0));
    for (std::size_t row = 0; row < n_grid.size(); ++row) {
      SimConfig fcfg = cfg;
      fcfg.population = n_grid[row];
      const TrajectorySet fin = simulate_finite_system(model, fcfg, base);

      const std::size_t coupled = std::min(p.coupled, n_grid[row]);
      double acc = 0.0;
      for (std::size_t i = 0; i < coupled; ++i)
        acc += sup_sq_gap(fin, i, cond[i]);
      slot.path_mean[row] = acc / static_cast<double>(coupled);

      // Fresh stream per row so the order of the grid cannot matter; only
      // the subsample fallback of w2_population ever draws from it.
      auto aux = derive_stream(p.seeds, {rep, kAuxEntity, Purpose::aux});
      for (std::size_t ti = 0; ti < raw.times.size(); ++ti) {
        const double w = w2_population(fin.path.value_at(raw.times[ti]),
                                       proxy.value_at(raw.times[ti]),
                                       kAssignmentCap, &aux);
        slot.w2sq[row][ti] = w * w;
      }
    }
  });
  return raw;
}

StudyRow reduce_row(const RawStudy& raw, std::size_t row, std::size_t n,
                    double* argmax_time, std::vector<double>* path_col,
                    std::vector<double>* w2_col) {
  const std::size_t R = raw.reps.size();
  std::vector<double> path(R);
  for (std::size_t r = 0; r < R; ++r) path[r] = raw.reps[r].path_mean[row];
  const MeanVar pv = mean_var(path);

  std::size_t best = 0;
  double best_mean = -1.0;
  std::vector<double> column(R);
  for (std::size_t ti = 0; ti < raw.times.size(); ++ti) {
    double s = 0.0;
    for (std::size_t r = 0; r < R; ++r) s += raw.reps[r].w2sq[row][ti];
    const double m = s / static_cast<double>(R);
    if (m > best_mean) {
      best_mean = m;
      best = ti;
    }
  }
  for (std::size_t r = 0; r < R; ++r) column[r] = raw.reps[r].w2sq[row][best];
  const MeanVar wv = mean_var(column);
  if (argmax_time) *argmax_time = raw.times[best];
  if (path_col) *path_col = std::move(path);
  if (w2_col) *w2_col = std::move(column);

  StudyRow out;
  out.n = n;
  out.replications = R;
  out.path_err_sq = pv.mean;
  out.path_err_se = pv.se;
  out.w2_err_sq = wv.mean;
  out.w2_err_se = wv.se;
  return out;
}

}  // namespace

CouplingResult run_synchronous_coupling(const CoefficientSet& model,
                                        const CouplingParams& p) {
  if (p.coupled > p.population)
    throw ConfigError("coupling: more coupled particles than the population");
  const std::size_t grid[1] = {p.population};
  const RawStudy raw = run_raw_study(model, p, grid);
  CouplingResult out;
  double argmax = 0.0;
  const StudyRow row = reduce_row(raw, 0, p.population, &argmax, nullptr,
                                  nullptr);
  out.path_err_sq = row.path_err_sq;
  out.path_err_se = row.path_err_se;
  out.w2_err_sq = row.w2_err_sq;
  out.w2_err_se = row.w2_err_se;
  out.w2_argmax_time = argmax;
  return out;
}

ConvergenceStudy convergence_study(const CoefficientSet& model,
                                   const CouplingParams& p,
                                   std::span<const std::size_t> n_grid) {
  if (n_grid.empty()) throw ConfigError("study: empty population grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw ConfigError("study: population grid must be strictly increasing");
  if (n_grid.back() > p.n_ref / 4)
    throw ConfigError(
        "study: largest population must be at most a quarter of n_ref");

  const RawStudy raw = run_raw_study(model, p, n_grid);
  ConvergenceStudy out;
  out.horizon = p.horizon;
  out.rows.reserve(n_grid.size());
  out.per_rep_path.resize(n_grid.size());
  out.per_rep_w2.resize(n_grid.size());
  for (std::size_t row = 0; row < n_grid.size(); ++row)
    out.rows.push_back(reduce_row(raw, row, n_grid[row], nullptr,
                                  &out.per_rep_path[row],
                                  &out.per_rep_w2[row]));

  std::vector<double> log_n, log_path, log_w2;
  bool path_ok = true, w2_ok = true;
  for (const StudyRow& row : out.rows) {
    log_n.push_back(std::log(static_cast<double>(row.n)));
    path_ok = path_ok && row.path_err_sq > 0.0;
    w2_ok = w2_ok && row.w2_err_sq > 0.0;
    log_path.push_back(row.path_err_sq > 0.0 ? std::log(row.path_err_sq)
                                             : 0.0);
    log_w2.push_back(row.w2_err_sq > 0.0 ? std::log(row.w2_err_sq) : 0.0);
  }
  if (out.rows.size() >= 3 && path_ok) {
    out.path_fit = fit_line(log_n, log_path);
    out.slope_path = out.path_fit.slope;
    out.slope_path_defined = true;
  }
  if (out.rows.size() >= 3 && w2_ok) {
    out.w2_fit = fit_line(log_n, log_w2);
    out.slope_w2 = out.w2_fit.slope;
    out.slope_w2_defined = true;
  }
  return out;
}

ExchangeabilityResult test_exchangeability(const CoefficientSet& model,
                                           const CouplingParams& p,
                                           bool use_path_sup, DriftBias bias) {
  check_params(p);
  if (p.population < 2)
    throw ConfigError("exchangeability: population must be >= 2");
  if (p.replications < 100)
    throw ConfigError("exchangeability: need at least 100 replications");

  std::vector<double> a(p.replications), b(p.replications);
  parallel_for(p.replications, p.threads, [&](std::size_t r) {
    SimConfig cfg = base_config(p, static_cast<std::uint32_t>(r));
    cfg.population = p.population;
    cfg.bias = bias;
    const BasePointField base = model_base_field(
        model, p.seeds, static_cast<std::uint32_t>(r), p.horizon);
    const TrajectorySet fin = simulate_finite_system(model, cfg, base);
    auto stat = [&](std::size_t i) {
      if (!use_path_sup) return fin.state(fin.grid.size() - 1, i)[0];
      double worst = 0.0;
      for (std::size_t g = 0; g < fin.grid.size(); ++g)
        worst = std::max(worst, std::abs(fin.state(g, i)[0]));
      return worst;
    };
    a[r] = stat(0);
    b[r] = stat(1);
  });

  ExchangeabilityResult out;
  out.ks_p = ks_two_sample_p(a, b, &out.ks_stat);
  std::vector<double> diff(p.replications);
  for (std::size_t r = 0; r < p.replications; ++r) diff[r] = a[r] - b[r];
  out.wilcoxon_p = wilcoxon_signed_rank_p(diff);
  out.pass = out.ks_p > out.threshold && out.wilcoxon_p > out.threshold;
  return out;
}

CondIndepResult test_conditional_independence(
    const CoefficientSet& model, const CouplingParams& p,
    bool expect_unconditional_positive) {
  check_params(p);
  if (p.replications < 32)
    throw ConfigError(
        "conditional independence: need >= 32 common-noise draws");
  if (p.coupled < 256)
    throw ConfigError("conditional independence: need >= 256 pairs");
  const std::size_t pairs = p.coupled;
  const std::size_t R = p.replications;

  std::vector<std::vector<double>> A(R), B(R);
  std::vector<double> within(R), half_w2(R);
  parallel_for(R, p.threads, [&](std::size_t r) {
    const auto rep = static_cast<std::uint32_t>(r);
    const SimConfig cfg = base_config(p, rep);
    const BasePointField base =
        model_base_field(model, p.seeds, rep, p.horizon);
    MeasurePath proxy;
    {
      TrajectorySet ref = simulate_reference(model, cfg, p.n_ref, base);
      proxy = std::move(ref.path);
    }
    A[r].resize(pairs);
    B[r].resize(pairs);
    for (std::size_t m = 0; m < 2 * pairs; ++m) {
      const TrajectorySet cond = simulate_conditioned_particle(
          model, cfg, base, proxy, static_cast<std::uint32_t>(m));
      const double v = cond.state(cond.grid.size() - 1, 0)[0];
      if (m < pairs)
        A[r][m] = v;
      else
        B[r][m - pairs] = v;
    }
    within[r] = pearson_correlation(A[r], B[r]);
    const double h =
        w2_exact(EmpiricalMeasure(A[r], 1), EmpiricalMeasure(B[r], 1));
    half_w2[r] = h * h;
  });

  // Pooled moments over every conditioned particle.
  double gm_a = 0.0, gm_b = 0.0;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t m = 0; m < pairs; ++m) {
      gm_a += A[r][m];
      gm_b += B[r][m];
    }
  const double total = static_cast<double>(R * pairs);
  gm_a /= total;
  gm_b /= total;
  double gv_a = 0.0, gv_b = 0.0;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t m = 0; m < pairs; ++m) {
      gv_a += (A[r][m] - gm_a) * (A[r][m] - gm_a);
      gv_b += (B[r][m] - gm_b) * (B[r][m] - gm_b);
    }
  gv_a /= total;
  gv_b /= total;
  const double norm = std::sqrt(gv_a * gv_b);

  std::vector<double> uncond(R);
  for (std::size_t r = 0; r < R; ++r) {
    double s = 0.0;
    for (std::size_t m = 0; m < pairs; ++m)
      s += (A[r][m] - gm_a) * (B[r][m] - gm_b);
    uncond[r] = norm > 0.0 ? s / (static_cast<double>(pairs) * norm) : 0.0;
  }

  CondIndepResult out;
  const MeanVar wv = mean_var(within);
  const MeanVar uv = mean_var(uncond);
  const MeanVar hv = mean_var(half_w2);
  out.within_corr_mean = wv.mean;
  out.within_corr_se = wv.se;
  out.uncond_cov_mean = uv.mean;
  out.uncond_cov_se = uv.se;
  out.half_w2_sq_mean = hv.mean;
  out.expect_unconditional = expect_unconditional_positive;
  out.pass_conditional = std::abs(wv.mean) <= 3.0 * wv.se;
  out.pass_unconditional = expect_unconditional_positive
                               ? uv.mean > 3.0 * uv.se
                               : std::abs(uv.mean) <= 3.0 * uv.se;
  out.pass = out.pass_conditional && out.pass_unconditional;
  return out;
}

GronwallEnvelope::GronwallEnvelope(double eps_) : eps(eps_) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw InputError("GronwallEnvelope: eps must be positive and finite");
}

double GronwallEnvelope::G(double u) const {
  if (!(u >= 0.0)) throw InputError("GronwallEnvelope: G needs u >= 0");
  return 2.0 * std::log(std::sqrt(u) + 1.0) -
         2.0 * std::log(std::sqrt(eps) + 1.0);
}

double GronwallEnvelope::Ginv(double y) const {
  const double root = (std::sqrt(eps) + 1.0) * std::exp(0.5 * y) - 1.0;
  return root * root;
}

double GronwallEnvelope::envelope(double a, double kt) const {
  if (!(a == 0.0 || a >= eps))
    throw InputError("GronwallEnvelope: a must be 0 or at least eps");
  if (!(kt >= 0.0)) throw InputError("GronwallEnvelope: need k t >= 0");
  return Ginv(G(a) + kt);
}

double gronwall_envelope(double a, double k, double t, double eps) {
  if (!(k > 0.0)) throw InputError("gronwall_envelope: k must be positive");
  if (!(t >= 0.0)) throw InputError("gronwall_envelope: t must be >= 0");
  return GronwallEnvelope(eps).envelope(a, k * t);
}

EnvelopeReport envelope_check(const ConvergenceStudy& study, double k,
                              double eps) {
  if (study.rows.empty()) throw InputError("envelope_check: empty study");
  if (!(k > 0.0)) throw InputError("envelope_check: k must be positive");
  if (!(study.horizon > 0.0))
    throw InputError("envelope_check: study carries no horizon");
  const GronwallEnvelope env(eps);
  EnvelopeReport rep;
  rep.k = k;
  rep.eps = eps;
  rep.within = true;
  for (const StudyRow& row : study.rows) {
    EnvelopeRow er;
    er.n = row.n;
    er.path_err_sq = row.path_err_sq;
    const double w = row.w2_err_sq;
    double a = k * study.horizon * (w + std::sqrt(w));
    if (a > 0.0 && a < eps) a = eps;  // lift into the envelope's domain
    er.a = a;
    er.bound = env.envelope(a, k * study.horizon);
    if (er.bound > 0.0)
      er.ratio = er.path_err_sq / er.bound;
    else
      er.ratio = er.path_err_sq > 0.0
                     ? std::numeric_limits<double>::infinity()
                     : 0.0;
    er.within = er.path_err_sq <= er.bound;
    rep.within = rep.within && er.within;
    rep.max_ratio = std::max(rep.max_ratio, er.ratio);
    rep.rows.push_back(er);
  }
  return rep;
}

}  // namespace cpn
