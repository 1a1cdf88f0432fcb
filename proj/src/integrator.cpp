#include "cpn/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace cpn {
namespace {

constexpr double kBoundSlack = 1e-12;

void check_sim_config(const SimConfig& cfg) {
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
    throw ConfigError("simulate: horizon must be positive and finite");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
    throw ConfigError("simulate: dt must be positive and finite");
  if (cfg.population < 1)
    throw ConfigError("simulate: population must be >= 1");
  if (!(cfg.divergence_threshold > 0.0))
    throw ConfigError("simulate: divergence threshold must be positive");
}

void check_entity_range(std::uint32_t offset, std::size_t n) {
  const std::uint64_t last =
      static_cast<std::uint64_t>(offset) + static_cast<std::uint64_t>(n) - 1;
  if (last >= kAuxEntity)
    throw ConfigError("simulate: entity range reaches the reserved aux id");
  if (offset < kRefEntityBase && last >= kRefEntityBase)
    throw ConfigError(
        "simulate: population crosses into the reference entity block");
}

void check_divergence(std::span<const double> states, double t, double cap) {
  for (double v : states)
    if (!std::isfinite(v) || std::abs(v) > cap)
      throw NumericalDivergence(
          "state exceeded " + std::to_string(cap) + " at t=" + std::to_string(t),
          t);
}

// One Euler increment over [t, t + h): x += (b - compensator) h + sigma dW.
// The scratch buffers keep the per-particle loop allocation-free.
struct EulerScratch {
  std::vector<double> b, sig, comp, dw, col;
  EulerScratch(int d, int k)
      : b(static_cast<std::size_t>(d)),
        sig(static_cast<std::size_t>(d) * static_cast<std::size_t>(k)),
        comp(static_cast<std::size_t>(d)),
        dw(static_cast<std::size_t>(k)),
        col(static_cast<std::size_t>(d)) {}
};

void euler_advance(const CoefficientSet& model, double t, double h,
                   const EmpiricalMeasure& nu, std::span<double> x,
                   double bias, EulerScratch& s) {
  const int d = model.dims.d, k = model.dims.k;
  model.drift(t, nu, x, s.b);
  if (bias != 0.0) s.b[0] += bias;
  model.diffusion(t, nu, x, s.sig);
  if (model.jump_compensator)
    model.jump_compensator(t, nu, x, s.comp);
  else
    std::fill(s.comp.begin(), s.comp.end(), 0.0);
  for (int c = 0; c < d; ++c) {
    double acc = x[static_cast<std::size_t>(c)] +
                 (s.b[static_cast<std::size_t>(c)] -
                  s.comp[static_cast<std::size_t>(c)]) * h;
    for (int w = 0; w < k; ++w)
      acc += s.sig[static_cast<std::size_t>(c * k + w)] *
             s.dw[static_cast<std::size_t>(w)];
    x[static_cast<std::size_t>(c)] = acc;
  }
}

EmpiricalMeasure measure_of(const TrajectorySet& traj, std::size_t g) {
  const std::size_t block =
      traj.population * static_cast<std::size_t>(traj.d);
  std::vector<double> atoms(traj.states.begin() + static_cast<std::ptrdiff_t>(g * block),
                            traj.states.begin() + static_cast<std::ptrdiff_t>((g + 1) * block));
  return EmpiricalMeasure(std::move(atoms), traj.d);
}

}  // namespace

std::span<const double> TrajectorySet::left_state(std::size_t g,
                                                  std::size_t i) const {
  if (is_jump[g]) {
    // First jump record at this grid point holds the post-drift states.
    auto it = std::lower_bound(jumps.begin(), jumps.end(), g,
                               [](const JumpRecord& r, std::size_t gg) {
                                 return r.grid_index < gg;
                               });
    if (it != jumps.end() && it->grid_index == g) {
      const auto dd = static_cast<std::size_t>(d);
      return {it->pre_states.data() + i * dd, dd};
    }
  }
  return state(g, i);
}

std::size_t TrajectorySet::grid_index(double t) const {
  auto it = std::lower_bound(grid.begin(), grid.end(), t);
  if (it == grid.end() || *it != t)
    throw InputError("TrajectorySet: " + std::to_string(t) + " is not a grid time");
  return static_cast<std::size_t>(it - grid.begin());
}

std::vector<double> build_grid(double horizon, double dt,
                               const BasePointField& base) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InputError("build_grid: horizon must be positive and finite");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw InputError("build_grid: dt must be positive and finite");
  if (base.horizon < horizon)
    throw InputError("build_grid: base field horizon shorter than the run");

  const long long steps = std::max(1ll, std::llround(horizon / dt));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (long long g = 0; g <= steps; ++g)
    grid.push_back(g == steps ? horizon
                              : horizon * static_cast<double>(g) /
                                    static_cast<double>(steps));
  for (const auto& comp : base.points)
    for (const auto& p : comp)
      if (p.time > 0.0 && p.time <= horizon) grid.push_back(p.time);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

BasePointField model_base_field(const CoefficientSet& model,
                                const SeedSpec& seeds,
                                std::uint32_t replication, double horizon) {
  return sample_base_field(seeds, replication, horizon, model.intensity.bound,
                           model.mark_law);
}

BrownianLattice BrownianLattice::generate(const SeedSpec& seeds,
                                          std::uint32_t replication,
                                          std::uint32_t entity_offset,
                                          std::size_t n, int k,
                                          std::span<const double> master_grid) {
  if (n < 1 || k < 1) throw InputError("BrownianLattice: need n >= 1, k >= 1");
  if (master_grid.size() < 2)
    throw InputError("BrownianLattice: master grid needs >= 2 points");
  check_entity_range(entity_offset, n);

  BrownianLattice lat;
  lat.times_.assign(master_grid.begin(), master_grid.end());
  lat.n_ = n;
  lat.k_ = k;
  const std::size_t intervals = lat.times_.size() - 1;
  lat.table_.resize(n * intervals * static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    auto stream = derive_stream(
        seeds, {replication, entity_offset + static_cast<std::uint32_t>(i),
                Purpose::brownian});
    const auto inc = brownian_increments(stream, master_grid, k);
    std::copy(inc.begin(), inc.end(),
              lat.table_.begin() +
                  static_cast<std::ptrdiff_t>(i * intervals *
                                              static_cast<std::size_t>(k)));
  }
  return lat;
}

std::size_t BrownianLattice::index_of(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t)
    throw InputError("BrownianLattice: " + std::to_string(t) +
                     " is not a lattice time");
  return static_cast<std::size_t>(it - times_.begin());
}

void BrownianLattice::increment(std::size_t particle, double a, double b,
                                std::span<double> out) const {
  if (particle >= n_) throw InputError("BrownianLattice: particle out of range");
  if (out.size() != static_cast<std::size_t>(k_))
    throw InputError("BrownianLattice: output size mismatch");
  const std::size_t ia = index_of(a), ib = index_of(b);
  if (ia >= ib) throw InputError("BrownianLattice: need a < b");
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t intervals = times_.size() - 1;
  const std::size_t kk = static_cast<std::size_t>(k_);
  const double* row = table_.data() + particle * intervals * kk;
  for (std::size_t g = ia; g < ib; ++g)
    for (std::size_t c = 0; c < kk; ++c) out[c] += row[g * kk + c];
}

TrajectorySet simulate_finite_system(const CoefficientSet& model,
                                     const SimConfig& cfg,
                                     const BasePointField& base,
                                     const BrownianLattice* lattice) {
  check_sim_config(cfg);
  const int d = model.dims.d, k = model.dims.k;
  if (model.init.dim() != d)
    throw ConfigError("simulate: init dimension differs from the model state");
  if (base.dims() != model.dims.l)
    throw InputError("simulate: base field dimension differs from the model");
  const std::size_t n = cfg.population;
  check_entity_range(cfg.entity_offset, n);

  TrajectorySet out;
  out.grid = build_grid(cfg.horizon, cfg.dt, base);
  out.population = n;
  out.d = d;
  const std::size_t G = out.grid.size();
  const std::size_t block = n * static_cast<std::size_t>(d);
  out.states.assign(G * block, 0.0);
  out.is_jump.assign(G, 0);

  for (std::size_t i = 0; i < n; ++i) {
    auto stream = derive_stream(
        cfg.seeds, {cfg.replication,
                    cfg.entity_offset + static_cast<std::uint32_t>(i),
                    Purpose::init});
    model.init.sample(stream, {out.states.data() + i * static_cast<std::size_t>(d),
                               static_cast<std::size_t>(d)});
  }

  std::vector<RandomStream> wstreams;
  if (!lattice) {
    wstreams.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      wstreams.push_back(derive_stream(
          cfg.seeds, {cfg.replication,
                      cfg.entity_offset + static_cast<std::uint32_t>(i),
                      Purpose::brownian}));
  }

  std::vector<EmpiricalMeasure> measures;
  measures.reserve(G);
  measures.push_back(measure_of(out, 0));

  const auto candidates = base.merged();
  std::size_t cursor = 0;
  while (cursor < candidates.size() && candidates[cursor].time <= 0.0) ++cursor;

  EulerScratch scratch(d, k);
  for (std::size_t g = 0; g + 1 < G; ++g) {
    const double t = out.grid[g];
    const double t1 = out.grid[g + 1];
    const double h = t1 - t;
    const double sqh = std::sqrt(h);
    const EmpiricalMeasure& nu = measures[g];

    double* cur = out.states.data() + g * block;
    double* nxt = out.states.data() + (g + 1) * block;
    std::copy(cur, cur + block, nxt);
    for (std::size_t i = 0; i < n; ++i) {
      if (lattice) {
        lattice->increment(i, t, t1, scratch.dw);
      } else {
        for (int c = 0; c < k; ++c)
          scratch.dw[static_cast<std::size_t>(c)] = sqh * wstreams[i].normal();
      }
      const double bias =
          cfg.bias.particle >= 0 &&
                  static_cast<std::size_t>(cfg.bias.particle) == i
              ? cfg.bias.value
              : 0.0;
      euler_advance(model, t, h, nu,
                    {nxt + i * static_cast<std::size_t>(d),
                     static_cast<std::size_t>(d)},
                    bias, scratch);
    }

    while (cursor < candidates.size() && candidates[cursor].time == t1) {
      const auto& c = candidates[cursor];
      const BasePoint& p =
          base.points[static_cast<std::size_t>(c.dim)][c.index];
      const double lam = checked_intensity(
          model.intensity, t1, nu, p.mark, c.dim,
          base.height_bound[static_cast<std::size_t>(c.dim)]);
      if (p.height <= lam) {
        JumpRecord rec{g + 1, c.dim, p.mark, p.height, c.index, {}};
        rec.pre_states.assign(nxt, nxt + block);
        for (std::size_t i = 0; i < n; ++i) {
          model.jump(t1, nu, p.mark, c.dim,
                     {rec.pre_states.data() + i * static_cast<std::size_t>(d),
                      static_cast<std::size_t>(d)},
                     scratch.col);
          for (int cc = 0; cc < d; ++cc)
            nxt[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(cc)] +=
                scratch.col[static_cast<std::size_t>(cc)];
        }
        out.is_jump[g + 1] = 1;
        out.jumps.push_back(std::move(rec));
      }
      ++cursor;
    }

    check_divergence({nxt, block}, t1, cfg.divergence_threshold);
    measures.push_back(measure_of(out, g + 1));
  }

  out.path = MeasurePath(out.grid, std::move(measures));
  return out;
}

TrajectorySet simulate_reference(const CoefficientSet& model,
                                 const SimConfig& cfg, std::size_t n_ref,
                                 const BasePointField& base) {
  if (cfg.entity_offset >= kRefEntityBase)
    throw ConfigError("simulate_reference: entity offset already in the reference block");
  SimConfig rcfg = cfg;
  rcfg.population = n_ref;
  rcfg.entity_offset = kRefEntityBase;
  rcfg.bias = {};
  return simulate_finite_system(model, rcfg, base);
}

TrajectorySet simulate_conditioned_particle(const CoefficientSet& model,
                                            const SimConfig& cfg,
                                            const BasePointField& base,
                                            const MeasurePath& env,
                                            std::uint32_t particle) {
  check_sim_config(cfg);
  const int d = model.dims.d, k = model.dims.k;
  if (model.init.dim() != d)
    throw ConfigError("simulate: init dimension differs from the model state");
  if (base.dims() != model.dims.l)
    throw InputError("simulate: base field dimension differs from the model");
  check_entity_range(cfg.entity_offset + particle, 1);
  if (env.segment(0).dim() != d)
    throw InputError("simulate: environment dimension differs from the model");

  const std::uint32_t entity = cfg.entity_offset + particle;

  TrajectorySet out;
  out.grid = build_grid(cfg.horizon, cfg.dt, base);
  out.population = 1;
  out.d = d;
  const std::size_t G = out.grid.size();
  const std::size_t dd = static_cast<std::size_t>(d);
  out.states.assign(G * dd, 0.0);
  out.is_jump.assign(G, 0);

  {
    auto stream =
        derive_stream(cfg.seeds, {cfg.replication, entity, Purpose::init});
    model.init.sample(stream, {out.states.data(), dd});
  }
  auto wstream =
      derive_stream(cfg.seeds, {cfg.replication, entity, Purpose::brownian});

  // Acceptance against the frozen environment comes from the standalone
  // thinning, so integrator and thin() agree by construction.
  const AcceptedJumps accepted = thin(base, model.intensity, env);
  std::vector<std::vector<char>> keep(static_cast<std::size_t>(base.dims()));
  for (int j = 0; j < base.dims(); ++j) {
    keep[static_cast<std::size_t>(j)].assign(
        base.points[static_cast<std::size_t>(j)].size(), 0);
    for (const auto& aj : accepted.jumps[static_cast<std::size_t>(j)])
      keep[static_cast<std::size_t>(j)][aj.base_index] = 1;
  }

  std::vector<EmpiricalMeasure> measures;
  measures.reserve(G);
  measures.push_back(measure_of(out, 0));

  const auto candidates = base.merged();
  std::size_t cursor = 0;
  while (cursor < candidates.size() && candidates[cursor].time <= 0.0) ++cursor;

  EulerScratch scratch(d, k);
  for (std::size_t g = 0; g + 1 < G; ++g) {
    const double t = out.grid[g];
    const double t1 = out.grid[g + 1];
    const double h = t1 - t;
    const double sqh = std::sqrt(h);
    const EmpiricalMeasure& nu = env.value_at(t);

    double* cur = out.states.data() + g * dd;
    double* nxt = out.states.data() + (g + 1) * dd;
    std::copy(cur, cur + dd, nxt);
    for (int c = 0; c < k; ++c)
      scratch.dw[static_cast<std::size_t>(c)] = sqh * wstream.normal();
    euler_advance(model, t, h, nu, {nxt, dd}, 0.0, scratch);

    while (cursor < candidates.size() && candidates[cursor].time == t1) {
      const auto& c = candidates[cursor];
      if (keep[static_cast<std::size_t>(c.dim)][c.index]) {
        const BasePoint& p =
            base.points[static_cast<std::size_t>(c.dim)][c.index];
        const EmpiricalMeasure& nu_jump = env.left_limit(t1);
        JumpRecord rec{g + 1, c.dim, p.mark, p.height, c.index, {}};
        rec.pre_states.assign(nxt, nxt + dd);
        model.jump(t1, nu_jump, p.mark, c.dim, {rec.pre_states.data(), dd},
                   scratch.col);
        for (int cc = 0; cc < d; ++cc)
          nxt[static_cast<std::size_t>(cc)] += scratch.col[static_cast<std::size_t>(cc)];
        out.is_jump[g + 1] = 1;
        out.jumps.push_back(std::move(rec));
      }
      ++cursor;
    }

    check_divergence({nxt, dd}, t1, cfg.divergence_threshold);
    measures.push_back(measure_of(out, g + 1));
  }

  out.path = MeasurePath(out.grid, std::move(measures));
  return out;
}

BasePointField regime_base_field(const RegimeSpec& spec, const SeedSpec& seeds,
                                 std::uint32_t replication, double horizon) {
  if (spec.n_states() < 2)
    throw InputError("regime_base_field: need at least two states");
  if (!(spec.exit_bound > 0.0))
    throw InputError("regime_base_field: exit bound must be positive");
  const double span = spec.mark_span();
  const std::array<double, 1> bounds{1.0};
  const std::array<QSampler, 1> laws{
      QSampler::uniform_range(0.0, span, span)};
  return sample_base_field(seeds, replication, horizon, bounds, laws);
}

namespace {

void check_generator(std::span<const double> gen, int ns, double exit_bound,
                     double t) {
  const std::size_t n = static_cast<std::size_t>(ns);
  double scale = 1.0;
  for (double v : gen) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, exit = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double q = gen[i * n + j];
      if (!std::isfinite(q))
        throw IntensityBoundViolation(
            "regime generator produced a non-finite rate at t=" +
                std::to_string(t),
            t);
      if (i != j) {
        if (q < 0.0)
          throw IntensityBoundViolation(
              "regime generator produced a negative off-diagonal rate at t=" +
                  std::to_string(t),
              t);
        exit += q;
      }
      row += q;
    }
    if (std::abs(row) > 1e-12 * scale)
      throw IntensityBoundViolation(
          "regime generator row does not sum to zero at t=" + std::to_string(t),
          t);
    if (exit > exit_bound * (1.0 + kBoundSlack) + kBoundSlack)
      throw IntensityBoundViolation(
          "regime exit rate " + std::to_string(exit) +
              " exceeds the declared bound " + std::to_string(exit_bound) +
              " at t=" + std::to_string(t),
          t);
  }
}

}  // namespace

RegimeTrajectory simulate_regime_switching(const RegimeModel& model,
                                           const SimConfig& cfg,
                                           const BasePointField& base) {
  check_sim_config(cfg);
  const int d = model.d;
  if (model.init.dim() != d)
    throw ConfigError("simulate: init dimension differs from the model state");
  if (base.dims() != 1)
    throw InputError("regime: base field must be one-dimensional");
  const int ns = model.regime.n_states();
  if (model.initial_state < 0 || model.initial_state >= ns)
    throw ConfigError("regime: initial state out of range");
  if (base.q_mass[0] < model.regime.mark_span() * (1.0 - kBoundSlack))
    throw InputError("regime: base field mark mass does not cover the interval layout");
  const std::size_t n = cfg.population;
  check_entity_range(cfg.entity_offset, n);

  RegimeTrajectory out;
  TrajectorySet& traj = out.particles;
  traj.grid = build_grid(cfg.horizon, cfg.dt, base);
  traj.population = n;
  traj.d = d;
  const std::size_t G = traj.grid.size();
  const std::size_t dd = static_cast<std::size_t>(d);
  const std::size_t block = n * dd;
  traj.states.assign(G * block, 0.0);
  traj.is_jump.assign(G, 0);
  out.regime_state.assign(G, model.initial_state);

  for (std::size_t i = 0; i < n; ++i) {
    auto stream = derive_stream(
        cfg.seeds, {cfg.replication,
                    cfg.entity_offset + static_cast<std::uint32_t>(i),
                    Purpose::init});
    model.init.sample(stream, {traj.states.data() + i * dd, dd});
  }
  std::vector<RandomStream> wstreams;
  wstreams.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    wstreams.push_back(derive_stream(
        cfg.seeds, {cfg.replication,
                    cfg.entity_offset + static_cast<std::uint32_t>(i),
                    Purpose::brownian}));

  std::vector<EmpiricalMeasure> measures;
  measures.reserve(G);
  measures.push_back(measure_of(traj, 0));

  const auto candidates = base.merged();
  std::size_t cursor = 0;
  while (cursor < candidates.size() && candidates[cursor].time <= 0.0) ++cursor;

  int state = model.initial_state;
  std::vector<double> b(dd), gen(static_cast<std::size_t>(ns) * static_cast<std::size_t>(ns));
  for (std::size_t g = 0; g + 1 < G; ++g) {
    const double t = traj.grid[g];
    const double t1 = traj.grid[g + 1];
    const double h = t1 - t;
    const double sqh = std::sqrt(h);
    const EmpiricalMeasure& nu = measures[g];

    double* cur = traj.states.data() + g * block;
    double* nxt = traj.states.data() + (g + 1) * block;
    std::copy(cur, cur + block, nxt);
    for (std::size_t i = 0; i < n; ++i) {
      model.drift(t, nu, {nxt + i * dd, dd}, state, b);
      for (std::size_t c = 0; c < dd; ++c)
        nxt[i * dd + c] += b[c] * h + model.vol * sqh * wstreams[i].normal();
    }

    while (cursor < candidates.size() && candidates[cursor].time == t1) {
      const BasePoint& p = base.points[0][candidates[cursor].index];
      model.regime.generator(nu, gen);
      check_generator(gen, ns, model.regime.exit_bound, t1);
      const auto intervals = regime_intervals(gen, ns);
      int target = -1;
      for (const auto& iv : intervals)
        if (iv.from == state && p.mark[0] >= iv.lo && p.mark[0] < iv.hi) {
          target = iv.to;
          break;
        }
      // Indicator thinning: the intensity is 1 on the current state's
      // acceptance intervals and 0 elsewhere, heights are uniform on [0, 1).
      if (target >= 0 && p.height <= 1.0) {
        state = target;
        out.switches.emplace_back(t1, state);
      }
      ++cursor;
    }
    out.regime_state[g + 1] = state;

    check_divergence({nxt, block}, t1, cfg.divergence_threshold);
    measures.push_back(measure_of(traj, g + 1));
  }

  traj.path = MeasurePath(traj.grid, std::move(measures));
  return out;
}

}  // namespace cpn
