#include "cpn/cli.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "cpn/chaos.hpp"
#include "cpn/output.hpp"
#include "cpn/parallel.hpp"
#include "cpn/validators.hpp"

namespace cpn {
namespace {

using json = nlohmann::ordered_json;

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json init_echo(const InitSpec& init) {
  const char* kind = init.kind == InitSpec::Kind::point
                         ? "point"
                         : init.kind == InitSpec::Kind::gaussian ? "gaussian"
                                                                 : "uniform";
  return json{{"kind", kind}, {"a", init.a}, {"b", init.b}};
}

json config_echo(const ExperimentConfig& cfg) {
  json model{{"name", cfg.model_name}};
  if (cfg.model_name == "systemic_risk") {
    model["mean_reversion"] = cfg.systemic.mean_reversion;
    model["vol"] = cfg.systemic.vol;
    model["jump_scale"] = cfg.systemic.jump_scale;
    model["lambda0"] = cfg.systemic.lambda0;
    model["lambda1"] = cfg.systemic.lambda1;
    model["lambda_bar"] = cfg.systemic.lambda_bar;
    model["init"] = init_echo(cfg.init);
  } else if (cfg.model_name == "regime") {
    model["q12"] = cfg.q12;
    model["q21"] = cfg.q21;
    model["state1"] = cfg.state1;
    model["state2"] = cfg.state2;
    model["initial_state"] = cfg.initial_state;
    model["mean_reversion"] = cfg.mean_reversion;
    model["vol"] = cfg.regime_vol;
    model["init"] = init_echo(cfg.init);
  } else {
    model["d"] = cfg.dims.d;
    model["k"] = cfg.dims.k;
    model["l"] = cfg.dims.l;
  }
  json sim{{"horizon", cfg.horizon},
           {"dt", cfg.dt},
           {"population", cfg.population},
           {"n_grid", cfg.n_grid},
           {"n_ref", cfg.n_ref},
           {"replications", cfg.replications},
           {"coupled", cfg.coupled},
           {"w2_times", cfg.w2_times},
           {"threads", cfg.threads}};
  json seeds{{"common", hex64(cfg.seeds.common)},
             {"idiosyncratic", hex64(cfg.seeds.idiosyncratic)},
             {"init_on_common", cfg.seeds.init_on_common}};
  json output{{"dir", cfg.out_dir},
              {"trajectories", cfg.trajectories},
              {"max_particles", cfg.max_particles}};
  return json{{"model", model},
              {"sim", sim},
              {"seeds", seeds},
              {"output", output}};
}

json manifest_json(const OutputWriter& writer, std::uint64_t config_hash,
                   const SeedSpec& seeds) {
  json files = json::array();
  for (const ManifestEntry& e : writer.entries())
    files.push_back(json{{"name", e.name},
                         {"fnv1a64", hex64(e.checksum)},
                         {"bytes", e.bytes}});
  return json{{"config_hash", hex64(config_hash)},
              {"version", kArtifactVersion},
              {"seeds",
               json{{"common", hex64(seeds.common)},
                    {"idiosyncratic", hex64(seeds.idiosyncratic)},
                    {"init_on_common", seeds.init_on_common}}},
              {"wall_clock_utc", utc_now()},
              {"files", files}};
}

void write_summary(OutputWriter& writer, const std::string& command,
                   const ExperimentConfig& cfg, std::uint64_t config_hash,
                   const json& results) {
  json doc{{"command", command},
           {"config", config_echo(cfg)},
           {"results", results},
           {"manifest", manifest_json(writer, config_hash, cfg.seeds)}};
  writer.write_text("summary.json", doc.dump(2) + "\n");
}

SimConfig sim_config(const ExperimentConfig& cfg, std::uint32_t replication) {
  SimConfig sc;
  sc.horizon = cfg.horizon;
  sc.dt = cfg.dt;
  sc.population = cfg.population;
  sc.seeds = cfg.seeds;
  sc.replication = replication;
  return sc;
}

CouplingParams coupling_params(const ExperimentConfig& cfg) {
  CouplingParams p;
  p.population = cfg.population;
  p.n_ref = cfg.n_ref;
  p.replications = cfg.replications;
  p.coupled = cfg.coupled;
  p.w2_times = cfg.w2_times;
  p.horizon = cfg.horizon;
  p.dt = cfg.dt;
  p.seeds = cfg.seeds;
  p.threads = cfg.threads;
  return p;
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg, std::uint64_t config_hash) {
  if (cfg.model_name == "regime")
    throw ConfigError("simulate: regime models use the regime command");
  const CoefficientSet model = build_model(cfg);

  std::vector<TrajectorySet> runs(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    const auto rep = static_cast<std::uint32_t>(r);
    const BasePointField base =
        model_base_field(model, cfg.seeds, rep, cfg.horizon);
    runs[r] = simulate_finite_system(model, sim_config(cfg, rep), base);
  });

  OutputWriter writer(cfg.out_dir);
  if (cfg.trajectories)
    writer.write_text("trajectory.csv",
                      trajectory_csv(runs, cfg.max_particles));

  std::size_t total_jumps = 0;
  std::vector<double> terminal_mean(static_cast<std::size_t>(model.dims.d));
  for (const TrajectorySet& run : runs) {
    total_jumps += run.jumps.size();
    const std::size_t last = run.grid.size() - 1;
    for (std::size_t i = 0; i < run.population; ++i) {
      const auto x = run.state(last, i);
      for (std::size_t c = 0; c < x.size(); ++c) terminal_mean[c] += x[c];
    }
  }
  const double count =
      static_cast<double>(cfg.replications * cfg.population);
  for (double& v : terminal_mean) v /= count;

  write_summary(writer, "simulate", cfg, config_hash,
                json{{"replications", cfg.replications},
                     {"population", cfg.population},
                     {"accepted_jumps", total_jumps},
                     {"terminal_mean", terminal_mean}});
  return 0;
}

int cmd_couple(const ExperimentConfig& cfg, std::uint64_t config_hash) {
  const CoefficientSet model = build_model(cfg);
  const CouplingResult res =
      run_synchronous_coupling(model, coupling_params(cfg));

  OutputWriter writer(cfg.out_dir);
  writer.write_text("coupling.csv",
                    coupling_csv(res, cfg.population, cfg.replications));
  write_summary(writer, "couple", cfg, config_hash,
                json{{"path_err_sq", res.path_err_sq},
                     {"path_err_se", res.path_err_se},
                     {"w2_err_sq", res.w2_err_sq},
                     {"w2_err_se", res.w2_err_se},
                     {"w2_argmax_time", res.w2_argmax_time}});
  return 0;
}

int cmd_study(const ExperimentConfig& cfg, std::uint64_t config_hash) {
  const CoefficientSet model = build_model(cfg);
  const ConvergenceStudy study =
      convergence_study(model, coupling_params(cfg), cfg.n_grid);

  OutputWriter writer(cfg.out_dir);
  writer.write_text("study.csv", study_csv(study));

  json slopes;
  slopes["path"] = study.slope_path_defined ? json(study.slope_path)
                                            : json(nullptr);
  slopes["w2"] =
      study.slope_w2_defined ? json(study.slope_w2) : json(nullptr);
  if (study.slope_path_defined)
    slopes["path_se"] = study.path_fit.slope_se;
  if (study.slope_w2_defined) slopes["w2_se"] = study.w2_fit.slope_se;
  write_summary(writer, "study", cfg, config_hash,
                json{{"rows", study.rows.size()}, {"slopes", slopes}});
  return 0;
}

int cmd_regime(const ExperimentConfig& cfg, std::uint64_t config_hash) {
  const RegimeModel model = build_regime_model(cfg);
  std::vector<RegimeTrajectory> runs(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    const auto rep = static_cast<std::uint32_t>(r);
    const BasePointField base =
        regime_base_field(model.regime, cfg.seeds, rep, cfg.horizon);
    runs[r] = simulate_regime_switching(model, sim_config(cfg, rep), base);
  });

  const int n_states = model.regime.n_states();
  std::vector<double> occupation(static_cast<std::size_t>(n_states), 0.0);
  std::vector<double> transitions(
      static_cast<std::size_t>(n_states * n_states), 0.0);
  for (const RegimeTrajectory& run : runs) {
    int state = run.regime_state.empty() ? 0 : run.regime_state.front();
    double t = 0.0;
    for (const auto& [time, next] : run.switches) {
      occupation[static_cast<std::size_t>(state)] += time - t;
      transitions[static_cast<std::size_t>(state * n_states + next)] += 1.0;
      state = next;
      t = time;
    }
    occupation[static_cast<std::size_t>(state)] += cfg.horizon - t;
  }
  const double total_time = cfg.horizon * static_cast<double>(cfg.replications);

  json rates = json::array();
  for (int i = 0; i < n_states; ++i)
    for (int j = 0; j < n_states; ++j) {
      if (i == j) continue;
      const double time_in = occupation[static_cast<std::size_t>(i)];
      const double count =
          transitions[static_cast<std::size_t>(i * n_states + j)];
      rates.push_back(json{{"from", i + 1},
                           {"to", j + 1},
                           {"count", count},
                           {"rate", time_in > 0.0 ? count / time_in : 0.0}});
    }
  json occ = json::array();
  for (int s = 0; s < n_states; ++s)
    occ.push_back(occupation[static_cast<std::size_t>(s)] / total_time);

  OutputWriter writer(cfg.out_dir);
  writer.write_text("regime.csv", regime_csv(runs));
  if (cfg.trajectories) {
    std::vector<TrajectorySet> particles;
    particles.reserve(runs.size());
    for (RegimeTrajectory& run : runs)
      particles.push_back(std::move(run.particles));
    writer.write_text("trajectory.csv",
                      trajectory_csv(particles, cfg.max_particles));
  }
  write_summary(writer, "regime", cfg, config_hash,
                json{{"occupation", occ}, {"transitions", rates}});
  return 0;
}

int cmd_validate(const ExperimentConfig& cfg, std::uint64_t config_hash) {
  const CoefficientSet model = build_model(cfg);
  auto rng = derive_stream(cfg.seeds, {0, kAuxEntity, Purpose::aux});
  const std::size_t samples = 512;
  const std::size_t mark_budget = 4096;

  ValidatorReport reports[3] = {
      validate_lipschitz(model, samples, mark_budget, rng),
      validate_growth(model, samples, mark_budget, rng),
      validate_fourth_moment(model, samples, mark_budget, rng)};

  bool all_pass = true;
  json out = json::array();
  for (const ValidatorReport& rep : reports) {
    all_pass = all_pass && rep.pass;
    json j{{"name", rep.name},
           {"pass", rep.pass},
           {"max_ratio", rep.max_ratio},
           {"threshold", rep.threshold}};
    if (!rep.detail.empty()) j["detail"] = rep.detail;
    if (rep.declared > 0.0) {
      j["estimate"] = rep.estimate;
      j["se"] = rep.se;
      j["declared"] = rep.declared;
    }
    out.push_back(j);
    std::fprintf(stderr, "%s: %s (max ratio %.6g)\n", rep.name.c_str(),
                 rep.pass ? "PASS" : "FAIL", rep.max_ratio);
  }

  OutputWriter writer(cfg.out_dir);
  write_summary(writer, "validate", cfg, config_hash,
                json{{"pass", all_pass}, {"checks", out}});
  return all_pass ? 0 : 1;
}

int run_cli(const CliOptions& opts) {
  try {
    if (opts.config_path.empty())
      throw ConfigError("cli: --config is required");
    std::ifstream in(opts.config_path, std::ios::binary);
    if (!in) throw ConfigError("cli: cannot open " + opts.config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const std::uint64_t config_hash = fnv1a64(text);

    ExperimentConfig cfg = parse_config_text(text);
    if (opts.has_seed_common) cfg.seeds.common = opts.seed_common;
    if (opts.has_seed_idio) cfg.seeds.idiosyncratic = opts.seed_idio;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.threads > 0) cfg.threads = opts.threads;

    if (opts.command == "simulate") return cmd_simulate(cfg, config_hash);
    if (opts.command == "couple") return cmd_couple(cfg, config_hash);
    if (opts.command == "study") return cmd_study(cfg, config_hash);
    if (opts.command == "regime") return cmd_regime(cfg, config_hash);
    if (opts.command == "validate") return cmd_validate(cfg, config_hash);
    throw ConfigError("cli: unknown command \"" + opts.command + "\"");
  } catch (const IntensityBoundViolation& e) {
    std::fprintf(stderr, "intensity bound violation at t = %.17g: %s\n",
                 e.time, e.what());
    return 1;
  } catch (const NumericalDivergence& e) {
    std::fprintf(stderr, "numerical divergence at t = %.17g: %s\n", e.time,
                 e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const InputError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
}

}  // namespace cpn
