#include "cpn/config.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cpn/errors.hpp"

namespace cpn {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct RawConfig {
  // section -> key -> value, plus the keys actually consumed by the schema
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::vector<std::string> violations;

  void fail(const std::string& msg) { violations.push_back(msg); }
};

const std::set<std::string> kSections = {"model", "sim", "seeds", "output"};

RawConfig read_lines(std::string_view text) {
  RawConfig raw;
  std::string section;
  bool section_known = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        raw.fail("line " + std::to_string(line_no) +
                 ": malformed section header");
        continue;
      }
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      section_known = kSections.count(section) > 0;
      if (!section_known)
        raw.fail("unknown section [" + section + "]");
      else if (!raw.sections.emplace(section, std::map<std::string, std::string>{}).second)
        raw.fail("duplicate section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      raw.fail("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    if (section.empty()) {
      raw.fail("line " + std::to_string(line_no) + ": key before any section");
      continue;
    }
    if (!section_known) continue;  // already reported the section itself
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) {
      raw.fail("line " + std::to_string(line_no) + ": empty key");
      continue;
    }
    auto& sec = raw.sections[section];
    if (!sec.emplace(key, value).second)
      raw.fail("duplicate key " + section + "." + key);
  }
  return raw;
}

// Typed views over one section. Every get_* consumes the key; leftovers are
// reported as unknown at the end.
class Section {
 public:
  Section(RawConfig& raw, std::string name)
      : raw_(raw), name_(std::move(name)) {
    auto it = raw.sections.find(name_);
    if (it != raw.sections.end()) entries_ = &it->second;
  }

  bool has(const std::string& key) const {
    return entries_ && entries_->count(key) > 0;
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  template <typename T, typename Parse>
  void get(const std::string& key, T& out, Parse parse,
           const char* expected) {
    if (!entries_) return;
    auto it = entries_->find(key);
    if (it == entries_->end()) return;
    consumed_.insert(key);
    if (!parse(it->second, out))
      raw_.fail(path(key) + ": expected " + expected + " (got \"" +
                it->second + "\")");
  }

  void get_double(const std::string& key, double& out) {
    get(key, out, parse_double, "a real number");
  }
  void get_count(const std::string& key, std::size_t& out) {
    get(key, out, parse_count, "a nonnegative integer");
  }
  void get_int(const std::string& key, int& out) {
    get(key, out, parse_int, "an integer");
  }
  void get_u64(const std::string& key, std::uint64_t& out) {
    get(key, out, parse_u64, "a 64-bit unsigned integer (decimal or 0x hex)");
  }
  void get_bool(const std::string& key, bool& out) {
    get(key, out, parse_bool, "true or false");
  }
  void get_string(const std::string& key, std::string& out) {
    get(key, out, parse_string, "a value");
  }
  void get_count_list(const std::string& key, std::vector<std::size_t>& out) {
    get(key, out, parse_count_list, "a comma-separated list of integers");
  }

  void finish() {
    if (!entries_) return;
    for (const auto& [key, value] : *entries_)
      if (!consumed_.count(key)) raw_.fail("unknown key " + path(key));
  }

  void fail(const std::string& key, const std::string& msg) {
    raw_.fail(path(key) + ": " + msg);
  }

 private:
  static bool parse_double(const std::string& s, double& out) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(v)) return false;
      out = v;
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }
  static bool parse_count(const std::string& s, std::size_t& out) {
    if (s.empty() || s[0] == '-' || s[0] == '+') return false;
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(s, &pos, 10);
      if (pos != s.size()) return false;
      out = static_cast<std::size_t>(v);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }
  static bool parse_int(const std::string& s, int& out) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(s, &pos, 10);
      if (pos != s.size() || v < INT_MIN || v > INT_MAX) return false;
      out = static_cast<int>(v);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }
  static bool parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s[0] == '-' || s[0] == '+') return false;
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(s, &pos, 0);
      if (pos != s.size()) return false;
      out = v;
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }
  static bool parse_bool(const std::string& s, bool& out) {
    if (s == "true") {
      out = true;
      return true;
    }
    if (s == "false") {
      out = false;
      return true;
    }
    return false;
  }
  static bool parse_string(const std::string& s, std::string& out) {
    if (s.empty()) return false;
    out = s;
    return true;
  }
  static bool parse_count_list(const std::string& s,
                               std::vector<std::size_t>& out) {
    std::vector<std::size_t> vals;
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto comma = s.find(',', start);
      const std::string part =
          trim(std::string_view(s).substr(start, comma == std::string::npos
                                                     ? std::string::npos
                                                     : comma - start));
      std::size_t v = 0;
      if (!parse_count(part, v)) return false;
      vals.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (vals.empty()) return false;
    out = std::move(vals);
    return true;
  }

  RawConfig& raw_;
  std::string name_;
  std::map<std::string, std::string>* entries_ = nullptr;
  std::set<std::string> consumed_;
};

InitSpec make_init(Section& model, RawConfig& raw) {
  std::string kind = "gaussian";
  double a = 0.0, b = 1.0;
  model.get_string("init_kind", kind);
  model.get_double("init_a", a);
  model.get_double("init_b", b);
  if (kind == "point") return InitSpec::point({a});
  if (kind == "gaussian") {
    if (!(b > 0.0)) {
      raw.fail("model.init_b: gaussian sd must be positive");
      b = 1.0;
    }
    return InitSpec::gaussian({a}, {b});
  }
  if (kind == "uniform") {
    if (!(a < b)) {
      raw.fail("model.init_b: uniform needs init_a < init_b");
      return InitSpec::uniform({0.0}, {1.0});
    }
    return InitSpec::uniform({a}, {b});
  }
  raw.fail("model.init_kind: expected point, gaussian or uniform (got \"" +
           kind + "\")");
  return InitSpec::gaussian({0.0}, {1.0});
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text) {
  RawConfig raw = read_lines(text);
  ExperimentConfig cfg;

  Section model(raw, "model");
  Section sim(raw, "sim");
  Section seeds(raw, "seeds");
  Section output(raw, "output");

  model.get_string("name", cfg.model_name);
  if (cfg.model_name.empty()) {
    raw.fail("model.name: required (zero, systemic_risk or regime)");
  } else if (cfg.model_name != "zero" && cfg.model_name != "systemic_risk" &&
             cfg.model_name != "regime") {
    raw.fail("model.name: expected zero, systemic_risk or regime (got \"" +
             cfg.model_name + "\")");
  }

  const bool systemic = cfg.model_name == "systemic_risk";
  const bool regime = cfg.model_name == "regime";

  // Keys that only exist for one model are unknown for the others; the
  // strict schema is per model name.
  if (systemic) {
    model.get_double("mean_reversion", cfg.systemic.mean_reversion);
    model.get_double("vol", cfg.systemic.vol);
    model.get_double("jump_scale", cfg.systemic.jump_scale);
    model.get_double("lambda0", cfg.systemic.lambda0);
    model.get_double("lambda1", cfg.systemic.lambda1);
    model.get_double("lambda_bar", cfg.systemic.lambda_bar);
    cfg.init = make_init(model, raw);
    if (!(cfg.systemic.mean_reversion >= 0.0))
      model.fail("mean_reversion", "must be nonnegative");
    if (!(cfg.systemic.vol >= 0.0)) model.fail("vol", "must be nonnegative");
    if (!(cfg.systemic.lambda0 >= 0.0))
      model.fail("lambda0", "must be nonnegative");
    if (!(cfg.systemic.lambda1 >= 0.0))
      model.fail("lambda1", "must be nonnegative");
    if (!(cfg.systemic.lambda_bar > 0.0))
      model.fail("lambda_bar", "must be positive");
    if (!std::isfinite(cfg.systemic.jump_scale))
      model.fail("jump_scale", "must be finite");
  } else if (regime) {
    model.get_double("q12", cfg.q12);
    model.get_double("q21", cfg.q21);
    model.get_double("state1", cfg.state1);
    model.get_double("state2", cfg.state2);
    model.get_int("initial_state", cfg.initial_state);
    model.get_double("mean_reversion", cfg.mean_reversion);
    model.get_double("vol", cfg.regime_vol);
    cfg.init = make_init(model, raw);
    if (!(cfg.q12 >= 0.0)) model.fail("q12", "must be nonnegative");
    if (!(cfg.q21 >= 0.0)) model.fail("q21", "must be nonnegative");
    if (cfg.initial_state != 1 && cfg.initial_state != 2)
      model.fail("initial_state", "must be 1 or 2");
    if (!(cfg.mean_reversion >= 0.0))
      model.fail("mean_reversion", "must be nonnegative");
    if (!(cfg.regime_vol >= 0.0)) model.fail("vol", "must be nonnegative");
  }
  model.finish();

  sim.get_double("horizon", cfg.horizon);
  sim.get_double("dt", cfg.dt);
  sim.get_count("population", cfg.population);
  sim.get_count_list("n_grid", cfg.n_grid);
  sim.get_count("n_ref", cfg.n_ref);
  sim.get_count("replications", cfg.replications);
  sim.get_count("coupled", cfg.coupled);
  sim.get_count("w2_times", cfg.w2_times);
  sim.get_count("threads", cfg.threads);
  if (cfg.model_name == "zero") {
    sim.get_int("d", cfg.dims.d);
    sim.get_int("k", cfg.dims.k);
    sim.get_int("l", cfg.dims.l);
    if (cfg.dims.d < 1 || cfg.dims.k < 1 || cfg.dims.l < 1)
      raw.fail("sim.d/k/l: dimensions must be >= 1");
  }
  sim.finish();

  if (!(cfg.horizon > 0.0)) raw.fail("sim.horizon: must be positive");
  if (sim.has("dt")) {
    if (!(cfg.dt > 0.0)) raw.fail("sim.dt: must be positive");
  } else if (cfg.horizon > 0.0) {
    cfg.dt = cfg.horizon / 1000.0;
  }
  if (cfg.dt > cfg.horizon && cfg.horizon > 0.0)
    raw.fail("sim.dt: must not exceed the horizon");
  if (cfg.population < 1) raw.fail("sim.population: must be >= 1");
  if (cfg.n_ref < 2) raw.fail("sim.n_ref: must be >= 2");
  if (cfg.replications < 1) raw.fail("sim.replications: must be >= 1");
  if (cfg.coupled < 1) raw.fail("sim.coupled: must be >= 1");
  if (cfg.w2_times < 1) raw.fail("sim.w2_times: must be >= 1");
  if (cfg.threads < 1) raw.fail("sim.threads: must be >= 1");
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] < 1) {
      raw.fail("sim.n_grid: entries must be >= 1");
      break;
    }
    if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1]) {
      raw.fail("sim.n_grid: must be strictly increasing");
      break;
    }
  }

  seeds.get_u64("common", cfg.seeds.common);
  seeds.get_u64("idiosyncratic", cfg.seeds.idiosyncratic);
  seeds.get_bool("init_on_common", cfg.seeds.init_on_common);
  seeds.finish();

  output.get_string("dir", cfg.out_dir);
  output.get_bool("trajectories", cfg.trajectories);
  output.get_count("max_particles", cfg.max_particles);
  output.finish();
  if (cfg.max_particles < 1) raw.fail("output.max_particles: must be >= 1");

  if (!raw.violations.empty()) {
    std::string msg = "config: " + std::to_string(raw.violations.size()) +
                      " violation(s)";
    for (const std::string& v : raw.violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

CoefficientSet build_model(const ExperimentConfig& cfg) {
  if (cfg.model_name == "zero") return build_zero(cfg.dims);
  if (cfg.model_name == "systemic_risk")
    return build_systemic_risk(cfg.systemic, cfg.init);
  throw ConfigError("build_model: model \"" + cfg.model_name +
                    "\" has no plain coefficient form");
}

RegimeModel build_regime_model(const ExperimentConfig& cfg) {
  if (cfg.model_name != "regime")
    throw ConfigError("build_regime_model: model is not \"regime\"");
  RegimeSpec spec = two_state_regime(cfg.q12, cfg.q21,
                                     {cfg.state1, cfg.state2});
  const double pull = cfg.mean_reversion;
  std::vector<double> values = spec.state_values;
  auto drift = [pull, values](double, const EmpiricalMeasure&,
                              std::span<const double> x, int state,
                              std::span<double> out) {
    for (std::size_t c = 0; c < out.size(); ++c)
      out[c] = pull * (values[static_cast<std::size_t>(state)] - x[c]);
  };
  return build_regime_switching(std::move(spec), drift, cfg.regime_vol,
                                cfg.init, cfg.initial_state - 1);
}

}  // namespace cpn
