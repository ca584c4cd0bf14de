#include "wlab/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "wlab/registry.hpp"

namespace wlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Entry {
  std::string key;
  std::string value;
  std::size_t line;
};

double to_double(const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || errno == ERANGE)
    throw ConfigError(e.key, e.line, "expected a number, got '" + e.value + "'");
  return v;
}

double to_finite(const Entry& e) {
  const double v = to_double(e);
  if (!std::isfinite(v)) throw ConfigError(e.key, e.line, "must be finite");
  return v;
}

double to_positive(const Entry& e) {
  const double v = to_finite(e);
  if (!(v > 0.0)) throw ConfigError(e.key, e.line, "must be > 0");
  return v;
}

std::uint64_t to_unsigned(const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  if (e.value.empty() || e.value[0] == '-')
    throw ConfigError(e.key, e.line, "expected a non-negative integer, got '" + e.value + "'");
  const unsigned long long v = std::strtoull(s, &end, 0);
  if (end == s || *end != '\0' || errno == ERANGE)
    throw ConfigError(e.key, e.line, "expected a non-negative integer, got '" + e.value + "'");
  return v;
}

std::size_t to_count(const Entry& e) {
  const auto v = to_unsigned(e);
  if (v == 0) throw ConfigError(e.key, e.line, "must be >= 1");
  return static_cast<std::size_t>(v);
}

std::vector<double> to_positive_list(const Entry& e) {
  std::vector<double> out;
  for (const auto& item : split_list(e.value)) out.push_back(to_positive({e.key, item, e.line}));
  if (out.empty()) throw ConfigError(e.key, e.line, "empty list");
  return out;
}

using Setter = std::function<void(ScenarioConfig&, const Entry&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"scenario.name", [](ScenarioConfig& c, const Entry& e) { c.name = e.value; }},
      {"space.kind",
       [](ScenarioConfig& c, const Entry& e) {
         try {
           c.space.kind = parse_kind(e.value);
         } catch (const std::exception&) {
           throw ConfigError(e.key, e.line, "unknown kind '" + e.value + "'");
         }
       }},
      {"space.ladder",
       [](ScenarioConfig& c, const Entry& e) {
         c.ladder.clear();
         for (const auto& item : split_list(e.value))
           c.ladder.push_back(to_count({e.key, item, e.line}));
         if (c.ladder.empty()) throw ConfigError(e.key, e.line, "empty ladder");
       }},
      {"space.length",
       [](ScenarioConfig& c, const Entry& e) { c.space.length = to_positive(e); }},
      {"space.origin", [](ScenarioConfig& c, const Entry& e) { c.space.origin = to_finite(e); }},
      {"space.phi",
       [](ScenarioConfig& c, const Entry& e) {
         auto& p = c.space.potential;
         if (e.value == "constant") {
           p.form = PotentialSpec::Form::constant;
         } else if (e.value == "quadratic") {
           p.form = PotentialSpec::Form::quadratic;
         } else if (e.value == "cosine") {
           p.form = PotentialSpec::Form::cosine;
         } else if (e.value.rfind("csv:", 0) == 0) {
           try {
             const auto table = load_potential_csv(e.value.substr(4));
             p.form = table.form;
             p.table = table.table;
           } catch (const std::exception& ex) {
             throw ConfigError(e.key, e.line, ex.what());
           }
         } else {
           throw ConfigError(e.key, e.line, "unknown potential '" + e.value + "'");
         }
       }},
      {"space.phi.scale",
       [](ScenarioConfig& c, const Entry& e) { c.space.potential.scale = to_finite(e); }},
      {"space.phi.offset",
       [](ScenarioConfig& c, const Entry& e) { c.space.potential.offset = to_finite(e); }},
      {"space.phi.frequency",
       [](ScenarioConfig& c, const Entry& e) { c.space.potential.frequency = to_finite(e); }},
      {"space.warp",
       [](ScenarioConfig& c, const Entry& e) {
         try {
           c.space.warp = parse_warp(e.value);
         } catch (const std::exception&) {
           throw ConfigError(e.key, e.line, "unknown warp '" + e.value + "'");
         }
       }},
      {"space.m",
       [](ScenarioConfig& c, const Entry& e) {
         if (e.value == "inf" || e.value == "infinity") {
           c.space.m = kInfiniteDimension;
           return;
         }
         c.space.m = to_positive(e);
       }},
      {"space.n",
       [](ScenarioConfig& c, const Entry& e) {
         c.space.n = static_cast<int>(to_count(e));
       }},
      {"solver.dt_factor",
       [](ScenarioConfig& c, const Entry& e) { c.solver.dt_factor = to_positive(e); }},
      {"solver.t0", [](ScenarioConfig& c, const Entry& e) { c.solver.t0 = to_positive(e); }},
      {"solver.rho",
       [](ScenarioConfig& c, const Entry& e) {
         c.solver.rho = to_positive(e);
         if (c.solver.rho <= 1.0) throw ConfigError(e.key, e.line, "must be > 1");
       }},
      {"solver.t_count",
       [](ScenarioConfig& c, const Entry& e) { c.solver.t_count = to_count(e); }},
      {"solver.t_end", [](ScenarioConfig& c, const Entry& e) { c.solver.t_end = to_positive(e); }},
      {"solver.store_every",
       [](ScenarioConfig& c, const Entry& e) { c.solver.store_every = to_count(e); }},
      {"initial.center",
       [](ScenarioConfig& c, const Entry& e) { c.solver.init_center = to_finite(e); }},
      {"initial.width",
       [](ScenarioConfig& c, const Entry& e) { c.solver.init_width = to_positive(e); }},
      {"initial.floor",
       [](ScenarioConfig& c, const Entry& e) {
         c.solver.init_floor = to_finite(e);
         if (c.solver.init_floor < 0.0) throw ConfigError(e.key, e.line, "must be >= 0");
       }},
      {"kernel.source", [](ScenarioConfig& c, const Entry& e) { c.kernel.source = to_finite(e); }},
      {"kernel.eps",
       [](ScenarioConfig& c, const Entry& e) {
         c.kernel.eps = to_positive(e);
         if (c.kernel.eps >= 1.0) throw ConfigError(e.key, e.line, "must be < 1");
       }},
      {"kernel.spread",
       [](ScenarioConfig& c, const Entry& e) { c.kernel.spread = to_positive(e); }},
      {"kernel.wall_margin",
       [](ScenarioConfig& c, const Entry& e) {
         c.kernel.wall_margin = to_finite(e);
         if (c.kernel.wall_margin < 0.0) throw ConfigError(e.key, e.line, "must be >= 0");
       }},
      {"kernel.times",
       [](ScenarioConfig& c, const Entry& e) { c.kernel.times = to_positive_list(e); }},
      {"kernel.samples",
       [](ScenarioConfig& c, const Entry& e) { c.kernel.samples = to_count(e); }},
      {"kernel.model",
       [](ScenarioConfig& c, const Entry& e) {
         if (e.value != "spectral" && e.value != "euclidean")
           throw ConfigError(e.key, e.line, "expected 'spectral' or 'euclidean'");
         c.kernel.model = e.value;
       }},
      {"mc.paths", [](ScenarioConfig& c, const Entry& e) { c.mc.paths = to_count(e); }},
      {"mc.dt", [](ScenarioConfig& c, const Entry& e) { c.mc.dt = to_positive(e); }},
      {"mc.seed", [](ScenarioConfig& c, const Entry& e) { c.mc.seed = to_unsigned(e); }},
      {"mc.T", [](ScenarioConfig& c, const Entry& e) { c.mc.T = to_positive(e); }},
      {"mc.x0", [](ScenarioConfig& c, const Entry& e) { c.mc.x0 = to_finite(e); }},
      {"mc.y", [](ScenarioConfig& c, const Entry& e) { c.mc.y = to_finite(e); }},
      {"lsi.tau", [](ScenarioConfig& c, const Entry& e) { c.lsi.tau = to_positive_list(e); }},
      {"lsi.scan", [](ScenarioConfig& c, const Entry& e) { c.lsi.scan = to_positive_list(e); }},
      {"checks",
       [](ScenarioConfig& c, const Entry& e) {
         c.checks = split_list(e.value);
         for (const auto& name : c.checks)
           if (!find_check(name)) throw ConfigError(e.key, e.line, "unknown check '" + name + "'");
         if (c.checks.empty()) throw ConfigError(e.key, e.line, "empty check list");
       }},
      {"output.dir",
       [](ScenarioConfig& c, const Entry& e) {
         if (e.value.empty()) throw ConfigError(e.key, e.line, "empty path");
         c.output_dir = e.value;
       }},
  };
  return table;
}

void validate(const ScenarioConfig& c) {
  for (std::size_t i = 1; i < c.ladder.size(); ++i)
    if (c.ladder[i] <= c.ladder[i - 1])
      throw ConfigError("space.ladder", c.line_of("space.ladder"), "must be strictly increasing");
  if (c.ladder.front() < 8)
    throw ConfigError("space.ladder", c.line_of("space.ladder"), "levels need at least 8 nodes");
  for (const auto& name : c.checks) {
    const auto* info = find_check(name);
    if (info->stage == CheckStage::refinement && c.ladder.size() < 2)
      throw ConfigError("space.ladder", c.line_of("space.ladder"),
                        "check '" + name + "' needs at least two levels");
  }
  for (const auto& [name, tol] : c.tolerances) {
    const auto key = "check." + name + ".tol";
    if (!find_check(name)) throw ConfigError(key, c.line_of(key), "unknown check '" + name + "'");
  }
  const double m = c.space.m;
  if (std::isfinite(m) && m < static_cast<double>(c.space.n))
    throw ConfigError("space.m", c.line_of("space.m"), "m must be >= n");
  if (c.space.kind == SpaceKind::radial && c.space.n < 2)
    throw ConfigError("space.n", c.line_of("space.n"), "radial spaces need n >= 2");
  if (c.space.kind != SpaceKind::radial && c.space.n != 1)
    throw ConfigError("space.n", c.line_of("space.n"), "one-dimensional kinds need n = 1");
  if (c.mc.dt >= c.mc.T) throw ConfigError("mc.dt", c.line_of("mc.dt"), "must be < mc.T");
}

}  // namespace

ConfigError::ConfigError(const std::string& field, std::size_t line, const std::string& what)
    : ValidationError(field, (line ? "line " + std::to_string(line) + ": " : std::string()) + what),
      line_(line) {}

double ScenarioConfig::tolerance(const std::string& check, double fallback) const {
  const auto it = tolerances.find(check);
  return it == tolerances.end() ? fallback : it->second;
}

std::size_t ScenarioConfig::line_of(const std::string& key) const {
  const auto it = lines.find(key);
  return it == lines.end() ? 0 : it->second;
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  cfg.source = text;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  std::vector<Entry> entries;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const auto body = trim(raw);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(body, line, "expected 'key = value'");
    Entry e{trim(body.substr(0, eq)), trim(body.substr(eq + 1)), line};
    if (e.key.empty()) throw ConfigError("<empty>", line, "missing key");
    if (cfg.lines.count(e.key)) throw ConfigError(e.key, line, "duplicate key");
    cfg.lines[e.key] = line;
    entries.push_back(std::move(e));
  }

  for (const auto& e : entries) {
    if (e.key.rfind("check.", 0) == 0 && e.key.size() > 10 &&
        e.key.compare(e.key.size() - 4, 4, ".tol") == 0) {
      const auto name = e.key.substr(6, e.key.size() - 10);
      cfg.tolerances[name] = to_positive(e);
      continue;
    }
    const auto it = setters().find(e.key);
    if (it == setters().end()) throw ConfigError(e.key, e.line, "unknown key");
    it->second(cfg, e);
  }
  if (!cfg.lines.count("checks")) throw ConfigError("checks", 0, "missing");
  if (!cfg.lines.count("space.kind")) throw ConfigError("space.kind", 0, "missing");
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", 0, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const ScenarioConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : config.source) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wlab
