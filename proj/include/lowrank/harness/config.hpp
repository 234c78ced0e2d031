#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lowrank/core/errors.hpp"
#include "lowrank/solvers/driver.hpp"
#include "lowrank/solvers/init.hpp"

namespace lowrank {

enum class TimingMode { wall, off };
enum class GdSigmaSource { init, truth };

/// One experiment grid. Defaults are listed next to each field; `problem`
/// is the only required key.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::factorization;
  std::vector<Algorithm> algorithms{Algorithm::scaledgd};  // algos
  Index n1 = 200;                                          // n1, n2, or n for both
  Index n2 = 200;
  Index r = 5;
  std::vector<double> kappas{1.0};  // kappa
  double p = 0.2;                   // completion / hankel sampling rate
  double alpha = 0.1;               // rpca corruption fraction
  std::optional<Index> m;           // sensing measurements; overrides m_factor
  double m_factor = 5.0;            // m = m_factor * n * r, n = max(n1, n2)
  int warm_start_steps = 0;         // sensing: PGD steps before ScaledGD
  double eta = 0.5;
  int max_iters = 80;
  double tol = 1e-12;
  double divergence_threshold = 1e2;  // divergence
  std::optional<double> snr_db;
  std::uint64_t base_seed = 0;  // seed
  int seeds = 1;                // replicates per (kappa, algo)
  std::string output;           // empty: stdout
  bool track_dist = false;
  ProjectionMode projection = ProjectionMode::off;
  TimingMode timing = TimingMode::wall;
  GdSigmaSource gd_sigma = GdSigmaSource::init;

  /// Number of sensing measurements implied by m or m_factor.
  Index measurements() const {
    if (m) return *m;
    const double n = static_cast<double>(std::max(n1, n2));
    return static_cast<Index>(std::llround(m_factor * n * static_cast<double>(r)));
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, const std::string& key, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("cannot parse value '" + std::string(text) + "' for key '" + key + "'", line);
  }
  return value;
}

inline bool parse_flag(std::string_view text, const std::string& key, std::size_t line) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("cannot parse value '" + std::string(text) + "' for key '" + key + "'", line);
}

inline ProblemKind parse_problem(std::string_view text, std::size_t line) {
  for (auto kind : {ProblemKind::factorization, ProblemKind::sensing, ProblemKind::rpca, ProblemKind::completion,
                    ProblemKind::hankel}) {
    if (text == to_string(kind)) return kind;
  }
  if (text == "general") throw ConfigError("general losses are available through the library only", line);
  throw ConfigError("cannot parse value '" + std::string(text) + "' for key 'problem'", line);
}

inline Algorithm parse_algorithm(std::string_view text, std::size_t line) {
  for (auto algo : {Algorithm::scaledgd, Algorithm::vanilla_gd, Algorithm::altmin}) {
    if (text == to_string(algo)) return algo;
  }
  throw ConfigError("cannot parse value '" + std::string(text) + "' for key 'algos'", line);
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment, lists are comma
/// separated. Unknown or repeated keys, unparsable values and out-of-range
/// settings raise ConfigError with the offending line.
inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t last_content = 1;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    last_content = line_no;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("expected 'key = value'", line_no);
    const std::size_t ln = line_no;

    auto num = [&]<typename T>(T& field) { field = detail::parse_number<T>(value, key, ln); };
    if (key == "problem") {
      cfg.problem = detail::parse_problem(value, ln);
    } else if (key == "algos") {
      cfg.algorithms.clear();
      for (auto item : detail::split_list(value)) cfg.algorithms.push_back(detail::parse_algorithm(item, ln));
    } else if (key == "n") {
      num(cfg.n1);
      cfg.n2 = cfg.n1;
    } else if (key == "n1") {
      num(cfg.n1);
    } else if (key == "n2") {
      num(cfg.n2);
    } else if (key == "r") {
      num(cfg.r);
    } else if (key == "kappa") {
      cfg.kappas.clear();
      for (auto item : detail::split_list(value)) cfg.kappas.push_back(detail::parse_number<double>(item, key, ln));
    } else if (key == "p") {
      num(cfg.p);
    } else if (key == "alpha") {
      num(cfg.alpha);
    } else if (key == "m") {
      Index m = 0;
      num(m);
      cfg.m = m;
    } else if (key == "m_factor") {
      num(cfg.m_factor);
    } else if (key == "warm_start_steps") {
      num(cfg.warm_start_steps);
    } else if (key == "eta") {
      num(cfg.eta);
    } else if (key == "max_iters") {
      num(cfg.max_iters);
    } else if (key == "tol") {
      num(cfg.tol);
    } else if (key == "divergence") {
      num(cfg.divergence_threshold);
    } else if (key == "snr_db") {
      double snr = 0.0;
      num(snr);
      cfg.snr_db = snr;
    } else if (key == "seed") {
      num(cfg.base_seed);
    } else if (key == "seeds") {
      num(cfg.seeds);
    } else if (key == "output") {
      cfg.output = std::string(value);
    } else if (key == "track_dist") {
      cfg.track_dist = detail::parse_flag(value, key, ln);
    } else if (key == "projection") {
      if (value == "off") {
        cfg.projection = ProjectionMode::off;
      } else if (value == "alg3") {
        cfg.projection = ProjectionMode::alg3;
      } else {
        throw ConfigError("cannot parse value '" + std::string(value) + "' for key 'projection'", ln);
      }
    } else if (key == "timing") {
      if (value == "wall") {
        cfg.timing = TimingMode::wall;
      } else if (value == "off") {
        cfg.timing = TimingMode::off;
      } else {
        throw ConfigError("cannot parse value '" + std::string(value) + "' for key 'timing'", ln);
      }
    } else if (key == "gd_sigma") {
      if (value == "init") {
        cfg.gd_sigma = GdSigmaSource::init;
      } else if (value == "truth") {
        cfg.gd_sigma = GdSigmaSource::truth;
      } else {
        throw ConfigError("cannot parse value '" + std::string(value) + "' for key 'gd_sigma'", ln);
      }
    } else {
      throw ConfigError("unknown key", ln);
    }
    if (!seen.emplace(key, ln).second) throw ConfigError("duplicate key '" + key + "'", ln);
  }

  auto at = [&](std::initializer_list<const char*> keys) {
    std::size_t best = 0;
    for (const char* k : keys) {
      if (auto it = seen.find(k); it != seen.end()) best = std::max(best, it->second);
    }
    return best == 0 ? last_content : best;
  };
  auto require = [&](bool ok, const std::string& what, std::initializer_list<const char*> keys) {
    if (!ok) throw ConfigError(what, at(keys));
  };
  require(seen.count("problem") == 1, "missing required key 'problem'", {});
  require(!cfg.algorithms.empty(), "algos must not be empty", {"algos"});
  require(cfg.n1 >= 1 && cfg.n2 >= 1, "dimensions must be positive", {"n", "n1", "n2"});
  require(cfg.r >= 1 && cfg.r <= std::min(cfg.n1, cfg.n2), "r must lie in [1, min(n1, n2)]", {"r", "n", "n1", "n2"});
  require(!cfg.kappas.empty(), "kappa list must not be empty", {"kappa"});
  for (double k : cfg.kappas) require(k >= 1.0, "kappa values must be >= 1", {"kappa"});
  require(cfg.p > 0.0 && cfg.p <= 1.0, "p must lie in (0, 1]", {"p"});
  require(cfg.alpha >= 0.0 && cfg.alpha < 1.0, "alpha must lie in [0, 1)", {"alpha"});
  require(cfg.m_factor > 0.0, "m_factor must be positive", {"m_factor"});
  require(!cfg.m || *cfg.m >= 1, "m must be positive", {"m"});
  require(cfg.warm_start_steps >= 0, "warm_start_steps must be non-negative", {"warm_start_steps"});
  require(cfg.warm_start_steps == 0 || cfg.problem == ProblemKind::sensing,
          "warm_start_steps applies to sensing only", {"warm_start_steps", "problem"});
  require(cfg.eta > 0.0, "eta must be positive", {"eta"});
  require(cfg.max_iters >= 0, "max_iters must be non-negative", {"max_iters"});
  require(cfg.tol > 0.0, "tol must be positive", {"tol"});
  require(cfg.divergence_threshold > 0.0, "divergence must be positive", {"divergence"});
  require(cfg.seeds >= 1, "seeds must be at least 1", {"seeds"});
  require(cfg.problem != ProblemKind::hankel || cfg.n1 == cfg.n2, "hankel problems need n1 == n2",
          {"problem", "n", "n1", "n2"});
  require(cfg.projection == ProjectionMode::off || cfg.problem == ProblemKind::completion,
          "projection applies to completion only", {"projection", "problem"});
  for (auto algo : cfg.algorithms) {
    require(algo != Algorithm::altmin || cfg.problem == ProblemKind::sensing || cfg.problem == ProblemKind::completion,
            "altmin supports sensing and completion only", {"algos", "problem"});
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace lowrank
