#pragma once

// Experiment configuration: flat `key = value` text, one key per line,
// `#` starts a comment. Keys:
//
//   regularizer   l1 | nuclear                         (default l1)
//   n, k          ambient dimension and sparsity       (l1)
//   d, r          matrix side and rank                 (nuclear)
//   m             measurements
//   lambda_grid   auto | auto:<count> | inside:<count> | logspace:<lo>:<hi>:<count> | list:<a>,<b>,...
//   noise         comma list of gaussian:<sigma> | student_t:<dof>:<scale> | uniform:<a> | zero
//   trials        trials per (lambda, noise) cell      (default 1)
//   t_policy      prob:<p> | gap:<fraction> | fixed:<t>
//   seed          master seed (uint64)
//   delta_method  closed_form | monte_carlo:<samples>  (nuclear needs monte_carlo)
//   workers       worker threads (0 = LASSOGEOM_THREADS or hardware)
//   max_iterations, optimality_tol                     solver settings
//   out_csv, out_dir                                   output paths
//   prove_lambda  best | <value>;  prove_t <value>;  prove_samples;  prove_conforming

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lassogeom/bounds.hpp"
#include "lassogeom/errors.hpp"
#include "lassogeom/geometry.hpp"
#include "lassogeom/harness/format.hpp"
#include "lassogeom/model.hpp"

namespace lassogeom::harness {

struct LambdaGridSpec {
  enum class Kind { Auto, Inside, LogSpace, List };
  Kind kind = Kind::Auto;
  int count = 40;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> values;
};

struct NoiseChoice {
  std::string text;  // as written in the config
  std::string family;
  std::vector<double> params;

  /// The zero family becomes a fixed zero vector of length m.
  NoiseSpec make(Eigen::Index m) const {
    if (family == "gaussian") return NoiseSpec::gaussian(params.at(0));
    if (family == "student_t") return NoiseSpec::student_t(params.at(0), params.at(1));
    if (family == "uniform") return NoiseSpec::uniform(params.at(0));
    return NoiseSpec::fixed(Vector::Zero(m));
  }
};

struct ExperimentConfig {
  std::string regularizer = "l1";
  std::int64_t n = 0;
  std::int64_t k = 0;
  std::int64_t d = 0;
  std::int64_t r = 0;
  std::int64_t m = 0;
  LambdaGridSpec lambda_grid;
  std::vector<NoiseChoice> noise;
  std::int64_t trials = 1;
  TPolicy t_policy = TPolicy::gap_fraction(1e-3);
  std::uint64_t seed = 1;
  DeltaMethod delta_method = DeltaMethod::closed_form();
  unsigned workers = 0;
  long max_iterations = 200000;
  double optimality_tol = 1e-7;
  std::string out_csv;
  std::string out_dir;
  std::string prove_lambda = "best";
  double prove_t = 0.0;  // 0: 80% of the admissible range at the chosen λ
  std::int64_t prove_samples = 100000;
  std::int64_t prove_conforming = 10000;

  bool is_l1() const { return regularizer == "l1"; }
  std::int64_t ambient() const { return is_l1() ? n : d * d; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!parse_double(v, out)) throw InvalidArgument("config: key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InvalidArgument("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

inline LambdaGridSpec parse_lambda_grid(const std::string& v) {
  LambdaGridSpec g;
  const auto parts = split(v, ':');
  const std::string& kind = parts.at(0);
  if (kind == "auto") {
    g.kind = LambdaGridSpec::Kind::Auto;
    if (parts.size() > 1) g.count = static_cast<int>(to_int("lambda_grid", parts[1]));
  } else if (kind == "inside" && parts.size() == 2) {
    g.kind = LambdaGridSpec::Kind::Inside;
    g.count = static_cast<int>(to_int("lambda_grid", parts[1]));
  } else if (kind == "logspace" && parts.size() == 4) {
    g.kind = LambdaGridSpec::Kind::LogSpace;
    g.lo = to_double("lambda_grid", parts[1]);
    g.hi = to_double("lambda_grid", parts[2]);
    g.count = static_cast<int>(to_int("lambda_grid", parts[3]));
    lassogeom::detail::require(g.lo > 0.0 && g.hi > g.lo, "config: logspace needs 0 < lo < hi");
  } else if (kind == "list" && parts.size() == 2) {
    g.kind = LambdaGridSpec::Kind::List;
    for (const auto& s : split(parts[1], ',')) g.values.push_back(to_double("lambda_grid", s));
    lassogeom::detail::require(!g.values.empty(), "config: empty lambda list");
    for (double x : g.values) lassogeom::detail::require(x >= 0.0, "config: lambda values must be >= 0");
  } else {
    throw InvalidArgument("config: bad lambda_grid '" + v + "'");
  }
  lassogeom::detail::require(g.kind == LambdaGridSpec::Kind::List || g.count >= 1, "config: lambda grid count must be >= 1");
  return g;
}

inline NoiseChoice parse_noise(const std::string& text) {
  NoiseChoice c;
  c.text = text;
  const auto parts = split(text, ':');
  c.family = parts.at(0);
  for (std::size_t i = 1; i < parts.size(); ++i) c.params.push_back(to_double("noise", parts[i]));
  std::size_t expected = 0;
  if (c.family == "gaussian" || c.family == "uniform") expected = 1;
  else if (c.family == "student_t") expected = 2;
  else if (c.family == "zero") expected = 0;
  else throw InvalidArgument("config: unknown noise family '" + c.family + "'");
  if (c.params.size() != expected) throw InvalidArgument("config: wrong parameter count in noise '" + text + "'");
  for (double p : c.params) lassogeom::detail::require(p > 0.0, "config: noise parameters must be > 0");
  return c;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string v = detail::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw InvalidArgument("config: duplicate key '" + key + "'");
    if (key == "regularizer") {
      if (v != "l1" && v != "nuclear") throw InvalidArgument("config: regularizer must be l1 or nuclear");
      cfg.regularizer = v;
    } else if (key == "n") cfg.n = detail::to_int(key, v);
    else if (key == "k") cfg.k = detail::to_int(key, v);
    else if (key == "d") cfg.d = detail::to_int(key, v);
    else if (key == "r") cfg.r = detail::to_int(key, v);
    else if (key == "m") cfg.m = detail::to_int(key, v);
    else if (key == "lambda_grid") cfg.lambda_grid = detail::parse_lambda_grid(v);
    else if (key == "noise") {
      for (const auto& s : detail::split(v, ',')) cfg.noise.push_back(detail::parse_noise(s));
    } else if (key == "trials") cfg.trials = detail::to_int(key, v);
    else if (key == "t_policy") cfg.t_policy = TPolicy::parse(v);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::to_int(key, v));
    else if (key == "delta_method") {
      if (v == "closed_form") cfg.delta_method = DeltaMethod::closed_form();
      else if (v.rfind("monte_carlo:", 0) == 0)
        cfg.delta_method = DeltaMethod::monte_carlo(detail::to_int(key, v.substr(12)), SeedSpec{cfg.seed, 0xde17a});
      else throw InvalidArgument("config: bad delta_method '" + v + "'");
    } else if (key == "workers") cfg.workers = static_cast<unsigned>(detail::to_int(key, v));
    else if (key == "max_iterations") cfg.max_iterations = static_cast<long>(detail::to_int(key, v));
    else if (key == "optimality_tol") cfg.optimality_tol = detail::to_double(key, v);
    else if (key == "out_csv") cfg.out_csv = v;
    else if (key == "out_dir") cfg.out_dir = v;
    else if (key == "prove_lambda") cfg.prove_lambda = v;
    else if (key == "prove_t") cfg.prove_t = detail::to_double(key, v);
    else if (key == "prove_samples") cfg.prove_samples = detail::to_int(key, v);
    else if (key == "prove_conforming") cfg.prove_conforming = detail::to_int(key, v);
    else throw InvalidArgument("config: unknown key '" + key + "'");
  }
  // The Monte Carlo δ seed follows the master seed wherever `seed` appeared.
  if (cfg.delta_method.kind == DeltaMethod::Kind::MonteCarlo) cfg.delta_method.seed = SeedSpec{cfg.seed, 0xde17a};

  lassogeom::detail::require(cfg.m >= 2, "config: m must be >= 2");
  lassogeom::detail::require(cfg.trials >= 1, "config: trials must be >= 1");
  if (cfg.is_l1()) {
    lassogeom::detail::require(cfg.n >= 1 && cfg.k >= 1 && cfg.k <= cfg.n, "config: l1 needs 1 <= k <= n");
  } else {
    lassogeom::detail::require(cfg.d >= 1 && cfg.r >= 1 && cfg.r <= cfg.d, "config: nuclear needs 1 <= r <= d");
    lassogeom::detail::require(cfg.delta_method.kind == DeltaMethod::Kind::MonteCarlo,
                               "config: nuclear regularizer needs delta_method = monte_carlo:<samples>");
  }
  if (cfg.noise.empty()) cfg.noise.push_back(detail::parse_noise("gaussian:0.1"));
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  return parse_config(in);
}

}  // namespace lassogeom::harness
