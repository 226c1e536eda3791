#include "spde/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "spde/errors.hpp"
#include "spde/io.hpp"

namespace spde {

namespace {

const nlohmann::json* walk(const nlohmann::json& j, const std::string& path) {
  const nlohmann::json* node = &j;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void reject_unknown_keys(const nlohmann::json& j, const std::string& path,
                         const std::set<std::string>& known) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) fail(path + "." + key, "unknown field");
}

}  // namespace

const nlohmann::json* config_find(const nlohmann::json& j,
                                  const std::string& path) {
  return walk(j, path);
}

double config_number(const nlohmann::json& j, const std::string& path) {
  const nlohmann::json* node = walk(j, path);
  if (!node) fail(path, "missing required number");
  if (!node->is_number()) fail(path, "expected a number");
  return node->get<double>();
}

double config_number_or(const nlohmann::json& j, const std::string& path,
                        double fallback) {
  const nlohmann::json* node = walk(j, path);
  if (!node) return fallback;
  if (!node->is_number()) fail(path, "expected a number");
  return node->get<double>();
}

Eigen::Index config_index(const nlohmann::json& j, const std::string& path) {
  const nlohmann::json* node = walk(j, path);
  if (!node) fail(path, "missing required integer");
  if (!node->is_number_integer()) fail(path, "expected an integer");
  return node->get<Eigen::Index>();
}

Eigen::Index config_index_or(const nlohmann::json& j, const std::string& path,
                             Eigen::Index fallback) {
  const nlohmann::json* node = walk(j, path);
  if (!node) return fallback;
  if (!node->is_number_integer()) fail(path, "expected an integer");
  return node->get<Eigen::Index>();
}

std::string config_string(const nlohmann::json& j, const std::string& path) {
  const nlohmann::json* node = walk(j, path);
  if (!node) fail(path, "missing required string");
  if (!node->is_string()) fail(path, "expected a string");
  return node->get<std::string>();
}

std::vector<double> config_numbers(const nlohmann::json& j,
                                   const std::string& path) {
  const nlohmann::json* node = walk(j, path);
  if (!node) fail(path, "missing required array");
  if (!node->is_array() || node->empty()) fail(path, "expected a non-empty array");
  std::vector<double> out;
  for (const auto& v : *node) {
    if (!v.is_number()) fail(path, "expected numeric entries");
    out.push_back(v.get<double>());
  }
  return out;
}

NonlinearitySpec named_nonlinearity(const std::string& function, double scale,
                                    Eigen::Index collocation_size) {
  if (function == "sin")
    return nemytskij([scale](double s) { return scale * std::sin(s); },
                     [scale](double s) { return scale * std::cos(s); },
                     std::abs(scale), collocation_size, "sin");
  if (function == "tanh")
    return nemytskij([scale](double s) { return scale * std::tanh(s); },
                     [scale](double s) {
                       const double c = std::cosh(s);
                       return scale / (c * c);
                     },
                     std::abs(scale), collocation_size, "tanh");
  if (function == "expsq")
    return nemytskij(
        [scale](double s) { return scale * s * std::exp(-s * s); },
        [scale](double s) {
          return scale * (1.0 - 2.0 * s * s) * std::exp(-s * s);
        },
        std::abs(scale), collocation_size, "expsq");
  throw ConfigError("model.nonlinearity.function: unknown family '" +
                    function + "' (sin, tanh, expsq)");
}

namespace {

NonlinearitySpec parse_nonlinearity(const nlohmann::json& raw,
                                    Eigen::Index n) {
  const nlohmann::json* block = walk(raw, "model.nonlinearity");
  if (!block) return zero_nonlinearity();
  reject_unknown_keys(*block, "model.nonlinearity",
                      {"kind", "coefficients", "function", "scale",
                       "collocation_size"});
  const std::string kind = config_string(raw, "model.nonlinearity.kind");
  if (kind == "zero") return zero_nonlinearity();
  if (kind == "linear_diagonal") {
    const auto coeffs = config_numbers(raw, "model.nonlinearity.coefficients");
    if (Eigen::Index(coeffs.size()) != n)
      fail("model.nonlinearity.coefficients", "length must equal model.n");
    return linear_diagonal(
        Eigen::Map<const Eigen::ArrayXd>(coeffs.data(), coeffs.size()));
  }
  if (kind == "nemytskij") {
    const std::string fn = config_string(raw, "model.nonlinearity.function");
    const double scale = config_number(raw, "model.nonlinearity.scale");
    const Eigen::Index m =
        config_index_or(raw, "model.nonlinearity.collocation_size", 4 * n);
    if (m < n) fail("model.nonlinearity.collocation_size", "must be >= model.n");
    return named_nonlinearity(fn, scale, m);
  }
  fail("model.nonlinearity.kind",
       "unknown kind '" + kind + "' (zero, linear_diagonal, nemytskij)");
}

}  // namespace

RunConfig parse_config(const nlohmann::json& raw) {
  if (!raw.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(raw, "config", {"model", "integrator", "study", "output"});
  if (!raw.contains("model")) throw ConfigError("model: missing block");
  reject_unknown_keys(raw["model"], "model",
                      {"n", "delta", "q", "nonlinearity", "eps"});

  RunConfig cfg;
  const Eigen::Index n = config_index(raw, "model.n");
  if (n < 1) fail("model.n", "must be >= 1");

  OperatorSpec op;
  const bool has_delta = walk(raw, "model.delta") != nullptr;
  const bool has_q = walk(raw, "model.q") != nullptr;
  if (has_delta == has_q)
    fail("model", "exactly one of delta or q must be given");
  if (has_delta) {
    op = make_operator_spec(n, config_number(raw, "model.delta"));
  } else {
    const auto q = config_numbers(raw, "model.q");
    if (Eigen::Index(q.size()) != n) fail("model.q", "length must equal model.n");
    for (double v : q)
      if (!(v > 0.0)) fail("model.q", "entries must be positive");
    op = make_operator_spec(n,
                            Eigen::Map<const Eigen::ArrayXd>(q.data(), n));
  }

  const double eps = config_number_or(raw, "model.eps", 0.0);
  if (eps < 0.0) fail("model.eps", "must be >= 0");
  cfg.model = make_model(op, parse_nonlinearity(raw, n), eps);

  if (raw.contains("integrator")) {
    reject_unknown_keys(raw["integrator"], "integrator",
                        {"tau", "T", "seed", "stride", "substeps",
                         "enforce_stability"});
    cfg.integrator.tau = config_number(raw, "integrator.tau");
    if (cfg.integrator.tau <= 0.0) fail("integrator.tau", "must be positive");
    cfg.horizon = config_number_or(raw, "integrator.T", 1.0);
    if (cfg.horizon <= 0.0) fail("integrator.T", "must be positive");
    const nlohmann::json* seed = walk(raw, "integrator.seed");
    if (seed) {
      if (!seed->is_number_integer()) fail("integrator.seed", "expected integer");
      cfg.integrator.seed = seed->get<std::uint64_t>();
    }
    cfg.integrator.stride = config_index_or(raw, "integrator.stride", 1);
    cfg.integrator.substeps = config_index_or(raw, "integrator.substeps", 1);
    if (cfg.integrator.stride < 1) fail("integrator.stride", "must be >= 1");
    if (cfg.integrator.substeps < 1) fail("integrator.substeps", "must be >= 1");
    const nlohmann::json* enforce = walk(raw, "integrator.enforce_stability");
    if (enforce) {
      if (!enforce->is_boolean())
        fail("integrator.enforce_stability", "expected a boolean");
      cfg.integrator.enforce_stability = enforce->get<bool>();
    }
  }
  cfg.integrator.eps = eps;

  if (raw.contains("study")) cfg.study = raw["study"];

  if (raw.contains("output")) {
    reject_unknown_keys(raw["output"], "output", {"directory", "threads"});
    const nlohmann::json* dir = walk(raw, "output.directory");
    if (dir) {
      if (!dir->is_string()) fail("output.directory", "expected a string");
      cfg.out_dir = dir->get<std::string>();
    }
    cfg.threads = int(config_index_or(raw, "output.threads", 1));
    if (cfg.threads < 1) fail("output.threads", "must be >= 1");
  }

  cfg.frozen = raw;
  nlohmann::json hashed = raw;
  hashed.erase("output");
  cfg.hash = config_hash(hashed);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  nlohmann::json raw;
  try {
    in >> raw;
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError("config parse error: " + std::string(err.what()));
  }
  return parse_config(raw);
}

}  // namespace spde
