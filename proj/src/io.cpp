#include "spde/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spde/errors.hpp"

namespace spde {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_text_atomic(const std::filesystem::path& file,
                       const std::string& content) {
  if (file.has_parent_path())
    std::filesystem::create_directories(file.parent_path());
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.good()) throw ConfigError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

std::string config_hash(const nlohmann::json& config) {
  const std::string canonical = config.dump();
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical) {
    hash ^= ch;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)hash);
  return buf;
}

std::string path_to_csv(const SpectralPath& path) {
  std::ostringstream out;
  out << "t";
  for (Eigen::Index i = 0; i < path.dim(); ++i) out << ",mode_" << (i + 1);
  out << "\n";
  for (Eigen::Index j = 0; j <= path.steps(); ++j) {
    out << format_double(double(j) * path.h);
    for (Eigen::Index i = 0; i < path.dim(); ++i)
      out << "," << format_double(path.nodes(i, j));
    out << "\n";
  }
  return out.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto res =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("bad numeric field in path CSV: '" + text + "'");
  return value;
}

}  // namespace

SpectralPath path_from_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  do {  // leading '#' lines carry run metadata
    if (!std::getline(in, line)) throw ConfigError("empty path CSV");
  } while (!line.empty() && line[0] == '#');
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "t")
    throw ConfigError("path CSV must start with header t,mode_1,...");
  const Eigen::Index dim = Eigen::Index(header.size()) - 1;

  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (Eigen::Index(fields.size()) != dim + 1)
      throw ConfigError("ragged row in path CSV");
    times.push_back(parse_double(fields[0]));
    for (Eigen::Index i = 0; i < dim; ++i)
      values.push_back(parse_double(fields[i + 1]));
  }
  if (times.size() < 2) throw ConfigError("path CSV needs >= 2 rows");

  SpectralPath path;
  path.h = times[1] - times[0];
  if (path.h <= 0.0) throw ConfigError("path CSV times must increase");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (std::abs(times[j] - times[0] - double(j) * path.h) > 1e-9 * times.back())
      throw ConfigError("path CSV grid is not uniform");
  path.nodes.resize(dim, Eigen::Index(times.size()));
  for (std::size_t j = 0; j < times.size(); ++j)
    for (Eigen::Index i = 0; i < dim; ++i)
      path.nodes(i, Eigen::Index(j)) = values[j * std::size_t(dim) + i];
  return path;
}

SpectralPath read_path_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read path CSV: " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return path_from_csv(buffer.str());
}

nlohmann::json to_json(const RateReport& report) {
  nlohmann::json j{{"value", report.infinite ? nlohmann::json("inf")
                                             : nlohmann::json(report.value)},
                   {"h", report.h},
                   {"boundary_mismatch", report.boundary_mismatch},
                   {"rule", report.rule}};
  if (report.frozen_tau) j["frozen_tau"] = *report.frozen_tau;
  return j;
}

nlohmann::json to_json(const QuasipotentialResult& result) {
  nlohmann::json ladder = nlohmann::json::array();
  for (const auto& [T, value] : result.per_horizon)
    ladder.push_back({{"T", T}, {"value", value}});
  return {{"value", result.value},
          {"T_star", result.best_horizon},
          {"per_horizon", ladder},
          {"grad_norm", result.gradient_norm},
          {"iterations", result.iterations},
          {"h", result.h},
          {"converged", result.converged},
          {"monotone", result.monotone},
          {"possibly_outside_effective_domain",
           result.possibly_outside_domain},
          {"exit_reason", result.exit_reason}};
}

nlohmann::json to_json(const MCEstimate& estimate) {
  return {{"p_hat", estimate.p_hat},
          {"samples", estimate.samples},
          {"hits", estimate.hits},
          {"std_error", estimate.std_error},
          {"seed", estimate.seed},
          {"delta", estimate.delta},
          {"delta_effective", estimate.delta_effective},
          {"modulus_estimate", estimate.modulus_estimate},
          {"eps", estimate.eps}};
}

nlohmann::json to_json(const SlopeFit& fit) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& entry : fit.entries)
    entries.push_back({{"eps", entry.eps},
                       {"estimate", to_json(entry.estimate)},
                       {"value", entry.value},
                       {"variance", entry.variance},
                       {"resolved", entry.resolved},
                       {"saturated", entry.saturated}});
  return {{"entries", entries},
          {"aggregate", fit.aggregate},
          {"aggregate_se", fit.aggregate_se},
          {"trend_slope", fit.trend_slope},
          {"inconclusive", fit.inconclusive}};
}

nlohmann::json to_json(const LadderReport& report) {
  nlohmann::json j{{"variable", report.variable},
                   {"ladder", report.ladder},
                   {"path_errors", report.path_errors},
                   {"rate_errors", report.rate_errors},
                   {"cross_checks", report.cross_checks},
                   {"monotone", report.monotone},
                   {"notes", report.notes}};
  if (report.fitted_order) j["fitted_order"] = *report.fitted_order;
  return j;
}

nlohmann::json to_json(const TailReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& entry : report.entries)
    entries.push_back({{"K", entry.threshold},
                       {"mu_hat", entry.mu_hat},
                       {"exceedances", entry.exceedances},
                       {"below_resolution", entry.below_resolution},
                       {"value", entry.value}});
  nlohmann::json alphas = nlohmann::json::array();
  for (const auto& [alpha, threshold] : report.alpha_thresholds)
    alphas.push_back({{"alpha", alpha},
                      {"K", threshold ? nlohmann::json(*threshold)
                                      : nlohmann::json()}});
  return {{"entries", entries},
          {"quadratic_growth", report.quadratic_growth},
          {"alpha_thresholds", alphas}};
}

std::string ladder_table(const LadderReport& report) {
  std::ostringstream out;
  out << report.variable << "\tpath_error\trate_error\tcross_check\n";
  for (std::size_t i = 0; i < report.ladder.size(); ++i) {
    out << format_double(report.ladder[i]) << "\t";
    out << (i < report.path_errors.size() ? format_double(report.path_errors[i])
                                          : "-")
        << "\t";
    out << (i < report.rate_errors.size() ? format_double(report.rate_errors[i])
                                          : "-")
        << "\t";
    out << (i < report.cross_checks.size()
                ? format_double(report.cross_checks[i])
                : "-")
        << "\n";
  }
  if (report.fitted_order)
    out << "fitted_order\t" << format_double(*report.fitted_order) << "\n";
  out << "monotone\t" << (report.monotone ? "yes" : "no") << "\n";
  return out.str();
}

}  // namespace spde
