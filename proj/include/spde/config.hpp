#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "spde/integrator.hpp"
#include "spde/model.hpp"

namespace spde {

/// Frozen run configuration.  Parsing is strict: every field is validated
/// before any computation starts, unknown keys are rejected, and errors carry
/// the dotted field path.  `hash` covers the model/integrator/study blocks
/// (the output block holds only routing, which never changes numbers).
struct RunConfig {
  ModelSpec model;
  IntegratorConfig integrator;
  double horizon = 1.0;
  nlohmann::json study;  // command-specific block, validated by the command
  std::filesystem::path out_dir = "out";
  int threads = 1;
  nlohmann::json frozen;
  std::string hash;
};

RunConfig parse_config(const nlohmann::json& raw);
RunConfig load_config(const std::filesystem::path& file);

/// Scalar drift families nameable in configs; L_F = scale for each.
NonlinearitySpec named_nonlinearity(const std::string& function, double scale,
                                    Eigen::Index collocation_size);

/// Typed JSON accessors with dotted-path diagnostics.
double config_number(const nlohmann::json& j, const std::string& path);
double config_number_or(const nlohmann::json& j, const std::string& path,
                        double fallback);
Eigen::Index config_index(const nlohmann::json& j, const std::string& path);
Eigen::Index config_index_or(const nlohmann::json& j, const std::string& path,
                             Eigen::Index fallback);
std::string config_string(const nlohmann::json& j, const std::string& path);
std::vector<double> config_numbers(const nlohmann::json& j,
                                   const std::string& path);
const nlohmann::json* config_find(const nlohmann::json& j,
                                  const std::string& path);

}  // namespace spde
