#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "spde/experiments.hpp"
#include "spde/montecarlo.hpp"
#include "spde/path.hpp"
#include "spde/quasipotential.hpp"
#include "spde/rate.hpp"

namespace spde {

/// Shortest round-trip decimal representation; keeps golden files stable.
std::string format_double(double value);

/// Write-then-rename so a failed command never leaves a partial file behind.
void write_text_atomic(const std::filesystem::path& file,
                       const std::string& content);

/// FNV-1a over the canonical (sorted-key) dump; embedded in every output.
std::string config_hash(const nlohmann::json& config);

/// Trajectory/path table: header `t, mode_1, ..., mode_n`, one row per node.
std::string path_to_csv(const SpectralPath& path);
SpectralPath path_from_csv(const std::string& content);
SpectralPath read_path_csv(const std::filesystem::path& file);

nlohmann::json to_json(const RateReport& report);
nlohmann::json to_json(const QuasipotentialResult& result);
nlohmann::json to_json(const MCEstimate& estimate);
nlohmann::json to_json(const SlopeFit& fit);
nlohmann::json to_json(const LadderReport& report);
nlohmann::json to_json(const TailReport& report);

/// Plain-text ladder table mirroring a study report.
std::string ladder_table(const LadderReport& report);

}  // namespace spde
