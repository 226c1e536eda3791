#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "spde/config.hpp"
#include "spde/errors.hpp"
#include "spde/experiments.hpp"
#include "spde/io.hpp"
#include "spde/montecarlo.hpp"
#include "spde/quasipotential.hpp"
#include "spde/rate.hpp"
#include "spde/skeleton.hpp"
#include "spde/version.hpp"

namespace {

using nlohmann::json;
using namespace spde;

json metadata(const RunConfig& cfg) {
  json meta{{"config_hash", cfg.hash},
            {"seed", cfg.integrator.seed},
            {"version", kVersion},
            {"rng", kRngName},
            {"n", cfg.model.dim()},
            {"eps", cfg.model.eps},
            {"tau", cfg.integrator.tau},
            {"stability_enforced", cfg.integrator.enforce_stability},
            {"assumption_compliant", cfg.model.op.assumption_compliant},
            {"nonlinearity", cfg.model.nonlinearity.label}};
  if (cfg.model.op.delta) meta["delta"] = *cfg.model.op.delta;
  return meta;
}

std::string csv_banner(const RunConfig& cfg) {
  return "# config_hash=" + cfg.hash +
         " seed=" + std::to_string(cfg.integrator.seed) + " version=" +
         kVersion + "\n";
}

void emit_json(const RunConfig& cfg, const std::string& name, json body) {
  body["meta"] = metadata(cfg);
  write_text_atomic(cfg.out_dir / name, body.dump(2) + "\n");
}

Field study_field(const RunConfig& cfg, const std::string& path,
                  std::optional<Field> fallback = std::nullopt) {
  const json* node = config_find(cfg.study, path);
  if (!node) {
    if (fallback) return *fallback;
    throw ConfigError("study." + path + ": missing required array");
  }
  const auto values = config_numbers(cfg.study, path);
  if (Eigen::Index(values.size()) != cfg.model.dim())
    throw ConfigError("study." + path + ": length must equal model.n");
  return Eigen::Map<const Eigen::ArrayXd>(values.data(), values.size());
}

int cmd_simulate(const RunConfig& cfg) {
  const Field y =
      study_field(cfg, "initial", Field(Field::Zero(cfg.model.dim())));
  const SpectralPath path =
      simulate_path(y, cfg.horizon, cfg.model, cfg.integrator);
  write_text_atomic(cfg.out_dir / "trajectory.csv",
                    csv_banner(cfg) + path_to_csv(path));
  emit_json(cfg, "simulate.json",
            json{{"nodes", path.steps() + 1},
                 {"h", path.h},
                 {"T", cfg.horizon}});
  return 0;
}

int cmd_rate(const RunConfig& cfg) {
  const std::string file = config_string(cfg.study, "path_file");
  const SpectralPath z = read_path_csv(file);
  if (z.dim() != cfg.model.dim())
    throw ConfigError("study.path_file: path dimension != model.n");
  const Field y = study_field(cfg, "y", Field(z.node(0)));
  const std::string mode = config_find(cfg.study, "mode")
                               ? config_string(cfg.study, "mode")
                               : "semi";
  RateReport report;
  if (mode == "semi") {
    report = rate_semi(cfg.model, z, y);
  } else if (mode == "full") {
    report = rate_full(cfg.model, z, y, config_number(cfg.study, "tau"));
  } else {
    throw ConfigError("study.mode: expected 'semi' or 'full'");
  }
  emit_json(cfg, "rate.json", json{{"rate", to_json(report)}, {"mode", mode}});
  return 0;
}

QuasipotentialOptions quasipotential_options(const RunConfig& cfg) {
  QuasipotentialOptions opts;
  if (config_find(cfg.study, "horizons"))
    opts.horizons = config_numbers(cfg.study, "horizons");
  opts.intervals = config_index_or(cfg.study, "intervals", opts.intervals);
  opts.multi_starts =
      int(config_index_or(cfg.study, "multi_starts", opts.multi_starts));
  opts.optim.max_iterations = int(config_index_or(
      cfg.study, "max_iterations", opts.optim.max_iterations));
  opts.optim.gradient_tolerance = config_number_or(
      cfg.study, "gradient_tolerance", opts.optim.gradient_tolerance);
  opts.seed = cfg.integrator.seed;
  return opts;
}

int cmd_quasipotential(const RunConfig& cfg) {
  const Field u = study_field(cfg, "target");
  const QuasipotentialOptions opts = quasipotential_options(cfg);
  QuasipotentialResult result;
  const json* tau_node = config_find(cfg.study, "tau");
  if (tau_node) {
    result = minimize_quasipotential_full(
        cfg.model, u, config_number(cfg.study, "tau"), opts);
  } else {
    result = minimize_quasipotential(cfg.model, u, opts);
  }
  write_text_atomic(cfg.out_dir / "quasipotential_path.csv",
                    csv_banner(cfg) + path_to_csv(result.path));
  emit_json(cfg, "quasipotential.json",
            json{{"quasipotential", to_json(result)}});
  return 0;
}

SpectralPath target_path(const RunConfig& cfg) {
  if (config_find(cfg.study, "path_file"))
    return read_path_csv(config_string(cfg.study, "path_file"));
  const Field coeffs = study_field(cfg, "control");
  const double T = config_number(cfg.study, "T");
  const Eigen::Index intervals = config_index_or(
      cfg.study, "intervals", Eigen::Index(std::llround(T / cfg.integrator.tau)));
  const Control psi = constant_control(coeffs, T, intervals);
  const Field y = study_field(cfg, "initial", Field(Field::Zero(cfg.model.dim())));
  return solve_skeleton(y, psi, cfg.model, 16);
}

int cmd_mc_verify(const RunConfig& cfg) {
  const SpectralPath z = target_path(cfg);
  const double delta = config_number(cfg.study, "delta");
  const auto eps_ladder = config_numbers(cfg.study, "eps_ladder");
  const auto samples =
      std::int64_t(config_index_or(cfg.study, "samples", 10000));

  const SlopeFit fit =
      ldp_slope(cfg.model, z, delta, eps_ladder, samples, cfg.integrator.seed,
                cfg.threads, cfg.integrator.tau);

  json body{{"slope_fit", to_json(fit)}, {"delta", delta}};

  if (config_find(cfg.study, "deltas")) {
    const auto deltas = config_numbers(cfg.study, "deltas");
    MCOptions opts;
    opts.samples = samples;
    opts.seed = cfg.integrator.seed;
    opts.threads = cfg.threads;
    json sweeps = json::array();
    for (double eps : eps_ladder) {
      const auto estimates = tube_probabilities(cfg.model, z, deltas, eps,
                                                cfg.integrator.tau, opts);
      json row = json::array();
      for (const auto& e : estimates) row.push_back(to_json(e));
      sweeps.push_back({{"eps", eps}, {"estimates", row}});
    }
    body["delta_sweeps"] = sweeps;
  }

  if (config_find(cfg.study, "tube_infimum") &&
      cfg.study["tube_infimum"].get<bool>()) {
    const TubeInfimum inf = tube_action_infimum(cfg.model, z, delta);
    body["tube_infimum"] =
        json{{"value", inf.value}, {"converged", inf.converged}};
  }

  std::string csv = csv_banner(cfg) + "eps,p_hat,hits,samples,std_error,value\n";
  for (const auto& entry : fit.entries)
    csv += format_double(entry.eps) + "," + format_double(entry.estimate.p_hat) +
           "," + std::to_string(entry.estimate.hits) + "," +
           std::to_string(entry.estimate.samples) + "," +
           format_double(entry.estimate.std_error) + "," +
           format_double(entry.value) + "\n";
  write_text_atomic(cfg.out_dir / "mc_verify.csv", csv);
  emit_json(cfg, "mc_verify.json", body);
  return 0;
}

int cmd_tail_check(const RunConfig& cfg) {
  const double eps = cfg.model.eps;
  const double c = cfg.model.dissipativity();
  const double burn_in =
      config_number_or(cfg.study, "burn_in", c > 0.0 ? 10.0 / c : 1.0);
  const double window = config_number(cfg.study, "window");
  const Eigen::Index thin = config_index_or(cfg.study, "thin_steps", 10);

  const Eigen::MatrixXd samples = empirical_invariant_measure(
      cfg.model, eps, cfg.integrator.tau, burn_in, window, thin,
      cfg.integrator.seed);

  const auto thresholds = config_numbers(cfg.study, "thresholds");
  std::vector<double> alphas;
  if (config_find(cfg.study, "alphas"))
    alphas = config_numbers(cfg.study, "alphas");
  const TailReport report = tail_check(samples, thresholds, eps, alphas);

  json body{{"tail", to_json(report)},
            {"samples", samples.cols()},
            {"burn_in", burn_in},
            {"thin_steps", thin}};

  // Stationary moments and the Fernique cross-check.
  const Eigen::ArrayXd mean = samples.rowwise().mean().array();
  Eigen::ArrayXd var(samples.rows());
  for (Eigen::Index i = 0; i < samples.rows(); ++i)
    var[i] = (samples.row(i).array() - mean[i]).square().sum() /
             double(samples.cols() - 1);
  body["stationary_mean"] = std::vector<double>(mean.data(),
                                                mean.data() + mean.size());
  body["stationary_variance"] =
      std::vector<double>(var.data(), var.data() + var.size());

  const double kappa_fraction =
      config_number_or(cfg.study, "kappa_fraction", 0.5);
  const double t_fernique = config_number_or(cfg.study, "fernique_t", 2.0);
  const double kappa = kappa_fraction * cfg.model.op.min_lambda_over_q();
  MCOptions opts;
  opts.samples = config_index_or(cfg.study, "fernique_samples", 100000);
  opts.seed = cfg.integrator.seed;
  opts.stream_base = 0x7e11u << 16;
  opts.threads = cfg.threads;
  const double exact = fernique_moment_exact(cfg.model.op, kappa, t_fernique);
  const MomentEstimate mc = fernique_moment_mc(cfg.model.op, kappa, t_fernique, opts);
  body["fernique"] = json{{"kappa", kappa},
                          {"t", t_fernique},
                          {"exact", exact},
                          {"mc_mean", mc.mean},
                          {"mc_std_error", mc.std_error},
                          {"mc_samples", mc.samples}};

  std::string csv = csv_banner(cfg) + "K,mu_hat,exceedances,value\n";
  for (const auto& entry : report.entries)
    csv += format_double(entry.threshold) + "," + format_double(entry.mu_hat) +
           "," + std::to_string(entry.exceedances) + "," +
           format_double(entry.value) + "\n";
  write_text_atomic(cfg.out_dir / "tail_check.csv", csv);
  emit_json(cfg, "tail_check.json", body);
  return 0;
}

std::vector<Eigen::Index> index_ladder(const RunConfig& cfg,
                                       const std::string& key) {
  const auto values = config_numbers(cfg.study, key);
  std::vector<Eigen::Index> out;
  for (double v : values) out.push_back(Eigen::Index(std::llround(v)));
  return out;
}

int cmd_preserve(const RunConfig& cfg) {
  const std::string which = config_string(cfg.study, "which");
  LadderReport report;
  json body;
  if (which == "spatial") {
    const Field x = study_field(cfg, "x");
    const Field phi_coeffs = study_field(cfg, "phi");
    const double T = config_number_or(cfg.study, "T", 1.0);
    const Eigen::Index intervals = config_index_or(cfg.study, "intervals", 400);
    const Control phi = constant_control(phi_coeffs, T, intervals);
    report = spatial_preservation_study(cfg.model, x, phi,
                                        index_ladder(cfg, "n_ladder"));
  } else if (which == "temporal") {
    const SpectralPath z = target_path(cfg);
    const Field y = study_field(cfg, "initial", Field(z.node(0)));
    report = temporal_gap_study(cfg.model, z, y,
                                config_numbers(cfg.study, "tau_ladder"));
  } else if (which == "quasipotential") {
    const Field u = study_field(cfg, "target");
    const auto result = quasipotential_preservation_study(
        cfg.model, u, index_ladder(cfg, "n_ladder"),
        config_numbers(cfg.study, "tau_ladder"), quasipotential_options(cfg));
    body["spatial"] = to_json(result.spatial);
    body["temporal"] = to_json(result.temporal);
    body["reference_value"] = result.reference_value;
    body["cross_check_dim"] = result.cross_check_dim;
    body["minimizer_value"] = result.minimizer_value;
    body["closed_form_value"] = result.closed_form_value;
    write_text_atomic(cfg.out_dir / "preserve_quasipotential.txt",
                      ladder_table(result.spatial) + "\n" +
                          ladder_table(result.temporal));
    emit_json(cfg, "preserve_quasipotential.json", body);
    return 0;
  } else {
    throw ConfigError(
        "study.which: expected spatial, temporal or quasipotential");
  }
  body["report"] = to_json(report);
  write_text_atomic(cfg.out_dir / ("preserve_" + which + ".txt"),
                    ladder_table(report));
  emit_json(cfg, "preserve_" + which + ".json", body);
  return 0;
}

int cmd_tau_max(const RunConfig& cfg) {
  const double tau0 = max_stable_stepsize(cfg.model.op.lambda1(),
                                          cfg.model.nonlinearity.lipschitz);
  std::cout << format_double(tau0) << "\n";
  emit_json(cfg, "tau_max.json",
            json{{"tau_max", tau0},
                 {"lambda1", cfg.model.op.lambda1()},
                 {"lipschitz", cfg.model.nonlinearity.lipschitz}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral SPDE large-deviations toolkit"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_override;
  std::int64_t seed_override = -1;
  int threads_override = 0;
  app.add_option("--config", config_file, "run configuration (JSON)")
      ->required();
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--seed", seed_override, "seed override");
  app.add_option("--threads", threads_override, "worker thread override");

  const std::vector<std::pair<std::string, int (*)(const RunConfig&)>>
      commands = {{"simulate", cmd_simulate},
                  {"rate", cmd_rate},
                  {"quasipotential", cmd_quasipotential},
                  {"mc-verify", cmd_mc_verify},
                  {"tail-check", cmd_tail_check},
                  {"preserve", cmd_preserve},
                  {"tau-max", cmd_tau_max}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json raw;
    {
      std::ifstream in(config_file);
      if (!in) throw spde::ConfigError("cannot open config: " + config_file);
      in >> raw;
    }
    if (seed_override >= 0)
      raw["integrator"]["seed"] = std::uint64_t(seed_override);
    spde::RunConfig cfg = spde::parse_config(raw);

    if (const char* env = std::getenv("SPDE_LDP_OUT")) cfg.out_dir = env;
    if (const char* env = std::getenv("SPDE_LDP_THREADS"))
      cfg.threads = std::max(1, std::atoi(env));
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (threads_override > 0) cfg.threads = threads_override;

    for (const auto& [name, fn] : commands)
      if (app.get_subcommand(name)->parsed()) return fn(cfg);
    std::cerr << "no command selected\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
