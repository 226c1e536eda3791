#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>

#include "spde/config.hpp"
#include "spde/errors.hpp"
#include "spde/io.hpp"
#include "spde/rng.hpp"

using namespace spde;
using nlohmann::json;

TEST_CASE("shortest round-trip formatting") {
  RandomStream stream(101, 0);
  for (int i = 0; i < 200; ++i) {
    const double value = std::exp(20.0 * (stream.next_uniform() - 0.5)) *
                         (stream.next_uniform() < 0.5 ? -1.0 : 1.0);
    const std::string text = format_double(value);
    double parsed = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), parsed);
    REQUIRE(parsed == value);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("path CSV round trip") {
  RandomStream stream(103, 0);
  SpectralPath path;
  path.h = 0.125;
  path.nodes.resize(3, 9);
  for (int j = 0; j < 9; ++j)
    for (int i = 0; i < 3; ++i) path.nodes(i, j) = stream.next_normal();
  const std::string csv = path_to_csv(path);
  const SpectralPath back = path_from_csv(csv);
  CHECK(back.h == path.h);
  CHECK(back.nodes == path.nodes);

  // Metadata comment lines are skipped.
  const SpectralPath commented = path_from_csv("# run metadata\n" + csv);
  CHECK(commented.nodes == path.nodes);

  CHECK_THROWS_AS(path_from_csv("t,mode_1\n0,1\n"), ConfigError);
  CHECK_THROWS_AS(path_from_csv("x,mode_1\n0,1\n0.1,2\n"), ConfigError);
  CHECK_THROWS_AS(path_from_csv("t,mode_1\n0,1\n0.1,2,3\n"), ConfigError);
}

TEST_CASE("atomic writes leave no temporaries") {
  const auto dir = std::filesystem::temp_directory_path() / "spde_io_test";
  std::filesystem::remove_all(dir);
  const auto file = dir / "nested" / "out.txt";
  write_text_atomic(file, "payload");
  std::ifstream in(file);
  std::string content;
  std::getline(in, content);
  CHECK(content == "payload");
  CHECK_FALSE(std::filesystem::exists(file.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}

namespace {

json base_config() {
  return json{{"model",
               {{"n", 2},
                {"delta", 2.0},
                {"eps", 0.3},
                {"nonlinearity", {{"kind", "zero"}}}}},
              {"integrator", {{"tau", 0.05}, {"T", 1.0}, {"seed", 42}}},
              {"output", {{"directory", "out"}, {"threads", 2}}}};
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_config(base_config());
  CHECK(cfg.model.dim() == 2);
  CHECK(cfg.model.eps == 0.3);
  CHECK(cfg.integrator.tau == 0.05);
  CHECK(cfg.integrator.seed == 42);
  CHECK(cfg.horizon == 1.0);
  CHECK(cfg.threads == 2);
  CHECK(cfg.out_dir == std::filesystem::path("out"));
  CHECK(cfg.hash.size() == 16);

  SUBCASE("field-path diagnostics") {
    json bad = base_config();
    bad["model"].erase("n");
    CHECK_THROWS_WITH_AS(parse_config(bad),
                         "model.n: missing required integer", ConfigError);
    bad = base_config();
    bad["model"]["q"] = {1.0, 2.0};
    CHECK_THROWS_WITH_AS(parse_config(bad),
                         "model: exactly one of delta or q must be given",
                         ConfigError);
    bad = base_config();
    bad["model"]["typo"] = 1;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base_config();
    bad["integrator"]["tau"] = -0.1;
    CHECK_THROWS_WITH_AS(parse_config(bad), "integrator.tau: must be positive",
                         ConfigError);
  }
  SUBCASE("explicit noise spectrum") {
    json cfg_q = base_config();
    cfg_q["model"].erase("delta");
    cfg_q["model"]["q"] = {1.0, 4.0};
    const RunConfig parsed = parse_config(cfg_q);
    CHECK(parsed.model.op.q[1] == 4.0);
    CHECK_FALSE(parsed.model.op.delta.has_value());
  }
  SUBCASE("nonlinearity families") {
    json nl = base_config();
    nl["model"]["nonlinearity"] =
        json{{"kind", "nemytskij"}, {"function", "sin"}, {"scale", 0.5}};
    const RunConfig parsed = parse_config(nl);
    CHECK(parsed.model.nonlinearity.kind == NonlinearityKind::Nemytskij);
    CHECK(parsed.model.nonlinearity.lipschitz == 0.5);
    CHECK(parsed.model.nonlinearity.collocation_size == 8);  // default 4n

    nl["model"]["nonlinearity"] = json{
        {"kind", "linear_diagonal"}, {"coefficients", {0.5, -0.25}}};
    CHECK(parse_config(nl).model.nonlinearity.kind ==
          NonlinearityKind::LinearDiagonal);

    nl["model"]["nonlinearity"] = json{{"kind", "nemytskij"},
                                       {"function", "nope"},
                                       {"scale", 1.0}};
    CHECK_THROWS_AS(parse_config(nl), ConfigError);
  }
  SUBCASE("hash ignores the output block but tracks the model") {
    json a = base_config();
    json b = base_config();
    b["output"]["directory"] = "elsewhere";
    CHECK(parse_config(a).hash == parse_config(b).hash);
    b = base_config();
    b["model"]["eps"] = 0.4;
    CHECK(parse_config(a).hash != parse_config(b).hash);
  }
}

TEST_CASE("json serializers emit complete records") {
  RateReport rate;
  rate.value = 0.25;
  rate.h = 0.01;
  rate.frozen_tau = 0.1;
  const json j = to_json(rate);
  CHECK(j["value"] == 0.25);
  CHECK(j["frozen_tau"] == 0.1);

  RateReport infinite;
  infinite.infinite = true;
  CHECK(to_json(infinite)["value"] == "inf");

  QuasipotentialResult qp;
  qp.value = 1.5;
  qp.per_horizon = {{0.5, 2.0}, {1.0, 1.5}};
  CHECK(to_json(qp)["per_horizon"].size() == 2);

  LadderReport ladder;
  ladder.variable = "tau";
  ladder.ladder = {0.1, 0.05};
  ladder.rate_errors = {1e-3, 5e-4};
  const std::string table = ladder_table(ladder);
  CHECK(table.find("tau") != std::string::npos);
  const bool has_value = table.find("0.0005") != std::string::npos ||
                         table.find("5e-04") != std::string::npos;
  CHECK(has_value);
}
