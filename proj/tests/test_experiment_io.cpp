#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include <json.hpp>

#include "appca/error.hpp"
#include "appca/experiment.hpp"
#include "appca/io.hpp"
#include "test_support.hpp"

using namespace appca;
using appca::testing::Gen;

TEST_CASE("doubles round-trip through CSV text") {
  std::mt19937_64 eng(5);
  std::uniform_int_distribution<std::uint64_t> bits;
  Eigen::MatrixXd m(20, 7);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      double v;
      do {
        const std::uint64_t b = bits(eng);
        std::memcpy(&v, &b, sizeof v);
      } while (!std::isfinite(v));
      m(i, j) = v;
    }
  m(0, 0) = 0.1;
  m(0, 1) = -0.0;
  m(0, 2) = std::numeric_limits<double>::denorm_min();
  m(0, 3) = std::numeric_limits<double>::max();
  const Eigen::MatrixXd back = io::parse_matrix_csv(io::matrix_to_csv(m));
  CHECK(back == m);
  CHECK(io::format_double(std::nan("")) == "NaN");
}

TEST_CASE("CSV parsing") {
  const Eigen::MatrixXd m = io::parse_matrix_csv("1,2,NaN\r\n4,5e-3,-6\n");
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(std::isnan(m(0, 2)));
  CHECK(m(1, 1) == 5e-3);
  CHECK_THROWS_AS(io::parse_matrix_csv("1,2\n3\n"), DataError);
  CHECK_THROWS_AS(io::parse_matrix_csv("1,abc\n"), DataError);
  CHECK_THROWS_AS(io::read_matrix_csv("/nonexistent/x.csv"), IoError);
}

TEST_CASE("layout and plan JSON round trips") {
  const BlockLayout l = appca::testing::layout_3x3(3, 2);
  const BlockLayout back = io::parse_layout_json(io::layout_to_json(l));
  CHECK(back.groups == l.groups);
  CHECK(back.blocks == l.blocks);
  CHECK(back.indicator == l.indicator);
  const auto j = nlohmann::json::parse(io::layout_to_json(l));
  CHECK(j.at("shared_features").empty());

  const ChainPlan plan{{{0, 1}, {1, 2}}};
  const std::string text = io::plan_to_json(plan);
  CHECK(nlohmann::json::parse(text) == nlohmann::json::parse(R"({"supergroups":[[1,2],[2,3]]})"));
  CHECK(io::parse_plan_json(text) == plan);
  CHECK_THROWS(io::parse_plan_json(R"({"supergroups":[[0,1]]})"));
  CHECK_THROWS(io::parse_layout_json(R"({"n":2})"));
}

TEST_CASE("run records serialize with exactly the documented fields") {
  RunRecord rec;
  rec.method = "appca";
  rec.n = 10;
  rec.p = 20;
  rec.alpha = 0.5;
  rec.beta = 0.5;
  rec.seed = 3;
  rec.normalized_error = 0.25;
  rec.wall_time = 1.5;
  auto j = nlohmann::json::parse(io::record_to_json(rec));
  CHECK(j.size() == 8);
  for (const char* key : {"method", "scenario", "n", "p", "alpha", "beta", "seed", "normalized_error"})
    CHECK(j.contains(key));
  CHECK(nlohmann::json::parse(io::record_to_json(rec, true)).at("wall_time") == 1.5);
  rec.normalized_error.reset();
  rec.error = "boom";
  j = nlohmann::json::parse(io::record_to_json(rec));
  CHECK(j.at("normalized_error").is_null());
  CHECK(j.at("error") == "boom");
}

TEST_CASE("grid parsing") {
  const ExperimentSpec spec = io::parse_grid_json(
      R"({"configs":[{"scenario":"3x3","n":50,"p":60}],"methods":["chain","two_step"],"reps":3,"base_seed":9,"workers":2})");
  REQUIRE(spec.configs.size() == 1);
  CHECK(spec.configs[0].scenario == Scenario::three_by_three);
  CHECK(spec.configs[0].p == 60);
  CHECK(spec.methods == std::vector<Method>{Method::chain, Method::two_step});
  CHECK(spec.reps == 3);
  CHECK(spec.base_seed == 9);
  CHECK(spec.workers == 2);
  CHECK_THROWS_AS(io::parse_grid_json(R"({"configs":[{}],"methods":["magic"]})"), ConfigError);
}

TEST_CASE("noise-free oracle sweep and failure records") {
  ExperimentSpec spec;
  SimConfig cfg;
  cfg.n = 30;
  cfg.p = 30;
  cfg.noise_sd = 0.0;
  spec.configs = {cfg};
  spec.methods = {Method::oracle};
  const auto recs = run_experiment(spec);
  REQUIRE(recs.size() == 1);
  REQUIRE(recs[0].ok());
  CHECK(*recs[0].normalized_error <= 1e-6);

  SimConfig c3 = cfg;
  c3.scenario = Scenario::three_by_three;
  c3.noise_sd = 1.0;
  spec.configs = {c3};
  spec.methods = {Method::shared_pca, Method::chain, Method::two_step};
  const auto mixed = run_experiment(spec);
  REQUIRE(mixed.size() == 3);
  CHECK_FALSE(mixed[0].ok());
  CHECK_FALSE(mixed[0].error.empty());
  CHECK(mixed[1].ok());
  CHECK(mixed[2].ok());
  const auto summary = summarize(mixed);
  CHECK(summary[0].failed == 1);
  CHECK(summary[0].count == 0);
}

TEST_CASE("sweeps are deterministic across worker counts") {
  ExperimentSpec spec;
  SimConfig a;
  a.n = 40;
  a.p = 40;
  SimConfig b = a;
  b.scenario = Scenario::three_by_three;
  spec.configs = {a, b};
  spec.methods = {Method::appca, Method::appca_crossfit, Method::chain, Method::two_step,
                  Method::oracle};
  spec.reps = 3;
  spec.base_seed = 11;
  spec.workers = 1;
  const std::string one = io::records_to_jsonl(run_experiment(spec));
  spec.workers = 4;
  const std::string four = io::records_to_jsonl(run_experiment(spec));
  CHECK(one == four);
  const auto recs = run_experiment(spec);
  CHECK(recs[0].seed == 11);
  CHECK(recs.back().seed == 13);
}

TEST_CASE("summaries and slopes") {
  std::vector<RunRecord> recs;
  for (Index n : {100, 200, 400, 800})
    for (int rep = 0; rep < 2; ++rep) {
      RunRecord r;
      r.method = "oracle";
      r.n = n;
      r.p = n;
      r.alpha = r.beta = 0.5;
      r.normalized_error = (rep == 0 ? 0.9 : 1.1) / std::sqrt(static_cast<double>(n));
      recs.push_back(r);
    }
  const auto summary = summarize(recs);
  REQUIRE(summary.size() == 4);
  CHECK(summary[0].count == 2);
  CHECK(summary[0].mean_error == doctest::Approx(0.1));
  CHECK(summary[0].sd_error == doctest::Approx(std::sqrt(0.02) / 10.0));
  const auto slopes = fit_slopes(summary);
  REQUIRE(slopes.size() == 1);
  CHECK(slopes[0].regime == "n=p");
  CHECK(slopes[0].slope == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(io::summary_to_csv(summary).rfind("method,scenario,n,p,alpha,beta,count,failed,mean_error,sd_error\n", 0) == 0);
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "appca_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.csv";
  Gen gen(1);
  const Eigen::MatrixXd m = gen.matrix(4, 3);
  io::write_matrix_csv(path, m);
  CHECK(io::read_matrix_csv(path) == m);
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  CHECK_THROWS_AS(io::write_file_atomic("/nonexistent/dir/file", "x"), IoError);
  std::filesystem::remove_all(dir);
}
