#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string err;
  std::string out;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "appca_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(APPCA_CLI_PATH) + " " + args + " > " + out.string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err), slurp(out)};
}

std::string dir(const std::string& name) { return (work_dir() / name).string(); }

double normalized_error_in(const fs::path& jsonl, const std::string& method) {
  std::istringstream lines(slurp(jsonl));
  std::string line;
  while (std::getline(lines, line)) {
    const json j = json::parse(line);
    if (j.at("method") == method) return j.at("normalized_error").get<double>();
  }
  return std::nan("");
}

}  // namespace

TEST_CASE("simulate writes five files and is reproducible") {
  const std::string args = "simulate --scenario 2x3 --n 60 --p 50 --alpha 0.5 --beta 0.5 --seed 7 --out ";
  REQUIRE(cli(args + dir("sim_a")).code == 0);
  REQUIRE(cli(args + dir("sim_b")).code == 0);
  for (const char* f : {"X.csv", "X_full.csv", "theta_true.csv", "layout.json", "manifest.json"})
    CHECK(fs::exists(fs::path(dir("sim_a")) / f));
  for (const char* f : {"X.csv", "X_full.csv", "theta_true.csv", "layout.json"})
    CHECK(slurp(fs::path(dir("sim_a")) / f) == slurp(fs::path(dir("sim_b")) / f));
  const json m = json::parse(slurp(fs::path(dir("sim_a")) / "manifest.json"));
  CHECK(m.at("command") == "simulate");
  CHECK(m.at("seeds") == json::array({7}));
  for (const char* key : {"version", "started_at", "finished_at", "outputs", "config", "argv"})
    CHECK(m.contains(key));

  REQUIRE(cli("replay " + dir("sim_a") + "/manifest.json --out " + dir("sim_c")).code == 0);
  CHECK(slurp(fs::path(dir("sim_a")) / "X.csv") == slurp(fs::path(dir("sim_c")) / "X.csv"));
}

TEST_CASE("simulate 3x3 has an empty shared set") {
  REQUIRE(cli("simulate --scenario 3x3 --n 40 --p 40 --alpha 1 --beta 1 --seed 2 --out " + dir("sim3")).code == 0);
  const json layout = json::parse(slurp(fs::path(dir("sim3")) / "layout.json"));
  CHECK(layout.at("shared_features").empty());
}

TEST_CASE("usage errors exit with code 2") {
  const Run r = cli("simulate --alpha 1.5 --out " + dir("bad"));
  CHECK(r.code == 2);
  CHECK(r.err.find("(0, 1]") != std::string::npos);
  CHECK(cli("simulate --scenario 5x5").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("fit then eval matches the in-process sweep") {
  const std::string sim = dir("fit_sim");
  REQUIRE(cli("simulate --scenario 2x3 --n 80 --p 80 --seed 5 --out " + sim).code == 0);
  const std::string grid = R"('{"configs":[{"scenario":"2x3","n":80,"p":80}],"methods":["appca","appca-crossfit","shared-pca","two-step"],"reps":1,"base_seed":5}')";
  REQUIRE(cli("sweep --grid-json " + grid + " --out " + dir("fit_sweep")).code == 0);
  const fs::path jsonl = fs::path(dir("fit_sweep")) / "results.jsonl";

  for (const std::string method : {"appca", "appca-crossfit", "shared-pca", "two-step"}) {
    const std::string out = dir("fit_" + method);
    REQUIRE(cli("fit --x " + sim + "/X.csv --layout " + sim + "/layout.json --method " + method +
                " --rank 6 --seed 5 --out " + out)
                .code == 0);
    REQUIRE(cli("eval --theta-hat " + out + "/theta_hat.csv --theta-true " + sim +
                "/theta_true.csv --out " + out + "/eval")
                .code == 0);
    const json report = json::parse(slurp(fs::path(out) / "eval" / "report.json"));
    CHECK(std::abs(report.at("normalized").get<double>() - normalized_error_in(jsonl, method)) <=
          1e-12);
    CHECK(fs::exists(fs::path(out) / "manifest.json"));
  }
}

TEST_CASE("fit on the cyclic layout") {
  const std::string sim = dir("fit3");
  REQUIRE(cli("simulate --scenario 3x3 --n 40 --p 40 --alpha 1 --beta 1 --seed 1 --out " + sim).code == 0);
  const std::string base = "fit --x " + sim + "/X.csv --layout " + sim + "/layout.json ";
  const Run appca = cli(base + "--method appca --rank 6 --out " + dir("fit3_appca"));
  CHECK(appca.code == 3);
  CHECK(appca.err.find("chain") != std::string::npos);

  REQUIRE(cli(base + "--method chain --plan auto --rank 6 --out " + dir("fit3_chain")).code == 0);
  const json m = json::parse(slurp(fs::path(dir("fit3_chain")) / "manifest.json"));
  CHECK(m.at("config").at("plan").at("supergroups").size() == 2);
  CHECK(fs::exists(fs::path(dir("fit3_chain")) / "plan.json"));

  REQUIRE(cli(base + "--method chain --plan auto --rank auto --out " + dir("fit3_auto")).code == 0);
  const json ma = json::parse(slurp(fs::path(dir("fit3_auto")) / "manifest.json"));
  CHECK(ma.at("config").at("rank") == 6);
  CHECK(ma.at("config").at("rank_source") == "auto");

  std::ofstream(fs::path(sim) / "bad_plan.json") << R"({"supergroups":[[1,2],[3]]})";
  CHECK(cli(base + "--method chain --plan " + sim + "/bad_plan.json --rank 6 --out " +
            dir("fit3_bad"))
            .code == 3);
  CHECK(cli(base + "--method chain --rank 41 --out " + dir("fit3_big")).code == 3);
  CHECK(cli(base + "--method oracle --rank 6").code == 2);
  CHECK(cli(base + "--method chain --rank six").code == 2);
}

TEST_CASE("eval edge cases") {
  const std::string sim = dir("sim_a");
  REQUIRE(fs::exists(fs::path(sim) / "theta_true.csv"));
  REQUIRE(cli("eval --theta-hat " + sim + "/theta_true.csv --theta-true " + sim +
              "/theta_true.csv --out " + dir("eval_same"))
              .code == 0);
  json report = json::parse(slurp(fs::path(dir("eval_same")) / "report.json"));
  CHECK(report.at("normalized").get<double>() <= 1e-12);

  // Reverse the column order of theta_true.
  std::istringstream rows(slurp(fs::path(sim) / "theta_true.csv"));
  std::ofstream permuted(fs::path(dir("eval_same")) / "permuted.csv");
  std::string line;
  while (std::getline(rows, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string c;
    while (std::getline(cs, c, ',')) cells.push_back(c);
    for (std::size_t k = cells.size(); k-- > 0;) permuted << cells[k] << (k ? "," : "\n");
  }
  permuted.close();
  REQUIRE(cli("eval --theta-hat " + dir("eval_same") + "/permuted.csv --theta-true " + sim +
              "/theta_true.csv --out " + dir("eval_perm"))
              .code == 0);
  report = json::parse(slurp(fs::path(dir("eval_perm")) / "report.json"));
  CHECK(report.at("normalized").get<double>() <= 1e-9);

  CHECK(cli("eval --theta-hat " + sim + "/X.csv --theta-true " + sim +
            "/theta_true.csv --out " + dir("eval_bad"))
            .code == 3);
}

TEST_CASE("sweep exit codes and replay determinism") {
  const std::string failing = R"('{"configs":[{"scenario":"3x3","n":30,"p":30}],"methods":["shared-pca","appca"]}')";
  CHECK(cli("sweep --grid-json " + failing + " --out " + dir("sweep_fail")).code == 4);
  const std::string mixed = R"('{"configs":[{"scenario":"3x3","n":30,"p":30}],"methods":["shared-pca","chain","two-step"],"reps":2}')";
  REQUIRE(cli("sweep --grid-json " + mixed + " --workers 1 --out " + dir("sweep_mixed")).code == 0);
  const std::string jsonl = slurp(fs::path(dir("sweep_mixed")) / "results.jsonl");
  CHECK(jsonl.find("\"error\"") != std::string::npos);

  REQUIRE(cli("replay " + dir("sweep_mixed") + "/manifest.json --workers 4 --out " +
              dir("sweep_replay"))
              .code == 0);
  CHECK(slurp(fs::path(dir("sweep_replay")) / "results.jsonl") == jsonl);
  CHECK(cli("sweep --out " + dir("sweep_none")).code == 2);
}

TEST_CASE("validate and rank") {
  const std::string sim = dir("sim3");
  Run r = cli("validate --layout " + sim + "/layout.json --plan auto");
  CHECK(r.code == 0);
  CHECK(json::parse(r.out).at("valid") == true);

  std::ofstream(fs::path(sim) / "broken.json")
      << R"({"n":4,"p":4,"groups":[[0,1],[1,2,3]],"blocks":[[0,1],[2,3]],"indicator":[[1,0],[1,0]]})";
  r = cli("validate --layout " + sim + "/broken.json");
  CHECK(r.code == 3);
  const json d = json::parse(r.out);
  CHECK(d.at("valid") == false);
  CHECK(d.at("layout").size() == 2);

  r = cli("rank --x " + sim + "/X_full.csv");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("rank") == 6);
  r = cli("rank --x " + sim + "/X.csv --layout " + sim + "/layout.json");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("rank") == 6);
}
