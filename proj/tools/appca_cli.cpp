#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "appca/appca.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitAllFailed = 4;

struct CliError : std::runtime_error {
  CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

int exit_code_for(appca_status s) {
  switch (s) {
    case APPCA_OK: return kExitOk;
    case APPCA_ERR_CONFIG:
    case APPCA_ERR_INVALID_ARGUMENT: return kExitUsage;
    case APPCA_ERR_DOMAIN:
    case APPCA_ERR_DATA:
    case APPCA_ERR_FEASIBILITY:
    case APPCA_ERR_CONDITIONING: return kExitData;
    default: return kExitFailure;
  }
}

void check(appca_status s, const std::string& context) {
  if (s != APPCA_OK) {
    throw CliError(exit_code_for(s),
                   context + ": " + appca_status_name(s) + ": " + appca_last_error());
  }
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using LayoutPtr = std::unique_ptr<appca_layout, Deleter<appca_layout, appca_layout_free>>;
using MatrixPtr = std::unique_ptr<appca_matrix, Deleter<appca_matrix, appca_matrix_free>>;
using MaskedPtr = std::unique_ptr<appca_masked, Deleter<appca_masked, appca_masked_free>>;
using PlanPtr = std::unique_ptr<appca_plan, Deleter<appca_plan, appca_plan_free>>;
using EmbeddingPtr =
    std::unique_ptr<appca_embedding, Deleter<appca_embedding, appca_embedding_free>>;
using SimPtr = std::unique_ptr<appca_sim, Deleter<appca_sim, appca_sim_free>>;
using SweepPtr = std::unique_ptr<appca_sweep, Deleter<appca_sweep, appca_sweep_free>>;
using StringPtr = std::unique_ptr<char, Deleter<char, appca_string_free>>;

std::string take_string(char* s) {
  StringPtr owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitData, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError(kExitFailure, "cannot write " + path.string());
    out << text;
    if (!out.flush()) throw CliError(kExitFailure, "cannot write " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw CliError(kExitFailure, "cannot write " + path.string() + ": " + ec.message());
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError(kExitFailure, "cannot create output directory " + dir + ": " + ec.message());
}

// Manifest written next to every command's outputs. `replay_args` is the
// canonical argument list (absolute input paths, no --out) that `replay`
// feeds back through the parser.
struct Manifest {
  json j;

  Manifest(const std::string& command, const std::vector<std::string>& argv,
           std::vector<std::string> replay_args)
      : j{{"command", command},
          {"argv", argv},
          {"replay_args", std::move(replay_args)},
          {"version", appca_version()},
          {"started_at", utc_now()}} {}

  void write(const std::string& out_dir, const std::vector<std::string>& outputs) {
    j["finished_at"] = utc_now();
    j["output_dir"] = absolute(out_dir);
    j["outputs"] = outputs;
    write_text_atomic(fs::path(out_dir) / "manifest.json", j.dump(2) + "\n");
  }
};

struct Invocation {
  std::vector<std::string> argv;
};

// ---- simulate ------------------------------------------------------------

struct SimulateOpts {
  std::string scenario = "2x3";
  long long n = 500;
  long long p = 500;
  long long r = 6;
  double alpha = 0.5;
  double beta = 0.5;
  std::uint64_t seed = 0;
  double noise_sd = 1.0;
  std::string out = ".";
};

int cmd_simulate(const SimulateOpts& o, const Invocation& inv) {
  const json cfg = {{"scenario", o.scenario}, {"n", o.n},         {"p", o.p},
                    {"r", o.r},               {"alpha", o.alpha}, {"beta", o.beta},
                    {"seed", o.seed},         {"noise_sd", o.noise_sd}};
  Manifest manifest("simulate", inv.argv,
                    {"simulate", "--scenario", o.scenario, "--n", std::to_string(o.n), "--p",
                     std::to_string(o.p), "--r", std::to_string(o.r), "--alpha",
                     format_number(o.alpha), "--beta", format_number(o.beta), "--seed",
                     std::to_string(o.seed), "--noise-sd", format_number(o.noise_sd)});
  manifest.j["config"] = cfg;
  manifest.j["seeds"] = {o.seed};

  appca_sim* raw = nullptr;
  check(appca_sim_generate(cfg.dump().c_str(), &raw), "simulate");
  SimPtr sim(raw);
  make_dir(o.out);
  check(appca_sim_write(sim.get(), o.out.c_str()), "simulate");
  manifest.write(o.out, {"X.csv", "X_full.csv", "theta_true.csv", "layout.json"});
  return kExitOk;
}

// ---- fit -----------------------------------------------------------------

struct FitOpts {
  std::string x;
  std::string layout;
  std::string method;
  std::string rank;
  std::string plan = "auto";
  long long reference = 1;
  std::uint64_t seed = 0;
  long long rmax = 12;
  std::string out = ".";
};

LayoutPtr load_layout(const std::string& path) {
  appca_layout* raw = nullptr;
  check(appca_layout_read(path.c_str(), &raw), "layout " + path);
  return LayoutPtr(raw);
}

MatrixPtr load_matrix(const std::string& path) {
  appca_matrix* raw = nullptr;
  check(appca_matrix_read_csv(path.c_str(), &raw), "matrix " + path);
  return MatrixPtr(raw);
}

MaskedPtr bind(const appca_matrix* m, const appca_layout* layout) {
  appca_masked* raw = nullptr;
  check(appca_masked_create(m, layout, &raw), "data");
  return MaskedPtr(raw);
}

std::string plan_json(const appca_plan* plan) {
  char* text = nullptr;
  check(appca_plan_to_json(plan, &text), "plan");
  return take_string(text);
}

PlanPtr resolve_plan(const std::string& spec, const appca_layout* layout) {
  appca_plan* raw = nullptr;
  if (spec == "auto") {
    check(appca_plan_discover(layout, &raw), "chain discovery");
    return PlanPtr(raw);
  }
  check(appca_plan_read(spec.c_str(), &raw), "plan " + spec);
  PlanPtr plan(raw);
  char* diags = nullptr;
  size_t violations = 0;
  check(appca_plan_validate(layout, plan.get(), &diags, &violations), "plan " + spec);
  const std::string text = take_string(diags);
  if (violations > 0) throw CliError(kExitData, "invalid chain plan " + spec + ": " + text);
  return plan;
}

int cmd_fit(const FitOpts& o, const Invocation& inv) {
  appca_method method{};
  if (appca_parse_method(o.method.c_str(), &method) != APPCA_OK ||
      method == APPCA_METHOD_ORACLE) {
    throw CliError(kExitUsage, "--method must be one of appca, appca-crossfit, chain, "
                               "shared-pca, two-step; got '" + o.method + "'");
  }
  const bool auto_rank = o.rank == "auto";
  long long rank_given = 0;
  if (!auto_rank) {
    const auto res = std::from_chars(o.rank.data(), o.rank.data() + o.rank.size(), rank_given);
    if (res.ec != std::errc() || res.ptr != o.rank.data() + o.rank.size() || rank_given < 1)
      throw CliError(kExitUsage, "--rank must be a positive integer or 'auto'; got '" + o.rank + "'");
  }
  if (o.reference < 1) throw CliError(kExitUsage, "--reference is a 1-based group label");
  if (o.rmax < 1) throw CliError(kExitUsage, "--rmax must be positive");

  std::vector<std::string> replay = {"fit",      "--x",      absolute(o.x),
                                     "--layout", absolute(o.layout), "--method",
                                     appca_method_name(method), "--rank", o.rank,
                                     "--plan",   o.plan == "auto" ? o.plan : absolute(o.plan),
                                     "--reference", std::to_string(o.reference),
                                     "--seed",   std::to_string(o.seed),
                                     "--rmax",   std::to_string(o.rmax)};
  Manifest manifest("fit", inv.argv, replay);
  manifest.j["seeds"] = {o.seed};

  LayoutPtr layout = load_layout(o.layout);
  MatrixPtr values = load_matrix(o.x);
  MaskedPtr x = bind(values.get(), layout.get());

  size_t rank = static_cast<size_t>(rank_given);
  if (auto_rank) {
    check(appca_rank_select_blockwise(x.get(), static_cast<size_t>(o.rmax), &rank),
          "rank selection");
    std::cerr << "selected rank " << rank << "\n";
  }

  appca_fit_options options;
  appca_fit_options_init(&options);
  options.reference_group = static_cast<size_t>(o.reference - 1);
  options.fold_seed = o.seed;
  PlanPtr plan;
  if (method == APPCA_METHOD_CHAIN) {
    plan = resolve_plan(o.plan, layout.get());
    options.plan = plan.get();
  }

  appca_embedding* raw = nullptr;
  check(appca_fit(x.get(), method, rank, &options, &raw), appca_method_name(method));
  EmbeddingPtr embedding(raw);

  make_dir(o.out);
  std::vector<std::string> outputs = {"theta_hat.csv"};
  check(appca_embedding_write_csv(embedding.get(), (fs::path(o.out) / "theta_hat.csv").c_str()),
        "write");
  json config = {{"x", absolute(o.x)},
                 {"layout", absolute(o.layout)},
                 {"method", appca_method_name(method)},
                 {"rank", rank},
                 {"rank_source", auto_rank ? "auto" : "given"},
                 {"reference", o.reference},
                 {"fold_seed", o.seed}};
  if (auto_rank) config["rmax"] = o.rmax;
  if (plan) {
    const std::string text = plan_json(plan.get());
    config["plan"] = json::parse(text);
    write_text_atomic(fs::path(o.out) / "plan.json", text + "\n");
    outputs.push_back("plan.json");
  }
  manifest.j["config"] = std::move(config);
  manifest.write(o.out, outputs);
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalOpts {
  std::string theta_hat;
  std::string theta_true;
  std::string out = ".";
};

int cmd_eval(const EvalOpts& o, const Invocation& inv) {
  Manifest manifest("eval", inv.argv,
                    {"eval", "--theta-hat", absolute(o.theta_hat), "--theta-true",
                     absolute(o.theta_true)});
  MatrixPtr hat = load_matrix(o.theta_hat);
  MatrixPtr truth = load_matrix(o.theta_true);
  if (appca_matrix_rows(hat.get()) != appca_matrix_rows(truth.get()) ||
      appca_matrix_cols(hat.get()) != appca_matrix_cols(truth.get())) {
    std::ostringstream msg;
    msg << "shape mismatch: theta_hat is " << appca_matrix_rows(hat.get()) << "x"
        << appca_matrix_cols(hat.get()) << ", theta_true is " << appca_matrix_rows(truth.get())
        << "x" << appca_matrix_cols(truth.get());
    throw CliError(kExitData, msg.str());
  }
  double normalized = 0.0;
  char* report = nullptr;
  check(appca_alignment_error(hat.get(), truth.get(), &normalized, &report), "eval");
  const std::string text = take_string(report);
  make_dir(o.out);
  write_text_atomic(fs::path(o.out) / "report.json", text + "\n");
  manifest.j["config"] = {{"theta_hat", absolute(o.theta_hat)},
                          {"theta_true", absolute(o.theta_true)}};
  manifest.j["seeds"] = json::array();
  manifest.write(o.out, {"report.json"});
  std::cout << text << "\n";
  return kExitOk;
}

// ---- sweep ---------------------------------------------------------------

struct SweepOpts {
  std::string grid;
  std::string grid_json;
  int workers = 0;
  std::string out = ".";
};

int cmd_sweep(const SweepOpts& o, const Invocation& inv) {
  if (o.grid.empty() == o.grid_json.empty())
    throw CliError(kExitUsage, "sweep needs exactly one of --grid or --grid-json");
  const std::string text = o.grid.empty() ? o.grid_json : read_text(o.grid);
  json grid;
  try {
    grid = json::parse(text);
  } catch (const json::exception& e) {
    throw CliError(kExitUsage, std::string("grid is not valid JSON: ") + e.what());
  }
  std::vector<std::string> replay = {"sweep", "--grid-json", grid.dump()};
  if (o.workers > 0) {
    replay.push_back("--workers");
    replay.push_back(std::to_string(o.workers));
  }
  Manifest manifest("sweep", inv.argv, replay);
  manifest.j["config"] = grid;
  const auto base = grid.value("base_seed", std::uint64_t{0});
  const int reps = grid.value("reps", 1);
  json seeds = json::array();
  for (int k = 0; k < reps; ++k) seeds.push_back(base + static_cast<std::uint64_t>(k));
  manifest.j["seeds"] = std::move(seeds);

  appca_sweep* raw = nullptr;
  check(appca_sweep_run(text.c_str(), o.workers, &raw), "sweep");
  SweepPtr sweep(raw);
  make_dir(o.out);
  check(appca_sweep_write(sweep.get(), o.out.c_str()), "sweep");
  const size_t ok = appca_sweep_succeeded(sweep.get());
  const size_t failed = appca_sweep_failed(sweep.get());
  manifest.j["succeeded"] = ok;
  manifest.j["failed"] = failed;
  manifest.write(o.out, {"results.jsonl", "summary.csv", "slopes.csv", "timings.csv"});
  std::cerr << ok << " runs succeeded, " << failed << " failed\n";
  return ok == 0 ? kExitAllFailed : kExitOk;
}

// ---- rank / validate -----------------------------------------------------

struct RankOpts {
  std::string x;
  std::string layout;
  long long rmax = 12;
};

int cmd_rank(const RankOpts& o) {
  if (o.rmax < 1) throw CliError(kExitUsage, "--rmax must be positive");
  MatrixPtr values = load_matrix(o.x);
  size_t rank = 0;
  json out;
  if (o.layout.empty()) {
    check(appca_rank_select_ic(values.get(), static_cast<size_t>(o.rmax), &rank), "rank");
    out["scope"] = "full";
  } else {
    LayoutPtr layout = load_layout(o.layout);
    MaskedPtr x = bind(values.get(), layout.get());
    check(appca_rank_select_blockwise(x.get(), static_cast<size_t>(o.rmax), &rank), "rank");
    out["scope"] = "groupwise-max";
  }
  out["rank"] = rank;
  out["rmax"] = o.rmax;
  std::cout << out.dump() << "\n";
  return kExitOk;
}

struct ValidateOpts {
  std::string layout;
  std::string plan;
};

int cmd_validate(const ValidateOpts& o) {
  LayoutPtr layout = load_layout(o.layout);
  char* diags = nullptr;
  size_t violations = 0;
  check(appca_layout_validate(layout.get(), &diags, &violations), "validate");
  json out;
  out["layout"] = json::parse(take_string(diags));
  size_t total = violations;
  if (!o.plan.empty() && violations == 0) {
    appca_plan* raw = nullptr;
    if (o.plan == "auto") {
      const appca_status s = appca_plan_discover(layout.get(), &raw);
      if (s == APPCA_OK) {
        PlanPtr plan(raw);
        out["plan"] = json::parse(plan_json(plan.get()));
        out["plan_diagnostics"] = json::array();
      } else if (s == APPCA_ERR_FEASIBILITY) {
        out["plan"] = nullptr;
        out["plan_diagnostics"] = json::array({{{"code", "no_chain"}, {"message", appca_last_error()}}});
        total += 1;
      } else {
        check(s, "chain discovery");
      }
    } else {
      check(appca_plan_read(o.plan.c_str(), &raw), "plan " + o.plan);
      PlanPtr plan(raw);
      size_t plan_violations = 0;
      check(appca_plan_validate(layout.get(), plan.get(), &diags, &plan_violations), "validate");
      out["plan"] = json::parse(plan_json(plan.get()));
      out["plan_diagnostics"] = json::parse(take_string(diags));
      total += plan_violations;
    }
  }
  out["valid"] = total == 0;
  std::cout << out.dump(2) << "\n";
  return total == 0 ? kExitOk : kExitData;
}

// ---- replay --------------------------------------------------------------

int run(std::vector<std::string> args);

struct ReplayOpts {
  std::string manifest;
  std::string out;
  int workers = 0;
};

std::vector<std::string> strip_option(const std::vector<std::string>& args, const std::string& name) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == name) {
      ++i;
      continue;
    }
    if (args[i].rfind(name + "=", 0) == 0) continue;
    out.push_back(args[i]);
  }
  return out;
}

int cmd_replay(const ReplayOpts& o) {
  json manifest;
  try {
    manifest = json::parse(read_text(o.manifest));
  } catch (const json::exception& e) {
    throw CliError(kExitData, "manifest " + o.manifest + " is not valid JSON: " + e.what());
  }
  if (!manifest.contains("replay_args") || !manifest["replay_args"].is_array())
    throw CliError(kExitData, "manifest " + o.manifest + " has no replay_args");
  auto args = manifest["replay_args"].get<std::vector<std::string>>();
  if (args.empty() || args.front() == "replay")
    throw CliError(kExitData, "manifest " + o.manifest + " does not describe a replayable command");
  args = strip_option(args, "--out");
  std::string out = o.out;
  if (out.empty()) out = manifest.value("output_dir", fs::path(o.manifest).parent_path().string());
  if (o.workers > 0) {
    if (args.front() != "sweep") throw CliError(kExitUsage, "--workers only applies to sweep manifests");
    args = strip_option(args, "--workers");
    args.push_back("--workers");
    args.push_back(std::to_string(o.workers));
  }
  args.push_back("--out");
  args.push_back(out);
  return run(std::move(args));
}

// ---- dispatch ------------------------------------------------------------

int run(std::vector<std::string> args) {
  CLI::App app{"Anchor projected PCA for blockwise-missing matrices", "appca"};
  app.set_version_flag("--version", appca_version());
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic blockwise-missing data set");
  simulate->add_option("--scenario", sim.scenario, "2x3 or 3x3")->check(CLI::IsMember({"2x3", "3x3"}));
  simulate->add_option("--n", sim.n, "subjects per group");
  simulate->add_option("--p", sim.p, "features per block");
  simulate->add_option("--r", sim.r, "rank (the named scenarios need 6)");
  simulate->add_option("--alpha", sim.alpha, "subject signal exponent in (0,1]");
  simulate->add_option("--beta", sim.beta, "feature signal exponent in (0,1]");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--noise-sd", sim.noise_sd, "noise standard deviation");
  simulate->add_option("--out", sim.out, "output directory");

  FitOpts fit;
  auto* fitc = app.add_subcommand("fit", "estimate aligned subject embeddings");
  fitc->add_option("--x", fit.x, "matrix CSV (NaN marks missing cells)")->required();
  fitc->add_option("--layout", fit.layout, "layout JSON")->required();
  fitc->add_option("--method", fit.method, "appca, appca-crossfit, chain, shared-pca, two-step")
      ->required();
  fitc->add_option("--rank", fit.rank, "rank, or 'auto'")->required();
  fitc->add_option("--plan", fit.plan, "chain plan JSON, or 'auto'");
  fitc->add_option("--reference", fit.reference, "two-step reference group (1-based)");
  fitc->add_option("--seed", fit.seed, "cross-fit split seed");
  fitc->add_option("--rmax", fit.rmax, "largest rank tried by --rank auto");
  fitc->add_option("--out", fit.out, "output directory");

  EvalOpts ev;
  auto* evalc = app.add_subcommand("eval", "alignment-adjusted error of an embedding");
  evalc->add_option("--theta-hat", ev.theta_hat, "estimated embedding CSV")->required();
  evalc->add_option("--theta-true", ev.theta_true, "true embedding CSV")->required();
  evalc->add_option("--out", ev.out, "output directory");

  SweepOpts sw;
  auto* sweep = app.add_subcommand("sweep", "run a simulation grid");
  sweep->add_option("--grid", sw.grid, "grid JSON file");
  sweep->add_option("--grid-json", sw.grid_json, "grid JSON text");
  sweep->add_option("--workers", sw.workers, "worker threads (overrides the grid)");
  sweep->add_option("--out", sw.out, "output directory");

  RankOpts rk;
  auto* rank = app.add_subcommand("rank", "select the rank by information criterion");
  rank->add_option("--x", rk.x, "matrix CSV")->required();
  rank->add_option("--layout", rk.layout, "layout JSON; maximum over groups when given");
  rank->add_option("--rmax", rk.rmax, "largest rank tried");

  ValidateOpts va;
  auto* validate = app.add_subcommand("validate", "check a layout and optionally a chain plan");
  validate->add_option("--layout", va.layout, "layout JSON")->required();
  validate->add_option("--plan", va.plan, "chain plan JSON, or 'auto'");

  ReplayOpts rp;
  auto* replay = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  replay->add_option("manifest", rp.manifest, "manifest.json")->required();
  replay->add_option("--out", rp.out, "output directory (default: the recorded one)");
  replay->add_option("--workers", rp.workers, "worker threads for sweep manifests");

  Invocation inv;
  inv.argv.push_back("appca");
  inv.argv.insert(inv.argv.end(), args.begin(), args.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (simulate->parsed()) return cmd_simulate(sim, inv);
  if (fitc->parsed()) return cmd_fit(fit, inv);
  if (evalc->parsed()) return cmd_eval(ev, inv);
  if (sweep->parsed()) return cmd_sweep(sw, inv);
  if (rank->parsed()) return cmd_rank(rk);
  if (validate->parsed()) return cmd_validate(va);
  if (replay->parsed()) return cmd_replay(rp);
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(std::move(args));
  } catch (const CliError& e) {
    std::cerr << "appca: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "appca: " << e.what() << "\n";
    return kExitFailure;
  }
}
