#include "appca/appca.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "appca/anchor_pca.hpp"
#include "appca/baselines.hpp"
#include "appca/block_model.hpp"
#include "appca/chain.hpp"
#include "appca/error.hpp"
#include "appca/experiment.hpp"
#include "appca/io.hpp"
#include "appca/metrics.hpp"
#include "appca/simgen.hpp"

struct appca_layout {
  appca::BlockLayout layout;
};
struct appca_matrix {
  Eigen::MatrixXd m;
};
struct appca_masked {
  appca::MaskedMatrix x;
};
struct appca_plan {
  appca::ChainPlan plan;
};
struct appca_embedding {
  appca::Embedding e;
};
struct appca_sim {
  appca::SimInstance sim;
  appca::SimConfig cfg;
};
struct appca_sweep {
  std::vector<appca::RunRecord> records;
};

namespace {

thread_local std::string last_error;

appca_status status_for(appca::ErrorKind kind) {
  switch (kind) {
    case appca::ErrorKind::domain: return APPCA_ERR_DOMAIN;
    case appca::ErrorKind::data: return APPCA_ERR_DATA;
    case appca::ErrorKind::feasibility: return APPCA_ERR_FEASIBILITY;
    case appca::ErrorKind::conditioning: return APPCA_ERR_CONDITIONING;
    case appca::ErrorKind::config: return APPCA_ERR_CONFIG;
    case appca::ErrorKind::io: return APPCA_ERR_IO;
    case appca::ErrorKind::numerical: return APPCA_ERR_NUMERICAL;
  }
  return APPCA_ERR_INTERNAL;
}

template <class F>
appca_status guarded(F&& f) noexcept {
  last_error.clear();
  try {
    f();
    return APPCA_OK;
  } catch (const appca::Error& e) {
    last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return APPCA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return APPCA_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return APPCA_ERR_INTERNAL;
  }
}

appca_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  return APPCA_ERR_INVALID_ARGUMENT;
}

#define APPCA_REQUIRE(ptr) \
  do {                     \
    if (!(ptr)) return null_argument(#ptr); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

appca::Method to_method(appca_method m) {
  switch (m) {
    case APPCA_METHOD_APPCA: return appca::Method::appca;
    case APPCA_METHOD_APPCA_CROSSFIT: return appca::Method::appca_crossfit;
    case APPCA_METHOD_CHAIN: return appca::Method::chain;
    case APPCA_METHOD_SHARED_PCA: return appca::Method::shared_pca;
    case APPCA_METHOD_TWO_STEP: return appca::Method::two_step;
    case APPCA_METHOD_ORACLE: return appca::Method::oracle;
  }
  throw appca::DomainError("unknown method code " + std::to_string(static_cast<int>(m)));
}

appca_method from_method(appca::Method m) {
  switch (m) {
    case appca::Method::appca: return APPCA_METHOD_APPCA;
    case appca::Method::appca_crossfit: return APPCA_METHOD_APPCA_CROSSFIT;
    case appca::Method::chain: return APPCA_METHOD_CHAIN;
    case appca::Method::shared_pca: return APPCA_METHOD_SHARED_PCA;
    case appca::Method::two_step: return APPCA_METHOD_TWO_STEP;
    case appca::Method::oracle: return APPCA_METHOD_ORACLE;
  }
  return APPCA_METHOD_APPCA;
}

appca::Index checked_rank(size_t rank) {
  if (rank == 0) throw appca::DomainError("rank must be at least 1");
  return static_cast<appca::Index>(rank);
}

void ensure_directory(const char* dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw appca::IoError(std::string("cannot create directory ") + dir);
}

}  // namespace

extern "C" {

const char* appca_version(void) { return "0.1.0"; }

const char* appca_last_error(void) { return last_error.c_str(); }

const char* appca_status_name(appca_status status) {
  switch (status) {
    case APPCA_OK: return "ok";
    case APPCA_ERR_DOMAIN: return "domain error";
    case APPCA_ERR_DATA: return "data error";
    case APPCA_ERR_FEASIBILITY: return "feasibility error";
    case APPCA_ERR_CONDITIONING: return "conditioning error";
    case APPCA_ERR_CONFIG: return "config error";
    case APPCA_ERR_IO: return "io error";
    case APPCA_ERR_NUMERICAL: return "numerical error";
    case APPCA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case APPCA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void appca_string_free(char* s) { std::free(s); }

appca_status appca_parse_method(const char* name, appca_method* out) {
  APPCA_REQUIRE(name);
  APPCA_REQUIRE(out);
  return guarded([&] {
    const auto m = appca::parse_method(name);
    if (!m) throw appca::DomainError(std::string("unknown method '") + name + "'");
    *out = from_method(*m);
  });
}

const char* appca_method_name(appca_method method) {
  switch (method) {
    case APPCA_METHOD_APPCA: return "appca";
    case APPCA_METHOD_APPCA_CROSSFIT: return "appca-crossfit";
    case APPCA_METHOD_CHAIN: return "chain";
    case APPCA_METHOD_SHARED_PCA: return "shared-pca";
    case APPCA_METHOD_TWO_STEP: return "two-step";
    case APPCA_METHOD_ORACLE: return "oracle";
  }
  return "unknown";
}

/* layouts */

appca_status appca_layout_read(const char* path, appca_layout** out) {
  APPCA_REQUIRE(path);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_layout{appca::io::read_layout(path)}; });
}

appca_status appca_layout_parse(const char* json, appca_layout** out) {
  APPCA_REQUIRE(json);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_layout{appca::io::parse_layout_json(json)}; });
}

appca_status appca_layout_write(const appca_layout* layout, const char* path) {
  APPCA_REQUIRE(layout);
  APPCA_REQUIRE(path);
  return guarded(
      [&] { appca::io::write_file_atomic(path, appca::io::layout_to_json(layout->layout)); });
}

appca_status appca_layout_validate(const appca_layout* layout, char** diagnostics_json,
                                   size_t* violations) {
  APPCA_REQUIRE(layout);
  return guarded([&] {
    const auto diags = appca::validate_layout(layout->layout);
    if (violations) *violations = diags.size();
    if (diagnostics_json) *diagnostics_json = dup_string(appca::io::diagnostics_to_json(diags));
  });
}

appca_status appca_layout_describe(const appca_layout* layout, char** json) {
  APPCA_REQUIRE(layout);
  APPCA_REQUIRE(json);
  return guarded([&] {
    const appca::BlockLayout& l = layout->layout;
    appca::require_valid_layout(l);
    nlohmann::json j;
    j["n"] = l.n;
    j["p"] = l.p;
    j["groups"] = l.group_count();
    j["blocks"] = l.block_count();
    nlohmann::json observed = nlohmann::json::array();
    for (std::size_t g = 0; g < l.group_count(); ++g)
      observed.push_back(appca::observed_features(l, g).size());
    j["observed_features"] = std::move(observed);
    j["shared_features"] = appca::shared_feature_set(l).size();
    *json = dup_string(j.dump());
  });
}

void appca_layout_free(appca_layout* layout) { delete layout; }

/* matrices */

appca_status appca_matrix_read_csv(const char* path, appca_matrix** out) {
  APPCA_REQUIRE(path);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_matrix{appca::io::read_matrix_csv(path)}; });
}

appca_status appca_matrix_from_rows(size_t rows, size_t cols, const double* row_major,
                                    appca_matrix** out) {
  APPCA_REQUIRE(out);
  if (rows * cols > 0 && !row_major) return null_argument("row_major");
  return guarded([&] {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < cols; ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row_major[i * cols + j];
    *out = new appca_matrix{std::move(m)};
  });
}

appca_status appca_matrix_write_csv(const appca_matrix* m, const char* path) {
  APPCA_REQUIRE(m);
  APPCA_REQUIRE(path);
  return guarded([&] { appca::io::write_matrix_csv(path, m->m); });
}

size_t appca_matrix_rows(const appca_matrix* m) { return m ? static_cast<size_t>(m->m.rows()) : 0; }
size_t appca_matrix_cols(const appca_matrix* m) { return m ? static_cast<size_t>(m->m.cols()) : 0; }

appca_status appca_matrix_copy_rows(const appca_matrix* m, double* row_major_out) {
  APPCA_REQUIRE(m);
  APPCA_REQUIRE(row_major_out);
  return guarded([&] {
    const auto cols = static_cast<size_t>(m->m.cols());
    for (Eigen::Index i = 0; i < m->m.rows(); ++i)
      for (Eigen::Index j = 0; j < m->m.cols(); ++j)
        row_major_out[static_cast<size_t>(i) * cols + static_cast<size_t>(j)] = m->m(i, j);
  });
}

void appca_matrix_free(appca_matrix* m) { delete m; }

appca_status appca_masked_create(const appca_matrix* values, const appca_layout* layout,
                                 appca_masked** out) {
  APPCA_REQUIRE(values);
  APPCA_REQUIRE(layout);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_masked{appca::MaskedMatrix(values->m, layout->layout)}; });
}

void appca_masked_free(appca_masked* x) { delete x; }

/* plans */

appca_status appca_plan_read(const char* path, appca_plan** out) {
  APPCA_REQUIRE(path);
  APPCA_REQUIRE(out);
  return guarded([&] {
    *out = new appca_plan{appca::io::parse_plan_json(appca::io::read_file(path))};
  });
}

appca_status appca_plan_parse(const char* json, appca_plan** out) {
  APPCA_REQUIRE(json);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_plan{appca::io::parse_plan_json(json)}; });
}

appca_status appca_plan_discover(const appca_layout* layout, appca_plan** out) {
  APPCA_REQUIRE(layout);
  APPCA_REQUIRE(out);
  return guarded([&] {
    auto found = appca::discover_chain(layout->layout);
    if (!found.plan) throw appca::FeasibilityError(found.reason);
    *out = new appca_plan{std::move(*found.plan)};
  });
}

appca_status appca_plan_validate(const appca_layout* layout, const appca_plan* plan,
                                 char** diagnostics_json, size_t* violations) {
  APPCA_REQUIRE(layout);
  APPCA_REQUIRE(plan);
  return guarded([&] {
    const auto diags = appca::validate_chain(layout->layout, plan->plan);
    if (violations) *violations = diags.size();
    if (diagnostics_json) *diagnostics_json = dup_string(appca::io::diagnostics_to_json(diags));
  });
}

appca_status appca_plan_to_json(const appca_plan* plan, char** json) {
  APPCA_REQUIRE(plan);
  APPCA_REQUIRE(json);
  return guarded([&] { *json = dup_string(appca::io::plan_to_json(plan->plan)); });
}

void appca_plan_free(appca_plan* plan) { delete plan; }

/* fitting */

void appca_fit_options_init(appca_fit_options* options) {
  if (!options) return;
  options->plan = nullptr;
  options->reference_group = 0;
  options->fold_seed = 0;
}

appca_status appca_fit(const appca_masked* x, appca_method method, size_t rank,
                       const appca_fit_options* options, appca_embedding** out) {
  APPCA_REQUIRE(x);
  APPCA_REQUIRE(out);
  return guarded([&] {
    appca_fit_options opts;
    appca_fit_options_init(&opts);
    if (options) opts = *options;
    const appca::Index r = checked_rank(rank);
    appca::Embedding e;
    switch (to_method(method)) {
      case appca::Method::appca: e = appca::appca_fit(x->x, r); break;
      case appca::Method::appca_crossfit: e = appca::appca_crossfit(x->x, r, opts.fold_seed); break;
      case appca::Method::chain: {
        appca::ChainPlan plan;
        if (opts.plan) {
          plan = opts.plan->plan;
        } else {
          auto found = appca::discover_chain(x->x.layout());
          if (!found.plan) throw appca::FeasibilityError(found.reason);
          plan = std::move(*found.plan);
        }
        e = appca::chain_fit(x->x, plan, r);
        break;
      }
      case appca::Method::shared_pca: e = appca::shared_pca_fit(x->x, r); break;
      case appca::Method::two_step: e = appca::two_step_fit(x->x, r, opts.reference_group); break;
      case appca::Method::oracle:
        throw appca::DomainError("oracle fits need the full matrix; use appca_fit_oracle");
    }
    *out = new appca_embedding{std::move(e)};
  });
}

appca_status appca_fit_oracle(const appca_matrix* x_full, size_t rank, appca_embedding** out) {
  APPCA_REQUIRE(x_full);
  APPCA_REQUIRE(out);
  return guarded(
      [&] { *out = new appca_embedding{appca::oracle_fit(x_full->m, checked_rank(rank))}; });
}

size_t appca_embedding_rank(const appca_embedding* e) {
  return e ? static_cast<size_t>(e->e.rank) : 0;
}

appca_status appca_embedding_matrix(const appca_embedding* e, appca_matrix** out) {
  APPCA_REQUIRE(e);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_matrix{e->e.in_subject_order()}; });
}

appca_status appca_embedding_write_csv(const appca_embedding* e, const char* path) {
  APPCA_REQUIRE(e);
  APPCA_REQUIRE(path);
  return guarded([&] { appca::io::write_matrix_csv(path, e->e.in_subject_order()); });
}

void appca_embedding_free(appca_embedding* e) { delete e; }

/* metrics */

appca_status appca_alignment_error(const appca_matrix* theta_hat, const appca_matrix* theta,
                                   double* normalized, char** report_json) {
  APPCA_REQUIRE(theta_hat);
  APPCA_REQUIRE(theta);
  return guarded([&] {
    if (theta_hat->m.cols() != theta->m.cols()) {
      std::ostringstream msg;
      msg << "theta_hat has " << theta_hat->m.cols() << " columns but theta has "
          << theta->m.cols();
      throw appca::DomainError(msg.str());
    }
    const appca::ErrorReport report = appca::alignment_error(theta_hat->m, theta->m);
    if (normalized) *normalized = report.normalized;
    if (report_json) *report_json = dup_string(appca::io::error_report_to_json(report));
  });
}

appca_status appca_subspace_distance(const appca_matrix* u1, const appca_matrix* u2, double* out) {
  APPCA_REQUIRE(u1);
  APPCA_REQUIRE(u2);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = appca::subspace_distance(u1->m, u2->m); });
}

appca_status appca_rank_select_ic(const appca_matrix* x, size_t r_max, size_t* out) {
  APPCA_REQUIRE(x);
  APPCA_REQUIRE(out);
  return guarded([&] {
    *out = static_cast<size_t>(appca::rank_select_ic(x->m, static_cast<appca::Index>(r_max)));
  });
}

appca_status appca_rank_select_blockwise(const appca_masked* x, size_t r_max, size_t* out) {
  APPCA_REQUIRE(x);
  APPCA_REQUIRE(out);
  return guarded([&] {
    *out = static_cast<size_t>(
        appca::rank_select_blockwise(x->x, static_cast<appca::Index>(r_max)));
  });
}

/* simulation */

appca_status appca_sim_generate(const char* config_json, appca_sim** out) {
  APPCA_REQUIRE(config_json);
  APPCA_REQUIRE(out);
  return guarded([&] {
    const appca::SimConfig cfg = appca::io::parse_sim_config(config_json);
    *out = new appca_sim{appca::generate(cfg), cfg};
  });
}

appca_status appca_sim_write(const appca_sim* sim, const char* dir) {
  APPCA_REQUIRE(sim);
  APPCA_REQUIRE(dir);
  return guarded([&] {
    ensure_directory(dir);
    const std::filesystem::path root(dir);
    appca::io::write_matrix_csv(root / "X.csv", sim->sim.x.values());
    appca::io::write_matrix_csv(root / "X_full.csv", sim->sim.x_full);
    appca::io::write_matrix_csv(root / "theta_true.csv", sim->sim.theta_true);
    appca::io::write_file_atomic(root / "layout.json", appca::io::layout_to_json(sim->sim.layout));
  });
}

appca_status appca_sim_masked(const appca_sim* sim, appca_masked** out) {
  APPCA_REQUIRE(sim);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_masked{sim->sim.x}; });
}

appca_status appca_sim_full(const appca_sim* sim, appca_matrix** out) {
  APPCA_REQUIRE(sim);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_matrix{sim->sim.x_full}; });
}

appca_status appca_sim_theta(const appca_sim* sim, appca_matrix** out) {
  APPCA_REQUIRE(sim);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_matrix{sim->sim.theta_true}; });
}

appca_status appca_sim_layout(const appca_sim* sim, appca_layout** out) {
  APPCA_REQUIRE(sim);
  APPCA_REQUIRE(out);
  return guarded([&] { *out = new appca_layout{sim->sim.layout}; });
}

void appca_sim_free(appca_sim* sim) { delete sim; }

/* sweeps */

appca_status appca_sweep_run(const char* grid_json, int workers_override, appca_sweep** out) {
  APPCA_REQUIRE(grid_json);
  APPCA_REQUIRE(out);
  return guarded([&] {
    appca::ExperimentSpec spec = appca::io::parse_grid_json(grid_json);
    if (workers_override > 0) spec.workers = workers_override;
    *out = new appca_sweep{appca::run_experiment(spec)};
  });
}

appca_status appca_sweep_write(const appca_sweep* sweep, const char* dir) {
  APPCA_REQUIRE(sweep);
  APPCA_REQUIRE(dir);
  return guarded([&] {
    ensure_directory(dir);
    const std::filesystem::path root(dir);
    const auto summary = appca::summarize(sweep->records);
    appca::io::write_file_atomic(root / "results.jsonl", appca::io::records_to_jsonl(sweep->records));
    appca::io::write_file_atomic(root / "summary.csv", appca::io::summary_to_csv(summary));
    appca::io::write_file_atomic(root / "slopes.csv",
                                 appca::io::slopes_to_csv(appca::fit_slopes(summary)));
    std::ostringstream timings;
    timings << "method,scenario,n,p,seed,wall_time\n";
    for (const auto& r : sweep->records) {
      timings << r.method << ',' << appca::scenario_name(r.scenario) << ',' << r.n << ',' << r.p
              << ',' << r.seed << ',' << appca::io::format_double(r.wall_time) << '\n';
    }
    appca::io::write_file_atomic(root / "timings.csv", timings.str());
  });
}

size_t appca_sweep_succeeded(const appca_sweep* sweep) {
  if (!sweep) return 0;
  size_t k = 0;
  for (const auto& r : sweep->records) k += r.ok() ? 1 : 0;
  return k;
}

size_t appca_sweep_failed(const appca_sweep* sweep) {
  if (!sweep) return 0;
  return sweep->records.size() - appca_sweep_succeeded(sweep);
}

void appca_sweep_free(appca_sweep* sweep) { delete sweep; }

}  // extern "C"
