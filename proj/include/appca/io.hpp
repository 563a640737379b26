#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "appca/block_model.hpp"
#include "appca/chain.hpp"
#include "appca/experiment.hpp"
#include "appca/metrics.hpp"
#include "appca/simgen.hpp"

namespace appca::io {

/// Shortest decimal that parses back to the same double; "NaN" for NaN.
std::string format_double(double v);

/// Comma-separated rows; the literal token "NaN" marks masked cells.
/// Throws IoError on unreadable files and DataError on malformed content.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
Eigen::MatrixXd parse_matrix_csv(const std::string& text);
std::string matrix_to_csv(const Eigen::MatrixXd& m);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// {"n","p","groups","blocks","indicator"}; indices are 0-based row/column
/// positions in the matrix CSV, indicator entries 0/1.
BlockLayout parse_layout_json(const std::string& text);
std::string layout_to_json(const BlockLayout& layout);
BlockLayout read_layout(const std::filesystem::path& path);

/// {"supergroups":[[group,...],...]} with 1-based group labels.
ChainPlan parse_plan_json(const std::string& text);
std::string plan_to_json(const ChainPlan& plan);

std::string diagnostics_to_json(const Diagnostics& diags);

/// {"raw_error","normalized","h_star","projector_form"}; projector_form is
/// null when not applicable.
std::string error_report_to_json(const ErrorReport& report);

/// One JSON object per line with fields method, scenario, n, p, alpha, beta,
/// seed, normalized_error (null on failure); failed cells add "error", and
/// wall_time is included only when requested.
std::string record_to_json(const RunRecord& rec, bool include_wall_time = false);
std::string records_to_jsonl(const std::vector<RunRecord>& records, bool include_wall_time = false);

std::string summary_to_csv(const std::vector<SummaryRow>& rows);
std::string slopes_to_csv(const std::vector<SlopeRow>& rows);

/// Sweep grid: {"configs":[SimConfig...],"methods":[...],"reps":int,
/// "base_seed":int,"workers":int}. SimConfig objects use the keys scenario,
/// n, p, r, alpha, beta, noise_sd (and seed, ignored by sweeps).
ExperimentSpec parse_grid_json(const std::string& text);
SimConfig parse_sim_config(const std::string& json_object_text);
std::string sim_config_to_json(const SimConfig& cfg);

}  // namespace appca::io
