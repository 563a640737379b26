#include "appca/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "appca/error.hpp"

namespace appca::io {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

Eigen::MatrixXd parse_matrix_csv(const std::string& text) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::size_t pos = 0;
  const std::size_t len = text.size();
  while (pos < len) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = len;
    std::size_t line_end = end;
    if (line_end > pos && text[line_end - 1] == '\r') --line_end;
    if (line_end > pos) {
      Index count = 0;
      std::size_t field = pos;
      while (true) {
        std::size_t comma = text.find(',', field);
        if (comma == std::string::npos || comma > line_end) comma = line_end;
        std::size_t a = field, b = comma;
        while (a < b && (text[a] == ' ' || text[a] == '\t')) ++a;
        while (b > a && (text[b - 1] == ' ' || text[b - 1] == '\t')) --b;
        const std::string_view tok(text.data() + a, b - a);
        double v = 0.0;
        if (tok == "NaN") {
          v = std::numeric_limits<double>::quiet_NaN();
        } else {
          const char* first = tok.data();
          if (!tok.empty() && tok.front() == '+') ++first;
          const auto res = std::from_chars(first, tok.data() + tok.size(), v);
          if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
            std::ostringstream msg;
            msg << "malformed CSV value '" << tok << "' on line " << (rows + 1);
            throw DataError(msg.str());
          }
        }
        values.push_back(v);
        ++count;
        if (comma == line_end) break;
        field = comma + 1;
      }
      if (cols < 0) cols = count;
      if (count != cols) {
        std::ostringstream msg;
        msg << "CSV line " << (rows + 1) << " has " << count << " fields, expected " << cols;
        throw DataError(msg.str());
      }
      ++rows;
    }
    pos = end + 1;
  }
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return m;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(read_file(path));
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 20);
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(',');
      const double v = m(i, j);
      if (std::isnan(v)) {
        out += "NaN";
      } else {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.append(buf, res.ptr);
      }
    }
    out.push_back('\n');
  }
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  write_file_atomic(path, matrix_to_csv(m));
}

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

template <class F>
auto with_schema(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + " JSON does not match the schema: " + e.what());
  }
}

}  // namespace

BlockLayout parse_layout_json(const std::string& text) {
  const json j = parse_json(text, "layout");
  return with_schema("layout", [&] {
    BlockLayout layout;
    layout.n = j.at("n").get<Index>();
    layout.p = j.at("p").get<Index>();
    layout.groups = j.at("groups").get<std::vector<IndexList>>();
    layout.blocks = j.at("blocks").get<std::vector<IndexList>>();
    for (const auto& row : j.at("indicator")) {
      std::vector<bool> flags;
      for (const auto& v : row) {
        const int b = v.get<int>();
        if (b != 0 && b != 1) throw DataError("layout indicator entries must be 0 or 1");
        flags.push_back(b == 1);
      }
      layout.indicator.push_back(std::move(flags));
    }
    return layout;
  });
}

std::string layout_to_json(const BlockLayout& layout) {
  json ind = json::array();
  for (const auto& row : layout.indicator) {
    json r = json::array();
    for (bool b : row) r.push_back(b ? 1 : 0);
    ind.push_back(std::move(r));
  }
  json j = {{"n", layout.n},
            {"p", layout.p},
            {"groups", layout.groups},
            {"blocks", layout.blocks},
            {"indicator", std::move(ind)}};
  if (validate_layout(layout).empty()) j["shared_features"] = shared_feature_set(layout).indices();
  return j.dump() + "\n";
}

BlockLayout read_layout(const std::filesystem::path& path) {
  return parse_layout_json(read_file(path));
}

ChainPlan parse_plan_json(const std::string& text) {
  const json j = parse_json(text, "plan");
  return with_schema("plan", [&] {
    ChainPlan plan;
    for (const auto& sg : j.at("supergroups")) {
      std::vector<std::size_t> groups;
      for (const auto& g : sg) {
        const long long label = g.get<long long>();
        if (label < 1) throw DataError("plan group labels are 1-based; got " + std::to_string(label));
        groups.push_back(static_cast<std::size_t>(label - 1));
      }
      plan.supergroups.push_back(std::move(groups));
    }
    return plan;
  });
}

std::string plan_to_json(const ChainPlan& plan) {
  json sgs = json::array();
  for (const auto& sg : plan.supergroups) {
    json row = json::array();
    for (std::size_t g : sg) row.push_back(g + 1);
    sgs.push_back(std::move(row));
  }
  return json{{"supergroups", std::move(sgs)}}.dump() + "\n";
}

std::string diagnostics_to_json(const Diagnostics& diags) {
  json arr = json::array();
  for (const auto& d : diags) arr.push_back({{"code", d.code}, {"message", d.message}});
  return arr.dump();
}

std::string error_report_to_json(const ErrorReport& report) {
  json h = json::array();
  for (Index i = 0; i < report.h_star.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < report.h_star.cols(); ++k) row.push_back(report.h_star(i, k));
    h.push_back(std::move(row));
  }
  json j = {{"raw_error", report.raw_error},
            {"normalized", report.normalized},
            {"h_star", std::move(h)},
            {"projector_form", report.projector_form ? json(*report.projector_form) : json(nullptr)}};
  return j.dump(2) + "\n";
}

std::string record_to_json(const RunRecord& rec, bool include_wall_time) {
  json j = json::object();
  j["method"] = rec.method;
  j["scenario"] = std::string(scenario_name(rec.scenario));
  j["n"] = rec.n;
  j["p"] = rec.p;
  j["alpha"] = rec.alpha;
  j["beta"] = rec.beta;
  j["seed"] = rec.seed;
  j["normalized_error"] = rec.normalized_error ? json(*rec.normalized_error) : json(nullptr);
  if (!rec.error.empty()) j["error"] = rec.error;
  if (include_wall_time) j["wall_time"] = rec.wall_time;
  return j.dump();
}

std::string records_to_jsonl(const std::vector<RunRecord>& records, bool include_wall_time) {
  std::string out;
  for (const auto& rec : records) {
    out += record_to_json(rec, include_wall_time);
    out.push_back('\n');
  }
  return out;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "method,scenario,n,p,alpha,beta,count,failed,mean_error,sd_error\n";
  for (const auto& r : rows) {
    out << r.method << ',' << scenario_name(r.scenario) << ',' << r.n << ',' << r.p << ','
        << format_double(r.alpha) << ',' << format_double(r.beta) << ',' << r.count << ','
        << r.failed << ',' << format_double(r.mean_error) << ',' << format_double(r.sd_error)
        << '\n';
  }
  return out.str();
}

std::string slopes_to_csv(const std::vector<SlopeRow>& rows) {
  std::ostringstream out;
  out << "method,scenario,alpha,beta,regime,scale,points,slope,intercept\n";
  for (const auto& r : rows) {
    out << r.method << ',' << scenario_name(r.scenario) << ',' << format_double(r.alpha) << ','
        << format_double(r.beta) << ',' << r.regime << ',' << r.scale << ',' << r.points << ','
        << format_double(r.slope) << ',' << format_double(r.intercept) << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::vector<bool>> bool_matrix(const json& j) {
  std::vector<std::vector<bool>> out;
  for (const auto& row : j) {
    std::vector<bool> flags;
    for (const auto& v : row) flags.push_back(v.is_boolean() ? v.get<bool>() : v.get<int>() != 0);
    out.push_back(std::move(flags));
  }
  return out;
}

SimConfig sim_config_from(const json& j) {
  SimConfig cfg;
  if (j.contains("scenario")) {
    const auto name = j.at("scenario").get<std::string>();
    const auto sc = parse_scenario(name);
    if (!sc) throw ConfigError("unknown scenario '" + name + "' (expected 2x3, 3x3 or custom)");
    cfg.scenario = *sc;
  }
  if (j.contains("n")) cfg.n = j.at("n").get<Index>();
  if (j.contains("p")) cfg.p = j.at("p").get<Index>();
  if (j.contains("r")) cfg.r = j.at("r").get<Index>();
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("noise_sd")) cfg.noise_sd = j.at("noise_sd").get<double>();
  if (j.contains("indicator")) cfg.indicator = bool_matrix(j.at("indicator"));
  if (j.contains("subject_weak")) cfg.subject_weak = bool_matrix(j.at("subject_weak"));
  if (j.contains("feature_weak")) cfg.feature_weak = bool_matrix(j.at("feature_weak"));
  return cfg;
}

json sim_config_json(const SimConfig& cfg) {
  json j = {{"scenario", std::string(scenario_name(cfg.scenario))},
            {"n", cfg.n},
            {"p", cfg.p},
            {"r", cfg.r},
            {"alpha", cfg.alpha},
            {"beta", cfg.beta},
            {"seed", cfg.seed},
            {"noise_sd", cfg.noise_sd}};
  if (cfg.scenario == Scenario::custom) {
    j["indicator"] = cfg.indicator;
    j["subject_weak"] = cfg.subject_weak;
    j["feature_weak"] = cfg.feature_weak;
  }
  return j;
}

}  // namespace

SimConfig parse_sim_config(const std::string& json_object_text) {
  const json j = parse_json(json_object_text, "config");
  return with_schema("config", [&] { return sim_config_from(j); });
}

std::string sim_config_to_json(const SimConfig& cfg) { return sim_config_json(cfg).dump(); }

ExperimentSpec parse_grid_json(const std::string& text) {
  const json j = parse_json(text, "grid");
  return with_schema("grid", [&] {
    ExperimentSpec spec;
    for (const auto& c : j.at("configs")) spec.configs.push_back(sim_config_from(c));
    for (const auto& m : j.at("methods")) {
      const auto name = m.get<std::string>();
      const auto method = parse_method(name);
      if (!method) throw ConfigError("unknown method '" + name + "'");
      spec.methods.push_back(*method);
    }
    spec.reps = j.value("reps", 1);
    spec.base_seed = j.value("base_seed", std::uint64_t{0});
    spec.workers = j.value("workers", 1);
    if (spec.configs.empty()) throw ConfigError("grid lists no configs");
    return spec;
  });
}

}  // namespace appca::io
