#include "tsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tsc::harness {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json acc_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

struct Stats {
  double median, min, max;
};

Stats stats_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double median =
      n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return Stats{median, values.front(), values.back()};
}

}  // namespace

std::string metrics_csv(const RunResult& result) {
  std::ostringstream out;
  out << kMetricsHeader << "\n";
  for (const EvalRow& r : result.history) {
    out << r.step << "," << fmt_double(r.threshold) << "," << fmt_double(r.teacher_loss) << ","
        << fmt_double(r.student_loss) << "," << fmt_double(r.teacher_acc) << ","
        << fmt_double(r.student_acc) << "," << fmt_double(r.pl_teacher_acc) << ","
        << fmt_double(r.pl_student_acc) << "," << fmt_double(r.pl_winner_acc) << ","
        << fmt_double(r.frac_teacher_over_threshold) << ","
        << fmt_double(r.frac_teacher_higher_conf) << "," << fmt_double(r.frac_student_wins)
        << "\n";
  }
  return out.str();
}

std::string summary_json(const RunResult& result) {
  nlohmann::json j;
  j["config_hash"] = config_hash_hex(result.config);
  j["seed"] = result.config.seed;
  j["final_teacher_acc"] = acc_or_null(result.final_teacher_acc);
  j["final_student_acc"] = acc_or_null(result.final_student_acc);
  j["steps"] = result.config.total_steps;
  j["wallclock_s"] = result.wallclock_s;
  return j.dump(2) + "\n";
}

void write_metrics(const RunResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("write_metrics: cannot create " + dir.string());

  const auto csv_path = dir / "metrics.csv";
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("write_metrics: cannot open " + csv_path.string());
    out << metrics_csv(result);
    if (!out) throw std::runtime_error("write_metrics: write failed for " + csv_path.string());
  }
  const auto json_path = dir / "summary.json";
  {
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw std::runtime_error("write_metrics: cannot open " + json_path.string());
    out << summary_json(result);
    if (!out) throw std::runtime_error("write_metrics: write failed for " + json_path.string());
  }
}

std::size_t MetricsTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::runtime_error("metrics table has no column '" + name + "'");
}

std::vector<double> MetricsTable::column(const std::string& name) const {
  const std::size_t idx = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

MetricsTable read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file " + path.string());
  MetricsTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty metrics file " + path.string());
  }
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.columns.size()) {
      throw std::runtime_error("ragged row in metrics file " + path.string());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<ColumnDelta> compare_metrics(const MetricsTable& a, const MetricsTable& b) {
  if (a.columns != b.columns) {
    throw std::runtime_error("compare_metrics: column sets differ");
  }
  if (a.rows.empty() || b.rows.empty()) {
    throw std::runtime_error("compare_metrics: empty metrics table");
  }
  const std::size_t rows = std::min(a.rows.size(), b.rows.size());
  std::vector<ColumnDelta> out;
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    ColumnDelta d;
    d.column = a.columns[c];
    auto diff = [](double x, double y) {
      if (std::isnan(x) && std::isnan(y)) return 0.0;
      return x - y;
    };
    d.final_delta = diff(a.rows.back()[c], b.rows.back()[c]);
    for (std::size_t r = 0; r < rows; ++r) {
      d.max_abs_delta = std::max(d.max_abs_delta, std::abs(diff(a.rows[r][c], b.rows[r][c])));
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string format_comparison(const std::vector<ColumnDelta>& deltas) {
  std::ostringstream out;
  out << "column,final_delta,max_abs_delta\n";
  for (const ColumnDelta& d : deltas) {
    out << d.column << "," << fmt_double(d.final_delta) << "," << fmt_double(d.max_abs_delta)
        << "\n";
  }
  return out.str();
}

std::string sweep_aggregate_json(const std::vector<RunResult>& results) {
  if (results.empty()) throw std::invalid_argument("sweep_aggregate_json: no results");
  nlohmann::json j;
  std::vector<double> teacher, student;
  for (const RunResult& r : results) {
    j["seeds"].push_back(r.config.seed);
    teacher.push_back(r.final_teacher_acc);
    if (!std::isnan(r.final_student_acc)) student.push_back(r.final_student_acc);
  }
  auto put = [&j](const char* key, const Stats& s) {
    j["metrics"][key] = {{"median", s.median}, {"min", s.min}, {"max", s.max}};
  };
  put("final_teacher_acc", stats_of(teacher));
  if (!student.empty()) put("final_student_acc", stats_of(student));
  return j.dump(2) + "\n";
}

}  // namespace tsc::harness
