#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tsc/config.hpp"

namespace tsc::harness {

// Fixed CSV schema written for every run.
inline constexpr const char* kMetricsHeader =
    "step,threshold,teacher_loss,student_loss,teacher_acc,student_acc,"
    "pl_teacher_acc,pl_student_acc,pl_winner_acc,frac_teacher_over_threshold,"
    "frac_teacher_higher_conf,frac_student_wins";

std::string metrics_csv(const RunResult& result);
std::string summary_json(const RunResult& result);

// Writes metrics.csv and summary.json into the directory (created if
// missing). Throws std::runtime_error naming the path on I/O failure.
void write_metrics(const RunResult& result, const std::filesystem::path& dir);

// Parsed metrics file: header columns plus numeric rows (nan allowed).
struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const;  // throws if absent
  std::vector<double> column(const std::string& name) const;
};

MetricsTable read_metrics_csv(const std::filesystem::path& path);

// Per-column delta report between two metrics files.
struct ColumnDelta {
  std::string column;
  double final_delta = 0.0;
  double max_abs_delta = 0.0;
};

std::vector<ColumnDelta> compare_metrics(const MetricsTable& a, const MetricsTable& b);
std::string format_comparison(const std::vector<ColumnDelta>& deltas);

// Median/min/max of the final teacher and student accuracies across runs,
// recomputable from the per-run CSVs.
std::string sweep_aggregate_json(const std::vector<RunResult>& results);

}  // namespace tsc::harness
