// Experiment CLI: run one training run, sweep seeds, compare metric files,
// or export a synthetic dataset. Exit codes: 0 success, 1 runtime failure,
// 2 usage error.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tsc/metrics.hpp"
#include "tsc/plot.hpp"
#include "tsc/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using tsc::harness::ExperimentConfig;
using tsc::harness::RunResult;

std::string fmt_acc(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

ExperimentConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return tsc::harness::parse_config("");
  return tsc::harness::load_config(config_path);
}

void write_run_outputs(const RunResult& result, const fs::path& dir) {
  tsc::harness::write_metrics(result, dir);
  tsc::harness::emit_plots(result, dir / "curves.svg");
  std::ofstream cfg(dir / "config.txt", std::ios::binary);
  if (!cfg) throw std::runtime_error("cannot write " + (dir / "config.txt").string());
  cfg << tsc::harness::serialize_config(result.config);
}

int cmd_run(const std::string& config_path, std::int64_t seed_override,
            const std::string& out_override) {
  ExperimentConfig cfg = load_or_default(config_path);
  if (seed_override >= 0) {
    cfg.seed = static_cast<std::uint64_t>(seed_override);
    cfg.dataset.seed = cfg.seed;
  }
  if (!out_override.empty()) cfg.output_dir = out_override;

  RunResult result = tsc::train::run(cfg);
  write_run_outputs(result, cfg.output_dir);

  std::cout << "final_teacher_acc " << fmt_acc(result.final_teacher_acc) << "\n";
  std::cout << "final_student_acc " << fmt_acc(result.final_student_acc) << "\n";
  std::cout << "outputs written to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
              unsigned jobs, const std::string& out_override) {
  ExperimentConfig base = load_or_default(config_path);
  if (!out_override.empty()) base.output_dir = out_override;
  if (seeds.empty()) throw std::runtime_error("sweep: need at least one seed");
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());

  const fs::path root = base.output_dir;
  std::vector<RunResult> results(seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  std::vector<std::string> errors;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      ExperimentConfig cfg = base;
      cfg.seed = seeds[i];
      cfg.dataset.seed = seeds[i];
      cfg.output_dir = (root / ("seed_" + std::to_string(seeds[i]))).string();
      try {
        RunResult result = tsc::train::run(cfg);
        write_run_outputs(result, cfg.output_dir);
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << "seed " << seeds[i] << ": teacher " << fmt_acc(result.final_teacher_acc)
                  << ", student " << fmt_acc(result.final_student_acc) << "\n";
        results[i] = std::move(result);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        errors.push_back("seed " + std::to_string(seeds[i]) + ": " + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, seeds.size()); ++t) {
    pool.emplace_back(worker);
  }
  for (std::thread& t : pool) t.join();
  if (!errors.empty()) {
    for (const std::string& e : errors) std::cerr << e << "\n";
    return 1;
  }

  std::ofstream agg(root / "aggregate.json", std::ios::binary);
  if (!agg) throw std::runtime_error("cannot write " + (root / "aggregate.json").string());
  agg << tsc::harness::sweep_aggregate_json(results);
  std::cout << "aggregate written to " << (root / "aggregate.json").string() << "\n";
  return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b) {
  const auto a = tsc::harness::read_metrics_csv(path_a);
  const auto b = tsc::harness::read_metrics_csv(path_b);
  std::cout << tsc::harness::format_comparison(tsc::harness::compare_metrics(a, b));
  return 0;
}

int cmd_gen_data(const std::string& config_path, const std::string& out_path) {
  ExperimentConfig cfg = load_or_default(config_path);
  auto [source, target] = tsc::data::generate(cfg.dataset);
  tsc::data::export_csv(source, target, out_path);
  std::cout << "dataset written to " << out_path << " (" << source.n << " source, " << target.n
            << " target)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher-student competition experiments on synthetic domain shifts"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::int64_t seed_override = -1;

  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "Config file (defaults apply when omitted)");
  run->add_option("--seed", seed_override, "Override the config seed");
  run->add_option("--out", out_dir, "Override the output directory");

  std::vector<std::uint64_t> seeds;
  unsigned jobs = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "Run one config across several seeds");
  sweep->add_option("--config", config_path, "Config file (defaults apply when omitted)");
  sweep->add_option("--seeds", seeds, "Seed list")->required()->delimiter(',');
  sweep->add_option("--jobs", jobs, "Parallel runs (default: hardware threads)");
  sweep->add_option("--out", out_dir, "Output root directory");

  std::string cmp_a, cmp_b;
  CLI::App* compare = app.add_subcommand("compare", "Delta summary of two metrics CSVs");
  compare->add_option("a", cmp_a, "First metrics.csv")->required();
  compare->add_option("b", cmp_b, "Second metrics.csv")->required();

  std::string data_out;
  CLI::App* gen = app.add_subcommand("gen-data", "Export the config's dataset as CSV");
  gen->add_option("--config", config_path, "Config file (defaults apply when omitted)");
  gen->add_option("--out", data_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, seed_override, out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, seeds, jobs, out_dir);
    if (compare->parsed()) return cmd_compare(cmp_a, cmp_b);
    if (gen->parsed()) return cmd_gen_data(config_path, data_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
