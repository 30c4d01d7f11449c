#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/competition.hpp"
#include "tsc/data.hpp"
#include "tsc/losses.hpp"
#include "tsc/networks.hpp"

namespace tsc::harness {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class RunMode { kTsc, kTeacherOnly };

struct SgdConfig {
  double lr = 0.01;
  double momentum = 0.95;
  double weight_decay = 0.0005;

  bool operator==(const SgdConfig&) const = default;
};

// Network sizes. The feature extractor maps input -> hidden -> feature_dim,
// the classifier is a single linear layer feature_dim -> K, and the
// discriminator maps its variant-dependent input through disc_hidden to one
// sigmoid unit.
struct ArchSpec {
  std::vector<std::size_t> feature_hidden = {64};
  std::size_t feature_dim = 32;
  std::vector<std::size_t> disc_hidden = {32};
  nn::Activation activation = nn::Activation::kRelu;

  bool operator==(const ArchSpec&) const = default;
};

// Full declarative description of one run. parse_config() fills unspecified
// keys with these defaults.
struct ExperimentConfig {
  RunMode mode = RunMode::kTsc;
  std::uint64_t seed = 1;
  int total_steps = 3000;
  int eval_interval = 100;
  std::string output_dir = "out";
  std::size_t batch_source = 36;
  std::size_t batch_target = 36;
  data::DatasetSpec dataset;
  nn::TeacherVariant teacher_variant = nn::TeacherVariant::kDann;
  ArchSpec arch;
  losses::LossWeights weights;
  SgdConfig optimizer;
  double schedule_delta = 10.0;

  void validate() const;  // throws ConfigError naming the offending field

  nn::MlpSpec feature_spec() const;
  nn::MlpSpec classifier_spec() const;
  nn::MlpSpec discriminator_spec() const;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses the key = value config format. Empty text yields the all-defaults
// config; unknown keys and malformed values are rejected with the field name.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical serialization: every key, fixed order, round-trips exactly.
std::string serialize_config(const ExperimentConfig& config);

// Hash of the canonical serialization minus output_dir, so it changes iff a
// field that affects results changes.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);

// One evaluation snapshot. The *_param_hash fields support trajectory
// comparisons and are not part of the CSV schema.
struct EvalRow {
  int step = 0;
  double threshold = 0.0;
  double teacher_loss = 0.0;
  double student_loss = 0.0;
  double teacher_acc = 0.0;
  double student_acc = 0.0;
  double pl_teacher_acc = 0.0;
  double pl_student_acc = 0.0;
  double pl_winner_acc = 0.0;
  double frac_teacher_over_threshold = 0.0;
  double frac_teacher_higher_conf = 0.0;
  double frac_student_wins = 0.0;
  std::uint64_t teacher_param_hash = 0;
  std::uint64_t student_param_hash = 0;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<EvalRow> history;
  double final_teacher_acc = 0.0;
  double final_student_acc = 0.0;
  double wallclock_s = 0.0;
  std::vector<nn::Parameter> final_teacher_params;
  std::vector<nn::Parameter> final_student_params;
};

}  // namespace tsc::harness
