#pragma once

#include <optional>
#include <span>

#include "tsc/config.hpp"

namespace tsc::train {

// Momentum SGD with coupled weight decay:
//   v <- momentum * v + grad + weight_decay * param
//   param <- param - lr * v
void sgd_update(nn::Parameter& param, std::span<const double> grad,
                const harness::SgdConfig& opt);

struct StepMetrics {
  int step = 0;  // index of the executed step (0-based)
  double threshold = 0.0;
  double teacher_cls_loss = 0.0;
  double teacher_domain_loss = 0.0;
  double student_cls_loss = 0.0;
  double teacher_objective = 0.0;  // cls - lambda * domain, as logged
  double total_reported = 0.0;
  int n_teacher_over_threshold = 0;
  int n_teacher_higher_conf = 0;
  int n_student_wins = 0;
};

// Owns the networks and optimizer state for one run and executes the joint
// per-batch update: teacher adversarial loss on (source, target), pseudo-label
// competition on the target batch, student loss on the winning labels, one
// backward pass, one SGD update per parameter.
class Trainer {
 public:
  explicit Trainer(const harness::ExperimentConfig& config);

  StepMetrics train_step(const data::SourceBatch& source_batch,
                         const data::TargetBatch& target_batch);

  // Executes the full step budget, evaluating on the complete target set at
  // step 0, every eval_interval steps, and at the final step.
  harness::RunResult run();

  int step() const { return step_; }
  nn::TeacherNet& teacher() { return teacher_; }
  std::optional<nn::StudentNet>& student() { return student_; }
  const data::Domain& source_domain() const { return source_; }
  const data::Domain& target_domain() const { return target_; }

  // Full-target-set evaluation at the given step (labels are consumed only
  // here, never by train_step).
  harness::EvalRow evaluate(int at_step, const StepMetrics* last_step);

 private:
  harness::ExperimentConfig config_;
  competition::Schedule schedule_;
  data::Domain source_;
  data::Domain target_;
  rng::Stream source_stream_;
  rng::Stream target_stream_;
  data::EpochSampler source_sampler_;
  data::EpochSampler target_sampler_;
  nn::TeacherNet teacher_;
  std::optional<nn::StudentNet> student_;
  int step_ = 0;
};

// Convenience wrapper: build a Trainer from the config and run it.
harness::RunResult run(const harness::ExperimentConfig& config);

}  // namespace tsc::train
