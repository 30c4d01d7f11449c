#include "tsc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsc::train {

using autodiff::Tensor;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// The reversal layer contributes the adversarial sign; lambda scales the
// domain term exactly once, inside the composite objective.
constexpr double kGrlCoeff = 1.0;

harness::ExperimentConfig prepared(harness::ExperimentConfig config) {
  config.dataset.seed = config.seed;
  config.validate();
  return config;
}

nn::TeacherNet make_teacher(const harness::ExperimentConfig& cfg) {
  rng::Stream init(cfg.seed, "teacher-init");
  return nn::TeacherNet::make(cfg.teacher_variant, cfg.feature_spec(), cfg.classifier_spec(),
                              cfg.discriminator_spec(), init);
}

std::optional<nn::StudentNet> make_student(const harness::ExperimentConfig& cfg,
                                           const nn::TeacherNet& teacher) {
  if (cfg.mode == harness::RunMode::kTeacherOnly) return std::nullopt;
  rng::Stream init(cfg.seed, "student-init");
  return nn::StudentNet::make(teacher, init);
}

double accuracy(std::span<const nn::PseudoLabel> preds, std::span<const int> labels) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].class_index == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double label_accuracy(std::span<const int> preds, std::span<const int> labels) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

}  // namespace

void sgd_update(nn::Parameter& param, std::span<const double> grad,
                const harness::SgdConfig& opt) {
  if (grad.size() != param.value.size()) {
    throw std::invalid_argument("sgd_update: gradient size does not match parameter " +
                                param.name);
  }
  for (std::size_t i = 0; i < param.value.size(); ++i) {
    param.velocity[i] =
        opt.momentum * param.velocity[i] + grad[i] + opt.weight_decay * param.value[i];
    param.value[i] -= opt.lr * param.velocity[i];
  }
}

Trainer::Trainer(const harness::ExperimentConfig& config)
    : config_(prepared(config)),
      schedule_{config_.schedule_delta, std::max(1, config_.total_steps)},
      source_(),
      target_(),
      source_stream_(config_.seed, "source-sampling"),
      target_stream_(config_.seed, "target-sampling"),
      source_sampler_(config_.dataset.n_source, config_.batch_source, &source_stream_),
      target_sampler_(config_.dataset.n_target, config_.batch_target, &target_stream_),
      teacher_(make_teacher(config_)),
      student_(make_student(config_, teacher_)) {
  auto domains = data::generate(config_.dataset);
  source_ = std::move(domains.first);
  target_ = std::move(domains.second);
}

StepMetrics Trainer::train_step(const data::SourceBatch& source_batch,
                                const data::TargetBatch& target_batch) {
  if (step_ >= schedule_.total_steps) {
    throw std::logic_error("train_step: step budget exhausted");
  }
  const std::string at = " at step " + std::to_string(step_);

  autodiff::Tape tape;
  Tensor xs = tape.leaf({source_batch.n, source_batch.d}, source_batch.xs);
  Tensor xt = tape.leaf({target_batch.n, target_batch.d}, target_batch.xs);

  nn::TeacherPass tpass = nn::teacher_forward(tape, teacher_, xs, xt, kGrlCoeff);
  tape.check_finite(tpass.source_logits, "teacher source logits" + at);
  tape.check_finite(tpass.target_logits, "teacher target logits" + at);
  tape.check_finite(tpass.source_domain_scores, "teacher source domain scores" + at);
  tape.check_finite(tpass.target_domain_scores, "teacher target domain scores" + at);
  Tensor teacher_cls = losses::source_cls_loss(tpass.source_logits, source_batch.ys);
  Tensor teacher_domain =
      teacher_.variant == nn::TeacherVariant::kDann
          ? losses::dann_domain_loss(tpass.source_domain_scores, tpass.target_domain_scores)
          : losses::cdan_domain_loss(tpass.source_domain_scores, tpass.target_domain_scores);
  tape.check_finite(teacher_cls, "teacher classification loss" + at);
  tape.check_finite(teacher_domain, "teacher domain loss" + at);

  std::vector<nn::PseudoLabel> teacher_pl = nn::predict(tpass.target_logits);

  StepMetrics m;
  m.step = step_;
  m.threshold = competition::threshold(step_, schedule_);
  m.teacher_cls_loss = teacher_cls.scalar();
  m.teacher_domain_loss = teacher_domain.scalar();
  m.teacher_objective = m.teacher_cls_loss - config_.weights.lambda * m.teacher_domain_loss;
  m.student_cls_loss = kNan;

  Tensor objective;
  std::optional<nn::StudentPass> spass;
  if (student_) {
    spass = nn::student_forward(tape, *student_, xt);
    tape.check_finite(spass->target_logits, "student target logits" + at);
    std::vector<nn::PseudoLabel> student_pl = nn::predict(spass->target_logits);
    std::vector<competition::CompetitionDecision> decisions =
        competition::compete(teacher_pl, student_pl, m.threshold);
    std::vector<int> winners(decisions.size());
    for (std::size_t j = 0; j < decisions.size(); ++j) {
      winners[j] = decisions[j].chosen_label;
      switch (decisions[j].reason) {
        case competition::Reason::kTeacherOverThreshold: ++m.n_teacher_over_threshold; break;
        case competition::Reason::kTeacherHigherConfidence: ++m.n_teacher_higher_conf; break;
        case competition::Reason::kStudentWins: ++m.n_student_wins; break;
      }
    }
    Tensor student_cls = losses::student_loss(spass->target_logits, winners);
    tape.check_finite(student_cls, "student pseudo-label loss" + at);
    losses::TotalLoss total =
        losses::total_loss(teacher_cls, teacher_domain, student_cls, config_.weights);
    m.student_cls_loss = student_cls.scalar();
    m.total_reported = total.reported;
    objective = total.objective;
  } else {
    objective = losses::teacher_objective(teacher_cls, teacher_domain, config_.weights.lambda);
    m.total_reported = m.teacher_objective;
  }
  tape.check_finite(objective, "training objective" + at);

  tape.backward(objective);

  auto apply_updates = [&](const nn::BoundMlp& bound) {
    for (const auto& [param, leaf] : bound.bound) {
      for (double g : leaf.grad()) {
        if (!std::isfinite(g)) {
          throw autodiff::NonFiniteError("gradient of " + param->name + at);
        }
      }
      sgd_update(*param, leaf.grad(), config_.optimizer);
    }
  };
  apply_updates(tpass.feature);
  apply_updates(tpass.classifier);
  apply_updates(tpass.discriminator);
  if (spass) {
    apply_updates(spass->feature);
    apply_updates(spass->classifier);
  }

  ++step_;
  return m;
}

harness::EvalRow Trainer::evaluate(int at_step, const StepMetrics* last_step) {
  harness::EvalRow row;
  row.step = at_step;
  row.threshold = competition::threshold(at_step, schedule_);
  row.teacher_loss = last_step ? last_step->teacher_objective : kNan;
  row.student_loss = last_step ? last_step->student_cls_loss : kNan;

  autodiff::Tape tape;
  Tensor xt = tape.leaf({target_.n, target_.d}, target_.xs);

  nn::BoundMlp tf = teacher_.feature.bind(tape);
  nn::BoundMlp tc = teacher_.classifier.bind(tape);
  Tensor teacher_logits = tc.forward(tf.forward(xt));
  std::vector<nn::PseudoLabel> teacher_pl = nn::predict(teacher_logits);
  row.teacher_acc = accuracy(teacher_pl, target_.ys);
  row.pl_teacher_acc = row.teacher_acc;
  auto teacher_params = teacher_.parameters();
  row.teacher_param_hash = nn::params_fingerprint(teacher_params);

  if (student_) {
    nn::BoundMlp sf = student_->feature.bind(tape);
    nn::BoundMlp sc = student_->classifier.bind(tape);
    Tensor student_logits = sc.forward(sf.forward(xt));
    std::vector<nn::PseudoLabel> student_pl = nn::predict(student_logits);
    row.student_acc = accuracy(student_pl, target_.ys);
    row.pl_student_acc = row.student_acc;

    std::vector<competition::CompetitionDecision> decisions =
        competition::compete(teacher_pl, student_pl, row.threshold);
    std::vector<int> winners(decisions.size());
    int over = 0, conf = 0, student_wins = 0;
    for (std::size_t j = 0; j < decisions.size(); ++j) {
      winners[j] = decisions[j].chosen_label;
      switch (decisions[j].reason) {
        case competition::Reason::kTeacherOverThreshold: ++over; break;
        case competition::Reason::kTeacherHigherConfidence: ++conf; break;
        case competition::Reason::kStudentWins: ++student_wins; break;
      }
    }
    row.pl_winner_acc = label_accuracy(winners, target_.ys);
    const double n = static_cast<double>(decisions.size());
    row.frac_teacher_over_threshold = over / n;
    row.frac_teacher_higher_conf = conf / n;
    row.frac_student_wins = student_wins / n;
    auto student_params = student_->parameters();
    row.student_param_hash = nn::params_fingerprint(student_params);
  } else {
    row.student_acc = kNan;
    row.pl_student_acc = kNan;
    row.pl_winner_acc = kNan;
    row.frac_teacher_over_threshold = kNan;
    row.frac_teacher_higher_conf = kNan;
    row.frac_student_wins = kNan;
    row.student_param_hash = 0;
  }
  return row;
}

harness::RunResult Trainer::run() {
  const auto t0 = std::chrono::steady_clock::now();
  harness::RunResult result;
  result.config = config_;
  result.history.push_back(evaluate(0, nullptr));

  StepMetrics last;
  while (step_ < config_.total_steps) {
    data::SourceBatch sb = data::sample_source(source_, source_sampler_);
    data::TargetBatch tb = data::sample_target(target_, target_sampler_);
    last = train_step(sb, tb);
    const int done = step_;
    if (done % config_.eval_interval == 0 || done == config_.total_steps) {
      result.history.push_back(evaluate(done, &last));
    }
  }

  result.final_teacher_acc = result.history.back().teacher_acc;
  result.final_student_acc = result.history.back().student_acc;
  for (nn::Parameter* p : teacher_.parameters()) result.final_teacher_params.push_back(*p);
  if (student_) {
    for (nn::Parameter* p : student_->parameters()) result.final_student_params.push_back(*p);
  }
  result.wallclock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

harness::RunResult run(const harness::ExperimentConfig& config) {
  Trainer trainer(config);
  return trainer.run();
}

}  // namespace tsc::train
