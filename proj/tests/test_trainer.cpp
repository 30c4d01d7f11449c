#include <doctest.h>

#include <cmath>

#include "testutil/finite_diff.hpp"
#include "tsc/metrics.hpp"
#include "tsc/trainer.hpp"

using namespace tsc;
using harness::ExperimentConfig;
using harness::RunMode;

namespace {

ExperimentConfig small_config(std::uint64_t seed = 1) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.total_steps = 30;
  cfg.eval_interval = 10;
  cfg.dataset.n_source = 60;
  cfg.dataset.n_target = 60;
  cfg.batch_source = 12;
  cfg.batch_target = 12;
  cfg.arch.feature_hidden = {8};
  cfg.arch.feature_dim = 4;
  cfg.arch.disc_hidden = {4};
  return cfg;
}

// Plain matrix helpers for the standalone oracle below.
using Mat = std::vector<double>;

Mat matmul(const Mat& a, std::size_t m, std::size_t k, const Mat& b, std::size_t n) {
  Mat out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += a[i * k + p] * b[p * n + j];
    }
  }
  return out;
}

Mat transpose(const Mat& a, std::size_t m, std::size_t n) {
  Mat out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  }
  return out;
}

// Hand-rolled two-layer-feature + linear-classifier cross-entropy step,
// written independently of the autodiff stack.
struct OracleNet {
  Mat w1, b1, w2, b2, w3, b3;
  Mat v_w1, v_b1, v_w2, v_b2, v_w3, v_b3;
  std::size_t d, h, f, k;

  void sgd(Mat& param, Mat& vel, const Mat& grad, const harness::SgdConfig& opt) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      vel[i] = opt.momentum * vel[i] + grad[i] + opt.weight_decay * param[i];
      param[i] -= opt.lr * vel[i];
    }
  }

  void step(const Mat& x, const std::vector<int>& ys, std::size_t b,
            const harness::SgdConfig& opt) {
    // forward
    Mat z1 = matmul(x, b, d, w1, h);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < h; ++j) z1[i * h + j] += b1[j];
    }
    Mat a1 = z1;
    for (double& v : a1) v = v > 0.0 ? v : 0.0;
    Mat z2 = matmul(a1, b, h, w2, f);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < f; ++j) z2[i * f + j] += b2[j];
    }
    Mat logits = matmul(z2, b, f, w3, k);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < k; ++j) logits[i * k + j] += b3[j];
    }
    // softmax rows
    Mat probs(b * k);
    for (std::size_t i = 0; i < b; ++i) {
      double mx = logits[i * k];
      for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits[i * k + j]);
      double denom = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        probs[i * k + j] = std::exp(logits[i * k + j] - mx);
        denom += probs[i * k + j];
      }
      for (std::size_t j = 0; j < k; ++j) probs[i * k + j] /= denom;
    }
    // backward
    Mat dlogits = probs;
    for (std::size_t i = 0; i < b; ++i) dlogits[i * k + ys[i]] -= 1.0;
    for (double& v : dlogits) v /= static_cast<double>(b);

    Mat dw3 = matmul(transpose(z2, b, f), f, b, dlogits, k);
    Mat db3(k, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < k; ++j) db3[j] += dlogits[i * k + j];
    }
    Mat dz2 = matmul(dlogits, b, k, transpose(w3, f, k), f);
    Mat dw2 = matmul(transpose(a1, b, h), h, b, dz2, f);
    Mat db2(f, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < f; ++j) db2[j] += dz2[i * f + j];
    }
    Mat da1 = matmul(dz2, b, f, transpose(w2, h, f), h);
    Mat dz1 = da1;
    for (std::size_t i = 0; i < b * h; ++i) {
      if (z1[i] <= 0.0) dz1[i] = 0.0;
    }
    Mat dw1 = matmul(transpose(x, b, d), d, b, dz1, h);
    Mat db1(h, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < h; ++j) db1[j] += dz1[i * h + j];
    }

    sgd(w1, v_w1, dw1, opt);
    sgd(b1, v_b1, db1, opt);
    sgd(w2, v_w2, dw2, opt);
    sgd(b2, v_b2, db2, opt);
    sgd(w3, v_w3, dw3, opt);
    sgd(b3, v_b3, db3, opt);
  }
};

}  // namespace

TEST_CASE("sgd_update") {
  SUBCASE("vanilla step without momentum or decay") {
    nn::Parameter p{"p", {2}, {1.0, -2.0}, {0.0, 0.0}};
    train::sgd_update(p, std::vector<double>{0.5, -0.25}, {0.1, 0.0, 0.0});
    CHECK(p.value[0] == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(p.value[1] == doctest::Approx(-1.975).epsilon(1e-15));
  }
  SUBCASE("zero gradient with zero velocity is a fixed point") {
    nn::Parameter p{"p", {2}, {3.0, 4.0}, {0.0, 0.0}};
    train::sgd_update(p, std::vector<double>{0.0, 0.0}, {0.1, 0.9, 0.0});
    CHECK(p.value == std::vector<double>{3.0, 4.0});
  }
  SUBCASE("two steps match the hand-unrolled recurrence") {
    const harness::SgdConfig opt{0.01, 0.95, 0.0005};
    nn::Parameter p{"p", {1}, {1.0}, {0.0}};
    train::sgd_update(p, std::vector<double>{0.3}, opt);
    train::sgd_update(p, std::vector<double>{-0.2}, opt);

    double theta = 1.0, v = 0.0;
    v = 0.95 * v + 0.3 + 0.0005 * theta;
    theta -= 0.01 * v;
    v = 0.95 * v + (-0.2) + 0.0005 * theta;
    theta -= 0.01 * v;
    CHECK(std::abs(p.value[0] - theta) < 1e-12);
    CHECK(std::abs(p.velocity[0] - v) < 1e-12);
  }
  SUBCASE("size mismatch rejected") {
    nn::Parameter p{"p", {2}, {1.0, 2.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(train::sgd_update(p, std::vector<double>{1.0}, {0.1, 0.0, 0.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("degenerate weights reduce a step to plain source classification") {
  ExperimentConfig cfg = small_config(19);
  cfg.weights.lambda = 0.0;
  cfg.weights.beta = 0.0;
  cfg.optimizer = {0.05, 0.9, 0.001};
  train::Trainer trainer(cfg);

  // mirror the parameters before training
  OracleNet oracle;
  oracle.d = 2;
  oracle.h = 8;
  oracle.f = 4;
  oracle.k = 2;
  auto& fp = trainer.teacher().feature.params();
  auto& cp = trainer.teacher().classifier.params();
  oracle.w1 = fp[0].value;
  oracle.b1 = fp[1].value;
  oracle.w2 = fp[2].value;
  oracle.b2 = fp[3].value;
  oracle.w3 = cp[0].value;
  oracle.b3 = cp[1].value;
  oracle.v_w1.assign(oracle.w1.size(), 0.0);
  oracle.v_b1.assign(oracle.b1.size(), 0.0);
  oracle.v_w2.assign(oracle.w2.size(), 0.0);
  oracle.v_b2.assign(oracle.b2.size(), 0.0);
  oracle.v_w3.assign(oracle.w3.size(), 0.0);
  oracle.v_b3.assign(oracle.b3.size(), 0.0);

  rng::Stream ss(cfg.seed, "source-sampling");
  rng::Stream ts(cfg.seed, "target-sampling");
  data::EpochSampler s_sampler(cfg.dataset.n_source, cfg.batch_source, &ss);
  data::EpochSampler t_sampler(cfg.dataset.n_target, cfg.batch_target, &ts);

  for (int step = 0; step < 3; ++step) {
    auto sb = data::sample_source(trainer.source_domain(), s_sampler);
    auto tb = data::sample_target(trainer.target_domain(), t_sampler);
    trainer.train_step(sb, tb);
    oracle.step(sb.xs, sb.ys, sb.n, cfg.optimizer);
  }

  auto close = [](const Mat& a, const Mat& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(a[i] - b[i]) < 1e-10);
    }
  };
  close(fp[0].value, oracle.w1);
  close(fp[1].value, oracle.b1);
  close(fp[2].value, oracle.w2);
  close(fp[3].value, oracle.b2);
  close(cp[0].value, oracle.w3);
  close(cp[1].value, oracle.b3);
}

TEST_CASE("teacher trajectory is independent of the student") {
  ExperimentConfig tsc_cfg = small_config(23);
  tsc_cfg.weights.beta = 0.0;
  ExperimentConfig solo_cfg = tsc_cfg;
  solo_cfg.mode = RunMode::kTeacherOnly;

  auto tsc_result = train::run(tsc_cfg);
  auto solo_result = train::run(solo_cfg);
  REQUIRE(tsc_result.history.size() == solo_result.history.size());
  for (std::size_t i = 0; i < tsc_result.history.size(); ++i) {
    const auto& a = tsc_result.history[i];
    const auto& b = solo_result.history[i];
    CHECK(a.teacher_param_hash == b.teacher_param_hash);
    CHECK(a.teacher_acc == b.teacher_acc);
    CHECK(a.pl_teacher_acc == b.pl_teacher_acc);
  }
  REQUIRE(tsc_result.final_teacher_params.size() == solo_result.final_teacher_params.size());
  for (std::size_t i = 0; i < tsc_result.final_teacher_params.size(); ++i) {
    CHECK(tsc_result.final_teacher_params[i].value ==
          solo_result.final_teacher_params[i].value);
  }
}

TEST_CASE("first step starts at threshold one half") {
  ExperimentConfig cfg;
  cfg.seed = 2;
  cfg.dataset.kind = data::DatasetKind::kGaussianBlobsShift;
  cfg.dataset.classes = 3;
  cfg.dataset.n_source = 60;
  cfg.dataset.n_target = 60;
  cfg.dataset.noise = 0.4;
  cfg.dataset.shift_param = 1.0;
  cfg.batch_source = 12;
  cfg.batch_target = 12;
  cfg.total_steps = 10;
  train::Trainer trainer(cfg);

  rng::Stream ss(cfg.seed, "source-sampling");
  rng::Stream ts(cfg.seed, "target-sampling");
  data::EpochSampler s_sampler(cfg.dataset.n_source, cfg.batch_source, &ss);
  data::EpochSampler t_sampler(cfg.dataset.n_target, cfg.batch_target, &ts);
  auto sb = data::sample_source(trainer.source_domain(), s_sampler);
  auto tb = data::sample_target(trainer.target_domain(), t_sampler);

  // an untrained teacher with no signal yet predicts uniformly: exactly 1/K
  // confidence for K = 3, below the opening threshold of one half
  for (nn::Parameter* p : trainer.teacher().parameters()) {
    std::fill(p->value.begin(), p->value.end(), 0.0);
  }
  {
    autodiff::Tape tape;
    auto bf = trainer.teacher().feature.bind(tape);
    auto bc = trainer.teacher().classifier.bind(tape);
    auto pls = nn::predict(bc.forward(bf.forward(tape.constant({tb.n, tb.d}, tb.xs))));
    for (const auto& pl : pls) {
      REQUIRE(pl.confidence == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
  }

  auto m = trainer.train_step(sb, tb);
  CHECK(m.step == 0);
  CHECK(m.threshold == 0.5);
  CHECK(m.n_teacher_over_threshold == 0);
  CHECK(m.n_teacher_higher_conf + m.n_student_wins == static_cast<int>(tb.n));
}

TEST_CASE("run bookkeeping") {
  SUBCASE("zero steps yields the initial snapshot only") {
    ExperimentConfig cfg = small_config(3);
    cfg.total_steps = 0;
    auto result = train::run(cfg);
    REQUIRE(result.history.size() == 1);
    CHECK(result.history[0].step == 0);
    CHECK(result.history[0].threshold == 0.5);
    CHECK(std::isnan(result.history[0].teacher_loss));
  }
  SUBCASE("history rows strictly increase in step and include the final step") {
    ExperimentConfig cfg = small_config(4);
    cfg.total_steps = 25;  // not a multiple of the eval interval
    auto result = train::run(cfg);
    REQUIRE(result.history.size() >= 2);
    for (std::size_t i = 1; i < result.history.size(); ++i) {
      CHECK(result.history[i].step > result.history[i - 1].step);
    }
    CHECK(result.history.back().step == 25);
  }
  SUBCASE("identical config and seed reproduce the metric history") {
    ExperimentConfig cfg = small_config(5);
    auto a = train::run(cfg);
    auto b = train::run(cfg);
    CHECK(harness::metrics_csv(a) == harness::metrics_csv(b));
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].teacher_param_hash == b.history[i].teacher_param_hash);
      CHECK(a.history[i].student_param_hash == b.history[i].student_param_hash);
    }
  }
  SUBCASE("threshold telemetry reproduces the schedule") {
    ExperimentConfig cfg = small_config(6);
    auto result = train::run(cfg);
    const competition::Schedule sched{cfg.schedule_delta, cfg.total_steps};
    for (const auto& row : result.history) {
      CHECK(row.threshold == competition::threshold(row.step, sched));
      const double p = static_cast<double>(row.step) / cfg.total_steps;
      CHECK(row.threshold == doctest::Approx(1.0 / (1.0 + std::exp(-cfg.schedule_delta * p)))
                                 .epsilon(1e-15));
    }
  }
  SUBCASE("decision fractions partition the target set") {
    ExperimentConfig cfg = small_config(7);
    auto result = train::run(cfg);
    for (const auto& row : result.history) {
      const double sum = row.frac_teacher_over_threshold + row.frac_teacher_higher_conf +
                         row.frac_student_wins;
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("exploding optimization aborts with a named component") {
  ExperimentConfig cfg = small_config(8);
  cfg.optimizer.lr = 1e18;
  cfg.optimizer.momentum = 0.0;
  cfg.total_steps = 30;
  bool aborted = false;
  try {
    train::run(cfg);
  } catch (const autodiff::NonFiniteError& e) {
    aborted = true;
    const std::string msg = e.what();
    CHECK(msg.find("at step") != std::string::npos);
    const bool named = msg.find("logits") != std::string::npos ||
                       msg.find("loss") != std::string::npos ||
                       msg.find("gradient of") != std::string::npos ||
                       msg.find("domain scores") != std::string::npos;
    CHECK(named);
  }
  CHECK(aborted);
}

TEST_CASE("teacher-only mode reports no student metrics") {
  ExperimentConfig cfg = small_config(9);
  cfg.mode = RunMode::kTeacherOnly;
  auto result = train::run(cfg);
  CHECK(std::isnan(result.final_student_acc));
  for (const auto& row : result.history) {
    CHECK(std::isnan(row.student_acc));
    CHECK(std::isnan(row.pl_winner_acc));
    CHECK(!std::isnan(row.teacher_acc));
  }
}

TEST_CASE("step budget is enforced") {
  ExperimentConfig cfg = small_config(10);
  cfg.total_steps = 1;
  train::Trainer trainer(cfg);
  rng::Stream ss(cfg.seed, "source-sampling");
  rng::Stream ts(cfg.seed, "target-sampling");
  data::EpochSampler s_sampler(cfg.dataset.n_source, cfg.batch_source, &ss);
  data::EpochSampler t_sampler(cfg.dataset.n_target, cfg.batch_target, &ts);
  auto sb = data::sample_source(trainer.source_domain(), s_sampler);
  auto tb = data::sample_target(trainer.target_domain(), t_sampler);
  trainer.train_step(sb, tb);
  CHECK_THROWS_AS(trainer.train_step(sb, tb), std::logic_error);
}
