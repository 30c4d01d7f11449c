#include <benchmark/benchmark.h>

#include "tsc/trainer.hpp"

namespace {

using namespace tsc;

void BM_MatmulForwardBackward(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  rng::Stream stream(1, "bench");
  std::vector<double> a(n * n), b(n * n);
  for (double& v : a) v = stream.normal();
  for (double& v : b) v = stream.normal();
  for (auto _ : state) {
    autodiff::Tape tape;
    auto ta = tape.leaf({n, n}, a, true);
    auto tb = tape.leaf({n, n}, b, true);
    auto loss = autodiff::sum(autodiff::matmul(ta, tb));
    tape.backward(loss);
    benchmark::DoNotOptimize(ta.grad().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatmulForwardBackward)->RangeMultiplier(2)->Range(8, 64)->Complexity();

void BM_SoftmaxForwardBackward(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  rng::Stream stream(1, "bench");
  std::vector<double> logits(rows * 8);
  for (double& v : logits) v = stream.normal();
  for (auto _ : state) {
    autodiff::Tape tape;
    auto t = tape.leaf({rows, 8}, logits, true);
    auto loss = autodiff::sum(autodiff::mul(autodiff::softmax(t), autodiff::softmax(t)));
    tape.backward(loss);
    benchmark::DoNotOptimize(t.grad().data());
  }
}
BENCHMARK(BM_SoftmaxForwardBackward)->Range(32, 512);

harness::ExperimentConfig small_config(nn::TeacherVariant variant) {
  harness::ExperimentConfig cfg;
  cfg.total_steps = 10;
  cfg.eval_interval = 10;
  cfg.dataset.n_source = 200;
  cfg.dataset.n_target = 200;
  cfg.teacher_variant = variant;
  return cfg;
}

void BM_TrainStepDann(benchmark::State& state) {
  auto cfg = small_config(nn::TeacherVariant::kDann);
  cfg.total_steps = 1 << 20;
  train::Trainer trainer(cfg);
  rng::Stream ss(1, "source-sampling"), ts(1, "target-sampling");
  data::EpochSampler source_sampler(cfg.dataset.n_source, cfg.batch_source, &ss);
  data::EpochSampler target_sampler(cfg.dataset.n_target, cfg.batch_target, &ts);
  for (auto _ : state) {
    auto sb = data::sample_source(trainer.source_domain(), source_sampler);
    auto tb = data::sample_target(trainer.target_domain(), target_sampler);
    benchmark::DoNotOptimize(trainer.train_step(sb, tb));
  }
}
BENCHMARK(BM_TrainStepDann);

void BM_TrainStepCdan(benchmark::State& state) {
  auto cfg = small_config(nn::TeacherVariant::kCdan);
  cfg.total_steps = 1 << 20;
  train::Trainer trainer(cfg);
  rng::Stream ss(1, "source-sampling"), ts(1, "target-sampling");
  data::EpochSampler source_sampler(cfg.dataset.n_source, cfg.batch_source, &ss);
  data::EpochSampler target_sampler(cfg.dataset.n_target, cfg.batch_target, &ts);
  for (auto _ : state) {
    auto sb = data::sample_source(trainer.source_domain(), source_sampler);
    auto tb = data::sample_target(trainer.target_domain(), target_sampler);
    benchmark::DoNotOptimize(trainer.train_step(sb, tb));
  }
}
BENCHMARK(BM_TrainStepCdan);

void BM_GenerateMoons(benchmark::State& state) {
  data::DatasetSpec spec;
  spec.n_source = static_cast<std::size_t>(state.range(0));
  spec.n_target = spec.n_source;
  for (auto _ : state) {
    benchmark::DoNotOptimize(data::generate(spec));
  }
}
BENCHMARK(BM_GenerateMoons)->Range(100, 10000);

}  // namespace

BENCHMARK_MAIN();
