#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsc/rng.hpp"

namespace tsc::data {

enum class DatasetKind { kTwoMoonsRotation, kGaussianBlobsShift };

// Declarative description of one synthetic domain-shift task. Generation is
// a pure function of this struct, seed included.
struct DatasetSpec {
  DatasetKind kind = DatasetKind::kTwoMoonsRotation;
  std::size_t n_source = 500;
  std::size_t n_target = 500;
  double shift_param = 35.0;  // rotation degrees or translation magnitude
  double noise = 0.1;
  int classes = 2;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const DatasetSpec&) const = default;
};

// One domain: n samples of dimension d, row-major features plus labels.
// Target labels exist only for evaluation; training code must consume the
// unlabeled view below.
struct Domain {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> xs;
  std::vector<int> ys;
  std::string name;
};

// Feature dimension produced by the built-in generators.
inline constexpr std::size_t kFeatureDim = 2;

// Source from the base distribution, target from the shifted one.
std::pair<Domain, Domain> generate(const DatasetSpec& spec);

// Labeled batch drawn from the source domain.
struct SourceBatch {
  std::vector<std::size_t> indices;
  std::size_t n = 0, d = 0;
  std::vector<double> xs;
  std::vector<int> ys;
};

// Unlabeled batch drawn from the target domain. Carrying no label field is
// what keeps target labels out of the training path.
struct TargetBatch {
  std::vector<std::size_t> indices;
  std::size_t n = 0, d = 0;
  std::vector<double> xs;
};

// Without-replacement sampler: a fresh permutation each epoch, consumed in
// batch_size chunks (the final chunk of an epoch may be short).
class EpochSampler {
 public:
  EpochSampler(std::size_t n, std::size_t batch_size, rng::Stream* stream);
  std::vector<std::size_t> next();

 private:
  std::size_t n_, batch_size_, cursor_;
  rng::Stream* stream_;
  std::vector<std::size_t> perm_;
};

SourceBatch sample_source(const Domain& domain, EpochSampler& sampler);
TargetBatch sample_target(const Domain& domain, EpochSampler& sampler);

// CSV with one feature column per dimension, then label, then domain
// ("source"/"target"), for cross-implementation comparison.
void export_csv(const Domain& source, const Domain& target, const std::filesystem::path& path);
std::pair<Domain, Domain> import_csv(const std::filesystem::path& path);

}  // namespace tsc::data
