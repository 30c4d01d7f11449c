#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsc/autodiff.hpp"
#include "tsc/pseudo_label.hpp"
#include "tsc/rng.hpp"

namespace tsc::nn {

enum class Activation { kRelu, kTanh };
enum class FinalActivation { kNone, kSigmoid };
enum class TeacherVariant { kDann, kCdan };

struct MlpSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t output_dim = 0;
  Activation activation = Activation::kRelu;
  FinalActivation final_activation = FinalActivation::kNone;

  void validate() const;  // throws std::invalid_argument on bad dims
  bool operator==(const MlpSpec&) const = default;
};

// Persistent parameter buffer. Values live across steps; each training step
// binds them onto a fresh tape. The velocity buffer belongs to SGD momentum.
struct Parameter {
  std::string name;
  autodiff::Shape shape;
  std::vector<double> value;
  std::vector<double> velocity;
};

class Mlp;

// One network bound onto a tape for a single forward/backward pass.
// Keeps the parameter <-> leaf pairing the optimizer needs afterwards.
struct BoundMlp {
  const Mlp* net = nullptr;
  std::vector<std::pair<Parameter*, autodiff::Tensor>> bound;

  autodiff::Tensor forward(autodiff::Tensor x) const;
};

// Fully-connected network. Weights start uniform in
// +-sqrt(6 / (fan_in + fan_out)), biases at zero.
class Mlp {
 public:
  Mlp(MlpSpec spec, std::string name, rng::Stream& init);

  const MlpSpec& spec() const { return spec_; }
  const std::string& name() const { return name_; }
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }

  BoundMlp bind(autodiff::Tape& tape);

  // Number of (weight, bias) layer pairs.
  std::size_t layer_count() const { return dims_.size() - 1; }

 private:
  friend struct BoundMlp;
  MlpSpec spec_;
  std::string name_;
  std::vector<std::size_t> dims_;  // input, hidden..., output
  std::vector<Parameter> params_;  // W0, b0, W1, b1, ...
};

// Adversarial teacher: feature extractor, classifier head, and domain
// discriminator, wired as plain DANN or as CDAN with multilinear
// conditioning.
struct TeacherNet {
  TeacherVariant variant = TeacherVariant::kDann;
  Mlp feature;
  Mlp classifier;
  Mlp discriminator;

  static TeacherNet make(TeacherVariant variant, const MlpSpec& feature_spec,
                         const MlpSpec& classifier_spec, const MlpSpec& discriminator_spec,
                         rng::Stream& init);

  std::size_t feature_dim() const { return feature.spec().output_dim; }
  std::size_t num_classes() const { return classifier.spec().output_dim; }

  std::vector<Parameter*> parameters();
};

// Target-only student: same architecture as the teacher's feature extractor
// and classifier, independent parameters.
struct StudentNet {
  Mlp feature;
  Mlp classifier;

  static StudentNet make(const TeacherNet& teacher, rng::Stream& init);

  std::vector<Parameter*> parameters();
};

struct TeacherPass {
  autodiff::Tensor source_logits;
  autodiff::Tensor target_logits;
  autodiff::Tensor source_domain_scores;
  autodiff::Tensor target_domain_scores;
  BoundMlp feature, classifier, discriminator;
};

struct StudentPass {
  autodiff::Tensor target_logits;
  BoundMlp feature, classifier;
};

// Runs source and target batches through the teacher. Domain scores are
// D(grl(f)) for DANN and D(grl(f (x) softmax(logits))) for CDAN; the
// gradient reversal sits between the conditioned features and the
// discriminator input.
TeacherPass teacher_forward(autodiff::Tape& tape, TeacherNet& net, autodiff::Tensor xs,
                            autodiff::Tensor xt, double grl_coeff);

// Per-row outer product of features with class probabilities, flattened to
// [b x (d_f * K)]. g rows must be probability vectors.
autodiff::Tensor multilinear(autodiff::Tensor f, autodiff::Tensor g);

StudentPass student_forward(autodiff::Tape& tape, StudentNet& net, autodiff::Tensor xt);

// Row-wise (argmax class, max softmax probability); ties break to the lowest
// class index.
std::vector<PseudoLabel> predict(std::span<const double> logits, std::size_t rows,
                                 std::size_t classes);
std::vector<PseudoLabel> predict(const autodiff::Tensor& logits);

// FNV-1a over the raw bytes of every parameter, for trajectory comparisons.
std::uint64_t params_fingerprint(std::span<Parameter* const> params);

}  // namespace tsc::nn
