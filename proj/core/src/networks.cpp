#include "tsc/networks.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace tsc::nn {

using autodiff::Tensor;

void MlpSpec::validate() const {
  if (input_dim == 0) throw std::invalid_argument("MlpSpec: input_dim must be positive");
  if (output_dim == 0) throw std::invalid_argument("MlpSpec: output_dim must be positive");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw std::invalid_argument("MlpSpec: hidden dims must be positive");
  }
}

Mlp::Mlp(MlpSpec spec, std::string name, rng::Stream& init)
    : spec_(std::move(spec)), name_(std::move(name)) {
  spec_.validate();
  dims_.push_back(spec_.input_dim);
  for (std::size_t h : spec_.hidden_dims) dims_.push_back(h);
  dims_.push_back(spec_.output_dim);

  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const std::size_t fan_in = dims_[l], fan_out = dims_[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Parameter w;
    w.name = name_ + ".w" + std::to_string(l);
    w.shape = {fan_in, fan_out};
    w.value.resize(fan_in * fan_out);
    for (double& v : w.value) v = init.uniform(-bound, bound);
    w.velocity.assign(w.value.size(), 0.0);
    params_.push_back(std::move(w));

    Parameter b;
    b.name = name_ + ".b" + std::to_string(l);
    b.shape = {fan_out};
    b.value.assign(fan_out, 0.0);
    b.velocity.assign(fan_out, 0.0);
    params_.push_back(std::move(b));
  }
}

BoundMlp Mlp::bind(autodiff::Tape& tape) {
  BoundMlp bm;
  bm.net = this;
  bm.bound.reserve(params_.size());
  for (Parameter& p : params_) {
    Tensor leaf = tape.leaf(p.shape, p.value, /*requires_grad=*/true);
    bm.bound.emplace_back(&p, leaf);
  }
  return bm;
}

Tensor BoundMlp::forward(Tensor x) const {
  const MlpSpec& spec = net->spec();
  const std::size_t layers = net->layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    Tensor w = bound[2 * l].second;
    Tensor b = bound[2 * l + 1].second;
    x = autodiff::add_bias(autodiff::matmul(x, w), b);
    const bool last = (l + 1 == layers);
    if (!last) {
      x = spec.activation == Activation::kRelu ? autodiff::relu(x) : autodiff::tanh(x);
    } else if (spec.final_activation == FinalActivation::kSigmoid) {
      x = autodiff::sigmoid(x);
    }
  }
  return x;
}

TeacherNet TeacherNet::make(TeacherVariant variant, const MlpSpec& feature_spec,
                            const MlpSpec& classifier_spec, const MlpSpec& discriminator_spec,
                            rng::Stream& init) {
  if (classifier_spec.input_dim != feature_spec.output_dim) {
    throw std::invalid_argument("TeacherNet: classifier input dim " +
                                std::to_string(classifier_spec.input_dim) +
                                " != feature dim " + std::to_string(feature_spec.output_dim));
  }
  const std::size_t expected_d_in =
      variant == TeacherVariant::kDann
          ? feature_spec.output_dim
          : feature_spec.output_dim * classifier_spec.output_dim;
  if (discriminator_spec.input_dim != expected_d_in) {
    throw std::invalid_argument("TeacherNet: discriminator input dim " +
                                std::to_string(discriminator_spec.input_dim) + " != expected " +
                                std::to_string(expected_d_in) + " for this variant");
  }
  if (discriminator_spec.output_dim != 1 ||
      discriminator_spec.final_activation != FinalActivation::kSigmoid) {
    throw std::invalid_argument("TeacherNet: discriminator must end in one sigmoid unit");
  }
  return TeacherNet{variant, Mlp(feature_spec, "teacher.feature", init),
                    Mlp(classifier_spec, "teacher.classifier", init),
                    Mlp(discriminator_spec, "teacher.discriminator", init)};
}

std::vector<Parameter*> TeacherNet::parameters() {
  std::vector<Parameter*> out;
  for (Parameter& p : feature.params()) out.push_back(&p);
  for (Parameter& p : classifier.params()) out.push_back(&p);
  for (Parameter& p : discriminator.params()) out.push_back(&p);
  return out;
}

StudentNet StudentNet::make(const TeacherNet& teacher, rng::Stream& init) {
  // Same structure as the teacher's feature extractor and classifier,
  // freshly drawn parameters.
  return StudentNet{Mlp(teacher.feature.spec(), "student.feature", init),
                    Mlp(teacher.classifier.spec(), "student.classifier", init)};
}

std::vector<Parameter*> StudentNet::parameters() {
  std::vector<Parameter*> out;
  for (Parameter& p : feature.params()) out.push_back(&p);
  for (Parameter& p : classifier.params()) out.push_back(&p);
  return out;
}

autodiff::Tensor multilinear(Tensor f, Tensor g) {
  if (g.shape().size() != 2) {
    throw std::invalid_argument("multilinear: g must be rank-2, got " +
                                autodiff::shape_str(g.shape()));
  }
  const std::size_t b = g.shape()[0], k = g.shape()[1];
  auto gv = g.value();
  for (std::size_t i = 0; i < b; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (gv[i * k + j] < -1e-12) {
        throw std::invalid_argument("multilinear: g row " + std::to_string(i) +
                                    " has a negative entry");
      }
      row_sum += gv[i * k + j];
    }
    if (std::abs(row_sum - 1.0) > 1e-6) {
      throw std::invalid_argument("multilinear: g row " + std::to_string(i) +
                                  " does not sum to 1");
    }
  }
  return autodiff::row_outer(f, g);
}

TeacherPass teacher_forward(autodiff::Tape& tape, TeacherNet& net, Tensor xs, Tensor xt,
                            double grl_coeff) {
  TeacherPass pass;
  pass.feature = net.feature.bind(tape);
  pass.classifier = net.classifier.bind(tape);
  pass.discriminator = net.discriminator.bind(tape);

  Tensor fs = pass.feature.forward(xs);
  Tensor ft = pass.feature.forward(xt);
  pass.source_logits = pass.classifier.forward(fs);
  pass.target_logits = pass.classifier.forward(ft);

  auto domain_input = [&](Tensor f, Tensor logits) {
    if (net.variant == TeacherVariant::kDann) return f;
    return multilinear(f, autodiff::softmax(logits));
  };
  Tensor hs = domain_input(fs, pass.source_logits);
  Tensor ht = domain_input(ft, pass.target_logits);
  pass.source_domain_scores = pass.discriminator.forward(autodiff::grl(hs, grl_coeff));
  pass.target_domain_scores = pass.discriminator.forward(autodiff::grl(ht, grl_coeff));
  return pass;
}

StudentPass student_forward(autodiff::Tape& tape, StudentNet& net, Tensor xt) {
  StudentPass pass;
  pass.feature = net.feature.bind(tape);
  pass.classifier = net.classifier.bind(tape);
  pass.target_logits = pass.classifier.forward(pass.feature.forward(xt));
  return pass;
}

std::vector<PseudoLabel> predict(std::span<const double> logits, std::size_t rows,
                                 std::size_t classes) {
  if (classes < 2) throw std::invalid_argument("predict: need at least 2 classes");
  if (logits.size() != rows * classes) {
    throw std::invalid_argument("predict: buffer size does not match rows x classes");
  }
  std::vector<PseudoLabel> out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = logits.data() + i * classes;
    std::size_t best = 0;
    for (std::size_t j = 1; j < classes; ++j) {
      if (row[j] > row[best]) best = j;  // strict: ties keep the lowest index
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < classes; ++j) denom += std::exp(row[j] - row[best]);
    out[i] = PseudoLabel{static_cast<int>(best), 1.0 / denom};
  }
  return out;
}

std::vector<PseudoLabel> predict(const Tensor& logits) {
  if (logits.shape().size() != 2) {
    throw std::invalid_argument("predict: logits must be rank-2, got " +
                                autodiff::shape_str(logits.shape()));
  }
  return predict(logits.value(), logits.shape()[0], logits.shape()[1]);
}

std::uint64_t params_fingerprint(std::span<Parameter* const> params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const Parameter* p : params) {
    mix(p->value.data(), p->value.size() * sizeof(double));
  }
  return h;
}

}  // namespace tsc::nn
