#pragma once

#include <vector>

#include "tsc/autodiff.hpp"

namespace tsc::losses {

// Trade-off weights: lambda scales the teacher's adversarial term, beta the
// student's pseudo-label term.
struct LossWeights {
  double lambda = 1.0;
  double beta = 0.3;

  void validate() const;  // both must be >= 0
  bool operator==(const LossWeights&) const = default;
};

// Probabilities entering a log are clamped to this range so discriminator
// scores of exactly 0 or 1 and vanishing class probabilities stay finite.
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kProbCeil = 1.0;

// Mean cross-entropy of classifier logits against integer labels.
autodiff::Tensor source_cls_loss(autodiff::Tensor logits, const std::vector<int>& labels);

// Binary domain loss: -mean(log ds) - mean(log(1 - dt)). Scores must come
// from the discriminator's sigmoid output.
autodiff::Tensor dann_domain_loss(autodiff::Tensor source_scores, autodiff::Tensor target_scores);

// Same functional form; the scores are produced from multilinear-conditioned
// features instead of raw features.
autodiff::Tensor cdan_domain_loss(autodiff::Tensor source_scores, autodiff::Tensor target_scores);

// Mean cross-entropy of student logits against the competition-selected
// pseudo-labels (one per target sample).
autodiff::Tensor student_loss(autodiff::Tensor logits, const std::vector<int>& pseudo_labels);

// Teacher composite cls + lambda * domain. The adversarial sign lives in
// the gradient reversal layer inside the teacher graph, so a plain descent
// step on this scalar drives the discriminator to discriminate and the
// extractor to confuse it.
autodiff::Tensor teacher_objective(autodiff::Tensor cls_loss, autodiff::Tensor domain_loss,
                                   double lambda);

struct TotalLoss {
  autodiff::Tensor objective;  // scalar actually backpropagated
  double reported;             // cls - lambda * domain + beta * student, as logged
};

TotalLoss total_loss(autodiff::Tensor teacher_cls, autodiff::Tensor teacher_domain,
                     autodiff::Tensor student_cls, const LossWeights& weights);

}  // namespace tsc::losses
