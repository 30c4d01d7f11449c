#include "tsc/losses.hpp"

#include <stdexcept>

namespace tsc::losses {

using autodiff::Tensor;

void LossWeights::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("LossWeights: lambda must be >= 0");
  if (beta < 0.0) throw std::invalid_argument("LossWeights: beta must be >= 0");
}

namespace {

// -mean(log(clamp(p[label]))) over the batch.
Tensor cross_entropy(Tensor logits, const std::vector<int>& labels) {
  Tensor probs = autodiff::softmax(logits);
  Tensor chosen = autodiff::pick(probs, labels);
  Tensor logp = autodiff::log(autodiff::clamp(chosen, kProbFloor, kProbCeil));
  return autodiff::scale(autodiff::mean(logp), -1.0);
}

Tensor binary_domain_loss(Tensor source_scores, Tensor target_scores) {
  Tensor log_s =
      autodiff::log(autodiff::clamp(source_scores, kProbFloor, kProbCeil));
  Tensor log_t_compl = autodiff::log(
      autodiff::clamp(autodiff::affine(target_scores, -1.0, 1.0), kProbFloor, kProbCeil));
  return autodiff::add(autodiff::scale(autodiff::mean(log_s), -1.0),
                       autodiff::scale(autodiff::mean(log_t_compl), -1.0));
}

}  // namespace

Tensor source_cls_loss(Tensor logits, const std::vector<int>& labels) {
  return cross_entropy(logits, labels);
}

Tensor dann_domain_loss(Tensor source_scores, Tensor target_scores) {
  return binary_domain_loss(source_scores, target_scores);
}

Tensor cdan_domain_loss(Tensor source_scores, Tensor target_scores) {
  return binary_domain_loss(source_scores, target_scores);
}

Tensor student_loss(Tensor logits, const std::vector<int>& pseudo_labels) {
  if (logits.shape().size() != 2 || pseudo_labels.size() != logits.shape()[0]) {
    throw std::invalid_argument("student_loss: need one pseudo-label per batch row");
  }
  return cross_entropy(logits, pseudo_labels);
}

Tensor teacher_objective(Tensor cls_loss, Tensor domain_loss, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("teacher_objective: lambda must be >= 0");
  return autodiff::add(cls_loss, autodiff::scale(domain_loss, lambda));
}

TotalLoss total_loss(Tensor teacher_cls, Tensor teacher_domain, Tensor student_cls,
                     const LossWeights& weights) {
  weights.validate();
  Tensor objective = autodiff::add(teacher_objective(teacher_cls, teacher_domain, weights.lambda),
                                   autodiff::scale(student_cls, weights.beta));
  const double reported = teacher_cls.scalar() - weights.lambda * teacher_domain.scalar() +
                          weights.beta * student_cls.scalar();
  return TotalLoss{objective, reported};
}

}  // namespace tsc::losses
