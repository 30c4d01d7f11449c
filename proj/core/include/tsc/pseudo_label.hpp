#pragma once

namespace tsc::nn {

// Per-sample (argmax class, max softmax probability) pair emitted by either
// network on unlabeled target data.
struct PseudoLabel {
  int class_index = 0;
  double confidence = 0.0;
};

}  // namespace tsc::nn
