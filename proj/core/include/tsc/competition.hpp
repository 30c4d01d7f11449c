#pragma once

#include <span>
#include <vector>

#include "tsc/pseudo_label.hpp"

namespace tsc::competition {

// Sigmoid schedule for the teacher-priority threshold: at training fraction
// p = step / total_steps the threshold is 1 / (1 + exp(-delta * p)), rising
// from exactly 0.5 toward 1.
struct Schedule {
  double delta = 10.0;
  int total_steps = 1;

  void validate() const;  // delta > 0, total_steps >= 1
};

enum class Winner { kTeacher, kStudent };

// Why a sample's pseudo-label was chosen. The threshold branch is checked
// before the confidence comparison.
enum class Reason { kTeacherOverThreshold, kTeacherHigherConfidence, kStudentWins };

struct CompetitionDecision {
  int sample_index = 0;
  Winner winner = Winner::kStudent;
  Reason reason = Reason::kStudentWins;
  int chosen_label = 0;
  double teacher_conf = 0.0;
  double student_conf = 0.0;
  double threshold = 0.0;
};

double threshold(int step, const Schedule& sched);

// Per-sample selection: the teacher's label wins iff its confidence exceeds
// the threshold or beats the student's confidence (both strictly); otherwise
// the student's label is used. tp may be 1.0, which disables the priority
// branch and reduces the rule to a plain confidence contest.
std::vector<CompetitionDecision> compete(std::span<const nn::PseudoLabel> teacher,
                                         std::span<const nn::PseudoLabel> student, double tp);

}  // namespace tsc::competition
