#include "tsc/competition.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tsc::competition {

void Schedule::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("Schedule: delta must be > 0");
  if (total_steps < 1) throw std::invalid_argument("Schedule: total_steps must be >= 1");
}

double threshold(int step, const Schedule& sched) {
  sched.validate();
  if (step < 0 || step > sched.total_steps) {
    throw std::invalid_argument("threshold: step " + std::to_string(step) + " outside [0, " +
                                std::to_string(sched.total_steps) + "]");
  }
  const double p = static_cast<double>(step) / static_cast<double>(sched.total_steps);
  return 1.0 / (1.0 + std::exp(-sched.delta * p));
}

std::vector<CompetitionDecision> compete(std::span<const nn::PseudoLabel> teacher,
                                         std::span<const nn::PseudoLabel> student, double tp) {
  if (teacher.size() != student.size()) {
    throw std::invalid_argument("compete: " + std::to_string(teacher.size()) +
                                " teacher labels vs " + std::to_string(student.size()) +
                                " student labels");
  }
  if (tp < 0.5 || tp > 1.0) {
    throw std::invalid_argument("compete: threshold " + std::to_string(tp) +
                                " outside [0.5, 1]");
  }
  std::vector<CompetitionDecision> out(teacher.size());
  for (std::size_t j = 0; j < teacher.size(); ++j) {
    const double p1 = teacher[j].confidence;
    const double p2 = student[j].confidence;
    CompetitionDecision d;
    d.sample_index = static_cast<int>(j);
    d.teacher_conf = p1;
    d.student_conf = p2;
    d.threshold = tp;
    if (p1 > tp) {
      d.winner = Winner::kTeacher;
      d.reason = Reason::kTeacherOverThreshold;
      d.chosen_label = teacher[j].class_index;
    } else if (p1 > p2) {
      d.winner = Winner::kTeacher;
      d.reason = Reason::kTeacherHigherConfidence;
      d.chosen_label = teacher[j].class_index;
    } else {
      // Ties go to the student: both teacher branches are strict.
      d.winner = Winner::kStudent;
      d.reason = Reason::kStudentWins;
      d.chosen_label = student[j].class_index;
    }
    out[j] = d;
  }
  return out;
}

}  // namespace tsc::competition
