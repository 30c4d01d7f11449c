#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "tsc/competition.hpp"
#include "tsc/rng.hpp"

using namespace tsc;
using competition::Reason;
using competition::Schedule;
using competition::Winner;
using nn::PseudoLabel;

namespace {

// Independent re-statement of the selection rule used as the oracle.
bool teacher_wins_oracle(double p1, double p2, double tp) { return p1 > tp || p1 > p2; }
bool teacher_wins_fair(double p1, double p2) { return p1 > p2; }

}  // namespace

TEST_CASE("threshold schedule") {
  const Schedule sched{10.0, 1000};
  SUBCASE("starts at exactly one half") {
    CHECK(competition::threshold(0, sched) == 0.5);
  }
  SUBCASE("reaches the frozen endpoint value") {
    CHECK(std::abs(competition::threshold(1000, sched) - 0.9999546021312976) < 1e-12);
  }
  SUBCASE("midpoint matches the frozen value") {
    CHECK(std::abs(competition::threshold(500, sched) - 0.9933071490757153) < 1e-12);
  }
  SUBCASE("monotone non-decreasing and below one") {
    double prev = 0.0;
    for (int step = 0; step <= 1000; ++step) {
      const double tp = competition::threshold(step, sched);
      CHECK(tp >= prev);
      CHECK(tp < 1.0);
      prev = tp;
    }
  }
  SUBCASE("step outside the budget rejected") {
    CHECK_THROWS_AS(competition::threshold(-1, sched), std::invalid_argument);
    CHECK_THROWS_AS(competition::threshold(1001, sched), std::invalid_argument);
  }
  SUBCASE("schedule fields validated") {
    CHECK_THROWS_AS(competition::threshold(0, Schedule{0.0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(competition::threshold(0, Schedule{10.0, 0}), std::invalid_argument);
  }
  SUBCASE("delta is configurable") {
    const Schedule gentle{2.0, 100};
    CHECK(competition::threshold(100, gentle) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-15));
  }
}

TEST_CASE("compete branch selection") {
  auto one = [](double p1, double p2, double tp) {
    const PseudoLabel t{3, p1}, s{5, p2};
    return competition::compete(std::vector{t}, std::vector{s}, tp).front();
  };
  SUBCASE("confident teacher wins through the threshold branch") {
    const auto d = one(0.95, 0.99, 0.9);
    CHECK(d.winner == Winner::kTeacher);
    CHECK(d.reason == Reason::kTeacherOverThreshold);
    CHECK(d.chosen_label == 3);
  }
  SUBCASE("teacher wins the confidence contest below the threshold") {
    const auto d = one(0.6, 0.5, 0.9);
    CHECK(d.winner == Winner::kTeacher);
    CHECK(d.reason == Reason::kTeacherHigherConfidence);
    CHECK(d.chosen_label == 3);
  }
  SUBCASE("student wins otherwise") {
    const auto d = one(0.6, 0.7, 0.9);
    CHECK(d.winner == Winner::kStudent);
    CHECK(d.reason == Reason::kStudentWins);
    CHECK(d.chosen_label == 5);
  }
  SUBCASE("equal confidences below the threshold go to the student") {
    const auto d = one(0.6, 0.6, 0.9);
    CHECK(d.winner == Winner::kStudent);
    CHECK(d.chosen_label == 5);
  }
  SUBCASE("decision records the inputs") {
    const auto d = one(0.61, 0.73, 0.88);
    CHECK(d.teacher_conf == 0.61);
    CHECK(d.student_conf == 0.73);
    CHECK(d.threshold == 0.88);
    CHECK(d.sample_index == 0);
  }
  SUBCASE("length mismatch rejected") {
    std::vector<PseudoLabel> two(2), three(3);
    CHECK_THROWS_AS(competition::compete(two, three, 0.8), std::invalid_argument);
  }
  SUBCASE("threshold outside range rejected") {
    std::vector<PseudoLabel> one_label(1);
    CHECK_THROWS_AS(competition::compete(one_label, one_label, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(competition::compete(one_label, one_label, 1.2), std::invalid_argument);
  }
}

TEST_CASE("compete agrees with the rule oracle on random triples") {
  rng::Stream stream(41, "compete");
  int teacher_total = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const double p1 = stream.uniform(0.2, 1.0);
    const double p2 = stream.uniform(0.2, 1.0);
    const double tp = stream.uniform(0.5, 1.0);
    const PseudoLabel t{0, p1}, s{1, p2};
    const auto d = competition::compete(std::vector{t}, std::vector{s}, tp).front();
    const bool teacher = d.winner == Winner::kTeacher;
    REQUIRE(teacher == teacher_wins_oracle(p1, p2, tp));
    REQUIRE(d.chosen_label == (teacher ? 0 : 1));
    teacher_total += teacher;
  }
  CHECK(teacher_total > 0);
  CHECK(teacher_total < 10000);
}

TEST_CASE("threshold one disables teacher priority") {
  rng::Stream stream(43, "fair");
  for (int rep = 0; rep < 10000; ++rep) {
    const double p1 = stream.uniform(0.0, 1.0);
    const double p2 = rep % 7 == 0 ? p1 : stream.uniform(0.0, 1.0);  // exercise ties
    const PseudoLabel t{0, p1}, s{1, p2};
    const auto d = competition::compete(std::vector{t}, std::vector{s}, 1.0).front();
    REQUIRE((d.winner == Winner::kTeacher) == teacher_wins_fair(p1, p2));
  }
}

TEST_CASE("all teacher confidences above the threshold means the teacher sweeps") {
  rng::Stream stream(44, "sweep");
  std::vector<PseudoLabel> teacher(64), student(64);
  const double tp = 0.8;
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    teacher[i] = {static_cast<int>(i % 3), stream.uniform(0.800001, 1.0)};
    student[i] = {static_cast<int>((i + 1) % 3), stream.uniform(0.0, 1.0)};
  }
  for (const auto& d : competition::compete(teacher, student, tp)) {
    CHECK(d.winner == Winner::kTeacher);
  }
}

TEST_CASE("raising the threshold never flips a teacher win to a student win") {
  rng::Stream stream(45, "monotone");
  for (int rep = 0; rep < 2000; ++rep) {
    const double p1 = stream.uniform(0.0, 1.0);
    const double p2 = stream.uniform(0.0, 1.0);
    double lo = stream.uniform(0.5, 1.0);
    double hi = stream.uniform(0.5, 1.0);
    if (lo > hi) std::swap(lo, hi);
    const PseudoLabel t{0, p1}, s{1, p2};
    const auto d_lo = competition::compete(std::vector{t}, std::vector{s}, lo).front();
    const auto d_hi = competition::compete(std::vector{t}, std::vector{s}, hi).front();
    if (d_lo.winner == Winner::kStudent) {
      REQUIRE(d_hi.winner == Winner::kStudent);
    }
  }
}
