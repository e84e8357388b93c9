#include <cmath>
#include <vector>

#include "doctest.h"
#include "rosa/common.hpp"
#include "rosa/novelty/rnd.hpp"

using namespace rosa;
using namespace rosa::novelty;

namespace {

std::vector<Vec> corner_states() {
  std::vector<Vec> out;
  for (int i = 0; i < 4; ++i) {
    Vec v = Vec::Zero(4);
    v[i] = 1.0;
    out.push_back(v);
  }
  return out;
}

double mean_bonus(const NoveltyModel& model, const std::vector<Vec>& states) {
  double sum = 0.0;
  for (const auto& s : states) sum += model.bonus(s);
  return sum / static_cast<double>(states.size());
}

}  // namespace

TEST_SUITE("novelty") {

TEST_CASE("bonus is positive before training and shrinks with visits") {
  NoveltyModel model({4, 32, 8}, 17);
  auto states = corner_states();
  const double before = mean_bonus(model, states);
  CHECK(before > 0.0);
  for (int it = 0; it < 300; ++it) model.train_predictor(states, 1e-2);
  const double after = mean_bonus(model, states);
  CHECK(after < before * 0.5);
}

TEST_CASE("training to convergence drives bonuses to zero") {
  NoveltyModel model({4, 32, 4}, 5);
  auto states = corner_states();
  double last = 1.0;
  for (int it = 0; it < 30000 && last >= 1e-6; ++it)
    last = model.train_predictor(states, last > 1e-4 ? 3e-3 : 3e-4);
  REQUIRE(last < 1e-6);
  for (const auto& s : states) CHECK(model.bonus(s) < 1e-5);
}

TEST_CASE("train_predictor reports the pre-step mean bonus") {
  NoveltyModel model({4, 16, 4}, 23);
  auto states = corner_states();
  const double before = mean_bonus(model, states);
  const double reported = model.train_predictor(states, 1e-3);
  CHECK(reported == doctest::Approx(before).epsilon(1e-9));
}

TEST_CASE("target net stays frozen while the predictor moves") {
  NoveltyModel model({4, 16, 4}, 29);
  const uint64_t target_before = model.target_hash();
  const uint64_t predictor_before = model.predictor_hash();
  auto states = corner_states();
  for (int it = 0; it < 10; ++it) model.train_predictor(states, 1e-2);
  CHECK(model.target_hash() == target_before);
  CHECK(model.predictor_hash() != predictor_before);
}

TEST_CASE("target and predictor start distinct") {
  NoveltyModel model({3, 8, 2}, 31);
  CHECK(model.target_hash() != model.predictor_hash());
  Vec s = Vec::Zero(3);
  s[0] = 1.0;
  CHECK((model.target().forward(s) - model.predictor().forward(s)).norm() >
        0.0);
}

TEST_CASE("delta bonus is the difference of state bonuses") {
  NoveltyModel model({4, 16, 4}, 37);
  auto states = corner_states();
  const double d = model.delta_bonus(states[0], states[1]);
  CHECK(d == doctest::Approx(model.bonus(states[0]) - model.bonus(states[1])));
  CHECK(delta_bonus(model, states[0], states[1]) == doctest::Approx(d));
  CHECK(model.delta_bonus(states[2], states[2]) == doctest::Approx(0.0));
}

TEST_CASE("count bonus follows the inverse square root schedule") {
  CountTable table(0.5, 10);
  CHECK(table.bonus(3) == doctest::Approx(0.5));  // beta / sqrt(0 + 1)
  table.visit(3);
  CHECK(table.count(3) == 1);
  CHECK(table.bonus(3) == doctest::Approx(0.5 / std::sqrt(2.0)));
  for (int i = 0; i < 3; ++i) table.visit(3);
  CHECK(table.bonus(3) == doctest::Approx(0.5 / std::sqrt(5.0)));
  CHECK(count_bonus(table, 3) == doctest::Approx(table.bonus(3)));
}

TEST_CASE("count bonus saturates to zero at the visit cap") {
  CountTable table(1.0, 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(table.bonus(7) > 0.0);
    table.visit(7);
  }
  CHECK(table.bonus(7) == 0.0);
  table.visit(7);
  CHECK(table.bonus(7) == 0.0);
  CHECK(table.bonus(8) == doctest::Approx(1.0));  // other states unaffected
}

TEST_CASE("count table rejects bad parameters") {
  CHECK_THROWS_AS(CountTable(0.0, 5), UsageError);
  CHECK_THROWS_AS(CountTable(1.0, 0), UsageError);
}

}  // TEST_SUITE
