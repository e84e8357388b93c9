#pragma once

#include <functional>
#include <string>
#include <vector>

namespace acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;  // measured numbers, shown on both pass and fail
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // wall-clock budget; exceeding it fails the criterion
  std::function<Outcome()> run;
};

std::vector<Criterion> theory_criteria();
std::vector<Criterion> learning_criteria();

}  // namespace acceptance
