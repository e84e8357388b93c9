#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "acceptance.hpp"

// Acceptance harness: runs every registered criterion and prints one
// PASS/FAIL line each. Pass criterion ids as arguments to run a subset.
int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  std::vector<acceptance::Criterion> all = acceptance::theory_criteria();
  {
    std::vector<acceptance::Criterion> learning =
        acceptance::learning_criteria();
    all.insert(all.end(), std::make_move_iterator(learning.begin()),
               std::make_move_iterator(learning.end()));
  }
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });

  int ran = 0, passed = 0;
  for (const acceptance::Criterion& c : all) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.id) == only.end())
      continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    acceptance::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("unhandled exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (o.pass && c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += " [exceeded " + std::to_string(c.budget_s) + "s budget]";
    }
    if (o.pass) ++passed;
    std::printf("[%2d] %s  %s: %s (%.1fs)\n", c.id, o.pass ? "PASS" : "FAIL",
                c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d passed\n", passed, ran);
  return passed == ran ? 0 : 1;
}
