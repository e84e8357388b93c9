#include <cmath>

#include "rosa/novelty/rnd.hpp"

namespace rosa::novelty {

double CountTable::bonus(long state) const {
  const long n = count(state);
  if (n >= cap_m_) return 0.0;
  return beta_ / std::sqrt(static_cast<double>(n + 1));
}

void CountTable::visit(long state) { ++counts_[state]; }

long CountTable::count(long state) const {
  auto it = counts_.find(state);
  return it == counts_.end() ? 0 : it->second;
}

double count_bonus(const CountTable& table, long state) {
  return table.bonus(state);
}

}  // namespace rosa::novelty
