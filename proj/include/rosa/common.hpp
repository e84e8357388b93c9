#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace rosa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Caller passed arguments that violate a documented precondition.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// Internal fault at runtime (numerical blow-up, corrupt file, ...).
class RuntimeFault : public std::runtime_error {
 public:
  explicit RuntimeFault(const std::string& what) : std::runtime_error(what) {}
};

uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull);

/// Derive an independent RNG for (seed, stream). Streams keep the per-run
/// components (env, nets, rollout, ...) decoupled so seeds stay reproducible.
std::mt19937_64 make_rng(uint64_t seed, uint64_t stream);

/// Log level from the ROSA_LOG env var: 0 quiet (default), 1 info, 2 debug.
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace rosa
