#include "rosa/shaping/potential.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace rosa::shaping {

PotentialNet::PotentialNet(std::vector<int> dims, uint64_t seed)
    : seed_(seed), dims_(dims) {
  if (dims.size() < 2) throw UsageError("PotentialNet: need [d, ..., m] dims");
  auto rng = make_rng(seed, 0x706f74ull);
  net_ = Mlp(std::move(dims), rng);
}

double PotentialNet::phi(const Vec& s, int a2) const {
  if (s.size() != input_dim())
    throw UsageError("phi: observation dimension mismatch");
  if (a2 < 0 || a2 > m()) throw UsageError("phi: shaper action out of range");
  if (a2 == 0) return 0.0;
  return net_.forward(s)[a2 - 1];
}

void PotentialNet::save(const std::string& bin_path,
                        const std::string& json_path) const {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw RuntimeFault("PotentialNet::save: cannot open " + bin_path);
  net_.save_blob(bin);
  nlohmann::json j;
  j["dims"] = dims_;
  j["seed"] = seed_;
  j["dtype"] = "f64";
  j["blob"] = bin_path;
  j["weights_hash"] = weights_hash();
  std::ofstream js(json_path);
  if (!js) throw RuntimeFault("PotentialNet::save: cannot open " + json_path);
  js << j.dump(2) << "\n";
}

PotentialNet PotentialNet::load(const std::string& json_path) {
  std::ifstream js(json_path);
  if (!js) throw RuntimeFault("PotentialNet::load: cannot open " + json_path);
  nlohmann::json j;
  js >> j;
  PotentialNet net(j.at("dims").get<std::vector<int>>(),
                   j.at("seed").get<uint64_t>());
  std::ifstream bin(j.at("blob").get<std::string>(), std::ios::binary);
  if (!bin) throw RuntimeFault("PotentialNet::load: missing weight blob");
  net.net_.load_blob(bin);
  if (j.contains("weights_hash") &&
      j["weights_hash"].get<uint64_t>() != net.weights_hash())
    throw RuntimeFault("PotentialNet::load: weight hash mismatch");
  return net;
}

double shaping_reward(const PotentialNet& net, const Vec& s, int a2,
                      const Vec& s_next, int a2_next, double gamma,
                      Direction direction, bool next_terminal) {
  if (gamma <= 0.0 || gamma >= 1.0)
    throw UsageError("shaping_reward: gamma must be in (0, 1)");
  const double phi_now = net.phi(s, a2);
  const double phi_next = next_terminal ? 0.0 : net.phi(s_next, a2_next);
  switch (direction) {
    case Direction::kForward:
      return gamma * phi_next - phi_now;
    case Direction::kBackward:
      return phi_next - phi_now / gamma;
  }
  throw UsageError("shaping_reward: bad direction");
}

SegmentSum segment_shaping_sum(std::span<const SegmentStep> segment,
                               const PotentialNet& net, double gamma) {
  if (segment.size() < 2)
    throw UsageError("segment_shaping_sum: segment needs at least two steps");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw UsageError("segment_shaping_sum: gamma must be in (0, 1)");
  for (size_t i = 1; i < segment.size(); ++i)
    if (segment[i].t != segment[i - 1].t + 1)
      throw UsageError("segment_shaping_sum: non-consecutive time indices");
  for (size_t i = 0; i + 1 < segment.size(); ++i)
    if (!segment[i].on)
      throw UsageError("segment_shaping_sum: interior step not flagged on");

  SegmentSum out;
  out.boundary_null = segment.front().a2 == 0 && segment.back().a2 == 0;
  double sum = 0.0;
  for (size_t i = 0; i + 1 < segment.size(); ++i) {
    const auto& cur = segment[i];
    const auto& nxt = segment[i + 1];
    const double f = shaping_reward(net, cur.s, cur.a2, nxt.s, nxt.a2, gamma,
                                    Direction::kForward);
    sum += std::pow(gamma, cur.t) * f;
  }
  out.sum = sum;
  out.expected_residual =
      std::pow(gamma, segment.back().t) *
          net.phi(segment.back().s, segment.back().a2) -
      std::pow(gamma, segment.front().t) *
          net.phi(segment.front().s, segment.front().a2);
  return out;
}

}  // namespace rosa::shaping
