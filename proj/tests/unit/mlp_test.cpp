#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "rosa/common.hpp"
#include "rosa/mlp.hpp"

using rosa::Mat;
using rosa::Mlp;
using rosa::Vec;
using rosa::make_rng;

namespace {

std::vector<double> blob_doubles(const Mlp& net) {
  std::stringstream ss;
  net.save_blob(ss);
  const std::string raw = ss.str();
  std::vector<double> out(raw.size() / sizeof(double));
  std::memcpy(out.data(), raw.data(), out.size() * sizeof(double));
  return out;
}

Mlp with_blob(const Mlp& like, const std::vector<double>& params) {
  auto rng = make_rng(0, 0);
  Mlp net(like.dims(), rng);
  std::stringstream ss;
  ss.write(reinterpret_cast<const char*>(params.data()),
           static_cast<std::streamsize>(params.size() * sizeof(double)));
  net.load_blob(ss);
  return net;
}

double batch_loss(const Mlp& net, const Mat& X, const Mat& T) {
  const Mat Y = net.forward(X);
  return 0.5 * (Y - T).squaredNorm();
}

// Flattens the accumulated gradients in blob order (W0, b0, W1, b1, ...).
std::vector<double> flat_grads(const Mlp& net) {
  std::vector<double> g;
  for (size_t l = 0; l < net.n_layers(); ++l) {
    const Mat& gw = net.weight_grads()[l];
    for (int c = 0; c < gw.cols(); ++c)
      for (int r = 0; r < gw.rows(); ++r) g.push_back(gw(r, c));
    const Vec& gb = net.bias_grads()[l];
    for (int r = 0; r < gb.size(); ++r) g.push_back(gb(r));
  }
  return g;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("backward matches finite differences") {
  auto rng = make_rng(7, 0x6d6c70);
  Mlp net({3, 5, 2}, rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat X(3, 4), T(2, 4);
  for (int c = 0; c < 4; ++c) {
    for (int r = 0; r < 3; ++r) X(r, c) = gauss(rng);
    for (int r = 0; r < 2; ++r) T(r, c) = gauss(rng);
  }

  Mlp::Cache cache;
  const Mat Y = net.forward_cached(X, cache);
  net.zero_grad();
  net.backward(cache, Y - T);
  const std::vector<double> analytic = flat_grads(net);

  const std::vector<double> theta = blob_doubles(net);
  REQUIRE(theta.size() == analytic.size());
  const double eps = 1e-6;
  // Spot check a spread of parameters across all layers.
  for (size_t k = 0; k < theta.size(); k += 3) {
    std::vector<double> up = theta, dn = theta;
    up[k] += eps;
    dn[k] -= eps;
    const double fd = (batch_loss(with_blob(net, up), X, T) -
                       batch_loss(with_blob(net, dn), X, T)) /
                      (2 * eps);
    CHECK(analytic[k] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("adam fits a linear target") {
  auto rng = make_rng(3, 0x6d6c70);
  Mlp net({2, 16, 1}, rng);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat X(2, 32), T(1, 32);
  for (int c = 0; c < 32; ++c) {
    X(0, c) = unif(rng);
    X(1, c) = unif(rng);
    T(0, c) = X(0, c) + 2.0 * X(1, c);
  }
  const double before = batch_loss(net, X, T);
  for (int it = 0; it < 500; ++it) {
    Mlp::Cache cache;
    const Mat Y = net.forward_cached(X, cache);
    net.zero_grad();
    net.backward(cache, (Y - T) / 32.0);
    net.adam_step(1e-2);
  }
  const double after = batch_loss(net, X, T);
  CHECK(after < before / 10.0);
}

TEST_CASE("same seed gives identical weights, different seed differs") {
  auto rng_a = make_rng(11, 0x6d6c70);
  auto rng_b = make_rng(11, 0x6d6c70);
  auto rng_c = make_rng(12, 0x6d6c70);
  Mlp a({4, 8, 3}, rng_a), b({4, 8, 3}, rng_b), c({4, 8, 3}, rng_c);
  CHECK(a.weights_hash() == b.weights_hash());
  CHECK(a.weights_hash() != c.weights_hash());
  Vec x(4);
  x << 0.3, -0.2, 0.9, 0.0;
  CHECK((a.forward(x) - b.forward(x)).norm() == 0.0);
}

TEST_CASE("save and load round trip") {
  auto rng = make_rng(5, 0x6d6c70);
  Mlp net({3, 6, 2}, rng);
  std::stringstream ss;
  net.save_blob(ss);
  auto rng2 = make_rng(99, 0x6d6c70);
  Mlp other({3, 6, 2}, rng2);
  REQUIRE(other.weights_hash() != net.weights_hash());
  other.load_blob(ss);
  CHECK(other.weights_hash() == net.weights_hash());
  Vec x(3);
  x << 1.0, -0.5, 0.25;
  CHECK((other.forward(x) - net.forward(x)).norm() == 0.0);
  CHECK(other.parameter_count() == net.parameter_count());
}

TEST_CASE("gradient clipping bounds the global norm") {
  auto rng = make_rng(2, 0x6d6c70);
  Mlp net({2, 4, 2}, rng);
  Mat X(2, 8), dY(2, 8);
  X.setConstant(1.0);
  dY.setConstant(100.0);
  Mlp::Cache cache;
  net.forward_cached(X, cache);
  net.zero_grad();
  net.backward(cache, dY);
  REQUIRE(net.grad_norm() > 1.0);
  net.clip_grad_norm(1.0);
  CHECK(net.grad_norm() <= 1.0 + 1e-9);

  // Clipping below the current norm must leave small gradients untouched.
  net.zero_grad();
  Mat tiny = dY * 1e-8;
  Mlp::Cache cache2;
  net.forward_cached(X, cache2);
  net.backward(cache2, tiny);
  const double norm_before = net.grad_norm();
  net.clip_grad_norm(1.0);
  CHECK(net.grad_norm() == doctest::Approx(norm_before));
}

TEST_CASE("output scale shrinks only the last layer") {
  auto rng_a = make_rng(21, 0x6d6c70);
  auto rng_b = make_rng(21, 0x6d6c70);
  Mlp wide({3, 8, 4}, rng_a, 1.0);
  Mlp shrunk({3, 8, 4}, rng_b, 0.01);
  CHECK((wide.weights()[0] - shrunk.weights()[0]).norm() == 0.0);
  CHECK(shrunk.weights()[1].norm() < wide.weights()[1].norm());
  CHECK(shrunk.weights()[1].norm() > 0.0);
}

}  // TEST_SUITE
