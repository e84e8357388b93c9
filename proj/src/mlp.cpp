#include "rosa/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace rosa {

Mlp::Mlp(std::vector<int> dims, std::mt19937_64& rng, double out_scale)
    : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw UsageError("Mlp needs at least [in, out] dims");
  for (int d : dims_)
    if (d <= 0) throw UsageError("Mlp dims must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const size_t L = dims_.size() - 1;
  W_.resize(L);
  b_.resize(L);
  for (size_t l = 0; l < L; ++l) {
    const int fan_in = dims_[l], fan_out = dims_[l + 1];
    double std = std::sqrt(2.0 / fan_in);
    if (l == L - 1) std *= out_scale;
    W_[l] = Mat(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) W_[l](i, j) = std * gauss(rng);
    b_[l] = Vec::Zero(fan_out);
  }
  zero_grad();
}

Vec Mlp::forward(const Vec& x) const {
  return forward(Mat(x)).col(0);
}

Mat Mlp::forward(const Mat& X) const {
  if (X.rows() != in_dim()) throw UsageError("Mlp::forward: bad input dim");
  Mat a = X;
  for (size_t l = 0; l < W_.size(); ++l) {
    Mat z = (W_[l] * a).colwise() + b_[l];
    a = (l + 1 < W_.size()) ? z.cwiseMax(0.0) : z;
  }
  return a;
}

Mat Mlp::forward_cached(const Mat& X, Cache& cache) const {
  if (X.rows() != in_dim()) throw UsageError("Mlp::forward: bad input dim");
  cache.x0 = X;
  cache.z.assign(W_.size(), Mat());
  Mat a = X;
  for (size_t l = 0; l < W_.size(); ++l) {
    cache.z[l] = (W_[l] * a).colwise() + b_[l];
    a = (l + 1 < W_.size()) ? cache.z[l].cwiseMax(0.0) : cache.z[l];
  }
  return a;
}

void Mlp::backward(const Cache& cache, const Mat& dY) {
  const size_t L = W_.size();
  Mat dZ = dY;
  for (size_t li = L; li-- > 0;) {
    if (li + 1 < L) {
      // dZ currently holds dA for this layer's ReLU output.
      dZ = dZ.cwiseProduct(
          (cache.z[li].array() > 0.0).cast<double>().matrix());
    }
    const Mat& a_prev = (li == 0) ? cache.x0 : Mat(cache.z[li - 1].cwiseMax(0.0));
    gW_[li] += dZ * a_prev.transpose();
    gb_[li] += dZ.rowwise().sum();
    if (li > 0) dZ = W_[li].transpose() * dZ;
  }
}

void Mlp::zero_grad() {
  gW_.resize(W_.size());
  gb_.resize(b_.size());
  for (size_t l = 0; l < W_.size(); ++l) {
    gW_[l] = Mat::Zero(W_[l].rows(), W_[l].cols());
    gb_[l] = Vec::Zero(b_[l].size());
  }
}

double Mlp::grad_norm() const {
  double sq = 0.0;
  for (size_t l = 0; l < gW_.size(); ++l)
    sq += gW_[l].squaredNorm() + gb_[l].squaredNorm();
  return std::sqrt(sq);
}

void Mlp::clip_grad_norm(double max_norm) {
  const double n = grad_norm();
  if (n > max_norm && n > 0.0) {
    const double s = max_norm / n;
    for (size_t l = 0; l < gW_.size(); ++l) {
      gW_[l] *= s;
      gb_[l] *= s;
    }
  }
}

void Mlp::adam_step(double lr, double beta1, double beta2, double eps) {
  if (mW_.empty()) {
    mW_.resize(W_.size());
    vW_.resize(W_.size());
    mb_.resize(b_.size());
    vb_.resize(b_.size());
    for (size_t l = 0; l < W_.size(); ++l) {
      mW_[l] = Mat::Zero(W_[l].rows(), W_[l].cols());
      vW_[l] = Mat::Zero(W_[l].rows(), W_[l].cols());
      mb_[l] = Vec::Zero(b_[l].size());
      vb_[l] = Vec::Zero(b_[l].size());
    }
  }
  ++adam_t_;
  const double bc1 = 1.0 - std::pow(beta1, adam_t_);
  const double bc2 = 1.0 - std::pow(beta2, adam_t_);
  for (size_t l = 0; l < W_.size(); ++l) {
    mW_[l] = beta1 * mW_[l] + (1.0 - beta1) * gW_[l];
    vW_[l] = beta2 * vW_[l] + (1.0 - beta2) * gW_[l].cwiseProduct(gW_[l]);
    mb_[l] = beta1 * mb_[l] + (1.0 - beta1) * gb_[l];
    vb_[l] = beta2 * vb_[l] + (1.0 - beta2) * gb_[l].cwiseProduct(gb_[l]);
    W_[l] -= lr * (mW_[l] / bc1)
                 .cwiseQuotient(((vW_[l] / bc2).cwiseSqrt().array() + eps)
                                    .matrix());
    b_[l] -= lr * (mb_[l] / bc1)
                 .cwiseQuotient(((vb_[l] / bc2).cwiseSqrt().array() + eps)
                                    .matrix());
  }
  zero_grad();
}

uint64_t Mlp::weights_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t l = 0; l < W_.size(); ++l) {
    h = fnv1a64(W_[l].data(), sizeof(double) * W_[l].size(), h);
    h = fnv1a64(b_[l].data(), sizeof(double) * b_[l].size(), h);
  }
  return h;
}

void Mlp::save_blob(std::ostream& out) const {
  for (size_t l = 0; l < W_.size(); ++l) {
    out.write(reinterpret_cast<const char*>(W_[l].data()),
              sizeof(double) * W_[l].size());
    out.write(reinterpret_cast<const char*>(b_[l].data()),
              sizeof(double) * b_[l].size());
  }
}

void Mlp::load_blob(std::istream& in) {
  for (size_t l = 0; l < W_.size(); ++l) {
    in.read(reinterpret_cast<char*>(W_[l].data()),
            sizeof(double) * W_[l].size());
    in.read(reinterpret_cast<char*>(b_[l].data()),
            sizeof(double) * b_[l].size());
  }
  if (!in) throw RuntimeFault("Mlp::load_blob: truncated weight blob");
}

size_t Mlp::parameter_count() const {
  size_t n = 0;
  for (size_t l = 0; l < W_.size(); ++l)
    n += static_cast<size_t>(W_[l].size()) + static_cast<size_t>(b_[l].size());
  return n;
}

}  // namespace rosa
