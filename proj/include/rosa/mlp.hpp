#pragma once

#include <iosfwd>
#include <random>
#include <vector>

#include "rosa/common.hpp"

namespace rosa {

/// Fully connected net with ReLU hidden layers and a linear output layer.
/// Samples are matrix columns. Backward accumulates into the grad buffers;
/// adam_step consumes and clears them.
class Mlp {
 public:
  Mlp() = default;
  /// dims = [in, hidden..., out]. out_scale shrinks the output layer init
  /// (useful for policy logits so initial action distributions stay near
  /// uniform).
  Mlp(std::vector<int> dims, std::mt19937_64& rng, double out_scale = 1.0);

  int in_dim() const { return dims_.front(); }
  int out_dim() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  size_t n_layers() const { return W_.size(); }

  Vec forward(const Vec& x) const;
  Mat forward(const Mat& X) const;

  struct Cache {
    Mat x0;
    std::vector<Mat> z;  // pre-activations per layer
  };
  Mat forward_cached(const Mat& X, Cache& cache) const;
  /// dY = dLoss/dOutput for the columns passed to forward_cached.
  void backward(const Cache& cache, const Mat& dY);

  void zero_grad();
  double grad_norm() const;
  /// Scales gradients so their global L2 norm is at most max_norm.
  void clip_grad_norm(double max_norm);
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);

  /// Hash over all weights, for frozen-parameter assertions.
  uint64_t weights_hash() const;

  /// Flat little-endian doubles, layer order W0,b0,W1,b1,...
  void save_blob(std::ostream& out) const;
  void load_blob(std::istream& in);
  size_t parameter_count() const;

  const std::vector<Mat>& weights() const { return W_; }
  const std::vector<Vec>& biases() const { return b_; }
  const std::vector<Mat>& weight_grads() const { return gW_; }
  const std::vector<Vec>& bias_grads() const { return gb_; }

 private:
  std::vector<int> dims_;
  std::vector<Mat> W_;
  std::vector<Vec> b_;
  std::vector<Mat> gW_;
  std::vector<Vec> gb_;
  // Adam state
  std::vector<Mat> mW_, vW_;
  std::vector<Vec> mb_, vb_;
  long adam_t_ = 0;
};

}  // namespace rosa
