#pragma once

// Quality network: [Dense -> LayerNorm -> GELU -> Dropout] x N -> Dense ->
// sigmoid rescaled to [jod_min, jod_max]. Templated on the scalar so a float64
// shadow of the float32 model can be used for gradient checks.

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <type_traits>
#include <utility>
#include <vector>

#include "brdfnqm/preprocess.hpp"

namespace brdfnqm::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// Dense row-major float32 matrix used for batches and weights.
using Tensor2 = Matrix<float>;

struct Architecture {
  int input_dim = 3000;
  std::vector<int> hidden{1024, 716, 501};
  double dropout = 0.2;
  double layernorm_eps = 1e-5;

  std::size_t parameter_count() const;
  // Per-block counts in storage order: dense, layernorm, ..., final dense.
  std::vector<std::size_t> layer_parameter_counts() const;
  bool operator==(const Architecture&) const = default;
};

inline const Architecture kDefaultArchitecture{};

template <typename T>
struct HiddenLayer {
  Matrix<T> weight;  // out x in
  RowVector<T> bias;
  RowVector<T> gamma;
  RowVector<T> beta;
};

template <typename T>
struct MlpParams {
  std::vector<HiddenLayer<T>> hidden;
  Matrix<T> out_weight;  // 1 x last hidden
  RowVector<T> out_bias;

  // Visits every parameter block in storage order (w, b, gamma, beta per
  // hidden layer, then the output w, b). `fn(block, is_input_dense)`.
  template <typename Fn>
  void for_each_block(Fn&& fn) {
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      fn(hidden[l].weight, l == 0);
      fn(hidden[l].bias, l == 0);
      fn(hidden[l].gamma, false);
      fn(hidden[l].beta, false);
    }
    fn(out_weight, false);
    fn(out_bias, false);
  }
  template <typename Fn>
  void for_each_block(Fn&& fn) const {
    const_cast<MlpParams*>(this)->for_each_block([&](auto& block, bool input) { fn(std::as_const(block), input); });
  }

  std::size_t count() const;
  MlpParams zeros_like() const;
  template <typename U>
  MlpParams<U> cast() const;
};

template <typename T>
struct Mlp {
  Architecture arch;
  MlpParams<T> params;
  double jod_min = 0.0;
  double jod_max = 10.0;
  WhiteningStats whitening;
  std::uint64_t seed = 0;
  // Bumped on every optimizer update; caches remember the version they saw.
  std::uint64_t version = 0;

  template <typename U>
  Mlp<U> cast() const;
};

using MlpModel = Mlp<float>;

// Fan-in uniform weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases,
// unit gamma, zero beta. Deterministic in `seed`.
MlpModel init_model(std::uint64_t seed, double jod_min, double jod_max, const WhiteningStats& whitening,
                    const Architecture& arch = kDefaultArchitecture);

// Exact GELU x * Phi(x) and its derivative.
double gelu(double x);
double gelu_grad(double x);

enum class Mode { Train, Eval };

template <typename T>
struct LayerCache {
  Matrix<T> input;
  Matrix<T> normalized;
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std;  // one per row
  Matrix<T> post_norm;
  Matrix<T> mask;  // empty in eval mode; otherwise 0 or 1/(1-p)
};

template <typename T>
struct ForwardCache {
  std::vector<LayerCache<T>> layers;
  Matrix<T> last_hidden;
  Matrix<T> sigmoid;
  std::uint64_t version = 0;
  bool valid = false;
};

// Dropout masks per hidden layer, each batch x width. Supplying them makes a
// train-mode forward deterministic (used by gradient checks).
template <typename T>
using DropoutMasks = std::vector<Matrix<T>>;

// batch: B x input_dim. Returns B x 1 predictions. In train mode masks are
// drawn from `rng` unless `fixed_masks` is given.
template <typename T>
Matrix<T> forward(const Mlp<T>& model, const Matrix<T>& batch, Mode mode, std::mt19937_64* rng = nullptr,
                  std::type_identity_t<ForwardCache<T>>* cache = nullptr,
                  const std::type_identity_t<DropoutMasks<T>>* fixed_masks = nullptr);

// Gradients of the loss with respect to every parameter, given dL/dpred.
// Throws UsageError when the cache is missing or older than the model.
template <typename T>
MlpParams<T> backward(const Mlp<T>& model, const ForwardCache<T>& cache, const Matrix<T>& loss_grad);

template <typename T>
struct LossResult {
  double loss = 0.0;
  Matrix<T> grad;  // B x 1
};

// Mean log(cosh(pred - target)) in the overflow-safe form
// |d| + log1p(exp(-2|d|)) - log 2; gradient tanh(d) / B.
template <typename T>
LossResult<T> logcosh_loss(const Matrix<T>& pred, const Matrix<T>& target);

double logcosh(double d);

}  // namespace brdfnqm::nn
