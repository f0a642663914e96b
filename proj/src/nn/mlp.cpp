#include "brdfnqm/nn/mlp.hpp"

#include <cmath>
#include <numbers>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/rng.hpp"

namespace brdfnqm::nn {

namespace {

template <typename T>
T gelu_t(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * T(std::numbers::sqrt2 / 2.0)));
}

template <typename T>
T gelu_grad_t(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x * T(std::numbers::sqrt2 / 2.0)));
  const T pdf = std::exp(T(-0.5) * x * x) * T(0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
  return cdf + x * pdf;
}

template <typename T>
T sigmoid_t(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

std::size_t Architecture::parameter_count() const {
  std::size_t total = 0;
  for (std::size_t c : layer_parameter_counts()) total += c;
  return total;
}

std::vector<std::size_t> Architecture::layer_parameter_counts() const {
  std::vector<std::size_t> out;
  std::size_t in = static_cast<std::size_t>(input_dim);
  for (int h : hidden) {
    const auto width = static_cast<std::size_t>(h);
    out.push_back(in * width + width);
    out.push_back(2 * width);
    in = width;
  }
  out.push_back(in + 1);
  return out;
}

template <typename T>
std::size_t MlpParams<T>::count() const {
  std::size_t n = 0;
  for_each_block([&n](const auto& b, bool) { n += static_cast<std::size_t>(b.size()); });
  return n;
}

template <typename T>
MlpParams<T> MlpParams<T>::zeros_like() const {
  MlpParams<T> z = *this;
  z.for_each_block([](auto& b, bool) { b.setZero(); });
  return z;
}

template <typename T>
template <typename U>
MlpParams<U> MlpParams<T>::cast() const {
  MlpParams<U> out;
  for (const auto& h : hidden) {
    out.hidden.push_back({h.weight.template cast<U>(), h.bias.template cast<U>(), h.gamma.template cast<U>(),
                          h.beta.template cast<U>()});
  }
  out.out_weight = out_weight.template cast<U>();
  out.out_bias = out_bias.template cast<U>();
  return out;
}

template <typename T>
template <typename U>
Mlp<U> Mlp<T>::cast() const {
  Mlp<U> out;
  out.arch = arch;
  out.params = params.template cast<U>();
  out.jod_min = jod_min;
  out.jod_max = jod_max;
  out.whitening = whitening;
  out.seed = seed;
  out.version = version;
  return out;
}

MlpModel init_model(std::uint64_t seed, double jod_min, double jod_max, const WhiteningStats& whitening,
                    const Architecture& arch) {
  if (!(jod_min < jod_max)) throw ParameterError("jod_min must be below jod_max");
  if (arch.input_dim <= 0 || arch.hidden.empty()) throw ParameterError("architecture needs inputs and hidden layers");

  MlpModel m;
  m.arch = arch;
  m.jod_min = jod_min;
  m.jod_max = jod_max;
  m.whitening = whitening;
  m.seed = seed;

  std::uint64_t key = 0;
  auto fill_uniform = [&](Matrix<float>& w, int fan_in) {
    const double bound = std::sqrt(1.0 / fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = static_cast<float>((2.0 * counter_uniform(seed, key++) - 1.0) * bound);
    }
  };

  int in = arch.input_dim;
  for (int width : arch.hidden) {
    if (width <= 0) throw ParameterError("hidden widths must be positive");
    HiddenLayer<float> layer;
    layer.weight.resize(width, in);
    fill_uniform(layer.weight, in);
    layer.bias = RowVector<float>::Zero(width);
    layer.gamma = RowVector<float>::Ones(width);
    layer.beta = RowVector<float>::Zero(width);
    m.params.hidden.push_back(std::move(layer));
    in = width;
  }
  m.params.out_weight.resize(1, in);
  fill_uniform(m.params.out_weight, in);
  m.params.out_bias = RowVector<float>::Zero(1);
  return m;
}

double gelu(double x) { return gelu_t(x); }
double gelu_grad(double x) { return gelu_grad_t(x); }

template <typename T>
Matrix<T> forward(const Mlp<T>& model, const Matrix<T>& batch, Mode mode, std::mt19937_64* rng,
                  std::type_identity_t<ForwardCache<T>>* cache,
                  const std::type_identity_t<DropoutMasks<T>>* fixed_masks) {
  const auto& p = model.params;
  if (batch.cols() != model.arch.input_dim) {
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                     std::to_string(model.arch.input_dim));
  }
  const bool train = mode == Mode::Train && model.arch.dropout > 0.0;
  if (train && !fixed_masks && !rng) throw UsageError("train-mode forward needs an RNG or fixed dropout masks");
  if (fixed_masks && fixed_masks->size() != p.hidden.size()) throw ShapeError("one dropout mask per hidden layer");

  const Eigen::Index rows = batch.rows();
  const T eps = static_cast<T>(model.arch.layernorm_eps);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - model.arch.dropout));

  if (cache) {
    cache->layers.assign(p.hidden.size(), {});
    cache->valid = false;
  }

  Matrix<T> x = batch;
  for (std::size_t l = 0; l < p.hidden.size(); ++l) {
    const auto& layer = p.hidden[l];
    Matrix<T> z(rows, layer.weight.rows());
    z.noalias() = x * layer.weight.transpose();
    z.rowwise() += layer.bias;

    const auto width = static_cast<T>(z.cols());
    Eigen::Matrix<T, Eigen::Dynamic, 1> mean = z.rowwise().sum() / width;
    z.colwise() -= mean;
    Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std =
        ((z.array().square().rowwise().sum() / width) + eps).rsqrt().matrix();
    z = inv_std.asDiagonal() * z;  // z now holds the normalized activations

    Matrix<T> y = (z.array().rowwise() * layer.gamma.array()).rowwise() + layer.beta.array();
    Matrix<T> a = y.unaryExpr([](T v) { return gelu_t(v); });

    Matrix<T> mask;
    if (train) {
      if (fixed_masks) {
        mask = (*fixed_masks)[l];
        if (mask.rows() != rows || mask.cols() != a.cols()) throw ShapeError("dropout mask shape mismatch");
      } else {
        mask.resize(rows, a.cols());
        const double p_drop = model.arch.dropout;
        for (Eigen::Index i = 0; i < mask.size(); ++i) {
          const double u = static_cast<double>((*rng)() >> 11) * 0x1.0p-53;
          mask.data()[i] = u < p_drop ? T(0) : keep_scale;
        }
      }
      a.array() *= mask.array();
    }

    if (cache) {
      auto& lc = cache->layers[l];
      lc.input = std::move(x);
      lc.normalized = std::move(z);
      lc.inv_std = std::move(inv_std);
      lc.post_norm = std::move(y);
      lc.mask = std::move(mask);
    }
    x = std::move(a);
  }

  Matrix<T> logits(rows, 1);
  logits.noalias() = x * p.out_weight.transpose();
  logits.array() += p.out_bias(0);
  Matrix<T> s = logits.unaryExpr([](T v) { return sigmoid_t(v); });
  const T lo = static_cast<T>(model.jod_min);
  const T range = static_cast<T>(model.jod_max - model.jod_min);
  Matrix<T> pred = (s.array() * range + lo).matrix();

  if (cache) {
    cache->last_hidden = std::move(x);
    cache->sigmoid = std::move(s);
    cache->version = model.version;
    cache->valid = true;
  }
  return pred;
}

template <typename T>
MlpParams<T> backward(const Mlp<T>& model, const ForwardCache<T>& cache, const Matrix<T>& loss_grad) {
  if (!cache.valid) throw UsageError("backward called without a forward cache");
  if (cache.version != model.version) throw UsageError("forward cache is stale: model was updated since");
  const auto& p = model.params;
  if (loss_grad.rows() != cache.sigmoid.rows() || loss_grad.cols() != 1) throw ShapeError("loss gradient shape");

  MlpParams<T> g;
  g.hidden.resize(p.hidden.size());
  const T range = static_cast<T>(model.jod_max - model.jod_min);

  Matrix<T> dlogit = (loss_grad.array() * cache.sigmoid.array() * (T(1) - cache.sigmoid.array()) * range).matrix();
  g.out_weight.noalias() = dlogit.transpose() * cache.last_hidden;
  g.out_bias = dlogit.colwise().sum();
  Matrix<T> dx(dlogit.rows(), p.out_weight.cols());
  dx.noalias() = dlogit * p.out_weight;

  for (std::size_t li = p.hidden.size(); li-- > 0;) {
    const auto& layer = p.hidden[li];
    const auto& lc = cache.layers[li];
    if (lc.mask.size() > 0) dx.array() *= lc.mask.array();

    Matrix<T> dy = (dx.array() * lc.post_norm.unaryExpr([](T v) { return gelu_grad_t(v); }).array()).matrix();
    g.hidden[li].gamma = (dy.array() * lc.normalized.array()).colwise().sum().matrix();
    g.hidden[li].beta = dy.colwise().sum();

    Matrix<T> dxhat = (dy.array().rowwise() * layer.gamma.array()).matrix();
    const auto width = static_cast<T>(dxhat.cols());
    const Eigen::Matrix<T, Eigen::Dynamic, 1> sum_dxhat = dxhat.rowwise().sum();
    const Eigen::Matrix<T, Eigen::Dynamic, 1> sum_dxhat_xhat = (dxhat.array() * lc.normalized.array()).rowwise().sum();
    Matrix<T> dz = ((dxhat.array() * width).colwise() - sum_dxhat.array()).matrix();
    dz.array() -= lc.normalized.array().colwise() * sum_dxhat_xhat.array();
    dz = (lc.inv_std.array() / width).matrix().asDiagonal() * dz;

    g.hidden[li].weight.noalias() = dz.transpose() * lc.input;
    g.hidden[li].bias = dz.colwise().sum();
    if (li > 0) {
      Matrix<T> next(dz.rows(), layer.weight.cols());
      next.noalias() = dz * layer.weight;
      dx = std::move(next);
    }
  }
  return g;
}

double logcosh(double d) {
  const double a = std::abs(d);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

template <typename T>
LossResult<T> logcosh_loss(const Matrix<T>& pred, const Matrix<T>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw ShapeError("prediction/target shape");
  LossResult<T> out;
  out.grad.resize(pred.rows(), pred.cols());
  const double n = static_cast<double>(pred.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred.data()[i]) - static_cast<double>(target.data()[i]);
    sum += logcosh(d);
    out.grad.data()[i] = static_cast<T>(std::tanh(d) / n);
  }
  out.loss = n > 0 ? sum / n : 0.0;
  return out;
}

template struct MlpParams<float>;
template struct MlpParams<double>;
template MlpParams<double> MlpParams<float>::cast<double>() const;
template MlpParams<float> MlpParams<double>::cast<float>() const;
template Mlp<double> Mlp<float>::cast<double>() const;
template Mlp<float> Mlp<double>::cast<float>() const;

template Matrix<float> forward(const Mlp<float>&, const Matrix<float>&, Mode, std::mt19937_64*, ForwardCache<float>*,
                               const DropoutMasks<float>*);
template Matrix<double> forward(const Mlp<double>&, const Matrix<double>&, Mode, std::mt19937_64*,
                                ForwardCache<double>*, const DropoutMasks<double>*);
template MlpParams<float> backward(const Mlp<float>&, const ForwardCache<float>&, const Matrix<float>&);
template MlpParams<double> backward(const Mlp<double>&, const ForwardCache<double>&, const Matrix<double>&);
template LossResult<float> logcosh_loss(const Matrix<float>&, const Matrix<float>&);
template LossResult<double> logcosh_loss(const Matrix<double>&, const Matrix<double>&);

}  // namespace brdfnqm::nn
