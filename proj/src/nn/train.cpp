#include "brdfnqm/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/rng.hpp"
#include "brdfnqm/table.hpp"

namespace brdfnqm::nn {

namespace {

template <typename T>
struct BlockRef {
  T* data;
  Eigen::Index size;
  bool input;
};

template <typename T>
std::vector<BlockRef<T>> blocks_of(MlpParams<T>& p) {
  std::vector<BlockRef<T>> out;
  p.for_each_block([&out](auto& b, bool input) { out.push_back({b.data(), b.size(), input}); });
  return out;
}

template <typename T>
std::vector<BlockRef<const T>> blocks_of(const MlpParams<T>& p) {
  std::vector<BlockRef<const T>> out;
  p.for_each_block([&out](const auto& b, bool input) { out.push_back({b.data(), b.size(), input}); });
  return out;
}

Tensor2 gather_rows(const Tensor2& src, const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
  Tensor2 out(static_cast<Eigen::Index>(end - begin), src.cols());
  for (std::size_t i = begin; i < end; ++i) out.row(static_cast<Eigen::Index>(i - begin)) = src.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Tensor2 gather_targets(const std::vector<float>& src, const std::vector<std::size_t>& idx, std::size_t begin,
                       std::size_t end) {
  Tensor2 out(static_cast<Eigen::Index>(end - begin), 1);
  for (std::size_t i = begin; i < end; ++i) out(static_cast<Eigen::Index>(i - begin), 0) = src[idx[i]];
  return out;
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const std::uint64_t s = stream_seed(seed, static_cast<std::uint64_t>(epoch));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = std::min(i - 1, static_cast<std::size_t>(counter_uniform(s, i) * static_cast<double>(i)));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

void check_dataset(const MlpModel& model, const Dataset& d, const char* what) {
  if (static_cast<std::size_t>(d.features.rows()) != d.targets.size()) {
    throw ShapeError(std::string(what) + ": feature rows and targets differ");
  }
  if (d.size() > 0 && d.features.cols() != model.arch.input_dim) {
    throw ShapeError(std::string(what) + ": feature width does not match the model");
  }
}

}  // namespace

template <typename T>
AdamState<T> make_adam_state(const Mlp<T>& model) {
  return {model.params.zeros_like(), model.params.zeros_like(), 0};
}

template <typename T>
void adam_step(Mlp<T>& model, const MlpParams<T>& grads, AdamState<T>& state, const LearningRates& lr,
               double weight_decay, const AdamConfig& cfg) {
  auto params = blocks_of(model.params);
  const auto g = blocks_of(grads);
  auto m = blocks_of(state.m);
  auto v = blocks_of(state.v);
  if (g.size() != params.size() || m.size() != params.size()) throw ShapeError("gradient/parameter block mismatch");

  ++state.step;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T wd = static_cast<T>(weight_decay);
  const T eps = static_cast<T>(cfg.eps);
  const T inv_sqrt_bias2 = static_cast<T>(1.0 / std::sqrt(bias2));

  for (std::size_t k = 0; k < params.size(); ++k) {
    if (g[k].size != params[k].size) throw ShapeError("gradient block size mismatch");
    const T step_size = static_cast<T>((params[k].input ? lr.input : lr.deep) / bias1);
    Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>> p(params[k].data, params[k].size);
    Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> gr(g[k].data, g[k].size);
    Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>> mk(m[k].data, m[k].size);
    Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>> vk(v[k].data, v[k].size);
    const Eigen::Array<T, Eigen::Dynamic, 1> grad = gr + wd * p;
    mk = b1 * mk + (T(1) - b1) * grad;
    vk = b2 * vk + (T(1) - b2) * grad.square();
    p -= step_size * mk / (vk.sqrt() * inv_sqrt_bias2 + eps);
  }
  ++model.version;
}

bool PlateauScheduler::step(double val_loss, LearningRates& lr) {
  if (val_loss < best_ * (1.0 - cfg_.threshold)) {
    best_ = val_loss;
    bad_epochs_ = 0;
    return false;
  }
  ++bad_epochs_;
  if (bad_epochs_ <= cfg_.patience) return false;
  bad_epochs_ = 0;
  const double in = std::max(lr.input * cfg_.factor, cfg_.min_lr);
  const double deep = std::max(lr.deep * cfg_.factor, cfg_.min_lr);
  const bool changed = in < lr.input || deep < lr.deep;
  lr.input = std::min(lr.input, in);
  lr.deep = std::min(lr.deep, deep);
  if (changed) ++reductions_;
  return changed;
}

std::vector<float> predict_rows(const MlpModel& model, const Tensor2& features, std::size_t batch_size) {
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  const auto n = static_cast<std::size_t>(features.rows());
  batch_size = std::max<std::size_t>(batch_size, 1);
  for (std::size_t b = 0; b < n; b += batch_size) {
    const std::size_t e = std::min(n, b + batch_size);
    const Tensor2 batch = features.middleRows(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b));
    const Tensor2 pred = forward(model, batch, Mode::Eval);
    for (Eigen::Index i = 0; i < pred.rows(); ++i) out.push_back(pred(i, 0));
  }
  return out;
}

double evaluate_loss(const MlpModel& model, const Dataset& data, std::size_t batch_size) {
  if (data.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  const auto pred = predict_rows(model, data.features, batch_size);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += logcosh(static_cast<double>(pred[i]) - static_cast<double>(data.targets[i]));
  }
  return sum / static_cast<double>(pred.size());
}

TrainResult train(MlpModel& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg) {
  if (train_set.size() == 0) throw ParameterError("training set is empty");
  if (cfg.epochs <= 0 || cfg.batch_size == 0) throw ParameterError("epochs and batch size must be positive");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw ParameterError("dropout must lie in [0, 1)");
  check_dataset(model, train_set, "training set");
  check_dataset(model, val_set, "validation set");

  model.arch.dropout = cfg.dropout;
  AdamState<float> adam = make_adam_state(model);
  LearningRates lr{cfg.lr_input, cfg.lr_deep};
  PlateauScheduler scheduler(cfg.scheduler);

  TrainResult result;
  MlpParams<float> best_params = model.params;
  const std::size_t n = train_set.size();
  const bool has_val = val_set.size() > 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto perm = epoch_permutation(n, cfg.shuffle_seed, epoch);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t b = 0; b < n; b += cfg.batch_size, ++batch_index) {
      const std::size_t e = std::min(n, b + cfg.batch_size);
      const Tensor2 x = gather_rows(train_set.features, perm, b, e);
      const Tensor2 y = gather_targets(train_set.targets, perm, b, e);
      std::mt19937_64 rng(stream_seed(stream_seed(cfg.shuffle_seed, model.seed),
                                      (static_cast<std::uint64_t>(epoch) << 32) | batch_index));
      ForwardCache<float> cache;
      const Tensor2 pred = forward(model, x, Mode::Train, &rng, &cache);
      const LossResult<float> loss = logcosh_loss(pred, y);
      const MlpParams<float> grads = backward(model, cache, loss.grad);
      adam_step(model, grads, adam, lr, cfg.weight_decay);
      loss_sum += loss.loss * static_cast<double>(e - b);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.val_loss = has_val ? evaluate_loss(model, val_set) : std::numeric_limits<double>::quiet_NaN();
    rec.lr_input = lr.input;
    rec.lr_deep = lr.deep;
    const double monitored = has_val ? rec.val_loss : rec.train_loss;
    if (monitored < result.best_loss) {
      result.best_loss = monitored;
      result.best_epoch = epoch;
      rec.best = true;
      if (cfg.keep_best) best_params = model.params;
    }
    if (cfg.reduce_on_plateau) scheduler.step(monitored, lr);
    result.history.push_back(rec);
  }
  if (cfg.keep_best) {
    model.params = std::move(best_params);
    ++model.version;
  }
  return result;
}

void save_history(const TrainResult& result, const std::filesystem::path& path) {
  TextTable t;
  t.kind = "history";
  t.set_meta("best_epoch", std::to_string(result.best_epoch));
  t.set_meta("best_loss", fmt_double(result.best_loss));
  t.columns = {"epoch", "train_loss", "val_loss", "lr_input", "lr_deep", "best"};
  for (const auto& r : result.history) {
    t.rows.push_back({std::to_string(r.epoch), fmt_double(r.train_loss), fmt_double(r.val_loss),
                      fmt_double(r.lr_input), fmt_double(r.lr_deep), r.best ? "1" : "0"});
  }
  write_table(t, path);
}

template AdamState<float> make_adam_state(const Mlp<float>&);
template AdamState<double> make_adam_state(const Mlp<double>&);
template void adam_step(Mlp<float>&, const MlpParams<float>&, AdamState<float>&, const LearningRates&, double,
                        const AdamConfig&);
template void adam_step(Mlp<double>&, const MlpParams<double>&, AdamState<double>&, const LearningRates&, double,
                        const AdamConfig&);

}  // namespace brdfnqm::nn
