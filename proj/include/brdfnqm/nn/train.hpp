#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "brdfnqm/nn/mlp.hpp"

namespace brdfnqm::nn {

struct LearningRates {
  double input = 1e-4;  // first dense layer
  double deep = 1e-3;   // everything else
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  MlpParams<T> m;
  MlpParams<T> v;
  std::uint64_t step = 0;
};

template <typename T>
AdamState<T> make_adam_state(const Mlp<T>& model);

// Bias-corrected Adam with coupled L2 decay (grad += weight_decay * param).
// The first dense layer uses lr.input, all other parameters lr.deep.
template <typename T>
void adam_step(Mlp<T>& model, const MlpParams<T>& grads, AdamState<T>& state, const LearningRates& lr,
               double weight_decay, const AdamConfig& cfg = {});

struct PlateauConfig {
  int patience = 5;
  double factor = 0.1;
  double min_lr = 1e-6;
  double threshold = 1e-4;  // relative improvement
};

// Reduce-on-plateau: after more than `patience` consecutive epochs without a
// relative improvement of `threshold`, every group LR is multiplied by
// `factor` (floored at min_lr) and the counter resets.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(PlateauConfig cfg = {}) : cfg_(cfg) {}

  // Returns true when the learning rates were reduced.
  bool step(double val_loss, LearningRates& lr);

  double best() const { return best_; }
  int bad_epochs() const { return bad_epochs_; }
  int reductions() const { return reductions_; }

 private:
  PlateauConfig cfg_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
  int reductions_ = 0;
};

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 512;
  double lr_input = 1e-4;
  double lr_deep = 1e-3;
  double weight_decay = 1e-4;
  double dropout = 0.2;
  PlateauConfig scheduler{};
  // Off keeps the learning rates constant (capacity checks).
  bool reduce_on_plateau = true;
  std::uint64_t shuffle_seed = 0;
  bool keep_best = true;
};

// Whitened features (N x input_dim) and JOD targets.
struct Dataset {
  Tensor2 features;
  std::vector<float> targets;

  std::size_t size() const { return targets.size(); }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean train-mode loss over the epoch's batches
  double val_loss = 0.0;    // eval-mode; NaN without a validation set
  double lr_input = 0.0;
  double lr_deep = 0.0;
  bool best = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_loss = std::numeric_limits<double>::infinity();
};

// Seeded per-epoch shuffles and dropout, Adam updates per minibatch, then an
// eval-mode validation pass and a scheduler step. With keep_best the weights
// of the best validation epoch (training loss when val is empty) are
// restored at the end.
TrainResult train(MlpModel& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg);

// Mean eval-mode log-cosh loss over a dataset.
double evaluate_loss(const MlpModel& model, const Dataset& data, std::size_t batch_size = 512);
std::vector<float> predict_rows(const MlpModel& model, const Tensor2& features, std::size_t batch_size = 512);

void save_history(const TrainResult& result, const std::filesystem::path& path);

}  // namespace brdfnqm::nn
