#include "brdfnqm/nn/predict.hpp"

#include <cmath>

#include "brdfnqm/errors.hpp"

namespace brdfnqm::nn {

namespace {

void write_features(const SampledBrdf& ref, const SampledBrdf& dist, const WhiteningStats& whitening, float* row) {
  require_paired(ref, dist);
  std::size_t o = 0;
  for (const SampledBrdf* s : {&ref, &dist}) {
    const SampledBrdf w = whiten(transform_samples(*s), whitening);
    for (double v : w.values) row[o++] = static_cast<float>(v);
  }
}

void check_width(const MlpModel& model, const SampledBrdf& ref) {
  if (static_cast<long long>(ref.values.size()) * 2 != model.arch.input_dim) {
    throw ShapeError("pair has " + std::to_string(ref.rows()) + " samples, model expects " +
                     std::to_string(model.arch.input_dim / 6));
  }
}

}  // namespace

Tensor2 pair_features(const SampledBrdf& ref, const SampledBrdf& dist, const WhiteningStats& whitening) {
  Tensor2 row(1, static_cast<Eigen::Index>(2 * ref.values.size()));
  write_features(ref, dist, whitening, row.data());
  return row;
}

Dataset build_dataset(std::span<const LabeledPair> pairs, const WhiteningStats& whitening) {
  Dataset d;
  if (pairs.empty()) return d;
  const auto width = static_cast<Eigen::Index>(2 * pairs.front().ref.values.size());
  d.features.resize(static_cast<Eigen::Index>(pairs.size()), width);
  d.targets.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!std::isfinite(p.jod)) throw ParameterError("pair " + p.id + " has no label");
    if (static_cast<Eigen::Index>(2 * p.ref.values.size()) != width) {
      throw ShapeError("pair " + p.id + " has a different sample count");
    }
    write_features(p.ref, p.dist, whitening, d.features.row(static_cast<Eigen::Index>(i)).data());
    d.targets.push_back(static_cast<float>(p.jod));
  }
  return d;
}

double predict_jod(const MlpModel& model, const SampledBrdf& ref, const SampledBrdf& dist) {
  require_paired(ref, dist);
  check_width(model, ref);
  const Tensor2 x = pair_features(ref, dist, model.whitening);
  return static_cast<double>(forward(model, x, Mode::Eval)(0, 0));
}

std::vector<double> predict_pairs(const MlpModel& model, std::span<const LabeledPair> pairs, std::size_t batch_size) {
  std::vector<double> out;
  if (pairs.empty()) return out;
  Tensor2 x(static_cast<Eigen::Index>(pairs.size()), model.arch.input_dim);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    check_width(model, pairs[i].ref);
    write_features(pairs[i].ref, pairs[i].dist, model.whitening, x.row(static_cast<Eigen::Index>(i)).data());
  }
  for (float v : predict_rows(model, x, batch_size)) out.push_back(v);
  return out;
}

}  // namespace brdfnqm::nn
