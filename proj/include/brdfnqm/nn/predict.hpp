#pragma once

#include <span>
#include <vector>

#include "brdfnqm/nn/train.hpp"
#include "brdfnqm/preprocess.hpp"

namespace brdfnqm::nn {

// clamp -> perceptual transform -> whiten, then reference rows followed by
// distorted rows, each flattened row-major. One row of 6K floats.
Tensor2 pair_features(const SampledBrdf& ref, const SampledBrdf& dist, const WhiteningStats& whitening);

// Features and JOD targets for labelled pairs. Throws ParameterError for an
// unlabelled pair.
Dataset build_dataset(std::span<const LabeledPair> pairs, const WhiteningStats& whitening);

// Eval-mode prediction with the model's embedded whitening.
double predict_jod(const MlpModel& model, const SampledBrdf& ref, const SampledBrdf& dist);
std::vector<double> predict_pairs(const MlpModel& model, std::span<const LabeledPair> pairs,
                                  std::size_t batch_size = 512);

}  // namespace brdfnqm::nn
