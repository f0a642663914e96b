#pragma once

// Checkpoint container: a text header terminated by an "END" line, followed by
// little-endian float32 parameter blobs in MlpParams::for_each_block order.
//
//   BRDFNQM-CHECKPOINT 1
//   input_dim 3000
//   hidden 1024 716 501
//   ...
//   END

#include <cstddef>
#include <filesystem>

#include "brdfnqm/nn/mlp.hpp"

namespace brdfnqm::nn {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointInfo {
  Architecture arch;
  double jod_min = 0.0;
  double jod_max = 0.0;
  WhiteningStats whitening;
  std::uint64_t seed = 0;
  std::size_t param_count = 0;
  std::size_t payload_bytes = 0;
};

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
// Throws CheckpointError on any header, version, shape or size problem; never
// returns a partially filled model.
MlpModel load_checkpoint(const std::filesystem::path& path);
// Header only.
CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

}  // namespace brdfnqm::nn
