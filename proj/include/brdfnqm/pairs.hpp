#pragma once

// Pair tables: one row per labelled pair, pointing at the reference and
// distorted sample files (paths relative to the table).

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "brdfnqm/preprocess.hpp"

namespace brdfnqm {

// Writes every pair's samples to `<table stem>_samples/<id>.{ref,dist}.tsv`
// next to the table, then the table itself. `meta` lands in the table header
// after the pair count (augmentation parameters, for instance).
void save_pairs(std::span<const LabeledPair> pairs, const std::filesystem::path& table_path,
                const std::vector<std::pair<std::string, std::string>>& meta = {});

// Reference and distorted members of a pair share one DirectionSet object
// after loading; a pair whose files disagree on directions is a PairingError.
std::vector<LabeledPair> load_pairs(const std::filesystem::path& table_path);

}  // namespace brdfnqm
