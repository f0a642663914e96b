#include "brdfnqm/pairs.hpp"

#include <map>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/table.hpp"

namespace brdfnqm {

namespace fs = std::filesystem;

void save_pairs(std::span<const LabeledPair> pairs, const fs::path& table_path,
                const std::vector<std::pair<std::string, std::string>>& meta) {
  const fs::path base = table_path.parent_path();
  const std::string sample_dir = table_path.stem().string() + "_samples";
  std::error_code ec;
  fs::create_directories(base / sample_dir, ec);
  if (ec) throw IoError("cannot create " + (base / sample_dir).string() + ": " + ec.message());

  TextTable t;
  t.kind = "pairs";
  t.set_meta("count", std::to_string(pairs.size()));
  for (const auto& [k, v] : meta) {
    if (k == "count") continue;
    t.set_meta(k, v);
  }
  t.columns = {"pair_id", "material", "reference", "distorted", "jod", "provenance", "severity"};
  for (const auto& p : pairs) {
    if (p.id.empty() || p.id.find_first_of("/\\\t\n") != std::string::npos) {
      throw ParameterError("pair id '" + p.id + "' cannot be used as a file name");
    }
    const std::string ref = sample_dir + "/" + p.id + ".ref.tsv";
    const std::string dist = sample_dir + "/" + p.id + ".dist.tsv";
    save_samples(p.ref, base / ref);
    save_samples(p.dist, base / dist);
    t.rows.push_back({p.id, p.material, ref, dist, fmt_double(p.jod), std::string(to_string(p.provenance)),
                      fmt_double(p.severity)});
  }
  write_table(t, table_path);
}

std::vector<LabeledPair> load_pairs(const fs::path& table_path) {
  const TextTable t = read_table(table_path, "pairs");
  const fs::path base = table_path.parent_path();
  std::vector<LabeledPair> out;
  out.reserve(t.rows.size());
  std::map<std::string, std::size_t> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    LabeledPair p;
    p.id = t.cell(r, "pair_id");
    if (!seen.emplace(p.id, r).second) throw FormatError(table_path.string() + ": duplicate pair id " + p.id);
    p.material = t.cell(r, "material");
    p.jod = parse_double(t.cell(r, "jod"));
    p.provenance = parse_provenance(t.cell(r, "provenance"));
    p.severity = parse_double(t.cell(r, "severity"));
    try {
      p.ref = load_samples(base / t.cell(r, "reference"));
      p.dist = load_samples(base / t.cell(r, "distorted"));
    } catch (const IoError& e) {
      throw IoError("pair " + p.id + ": " + e.what());
    }
    require_paired(p.ref, p.dist);
    p.dist.directions = p.ref.directions;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace brdfnqm
