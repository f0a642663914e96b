// brdfnqm: command-line driver for the sampling, labelling, training and
// evaluation pipeline. Exit codes: 0 success, 1 runtime/data error, 2 usage.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "brdfnqm/baselines.hpp"
#include "brdfnqm/errors.hpp"
#include "brdfnqm/eval.hpp"
#include "brdfnqm/jod.hpp"
#include "brdfnqm/nn/checkpoint.hpp"
#include "brdfnqm/nn/predict.hpp"
#include "brdfnqm/pairs.hpp"
#include "brdfnqm/parallel.hpp"
#include "brdfnqm/synth.hpp"
#include "brdfnqm/table.hpp"

namespace fs = std::filesystem;
using namespace brdfnqm;

namespace {

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

// ---- gen-synthetic --------------------------------------------------------

struct GenArgs {
  std::size_t n = 1;
  std::vector<std::string> levels;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

void cmd_gen_synthetic(const GenArgs& a) {
  std::vector<DistortionSpec> levels;
  for (const auto& l : a.levels) {
    try {
      levels.push_back(parse_distortion_spec(l));
    } catch (const Error& e) {
      throw UsageError("invalid level '" + l + "': " + e.what());
    }
  }
  const fs::path dir(a.out);
  ensure_dir(dir);

  TextTable manifest;
  manifest.kind = "dataset";
  manifest.set_meta("materials", std::to_string(a.n));
  manifest.set_meta("seed", std::to_string(a.seed));
  manifest.columns = {"pair_id", "material", "reference", "distorted", "level", "distortion", "severity", "seed"};
  std::string last_ref;
  for_each_synthetic_pair(
      a.n, levels, a.seed,
      [&](SyntheticPair&& p) {
        const std::string ref_file = p.material + ".binary";
        if (ref_file != last_ref) {
          save_merl(*p.reference, dir / ref_file);
          last_ref = ref_file;
        }
        const std::string dist_file = p.distorted.name() + ".binary";
        save_merl(p.distorted, dir / dist_file);
        manifest.rows.push_back({p.distorted.name(), p.material, ref_file, dist_file, std::to_string(p.level),
                                 format_distortion_spec(p.spec), fmt_double(p.severity),
                                 std::to_string(p.spec.seed)});
      },
      a.threads);
  write_table(manifest, dir / "manifest.tsv");
  std::cout << manifest.rows.size() << " pairs written to " << dir.string() << "\n";
}

// ---- sample ---------------------------------------------------------------

struct SampleArgs {
  std::string manifest;
  std::size_t k = kDefaultSampleCount;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<int> grid{32, 16, 16};
  int strata = 10;
  std::string magnitude = "luminance";
  int threads = 1;
};

void cmd_sample(const SampleArgs& a) {
  if (a.grid.size() != 3) throw UsageError("--grid takes three counts");
  const fs::path manifest_path(a.manifest);
  const TextTable m = read_table(manifest_path, "dataset");
  const fs::path base = manifest_path.parent_path();

  SelectionConfig sel;
  sel.k = a.k;
  sel.strata = a.strata;
  if (a.magnitude == "luminance") {
    sel.magnitude = MagnitudeMode::Luminance;
  } else if (a.magnitude == "max") {
    sel.magnitude = MagnitudeMode::MaxChannel;
  } else {
    throw UsageError("--magnitude must be 'luminance' or 'max'");
  }
  const auto candidates = filter_grazing(build_candidate_grid(a.grid[0], a.grid[1], a.grid[2]));

  // Group rows by reference so each reference is loaded and selected once.
  std::map<std::string, std::vector<std::size_t>> by_ref;
  std::vector<std::string> ref_order;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const std::string& ref = m.cell(r, "reference");
    if (!by_ref.count(ref)) ref_order.push_back(ref);
    by_ref[ref].push_back(r);
  }

  std::vector<LabeledPair> pairs(m.rows.size());
  const bool has_severity = m.has_column("severity");
  auto load_checked = [&](const std::string& file, std::size_t row) {
    try {
      return load_merl(base / file);
    } catch (const IoError& e) {
      throw IoError("pair " + m.cell(row, "pair_id") + ": " + e.what());
    }
  };
  parallel_for(ref_order.size(), a.threads, [&](std::size_t g) {
    const auto& rows = by_ref.at(ref_order[g]);
    const TabulatedBrdf ref = load_checked(ref_order[g], rows.front());
    auto dirs = std::make_shared<DirectionSet>(select_samples(ref, candidates, a.seed, sel));
    const SampledBrdf ref_samples = sample_brdf(ref, dirs);
    for (std::size_t r : rows) {
      const TabulatedBrdf dist = load_checked(m.cell(r, "distorted"), r);
      LabeledPair& p = pairs[r];
      p.id = m.cell(r, "pair_id");
      p.material = m.cell(r, "material");
      p.ref = ref_samples;
      p.dist = sample_brdf(dist, dirs);
      if (has_severity) p.severity = parse_double(m.cell(r, "severity"));
    }
  });
  const fs::path out(a.out);
  ensure_parent(out);
  save_pairs(pairs, out);
  std::cout << pairs.size() << " sampled pairs (k=" << a.k << ") written to " << out.string() << "\n";
}

// ---- fit-jod --------------------------------------------------------------

struct FitArgs {
  std::string calibration;
  std::string out;
  std::vector<double> init{kReferenceJodParams.b1, kReferenceJodParams.b2, kReferenceJodParams.b3};
};

void cmd_fit_jod(const FitArgs& a) {
  if (a.init.size() != 3) throw UsageError("--init takes three values b1,b2,b3");
  const auto points = load_calibration(a.calibration);
  if (points.size() < 3) throw UsageError("calibration needs at least 3 rows, got " + std::to_string(points.size()));
  const JodFit fit = fit_jod_regression(points, {a.init[0], a.init[1], a.init[2]});
  ensure_parent(a.out);
  save_jod_params(fit.params, a.out);
  std::printf("b1 %.9g b2 %.9g b3 %.9g  cost %.6g after %d iterations (%s)\n", fit.params.b1, fit.params.b2,
              fit.params.b3, fit.cost, fit.iterations, std::string(to_string(fit.termination)).c_str());
}

// ---- label ----------------------------------------------------------------

struct LabelArgs {
  std::string pairs;
  std::string out;
  std::string deitp;
  std::string params;
  bool oracle = false;
};

void cmd_label(const LabelArgs& a) {
  if (a.oracle == !a.deitp.empty()) throw UsageError("use exactly one of --oracle or --deitp");
  auto pairs = load_pairs(a.pairs);
  if (a.oracle) {
    for (auto& p : pairs) {
      p.jod = severity_oracle_label(p);
      p.provenance = Provenance::SyntheticOracle;
    }
  } else {
    const JodRegressionParams params = a.params.empty() ? kReferenceJodParams : load_jod_params(a.params);
    const TextTable t = read_table(a.deitp, "deitp");
    std::vector<std::pair<std::string, double>> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      rows.emplace_back(t.cell(r, "pair_id"), parse_double(t.cell(r, "deitp")));
    }
    std::map<std::string, double> jod;
    for (const auto& l : label_dataset(rows, params)) jod[l.pair_id] = l.jod;
    for (auto& p : pairs) {
      const auto it = jod.find(p.id);
      if (it == jod.end()) throw FormatError("no delta E value for pair " + p.id);
      p.jod = it->second;
      p.provenance = Provenance::PseudoDeitp;
    }
  }
  ensure_parent(a.out);
  save_pairs(pairs, a.out);
  std::cout << pairs.size() << " pairs labelled\n";
}

// ---- split ----------------------------------------------------------------

struct SplitArgs {
  std::string pairs;
  std::string out;
  std::string test_materials;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

void cmd_split(const SplitArgs& a) {
  const TextTable t = read_table(a.pairs, "pairs");
  std::vector<PairKey> keys;
  for (std::size_t r = 0; r < t.rows.size(); ++r) keys.push_back({t.cell(r, "pair_id"), t.cell(r, "material")});
  const SplitManifest s = make_splits(keys, split_list(a.test_materials), a.seed, a.train_fraction);
  ensure_parent(a.out);
  save_split(s, a.out);
  std::cout << "train " << s.train.size() << " / val " << s.val.size() << " / test " << s.test.size() << "\n";
}

// ---- augment --------------------------------------------------------------

struct AugmentArgs {
  std::string pairs;
  std::string out;
  std::string mode;
  std::uint64_t seed = 0;
  double sigma = 0.01;
  double lo = 0.95;
  double hi = 1.05;
  int bins = 10;
  double sigma_max_scale = 1.0;
  std::size_t max_new = 100000;
  std::string labeler = "auto";
  std::string split;
  std::string split_out;
};

Labeler make_labeler(const std::string& kind, std::span<const LabeledPair> pool) {
  bool all_severity = !pool.empty();
  for (const auto& p : pool) all_severity = all_severity && !std::isnan(p.severity);
  if (kind == "oracle" || (kind == "auto" && all_severity)) return severity_oracle_label;
  if (kind == "isotonic" || kind == "auto") {
    return [iso = IsotonicLabeler::fit_on_pool(pool)](const LabeledPair& p) { return iso(p); };
  }
  throw UsageError("--labeler must be auto, oracle or isotonic");
}

void cmd_augment(const AugmentArgs& a) {
  auto pairs = load_pairs(a.pairs);
  std::optional<SplitManifest> split;
  std::set<std::string> targets;
  if (!a.split.empty()) {
    split = load_split(a.split);
    targets.insert(split->train.begin(), split->train.end());
  } else {
    for (const auto& p : pairs) targets.insert(p.id);
  }
  std::vector<LabeledPair> sources;
  for (const auto& p : pairs) {
    if (targets.count(p.id)) sources.push_back(p);
  }

  std::vector<LabeledPair> children;
  if (a.mode == "noise") {
    const Labeler labeler = make_labeler(a.labeler, sources);
    for (const auto& p : sources) {
      LabeledPair c = augment_noise(p, a.sigma, a.seed, labeler);
      c.id = p.id + "~n";
      children.push_back(std::move(c));
    }
  } else if (a.mode == "scale") {
    for (const auto& p : sources) {
      LabeledPair c = augment_scale(p, a.lo, a.hi, a.seed);
      c.id = p.id + "~s";
      children.push_back(std::move(c));
    }
  } else if (a.mode == "balance") {
    HistogramSpec spec;
    spec.bins = a.bins;
    spec.sigma = a.sigma;
    spec.sigma_max_scale = a.sigma_max_scale;
    spec.max_new = a.max_new;
    children = balance_by_jod(sources, spec, a.seed, make_labeler(a.labeler, sources));
  } else {
    throw UsageError("--mode must be noise, scale or balance");
  }

  for (auto& c : children) {
    if (targets.count(c.id)) throw ParameterError("augmented id collides with an existing pair: " + c.id);
    if (split) split->train.push_back(c.id);
  }
  pairs.insert(pairs.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));

  // Earlier augmentation rounds stay in the header; this one is appended.
  std::vector<std::pair<std::string, std::string>> meta;
  int round = 0;
  for (const auto& [k, v] : read_table(a.pairs, "pairs").meta) {
    if (k.rfind("augment", 0) == 0) {
      meta.emplace_back(k, v);
      if (k.find(".mode") != std::string::npos) ++round;
    }
  }
  const std::string key = "augment" + std::to_string(round);
  std::ostringstream params;
  params << "seed=" << a.seed << " sources=" << sources.size() << " added=" << children.size();
  if (a.mode == "scale") {
    params << " lo=" << fmt_double(a.lo) << " hi=" << fmt_double(a.hi);
  } else {
    params << " sigma=" << fmt_double(a.sigma) << " labeler=" << a.labeler;
  }
  if (a.mode == "balance") params << " bins=" << a.bins << " sigma_max_scale=" << fmt_double(a.sigma_max_scale);
  meta.emplace_back(key + ".mode", a.mode);
  meta.emplace_back(key + ".params", params.str());
  ensure_parent(a.out);
  save_pairs(pairs, a.out, meta);
  if (split) {
    if (a.split_out.empty()) throw UsageError("--split needs --split-out for the extended manifest");
    ensure_parent(a.split_out);
    save_split(*split, a.split_out);
  }
  std::cout << children.size() << " augmented pairs added (" << sources.size() << " sources, " << pairs.size()
            << " total)\n";
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string pairs;
  std::string split;
  std::string out;
  std::string history;
  std::uint64_t seed = 0;
  nn::TrainConfig cfg;
  bool no_scheduler = false;
};

std::vector<LabeledPair> select_ids(const std::vector<LabeledPair>& pool, const std::vector<std::string>& ids) {
  std::map<std::string, const LabeledPair*> by_id;
  for (const auto& p : pool) by_id[p.id] = &p;
  std::vector<LabeledPair> out;
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw FormatError("split refers to unknown pair " + id);
    out.push_back(*it->second);
  }
  return out;
}

void cmd_train(TrainArgs a) {
  const auto pool = load_pairs(a.pairs);
  const SplitManifest split = load_split(a.split);
  const auto train = select_ids(pool, split.train);
  const auto val = select_ids(pool, split.val);
  if (train.empty()) throw ParameterError("the split has no training pairs");

  std::vector<SampledBrdf> refs;
  for (const auto& p : train) {
    if (p.provenance != Provenance::AugmentedScale) refs.push_back(p.ref);
  }
  if (refs.empty()) {
    for (const auto& p : train) refs.push_back(p.ref);
  }
  const WhiteningStats w = compute_whitening(refs, false);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* set : {&train, &val}) {
    for (const auto& p : *set) {
      if (std::isnan(p.jod)) throw ParameterError("pair " + p.id + " has no label");
      lo = std::min(lo, p.jod);
      hi = std::max(hi, p.jod);
    }
  }
  nn::Architecture arch;
  arch.input_dim = static_cast<int>(2 * train.front().ref.values.size());
  arch.dropout = a.cfg.dropout;
  nn::MlpModel model = nn::init_model(a.seed, lo, hi, w, arch);
  std::cout << "parameters: " << model.params.count() << "\n";

  a.cfg.shuffle_seed = a.seed;
  a.cfg.reduce_on_plateau = !a.no_scheduler;
  const nn::Dataset dtrain = nn::build_dataset(train, w);
  const nn::Dataset dval = nn::build_dataset(val, w);
  const auto t0 = std::chrono::steady_clock::now();
  const nn::TrainResult result = nn::train(model, dtrain, dval, a.cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ensure_parent(a.out);
  nn::save_checkpoint(model, a.out);
  if (!a.history.empty()) {
    ensure_parent(a.history);
    nn::save_history(result, a.history);
  }
  std::printf("trained %d epochs in %.1f s; best epoch %d, loss %.6g\n", a.cfg.epochs, secs, result.best_epoch,
              result.best_loss);
}

// ---- predict --------------------------------------------------------------

struct PredictArgs {
  std::string checkpoint;
  std::string pairs;
  std::string ref;
  std::string dist;
  std::string out;
  std::string split;
  std::string set;
};

std::vector<LabeledPair> restrict_to_set(std::vector<LabeledPair> pairs, const std::string& split_path,
                                         const std::string& set) {
  if (split_path.empty()) {
    if (!set.empty()) throw UsageError("--set needs --split");
    return pairs;
  }
  const SplitManifest s = load_split(split_path);
  const std::vector<std::string>* ids = nullptr;
  if (set == "train") {
    ids = &s.train;
  } else if (set == "val") {
    ids = &s.val;
  } else if (set == "test" || set.empty()) {
    ids = &s.test;
  } else {
    throw UsageError("--set must be train, val or test");
  }
  return select_ids(pairs, *ids);
}

void cmd_predict(const PredictArgs& a) {
  const nn::MlpModel model = nn::load_checkpoint(a.checkpoint);
  if (!a.ref.empty() || !a.dist.empty()) {
    if (a.ref.empty() || a.dist.empty() || !a.pairs.empty()) {
      throw UsageError("single-pair mode takes --ref and --dist (and no --pairs)");
    }
    const SampledBrdf ref = load_samples(a.ref);
    const SampledBrdf dist = load_samples(a.dist);
    const double jod = nn::predict_jod(model, ref, dist);
    std::printf("%s\n", fmt_double(jod).c_str());
    if (!a.out.empty()) {
      TextTable t;
      t.kind = "predictions";
      t.columns = {"pair_id", "material", "predicted_jod"};
      t.rows.push_back({fs::path(a.dist).stem().string(), ref.directions->source_material, fmt_double(jod)});
      ensure_parent(a.out);
      write_table(t, a.out);
    }
    return;
  }
  if (a.pairs.empty()) throw UsageError("give --pairs, or --ref and --dist");
  const auto pairs = restrict_to_set(load_pairs(a.pairs), a.split, a.set);
  const auto pred = nn::predict_pairs(model, pairs);
  TextTable t;
  t.kind = "predictions";
  t.columns = {"pair_id", "material", "predicted_jod"};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    t.rows.push_back({pairs[i].id, pairs[i].material, fmt_double(pred[i])});
  }
  if (a.out.empty()) {
    std::cout << format_table(t);
  } else {
    ensure_parent(a.out);
    write_table(t, a.out);
    std::cout << pairs.size() << " predictions written to " << a.out << "\n";
  }
}

// ---- eval-baselines -------------------------------------------------------

struct BaselineArgs {
  std::string pairs;
  std::string out;
  std::string weight = "product";
  std::string split;
  std::string set;
  int threads = 1;
};

void cmd_eval_baselines(const BaselineArgs& a) {
  CosineWeight weight = CosineWeight::Product;
  if (a.weight == "incoming") {
    weight = CosineWeight::IncomingOnly;
  } else if (a.weight != "product") {
    throw UsageError("--weight must be product or incoming");
  }
  const auto pairs = restrict_to_set(load_pairs(a.pairs), a.split, a.set);
  TextTable t;
  t.kind = "baseline-scores";
  t.set_meta("weight", a.weight);
  t.columns = {"pair_id", "material", "jod"};
  for (MetricKind k : kAllMetrics) t.columns.emplace_back(to_string(k));
  t.rows.resize(pairs.size());
  parallel_for(pairs.size(), a.threads, [&](std::size_t i) {
    const auto& p = pairs[i];
    std::vector<std::string> row{p.id, p.material, fmt_double(p.jod)};
    for (MetricKind k : kAllMetrics) row.push_back(fmt_double(baseline_metric(k, p.ref, p.dist, weight)));
    t.rows[i] = std::move(row);
  });
  ensure_parent(a.out);
  write_table(t, a.out);
  std::cout << pairs.size() << " pairs scored with " << kAllMetrics.size() << " metrics\n";
}

// ---- correlate ------------------------------------------------------------

struct CorrelateArgs {
  std::string scores;
  std::string predictions;
  std::string name = "BRDF-NQM";
  std::string out;
  std::string format = "table";
};

void cmd_correlate(const CorrelateArgs& a) {
  const TextTable s = read_table(a.scores, "baseline-scores");
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < s.rows.size(); ++r) row_of[s.cell(r, "pair_id")] = r;

  std::vector<NamedReport> reports;
  for (MetricKind k : kAllMetrics) {
    const std::string name(to_string(k));
    std::vector<ScoredPair> scored;
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
      scored.push_back({s.cell(r, "pair_id"), s.cell(r, "material"), parse_double(s.cell(r, name)),
                        parse_double(s.cell(r, "jod"))});
    }
    reports.push_back({name, correlate_per_material(scored, Orientation::Negative)});
  }
  if (!a.predictions.empty()) {
    const TextTable p = read_table(a.predictions, "predictions");
    std::vector<ScoredPair> scored;
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
      const auto it = row_of.find(p.cell(r, "pair_id"));
      if (it == row_of.end()) throw FormatError("prediction for unscored pair " + p.cell(r, "pair_id"));
      scored.push_back({p.cell(r, "pair_id"), p.cell(r, "material"), parse_double(p.cell(r, "predicted_jod")),
                        parse_double(s.cell(it->second, "jod"))});
    }
    reports.push_back({a.name, correlate_per_material(scored, Orientation::Positive)});
  }
  ReportFormat format = ReportFormat::Table;
  if (a.format == "plot") {
    format = ReportFormat::PlotData;
  } else if (a.format != "table") {
    throw UsageError("--format must be table or plot");
  }
  if (a.out.empty()) {
    std::cout << format_report(reports, format);
  } else {
    ensure_parent(a.out);
    emit_report(reports, format, a.out);
    std::cout << format_report(reports, ReportFormat::PlotData);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BRDF perceptual quality toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-synthetic", "Generate analytic reference BRDFs and distorted variants");
  c_gen->add_option("--n", gen.n, "Number of reference materials")->required()->check(CLI::PositiveNumber);
  c_gen->add_option("--level", gen.levels, "Distortion level Kind:magnitude[:seed] (repeatable)")->required();
  c_gen->add_option("--seed", gen.seed, "Material seed");
  c_gen->add_option("--out", gen.out, "Output directory")->required();
  c_gen->add_option("--threads", gen.threads, "Worker threads")->check(CLI::PositiveNumber);

  SampleArgs smp;
  auto* c_smp = app.add_subcommand("sample", "Select directions per reference and sample every pair");
  c_smp->add_option("--manifest", smp.manifest, "Dataset manifest")->required();
  c_smp->add_option("--k", smp.k, "Samples per BRDF")->check(CLI::PositiveNumber);
  c_smp->add_option("--seed", smp.seed, "Selection seed (recorded)");
  c_smp->add_option("--out", smp.out, "Output pair table")->required();
  c_smp->add_option("--grid", smp.grid, "Candidate grid theta_h,theta_d,phi_d")->delimiter(',');
  c_smp->add_option("--strata", smp.strata, "Magnitude strata")->check(CLI::PositiveNumber);
  c_smp->add_option("--magnitude", smp.magnitude, "luminance or max");
  c_smp->add_option("--threads", smp.threads, "Worker threads")->check(CLI::PositiveNumber);

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit-jod", "Fit the delta E -> JOD regression to calibration data");
  c_fit->add_option("--calibration", fit.calibration, "Calibration table (deitp, jod)")->required();
  c_fit->add_option("--out", fit.out, "Output parameter file")->required();
  c_fit->add_option("--init", fit.init, "Initial b1,b2,b3")->delimiter(',');

  LabelArgs lab;
  auto* c_lab = app.add_subcommand("label", "Attach JOD labels to a pair table");
  c_lab->add_option("--pairs", lab.pairs, "Input pair table")->required();
  c_lab->add_option("--out", lab.out, "Output pair table")->required();
  c_lab->add_option("--deitp", lab.deitp, "Table of (pair_id, deitp)");
  c_lab->add_option("--params", lab.params, "Regression parameter file (default: reference values)");
  c_lab->add_flag("--oracle", lab.oracle, "Label synthetic pairs from their severity");

  SplitArgs spl;
  auto* c_spl = app.add_subcommand("split", "Split a pair table into train/val/test");
  c_spl->add_option("--pairs", spl.pairs, "Pair table")->required();
  c_spl->add_option("--out", spl.out, "Output split manifest")->required();
  c_spl->add_option("--test-materials", spl.test_materials, "Comma-separated held-out materials");
  c_spl->add_option("--seed", spl.seed, "Shuffle seed");
  c_spl->add_option("--train-fraction", spl.train_fraction, "Training fraction of the non-test pool")
      ->check(CLI::Range(0.0, 1.0));

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "Noise, scale or histogram-balancing augmentation");
  c_aug->add_option("--pairs", aug.pairs, "Input pair table")->required();
  c_aug->add_option("--out", aug.out, "Output pair table (input plus new pairs)")->required();
  c_aug->add_option("--mode", aug.mode, "noise, scale or balance")->required();
  c_aug->add_option("--seed", aug.seed, "Augmentation seed");
  c_aug->add_option("--sigma", aug.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  c_aug->add_option("--lo", aug.lo, "Lower scale factor");
  c_aug->add_option("--hi", aug.hi, "Upper scale factor");
  c_aug->add_option("--bins", aug.bins, "Histogram bins over [0, 10]")->check(CLI::PositiveNumber);
  c_aug->add_option("--sigma-max-scale", aug.sigma_max_scale, "Balancing noise multiplier range [1, s]");
  c_aug->add_option("--max-new", aug.max_new, "Cap on generated pairs");
  c_aug->add_option("--labeler", aug.labeler, "auto, oracle or isotonic");
  c_aug->add_option("--split", aug.split, "Only augment the training pairs of this split");
  c_aug->add_option("--split-out", aug.split_out, "Split manifest extended with the new pairs");

  TrainArgs trn;
  auto* c_trn = app.add_subcommand("train", "Train the quality network");
  c_trn->add_option("--pairs", trn.pairs, "Labelled pair table")->required();
  c_trn->add_option("--split", trn.split, "Split manifest")->required();
  c_trn->add_option("--out", trn.out, "Output checkpoint")->required();
  c_trn->add_option("--history", trn.history, "Training history table");
  c_trn->add_option("--seed", trn.seed, "Initialization, shuffle and dropout seed");
  c_trn->add_option("--epochs", trn.cfg.epochs)->check(CLI::PositiveNumber);
  c_trn->add_option("--batch-size", trn.cfg.batch_size)->check(CLI::PositiveNumber);
  c_trn->add_option("--lr-input", trn.cfg.lr_input)->check(CLI::PositiveNumber);
  c_trn->add_option("--lr-deep", trn.cfg.lr_deep)->check(CLI::PositiveNumber);
  c_trn->add_option("--weight-decay", trn.cfg.weight_decay)->check(CLI::NonNegativeNumber);
  c_trn->add_option("--dropout", trn.cfg.dropout)->check(CLI::Range(0.0, 0.99));
  c_trn->add_option("--patience", trn.cfg.scheduler.patience)->check(CLI::NonNegativeNumber);
  c_trn->add_option("--factor", trn.cfg.scheduler.factor)->check(CLI::Range(0.0, 1.0));
  c_trn->add_option("--min-lr", trn.cfg.scheduler.min_lr)->check(CLI::NonNegativeNumber);
  c_trn->add_flag("--no-scheduler", trn.no_scheduler, "Keep learning rates constant");
  c_trn->add_flag("!--last-epoch", trn.cfg.keep_best, "Keep last-epoch instead of best-validation weights");

  PredictArgs prd;
  auto* c_prd = app.add_subcommand("predict", "Predict JOD for sampled pairs");
  c_prd->add_option("--checkpoint", prd.checkpoint, "Model checkpoint")->required();
  c_prd->add_option("--pairs", prd.pairs, "Pair table");
  c_prd->add_option("--ref", prd.ref, "Reference sample file (single-pair mode)");
  c_prd->add_option("--dist", prd.dist, "Distorted sample file (single-pair mode)");
  c_prd->add_option("--split", prd.split, "Split manifest");
  c_prd->add_option("--set", prd.set, "train, val or test (default test)");
  c_prd->add_option("--out", prd.out, "Output predictions table");

  BaselineArgs bas;
  auto* c_bas = app.add_subcommand("eval-baselines", "Score pairs with the eight baseline metrics");
  c_bas->add_option("--pairs", bas.pairs, "Pair table")->required();
  c_bas->add_option("--out", bas.out, "Output score table")->required();
  c_bas->add_option("--weight", bas.weight, "Cosine weight: product or incoming");
  c_bas->add_option("--split", bas.split, "Split manifest");
  c_bas->add_option("--set", bas.set, "train, val or test (default test)");
  c_bas->add_option("--threads", bas.threads, "Worker threads")->check(CLI::PositiveNumber);

  CorrelateArgs cor;
  auto* c_cor = app.add_subcommand("correlate", "Per-material Spearman report for baselines and predictions");
  c_cor->add_option("--scores", cor.scores, "Baseline score table (carries the JOD labels)")->required();
  c_cor->add_option("--predictions", cor.predictions, "Network predictions table");
  c_cor->add_option("--name", cor.name, "Row name for the predictions");
  c_cor->add_option("--out", cor.out, "Output report");
  c_cor->add_option("--format", cor.format, "table or plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_gen->parsed()) cmd_gen_synthetic(gen);
    if (c_smp->parsed()) cmd_sample(smp);
    if (c_fit->parsed()) cmd_fit_jod(fit);
    if (c_lab->parsed()) cmd_label(lab);
    if (c_spl->parsed()) cmd_split(spl);
    if (c_aug->parsed()) cmd_augment(aug);
    if (c_trn->parsed()) cmd_train(trn);
    if (c_prd->parsed()) cmd_predict(prd);
    if (c_bas->parsed()) cmd_eval_baselines(bas);
    if (c_cor->parsed()) cmd_correlate(cor);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
