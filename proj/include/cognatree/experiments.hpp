#pragma once

// End-to-end experiments:
//
//   sampling  - trees inferred on randomized synonym selections, compared to
//               the tree of the full dataset (RF) and to the gold standard (GQ)
//   encoding  - trees inferred on the bin / pbin / pmulti encodings of one
//               dataset, compared to the gold standard (GQ) and to each other (RF)
//
// All distances are computed after relabelling inferred trees with
// glottocodes and pruning every tree to the leaf set of the pruned gold
// standard.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cognatree/cognate_matrix.hpp"
#include "cognatree/dataset.hpp"
#include "cognatree/encode.hpp"
#include "cognatree/error.hpp"
#include "cognatree/hash.hpp"
#include "cognatree/inference.hpp"
#include "cognatree/parallel.hpp"
#include "cognatree/phylogeny.hpp"
#include "cognatree/sampling.hpp"
#include "cognatree/stats.hpp"
#include "cognatree/tree_distance.hpp"

namespace cognatree {

// ---------------------------------------------------------------------------
// Gold standard

struct GoldStandard {
  Phylogeny comprehensive;
  Phylogeny pruned;
  std::map<std::string, std::string> glottocode_of;   // language id -> glottocode
  std::vector<std::string> excluded;                  // "id: reason"

  std::set<std::string> leaf_set() const {
    auto v = pruned.leaf_labels();
    return {v.begin(), v.end()};
  }
};

inline GoldStandard build_gold_standard(const Phylogeny& comprehensive,
                                        const std::vector<LanguageRecord>& languages,
                                        std::size_t min_languages = 5) {
  GoldStandard g;
  g.comprehensive = comprehensive;
  const auto leaves = comprehensive.leaf_labels();
  const std::set<std::string> in_tree(leaves.begin(), leaves.end());
  std::set<std::string> keep;
  for (const auto& l : languages) {
    if (!l.glottocode) {
      g.excluded.push_back(l.id + ": no glottocode");
    } else if (!in_tree.count(*l.glottocode)) {
      g.excluded.push_back(l.id + ": glottocode " + *l.glottocode + " not in reference tree");
    } else if (keep.count(*l.glottocode)) {
      g.excluded.push_back(l.id + ": glottocode " + *l.glottocode + " already used by another language");
    } else {
      keep.insert(*l.glottocode);
      g.glottocode_of.emplace(l.id, *l.glottocode);
    }
  }
  if (keep.size() < min_languages)
    throw DataError("gold standard: only " + std::to_string(keep.size()) +
                    " languages matched the reference tree (need " + std::to_string(min_languages) + ")");
  g.pruned = prune_to(comprehensive, keep);
  if (is_star(g.pruned)) throw DataError("gold standard: pruned reference tree has a star topology");
  return g;
}

inline GoldStandard build_gold_standard(const std::string& tree_path, const CognateDataset& d,
                                        std::size_t min_languages = 5) {
  return build_gold_standard(read_newick_file(tree_path), d.languages, min_languages);
}

// Leaf labels as written to matrix files (sanitized language ids), mapped to
// glottocodes for languages that take part in the comparison.
inline std::map<std::string, std::string> taxon_to_glottocode(const CognateMatrix& m,
                                                              const GoldStandard& g) {
  std::vector<std::string> ids;
  for (const auto& l : m.languages()) ids.push_back(l.id);
  const auto labels = sanitize_labels(ids);
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = g.glottocode_of.find(ids[i]);
    if (it != g.glottocode_of.end()) out.emplace(labels[i], it->second);
  }
  return out;
}

// Relabels `tree` with glottocodes and prunes it to the gold-standard leaves.
inline Phylogeny restrict_to_gold(const Phylogeny& tree, const std::map<std::string, std::string>& mapping,
                                  const GoldStandard& g) {
  std::map<std::string, std::string> relabel;
  // Leaves that are not compared get a prefix that cannot collide with a glottocode.
  for (const auto& label : tree.leaf_labels()) {
    auto it = mapping.find(label);
    relabel.emplace(label, it != mapping.end() ? it->second : "#" + label);
  }
  const Phylogeny renamed = tree.relabeled(relabel);
  const auto keep = g.leaf_set();
  for (const auto& leaf : keep)
    if (!renamed.find_leaf(leaf)) throw DataError("inferred tree lacks gold-standard taxon " + leaf);
  return prune_to(renamed, keep);
}

inline nlohmann::json to_json(const DistanceResult& d) {
  return {{"metric", to_string(d.metric)},
          {"value", d.value},
          {"numerator", d.numerator},
          {"denominator", d.denominator}};
}

inline nlohmann::json to_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"std", s.std},
          {"max", s.max},   {"min", s.min},       {"count", s.count}};
}

inline nlohmann::json to_json(const CorrelationResult& c) {
  return {{"r", c.r}, {"p", c.p}, {"n", c.n}};
}

// Canonical fingerprint of a dataset independent of its on-disk form.
inline std::string dataset_digest(const CognateDataset& d) {
  Fnv1a h;
  for (const auto& l : d.languages) h.field(l.id).field(l.glottocode.value_or(""));
  for (const auto& c : d.concepts) h.field(c);
  for (const auto& j : d.judgments) h.field(j.language).field(j.concept_id).field(j.cognate_class);
  return h.hex();
}

// ---------------------------------------------------------------------------
// Sampling experiment

struct SamplingConfig {
  std::string dataset_name = "dataset";
  std::size_t sample_count = 100;
  std::uint64_t master_seed = 1;
  StdConvention std_convention = StdConvention::population;
  SuitabilityThresholds thresholds;
  unsigned distance_threads = default_thread_count();
};

struct SamplingReport {
  std::string dataset;
  std::size_t sample_count = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> sample_seeds;
  std::vector<DistanceResult> delta;  // RF(T_i, T_full)
  std::vector<DistanceResult> rho;    // GQ(T_i, gold)
  DistanceResult rho_full;            // GQ(T_full, gold)
  SummaryStats delta_summary;
  SummaryStats rho_summary;
  double multistate_proportion = 0.0;
  std::optional<double> difficulty;
  double alpha_full = 0.0;
  std::size_t compared_taxa = 0;
  std::vector<std::string> excluded_languages;
  nlohmann::json manifest;

  double delta_mean() const { return delta_summary.mean; }     // δ̄
  double delta_max() const { return delta_summary.max; }       // δ_max
  double rho_std() const { return rho_summary.std; }           // σ_ρ
  double rho_median() const { return rho_summary.median; }     // ρ̃
  double rho_mean() const { return rho_summary.mean; }         // ρ̄

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["experiment"] = "sampling";
    j["dataset"] = dataset;
    j["sample_count"] = sample_count;
    j["master_seed"] = master_seed;
    j["sample_seeds"] = sample_seeds;
    j["delta"] = nlohmann::json::array();
    for (const auto& d : delta) j["delta"].push_back(cognatree::to_json(d));
    j["rho"] = nlohmann::json::array();
    for (const auto& r : rho) j["rho"].push_back(cognatree::to_json(r));
    j["rho_full"] = cognatree::to_json(rho_full);
    j["delta_summary"] = cognatree::to_json(delta_summary);
    j["rho_summary"] = cognatree::to_json(rho_summary);
    j["delta_mean"] = delta_mean();
    j["delta_max"] = delta_max();
    j["rho_std"] = rho_std();
    j["rho_median"] = rho_median();
    j["rho_mean"] = rho_mean();
    j["multistate_proportion"] = multistate_proportion;
    j["difficulty"] = difficulty ? nlohmann::json(*difficulty) : nlohmann::json(nullptr);
    j["alpha_full"] = alpha_full;
    j["compared_taxa"] = compared_taxa;
    j["excluded_languages"] = excluded_languages;
    j["manifest"] = manifest;
    return j;
  }

  std::string to_tsv() const {
    std::ostringstream os;
    os.precision(17);
    os << "sample\tseed\tdelta_num\tdelta_den\tdelta\trho_num\trho_den\trho\n";
    for (std::size_t i = 0; i < delta.size(); ++i) {
      os << i << '\t' << sample_seeds[i] << '\t' << delta[i].numerator << '\t' << delta[i].denominator
         << '\t' << delta[i].value << '\t' << rho[i].numerator << '\t' << rho[i].denominator << '\t'
         << rho[i].value << '\n';
    }
    os << "full\t-\t0\t" << (delta.empty() ? 1 : delta.front().denominator) << "\t0\t"
       << rho_full.numerator << '\t' << rho_full.denominator << '\t' << rho_full.value << '\n';
    return os.str();
  }
};

namespace detail {

inline void require_suitable(const CognateMatrix& m, const GoldStandard& gold,
                             const SuitabilityThresholds& thresholds) {
  const auto report = check_suitability(m, gold.pruned, thresholds);
  if (report.accepted()) return;
  std::string msg = "dataset rejected:";
  for (const auto& r : report.reasons) msg += " " + r;
  throw DataError(msg);
}

inline std::string write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  write_text(text, path.string());
  return path.string();
}

}  // namespace detail

inline SamplingReport run_sampling_experiment(const CognateDataset& dataset, const GoldStandard& gold,
                                              EngineConfig engine, const SamplingConfig& cfg) {
  engine.validate();
  const CognateMatrix m = build_matrix(dataset);
  detail::require_suitable(m, gold, cfg.thresholds);
  const auto samples = draw_samples(m, cfg.sample_count, cfg.master_seed);

  namespace fs = std::filesystem;
  const fs::path matrix_dir = engine.work_dir / "matrices" / cfg.dataset_name;
  // Job 0 is the full matrix, job i + 1 is sample i.
  std::vector<std::string> files;
  files.push_back(detail::write_text_file(matrix_dir / (cfg.dataset_name + "_full.phy"),
                                          to_phylip(build_bin(m))));
  write_samples(samples, cfg.dataset_name, matrix_dir, cfg.master_seed);
  for (const auto& s : samples) files.push_back((matrix_dir / sample_file_name(cfg.dataset_name, s.index)).string());

  engine.work_dir = engine.work_dir / "runs";
  std::vector<InferenceResult> results(files.size());
  parallel_for(files.size(), engine.jobs, [&](std::size_t i) {
    results[i] = run_inference(files[i], Encoding::bin, 2, engine);
  });

  const auto mapping = taxon_to_glottocode(m, gold);
  const Phylogeny full = restrict_to_gold(results[0].best_tree, mapping, gold);

  SamplingReport r;
  r.dataset = cfg.dataset_name;
  r.sample_count = cfg.sample_count;
  r.master_seed = cfg.master_seed;
  r.rho_full = gq_distance(full, gold.pruned, cfg.distance_threads);
  r.alpha_full = results[0].alpha;
  r.compared_taxa = full.leaf_count();
  r.excluded_languages = gold.excluded;
  r.multistate_proportion = multistate_cell_proportion(m);
  std::vector<double> deltas, rhos;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Phylogeny t = restrict_to_gold(results[i + 1].best_tree, mapping, gold);
    r.sample_seeds.push_back(samples[i].seed);
    r.delta.push_back(rf_distance(t, full));
    r.rho.push_back(gq_distance(t, gold.pruned, cfg.distance_threads));
    deltas.push_back(r.delta.back().value);
    rhos.push_back(r.rho.back().value);
  }
  r.delta_summary = summarize(deltas, cfg.std_convention);
  r.rho_summary = summarize(rhos, cfg.std_convention);

  nlohmann::json manifest;
  manifest["dataset_digest"] = dataset_digest(dataset);
  manifest["gold_newick_digest"] = Fnv1a().update(to_newick(gold.comprehensive, false)).hex();
  manifest["engine_command"] = engine.command;
  manifest["engine_seed"] = engine.seed;
  manifest["search_count"] = engine.search_count;
  manifest["matrices"] = nlohmann::json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    manifest["matrices"].push_back({{"file", fs::path(files[i]).filename().string()},
                                    {"digest", file_digest(files[i])},
                                    {"best_search", results[i].best_search},
                                    {"log_likelihood", results[i].log_likelihood},
                                    {"alpha", results[i].alpha}});
  }
  r.manifest = std::move(manifest);
  return r;
}

// ---------------------------------------------------------------------------
// Encoding-type experiment

inline constexpr std::array<Encoding, 3> kComparedEncodings{Encoding::bin, Encoding::pbin, Encoding::pmulti};

enum class Verdict { unique, all_equal, two_way_tie };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::unique: return "unique";
    case Verdict::all_equal: return "all_equal";
    case Verdict::two_way_tie: return "two_way_tie";
  }
  return "?";
}

struct EncodingComparisonReport {
  std::string dataset;
  std::array<DistanceResult, 3> gq;            // bin, pbin, pmulti vs gold
  std::array<DistanceResult, 3> pairwise_rf;   // bin-pbin, bin-pmulti, pbin-pmulti
  std::array<double, 3> alpha{};
  std::array<double, 3> log_likelihood{};
  std::array<Heterogeneity, 3> heterogeneity{};
  Verdict verdict = Verdict::all_equal;
  std::vector<Encoding> best;                  // encodings attaining the minimum
  std::optional<double> difficulty;
  std::size_t compared_taxa = 0;
  std::vector<std::string> excluded_languages;
  nlohmann::json manifest;

  // Two-way ties are left out of best-type tallies.
  bool excluded_from_tally() const { return verdict == Verdict::two_way_tie; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["experiment"] = "encoding";
    j["dataset"] = dataset;
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string k = to_string(kComparedEncodings[i]);
      j["gq"][k] = cognatree::to_json(gq[i]);
      j["alpha"][k] = alpha[i];
      j["log_likelihood"][k] = log_likelihood[i];
      j["heterogeneity"][k] = to_string(heterogeneity[i]);
    }
    j["pairwise_rf"]["bin_pbin"] = cognatree::to_json(pairwise_rf[0]);
    j["pairwise_rf"]["bin_pmulti"] = cognatree::to_json(pairwise_rf[1]);
    j["pairwise_rf"]["pbin_pmulti"] = cognatree::to_json(pairwise_rf[2]);
    j["verdict"] = to_string(verdict);
    j["best"] = nlohmann::json::array();
    for (auto e : best) j["best"].push_back(to_string(e));
    j["excluded_from_tally"] = excluded_from_tally();
    j["difficulty"] = difficulty ? nlohmann::json(*difficulty) : nlohmann::json(nullptr);
    j["compared_taxa"] = compared_taxa;
    j["excluded_languages"] = excluded_languages;
    j["manifest"] = manifest;
    return j;
  }

  std::string to_tsv() const {
    std::ostringstream os;
    os.precision(17);
    os << "type\tgq_num\tgq_den\tgq\talpha\theterogeneity\tlog_likelihood\n";
    for (std::size_t i = 0; i < 3; ++i)
      os << to_string(kComparedEncodings[i]) << '\t' << gq[i].numerator << '\t' << gq[i].denominator << '\t'
         << gq[i].value << '\t' << alpha[i] << '\t' << to_string(heterogeneity[i]) << '\t'
         << log_likelihood[i] << '\n';
    return os.str();
  }
};

// Exact comparison of the three GQ rationals.
inline std::pair<Verdict, std::vector<Encoding>> best_encoding(const std::array<DistanceResult, 3>& gq) {
  std::size_t lowest = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (less_value(gq[i], gq[lowest])) lowest = i;
  std::vector<Encoding> best;
  for (std::size_t i = 0; i < 3; ++i)
    if (same_value(gq[i], gq[lowest])) best.push_back(kComparedEncodings[i]);
  const Verdict v = best.size() == 1 ? Verdict::unique : best.size() == 3 ? Verdict::all_equal : Verdict::two_way_tie;
  return {v, best};
}

inline EncodingComparisonReport run_encoding_experiment(const CognateDataset& dataset, const GoldStandard& gold,
                                                        EngineConfig engine, const std::string& dataset_name,
                                                        const SuitabilityThresholds& thresholds = {},
                                                        double alpha_threshold = 20.0,
                                                        unsigned distance_threads = default_thread_count()) {
  engine.validate();
  const CognateMatrix m = build_matrix(dataset);
  detail::require_suitable(m, gold, thresholds);

  namespace fs = std::filesystem;
  const fs::path dir = engine.work_dir / "matrices" / dataset_name;
  const auto pmulti = build_pmulti(m);
  std::array<std::string, 3> files{
      detail::write_text_file(dir / (dataset_name + "_bin.phy"), to_phylip(build_bin(m))),
      detail::write_text_file(dir / (dataset_name + "_pbin.catg"), to_catg(build_pbin(m))),
      detail::write_text_file(dir / (dataset_name + "_pmulti.catg"), to_catg(pmulti))};
  const std::array<std::size_t, 3> states{2, 2, pmulti.state_count()};

  engine.work_dir = engine.work_dir / "runs";
  std::array<InferenceResult, 3> results;
  parallel_for(3, engine.jobs, [&](std::size_t i) {
    results[i] = run_inference(files[i], kComparedEncodings[i], states[i], engine);
  });

  const auto mapping = taxon_to_glottocode(m, gold);
  std::array<Phylogeny, 3> trees;
  EncodingComparisonReport r;
  r.dataset = dataset_name;
  for (std::size_t i = 0; i < 3; ++i) {
    trees[i] = restrict_to_gold(results[i].best_tree, mapping, gold);
    r.gq[i] = gq_distance(trees[i], gold.pruned, distance_threads);
    r.alpha[i] = results[i].alpha;
    r.log_likelihood[i] = results[i].log_likelihood;
    r.heterogeneity[i] = classify_alpha(results[i], alpha_threshold);
  }
  r.pairwise_rf = {rf_distance(trees[0], trees[1]), rf_distance(trees[0], trees[2]),
                   rf_distance(trees[1], trees[2])};
  std::tie(r.verdict, r.best) = best_encoding(r.gq);
  r.compared_taxa = trees[0].leaf_count();
  r.excluded_languages = gold.excluded;

  nlohmann::json manifest;
  manifest["dataset_digest"] = dataset_digest(dataset);
  manifest["gold_newick_digest"] = Fnv1a().update(to_newick(gold.comprehensive, false)).hex();
  manifest["engine_command"] = engine.command;
  manifest["engine_seed"] = engine.seed;
  manifest["search_count"] = engine.search_count;
  for (std::size_t i = 0; i < 3; ++i)
    manifest["matrices"][to_string(kComparedEncodings[i])] = {
        {"file", fs::path(files[i]).filename().string()},
        {"digest", file_digest(files[i])},
        {"model", model_for(kComparedEncodings[i], states[i], engine)},
        {"best_search", results[i].best_search}};
  r.manifest = std::move(manifest);
  return r;
}

// ---------------------------------------------------------------------------
// Reading reports back (for corpus aggregation over saved JSON files)

inline DistanceResult distance_from_json(const nlohmann::json& j) {
  DistanceResult d;
  d.metric = j.at("metric").get<std::string>() == "gq" ? Metric::gq : Metric::rf;
  d.numerator = j.at("numerator").get<std::uint64_t>();
  d.denominator = j.at("denominator").get<std::uint64_t>();
  d.value = j.at("value").get<double>();
  return d;
}

inline SummaryStats summary_from_json(const nlohmann::json& j) {
  SummaryStats s;
  s.mean = j.at("mean").get<double>();
  s.median = j.at("median").get<double>();
  s.std = j.at("std").get<double>();
  s.max = j.at("max").get<double>();
  s.min = j.at("min").get<double>();
  s.count = j.at("count").get<std::size_t>();
  return s;
}

inline SamplingReport sampling_report_from_json(const nlohmann::json& j) {
  SamplingReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.sample_count = j.at("sample_count").get<std::size_t>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  r.sample_seeds = j.at("sample_seeds").get<std::vector<std::uint64_t>>();
  for (const auto& d : j.at("delta")) r.delta.push_back(distance_from_json(d));
  for (const auto& d : j.at("rho")) r.rho.push_back(distance_from_json(d));
  r.rho_full = distance_from_json(j.at("rho_full"));
  r.delta_summary = summary_from_json(j.at("delta_summary"));
  r.rho_summary = summary_from_json(j.at("rho_summary"));
  r.multistate_proportion = j.at("multistate_proportion").get<double>();
  if (!j.at("difficulty").is_null()) r.difficulty = j.at("difficulty").get<double>();
  r.alpha_full = j.value("alpha_full", 0.0);
  r.compared_taxa = j.value("compared_taxa", std::size_t{0});
  r.excluded_languages = j.value("excluded_languages", std::vector<std::string>{});
  r.manifest = j.value("manifest", nlohmann::json::object());
  return r;
}

inline EncodingComparisonReport encoding_report_from_json(const nlohmann::json& j) {
  EncodingComparisonReport r;
  r.dataset = j.at("dataset").get<std::string>();
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string k = to_string(kComparedEncodings[i]);
    r.gq[i] = distance_from_json(j.at("gq").at(k));
    r.alpha[i] = j.at("alpha").at(k).get<double>();
    r.log_likelihood[i] = j.at("log_likelihood").at(k).get<double>();
    r.heterogeneity[i] = j.at("heterogeneity").at(k).get<std::string>() == "high" ? Heterogeneity::high
                                                                                  : Heterogeneity::low;
  }
  r.pairwise_rf = {distance_from_json(j.at("pairwise_rf").at("bin_pbin")),
                   distance_from_json(j.at("pairwise_rf").at("bin_pmulti")),
                   distance_from_json(j.at("pairwise_rf").at("pbin_pmulti"))};
  std::tie(r.verdict, r.best) = best_encoding(r.gq);
  if (!j.at("difficulty").is_null()) r.difficulty = j.at("difficulty").get<double>();
  r.compared_taxa = j.value("compared_taxa", std::size_t{0});
  r.excluded_languages = j.value("excluded_languages", std::vector<std::string>{});
  r.manifest = j.value("manifest", nlohmann::json::object());
  return r;
}

// ---------------------------------------------------------------------------
// Corpus aggregation

// `dataset,difficulty` CSV with a header line.
inline std::map<std::string, double> load_difficulties(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::map<std::string, double> out;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || lineno == 1) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(path + ":" + std::to_string(lineno), "expected dataset,difficulty");
    try {
      out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno), "bad difficulty value");
    }
  }
  return out;
}

struct CorpusSummary {
  // sampling experiment
  std::size_t sampling_datasets = 0;
  double mean_rho_full = 0.0;
  double mean_rho_median = 0.0;
  std::size_t rho_full_not_worse = 0;  // datasets with ρ_full <= ρ̃
  std::vector<std::string> sampling_names;
  std::vector<double> delta_mean, delta_max, rho_std, rho_full, rho_median, rho_mean;
  std::optional<CorrelationResult> delta_mean_vs_difficulty;
  std::optional<CorrelationResult> delta_mean_vs_multistate;

  // encoding experiment
  std::size_t encoding_datasets = 0;
  std::array<double, 3> mean_gq{};
  std::map<std::string, std::size_t> best_type_tally;  // bin, pbin, pmulti, all_equal
  std::size_t two_way_ties = 0;
  // For datasets where one type is uniquely best: mean RF from the best tree
  // to each of the other two, keyed "best->other".
  std::map<std::string, double> mean_rf_from_best;
  // Datasets per best-type group whose alpha estimate for an encoding is below
  // the threshold, keyed "group:encoding".
  std::map<std::string, std::size_t> low_alpha_count;
  std::map<std::string, double> mean_difficulty_by_group;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["sampling"] = {{"datasets", sampling_datasets},
                     {"names", sampling_names},
                     {"mean_rho_full", mean_rho_full},
                     {"mean_rho_median", mean_rho_median},
                     {"rho_full_le_rho_median", rho_full_not_worse},
                     {"histogram", {{"delta_mean", delta_mean}, {"delta_max", delta_max}, {"rho_std", rho_std}}},
                     {"scatter", {{"rho_full", rho_full}, {"rho_median", rho_median}, {"rho_mean", rho_mean}}}};
    j["sampling"]["delta_mean_vs_difficulty"] =
        delta_mean_vs_difficulty ? cognatree::to_json(*delta_mean_vs_difficulty) : nlohmann::json(nullptr);
    j["sampling"]["delta_mean_vs_multistate"] =
        delta_mean_vs_multistate ? cognatree::to_json(*delta_mean_vs_multistate) : nlohmann::json(nullptr);
    j["encoding"] = {{"datasets", encoding_datasets},
                     {"mean_gq", {{"bin", mean_gq[0]}, {"pbin", mean_gq[1]}, {"pmulti", mean_gq[2]}}},
                     {"best_type_tally", best_type_tally},
                     {"two_way_ties", two_way_ties},
                     {"mean_rf_from_best", mean_rf_from_best},
                     {"low_alpha_count", low_alpha_count},
                     {"mean_difficulty_by_group", mean_difficulty_by_group}};
    return j;
  }
};

inline CorpusSummary aggregate_across_datasets(const std::vector<SamplingReport>& sampling,
                                               const std::vector<EncodingComparisonReport>& encoding,
                                               double alpha_threshold = 20.0) {
  CorpusSummary s;
  s.sampling_datasets = sampling.size();
  std::vector<double> dm_with_difficulty, difficulty;
  std::vector<double> multistate;
  for (const auto& r : sampling) {
    s.sampling_names.push_back(r.dataset);
    s.delta_mean.push_back(r.delta_mean());
    s.delta_max.push_back(r.delta_max());
    s.rho_std.push_back(r.rho_std());
    s.rho_full.push_back(r.rho_full.value);
    s.rho_median.push_back(r.rho_median());
    s.rho_mean.push_back(r.rho_mean());
    multistate.push_back(r.multistate_proportion);
    if (r.rho_full.value <= r.rho_median()) ++s.rho_full_not_worse;
    if (r.difficulty) {
      dm_with_difficulty.push_back(r.delta_mean());
      difficulty.push_back(*r.difficulty);
    }
  }
  if (!sampling.empty()) {
    s.mean_rho_full = summarize(s.rho_full).mean;
    s.mean_rho_median = summarize(s.rho_median).mean;
  }
  auto try_pearson = [](const std::vector<double>& x, const std::vector<double>& y) -> std::optional<CorrelationResult> {
    if (x.size() < 3) return std::nullopt;
    try {
      return pearson(x, y);
    } catch (const DataError&) {
      return std::nullopt;  // zero variance
    }
  };
  s.delta_mean_vs_difficulty = try_pearson(dm_with_difficulty, difficulty);
  s.delta_mean_vs_multistate = try_pearson(s.delta_mean, multistate);

  s.encoding_datasets = encoding.size();
  for (const char* k : {"bin", "pbin", "pmulti", "all_equal"}) s.best_type_tally[k] = 0;
  std::map<std::string, std::vector<double>> rf_groups;
  std::map<std::string, std::vector<double>> difficulty_groups;
  for (const auto& r : encoding) {
    for (std::size_t i = 0; i < 3; ++i) s.mean_gq[i] += r.gq[i].value / static_cast<double>(encoding.size());
    if (r.excluded_from_tally()) {
      ++s.two_way_ties;
      continue;
    }
    std::string group = r.verdict == Verdict::all_equal ? "all_equal" : to_string(r.best.front());
    ++s.best_type_tally[group];
    if (r.difficulty) difficulty_groups[group].push_back(*r.difficulty);
    for (std::size_t i = 0; i < 3; ++i)
      if (r.alpha[i] < alpha_threshold) ++s.low_alpha_count[group + ":" + to_string(kComparedEncodings[i])];
    if (r.verdict != Verdict::unique) continue;
    const auto b = static_cast<std::size_t>(
        std::find(kComparedEncodings.begin(), kComparedEncodings.end(), r.best.front()) - kComparedEncodings.begin());
    for (std::size_t o = 0; o < 3; ++o) {
      if (o == b) continue;
      // pairwise_rf holds (0,1), (0,2), (1,2) at lo + hi - 1
      const std::size_t idx = std::min(b, o) + std::max(b, o) - 1;
      rf_groups[group + "->" + to_string(kComparedEncodings[o])].push_back(r.pairwise_rf[idx].value);
    }
  }
  for (const auto& [k, v] : rf_groups) s.mean_rf_from_best[k] = summarize(v).mean;
  for (const auto& [k, v] : difficulty_groups) s.mean_difficulty_by_group[k] = summarize(v).mean;
  return s;
}

}  // namespace cognatree
