// cognatree: cognate data encodings, tree distances and synonym experiments.
//
// Exit codes: 0 success, 1 domain error, 2 usage error, 3 inference engine failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cognatree/cognatree.hpp"

namespace fs = std::filesystem;
using namespace cognatree;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;
constexpr int kEngineError = 3;

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int cmd_convert(const std::string& input, const std::string& format, const std::string& out) {
  const auto m = build_matrix(load_dataset(input));
  switch (parse_encoding(format)) {
    case Encoding::bin: write_output(to_phylip(build_bin(m)), out); break;
    case Encoding::multi: write_output(to_phylip(build_multi(m)), out); break;
    case Encoding::pbin: write_output(to_catg(build_pbin(m)), out); break;
    case Encoding::pmulti: write_output(to_catg(build_pmulti(m)), out); break;
  }
  return kOk;
}

int cmd_treedist(const std::string& metric, const std::string& tree1, const std::string& tree2, bool json,
                 unsigned jobs) {
  const auto t1 = read_newick_file(tree1);
  const auto t2 = read_newick_file(tree2);
  DistanceResult d;
  if (metric == "rf") {
    d = rf_distance(t1, t2);
  } else if (metric == "gq") {
    d = gq_distance(t1, t2, jobs);
  } else {
    throw DataError("unknown metric '" + metric + "'");
  }
  if (json) {
    std::cout << to_json(d).dump() << '\n';
  } else {
    std::cout << metric << ' ' << d.numerator << " / " << d.denominator << " = " << format_value(d.value) << '\n';
  }
  return kOk;
}

int cmd_sample(const std::string& input, std::size_t count, std::uint64_t seed, const std::string& out,
               std::string name) {
  const auto m = build_matrix(load_dataset(input));
  if (name.empty()) name = fs::path(input).filename().replace_extension().string();
  const auto samples = draw_samples(m, count, seed);
  write_samples(samples, name, out, seed);
  return kOk;
}

int cmd_prune(const std::string& tree, const std::string& dataset, const std::string& out) {
  const auto d = load_dataset(dataset);
  const auto gold = build_gold_standard(tree, d);
  for (const auto& e : gold.excluded) std::cerr << "excluded: " << e << '\n';
  write_output(to_newick(gold.pruned) + "\n", out);
  return kOk;
}

int cmd_check(const std::string& input, const std::string& reference, bool json,
              const SuitabilityThresholds& limits) {
  const auto m = build_matrix(load_dataset(input));
  const auto tree = read_newick_file(reference);
  const auto leaves = tree.leaf_labels();
  const std::set<std::string> in_tree(leaves.begin(), leaves.end());
  std::set<std::string> keep;
  for (const auto& l : m.languages()) {
    if (l.glottocode && in_tree.count(*l.glottocode)) {
      keep.insert(*l.glottocode);
    } else {
      std::cerr << "not matched to reference: " << l.id << '\n';
    }
  }
  const Phylogeny pruned = keep.empty() ? Phylogeny{} : prune_to(tree, keep);
  const auto report = check_suitability(m, pruned, limits);
  std::cout << (json ? report.to_json().dump(2) + "\n" : report.to_text());
  return report.accepted() ? kOk : kDomainError;
}

int cmd_experiment(const std::string& kind, const std::string& config_path, const std::vector<std::string>& overrides,
                   unsigned jobs) {
  auto config = Config::parse(read_text_file(config_path), config_path);
  for (const auto& o : overrides) config.set_override(o);
  if (jobs > 0) config.set("engine.jobs", std::to_string(jobs));
  const fs::path base = fs::absolute(config_path).parent_path();
  const auto engine = engine_config_from(config, base);
  const auto paths = paths_from(config, base);
  const auto dataset = load_dataset(paths.dataset);
  const auto gold = build_gold_standard(paths.gold.string(), dataset, thresholds_from(config).min_languages);
  std::optional<double> difficulty;
  if (paths.difficulty) {
    const auto table = load_difficulties(paths.difficulty->string());
    if (auto it = table.find(paths.name); it != table.end()) difficulty = it->second;
  }
  nlohmann::json report;
  std::string tsv;
  if (kind == "sampling") {
    auto cfg = sampling_config_from(config, paths.name);
    if (jobs > 0) cfg.distance_threads = jobs;
    auto r = run_sampling_experiment(dataset, gold, engine, cfg);
    r.difficulty = difficulty;
    report = r.to_json();
    tsv = r.to_tsv();
  } else if (kind == "encoding") {
    auto r = run_encoding_experiment(dataset, gold, engine, paths.name, thresholds_from(config),
                                     config.get_double("encoding.alpha_threshold", 20.0),
                                     jobs > 0 ? jobs : default_thread_count());
    r.difficulty = difficulty;
    report = r.to_json();
    tsv = r.to_tsv();
  } else {
    throw CLI::ValidationError("experiment", "kind must be 'sampling' or 'encoding'");
  }
  write_output(report.dump(2) + "\n", paths.report.string());
  if (paths.tsv) write_output(tsv, paths.tsv->string());
  std::cerr << "report written to " << paths.report.string() << '\n';
  return kOk;
}

int cmd_aggregate(const std::vector<std::string>& reports, const std::string& out, double alpha_threshold) {
  std::vector<SamplingReport> sampling;
  std::vector<EncodingComparisonReport> encoding;
  for (const auto& path : reports) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, e.what());
    }
    const auto kind = j.value("experiment", "");
    try {
      if (kind == "sampling") {
        sampling.push_back(sampling_report_from_json(j));
      } else if (kind == "encoding") {
        encoding.push_back(encoding_report_from_json(j));
      } else {
        throw ParseError(path, "not an experiment report");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, e.what());
    }
  }
  write_output(aggregate_across_datasets(sampling, encoding, alpha_threshold).to_json().dump(2) + "\n", out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cognatree - cognate character matrices, tree distances, synonym experiments"};
  app.require_subcommand(1);
  unsigned jobs = 0;
  app.add_option("--jobs", jobs, "Global cap on parallel jobs (0 = automatic)");

  std::string input, format, out;
  auto* convert = app.add_subcommand("convert", "Encode a cognate dataset as a character matrix");
  convert->add_option("--input", input, "CLDF directory or judgment TSV")->required();
  convert->add_option("--format", format, "bin | multi | pbin | pmulti")
      ->required()
      ->check(CLI::IsMember({"bin", "multi", "pbin", "pmulti"}));
  convert->add_option("--out", out, "Output file (default: stdout)");

  std::string metric, tree1, tree2;
  bool json = false;
  auto* treedist = app.add_subcommand("treedist", "Distance between two trees");
  treedist->add_option("--metric", metric, "rf | gq")->required()->check(CLI::IsMember({"rf", "gq"}));
  treedist->add_option("--tree1", tree1, "First (inferred) tree")->required();
  treedist->add_option("--tree2", tree2, "Second (reference) tree")->required();
  treedist->add_flag("--json", json, "Machine-readable output");

  std::size_t count = 100;
  std::uint64_t seed = 1;
  std::string name;
  auto* sample = app.add_subcommand("sample", "Draw randomized synonym-selection samples");
  sample->add_option("--input", input, "CLDF directory or judgment TSV")->required();
  sample->add_option("--count", count, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "Master seed");
  sample->add_option("--out", out, "Output directory")->required();
  sample->add_option("--name", name, "Dataset name used in file names");

  std::string tree, dataset;
  auto* prune = app.add_subcommand("prune", "Prune a glottocode-labelled reference tree to a dataset");
  prune->add_option("--tree", tree, "Comprehensive reference tree (Newick)")->required();
  prune->add_option("--dataset", dataset, "CLDF directory or judgment TSV")->required();
  prune->add_option("--out", out, "Output Newick file (default: stdout)");

  std::string reference;
  SuitabilityThresholds limits;
  auto* check = app.add_subcommand("check", "Dataset suitability filters");
  check->add_option("--input", input, "CLDF directory or judgment TSV")->required();
  check->add_option("--reference", reference, "Comprehensive reference tree (Newick)")->required();
  check->add_flag("--json", json, "Machine-readable output");
  check->add_option("--min-languages", limits.min_languages);
  check->add_option("--max-languages", limits.max_languages);
  check->add_option("--max-classes", limits.max_classes);

  std::string kind, config;
  std::vector<std::string> overrides;
  auto* experiment = app.add_subcommand("experiment", "Run the sampling or encoding experiment");
  experiment->add_option("kind", kind, "sampling | encoding")
      ->required()
      ->check(CLI::IsMember({"sampling", "encoding"}));
  experiment->add_option("config", config, "Experiment configuration file")->required();
  experiment->add_option("--set", overrides, "Override a config value: section.key=value");

  std::vector<std::string> reports;
  double alpha_threshold = 20.0;
  auto* aggregate = app.add_subcommand("aggregate", "Corpus summary over saved experiment reports");
  aggregate->add_option("reports", reports, "Report JSON files")->required();
  aggregate->add_option("--out", out, "Output JSON (default: stdout)");
  aggregate->add_option("--alpha-threshold", alpha_threshold);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*convert) return cmd_convert(input, format, out);
    if (*treedist) return cmd_treedist(metric, tree1, tree2, json, jobs > 0 ? jobs : default_thread_count());
    if (*sample) return cmd_sample(input, count, seed, out, name);
    if (*prune) return cmd_prune(tree, dataset, out);
    if (*check) return cmd_check(input, reference, json, limits);
    if (*experiment) return cmd_experiment(kind, config, overrides, jobs);
    if (*aggregate) return cmd_aggregate(reports, out, alpha_threshold);
  } catch (const EngineError& e) {
    std::cerr << "error: inference engine: " << e.what() << '\n';
    if (!e.log_path().empty()) std::cerr << "engine log: " << e.log_path() << '\n';
    return kEngineError;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}
