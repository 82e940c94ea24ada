#pragma once

// Mapping of a Config file onto engine and experiment settings. Relative
// paths in the [paths] section resolve against the config file's directory.
//
//   [engine]    command, searches, seed, jobs, model_binary, model_multi,
//               tree_file, alpha_regex, loglik_regex
//   [sampling]  count, master_seed, std (population | sample)
//   [encoding]  alpha_threshold
//   [filters]   min_languages, max_languages, max_classes
//   [paths]     dataset, name, gold, work_dir, report, tsv, difficulty

#include <filesystem>
#include <optional>
#include <string>

#include "cognatree/config.hpp"
#include "cognatree/experiments.hpp"
#include "cognatree/inference.hpp"

namespace cognatree {

struct ExperimentPaths {
  std::filesystem::path dataset;
  std::string name;
  std::filesystem::path gold;
  std::filesystem::path work_dir;
  std::filesystem::path report;
  std::optional<std::filesystem::path> tsv;
  std::optional<std::filesystem::path> difficulty;
};

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline EngineConfig engine_config_from(const Config& c, const std::filesystem::path& base) {
  EngineConfig e;
  e.command = c.require("engine.command");
  e.search_count = c.get_uint("engine.searches", e.search_count);
  e.seed = c.get_uint("engine.seed", e.seed);
  e.jobs = static_cast<unsigned>(c.get_uint("engine.jobs", e.jobs));
  e.model_binary = c.get_or("engine.model_binary", e.model_binary);
  e.model_multi = c.get_or("engine.model_multi", e.model_multi);
  e.tree_file = c.get_or("engine.tree_file", e.tree_file);
  e.alpha_regex = c.get_or("engine.alpha_regex", e.alpha_regex);
  e.loglik_regex = c.get_or("engine.loglik_regex", e.loglik_regex);
  e.work_dir = resolve_path(base, c.get_or("paths.work_dir", "cognatree-runs"));
  e.validate();
  return e;
}

inline SuitabilityThresholds thresholds_from(const Config& c) {
  SuitabilityThresholds t;
  t.min_languages = c.get_uint("filters.min_languages", t.min_languages);
  t.max_languages = c.get_uint("filters.max_languages", t.max_languages);
  t.max_classes = c.get_uint("filters.max_classes", t.max_classes);
  return t;
}

inline SamplingConfig sampling_config_from(const Config& c, const std::string& name) {
  SamplingConfig s;
  s.dataset_name = name;
  s.sample_count = c.get_uint("sampling.count", s.sample_count);
  s.master_seed = c.get_uint("sampling.master_seed", s.master_seed);
  const auto conv = c.get_or("sampling.std", "population");
  if (conv == "population") {
    s.std_convention = StdConvention::population;
  } else if (conv == "sample") {
    s.std_convention = StdConvention::sample;
  } else {
    throw DataError("sampling.std must be 'population' or 'sample'");
  }
  s.thresholds = thresholds_from(c);
  return s;
}

inline ExperimentPaths paths_from(const Config& c, const std::filesystem::path& base) {
  ExperimentPaths p;
  p.dataset = resolve_path(base, c.require("paths.dataset"));
  p.name = c.get_or("paths.name", p.dataset.stem().string());
  p.gold = resolve_path(base, c.require("paths.gold"));
  p.work_dir = resolve_path(base, c.get_or("paths.work_dir", "cognatree-runs"));
  p.report = resolve_path(base, c.get_or("paths.report", p.name + "_report.json"));
  if (auto t = c.get("paths.tsv")) p.tsv = resolve_path(base, *t);
  if (auto d = c.get("paths.difficulty")) p.difficulty = resolve_path(base, *d);
  return p;
}

}  // namespace cognatree
