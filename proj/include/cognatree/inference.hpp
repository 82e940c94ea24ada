#pragma once

// Driver for an external maximum-likelihood inference engine.
//
// The engine is described by a command template. Each of the configured
// searches is one engine invocation with its own seed; the best-scoring tree
// over all searches is the result. Placeholders:
//
//   {input}       matrix file (absolute path)            required
//   {model}       model string for the matrix kind        required
//   {seed}        per-search seed                         required
//   {prefix}      per-search output prefix                required
//   {format}      PHYLIP or CATG
//   {prob}        "on" for probabilistic matrices, else "off"
//   {states}      alphabet size of the matrix
//   {search}      search index, 0-based
//   {start_tree}  rand{1} for the first half of the searches, pars{1} after
//
// Every search runs in a directory keyed by a content hash of (matrix bytes,
// model, seed, command, tree file template). A completed search leaves a
// marker file and is not rerun, so interrupted experiments resume.

#include <spawn.h>
#include <sys/wait.h>
#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "cognatree/encode.hpp"
#include "cognatree/error.hpp"
#include "cognatree/hash.hpp"
#include "cognatree/phylogeny.hpp"

extern char** environ;

namespace cognatree {

struct EngineConfig {
  std::string command;
  std::size_t search_count = 20;
  std::uint64_t seed = 1;
  std::string model_binary = "BIN+G";
  std::string model_multi = "MULTI{states}_MK+G";
  std::string tree_file = "{prefix}.raxml.bestTree";
  std::string alpha_regex = R"(alpha:\s*([-+0-9.eE]+))";
  std::string loglik_regex = R"((?:Final LogLikelihood|logL):\s*([-+0-9.eE]+))";
  std::filesystem::path work_dir = "cognatree-runs";
  unsigned jobs = 1;

  void validate() const {
    for (const char* p : {"{input}", "{model}", "{seed}", "{prefix}"})
      if (command.find(p) == std::string::npos)
        throw DataError(std::string("engine command template lacks placeholder ") + p);
    if (search_count < 1) throw DataError("engine search count must be at least 1");
    if (jobs < 1) throw DataError("engine job limit must be at least 1");
  }
};

struct InferenceResult {
  Phylogeny best_tree;
  double log_likelihood = 0.0;
  double alpha = 0.0;
  std::size_t best_search = 0;
  std::vector<double> search_log_likelihoods;
  std::vector<double> search_alphas;
  std::string log_path;  // log of the best search
};

enum class Heterogeneity { high, low };

inline const char* to_string(Heterogeneity h) { return h == Heterogeneity::high ? "high" : "low"; }

// Small alpha means strong rate heterogeneity.
inline Heterogeneity classify_alpha(double alpha, double threshold = 20.0) {
  return alpha < threshold ? Heterogeneity::high : Heterogeneity::low;
}
inline Heterogeneity classify_alpha(const InferenceResult& r, double threshold = 20.0) {
  return classify_alpha(r.alpha, threshold);
}

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
  return s;
}

inline std::string model_for(Encoding kind, std::size_t states, const EngineConfig& cfg) {
  const bool binary = kind == Encoding::bin || kind == Encoding::pbin;
  return replace_all(binary ? cfg.model_binary : cfg.model_multi, "{states}", std::to_string(states));
}

namespace detail {

// Whitespace-separated words; double quotes group a word.
inline std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quotes = false;
  bool have = false;
  for (char c : command) {
    if (c == '"') {
      in_quotes = !in_quotes;
      have = true;
    } else if (!in_quotes && std::isspace(static_cast<unsigned char>(c))) {
      if (have) out.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur.push_back(c);
      have = true;
    }
  }
  if (in_quotes) throw DataError("unbalanced quote in engine command template");
  if (have) out.push_back(std::move(cur));
  if (out.empty()) throw DataError("empty engine command template");
  return out;
}

// Runs argv with stdout and stderr appended to `log_path`; returns the exit status.
inline int run_process(const std::vector<std::string>& argv, const std::string& log_path) {
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawn_file_actions_addclose(&actions, STDIN_FILENO);
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0)
    throw EngineError("cannot start engine '" + argv[0] + "': " + std::strerror(rc), log_path);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw EngineError("waitpid failed for engine", log_path);
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

inline std::optional<double> last_match(const std::string& text, const std::string& pattern) {
  const std::regex re(pattern);
  std::optional<double> out;
  for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) {
    if (it->size() < 2) continue;
    try {
      out = std::stod((*it)[1].str());
    } catch (const std::exception&) {
    }
  }
  return out;
}

struct SearchOutcome {
  Phylogeny tree;
  double log_likelihood = 0.0;
  double alpha = 0.0;
  std::string log_path;
};

inline SearchOutcome collect_search(const std::string& tree_path, const std::string& log_path,
                                    const EngineConfig& cfg) {
  std::string log;
  try {
    log = read_text_file(log_path);
  } catch (const IoError&) {
    throw EngineError("engine log missing: " + log_path, log_path);
  }
  SearchOutcome out;
  out.log_path = log_path;
  auto ll = last_match(log, cfg.loglik_regex);
  auto alpha = last_match(log, cfg.alpha_regex);
  if (!ll) throw EngineError("no log-likelihood found in engine output " + log_path, log_path);
  if (!alpha) throw EngineError("no alpha estimate found in engine output " + log_path, log_path);
  if (*alpha < 0.0 || *alpha > 100.0)
    throw EngineError("alpha estimate " + std::to_string(*alpha) + " outside [0, 100]", log_path);
  out.log_likelihood = *ll;
  out.alpha = *alpha;
  if (!std::filesystem::exists(tree_path))
    throw EngineError("engine produced no tree file " + tree_path, log_path);
  try {
    out.tree = read_newick_file(tree_path);
  } catch (const DataError& e) {
    throw EngineError(std::string("unparseable engine tree: ") + e.what(), log_path);
  }
  return out;
}

}  // namespace detail

// Directory holding the outputs of one search.
inline std::filesystem::path search_directory(const std::string& matrix_path, const std::string& model,
                                              std::uint64_t seed, const EngineConfig& cfg) {
  Fnv1a h;
  h.field(file_digest(matrix_path)).field(model).field(std::to_string(seed)).field(cfg.command).field(cfg.tree_file);
  return cfg.work_dir / h.hex();
}

inline InferenceResult run_inference(const std::string& matrix_path, Encoding kind, std::size_t states,
                                     const EngineConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  if (!fs::exists(matrix_path)) throw DataError("matrix file not found: " + matrix_path);
  const std::string input = fs::absolute(matrix_path).string();
  const std::string model = model_for(kind, states, cfg);
  const bool probabilistic = kind == Encoding::pbin || kind == Encoding::pmulti;
  const auto words = detail::split_command(cfg.command);

  InferenceResult result;
  std::optional<detail::SearchOutcome> best;
  for (std::size_t i = 0; i < cfg.search_count; ++i) {
    const std::uint64_t seed = cfg.seed + i;
    const fs::path dir = fs::absolute(search_directory(input, model, seed, cfg));
    fs::create_directories(dir);
    const std::string prefix = (dir / "search").string();
    auto expand = [&](std::string s) {
      s = replace_all(std::move(s), "{input}", input);
      s = replace_all(std::move(s), "{model}", model);
      s = replace_all(std::move(s), "{seed}", std::to_string(seed));
      s = replace_all(std::move(s), "{prefix}", prefix);
      s = replace_all(std::move(s), "{format}", probabilistic ? "CATG" : "PHYLIP");
      s = replace_all(std::move(s), "{prob}", probabilistic ? "on" : "off");
      s = replace_all(std::move(s), "{states}", std::to_string(states));
      s = replace_all(std::move(s), "{search}", std::to_string(i));
      s = replace_all(std::move(s), "{start_tree}", i < cfg.search_count / 2 || cfg.search_count == 1
                                                        ? "rand{1}"
                                                        : "pars{1}");
      return s;
    };
    const std::string tree_path = expand(cfg.tree_file);
    const std::string log_path = prefix + ".log";
    const fs::path marker = dir / "complete";
    if (!fs::exists(marker)) {
      std::vector<std::string> argv;
      for (const auto& w : words) argv.push_back(expand(w));
      const int status = detail::run_process(argv, log_path);
      if (status != 0)
        throw EngineError("engine exited with status " + std::to_string(status) + " (log: " +
                              log_path + ")",
                          log_path);
      detail::collect_search(tree_path, log_path, cfg);
      std::ofstream(marker) << "ok\n";
    }
    auto outcome = detail::collect_search(tree_path, log_path, cfg);
    result.search_log_likelihoods.push_back(outcome.log_likelihood);
    result.search_alphas.push_back(outcome.alpha);
    if (!best || outcome.log_likelihood > best->log_likelihood) {
      result.best_search = i;
      best = std::move(outcome);
    }
  }
  result.best_tree = std::move(best->tree);
  result.log_likelihood = best->log_likelihood;
  result.alpha = best->alpha;
  result.log_path = best->log_path;
  return result;
}

}  // namespace cognatree
