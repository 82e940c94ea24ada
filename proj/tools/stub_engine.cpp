// Deterministic stand-in for a maximum-likelihood inference engine.
//
//   cognatree-stub-engine --msa FILE --prefix P --seed S [--model M]
//                         [--trees FILE] [--map FILE] [--alpha X] [--fail] [--no-tree]
//
// Writes P.raxml.bestTree and prints "alpha: X, logL: Y". Tree choice:
//   --map    lines "<substring>\t<newick>"; first substring found in the
//            matrix file name wins
//   --trees  one Newick per line; tree index = seed mod line count
//   default  caterpillar over the matrix taxa, order shuffled by a hash of
//            the matrix bytes (seed independent)
// logL = -100 - ((seed * 7919) mod 1000) / 10.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cognatree/encode.hpp"
#include "cognatree/hash.hpp"
#include "cognatree/phylogeny.hpp"
#include "cognatree/sampling.hpp"

using namespace cognatree;

namespace {

std::vector<std::string> matrix_taxa(const std::string& text) {
  if (text.find('\t') != std::string::npos) return parse_catg(text).taxa;
  return parse_phylip(text).taxa;
}

std::string caterpillar(std::vector<std::string> taxa, std::uint64_t key) {
  SplitMix64 rng(key);
  for (std::size_t i = taxa.size(); i > 1; --i) std::swap(taxa[i - 1], taxa[rng.below(i)]);
  std::string s = taxa.front();
  for (std::size_t i = 1; i < taxa.size(); ++i) s = "(" + s + "," + taxa[i] + ")";
  return s + ";";
}

std::vector<std::string> lines_of(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic stub inference engine"};
  std::string msa, prefix, model, trees, map;
  std::uint64_t seed = 0;
  double alpha = 1.5;
  bool fail = false, no_tree = false;
  app.add_option("--msa", msa)->required();
  app.add_option("--prefix", prefix)->required();
  app.add_option("--seed", seed)->required();
  app.add_option("--model", model);
  app.add_option("--trees", trees);
  app.add_option("--map", map);
  app.add_option("--alpha", alpha);
  app.add_flag("--fail", fail);
  app.add_flag("--no-tree", no_tree);
  CLI11_PARSE(app, argc, argv);

  if (fail) {
    std::cerr << "stub engine: failure requested\n";
    return 2;
  }
  try {
    const std::string text = read_text_file(msa);
    std::string newick;
    if (!map.empty()) {
      const std::string base = std::filesystem::path(msa).filename().string();
      for (const auto& line : lines_of(map)) {
        auto tab = line.find('\t');
        if (tab != std::string::npos && base.find(line.substr(0, tab)) != std::string::npos) {
          newick = line.substr(tab + 1);
          break;
        }
      }
    }
    if (newick.empty() && !trees.empty()) {
      const auto all = lines_of(trees);
      if (all.empty()) throw std::runtime_error("empty tree list");
      newick = all[seed % all.size()];
    }
    if (newick.empty()) newick = caterpillar(matrix_taxa(text), Fnv1a().update(text).value());

    const double loglik = -100.0 - static_cast<double>((seed * 7919) % 1000) / 10.0;
    std::printf("model: %s\nalpha: %.6g, logL: %.6f\n", model.c_str(), alpha, loglik);
    if (!no_tree) {
      std::ofstream out(prefix + ".raxml.bestTree", std::ios::binary);
      out << newick << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "stub engine: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
