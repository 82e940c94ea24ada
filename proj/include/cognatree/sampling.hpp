#pragma once

// Randomized synonym selection: every multi-state cell is replaced by one of
// its k classes, each with probability 1/k.
//
// Randomness is counter based so that a sample's content depends only on
// (master seed, sample index, cell coordinates):
//   sample seed  = mix64(master + (index + 1) * 0x9E3779B97F4A7C15)
//   cell stream  = SplitMix64 seeded with mix64(sample seed ^ mix64(language << 32 | concept))
// where mix64 is the SplitMix64 finalizer. Class choice draws from the cell
// stream with Lemire's multiply-shift rejection method (unbiased).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cognatree/cognate_matrix.hpp"
#include "cognatree/encode.hpp"
#include "cognatree/error.hpp"

namespace cognatree {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform integer in [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    auto wide = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(wide);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        wide = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(wide);
      }
    }
    return static_cast<std::uint64_t>(wide >> 64);
  }

 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(master_seed + (index + 1) * 0x9E3779B97F4A7C15ull);
}

inline SplitMix64 cell_stream(std::uint64_t seed, std::size_t language, std::size_t concept_idx) {
  const std::uint64_t key = (static_cast<std::uint64_t>(language) << 32) ^ concept_idx;
  return SplitMix64(mix64(seed ^ mix64(key)));
}

struct SelectionSample {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  CognateMatrix matrix;  // every present cell single-state
};

inline SelectionSample draw_sample(const CognateMatrix& m, std::uint64_t seed, std::size_t index = 0) {
  SelectionSample out{index, seed, m};
  for (std::size_t l = 0; l < m.language_count(); ++l) {
    for (std::size_t c = 0; c < m.concept_count(); ++c) {
      auto& cell = out.matrix.cell(l, c);
      if (!cell || cell->size() < 2) continue;
      auto rng = cell_stream(seed, l, c);
      std::string chosen = (*cell)[rng.below(cell->size())];
      cell->assign(1, std::move(chosen));
    }
  }
  return out;
}

inline std::vector<SelectionSample> draw_samples(const CognateMatrix& m, std::size_t count,
                                                 std::uint64_t master_seed) {
  if (count == 0) throw DataError("sample count must be at least 1");
  std::vector<SelectionSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw_sample(m, sample_seed(master_seed, i), i));
  return out;
}

inline std::string sample_file_name(const std::string& dataset, std::size_t index) {
  return dataset + "_sample" + std::to_string(index) + ".phy";
}

// Writes one binary PHYLIP file per sample plus `manifest.tsv` (index, seed, file).
inline void write_samples(const std::vector<SelectionSample>& samples, const std::string& dataset,
                          const std::filesystem::path& dir, std::uint64_t master_seed) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.tsv", std::ios::binary);
  if (!manifest) throw IoError("cannot write manifest in '" + dir.string() + "'");
  manifest << "# master_seed\t" << master_seed << "\n";
  manifest << "index\tseed\tfile\n";
  for (const auto& s : samples) {
    const auto name = sample_file_name(dataset, s.index);
    write_phylip(build_bin(s.matrix), (dir / name).string());
    manifest << s.index << '\t' << s.seed << '\t' << name << '\n';
  }
}

}  // namespace cognatree
