#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cognatree/dataset.hpp"
#include "cognatree/error.hpp"
#include "cognatree/phylogeny.hpp"

namespace cognatree {

// Missing, or the sorted set of distinct cognate classes of a cell.
using CellState = std::optional<std::vector<std::string>>;

class CognateMatrix {
 public:
  CognateMatrix() = default;
  CognateMatrix(std::vector<LanguageRecord> languages, std::vector<std::string> concepts)
      : languages_(std::move(languages)),
        concepts_(std::move(concepts)),
        cells_(languages_.size() * concepts_.size()) {}

  const std::vector<LanguageRecord>& languages() const noexcept { return languages_; }
  const std::vector<std::string>& concepts() const noexcept { return concepts_; }
  std::size_t language_count() const noexcept { return languages_.size(); }
  std::size_t concept_count() const noexcept { return concepts_.size(); }

  const CellState& cell(std::size_t language, std::size_t concept_idx) const {
    return cells_.at(language * concepts_.size() + concept_idx);
  }
  CellState& cell(std::size_t language, std::size_t concept_idx) {
    return cells_.at(language * concepts_.size() + concept_idx);
  }

  std::size_t language_index(std::string_view id) const {
    for (std::size_t i = 0; i < languages_.size(); ++i)
      if (languages_[i].id == id) return i;
    throw DataError("unknown language '" + std::string(id) + "'");
  }
  std::size_t concept_index(std::string_view id) const {
    for (std::size_t i = 0; i < concepts_.size(); ++i)
      if (concepts_[i] == id) return i;
    throw DataError("unknown concept '" + std::string(id) + "'");
  }

  // Cognate classes occurring for a concept, in canonical (lexicographic) order.
  std::vector<std::string> classes_of(std::size_t concept_idx) const {
    std::vector<std::string> out;
    for (std::size_t l = 0; l < languages_.size(); ++l)
      if (const auto& c = cell(l, concept_idx)) out.insert(out.end(), c->begin(), c->end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  friend bool operator==(const CognateMatrix&, const CognateMatrix&) = default;

 private:
  std::vector<LanguageRecord> languages_;
  std::vector<std::string> concepts_;
  std::vector<CellState> cells_;
};

inline CognateMatrix build_matrix(const CognateDataset& d) {
  CognateMatrix m(d.languages, d.concepts);
  std::unordered_map<std::string_view, std::size_t> lang;
  std::unordered_map<std::string_view, std::size_t> conc;
  for (std::size_t i = 0; i < d.languages.size(); ++i) lang.emplace(d.languages[i].id, i);
  for (std::size_t i = 0; i < d.concepts.size(); ++i) conc.emplace(d.concepts[i], i);
  for (const auto& j : d.judgments) {
    auto l = lang.find(j.language);
    auto c = conc.find(j.concept_id);
    if (l == lang.end() || c == conc.end())
      throw DataError("judgment references unknown language or concept: " + j.language + "/" +
                      j.concept_id);
    auto& cell = m.cell(l->second, c->second);
    if (!cell) cell.emplace();
    cell->push_back(j.cognate_class);
  }
  for (std::size_t l = 0; l < m.language_count(); ++l) {
    for (std::size_t c = 0; c < m.concept_count(); ++c) {
      if (auto& cell = m.cell(l, c)) {
        std::sort(cell->begin(), cell->end());
        cell->erase(std::unique(cell->begin(), cell->end()), cell->end());
      }
    }
  }
  return m;
}

inline double multistate_cell_proportion(const CognateMatrix& m) {
  std::size_t present = 0;
  std::size_t multi = 0;
  for (std::size_t l = 0; l < m.language_count(); ++l) {
    for (std::size_t c = 0; c < m.concept_count(); ++c) {
      if (const auto& cell = m.cell(l, c)) {
        ++present;
        if (cell->size() >= 2) ++multi;
      }
    }
  }
  if (present == 0) throw DataError("multi-state proportion undefined: every cell is missing");
  return static_cast<double>(multi) / static_cast<double>(present);
}

inline std::size_t synonym_count(const CognateMatrix& m, std::string_view language,
                                 std::string_view concept_id) {
  const auto& cell = m.cell(m.language_index(language), m.concept_index(concept_id));
  if (!cell)
    throw DataError("cell (" + std::string(language) + ", " + std::string(concept_id) + ") is missing");
  return cell->size();
}

inline std::size_t max_classes_per_concept(const CognateMatrix& m) {
  std::size_t best = 0;
  for (std::size_t c = 0; c < m.concept_count(); ++c) best = std::max(best, m.classes_of(c).size());
  return best;
}

// Dataset filters; defaults are the values used for the published corpus.
struct SuitabilityThresholds {
  std::size_t min_languages = 5;
  std::size_t max_languages = 400;
  std::size_t max_classes = 64;
};

struct SuitabilityReport {
  std::size_t language_count = 0;
  std::size_t max_classes_per_concept = 0;
  bool informative = false;
  bool reference_is_star = false;
  std::vector<std::string> reasons;  // empty iff accepted

  bool accepted() const noexcept { return reasons.empty(); }

  nlohmann::json to_json() const {
    return {{"language_count", language_count},
            {"max_classes_per_concept", max_classes_per_concept},
            {"informative", informative},
            {"reference_is_star", reference_is_star},
            {"verdict", accepted() ? "accepted" : "rejected"},
            {"reasons", reasons}};
  }

  std::string to_text() const {
    std::string out;
    out += "languages:               " + std::to_string(language_count) + "\n";
    out += "max classes per concept: " + std::to_string(max_classes_per_concept) + "\n";
    out += std::string("informative:             ") + (informative ? "yes" : "no") + "\n";
    out += std::string("reference is star:       ") + (reference_is_star ? "yes" : "no") + "\n";
    out += std::string("verdict:                 ") + (accepted() ? "accepted" : "rejected") + "\n";
    for (const auto& r : reasons) out += "  - " + r + "\n";
    return out;
  }
};

namespace reason {
inline constexpr const char* min_languages = "min-languages";
inline constexpr const char* max_languages = "max-languages";
inline constexpr const char* uninformative = "uninformative";
inline constexpr const char* max_classes = "max-classes";
inline constexpr const char* star_reference = "star-reference";
}  // namespace reason

// `reference` is the gold-standard tree already pruned to the dataset.
inline SuitabilityReport check_suitability(const CognateMatrix& m, const Phylogeny& reference,
                                           const SuitabilityThresholds& limits = {}) {
  SuitabilityReport r;
  r.language_count = m.language_count();
  r.max_classes_per_concept = max_classes_per_concept(m);
  r.informative = r.max_classes_per_concept >= 2;
  r.reference_is_star = reference.empty() || is_star(reference);
  if (r.language_count < limits.min_languages) r.reasons.emplace_back(reason::min_languages);
  if (r.language_count > limits.max_languages) r.reasons.emplace_back(reason::max_languages);
  if (!r.informative) r.reasons.emplace_back(reason::uninformative);
  if (r.max_classes_per_concept > limits.max_classes) r.reasons.emplace_back(reason::max_classes);
  if (r.reference_is_star) r.reasons.emplace_back(reason::star_reference);
  return r;
}

}  // namespace cognatree
