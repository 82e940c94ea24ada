#pragma once

// Character-matrix encodings of a cognate matrix and their PHYLIP / CATG
// serializations.
//
//   bin     presence/absence, one column per (concept, class), symbols 0 1 -
//   multi   one column per concept, one symbol per class; single-state only
//   pbin    bin layout, member columns (1 - 1/k, 1/k), missing (1, 1)
//   pmulti  multi layout, 1/k on each member class, missing all ones

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cognatree/cognate_matrix.hpp"
#include "cognatree/error.hpp"

namespace cognatree {

enum class Encoding { bin, multi, pbin, pmulti };

inline const char* to_string(Encoding e) {
  switch (e) {
    case Encoding::bin: return "bin";
    case Encoding::multi: return "multi";
    case Encoding::pbin: return "pbin";
    case Encoding::pmulti: return "pmulti";
  }
  return "?";
}

inline Encoding parse_encoding(std::string_view s) {
  if (s == "bin") return Encoding::bin;
  if (s == "multi") return Encoding::multi;
  if (s == "pbin") return Encoding::pbin;
  if (s == "pmulti") return Encoding::pmulti;
  throw DataError("unknown encoding '" + std::string(s) + "'");
}

// Symbols for multi-valued matrices, in state order.
inline constexpr std::string_view kMultiSymbols =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz+=";
inline constexpr std::size_t kMaxStates = kMultiSymbols.size();
inline constexpr char kMissing = '-';

struct ConceptSites {
  std::string concept_id;
  std::vector<std::string> classes;  // canonical order; position = state index
  std::size_t first_column = 0;      // binary layouts only
};

struct SiteLayout {
  bool binary = true;
  std::vector<ConceptSites> concepts;
  std::size_t site_count = 0;
  std::size_t state_count = 2;  // alphabet size s

  static SiteLayout from(const CognateMatrix& m, bool binary) {
    SiteLayout layout;
    layout.binary = binary;
    std::size_t column = 0;
    std::size_t widest = 0;
    for (std::size_t c = 0; c < m.concept_count(); ++c) {
      ConceptSites cs{m.concepts()[c], m.classes_of(c), column};
      widest = std::max(widest, cs.classes.size());
      column += binary ? cs.classes.size() : 1;
      layout.concepts.push_back(std::move(cs));
    }
    layout.site_count = column;
    layout.state_count = binary ? 2 : widest;
    return layout;
  }

  std::size_t state_of(std::size_t concept_idx, const std::string& cls) const {
    const auto& v = concepts.at(concept_idx).classes;
    auto it = std::lower_bound(v.begin(), v.end(), cls);
    if (it == v.end() || *it != cls) throw DataError("class '" + cls + "' not in layout");
    return static_cast<std::size_t>(it - v.begin());
  }

  friend bool operator==(const SiteLayout&, const SiteLayout&) = default;
};

struct DeterministicMatrix {
  std::vector<std::string> taxa;
  SiteLayout layout;
  std::vector<std::string> rows;  // one symbol per site

  std::size_t site_count() const { return layout.site_count; }
};

struct ProbabilisticMatrix {
  std::vector<std::string> taxa;
  SiteLayout layout;
  std::vector<double> values;  // [taxon][site][state]

  std::size_t site_count() const { return layout.site_count; }
  std::size_t state_count() const { return layout.state_count; }

  const double* at(std::size_t taxon, std::size_t site) const {
    return values.data() + (taxon * site_count() + site) * state_count();
  }
  double* at(std::size_t taxon, std::size_t site) {
    return values.data() + (taxon * site_count() + site) * state_count();
  }
};

namespace detail {

inline std::vector<std::string> taxon_ids(const CognateMatrix& m) {
  std::vector<std::string> out;
  out.reserve(m.language_count());
  for (const auto& l : m.languages()) out.push_back(l.id);
  return out;
}

inline void require_state_limit(const SiteLayout& layout) {
  if (layout.state_count > kMaxStates)
    throw DataError("multi-valued encoding is limited to " + std::to_string(kMaxStates) +
                    " states; dataset needs " + std::to_string(layout.state_count));
}

}  // namespace detail

inline DeterministicMatrix build_bin(const CognateMatrix& m) {
  DeterministicMatrix a{detail::taxon_ids(m), SiteLayout::from(m, true), {}};
  for (std::size_t l = 0; l < m.language_count(); ++l) {
    std::string row(a.site_count(), '0');
    for (std::size_t c = 0; c < m.concept_count(); ++c) {
      const auto& sites = a.layout.concepts[c];
      const auto& cell = m.cell(l, c);
      if (!cell) {
        std::fill_n(row.begin() + static_cast<std::ptrdiff_t>(sites.first_column),
                    sites.classes.size(), kMissing);
        continue;
      }
      for (const auto& cls : *cell) row[sites.first_column + a.layout.state_of(c, cls)] = '1';
    }
    a.rows.push_back(std::move(row));
  }
  return a;
}

inline DeterministicMatrix build_multi(const CognateMatrix& m) {
  DeterministicMatrix a{detail::taxon_ids(m), SiteLayout::from(m, false), {}};
  detail::require_state_limit(a.layout);
  for (std::size_t l = 0; l < m.language_count(); ++l) {
    std::string row(a.site_count(), kMissing);
    for (std::size_t c = 0; c < m.concept_count(); ++c) {
      const auto& cell = m.cell(l, c);
      if (!cell) continue;
      if (cell->size() > 1)
        throw DataError("multi-valued matrix invalid: M(" + m.languages()[l].id + ", " +
                        m.concepts()[c] + ") is a multi-state cell");
      row[c] = kMultiSymbols[a.layout.state_of(c, cell->front())];
    }
    a.rows.push_back(std::move(row));
  }
  return a;
}

inline ProbabilisticMatrix build_pbin(const CognateMatrix& m) {
  ProbabilisticMatrix a{detail::taxon_ids(m), SiteLayout::from(m, true), {}};
  a.values.assign(a.taxa.size() * a.site_count() * 2, 0.0);
  for (std::size_t l = 0; l < m.language_count(); ++l) {
    for (std::size_t c = 0; c < m.concept_count(); ++c) {
      const auto& sites = a.layout.concepts[c];
      const auto& cell = m.cell(l, c);
      for (std::size_t s = 0; s < sites.classes.size(); ++s) {
        double* v = a.at(l, sites.first_column + s);
        if (!cell) {
          v[0] = v[1] = 1.0;
        } else {
          v[0] = 1.0;
          v[1] = 0.0;
        }
      }
      if (!cell) continue;
      const double p = 1.0 / static_cast<double>(cell->size());
      for (const auto& cls : *cell) {
        double* v = a.at(l, sites.first_column + a.layout.state_of(c, cls));
        v[0] = 1.0 - p;
        v[1] = p;
      }
    }
  }
  return a;
}

inline ProbabilisticMatrix build_pmulti(const CognateMatrix& m) {
  ProbabilisticMatrix a{detail::taxon_ids(m), SiteLayout::from(m, false), {}};
  detail::require_state_limit(a.layout);
  const std::size_t s = a.state_count();
  a.values.assign(a.taxa.size() * a.site_count() * s, 0.0);
  for (std::size_t l = 0; l < m.language_count(); ++l) {
    for (std::size_t c = 0; c < m.concept_count(); ++c) {
      double* v = a.at(l, c);
      const auto& cell = m.cell(l, c);
      if (!cell) {
        std::fill_n(v, s, 1.0);
        continue;
      }
      const double p = 1.0 / static_cast<double>(cell->size());
      for (const auto& cls : *cell) v[a.layout.state_of(c, cls)] = p;
    }
  }
  return a;
}

// Any character outside [A-Za-z0-9_] becomes '_'; collisions get "_2", "_3", ...
inline std::vector<std::string> sanitize_labels(const std::vector<std::string>& labels) {
  std::vector<std::string> out;
  std::set<std::string> used;
  for (const auto& raw : labels) {
    std::string s = raw;
    for (char& ch : s) {
      const bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') ||
                      (ch >= '0' && ch <= '9') || ch == '_';
      if (!ok) ch = '_';
    }
    if (s.empty()) s = "_";
    std::string candidate = s;
    for (int suffix = 2; used.count(candidate); ++suffix) candidate = s + "_" + std::to_string(suffix);
    used.insert(candidate);
    out.push_back(std::move(candidate));
  }
  return out;
}

inline std::string to_phylip(const DeterministicMatrix& a) {
  std::string out = std::to_string(a.taxa.size()) + " " + std::to_string(a.site_count()) + "\n";
  const auto labels = sanitize_labels(a.taxa);
  for (std::size_t i = 0; i < a.taxa.size(); ++i) out += labels[i] + " " + a.rows[i] + "\n";
  return out;
}

namespace detail {

inline bool is_missing_vector(const double* v, std::size_t s) {
  return std::all_of(v, v + s, [](double x) { return x == 1.0; });
}

inline char state_symbol(bool binary, std::size_t state) {
  return binary ? static_cast<char>('0' + state) : kMultiSymbols[state];
}

// Highest-probability state; ties go to the lowest state index.
inline char consensus_symbol(const double* v, std::size_t s, bool binary) {
  if (s > 1 && is_missing_vector(v, s)) return kMissing;
  std::size_t best = 0;
  for (std::size_t i = 1; i < s; ++i)
    if (v[i] > v[best]) best = i;
  return state_symbol(binary, best);
}

inline void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace detail

inline std::string to_catg(const ProbabilisticMatrix& a) {
  const std::size_t n = a.taxa.size();
  const std::size_t s = a.state_count();
  std::string out = std::to_string(n) + " " + std::to_string(a.site_count()) + "\n";
  const auto labels = sanitize_labels(a.taxa);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += labels[i];
  }
  out += '\n';
  char buf[32];
  for (std::size_t site = 0; site < a.site_count(); ++site) {
    for (std::size_t t = 0; t < n; ++t)
      out += detail::consensus_symbol(a.at(t, site), s, a.layout.binary);
    for (std::size_t t = 0; t < n; ++t) {
      out += '\t';
      const double* v = a.at(t, site);
      for (std::size_t k = 0; k < s; ++k) {
        if (k) out += ',';
        std::snprintf(buf, sizeof buf, "%.6f", v[k]);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

inline void write_phylip(const DeterministicMatrix& a, const std::string& path) {
  detail::write_text(to_phylip(a), path);
}

inline void write_catg(const ProbabilisticMatrix& a, const std::string& path) {
  detail::write_text(to_catg(a), path);
}

// Plain matrices as read back from disk (labels as written, no layout).
struct PhylipData {
  std::vector<std::string> taxa;
  std::vector<std::string> rows;
};

struct CatgData {
  std::vector<std::string> taxa;
  std::size_t site_count = 0;
  std::size_t state_count = 0;
  std::vector<std::string> consensus;  // per site, one char per taxon
  std::vector<double> values;          // [taxon][site][state]
};

namespace detail {

inline std::pair<std::size_t, std::size_t> read_dimensions(const std::string& line,
                                                           const std::string& where) {
  std::istringstream is(line);
  long long a = -1, b = -1;
  if (!(is >> a >> b) || a < 0 || b < 0) throw ParseError(where, "bad dimension line '" + line + "'");
  return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
}

}  // namespace detail

inline PhylipData parse_phylip(const std::string& text, const std::string& path = "phylip") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1", "empty file");
  auto [ntaxa, nsites] = detail::read_dimensions(line, path + ":1");
  PhylipData out;
  for (std::size_t i = 0; i < ntaxa; ++i) {
    if (!std::getline(in, line)) throw ParseError(path, "fewer rows than declared");
    const std::string where = path + ":" + std::to_string(i + 2);
    std::istringstream row(line);
    std::string label, seq;
    if (!(row >> label >> seq)) throw ParseError(where, "malformed row");
    if (seq.size() != nsites) throw ParseError(where, "row length differs from site count");
    out.taxa.push_back(std::move(label));
    out.rows.push_back(std::move(seq));
  }
  return out;
}

inline CatgData parse_catg(const std::string& text, const std::string& path = "catg") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1", "empty file");
  auto [ntaxa, nsites] = detail::read_dimensions(line, path + ":1");
  CatgData out;
  out.site_count = nsites;
  if (!std::getline(in, line)) throw ParseError(path + ":2", "missing taxon line");
  {
    std::istringstream is(line);
    std::string label;
    while (is >> label) out.taxa.push_back(label);
  }
  if (out.taxa.size() != ntaxa) throw ParseError(path + ":2", "taxon count differs from header");
  std::vector<std::vector<double>> per_site;
  for (std::size_t site = 0; site < nsites; ++site) {
    const std::string where = path + ":" + std::to_string(site + 3);
    if (!std::getline(in, line)) throw ParseError(where, "fewer site lines than declared");
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != ntaxa + 1) throw ParseError(where, "expected consensus plus one tuple per taxon");
    if (fields[0].size() != ntaxa) throw ParseError(where, "consensus length differs from taxon count");
    out.consensus.push_back(fields[0]);
    std::vector<double> site_values;
    for (std::size_t t = 0; t < ntaxa; ++t) {
      std::size_t states = 0;
      std::istringstream tuple(fields[t + 1]);
      std::string number;
      while (std::getline(tuple, number, ',')) {
        try {
          site_values.push_back(std::stod(number));
        } catch (const std::exception&) {
          throw ParseError(where, "bad probability '" + number + "'");
        }
        ++states;
      }
      if (out.state_count == 0) out.state_count = states;
      if (states != out.state_count) throw ParseError(where, "inconsistent tuple length");
    }
    per_site.push_back(std::move(site_values));
  }
  out.values.assign(ntaxa * nsites * out.state_count, 0.0);
  for (std::size_t site = 0; site < nsites; ++site)
    for (std::size_t t = 0; t < ntaxa; ++t)
      for (std::size_t k = 0; k < out.state_count; ++k)
        out.values[(t * nsites + site) * out.state_count + k] = per_site[site][t * out.state_count + k];
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cognatree
