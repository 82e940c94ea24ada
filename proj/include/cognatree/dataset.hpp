#pragma once

// Cognate wordlists: CLDF directories and the flat judgment TSV fixture
// format, normalized into a CognateDataset.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cognatree/error.hpp"

namespace cognatree {

struct LanguageRecord {
  std::string id;
  std::string name;
  std::optional<std::string> glottocode;

  friend bool operator==(const LanguageRecord&, const LanguageRecord&) = default;
};

struct Judgment {
  std::string language;
  std::string concept_id;
  std::string cognate_class;  // scoped to concept_id

  friend bool operator==(const Judgment&, const Judgment&) = default;
  friend auto operator<=>(const Judgment&, const Judgment&) = default;
};

struct CognateDataset {
  std::vector<LanguageRecord> languages;
  std::vector<std::string> concepts;
  std::vector<Judgment> judgments;

  friend bool operator==(const CognateDataset&, const CognateDataset&) = default;

  const LanguageRecord* find_language(std::string_view id) const {
    for (const auto& l : languages)
      if (l.id == id) return &l;
    return nullptr;
  }
};

// 4 lowercase letters/digits followed by 4 digits, e.g. "stan1293".
inline bool is_glottocode(std::string_view s) {
  if (s.size() != 8) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    char c = s[i];
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))) return false;
  }
  for (std::size_t i = 4; i < 8; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

namespace detail {

struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line of each row, for diagnostics

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
  std::string where(std::size_t row) const { return path + ":" + std::to_string(lines[row]); }
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  if (s.rfind("\xEF\xBB\xBF", 0) == 0) s.erase(0, 3);
  return s;
}

// RFC 4180 CSV (quoted fields, doubled quotes, embedded newlines).
inline Table parse_csv(const std::string& text, const std::string& path) {
  Table t;
  t.path = path;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t row_line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    bool blank = row.size() == 1 && row[0].empty();
    if (!blank) {
      if (t.header.empty()) {
        t.header = std::move(row);
      } else {
        if (row.size() != t.header.size())
          throw ParseError(path + ":" + std::to_string(row_line),
                           "expected " + std::to_string(t.header.size()) + " columns, found " +
                               std::to_string(row.size()));
        t.rows.push_back(std::move(row));
        t.lines.push_back(row_line);
      }
    }
    row.clear();
    row_line = line;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // tolerated before \n
    } else if (c == '\n') {
      ++line;
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw ParseError(path + ":" + std::to_string(row_line), "unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return t;
}

// Column roles resolved either from the metadata descriptor (propertyUrl) or
// from the conventional CLDF column names.
struct TableSpec {
  std::filesystem::path file;
  std::map<std::string, std::string> role_to_column;
};

inline std::string term_of(const std::string& url) {
  auto pos = url.find_last_of("#/");
  return pos == std::string::npos ? url : url.substr(pos + 1);
}

inline std::optional<std::filesystem::path> find_metadata(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) return std::nullopt;
  std::vector<std::filesystem::path> found;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto name = entry.path().filename().string();
    if (name.size() >= 14 && name.ends_with("-metadata.json")) found.push_back(entry.path());
  }
  if (found.empty()) return std::nullopt;
  std::sort(found.begin(), found.end());
  return found.front();
}

inline std::map<std::string, TableSpec> tables_from_metadata(const std::filesystem::path& meta) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(meta));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(meta.string(), std::string("invalid metadata JSON: ") + e.what());
  }
  std::map<std::string, TableSpec> out;
  if (!j.contains("tables") || !j["tables"].is_array())
    throw ParseError(meta.string(), "metadata has no 'tables' array");
  for (const auto& table : j["tables"]) {
    std::string kind = term_of(table.value("dc:conformsTo", ""));
    if (kind != "FormTable" && kind != "CognateTable" && kind != "LanguageTable") continue;
    TableSpec spec;
    spec.file = meta.parent_path() / table.value("url", "");
    if (table.contains("tableSchema") && table["tableSchema"].contains("columns")) {
      for (const auto& col : table["tableSchema"]["columns"]) {
        std::string name = col.value("name", "");
        std::string prop = col.value("propertyUrl", "");
        if (!prop.empty()) spec.role_to_column[term_of(prop)] = name;
      }
    }
    out[kind] = std::move(spec);
  }
  return out;
}

inline std::size_t require_column(const Table& t, const std::map<std::string, std::string>& roles,
                                  const std::string& role, const std::string& fallback) {
  auto it = roles.find(role);
  const std::string& name = it != roles.end() ? it->second : fallback;
  auto idx = t.column(name);
  if (!idx) throw ParseError(t.path + ":1", "missing required column '" + name + "'");
  return *idx;
}

inline std::optional<std::size_t> optional_column(const Table& t,
                                                  const std::map<std::string, std::string>& roles,
                                                  const std::string& role,
                                                  const std::string& fallback) {
  auto it = roles.find(role);
  return t.column(it != roles.end() ? it->second : fallback);
}

// Incremental builder enforcing first-appearance order and deduplication.
class DatasetBuilder {
 public:
  void add_language(LanguageRecord rec, const std::string& where) {
    if (rec.glottocode && rec.glottocode->empty()) rec.glottocode.reset();
    if (rec.glottocode && !is_glottocode(*rec.glottocode))
      throw ParseError(where, "malformed glottocode '" + *rec.glottocode + "'");
    auto it = language_index_.find(rec.id);
    if (it != language_index_.end()) {
      auto& existing = data_.languages[it->second];
      if (rec.glottocode && existing.glottocode && *rec.glottocode != *existing.glottocode)
        throw ParseError(where, "conflicting glottocodes for language '" + rec.id + "'");
      if (!existing.glottocode) existing.glottocode = rec.glottocode;
      return;
    }
    language_index_.emplace(rec.id, data_.languages.size());
    data_.languages.push_back(std::move(rec));
  }

  void add_concept(const std::string& concept_id) {
    if (concept_index_.emplace(concept_id, data_.concepts.size()).second)
      data_.concepts.push_back(concept_id);
  }

  void add_judgment(Judgment j) {
    if (seen_.insert(j).second) data_.judgments.push_back(std::move(j));
  }

  CognateDataset take() { return std::move(data_); }

 private:
  CognateDataset data_;
  std::unordered_map<std::string, std::size_t> language_index_;
  std::unordered_map<std::string, std::size_t> concept_index_;
  std::set<Judgment> seen_;
};

}  // namespace detail

// Reads the FormTable/CognateTable/LanguageTable subset of a CLDF dataset.
// `root` may be the CLDF directory itself or a repository containing `cldf/`.
inline CognateDataset load_cldf(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::path dir = root;
  if (!detail::find_metadata(dir) && !fs::exists(dir / "forms.csv") && fs::is_directory(root / "cldf"))
    dir = root / "cldf";
  if (!fs::is_directory(dir)) throw IoError("not a directory: '" + root.string() + "'");

  std::map<std::string, detail::TableSpec> specs;
  if (auto meta = detail::find_metadata(dir)) specs = detail::tables_from_metadata(*meta);
  auto spec_for = [&](const std::string& kind, const char* conventional) {
    auto it = specs.find(kind);
    if (it != specs.end()) return it->second;
    detail::TableSpec s;
    s.file = dir / conventional;
    return s;
  };
  const auto form_spec = spec_for("FormTable", "forms.csv");
  const auto cognate_spec = spec_for("CognateTable", "cognates.csv");
  const auto language_spec = spec_for("LanguageTable", "languages.csv");
  for (const auto* s : {&form_spec, &cognate_spec, &language_spec})
    if (!fs::exists(s->file)) throw IoError("missing required table '" + s->file.string() + "'");

  auto load = [](const detail::TableSpec& s) {
    return detail::parse_csv(detail::read_file(s.file), s.file.string());
  };
  const auto languages = load(language_spec);
  const auto forms = load(form_spec);
  const auto cognates = load(cognate_spec);

  const auto lang_id = detail::require_column(languages, language_spec.role_to_column, "id", "ID");
  const auto lang_name = detail::optional_column(languages, language_spec.role_to_column, "name", "Name");
  const auto lang_glotto =
      detail::optional_column(languages, language_spec.role_to_column, "glottocode", "Glottocode");
  std::map<std::string, LanguageRecord> known_languages;
  std::vector<std::string> language_order;
  for (std::size_t r = 0; r < languages.rows.size(); ++r) {
    const auto& row = languages.rows[r];
    LanguageRecord rec;
    rec.id = row[lang_id];
    if (rec.id.empty()) throw ParseError(languages.where(r), "empty language ID");
    rec.name = lang_name ? row[*lang_name] : rec.id;
    if (rec.name.empty()) rec.name = rec.id;
    if (lang_glotto && !row[*lang_glotto].empty()) rec.glottocode = row[*lang_glotto];
    if (rec.glottocode && !is_glottocode(*rec.glottocode))
      throw ParseError(languages.where(r), "malformed glottocode '" + *rec.glottocode + "'");
    if (!known_languages.emplace(rec.id, rec).second)
      throw ParseError(languages.where(r), "duplicate language ID '" + rec.id + "'");
    language_order.push_back(rec.id);
  }

  const auto form_id = detail::require_column(forms, form_spec.role_to_column, "id", "ID");
  const auto form_lang =
      detail::require_column(forms, form_spec.role_to_column, "languageReference", "Language_ID");
  const auto form_param =
      detail::require_column(forms, form_spec.role_to_column, "parameterReference", "Parameter_ID");
  struct FormRef {
    std::string language;
    std::string concept_id;
  };
  std::unordered_map<std::string, FormRef> form_refs;
  std::set<std::string> languages_with_forms;
  detail::DatasetBuilder builder;
  for (std::size_t r = 0; r < forms.rows.size(); ++r) {
    const auto& row = forms.rows[r];
    if (row[form_id].empty()) throw ParseError(forms.where(r), "empty form ID");
    if (!known_languages.count(row[form_lang]))
      throw ParseError(forms.where(r), "form references unknown language '" + row[form_lang] + "'");
    if (row[form_param].empty()) throw ParseError(forms.where(r), "form without parameter reference");
    if (!form_refs.emplace(row[form_id], FormRef{row[form_lang], row[form_param]}).second)
      throw ParseError(forms.where(r), "duplicate form ID '" + row[form_id] + "'");
    languages_with_forms.insert(row[form_lang]);
    builder.add_concept(row[form_param]);
  }
  for (const auto& id : language_order)
    if (languages_with_forms.count(id)) builder.add_language(known_languages.at(id), languages.path);

  const auto cog_form =
      detail::require_column(cognates, cognate_spec.role_to_column, "formReference", "Form_ID");
  const auto cog_set = detail::require_column(cognates, cognate_spec.role_to_column,
                                              "cognatesetReference", "Cognateset_ID");
  for (std::size_t r = 0; r < cognates.rows.size(); ++r) {
    const auto& row = cognates.rows[r];
    if (row[cog_set].empty()) continue;
    auto it = form_refs.find(row[cog_form]);
    if (it == form_refs.end())
      throw ParseError(cognates.where(r), "cognate references unknown form '" + row[cog_form] + "'");
    builder.add_judgment({it->second.language, it->second.concept_id, row[cog_set]});
  }
  return builder.take();
}

// Fixture format: header `language<TAB>concept<TAB>cognate_class[<TAB>glottocode]`.
inline CognateDataset load_judgment_tsv(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ":1", "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool with_glottocode = line == "language\tconcept\tcognate_class\tglottocode";
  if (!with_glottocode && line != "language\tconcept\tcognate_class")
    throw ParseError(path.string() + ":1", "malformed header '" + line + "'");
  const std::size_t columns = with_glottocode ? 4 : 3;

  detail::DatasetBuilder builder;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != columns)
      throw ParseError(where, "expected " + std::to_string(columns) + " fields, found " +
                                  std::to_string(fields.size()));
    for (std::size_t i = 0; i < 3; ++i)
      if (fields[i].empty()) throw ParseError(where, "empty field");
    LanguageRecord rec{fields[0], fields[0], std::nullopt};
    if (with_glottocode && !fields[3].empty()) rec.glottocode = fields[3];
    builder.add_language(std::move(rec), where);
    builder.add_concept(fields[1]);
    builder.add_judgment({fields[0], fields[1], fields[2]});
  }
  return builder.take();
}

inline void write_judgment_tsv(const CognateDataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  bool with_glottocode = std::any_of(d.languages.begin(), d.languages.end(),
                                     [](const auto& l) { return l.glottocode.has_value(); });
  out << "language\tconcept\tcognate_class" << (with_glottocode ? "\tglottocode" : "") << '\n';
  for (const auto& j : d.judgments) {
    out << j.language << '\t' << j.concept_id << '\t' << j.cognate_class;
    if (with_glottocode) {
      const auto* lang = d.find_language(j.language);
      out << '\t' << (lang && lang->glottocode ? *lang->glottocode : "");
    }
    out << '\n';
  }
}

// Loads either a CLDF directory or a judgment TSV file.
inline CognateDataset load_dataset(const std::filesystem::path& input) {
  if (std::filesystem::is_directory(input)) return load_cldf(input);
  return load_judgment_tsv(input);
}

}  // namespace cognatree
