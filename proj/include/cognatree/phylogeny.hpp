#pragma once

// Leaf-labelled phylogenies: Newick I/O, pruning, split extraction.
//
// Trees are stored rooted but interpreted unrooted. Canonicalization removes
// every internal node of degree two (including a bifurcating root), so after
// construction each internal node has degree >= 3 in the unrooted sense.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cognatree/error.hpp"

namespace cognatree {

// Fixed-width bitset over a frozen taxon index.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t bits) : words_((bits + 63) / 64, 0), bits_(bits) {}

  std::size_t size() const noexcept { return bits_; }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  Bitset& operator|=(const Bitset& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }

  void flip() {
    for (auto& w : words_) w = ~w;
    if (bits_ % 64 != 0 && !words_.empty()) {
      words_.back() &= (std::uint64_t{1} << (bits_ % 64)) - 1;
    }
  }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_; ++i)
      if (test(i)) out.push_back(i);
    return out;
  }

  friend bool operator==(const Bitset&, const Bitset&) = default;
  friend auto operator<=>(const Bitset& a, const Bitset& b) {
    return a.words_ <=> b.words_;
  }

  std::size_t hash() const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto w : words_) {
      h ^= w;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t bits_ = 0;
};

struct TreeNode {
  int parent = -1;
  std::vector<int> children;
  std::string label;
  std::optional<double> length;  // length of the edge to the parent
};

class Phylogeny {
 public:
  Phylogeny() = default;

  // Builds a canonical tree from an arbitrary rooted node list. Childless
  // nodes are leaves and must carry unique nonempty labels.
  static Phylogeny from_nodes(std::vector<TreeNode> nodes, int root) {
    Phylogeny t;
    t.canonicalize(std::move(nodes), root);
    return t;
  }

  bool empty() const noexcept { return nodes_.empty(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept { return leaf_count_; }
  int root() const noexcept { return nodes_.empty() ? -1 : 0; }
  const TreeNode& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  bool is_leaf(int i) const { return node(i).children.empty(); }

  // Leaf labels, sorted; this is the frozen taxon index used by splits.
  std::vector<std::string> leaf_labels() const {
    std::vector<std::string> out;
    out.reserve(leaf_count_);
    for (const auto& n : nodes_)
      if (n.children.empty()) out.push_back(n.label);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::optional<int> find_leaf(std::string_view label) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].children.empty() && nodes_[i].label == label) return static_cast<int>(i);
    return std::nullopt;
  }

  // Unrooted degree of a node.
  std::size_t degree(int i) const {
    const auto& n = node(i);
    return n.children.size() + (n.parent >= 0 ? 1 : 0);
  }

  // Every internal node has unrooted degree exactly 3. Trees with fewer than
  // four leaves have a single possible topology and count as binary.
  bool is_binary() const {
    if (leaf_count_ < 4) return true;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i].children.empty() && degree(static_cast<int>(i)) != 3) return false;
    }
    return true;
  }

  // Nodes in preorder; index 0 is the root. Reverse iteration is a postorder.
  Phylogeny relabeled(const std::map<std::string, std::string>& mapping) const {
    auto copy = nodes_;
    for (auto& n : copy) {
      if (!n.children.empty()) continue;
      auto it = mapping.find(n.label);
      if (it != mapping.end()) n.label = it->second;
    }
    return from_nodes(std::move(copy), 0);
  }

 private:
  void canonicalize(std::vector<TreeNode> nodes, int root);

  std::vector<TreeNode> nodes_;
  std::size_t leaf_count_ = 0;
};

inline void Phylogeny::canonicalize(std::vector<TreeNode> nodes, int root) {
  nodes_.clear();
  leaf_count_ = 0;
  if (nodes.empty()) throw DataError("tree has no nodes");
  const int count = static_cast<int>(nodes.size());

  // Postorder over the input tree (iterative; trees may be deep).
  std::vector<int> order;
  order.reserve(nodes.size());
  {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      order.push_back(v);
      for (int c : nodes[static_cast<std::size_t>(v)].children) {
        if (c < 0 || c >= count) throw DataError("tree node index out of range");
        stack.push_back(c);
      }
    }
    std::reverse(order.begin(), order.end());
  }

  std::unordered_set<std::string> seen;
  for (int v : order) {
    auto& n = nodes[static_cast<std::size_t>(v)];
    if (!n.children.empty()) continue;
    if (n.label.empty()) throw DataError("leaf without label");
    if (!seen.insert(n.label).second) throw DataError("duplicate leaf label '" + n.label + "'");
  }

  // Suppress unary internal nodes bottom-up.
  for (int v : order) {
    auto& n = nodes[static_cast<std::size_t>(v)];
    for (auto& c : n.children) {
      while (nodes[static_cast<std::size_t>(c)].children.size() == 1) {
        auto& mid = nodes[static_cast<std::size_t>(c)];
        int grandchild = mid.children.front();
        auto& g = nodes[static_cast<std::size_t>(grandchild)];
        if (mid.length || g.length) g.length = mid.length.value_or(0.0) + g.length.value_or(0.0);
        c = grandchild;
      }
    }
  }
  while (nodes[static_cast<std::size_t>(root)].children.size() == 1) {
    root = nodes[static_cast<std::size_t>(root)].children.front();
  }
  nodes[static_cast<std::size_t>(root)].length.reset();

  // A bifurcating root is not a node of the unrooted tree: hang one child
  // below the other.
  auto& r = nodes[static_cast<std::size_t>(root)];
  if (r.children.size() == 2) {
    int a = r.children[0];
    int b = r.children[1];
    int keep = !nodes[static_cast<std::size_t>(a)].children.empty()   ? a
               : !nodes[static_cast<std::size_t>(b)].children.empty() ? b
                                                                      : -1;
    if (keep >= 0) {
      int other = keep == a ? b : a;
      auto& k = nodes[static_cast<std::size_t>(keep)];
      auto& o = nodes[static_cast<std::size_t>(other)];
      if (k.length || o.length) o.length = k.length.value_or(0.0) + o.length.value_or(0.0);
      k.length.reset();
      k.children.push_back(other);
      root = keep;
    }
  }

  // Re-index in preorder, keeping child order.
  std::vector<int> remap(nodes.size(), -1);
  std::vector<std::pair<int, int>> stack{{root, -1}};
  while (!stack.empty()) {
    auto [v, parent] = stack.back();
    stack.pop_back();
    const int id = static_cast<int>(nodes_.size());
    remap[static_cast<std::size_t>(v)] = id;
    TreeNode out;
    out.parent = parent;
    out.label = nodes[static_cast<std::size_t>(v)].label;
    out.length = nodes[static_cast<std::size_t>(v)].length;
    nodes_.push_back(std::move(out));
    if (parent >= 0) nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    const auto& ch = nodes[static_cast<std::size_t>(v)].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, id);
  }
  // Preorder DFS above pushes children in reverse so they pop in order;
  // children vectors were filled in visit order, which is the original order.
  for (const auto& n : nodes_)
    if (n.children.empty()) ++leaf_count_;
}

// ---------------------------------------------------------------------------
// Newick

namespace detail {

class NewickReader {
 public:
  explicit NewickReader(std::string_view text) : text_(text) {}

  Phylogeny read() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError(where(), "empty Newick input");
    std::vector<TreeNode> nodes;
    std::vector<int> open;  // stack of internal nodes whose children are being read
    nodes.emplace_back();
    int current = 0;
    bool after_close = false;
    auto new_child = [&](int parent) {
      nodes.emplace_back();
      int id = static_cast<int>(nodes.size()) - 1;
      nodes[static_cast<std::size_t>(id)].parent = parent;
      nodes[static_cast<std::size_t>(parent)].children.push_back(id);
      return id;
    };

    while (true) {
      skip_ws();
      if (pos_ >= text_.size()) {
        if (!open.empty()) throw ParseError(where(), "unbalanced parentheses");
        break;
      }
      char c = text_[pos_];
      if (c == '(') {
        if (after_close) throw ParseError(where(), "unexpected '('");
        ++pos_;
        open.push_back(current);
        current = new_child(current);
        continue;
      }
      if (c == ',') {
        if (open.empty()) throw ParseError(where(), "',' outside parentheses");
        ++pos_;
        current = new_child(open.back());
        after_close = false;
        continue;
      }
      if (c == ')') {
        if (open.empty()) throw ParseError(where(), "unbalanced parentheses");
        ++pos_;
        current = open.back();
        open.pop_back();
        after_close = true;
        continue;
      }
      if (c == ';') {
        if (!open.empty()) throw ParseError(where(), "unbalanced parentheses");
        ++pos_;
        skip_ws();
        if (pos_ < text_.size()) throw ParseError(where(), "trailing characters after ';'");
        break;
      }
      if (c == ':') {
        ++pos_;
        nodes[static_cast<std::size_t>(current)].length = read_number();
        continue;
      }
      auto& n = nodes[static_cast<std::size_t>(current)];
      if (!n.label.empty()) throw ParseError(where(), "unexpected label text");
      n.label = read_label();
    }
    // A single "(" ... ")" wrapper around the whole input produces a root with
    // the real tree as its only child; canonicalization suppresses it.
    try {
      return Phylogeny::from_nodes(std::move(nodes), 0);
    } catch (const ParseError&) {
      throw;
    } catch (const DataError& e) {
      throw ParseError("newick", e.what());
    }
  }

 private:
  std::string where() const { return "newick offset " + std::to_string(pos_); }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '[') {
        auto end = text_.find(']', pos_);
        if (end == std::string_view::npos) throw ParseError(where(), "unterminated comment");
        pos_ = end + 1;
      } else {
        break;
      }
    }
  }

  std::string read_label() {
    std::string out;
    if (text_[pos_] == '\'') {
      ++pos_;
      while (true) {
        if (pos_ >= text_.size()) throw ParseError(where(), "unterminated quoted label");
        char c = text_[pos_++];
        if (c == '\'') {
          if (pos_ < text_.size() && text_[pos_] == '\'') {
            out.push_back('\'');
            ++pos_;
          } else {
            break;
          }
        } else {
          out.push_back(c);
        }
      }
      return out;
    }
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' || c == '[' ||
          std::isspace(static_cast<unsigned char>(c)))
        break;
      out.push_back(c);
      ++pos_;
    }
    return out;
  }

  double read_number() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' ||
          c == 'e' || c == 'E')
        ++pos_;
      else
        break;
    }
    std::string token(text_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return v;
    } catch (const std::exception&) {
      throw ParseError(where(), "bad branch length '" + token + "'");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline bool newick_safe(std::string_view label) {
  if (label.empty()) return false;
  for (char c : label) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',' ||
        c == ':' || c == ';' || c == '[' || c == ']' || c == '\'')
      return false;
  }
  return true;
}

inline std::string quote_label(std::string_view label) {
  if (newick_safe(label)) return std::string(label);
  std::string out = "'";
  for (char c : label) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

}  // namespace detail

inline Phylogeny parse_newick(std::string_view text) {
  return detail::NewickReader(text).read();
}

inline std::string to_newick(const Phylogeny& t, bool with_lengths = true) {
  if (t.empty()) return ";";
  std::string out;
  // (node, next child position)
  std::vector<std::pair<int, std::size_t>> stack{{t.root(), 0}};
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    const auto& n = t.node(v);
    if (!n.children.empty() && next < n.children.size()) {
      out.push_back(next == 0 ? '(' : ',');
      int child = n.children[next++];
      stack.emplace_back(child, 0);
      continue;
    }
    if (!n.children.empty()) out.push_back(')');
    if (!n.label.empty()) out += detail::quote_label(n.label);
    if (with_lengths && n.length) {
      std::ostringstream os;
      os.precision(17);
      os << ':' << *n.length;
      out += os.str();
    }
    stack.pop_back();
  }
  out.push_back(';');
  return out;
}

inline Phylogeny read_newick_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tree file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_newick(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path, e.what());
  }
}

// One tree per nonempty line.
inline std::vector<Phylogeny> read_newick_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tree file '" + path + "'");
  std::vector<Phylogeny> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_newick(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno), e.what());
    }
  }
  return out;
}

inline void write_newick_file(const Phylogeny& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tree file '" + path + "'");
  out << to_newick(t) << '\n';
}

// ---------------------------------------------------------------------------
// Pruning

inline Phylogeny prune_to(const Phylogeny& t, const std::set<std::string>& keep) {
  if (keep.empty()) throw DataError("prune_to: empty taxon set");
  for (const auto& label : keep)
    if (!t.find_leaf(label)) throw DataError("prune_to: unknown taxon '" + label + "'");

  const auto& nodes = t.nodes();
  std::vector<bool> kept(nodes.size(), false);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const auto& n = nodes[i];
    if (n.children.empty()) {
      kept[i] = keep.count(n.label) > 0;
    } else {
      for (int c : n.children) kept[i] = kept[i] || kept[static_cast<std::size_t>(c)];
    }
  }

  std::vector<TreeNode> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out[i].parent = nodes[i].parent;
    out[i].label = nodes[i].label;
    out[i].length = nodes[i].length;
    for (int c : nodes[i].children)
      if (kept[static_cast<std::size_t>(c)]) out[i].children.push_back(c);
  }
  return Phylogeny::from_nodes(std::move(out), t.root());
}

// ---------------------------------------------------------------------------
// Splits

struct SplitSet {
  std::vector<std::string> taxa;  // frozen index: sorted leaf labels
  std::vector<Bitset> splits;     // sorted, canonical orientation

  std::size_t size() const noexcept { return splits.size(); }
  bool contains(const Bitset& b) const {
    return std::binary_search(splits.begin(), splits.end(), b);
  }
};

// Non-trivial bipartitions induced by internal edges. Each split is stored as
// the side that does not contain taxon 0 (the lexicographically smallest).
inline SplitSet splits(const Phylogeny& t) {
  SplitSet out;
  out.taxa = t.leaf_labels();
  const std::size_t n = out.taxa.size();
  if (t.empty()) return out;
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(out.taxa[i], i);

  const auto& nodes = t.nodes();
  std::vector<Bitset> below(nodes.size(), Bitset(n));
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const auto& v = nodes[i];
    if (v.children.empty()) {
      below[i].set(index.at(v.label));
      continue;
    }
    for (int c : v.children) below[i] |= below[static_cast<std::size_t>(c)];
    if (v.parent < 0) continue;
    const std::size_t size = below[i].count();
    if (size < 2 || n - size < 2) continue;
    Bitset side = below[i];
    if (side.test(0)) side.flip();
    out.splits.push_back(std::move(side));
  }
  std::sort(out.splits.begin(), out.splits.end());
  out.splits.erase(std::unique(out.splits.begin(), out.splits.end()), out.splits.end());
  return out;
}

inline bool is_star(const Phylogeny& t) { return splits(t).size() == 0; }

}  // namespace cognatree
