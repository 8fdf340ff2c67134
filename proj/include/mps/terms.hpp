// Regular terms: processes and global types stored as rooted graphs.
//
// Every term lives in an immutable node pool. Pools built through the
// factories below are minimized (bisimilar nodes merged), so two nodes of the
// same minimized pool are equal as regular trees iff their indices agree.
#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace mps {

using Label = std::string;
using Participant = std::string;
using ParticipantSet = std::set<Participant>;

enum class Kind : unsigned char { End, Out, In };

struct Branch {
  Label label;
  int target = -1;
  friend bool operator==(const Branch&, const Branch&) = default;
};

struct ProcNode {
  Kind kind = Kind::End;
  Participant peer;
  std::vector<Branch> branches;
};

struct GlobNode {
  Kind kind = Kind::End;
  Participant sender;
  Participant receiver;
  std::vector<Branch> branches;

  const Participant& player() const { return kind == Kind::Out ? sender : receiver; }
};

class TermError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structural part of a node without its children; used by partition refinement.
std::string node_signature(const ProcNode& n);
std::string node_signature(const GlobNode& n);

template <class Node>
class Pool {
 public:
  Pool(std::vector<Node> nodes, bool minimal) : nodes_(std::move(nodes)), minimal_(minimal) {}

  const Node& operator[](int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  bool minimal() const { return minimal_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  // Players of the subterm rooted at each node (global pools only).
  const std::vector<ParticipantSet>& players_table() const;

 private:
  std::vector<Node> nodes_;
  bool minimal_;
  mutable std::once_flag players_once_;
  mutable std::vector<ParticipantSet> players_;
};

template <class Node>
class Term {
 public:
  using PoolPtr = std::shared_ptr<const Pool<Node>>;

  Term() = default;
  Term(PoolPtr pool, int root) : pool_(std::move(pool)), root_(root) {}

  const Node& node() const { return (*pool_)[root_]; }
  const Node& at(int i) const { return (*pool_)[i]; }
  Kind kind() const { return node().kind; }
  int root() const { return root_; }
  const PoolPtr& pool() const { return pool_; }
  bool valid() const { return pool_ != nullptr; }

  Term at_node(int i) const { return Term(pool_, i); }
  Term child(std::size_t i) const { return Term(pool_, node().branches[i].target); }

  // Index of the branch carrying `label`, if any.
  std::optional<std::size_t> find_branch(const Label& label) const {
    const auto& bs = node().branches;
    for (std::size_t i = 0; i < bs.size(); ++i)
      if (bs[i].label == label) return i;
    return std::nullopt;
  }

  bool same_node(const Term& o) const { return pool_ == o.pool_ && root_ == o.root_; }

 private:
  PoolPtr pool_;
  int root_ = 0;
};

using Process = Term<ProcNode>;
using Global = Term<GlobNode>;
using ProcPool = Pool<ProcNode>;
using GlobPool = Pool<GlobNode>;

// Sorts branches by label and checks the grammar side conditions: nonempty
// choices, distinct labels, sender distinct from receiver, targets in range.
void validate_nodes(std::vector<ProcNode>& nodes);
void validate_nodes(std::vector<GlobNode>& nodes);

// Bisimulation quotient (Moore refinement). Returns, for every input node, the
// index of its class; classes are numbered by first occurrence.
template <class Node>
std::vector<int> bisimulation_classes(const std::vector<Node>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<int> cls(n);
  {
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, fresh] = ids.emplace(node_signature(nodes[i]), static_cast<int>(ids.size()));
      cls[i] = it->second;
    }
  }
  std::size_t count = 0;
  while (true) {
    std::map<std::pair<int, std::vector<int>>, int> ids;
    std::vector<int> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<int> kids;
      kids.reserve(nodes[i].branches.size());
      for (const auto& b : nodes[i].branches) kids.push_back(cls[static_cast<std::size_t>(b.target)]);
      auto [it, fresh] = ids.emplace(std::make_pair(cls[i], std::move(kids)), static_cast<int>(ids.size()));
      next[i] = it->second;
    }
    cls.swap(next);
    if (ids.size() == count) break;
    count = ids.size();
  }
  return cls;
}

// Nodes reachable from `roots`, in depth-first discovery order.
template <class Node>
std::vector<int> reachable_nodes(const std::vector<Node>& nodes, const std::vector<int>& roots) {
  std::vector<char> seen(nodes.size(), 0);
  std::vector<int> order;
  std::vector<int> stack(roots.rbegin(), roots.rend());
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(v)]) continue;
    seen[static_cast<std::size_t>(v)] = 1;
    order.push_back(v);
    const auto& bs = nodes[static_cast<std::size_t>(v)].branches;
    for (auto it = bs.rbegin(); it != bs.rend(); ++it)
      if (!seen[static_cast<std::size_t>(it->target)]) stack.push_back(it->target);
  }
  return order;
}

// Validates, drops nodes unreachable from `roots` and merges bisimilar nodes.
// `mapping` (if given) receives old index -> new index, -1 when dropped.
template <class Node>
std::shared_ptr<const Pool<Node>> make_pool(std::vector<Node> nodes, const std::vector<int>& roots,
                                            std::vector<int>* mapping = nullptr) {
  validate_nodes(nodes);
  for (int r : roots)
    if (r < 0 || r >= static_cast<int>(nodes.size())) throw TermError("root out of range");
  std::vector<int> order = reachable_nodes(nodes, roots);
  std::vector<int> local(nodes.size(), -1);
  std::vector<Node> sub;
  sub.reserve(order.size());
  for (int v : order) {
    local[static_cast<std::size_t>(v)] = static_cast<int>(sub.size());
    sub.push_back(nodes[static_cast<std::size_t>(v)]);
  }
  for (auto& nd : sub)
    for (auto& b : nd.branches) b.target = local[static_cast<std::size_t>(b.target)];
  std::vector<int> cls = bisimulation_classes(sub);
  int nclasses = 0;
  for (int c : cls) nclasses = std::max(nclasses, c + 1);
  std::vector<Node> out(static_cast<std::size_t>(nclasses));
  std::vector<char> filled(static_cast<std::size_t>(nclasses), 0);
  for (std::size_t i = 0; i < sub.size(); ++i) {
    auto c = static_cast<std::size_t>(cls[i]);
    if (filled[c]) continue;
    filled[c] = 1;
    out[c] = sub[i];
    for (auto& b : out[c].branches) b.target = cls[static_cast<std::size_t>(b.target)];
  }
  if (mapping) {
    mapping->assign(nodes.size(), -1);
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (local[v] >= 0) (*mapping)[v] = cls[static_cast<std::size_t>(local[v])];
  }
  return std::make_shared<const Pool<Node>>(std::move(out), true);
}

template <class Node>
Term<Node> make_term(std::vector<Node> nodes, int root) {
  std::vector<int> map;
  auto pool = make_pool(std::move(nodes), {root}, &map);
  return Term<Node>(pool, map[static_cast<std::size_t>(root)]);
}

// Places several terms (possibly from different pools) in one minimized pool.
template <class Node>
std::vector<Term<Node>> merge_terms(const std::vector<Term<Node>>& terms) {
  std::vector<Node> nodes;
  std::vector<int> roots;
  std::map<const Pool<Node>*, int> offset;
  for (const auto& t : terms) {
    auto [it, fresh] = offset.emplace(t.pool().get(), static_cast<int>(nodes.size()));
    if (fresh) {
      for (const auto& nd : t.pool()->nodes()) {
        Node copy = nd;
        for (auto& b : copy.branches) b.target += it->second;
        nodes.push_back(std::move(copy));
      }
    }
    roots.push_back(it->second + t.root());
  }
  std::vector<int> map;
  auto pool = make_pool(std::move(nodes), roots, &map);
  std::vector<Term<Node>> out;
  for (int r : roots) out.emplace_back(pool, map[static_cast<std::size_t>(r)]);
  return out;
}

template <class Node>
bool bisimilar(const Term<Node>& a, const Term<Node>& b) {
  if (a.pool() == b.pool() && a.pool()->minimal()) return a.root() == b.root();
  auto merged = merge_terms(std::vector<Term<Node>>{a, b});
  return merged[0].root() == merged[1].root();
}

// Canonical minimized copy restricted to the nodes reachable from the root.
template <class Node>
Term<Node> canonical(const Term<Node>& t) {
  return merge_terms(std::vector<Term<Node>>{t})[0];
}

template <class Node>
std::vector<int> reachable_nodes(const Term<Node>& t) {
  return reachable_nodes(t.pool()->nodes(), {t.root()});
}

Process end_process();
Global end_global();

ParticipantSet players(const Global& g);

// One term per bisimilarity class of reachable subterms.
std::vector<Global> subterms(const Global& g);

// Text that is equal for two terms iff they are bisimilar.
std::string canonical_key(const Global& g);

// Labels occurring anywhere in the term.
std::set<Label> labels_of(const Global& g);

template <class Node>
const std::vector<ParticipantSet>& Pool<Node>::players_table() const {
  std::call_once(players_once_, [this] {
    const int n = size();
    players_.assign(static_cast<std::size_t>(n), {});
    if constexpr (std::is_same_v<Node, GlobNode>) {
      for (int v = 0; v < n; ++v)
        if ((*this)[v].kind != Kind::End) players_[static_cast<std::size_t>(v)].insert((*this)[v].player());
      for (bool changed = true; changed;) {
        changed = false;
        for (int v = n - 1; v >= 0; --v) {
          auto& mine = players_[static_cast<std::size_t>(v)];
          const std::size_t before = mine.size();
          for (const auto& b : (*this)[v].branches) {
            const auto& theirs = players_[static_cast<std::size_t>(b.target)];
            mine.insert(theirs.begin(), theirs.end());
          }
          changed = changed || mine.size() != before;
        }
      }
    }
  });
  return players_;
}

}  // namespace mps
