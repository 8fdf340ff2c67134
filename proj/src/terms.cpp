#include "mps/terms.hpp"

#include <algorithm>

namespace mps {

namespace {

template <class Node>
void check_branches(std::vector<Node>& nodes) {
  const int n = static_cast<int>(nodes.size());
  for (auto& nd : nodes) {
    if (nd.kind == Kind::End) {
      if (!nd.branches.empty()) throw TermError("end node with branches");
      continue;
    }
    if (nd.branches.empty()) throw TermError("empty choice");
    std::sort(nd.branches.begin(), nd.branches.end(),
              [](const Branch& a, const Branch& b) { return a.label < b.label; });
    for (std::size_t i = 0; i < nd.branches.size(); ++i) {
      if (nd.branches[i].label.empty()) throw TermError("empty label");
      if (i > 0 && nd.branches[i].label == nd.branches[i - 1].label)
        throw TermError("duplicate label '" + nd.branches[i].label + "' in choice");
      if (nd.branches[i].target < 0 || nd.branches[i].target >= n) throw TermError("branch target out of range");
    }
  }
}

char kind_char(Kind k) {
  switch (k) {
    case Kind::End: return 'E';
    case Kind::Out: return 'O';
    case Kind::In: return 'I';
  }
  return '?';
}

}  // namespace

std::string node_signature(const ProcNode& n) {
  std::string s(1, kind_char(n.kind));
  s += '\x1f';
  s += n.peer;
  for (const auto& b : n.branches) {
    s += '\x1f';
    s += b.label;
  }
  return s;
}

std::string node_signature(const GlobNode& n) {
  std::string s(1, kind_char(n.kind));
  s += '\x1f';
  s += n.sender;
  s += '\x1f';
  s += n.receiver;
  for (const auto& b : n.branches) {
    s += '\x1f';
    s += b.label;
  }
  return s;
}

void validate_nodes(std::vector<ProcNode>& nodes) {
  for (const auto& nd : nodes)
    if (nd.kind != Kind::End && nd.peer.empty()) throw TermError("choice without partner");
  check_branches(nodes);
}

void validate_nodes(std::vector<GlobNode>& nodes) {
  for (const auto& nd : nodes) {
    if (nd.kind == Kind::End) continue;
    if (nd.sender.empty() || nd.receiver.empty()) throw TermError("communication without participants");
    if (nd.sender == nd.receiver) throw TermError("self communication of '" + nd.sender + "'");
  }
  check_branches(nodes);
}

Process end_process() { return make_term(std::vector<ProcNode>{ProcNode{}}, 0); }

Global end_global() { return make_term(std::vector<GlobNode>{GlobNode{}}, 0); }

ParticipantSet players(const Global& g) { return g.pool()->players_table()[static_cast<std::size_t>(g.root())]; }

std::string canonical_key(const Global& g) {
  Global c = canonical(g);
  std::vector<int> order = reachable_nodes(c);
  std::map<int, int> rank;
  for (int v : order) rank.emplace(v, static_cast<int>(rank.size()));
  std::string out;
  for (int v : order) {
    out += node_signature(c.at(v));
    for (const auto& b : c.at(v).branches) out += '\x1e' + std::to_string(rank[b.target]);
    out += '\n';
  }
  return out;
}

std::vector<Global> subterms(const Global& g) {
  Global c = canonical(g);
  std::vector<Global> out;
  for (int v : reachable_nodes(c)) out.push_back(c.at_node(v));
  return out;
}

std::set<Label> labels_of(const Global& g) {
  std::set<Label> out;
  for (int v : reachable_nodes(g))
    for (const auto& b : g.at(v).branches) out.insert(b.label);
  return out;
}

}  // namespace mps
