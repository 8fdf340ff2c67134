#include "mps/typecheck.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace mps {

namespace {

std::string label_set(const std::vector<Branch>& bs) {
  std::string s = "{";
  for (std::size_t i = 0; i < bs.size(); ++i) s += (i ? "," : "") + bs[i].label;
  return s + "}";
}

std::string join(const ParticipantSet& ps) {
  std::string s = "{";
  bool first = true;
  for (const auto& p : ps) {
    s += (first ? "" : ",") + p;
    first = false;
  }
  return s + "}";
}

class Checker {
 public:
  explicit Checker(const Global& g) : g_(g) {}

  bool run(int v, const Network& n) {
    if (!seen_.emplace(v, n.key()).second) return true;  // cycle: assumed
    const GlobNode& nd = g_.at(v);
    if (nd.kind == Kind::End) {
      if (n.empty()) return true;
      return fail("End", "global type ended but " + join(n.players()) + " still play");
    }
    const bool out = nd.kind == Kind::Out;
    const Participant& p = out ? nd.sender : nd.receiver;
    const Participant& peer = out ? nd.receiver : nd.sender;
    const std::string rule = out ? "Out " + nd.sender + "->" + nd.receiver : "In " + nd.sender + "->" + nd.receiver;
    auto proc = n.find(p);
    if (!proc) return fail(rule, p + " has terminated");
    const ProcNode& pn = proc->node();
    if (pn.kind != nd.kind || pn.peer != peer)
      return fail(rule, p + " does not offer " + std::string(out ? "an output to " : "an input from ") + peer);
    if (out) {
      bool same = pn.branches.size() == nd.branches.size();
      for (std::size_t i = 0; same && i < pn.branches.size(); ++i) same = pn.branches[i].label == nd.branches[i].label;
      if (!same) return fail(rule, "outputs " + label_set(nd.branches) + " vs process " + label_set(pn.branches));
    }
    const ParticipantSet rest = n.without(p).players();
    for (const auto& b : nd.branches) {
      auto h = proc->find_branch(b.label);
      if (!h) return fail(rule, "inputs " + label_set(nd.branches) + " not within process " + label_set(pn.branches));
      ParticipantSet ps = g_.pool()->players_table()[static_cast<std::size_t>(b.target)];
      ps.erase(p);
      if (ps != rest)
        return fail(rule + " [" + b.label + "]", "players " + join(ps) + " of the continuation without " + p +
                                                      " differ from network players " + join(rest));
      path_.push_back(rule + " [" + b.label + "]");
      if (!run(b.target, n.with(p, pn.branches[*h].target))) return false;
      path_.pop_back();
    }
    return true;
  }

  std::vector<std::string> path_;
  std::string reason_;
  std::size_t judgments() const { return seen_.size(); }

 private:
  bool fail(const std::string& rule, const std::string& why) {
    path_.push_back(rule);
    reason_ = why;
    return false;
  }

  Global g_;
  std::set<std::pair<int, Network::Key>> seen_;
};

}  // namespace

TypingResult check(const Global& g, const Network& n) {
  Global c = g.pool()->minimal() ? g : canonical(g);
  Checker ck(c);
  TypingResult r;
  r.accepted = ck.run(c.root(), n);
  r.judgments = ck.judgments();
  if (!r.accepted) {
    r.path = std::move(ck.path_);
    r.reason = std::move(ck.reason_);
  }
  return r;
}

namespace {

class CanonicalBuilder {
 public:
  int build(const Network& n0, std::deque<Participant> order) {
    Network n = n0;
    while (!order.empty() && !n.has(order.front())) order.pop_front();
    auto key = std::make_pair(n.key(), std::vector<Participant>(order.begin(), order.end()));
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const int idx = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    memo_.emplace(std::move(key), idx);
    if (order.empty()) return idx;
    const Participant p = order.front();
    order.pop_front();
    order.push_back(p);
    auto proc = *n.find(p);
    const ProcNode pn = proc.node();
    GlobNode g;
    g.kind = pn.kind;
    g.sender = pn.kind == Kind::Out ? p : pn.peer;
    g.receiver = pn.kind == Kind::Out ? pn.peer : p;
    // Inputs keep only the least label; branches are sorted.
    const std::size_t count = pn.kind == Kind::Out ? pn.branches.size() : 1;
    for (std::size_t i = 0; i < count; ++i) {
      int t = build(n.with(p, pn.branches[i].target), order);
      g.branches.push_back({pn.branches[i].label, t});
    }
    nodes_[static_cast<std::size_t>(idx)] = std::move(g);
    return idx;
  }

  std::vector<GlobNode> nodes_;

 private:
  std::map<std::pair<Network::Key, std::vector<Participant>>, int> memo_;
};

}  // namespace

Global gt_net(const Network& n, const std::vector<Participant>& order) {
  CanonicalBuilder b;
  int root = b.build(n, std::deque<Participant>(order.begin(), order.end()));
  return make_term(std::move(b.nodes_), root);
}

TypedNetwork any_network_typable(const Network& n) {
  ParticipantSet ps = n.players();
  Global g = gt_net(n, std::vector<Participant>(ps.begin(), ps.end()));
  return {g, check(g, n)};
}

}  // namespace mps
