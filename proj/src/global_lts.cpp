#include "mps/global_lts.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "mps/wellformed.hpp"

namespace mps {

std::string to_string(ConfigRule r) {
  switch (r) {
    case ConfigRule::TopOut: return "Top-Out";
    case ConfigRule::TopIn: return "Top-In";
    case ConfigRule::InsideOut: return "Inside-Out";
    case ConfigRule::InsideIn: return "Inside-In";
  }
  return "?";
}

namespace {

// Derivation search for one communication. New nodes are appended after a
// copy of the source pool; the result is minimized by the caller.
class Stepper {
 public:
  Stepper(const Global& g, const Communication& beta) : src_(g), beta_(beta), nodes_(g.pool()->nodes()) {}

  struct Out {
    int node;
    Queue queue;
    ConfigRule rule;
  };

  std::optional<Out> step(int v, const Queue& m) {
    auto key = std::make_pair(v, m);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    // A derivation never revisits a node on one path: every node between two
    // visits would be stepped by an Inside rule forever.
    if (on_path_.count(v)) return std::nullopt;
    on_path_.insert(v);
    auto r = compute(v, m);
    on_path_.erase(v);
    memo_.emplace(std::move(key), r);
    return r;
  }

  std::vector<GlobNode>& nodes() { return nodes_; }

 private:
  std::optional<Out> compute(int v, const Queue& m) {
    const GlobNode nd = nodes_[static_cast<std::size_t>(v)];
    if (nd.kind == Kind::End) return std::nullopt;
    if (v < src_.pool()->size() && !src_.pool()->players_table()[static_cast<std::size_t>(v)].count(beta_.player()))
      return std::nullopt;
    if (nd.player() == beta_.player()) {
      if (nd.kind == Kind::Out) {
        if (beta_.dir != Dir::Output || beta_.receiver != nd.receiver) return std::nullopt;
        for (const auto& b : nd.branches)
          if (b.label == beta_.label) {
            Queue q = m;
            q.push(nd.sender, nd.receiver, b.label);
            return Out{b.target, std::move(q), ConfigRule::TopOut};
          }
        return std::nullopt;
      }
      if (beta_.dir != Dir::Input || beta_.sender != nd.sender) return std::nullopt;
      const Label* head = m.head(nd.sender, nd.receiver);
      if (!head || *head != beta_.label) return std::nullopt;
      for (const auto& b : nd.branches)
        if (b.label == *head) {
          Queue q = m;
          q.pop(nd.sender, nd.receiver);
          return Out{b.target, std::move(q), ConfigRule::TopIn};
        }
      return std::nullopt;
    }
    GlobNode fresh = nd;
    std::optional<Queue> common;
    if (nd.kind == Kind::Out) {
      for (std::size_t i = 0; i < nd.branches.size(); ++i) {
        Queue q = m;
        q.push(nd.sender, nd.receiver, nd.branches[i].label);
        auto r = step(nd.branches[i].target, q);
        if (!r || !r->queue.pop_back_if(nd.sender, nd.receiver, nd.branches[i].label)) return std::nullopt;
        if (common && *common != r->queue) return std::nullopt;
        common = r->queue;
        fresh.branches[i].target = r->node;
      }
      return Out{push(std::move(fresh)), *common, ConfigRule::InsideOut};
    }
    const Label* head = m.head(nd.sender, nd.receiver);
    if (!head) return std::nullopt;
    bool matches = false;
    for (const auto& b : nd.branches) matches = matches || b.label == *head;
    if (!matches) return std::nullopt;
    const Label h = *head;
    Queue rest = m;
    rest.pop(nd.sender, nd.receiver);
    for (std::size_t i = 0; i < nd.branches.size(); ++i) {
      auto r = step(nd.branches[i].target, rest);
      if (!r) return std::nullopt;
      if (common && *common != r->queue) return std::nullopt;
      common = r->queue;
      fresh.branches[i].target = r->node;
    }
    common->push_front(nd.sender, nd.receiver, h);
    return Out{push(std::move(fresh)), *common, ConfigRule::InsideIn};
  }

  int push(GlobNode n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Global& src_;
  const Communication& beta_;
  std::vector<GlobNode> nodes_;
  std::map<std::pair<int, Queue>, std::optional<Out>> memo_;
  std::set<int> on_path_;
};

}  // namespace

std::optional<ConfigStep> step_config_rule(const TypeConfig& c, const Communication& beta) {
  Stepper st(c.type, beta);
  auto r = st.step(c.type.root(), c.queue);
  if (!r) return std::nullopt;
  Global next = r->node < c.type.pool()->size() ? c.type.at_node(r->node) : make_term(std::move(st.nodes()), r->node);
  return ConfigStep{TypeConfig{next, r->queue}, r->rule};
}

std::optional<TypeConfig> step_config(const TypeConfig& c, const Communication& beta) {
  auto r = step_config_rule(c, beta);
  if (!r) return std::nullopt;
  return r->next;
}

std::vector<Communication> type_communications(const Global& g) {
  std::set<Communication> out;
  for (int v : reachable_nodes(g)) {
    const GlobNode& nd = g.at(v);
    if (nd.kind == Kind::End) continue;
    for (const auto& b : nd.branches)
      out.insert({nd.kind == Kind::Out ? Dir::Output : Dir::Input, nd.sender, nd.receiver, b.label});
  }
  return {out.begin(), out.end()};
}

std::vector<Communication> enabled_config(const TypeConfig& c) {
  if (!bounded(c.type)) throw UnboundedType("type configuration over an unbounded global type");
  std::vector<Communication> out;
  for (const auto& beta : type_communications(c.type))
    if (step_config_rule(c, beta)) out.push_back(beta);
  return out;
}

namespace {

TypeConfig apply_in_order(const TypeConfig& c, const std::vector<Communication>& delta) {
  TypeConfig cur = c;
  for (const auto& b : delta) {
    auto next = step_config(cur, b);
    if (!next) throw std::logic_error("communication " + b.str() + " not enabled inside lockstep");
    cur = std::move(*next);
  }
  return cur;
}

}  // namespace

TypeConfig apply_all_config(const TypeConfig& c, const std::vector<Communication>& delta) {
  TypeConfig fwd = apply_in_order(c, delta);
  std::vector<Communication> rev(delta.rbegin(), delta.rend());
  TypeConfig bwd = apply_in_order(c, rev);
  if (fwd.queue != bwd.queue || !bisimilar(fwd.type, bwd.type))
    throw std::logic_error("lockstep result depends on application order");
  return fwd;
}

std::optional<ConfigLockstep> lockstep_config(const TypeConfig& c, ChoicePolicy& policy) {
  auto groups = by_player(enabled_config(c));
  if (groups.empty()) return std::nullopt;
  ConfigLockstep step;
  for (const auto& [p, opts] : groups) step.delta.push_back(policy.choose(p, opts));
  std::sort(step.delta.begin(), step.delta.end());
  step.next = apply_all_config(c, step.delta);
  return step;
}

bool config_deadlocked(const TypeConfig& c) {
  if (c.type.kind() == Kind::End) return false;
  for (const auto& beta : type_communications(c.type))
    if (step_config_rule(c, beta)) return false;
  return true;
}

}  // namespace mps
