#include "mps/inference.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "mps/typecheck.hpp"

namespace mps {

std::set<Var> Gpat::vars() const {
  std::set<Var> out;
  if (tag == Tag::Var) out.insert(var);
  for (const auto& [l, sub] : branches) {
    auto vs = sub.vars();
    out.insert(vs.begin(), vs.end());
  }
  return out;
}

const Gpat* EquationSystem::find(const Var& x) const {
  for (const auto& [v, p] : equations)
    if (v == x) return &p;
  return nullptr;
}

bool EquationSystem::add(Var x, Gpat p) {
  if (find(x)) return false;
  equations.emplace_back(std::move(x), std::move(p));
  return true;
}

std::set<Var> EquationSystem::vars() const {
  std::set<Var> out;
  for (const auto& [v, p] : equations) {
    out.insert(v);
    auto vs = p.vars();
    out.insert(vs.begin(), vs.end());
  }
  return out;
}

std::set<Var> EquationSystem::domain() const {
  std::set<Var> out;
  for (const auto& [v, p] : equations) out.insert(v);
  return out;
}

bool EquationSystem::guarded() const {
  for (const auto& [v, p] : equations) {
    std::set<Var> seen{v};
    const Gpat* cur = &p;
    while (cur && cur->tag == Gpat::Tag::Var) {
      if (!seen.insert(cur->var).second) return false;
      cur = find(cur->var);
    }
  }
  return true;
}

namespace {

class Solver {
 public:
  explicit Solver(const EquationSystem& e) : e_(e) {}

  int for_var(const Var& v) {
    Var r = resolve(v);
    if (auto it = idx_.find(r); it != idx_.end()) return it->second;
    int i = alloc();
    idx_.emplace(r, i);
    fill(i, *e_.find(r));
    return i;
  }

  std::vector<GlobNode> nodes;

 private:
  Var resolve(const Var& v) {
    std::set<Var> seen;
    Var cur = v;
    while (true) {
      const Gpat* p = e_.find(cur);
      if (!p) throw SolveError(SolveError::Kind::UnboundVariable, "variable " + cur + " has no equation");
      if (p->tag != Gpat::Tag::Var) return cur;
      if (!seen.insert(cur).second) throw SolveError(SolveError::Kind::Unguarded, "unguarded cycle through " + cur);
      cur = p->var;
    }
  }

  int alloc() {
    nodes.emplace_back();
    return static_cast<int>(nodes.size()) - 1;
  }

  int for_pat(const Gpat& p) {
    if (p.tag == Gpat::Tag::Var) return for_var(p.var);
    int i = alloc();
    fill(i, p);
    return i;
  }

  void fill(int i, const Gpat& p) {
    if (p.tag == Gpat::Tag::End) return;
    GlobNode nd;
    nd.kind = p.kind;
    nd.sender = p.sender;
    nd.receiver = p.receiver;
    for (const auto& [l, sub] : p.branches) nd.branches.push_back({l, for_pat(sub)});
    nodes[static_cast<std::size_t>(i)] = std::move(nd);
  }

  const EquationSystem& e_;
  std::map<Var, int> idx_;
};

}  // namespace

Global solve(const EquationSystem& e, const Var& x) {
  Solver s(e);
  int root = s.for_var(x);
  return make_term(std::move(s.nodes), root);
}

ParticipantSet plays(const EquationSystem& e, const std::map<Var, ParticipantSet>& goals, const Gpat& p) {
  std::map<Var, ParticipantSet> table;
  std::function<void(const Gpat&, ParticipantSet&)> collect = [&](const Gpat& q, ParticipantSet& out) {
    switch (q.tag) {
      case Gpat::Tag::End: return;
      case Gpat::Tag::Var: {
        if (e.find(q.var)) {
          auto& t = table[q.var];
          out.insert(t.begin(), t.end());
        } else if (auto it = goals.find(q.var); it != goals.end()) {
          out.insert(it->second.begin(), it->second.end());
        }
        return;
      }
      case Gpat::Tag::Comm:
        out.insert(q.kind == Kind::Out ? q.sender : q.receiver);
        for (const auto& [l, sub] : q.branches) collect(sub, out);
        return;
    }
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [v, q] : e.equations) {
      ParticipantSet next = table[v];
      collect(q, next);
      if (next.size() != table[v].size()) {
        table[v] = std::move(next);
        changed = true;
      }
    }
  }
  ParticipantSet out;
  collect(p, out);
  return out;
}

bool same_up_to_renaming(const EquationSystem& a, const Var& ra, const EquationSystem& b, const Var& rb) {
  if (a.size() != b.size()) return false;
  std::map<Var, Var> fwd, bwd;
  std::vector<std::pair<Var, Var>> work;
  auto bind = [&](const Var& x, const Var& y) {
    auto f = fwd.find(x);
    auto g = bwd.find(y);
    if (f != fwd.end() || g != bwd.end()) return f != fwd.end() && g != bwd.end() && f->second == y && g->second == x;
    fwd.emplace(x, y);
    bwd.emplace(y, x);
    work.emplace_back(x, y);
    return true;
  };
  std::function<bool(const Gpat&, const Gpat&)> match = [&](const Gpat& x, const Gpat& y) {
    if (x.tag != y.tag) return false;
    if (x.tag == Gpat::Tag::Var) return bind(x.var, y.var);
    if (x.tag == Gpat::Tag::End) return true;
    if (x.kind != y.kind || x.sender != y.sender || x.receiver != y.receiver || x.branches.size() != y.branches.size())
      return false;
    // Choices are unordered: pair branches by label.
    for (const auto& [l, sub] : x.branches) {
      auto it = std::find_if(y.branches.begin(), y.branches.end(), [&](const auto& b) { return b.first == l; });
      if (it == y.branches.end() || !match(sub, it->second)) return false;
    }
    return true;
  };
  if (!bind(ra, rb)) return false;
  while (!work.empty()) {
    auto [x, y] = work.back();
    work.pop_back();
    const Gpat* px = a.find(x);
    const Gpat* py = b.find(y);
    if (!px || !py) {
      if (px || py) return false;
      continue;
    }
    if (!match(*px, *py)) return false;
  }
  return fwd.size() == a.vars().size() && bwd.size() == b.vars().size();
}

// ---------------------------------------------------------------------------
// Search.

namespace {

struct PNode;
using PPtr = std::shared_ptr<const PNode>;

// Derivation skeleton: every node is one goal. Ref leaves point at an
// ancestor goal by depth.
struct PNode {
  enum class Tag : unsigned char { End, Ref, Comm } tag = Tag::End;
  int ref = -1;
  Kind kind = Kind::Out;
  Participant sender, receiver;
  std::vector<std::pair<Label, PPtr>> kids;
  ParticipantSet plays;
  int height = 1;
};

std::vector<std::vector<std::size_t>> subsets_by_size(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t k = n; k >= 1; --k) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(k), true);
    do {
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < n; ++i)
        if (pick[i]) s.push_back(i);
      out.push_back(std::move(s));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

class Search {
 public:
  explicit Search(std::size_t max_steps) : max_steps_(max_steps) {}

  // Calls `cb` on every skeleton of height at most h; false aborts.
  bool run(std::vector<Network>& chain, const Network& net, int h, const std::function<bool(const PPtr&)>& cb) {
    if (h < 1) return true;
    if (++steps_ > max_steps_) {
      aborted_ = true;
      return false;
    }
    for (std::size_t j = 0; j < chain.size(); ++j) {
      if (chain[j].key() != net.key()) continue;
      auto leaf = std::make_shared<PNode>();
      leaf->tag = PNode::Tag::Ref;
      leaf->ref = static_cast<int>(j);
      leaf->plays = chain[j].players();
      if (!cb(leaf)) return false;
    }
    if (net.empty()) {
      if (!cb(std::make_shared<PNode>())) return false;
      return true;
    }
    if (h == 1) {
      cut_ = true;
      return true;
    }
    chain.push_back(net);
    bool go = expand(chain, net, h, cb);
    chain.pop_back();
    return go;
  }

  bool cut() const { return cut_; }
  bool aborted() const { return aborted_; }
  void reset_cut() { cut_ = false; }

 private:
  bool expand(std::vector<Network>& chain, const Network& net, int h, const std::function<bool(const PPtr&)>& cb) {
    for (const auto& [p, node] : net.components()) {
      const ProcNode& pn = (*net.pool())[node];
      const ParticipantSet rest = net.without(p).players();
      std::map<std::size_t, std::vector<PPtr>> lists;
      auto list_for = [&](std::size_t i) -> const std::vector<PPtr>* {
        auto it = lists.find(i);
        if (it != lists.end()) return &it->second;
        std::vector<PPtr> found;
        Network child = net.with(p, pn.branches[i].target);
        bool ok = run(chain, child, h - 1, [&](const PPtr& sub) {
          ParticipantSet ps = sub->plays;
          ps.erase(p);
          if (ps == rest) found.push_back(sub);
          return true;
        });
        if (!ok) return nullptr;
        return &lists.emplace(i, std::move(found)).first->second;
      };
      std::vector<std::vector<std::size_t>> choices;
      if (pn.kind == Kind::Out) {
        std::vector<std::size_t> all(pn.branches.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        choices.push_back(std::move(all));
      } else {
        choices = subsets_by_size(pn.branches.size());
      }
      for (const auto& chosen : choices) {
        std::vector<const std::vector<PPtr>*> ls;
        for (std::size_t i : chosen) {
          auto l = list_for(i);
          if (!l) return false;
          ls.push_back(l);
        }
        if (std::any_of(ls.begin(), ls.end(), [](const auto* l) { return l->empty(); })) continue;
        std::vector<std::size_t> at(ls.size(), 0);
        while (true) {
          auto nd = std::make_shared<PNode>();
          nd->tag = PNode::Tag::Comm;
          nd->kind = pn.kind;
          nd->sender = pn.kind == Kind::Out ? p : pn.peer;
          nd->receiver = pn.kind == Kind::Out ? pn.peer : p;
          nd->plays.insert(p);
          int hh = 0;
          for (std::size_t k = 0; k < ls.size(); ++k) {
            const PPtr& sub = (*ls[k])[at[k]];
            nd->kids.emplace_back(pn.branches[chosen[k]].label, sub);
            nd->plays.insert(sub->plays.begin(), sub->plays.end());
            hh = std::max(hh, sub->height);
          }
          nd->height = hh + 1;
          if (++steps_ > max_steps_) {
            aborted_ = true;
            return false;
          }
          if (!cb(nd)) return false;
          std::size_t k = 0;
          while (k < at.size() && ++at[k] == ls[k]->size()) at[k++] = 0;
          if (k == at.size()) break;
        }
      }
    }
    return true;
  }

  std::size_t max_steps_;
  std::size_t steps_ = 0;
  bool cut_ = false;
  bool aborted_ = false;
};

void to_equations(const PNode& n, std::vector<Var>& path, int& counter, EquationSystem& e) {
  Var me = counter == 0 ? "X" : "X" + std::to_string(counter);
  ++counter;
  switch (n.tag) {
    case PNode::Tag::End: e.add(me, Gpat::end()); return;
    case PNode::Tag::Ref: e.add(me, Gpat::ref(path[static_cast<std::size_t>(n.ref)])); return;
    case PNode::Tag::Comm: break;
  }
  Gpat g;
  g.tag = Gpat::Tag::Comm;
  g.kind = n.kind;
  g.sender = n.sender;
  g.receiver = n.receiver;
  const std::size_t slot = e.size();
  e.add(me, Gpat::end());
  path.push_back(me);
  for (const auto& [l, sub] : n.kids) {
    Var child = "X" + std::to_string(counter);
    g.branches.emplace_back(l, Gpat::ref(child));
    to_equations(*sub, path, counter, e);
  }
  path.pop_back();
  e.equations[slot].second = std::move(g);
}

class Guided {
 public:
  explicit Guided(EquationSystem& e) : e_(e) {}

  // Returns the height of the derivation, 0 on failure.
  int go(const Network& net, const Global& t) {
    const Var me = counter_ == 0 ? "X" : "X" + std::to_string(counter_);
    ++counter_;
    for (const auto& [key, node, y] : goals_) {
      if (key == net.key() && node == t.root()) {
        e_.add(me, Gpat::ref(y));
        return 1;
      }
    }
    const GlobNode& tn = t.node();
    if (tn.kind == Kind::End) {
      if (!net.empty()) return 0;
      e_.add(me, Gpat::end());
      return 1;
    }
    const Participant& p = tn.player();
    auto proc = net.find(p);
    if (!proc) return 0;
    const ProcNode& pn = proc->node();
    const Participant& peer = tn.kind == Kind::Out ? tn.receiver : tn.sender;
    if (pn.kind != tn.kind || pn.peer != peer) return 0;
    if (tn.kind == Kind::Out && pn.branches.size() != tn.branches.size()) return 0;
    const ParticipantSet rest = net.without(p).players();

    Gpat g;
    g.tag = Gpat::Tag::Comm;
    g.kind = tn.kind;
    g.sender = tn.sender;
    g.receiver = tn.receiver;
    const std::size_t slot = e_.size();
    e_.add(me, Gpat::end());
    goals_.emplace_back(net.key(), t.root(), me);
    int height = 0;
    for (std::size_t i = 0; i < tn.branches.size(); ++i) {
      const Label& l = tn.branches[i].label;
      auto j = proc->find_branch(l);
      if (!j) return 0;
      const Global sub = t.child(i);
      ParticipantSet ps = players(sub);
      ps.erase(p);
      if (ps != rest) return 0;
      g.branches.emplace_back(l, Gpat::ref("X" + std::to_string(counter_)));
      int hh = go(net.with(p, pn.branches[*j].target), sub);
      if (hh == 0) return 0;
      height = std::max(height, hh);
    }
    goals_.pop_back();
    e_.equations[slot].second = std::move(g);
    return height + 1;
  }

 private:
  EquationSystem& e_;
  int counter_ = 0;
  std::vector<std::tuple<Network::Key, int, Var>> goals_;
};

}  // namespace

std::optional<InferredSystem> infer_along(const Network& n, const Global& g) {
  InferredSystem out;
  Guided guide(out.system);
  out.height = guide.go(n, canonical(g));
  if (out.height == 0) return std::nullopt;
  out.root = "X";
  out.solution = solve(out.system, out.root);
  return out;
}

int default_infer_depth(const Network& n) {
  constexpr long cap = 1000;
  long product = 1;
  for (const auto& [p, node] : n.components()) {
    long count = static_cast<long>(reachable_nodes(n.pool()->nodes(), {node}).size());
    product = std::min(cap, product * count);
  }
  return static_cast<int>(std::min(cap, 4 * product));
}

InferResult infer(const Network& n, InferBudget budget, const std::function<bool(const InferredSystem&)>& emit) {
  const int max_depth = budget.max_depth > 0 ? budget.max_depth : default_infer_depth(n);
  InferResult result;
  std::set<std::string> seen;
  Search search(budget.max_steps);
  bool stop = false;
  for (int h = 1; h <= max_depth && !stop; ++h) {
    result.depth_reached = h;
    search.reset_cut();
    std::vector<Network> chain;
    search.run(chain, n, h, [&](const PPtr& sk) {
      if (sk->height != h) return true;
      InferredSystem out;
      std::vector<Var> path;
      int counter = 0;
      to_equations(*sk, path, counter, out.system);
      out.root = "X";
      out.solution = solve(out.system, out.root);
      out.height = h;
      if (!seen.insert(canonical_key(out.solution)).second) return true;
      // The players side condition only sees the goal network at a cycle, so
      // a derivation can close a loop in which some participant never acts.
      if (!check(out.solution, n).accepted) {
        ++result.discarded;
        return true;
      }
      bool more = !emit || emit(out);
      result.systems.push_back(std::move(out));
      if (!more || result.systems.size() >= budget.max_solutions) {
        stop = true;
        result.exhausted = true;
        return false;
      }
      return true;
    });
    if (search.aborted()) {
      result.exhausted = true;
      result.out_of_steps = true;
      break;
    }
    if (!stop && !search.cut()) break;  // every derivation has been seen
    if (h == max_depth && search.cut()) result.exhausted = true;
  }
  return result;
}

}  // namespace mps
