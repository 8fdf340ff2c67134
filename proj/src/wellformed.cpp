#include "mps/wellformed.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace mps {

namespace {

Global minimal_view(const Global& g) { return g.pool()->minimal() ? g : canonical(g); }

// Shortest-distance style recursion shared by depth and weight: zero at nodes
// selected by `stop`, infinite at End and on cycles avoiding `stop`.
template <class Stop>
class DistanceTable {
 public:
  DistanceTable(const GlobPool& pool, Stop stop)
      : pool_(pool), stop_(stop), value_(static_cast<std::size_t>(pool.size())),
        state_(static_cast<std::size_t>(pool.size()), 0) {}

  Extended at(int v) {
    auto i = static_cast<std::size_t>(v);
    if (state_[i] == 2) return value_[i];
    if (state_[i] == 1) return Extended::inf();
    const GlobNode& nd = pool_[v];
    Extended r;
    if (nd.kind != Kind::End && stop_(nd)) {
      r = Extended::of(0);
    } else if (nd.kind == Kind::End) {
      r = Extended::inf();
    } else {
      state_[i] = 1;
      Extended worst = Extended::of(0);
      for (const auto& b : nd.branches) worst = std::max(worst, at(b.target));
      r = worst.infinite ? worst : Extended::of(worst.value + 1);
    }
    state_[i] = 2;
    value_[i] = r;
    return r;
  }

 private:
  const GlobPool& pool_;
  Stop stop_;
  std::vector<Extended> value_;
  std::vector<char> state_;
};

auto played_by(const Participant& p) {
  return [p](const GlobNode& nd) { return nd.player() == p; };
}

}  // namespace

DepthValue depth(const Global& g, const Participant& p) {
  if (!players(g).count(p)) return Extended::of(0);
  DistanceTable table(*g.pool(), played_by(p));
  Extended d = table.at(g.root());
  return d.infinite ? d : Extended::of(d.value + 1);
}

std::optional<BoundWitness> unbounded_witness(const Global& g) {
  const auto& table = g.pool()->players_table();
  std::vector<int> nodes = reachable_nodes(g);
  ParticipantSet everyone;
  for (int v : nodes) everyone.insert(table[static_cast<std::size_t>(v)].begin(), table[static_cast<std::size_t>(v)].end());
  // Prefer a subterm on a cycle: that is where the infinite path lives.
  auto recurs = [&g](int v) {
    std::vector<int> kids;
    for (const auto& b : g.at(v).branches) kids.push_back(b.target);
    auto from = reachable_nodes(g.pool()->nodes(), kids);
    return std::find(from.begin(), from.end(), v) != from.end();
  };
  std::optional<BoundWitness> first;
  for (const auto& p : everyone) {
    DistanceTable dist(*g.pool(), played_by(p));
    for (int v : nodes) {
      if (!table[static_cast<std::size_t>(v)].count(p) || dist.at(v).finite()) continue;
      if (recurs(v)) return BoundWitness{g.at_node(v), p};
      if (!first) first = BoundWitness{g.at_node(v), p};
    }
  }
  return first;
}

bool bounded(const Global& g) { return !unbounded_witness(g).has_value(); }

Weight weight(const Message& m, const Global& g) {
  DistanceTable table(*g.pool(), [&m](const GlobNode& nd) {
    if (nd.kind != Kind::In || nd.sender != m.sender || nd.receiver != m.receiver) return false;
    return std::any_of(nd.branches.begin(), nd.branches.end(), [&](const Branch& b) { return b.label == m.label; });
  });
  return table.at(g.root());
}

// ---------------------------------------------------------------------------
// read: least fixpoint over the finite graph of (node, queue) states.

namespace {

class ReadSolver {
 public:
  explicit ReadSolver(const Global& g) : g_(g) {}

  bool holds(int v, const Queue& m) {
    int s = state(v, m);
    solve();
    return rank_[static_cast<std::size_t>(s)] >= 0;
  }

  std::optional<Derivation> derive(int v, const Queue& m) {
    if (!holds(v, m)) return std::nullopt;
    return build(index_.at({v, m}));
  }

 private:
  struct State {
    int node;
    Queue queue;
    std::string rule;
    std::vector<int> next;
    bool leaf_true = false;
  };

  int state(int v, const Queue& m) {
    auto key = std::make_pair(v, m);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    const int id = static_cast<int>(states_.size());
    index_.emplace(key, id);
    states_.push_back({v, m, "", {}, false});
    rank_.push_back(-1);
    dirty_ = true;
    const GlobNode& nd = g_.at(v);
    std::string rule;
    std::vector<std::pair<int, Queue>> kids;
    bool leaf = false;
    if (m.empty()) {
      rule = "Empty-R";
      leaf = true;
    } else if (nd.kind == Kind::End) {
      rule = "";
    } else if (nd.kind == Kind::Out) {
      rule = "Out-R";
      for (const auto& b : nd.branches) kids.emplace_back(b.target, m);
    } else {
      const Label* head = m.head(nd.sender, nd.receiver);
      bool hit = head && std::any_of(nd.branches.begin(), nd.branches.end(),
                                     [&](const Branch& b) { return b.label == *head; });
      Queue rest = m;
      if (hit) rest.pop(nd.sender, nd.receiver);
      rule = hit ? "In-R1" : "In-R2";
      for (const auto& b : nd.branches) kids.emplace_back(b.target, rest);
    }
    std::vector<int> next;
    for (auto& [t, q] : kids) next.push_back(state(t, q));
    auto& st = states_[static_cast<std::size_t>(id)];
    st.rule = rule;
    st.next = std::move(next);
    st.leaf_true = leaf;
    return id;
  }

  // A state is proven once all its premises are; the proof counter orders
  // states so that premises always carry a smaller rank.
  void solve() {
    if (!dirty_) return;
    dirty_ = false;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t s = 0; s < states_.size(); ++s) {
        if (rank_[s] >= 0) continue;
        const State& st = states_[s];
        bool ok = st.leaf_true;
        if (!ok && !st.rule.empty())
          ok = std::all_of(st.next.begin(), st.next.end(), [&](int t) { return rank_[static_cast<std::size_t>(t)] >= 0; });
        if (ok) {
          rank_[s] = proved_++;
          changed = true;
        }
      }
    }
  }

  Derivation build(int s) {
    const State& st = states_[static_cast<std::size_t>(s)];
    Derivation d{st.rule, g_.at_node(st.node), st.queue, {}, ""};
    if (st.rule == "In-R1") {
      const GlobNode& nd = g_.at(st.node);
      d.side = *st.queue.head(nd.sender, nd.receiver) + " is a branch label";
    }
    if (!st.leaf_true)
      for (int t : st.next) d.premises.push_back(build(t));
    return d;
  }

  Global g_;
  std::vector<State> states_;
  std::vector<int> rank_;
  std::map<std::pair<int, Queue>, int> index_;
  bool dirty_ = false;
  int proved_ = 0;
};

}  // namespace

bool read(const Global& g, const Queue& m) {
  Global c = minimal_view(g);
  return ReadSolver(c).holds(c.root(), m);
}

std::optional<Derivation> read_derivation(const Global& g, const Queue& m) {
  Global c = minimal_view(g);
  return ReadSolver(c).derive(c.root(), m);
}

// ---------------------------------------------------------------------------
// dread: the queue never changes; the visited set is the current path.

namespace {

class DeepReadSolver {
 public:
  DeepReadSolver(const Global& g, const Queue& m) : g_(g), m_(m), reader_(g), on_path_(static_cast<std::size_t>(g.pool()->size()), 0) {}

  bool holds(int v) {
    if (on_path_[static_cast<std::size_t>(v)]) return reader_.holds(v, m_);
    auto key = std::make_pair(v, on_path_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool r;
    const GlobNode& nd = g_.at(v);
    if (nd.kind == Kind::End) {
      r = m_.empty();
    } else {
      on_path_[static_cast<std::size_t>(v)] = 1;
      r = true;
      for (const auto& b : nd.branches)
        if (!holds(b.target)) {
          r = false;
          break;
        }
      on_path_[static_cast<std::size_t>(v)] = 0;
    }
    memo_.emplace(std::move(key), r);
    return r;
  }

  std::optional<Derivation> derive(int v) {
    if (!holds(v)) return std::nullopt;
    return build(v);
  }

 private:
  Derivation build(int v) {
    if (on_path_[static_cast<std::size_t>(v)]) {
      Derivation d{"Cycle-DR", g_.at_node(v), m_, {}, ""};
      d.premises.push_back(*reader_.derive(v, m_));
      return d;
    }
    const GlobNode& nd = g_.at(v);
    if (nd.kind == Kind::End) return {"End-DR", g_.at_node(v), m_, {}, ""};
    Derivation d{nd.kind == Kind::Out ? "Out-DR" : "In-DR", g_.at_node(v), m_, {}, ""};
    on_path_[static_cast<std::size_t>(v)] = 1;
    for (const auto& b : nd.branches) d.premises.push_back(build(b.target));
    on_path_[static_cast<std::size_t>(v)] = 0;
    return d;
  }

  Global g_;
  Queue m_;
  ReadSolver reader_;
  std::vector<char> on_path_;
  std::map<std::pair<int, std::vector<char>>, bool> memo_;
};

}  // namespace

bool dread(const Global& g, const Queue& m) {
  Global c = minimal_view(g);
  return DeepReadSolver(c, m).holds(c.root());
}

std::optional<Derivation> dread_derivation(const Global& g, const Queue& m) {
  Global c = minimal_view(g);
  return DeepReadSolver(c, m).derive(c.root());
}

// ---------------------------------------------------------------------------
// Indistinguishability.

namespace {

// Labels a and b on channel (p,q) behave alike at every input of g on that channel.
bool indist_labels(const Global& g, const Participant& p, const Participant& q, const Label& a, const Label& b,
                   const std::set<Label>& occurring) {
  if (!occurring.count(a) || !occurring.count(b)) return false;
  for (int v : reachable_nodes(g)) {
    const GlobNode& nd = g.at(v);
    if (nd.kind != Kind::In || nd.sender != p || nd.receiver != q) continue;
    auto ha = g.at_node(v).find_branch(a);
    auto hb = g.at_node(v).find_branch(b);
    if (!ha && !hb) continue;
    if (!ha || !hb) return false;
    if (nd.branches[*ha].target != nd.branches[*hb].target) return false;
  }
  return true;
}

bool label_equiv(const Global& g, const Channel& c, const Label& a, const Label& b, const std::set<Label>& occ) {
  return a == b || indist_labels(g, c.first, c.second, a, b, occ);
}

// Least label of the class of `l` in channel c (the relation is an equivalence
// on occurring labels).
Label class_rep(const Global& g, const Channel& c, const Label& l, const std::set<Label>& occ) {
  if (!occ.count(l)) return l;
  for (const auto& cand : occ) {
    if (cand >= l) break;
    if (indist_labels(g, c.first, c.second, cand, l, occ)) return cand;
  }
  return l;
}

Queue canonical_mod(const Global& g, const Queue& m) {
  std::set<Label> occ = labels_of(g);
  Queue out;
  for (const auto& [c, seq] : m.channels())
    for (const auto& l : seq) out.push(c.first, c.second, class_rep(g, c, l, occ));
  return out;
}

}  // namespace

bool indist(const Message& a, const Message& b, const Global& g) {
  if (a.sender != b.sender || a.receiver != b.receiver) throw ChannelMismatch("messages on different channels");
  Global c = minimal_view(g);
  return indist_labels(c, a.sender, a.receiver, a.label, b.label, labels_of(c));
}

bool queue_equiv_g(const Queue& a, const Queue& b, const Global& g) {
  Global c = minimal_view(g);
  std::set<Label> occ = labels_of(c);
  std::set<Channel> chans;
  for (const auto& [ch, seq] : a.channels()) chans.insert(ch);
  for (const auto& [ch, seq] : b.channels()) chans.insert(ch);
  for (const auto& ch : chans) {
    const auto& x = a.channel(ch.first, ch.second);
    const auto& y = b.channel(ch.first, ch.second);
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!label_equiv(c, ch, x[i], y[i], occ)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// agree: greatest fixpoint over (node, queue) states; each output branch may
// pick among candidate successor queues.

namespace {

class AgreeSolver {
 public:
  AgreeSolver(const Global& g, AgreeOptions opt) : g_(g), opt_(opt) {}

  bool holds(int v, const Queue& m) {
    int s = state(v, m);
    solve();
    return good_[static_cast<std::size_t>(s)];
  }

  std::optional<Derivation> derive(int v, const Queue& m) {
    if (!holds(v, m)) return std::nullopt;
    std::vector<char> path(states_.size(), 0);
    return build(index_.at({v, normalize(v, m)}), path);
  }

 private:
  struct State {
    int node;
    Queue queue;
    // One entry per branch; each lists candidate successor states.
    std::vector<std::vector<int>> options;
  };

  Queue normalize(int v, const Queue& m) { return opt_.modulo_type_equiv ? canonical_mod(g_.at_node(v), m) : m; }

  int state(int v, const Queue& raw) {
    Queue m = normalize(v, raw);
    auto key = std::make_pair(v, m);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    const int id = static_cast<int>(states_.size());
    index_.emplace(key, id);
    states_.push_back({v, m, {}});
    const GlobNode nd = g_.at(v);
    std::vector<std::vector<int>> options;
    if (nd.kind == Kind::In) {
      for (const auto& b : nd.branches) options.push_back({state(b.target, m)});
    } else if (nd.kind == Kind::Out) {
      for (const auto& b : nd.branches) {
        std::vector<int> cands;
        for (const auto& q : candidates(nd, b, m)) cands.push_back(state(b.target, q));
        options.push_back(std::move(cands));
      }
    }
    states_[static_cast<std::size_t>(id)].options = std::move(options);
    return id;
  }

  // Queues M_i with M·<p l q> equivalent under the branch type to <p l q>·M_i.
  std::vector<Queue> candidates(const GlobNode& nd, const Branch& b, const Queue& m) {
    const auto& w = m.channel(nd.sender, nd.receiver);
    if (w.empty()) return {m};
    Global gi = g_.at_node(b.target);
    std::set<Label> occ = labels_of(gi);
    const Channel ch{nd.sender, nd.receiver};
    std::vector<Queue> out;
    // Keep the queue unchanged: needs w·l ~ l·w pointwise.
    bool same = label_equiv(gi, ch, w.front(), b.label, occ) && label_equiv(gi, ch, w.back(), b.label, occ);
    for (std::size_t k = 1; same && k < w.size(); ++k) same = label_equiv(gi, ch, w[k], w[k - 1], occ);
    if (same && !opt_.modulo_type_equiv) out.push_back(m);
    // Drop the first message and append the new one.
    if (label_equiv(gi, ch, w.front(), b.label, occ)) {
      Queue shifted = m;
      shifted.pop(nd.sender, nd.receiver);
      shifted.push(nd.sender, nd.receiver, b.label);
      if (out.empty() || shifted != out.front()) out.push_back(std::move(shifted));
    }
    return out;
  }

  void solve() {
    good_.assign(states_.size(), 1);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t s = 0; s < states_.size(); ++s) {
        if (!good_[s]) continue;
        for (const auto& opts : states_[s].options) {
          bool any = std::any_of(opts.begin(), opts.end(), [&](int t) { return good_[static_cast<std::size_t>(t)] != 0; });
          if (!any) {
            good_[s] = 0;
            changed = true;
            break;
          }
        }
      }
    }
  }

  Derivation build(int s, std::vector<char>& path) {
    const State& st = states_[static_cast<std::size_t>(s)];
    const GlobNode& nd = g_.at(st.node);
    Global here = g_.at_node(st.node);
    if (nd.kind == Kind::End) return {"agr-End", here, st.queue, {}, ""};
    if (path[static_cast<std::size_t>(s)]) return {"agr-Cycle", here, st.queue, {}, ""};
    path[static_cast<std::size_t>(s)] = 1;
    Derivation d{nd.kind == Kind::Out ? "agr-Out" : "agr-In", here, st.queue, {}, ""};
    std::string side;
    for (std::size_t i = 0; i < st.options.size(); ++i) {
      int pick = -1;
      for (int t : st.options[i])
        if (good_[static_cast<std::size_t>(t)]) {
          pick = t;
          break;
        }
      d.premises.push_back(build(pick, path));
      if (nd.kind == Kind::Out && !st.queue.channel(nd.sender, nd.receiver).empty()) {
        const Label& l = nd.branches[i].label;
        if (!side.empty()) side += "; ";
        side += "M.<" + nd.sender + " " + l + " " + nd.receiver + "> ~ <" + nd.sender + " " + l + " " + nd.receiver +
                ">." + to_string(states_[static_cast<std::size_t>(pick)].queue);
      }
    }
    d.side = side;
    path[static_cast<std::size_t>(s)] = 0;
    return d;
  }

  Global g_;
  AgreeOptions opt_;
  std::vector<State> states_;
  std::vector<char> good_;
  std::map<std::pair<int, Queue>, int> index_;
};

}  // namespace

bool agree(const Global& g, const Queue& m, AgreeOptions opt) {
  Global c = minimal_view(g);
  return AgreeSolver(c, opt).holds(c.root(), m);
}

std::optional<Derivation> agree_derivation(const Global& g, const Queue& m, AgreeOptions opt) {
  Global c = minimal_view(g);
  return AgreeSolver(c, opt).derive(c.root(), m);
}

// ---------------------------------------------------------------------------
// ok and the inductive balancing checkers.

namespace {

// M'' with M' equal per channel to M followed by M''.
std::optional<Queue> split_suffix(const Queue& prefix, const Queue& whole) {
  for (const auto& [c, seq] : prefix.channels()) {
    const auto& full = whole.channel(c.first, c.second);
    if (full.size() < seq.size() || !std::equal(seq.begin(), seq.end(), full.begin())) return std::nullopt;
  }
  Queue rest;
  for (const auto& [c, seq] : whole.channels()) {
    std::size_t skip = prefix.channel(c.first, c.second).size();
    for (std::size_t i = skip; i < seq.size(); ++i) rest.push(c.first, c.second, seq[i]);
  }
  return rest;
}

class Balancer {
 public:
  Balancer(const Global& g, BalanceConfig cfg, bool weak) : g_(g), cfg_(cfg), weak_(weak) {}

  std::optional<Derivation> run(int v, const Queue& m) { return visit(v, m); }
  bool exhausted() const { return steps_ > cfg_.max_steps; }

 private:
  bool read_at(int v, const Queue& m) {
    auto key = std::make_pair(v, m);
    if (auto it = read_memo_.find(key); it != read_memo_.end()) return it->second;
    bool r = read(g_.at_node(v), m);
    read_memo_.emplace(key, r);
    return r;
  }

  std::optional<Derivation> ok_at(int v, const Queue& m, const Queue& m2) {
    auto extra = split_suffix(m, m2);
    if (!extra) return std::nullopt;
    Global here = g_.at_node(v);
    auto agr = agree_derivation(here, *extra, cfg_.agree);
    if (!agr) return std::nullopt;
    Derivation d{"ok", here, m2, {}, "M'' = " + to_string(*extra)};
    d.premises.push_back(std::move(*agr));
    if (!weak_) {
      auto dr = dread_derivation(here, *extra);
      if (!dr) return std::nullopt;
      auto rd = read_derivation(here, m);
      if (!rd) return std::nullopt;
      d.premises.push_back(std::move(*dr));
      d.premises.push_back(std::move(*rd));
    }
    return d;
  }

  std::optional<Derivation> visit(int v, const Queue& m) {
    if (++steps_ > cfg_.max_steps) return std::nullopt;
    const GlobNode nd = g_.at(v);
    Global here = g_.at_node(v);
    const std::string pre = weak_ ? "wb-" : "ib-";
    if (nd.kind == Kind::End) {
      if (!m.empty()) return std::nullopt;
      return Derivation{pre + "End", here, m, {}, ""};
    }
    int seen = 0;
    for (auto it = hyp_.rbegin(); it != hyp_.rend(); ++it) {
      if (it->first != v) continue;
      ++seen;
      if (auto ok = ok_at(v, it->second, m)) {
        Derivation d{pre + "Cycle", here, m, {}, "hypothesis queue " + to_string(it->second)};
        d.premises.push_back(std::move(*ok));
        return d;
      }
    }
    if (seen > cfg_.max_revisits) return std::nullopt;
    if (!weak_ && !read_at(v, m)) return std::nullopt;
    hyp_.emplace_back(v, m);
    std::optional<Derivation> out;
    if (nd.kind == Kind::Out) {
      Derivation d{pre + "Out", here, m, {}, weak_ ? "" : "read"};
      bool all = true;
      for (const auto& b : nd.branches) {
        Queue q = m;
        q.push(nd.sender, nd.receiver, b.label);
        auto sub = visit(b.target, q);
        if (!sub) {
          all = false;
          break;
        }
        d.premises.push_back(std::move(*sub));
      }
      if (all) out = std::move(d);
    } else {
      const Label* head = m.head(nd.sender, nd.receiver);
      auto h = head ? here.find_branch(*head) : std::nullopt;
      if (h) {
        Queue rest = m;
        rest.pop(nd.sender, nd.receiver);
        if (auto sub = visit(nd.branches[*h].target, rest)) {
          Derivation d{pre + "In", here, m, {}, weak_ ? "" : "read"};
          d.premises.push_back(std::move(*sub));
          out = std::move(d);
        }
      }
    }
    hyp_.pop_back();
    return out;
  }

  Global g_;
  BalanceConfig cfg_;
  bool weak_;
  std::vector<std::pair<int, Queue>> hyp_;
  std::map<std::pair<int, Queue>, bool> read_memo_;
  std::size_t steps_ = 0;
};

BalanceResult balance(const Global& g, const Queue& m, BalanceConfig cfg, bool weak) {
  Global c = minimal_view(g);
  Balancer b(c, cfg, weak);
  BalanceResult r;
  r.derivation = b.run(c.root(), m);
  if (r.derivation) {
    r.verdict = BalanceResult::Verdict::Accept;
  } else {
    r.reason = b.exhausted() ? "search budget exhausted" : "no derivation within the revisit bound";
  }
  return r;
}

}  // namespace

bool ok_judgment(const Global& g, const Queue& m, const Queue& m2, AgreeOptions opt) {
  auto extra = split_suffix(m, m2);
  return extra && agree(g, *extra, opt) && dread(g, *extra) && read(g, m);
}

std::string to_string(BalanceResult::Verdict v) { return v == BalanceResult::Verdict::Accept ? "Accept" : "Unknown"; }

BalanceResult balanced_inductive(const Global& g, const Queue& m, BalanceConfig cfg) { return balance(g, m, cfg, false); }

BalanceResult weakly_balanced_inductive(const Global& g, const Queue& m, BalanceConfig cfg) {
  return balance(g, m, cfg, true);
}

std::size_t Derivation::size() const {
  std::size_t n = 1;
  for (const auto& p : premises) n += p.size();
  return n;
}

int Derivation::height() const {
  int h = 0;
  for (const auto& p : premises) h = std::max(h, p.height());
  return h + 1;
}

namespace {

void render(const Derivation& d, const std::function<std::string(const Global&)>& show, int indent, std::ostringstream& os) {
  os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << d.rule << "  " << show(d.type) << " || "
     << to_string(d.queue);
  if (!d.side.empty()) os << "   [" << d.side << "]";
  os << '\n';
  for (const auto& p : d.premises) render(p, show, indent + 1, os);
}

}  // namespace

std::string render_derivation(const Derivation& d, const std::function<std::string(const Global&)>& show) {
  std::ostringstream os;
  render(d, show, 0, os);
  return os.str();
}

}  // namespace mps
