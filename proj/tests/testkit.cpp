#include "testkit.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mps/cli.hpp"
#include "mps/inference.hpp"
#include "mps/typecheck.hpp"

namespace mps::testkit {

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

namespace {

template <class T>
const T& pick(Rng& rng, const std::vector<T>& xs) {
  return xs[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(xs.size()) - 1))];
}

std::vector<Label> distinct_labels(Rng& rng, const Alphabet& a, int count) {
  std::vector<Label> ls = a.labels;
  std::shuffle(ls.begin(), ls.end(), rng);
  ls.resize(static_cast<std::size_t>(std::min<int>(count, static_cast<int>(ls.size()))));
  return ls;
}

std::pair<Participant, Participant> random_pair(Rng& rng, const std::vector<Participant>& ps) {
  Participant s = pick(rng, ps);
  Participant r;
  do r = pick(rng, ps);
  while (r == s);
  return {s, r};
}

int branch_count(Rng& rng) { return coin(rng, 0.55) ? 1 : (coin(rng, 0.8) ? 2 : 3); }

}  // namespace

Global random_global(Rng& rng, int max_nodes, const Alphabet& a) {
  const int n = uniform(rng, 1, max_nodes);
  std::vector<GlobNode> nodes(static_cast<std::size_t>(n));
  for (auto& nd : nodes) {
    if (coin(rng, 0.12)) continue;  // End
    nd.kind = coin(rng) ? Kind::Out : Kind::In;
    std::tie(nd.sender, nd.receiver) = random_pair(rng, a.participants);
    for (const auto& l : distinct_labels(rng, a, branch_count(rng))) nd.branches.push_back({l, uniform(rng, 0, n - 1)});
  }
  return make_term(std::move(nodes), 0);
}

Global random_sync_global(Rng& rng, int max_nodes, const Alphabet& a) {
  Alphabet local = a;
  if (coin(rng) && local.participants.size() > 2) local.participants.resize(2);
  // Block layout: one output node followed by one input node per branch.
  std::vector<std::pair<int, int>> blocks;  // (first index, branches)
  int used = 0;
  while (true) {
    int b = branch_count(rng);
    if (used + 1 + b > max_nodes - 1) {
      if (!blocks.empty()) break;
      b = 1;
    }
    blocks.emplace_back(used, b);
    used += 1 + b;
    if (coin(rng, 0.3)) break;
  }
  const int end = used;
  std::vector<GlobNode> nodes(static_cast<std::size_t>(used + 1));
  for (auto [first, b] : blocks) {
    auto [s, r] = random_pair(rng, local.participants);
    GlobNode& out = nodes[static_cast<std::size_t>(first)];
    out.kind = Kind::Out;
    out.sender = s;
    out.receiver = r;
    auto ls = distinct_labels(rng, local, b);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const int in_index = first + 1 + static_cast<int>(i);
      out.branches.push_back({ls[i], in_index});
      GlobNode& in = nodes[static_cast<std::size_t>(in_index)];
      in.kind = Kind::In;
      in.sender = s;
      in.receiver = r;
      int target = coin(rng, 0.15) ? end : pick(rng, blocks).first;
      in.branches.push_back({ls[i], target});
    }
    // Unused input slots become End.
  }
  return make_term(std::move(nodes), 0);
}

Process random_process(Rng& rng, int max_nodes, const Participant& self, const Alphabet& a) {
  std::vector<Participant> peers;
  for (const auto& p : a.participants)
    if (p != self) peers.push_back(p);
  const int n = uniform(rng, 1, max_nodes);
  std::vector<ProcNode> nodes(static_cast<std::size_t>(n));
  for (auto& nd : nodes) {
    if (coin(rng, 0.15)) continue;
    nd.kind = coin(rng) ? Kind::Out : Kind::In;
    nd.peer = pick(rng, peers);
    for (const auto& l : distinct_labels(rng, a, branch_count(rng))) nd.branches.push_back({l, uniform(rng, 0, n - 1)});
  }
  return make_term(std::move(nodes), 0);
}

Network random_network(Rng& rng, int max_nodes, const Alphabet& a) {
  std::vector<Participant> ps = a.participants;
  if (coin(rng) && ps.size() > 2) ps.resize(2);
  const int each = std::max(1, max_nodes / static_cast<int>(ps.size()));
  std::map<Participant, Process> comps;
  for (const auto& p : ps) comps.emplace(p, random_process(rng, each, p, a));
  return Network::of(comps);
}

Queue random_queue(Rng& rng, int max_len, const Alphabet& a) {
  Queue q;
  const int len = uniform(rng, 0, max_len);
  for (int i = 0; i < len; ++i) {
    auto [s, r] = random_pair(rng, a.participants);
    q.push(s, r, pick(rng, a.labels));
  }
  return q;
}

Process project(const Global& g, const Participant& r) {
  std::vector<ProcNode> out;
  std::map<int, int> memo;
  std::function<int(int)> go = [&](int v) -> int {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    // Skip communications r does not play, along the first branch.
    std::set<int> seen;
    int u = v;
    while (g.at(u).kind != Kind::End && g.at(u).player() != r) {
      if (!seen.insert(u).second) break;
      u = g.at(u).branches.front().target;
    }
    const int idx = static_cast<int>(out.size());
    memo[v] = idx;
    out.emplace_back();
    const GlobNode& nd = g.at(u);
    if (nd.kind == Kind::End || nd.player() != r) return idx;
    ProcNode pn;
    pn.kind = nd.kind;
    pn.peer = nd.kind == Kind::Out ? nd.receiver : nd.sender;
    for (const auto& b : nd.branches) pn.branches.push_back({b.label, go(b.target)});
    out[static_cast<std::size_t>(idx)] = std::move(pn);
    return idx;
  };
  go(g.root());
  return make_term(std::move(out), 0);
}

Network project_all(const Global& g) {
  std::map<Participant, Process> comps;
  for (const auto& p : players(g)) comps.emplace(p, project(g, p));
  return Network::of(comps);
}

QueueMachine random_machine(Rng& rng, int max_states) {
  QueueMachine m;
  const int n = uniform(rng, 1, max_states);
  std::vector<std::string> states;
  for (int i = 0; i < n; ++i) states.push_back("s" + std::to_string(i));
  m.states.insert(states.begin(), states.end());
  m.start = states.front();
  m.input = coin(rng) ? std::set<Symbol>{"a"} : std::set<Symbol>{"a", "b"};
  m.alphabet = m.input;
  m.alphabet.insert(m.bottom);
  std::vector<Symbol> alpha(m.alphabet.begin(), m.alphabet.end());
  for (const auto& s : states)
    for (const auto& x : alpha) {
      std::vector<Symbol> w;
      const int len = uniform(rng, 0, 2);
      for (int i = 0; i < len; ++i) w.push_back(pick(rng, alpha));
      m.delta[{s, x}] = {pick(rng, states), w};
    }
  return m;
}

std::vector<Symbol> random_word(Rng& rng, const QueueMachine& m, int max_len) {
  std::vector<Symbol> in(m.input.begin(), m.input.end());
  std::vector<Symbol> w;
  const int len = uniform(rng, 0, max_len);
  for (int i = 0; i < len; ++i) w.push_back(pick(rng, in));
  return w;
}

Document random_document(Rng& rng) {
  Alphabet a;
  a.labels = {"a", "ok", "λ2"};
  Document d;
  for (int i = uniform(rng, 0, 3); i > 0; --i)
    d.procs.emplace("P" + std::to_string(i), random_process(rng, 5, pick(rng, a.participants), a));
  for (int i = uniform(rng, 0, 3); i > 0; --i) d.globals.emplace("G" + std::to_string(i), random_global(rng, 12, a));
  for (int i = uniform(rng, 0, 2); i > 0; --i) d.networks.emplace("N" + std::to_string(i), random_network(rng, 9, a));
  for (int i = uniform(rng, 0, 2); i > 0; --i) d.queues.emplace("M" + std::to_string(i), random_queue(rng, 4, a));
  if (coin(rng, 0.4)) d.machines.emplace("E", random_machine(rng, 3));
  return d;
}

// --- oracles -------------------------------------------------------------

bool read_oracle(const Global& g, const Queue& m) {
  // All states reachable from (root, m): the queue only loses channel heads.
  using State = std::pair<int, Queue>;
  std::map<State, std::vector<State>> premises;
  std::map<State, bool> axiom;
  std::deque<State> todo{{g.root(), m}};
  while (!todo.empty()) {
    State s = todo.front();
    todo.pop_front();
    if (premises.count(s) || axiom.count(s)) continue;
    const auto& [v, q] = s;
    const GlobNode& nd = g.at(v);
    if (q.empty()) {
      axiom[s] = true;
      continue;
    }
    if (nd.kind == Kind::End) {
      axiom[s] = false;
      continue;
    }
    Queue rest = q;
    if (nd.kind == Kind::In) {
      const auto& ch = q.channel(nd.sender, nd.receiver);
      for (const auto& b : nd.branches)
        if (!ch.empty() && ch.front() == b.label) {
          rest.pop(nd.sender, nd.receiver);
          break;
        }
    }
    auto& ps = premises[s];
    for (const auto& b : nd.branches) {
      ps.emplace_back(b.target, rest);
      todo.emplace_back(b.target, rest);
    }
  }
  std::map<State, bool> proven;
  for (const auto& [s, ok] : axiom) proven[s] = ok;
  for (const auto& [s, ps] : premises) proven[s] = false;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [s, ps] : premises) {
      if (proven[s]) continue;
      if (std::all_of(ps.begin(), ps.end(), [&](const State& t) { return proven[t]; })) {
        proven[s] = true;
        changed = true;
      }
    }
  }
  return proven[{g.root(), m}];
}

bool dread_oracle(const Global& g, const Queue& m) {
  std::vector<int> path;
  std::function<bool(int)> go = [&](int v) {
    if (std::find(path.begin(), path.end(), v) != path.end()) return read_oracle(g.at_node(v), m);
    const GlobNode& nd = g.at(v);
    if (nd.kind == Kind::End) return m.empty();
    path.push_back(v);
    bool ok = true;
    for (const auto& b : nd.branches) ok = ok && go(b.target);
    path.pop_back();
    return ok;
  };
  return go(g.root());
}

namespace {

// Supremum over maximal paths of the index of the first node satisfying
// `stop`; End and paths longer than the node count never stop.
Extended first_hit(const Global& g, const std::function<bool(const GlobNode&)>& stop) {
  const std::size_t limit = reachable_nodes(g).size();
  Extended worst = Extended::of(0);
  std::function<void(int, std::size_t)> go = [&](int v, std::size_t len) {
    if (worst.infinite) return;
    const GlobNode& nd = g.at(v);
    if (nd.kind == Kind::End || len > limit) {
      worst = Extended::inf();
      return;
    }
    if (stop(nd)) {
      worst = std::max(worst, Extended::of(len));
      return;
    }
    for (const auto& b : nd.branches) go(b.target, len + 1);
  };
  go(g.root(), 0);
  return worst;
}

}  // namespace

DepthValue depth_oracle(const Global& g, const Participant& p) {
  bool plays = false;
  for (int v : reachable_nodes(g))
    if (g.at(v).kind != Kind::End && g.at(v).player() == p) plays = true;
  if (!plays) return Extended::of(0);
  Extended d = first_hit(g, [&](const GlobNode& nd) { return nd.player() == p; });
  return d.infinite ? d : Extended::of(d.value + 1);
}

Weight weight_oracle(const Message& m, const Global& g) {
  return first_hit(g, [&](const GlobNode& nd) {
    if (nd.kind != Kind::In || nd.sender != m.sender || nd.receiver != m.receiver) return false;
    for (const auto& b : nd.branches)
      if (b.label == m.label) return true;
    return false;
  });
}

bool indist_oracle(const Message& a, const Message& b, const Global& g) {
  std::set<Label> occurring;
  for (int v : reachable_nodes(g))
    for (const auto& br : g.at(v).branches) occurring.insert(br.label);
  if (!occurring.count(a.label) || !occurring.count(b.label)) return false;
  for (int v : reachable_nodes(g)) {
    const GlobNode& nd = g.at(v);
    if (nd.kind != Kind::In || nd.sender != a.sender || nd.receiver != a.receiver) continue;
    Global here = g.at_node(v);
    auto ha = here.find_branch(a.label);
    auto hb = here.find_branch(b.label);
    if (!ha && !hb) continue;
    if (!ha || !hb) return false;
    if (!bisimilar(here.child(*ha), here.child(*hb))) return false;
  }
  return true;
}

bool equiv_oracle(const Queue& a, const Queue& b, const Global& g) {
  if (a == b) return true;
  std::set<Queue> seen{a};
  std::deque<Queue> todo{a};
  std::set<Label> labels;
  for (int v : reachable_nodes(g))
    for (const auto& br : g.at(v).branches) labels.insert(br.label);
  while (!todo.empty()) {
    Queue q = todo.front();
    todo.pop_front();
    for (const auto& [ch, ls] : q.channels())
      for (std::size_t i = 0; i < ls.size(); ++i)
        for (const auto& l : labels) {
          if (l == ls[i] || !indist_oracle({ch.first, ch.second, ls[i]}, {ch.first, ch.second, l}, g)) continue;
          // Rebuild the queue with position i of this channel replaced.
          Queue next;
          for (const auto& [ch2, ls2] : q.channels())
            for (std::size_t j = 0; j < ls2.size(); ++j)
              next.push(ch2.first, ch2.second, ch2 == ch && j == i ? l : ls2[j]);
          if (next == b) return true;
          if (seen.insert(next).second) todo.push_back(next);
        }
  }
  return false;
}

Queue perturb(Rng& rng, const Queue& m, const Global& g, int moves) {
  std::set<Label> labels;
  for (int v : reachable_nodes(g))
    for (const auto& br : g.at(v).branches) labels.insert(br.label);
  std::vector<Label> ls(labels.begin(), labels.end());
  Queue q = m;
  for (int k = 0; k < moves && !q.empty() && !ls.empty(); ++k) {
    auto msgs = q.messages();
    auto i = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(msgs.size()) - 1));
    Message repl = msgs[i];
    repl.label = pick(rng, ls);
    if (!indist_oracle(msgs[i], repl, g)) continue;
    msgs[i] = repl;
    q = Queue::of(msgs);
  }
  return q;
}

// --- suites --------------------------------------------------------------

void SuiteReport::fail(const std::string& what) {
  ++violations;
  if (failures.size() < 5) failures.push_back(what);
}

std::string SuiteReport::summary() const {
  std::ostringstream os;
  os << name << ": " << instances << " instances, " << violations << " violations";
  if (gated) os << ", " << gated << " gated";
  if (!note.empty()) os << ", " << note;
  return os.str();
}

std::string show(const Global& g) { return show_global(g); }

namespace {

std::vector<Participant> sorted_players(const Network& n) {
  auto ps = n.players();
  return {ps.begin(), ps.end()};
}

std::string show_net(const Network& n) {
  std::string s;
  for (const auto& [p, v] : n.components()) s += p + " |> " + print_expr(Process(n.pool(), v)) + "; ";
  return s;
}

// A network typed by some global type: either a projection that checks, or
// a random network with its canonical type.
struct TypedInstance {
  Global type;
  Network net;
  bool projected = false;
};

TypedInstance typed_instance(Rng& rng) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    if (coin(rng, 0.7)) {
      Global g = random_sync_global(rng, 12);
      Network n = project_all(g);
      if (n.empty() || !check(g, n).accepted) continue;
      return {g, n, true};
    }
    Network n = random_network(rng, 12);
    if (n.empty()) continue;
    return {gt_net(n, sorted_players(n)), n, false};
  }
  Network n = random_network(rng, 4);
  return {gt_net(n, sorted_players(n)), n, false};
}

}  // namespace

SuiteReport inference_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport r;
  r.name = "inference";
  Rng rng(seed);
  std::size_t discarded = 0, found = 0, gave_up = 0;
  for (std::size_t i = 0; i < count; ++i) {
    TypedInstance t = typed_instance(rng);
    ++r.instances;
    const Network& n = t.net;
    if (!check(t.type, n).accepted) {
      r.fail("reference type does not check: " + show_net(n));
      continue;
    }
    InferBudget budget;
    budget.max_solutions = 2;
    budget.max_steps = 20'000;
    InferResult res = infer(n, budget);
    discarded += res.discarded;
    if (!res.systems.empty()) {
      ++found;
    } else if (res.out_of_steps) {
      ++gave_up;
    } else {
      r.fail("no typing inferred up to height " + std::to_string(res.depth_reached) + " for " + show_net(n));
    }
    for (const auto& s : res.systems) {
      if (!check(s.solution, n).accepted) r.fail("inferred type does not check: " + show(s.solution));
      if (!bisimilar(solve(s.system, s.root), s.solution)) r.fail("solution differs from solve");
    }
    auto along = infer_along(n, t.type);
    if (!along) {
      r.fail("guided inference failed for " + show(t.type));
    } else {
      if (!bisimilar(along->solution, t.type)) r.fail("guided inference left the type " + show(t.type));
      ++r.gated;
    }
  }
  r.note = std::to_string(found) + " inferred, " + std::to_string(gave_up) + " out of steps, " +
           std::to_string(discarded) + " unsound candidates discarded";
  return r;
}

SuiteReport cosim_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport r;
  r.name = "co-simulation";
  Rng rng(seed);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < count; ++i) {
    TypedInstance t = typed_instance(rng);
    ++r.instances;
    if (!bounded(t.type)) continue;
    if (balanced_inductive(t.type, Queue{}).verdict != BalanceResult::Verdict::Accept) continue;
    ++r.gated;
    CoSimReport c = co_simulate(t.type, t.net, 10);
    pairs += c.pairs;
    if (c.violations() != 0) {
      std::string why = c.failures.empty() ? "" : c.failures.front();
      r.fail(show(t.type) + ": " + why);
    }
  }
  r.note = std::to_string(pairs) + " pairs explored";
  return r;
}

SuiteReport readability_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport r;
  r.name = "readability";
  Rng rng(seed);
  std::size_t reads = 0, dreads = 0;
  for (std::size_t i = 0; i < count; ++i) {
    Alphabet a;
    if (coin(rng)) a.participants.resize(2);
    Global g = random_global(rng, 12, a);
    Queue m1 = random_queue(rng, 2, a);
    Queue m2 = random_queue(rng, 2, a);
    Queue both = m1.concat(m2);
    ++r.instances;
    const std::string where = show(g) + " with " + to_string(both);
    const bool rd = read(g, both), drd = dread(g, both);
    reads += rd;
    dreads += drd;
    if (rd != read_oracle(g, both)) r.fail("read disagrees with the oracle on " + where);
    if (drd != dread_oracle(g, both)) r.fail("dread disagrees with the oracle on " + where);
    if (rd && !(read(g, m1) && read(g, m2))) r.fail("read of a concatenation without its parts: " + where);
    if (drd && !rd) r.fail("dread without read: " + where);
    if (drd && !(dread(g, m1) && dread(g, m2))) r.fail("dread of a concatenation without its parts: " + where);
    if (read(g, m1) && dread(g, m2) && !rd) r.fail("read then dread does not compose: " + where);
    if (drd)
      for (const auto& sub : subterms(g))
        if (!dread(sub, both)) {
          r.fail("dread lost at subterm " + show(sub) + " of " + where);
          break;
        }
    Queue moved = perturb(rng, both, g, 3);
    if (read(g, moved) != rd || dread(g, moved) != drd)
      r.fail("judgment not invariant under the type equivalence: " + where + " vs " + to_string(moved));
  }
  r.note = std::to_string(reads) + " read, " + std::to_string(dreads) + " dread";
  return r;
}

SuiteReport equivalence_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport r;
  r.name = "type-indexed equivalence";
  Rng rng(seed);
  std::size_t positive = 0;
  for (std::size_t i = 0; i < count; ++i) {
    Alphabet a;
    a.participants.resize(2);
    a.labels = {"a", "b"};
    Global g = random_global(rng, 12, a);
    Queue x = random_queue(rng, 4, a);
    Queue y = coin(rng) ? perturb(rng, x, g, 4) : random_queue(rng, 4, a);
    ++r.instances;
    bool expect = equiv_oracle(x, y, g);
    positive += expect;
    if (queue_equiv_g(x, y, g) != expect)
      r.fail(show(g) + ": " + to_string(x) + " vs " + to_string(y) + " expected " + (expect ? "equivalent" : "distinct"));
    // Single message pairs on one channel.
    Message m1{"p", "q", coin(rng) ? "a" : "b"}, m2{"p", "q", coin(rng) ? "a" : "b"};
    if (indist(m1, m2, g) != indist_oracle(m1, m2, g))
      r.fail("indistinguishability of " + m1.label + "," + m2.label + " in " + show(g));
  }
  r.note = std::to_string(positive) + " equivalent pairs";
  return r;
}

SuiteReport depth_weight_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport r;
  r.name = "depth and weight";
  Rng rng(seed);
  Alphabet a;
  for (std::size_t i = 0; i < count; ++i) {
    Global g = random_global(rng, 12, a);
    ++r.instances;
    for (const auto& p : a.participants)
      if (depth(g, p) != depth_oracle(g, p)) r.fail("depth of " + p + " in " + show(g));
    bool all_finite = true;
    for (const auto& sub : subterms(g))
      for (const auto& p : players(sub)) all_finite = all_finite && depth_oracle(sub, p).finite();
    if (bounded(g) != all_finite) r.fail("boundedness of " + show(g));
    Message m{"p", "q", "a"};
    if (weight(m, g) != weight_oracle(m, g)) r.fail("weight in " + show(g));
  }
  return r;
}

namespace {

bool same_machine(const QueueMachine& a, const QueueMachine& b) {
  return a.states == b.states && a.input == b.input && a.alphabet == b.alphabet && a.bottom == b.bottom &&
         a.start == b.start && a.delta == b.delta;
}

}  // namespace

SuiteReport roundtrip_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport r;
  r.name = "round-trip";
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    Document d = random_document(rng);
    ++r.instances;
    std::string text = print_document(d);
    Document e;
    try {
      e = parse(text);
    } catch (const std::exception& ex) {
      r.fail(std::string("reparse failed: ") + ex.what() + "\n" + text);
      continue;
    }
    bool ok = true;
    for (const auto& [n, p] : d.procs) ok = ok && e.procs.count(n) && bisimilar(p, e.procs.at(n));
    for (const auto& [n, g] : d.globals) ok = ok && e.globals.count(n) && bisimilar(g, e.globals.at(n));
    for (const auto& [n, net] : d.networks) ok = ok && e.networks.count(n) && net.equivalent(e.networks.at(n));
    for (const auto& [n, q] : d.queues) ok = ok && e.queues.count(n) && q == e.queues.at(n);
    for (const auto& [n, m] : d.machines) ok = ok && e.machines.count(n) && same_machine(m, e.machines.at(n));
    ok = ok && e.globals.size() >= d.globals.size() && e.queues.size() == d.queues.size() &&
         e.networks.size() == d.networks.size() && e.machines.size() == d.machines.size();
    if (!ok) r.fail("round-trip changed\n" + text);
  }
  return r;
}

namespace {

// enabled_config insists on boundedness, which encodings rarely have.
std::vector<Communication> steppable(const TypeConfig& c) {
  std::vector<Communication> out;
  for (const auto& b : type_communications(c.type))
    if (step_config(c, b)) out.push_back(b);
  return out;
}

}  // namespace

SuiteReport machine_step_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport r;
  r.name = "machine step simulation";
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    QueueMachine m = random_machine(rng, 4);
    MachineConfig c{m.start, random_word(rng, m, 4)};
    c.queue.push_back(m.bottom);
    ++r.instances;
    for (int k = 0; k < 6; ++k) {
      auto next = qm_step(m, c);
      TypeConfig tc = encode_config(m, c);
      if (!next) {
        if (!tc.queue.empty() || !steppable(tc).empty()) r.fail("halted machine with a live encoding");
        break;
      }
      // The head is read, then the written symbols are sent one by one.
      // Later outputs may also fire early, so other options are allowed.
      auto options = steppable(tc);
      Communication in{Dir::Input, kQmSender, kQmReceiver, c.queue.front()};
      if (std::find(options.begin(), options.end(), in) == options.end()) {
        r.fail("encoding does not offer the head input");
        break;
      }
      auto cur = step_config(tc, in);
      const auto& written = m.delta.at({c.state, c.queue.front()}).second;
      for (const auto& s : written)
        if (cur) cur = step_config(*cur, Communication{Dir::Output, kQmSender, kQmReceiver, s});
      TypeConfig want = encode_config(m, *next);
      if (!cur || !bisimilar(cur->type, want.type) || !(cur->queue == want.queue)) {
        r.fail("encoding does not follow the step from state " + c.state);
        break;
      }
      c = *next;
    }
  }
  return r;
}

SuiteReport machine_oracle_suite(std::size_t machines, std::size_t words, std::uint64_t seed) {
  SuiteReport r;
  r.name = "queue machine oracle";
  Rng rng(seed);
  std::vector<std::pair<QueueMachine, std::vector<Symbol>>> cases;
  Document zoo = parse_file(fixture("machines.mps"));
  for (const auto& [name, m] : zoo.machines)
    for (std::string w : {"", "a", "ab", "aa", "aab", "abab"}) {
      auto word = split_word(w, m);
      if (std::all_of(word.begin(), word.end(), [&](const Symbol& s) { return m.input.count(s) > 0; }))
        cases.emplace_back(m, word);
    }
  for (std::size_t i = 0; i < machines; ++i) {
    QueueMachine m = random_machine(rng, 4);
    for (std::size_t j = 0; j < words; ++j) cases.emplace_back(m, random_word(rng, m, 4));
  }
  std::size_t accepted = 0, balanced = 0;
  for (const auto& [m, w] : cases) {
    ++r.instances;
    RunResult run = qm_run(m, w, 100000);
    TypeConfig tc = encode_initial(m, w);
    bool bal = balanced_inductive(tc.type, tc.queue).verdict == BalanceResult::Verdict::Accept;
    accepted += run.accepted;
    balanced += bal;
    if (run.accepted && bal) r.fail("accepted run with a balanced encoding");
    if (bal && (run.accepted || run.steps < 100000)) r.fail("balanced encoding of a halting run");
  }
  r.note = std::to_string(accepted) + " accepted, " + std::to_string(balanced) + " balanced";
  return r;
}

}  // namespace mps::testkit
