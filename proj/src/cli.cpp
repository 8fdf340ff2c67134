#include "mps/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include "mps/inference.hpp"
#include "mps/queue_machine.hpp"
#include "mps/syntax.hpp"
#include "mps/typecheck.hpp"
#include "mps/wellformed.hpp"

namespace mps {

CoSimReport co_simulate(const Global& g, const Network& n, int depth) {
  CoSimReport r;
  struct Pair {
    Session s;
    TypeConfig c;
  };
  using Key = std::tuple<Network::Key, Queue, std::string, Queue>;
  auto key_of = [](const Pair& p) { return Key{p.s.net.key(), p.s.queue, canonical_key(p.c.type), p.c.queue}; };
  auto fail = [&r](std::size_t& counter, std::string msg) {
    ++counter;
    if (r.failures.size() < 8) r.failures.push_back(std::move(msg));
  };

  std::set<Key> seen;
  std::vector<Pair> frontier{{Session{n, {}}, TypeConfig{g, {}}}};
  seen.insert(key_of(frontier.front()));
  for (int d = 0; d <= depth && !frontier.empty(); ++d) {
    std::vector<Pair> next;
    for (const auto& p : frontier) {
      ++r.pairs;
      if (classify(p.s) == Status::Deadlocked) fail(r.deadlocks, "deadlocked session with queue " + to_string(p.s.queue));
      if (d == depth) continue;
      std::vector<Communication> type_side;
      try {
        type_side = enabled_config(p.c);
      } catch (const UnboundedType& e) {
        fail(r.typing_violations, std::string("unbounded configuration: ") + e.what());
        continue;
      }
      std::set<Communication> all(type_side.begin(), type_side.end());
      for (const auto& b : enabled(p.s)) all.insert(b);
      for (const auto& beta : all) {
        auto s2 = step_session(p.s, beta);
        auto c2 = step_config(p.c, beta);
        if (!s2) {
          fail(r.fidelity_violations, "type step " + beta.str() + " not matched by the session");
          continue;
        }
        if (!c2) {
          fail(r.reduction_violations, "session step " + beta.str() + " not matched by the type");
          continue;
        }
        if (!(s2->queue == c2->queue) || !check(c2->type, s2->net).accepted) {
          fail(r.typing_violations, "after " + beta.str() + " the configuration no longer types the session");
          continue;
        }
        Pair q{std::move(*s2), std::move(*c2)};
        if (seen.insert(key_of(q)).second) next.push_back(std::move(q));
      }
    }
    frontier = std::move(next);
  }
  return r;
}

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::vector<std::string> args;
  bool json = false;
  std::uint64_t seed = 0;
  Clock::time_point start = Clock::now();
  std::ostream* out = nullptr;
};

// Kills the process with status 124 unless cancelled first.
class Watchdog {
 public:
  Watchdog(double secs, std::ostream& err) {
    if (secs <= 0) return;
    thread_ = std::thread([this, secs, &err] {
      std::unique_lock lock(mu_);
      if (cv_.wait_for(lock, std::chrono::duration<double>(secs), [this] { return done_; })) return;
      err << "mps: timed out after " << secs << " s\n";
      err.flush();
      std::_Exit(124);
    });
  }
  ~Watchdog() {
    if (!thread_.joinable()) return;
    {
      std::lock_guard lock(mu_);
      done_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool done_ = false;
  std::thread thread_;
};

template <class Map>
const typename Map::mapped_type& lookup(const Map& m, const std::string& name, const char* what) {
  auto it = m.find(name);
  if (it == m.end()) throw UsageError(std::string("no ") + what + " named '" + name + "'");
  return it->second;
}

// A queue name from the document, or an inline "[p->q:l, ...]".
Queue queue_arg(const Document& d, const std::string& q) {
  if (q.empty()) return {};
  if (auto it = d.queues.find(q); it != d.queues.end()) return it->second;
  if (q.front() == '[') return parse("queue M = " + q).queues.at("M");
  throw UsageError("no queue named '" + q + "'");
}

void emit(const Context& c, json verdicts, json artifacts) {
  json j;
  j["command"] = c.args;
  j["verdicts"] = std::move(verdicts);
  j["artifacts"] = std::move(artifacts);
  j["timing_ms"] = std::chrono::duration<double, std::milli>(Clock::now() - c.start).count();
  *c.out << j.dump() << "\n";
}

json strings(const std::vector<Communication>& cs) {
  json a = json::array();
  for (const auto& b : cs) a.push_back(b.str());
  return a;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

// ---------------------------------------------------------------------------

int cmd_check(const Context& c, const std::string& file, const std::string& gname, const std::string& nname) {
  Document d = parse_file(file);
  const Global& g = lookup(d.globals, gname, "global type");
  const Network& n = lookup(d.networks, nname, "network");
  TypingResult r = check(g, n);
  if (c.json) {
    emit(c, {{"check", r.accepted ? "Accept" : "Reject"}},
         {{"path", r.path}, {"reason", r.reason}, {"judgments", r.judgments}});
  } else {
    *c.out << (r.accepted ? "Accept" : "Reject") << "  " << gname << " |- " << nname << "\n";
    if (!r.accepted) {
      for (const auto& step : r.path) *c.out << "  " << step << "\n";
      *c.out << "  reason: " << r.reason << "\n";
    }
  }
  return r.accepted ? 0 : 1;
}

int cmd_infer(const Context& c, const std::string& file, const std::string& nname, bool all, std::size_t max,
              int depth, const std::string& mode, const std::string& along) {
  if (mode != "equations" && mode != "solved" && mode != "both")
    throw UsageError("--emit must be equations, solved or both");
  Document d = parse_file(file);
  const Network& n = lookup(d.networks, nname, "network");
  const bool eqs = mode != "solved", sol = mode != "equations";
  if (!along.empty()) {
    auto s = infer_along(n, lookup(d.globals, along, "global type"));
    if (c.json) {
      json a = json::object();
      if (s) {
        json e = json::array();
        for (const auto& [x, p] : s->system.equations) e.push_back({{"var", x}, {"rhs", print_gpat(p)}});
        a = {{"root", s->root}, {"height", s->height}, {"equations", e}, {"solution", show_global(s->solution)}};
      }
      emit(c, {{"infer", s ? "Found" : "None"}}, a);
    } else if (s) {
      if (eqs) *c.out << print_equations(s->system);
      if (sol) *c.out << print_global(s->solution, "G");
    } else {
      *c.out << along << " does not type " << nname << "\n";
    }
    return s ? 0 : 1;
  }
  InferBudget budget;
  budget.max_solutions = all ? std::numeric_limits<std::size_t>::max() : std::max<std::size_t>(max, 1);
  budget.max_depth = depth;
  std::size_t count = 0;
  json systems = json::array();
  InferResult res = infer(n, budget, [&](const InferredSystem& s) {
    ++count;
    const bool retypes = check(s.solution, n).accepted;
    if (c.json) {
      json e = json::array();
      for (const auto& [x, p] : s.system.equations) e.push_back({{"var", x}, {"rhs", print_gpat(p)}});
      json one{{"root", s.root}, {"height", s.height}};
      if (eqs) one["equations"] = e;
      if (sol) one["solution"] = show_global(s.solution);
      one["checks"] = retypes;
      systems.push_back(std::move(one));
    } else {
      if (all || max > 1) *c.out << "// system " << count << ", height " << s.height << "\n";
      if (eqs) *c.out << print_equations(s.system);
      if (sol) *c.out << print_global(s.solution, count == 1 ? "G" : "G" + std::to_string(count));
      c.out->flush();
    }
    return true;
  });
  if (c.json) {
    emit(c, {{"infer", res.systems.empty() ? "None" : "Found"}},
         {{"systems", systems}, {"exhausted", res.exhausted}, {"out_of_steps", res.out_of_steps},
          {"depth_reached", res.depth_reached},
          {"discarded", res.discarded}});
  } else if (res.systems.empty()) {
    *c.out << "no global type up to height " << res.depth_reached << "\n";
  }
  return res.systems.empty() ? 1 : 0;
}

int cmd_analyze(const Context& c, const std::string& file, const std::string& gname, const std::string& qname,
                bool derivation, int max_revisits, bool modulo) {
  Document d = parse_file(file);
  const Global& g = lookup(d.globals, gname, "global type");
  const Queue m = queue_arg(d, qname);
  BalanceConfig cfg;
  cfg.max_revisits = max_revisits;
  cfg.agree.modulo_type_equiv = modulo;

  const auto witness = unbounded_witness(g);
  const bool rd = read(g, m), dr = dread(g, m), ag = agree(g, m, cfg.agree);
  const BalanceResult weak = weakly_balanced_inductive(g, m, cfg);
  const BalanceResult strong = balanced_inductive(g, m, cfg);
  std::vector<std::pair<std::string, Weight>> weights;
  for (const auto& [ch, labels] : m.channels()) {
    Message head{ch.first, ch.second, labels.front()};
    weights.emplace_back(to_string(head), weight(head, g));
  }

  auto show = [](const Global& t) { return show_global(t); };
  if (c.json) {
    json v{{"bounded", !witness},
           {"read", rd},
           {"dread", dr},
           {"agree", ag},
           {"weakly_balanced", to_string(weak.verdict)},
           {"balanced", to_string(strong.verdict)}};
    json a = json::object();
    if (witness) a["unbounded_witness"] = {{"subterm", show_global(witness->subterm)}, {"participant", witness->player}};
    json w = json::object();
    for (const auto& [msg, x] : weights) w[msg] = x.str();
    a["weights"] = w;
    if (!weak.reason.empty()) a["weak_reason"] = weak.reason;
    if (!strong.reason.empty()) a["balanced_reason"] = strong.reason;
    if (derivation && strong.derivation) a["derivation"] = render_derivation(*strong.derivation, show);
    else if (derivation && weak.derivation) a["weak_derivation"] = render_derivation(*weak.derivation, show);
    emit(c, v, a);
  } else {
    auto& o = *c.out;
    o << "bounded          " << yes_no(!witness);
    if (witness) o << "  (" << witness->player << " in " << show_global(witness->subterm) << ")";
    o << "\nread             " << yes_no(rd) << "\ndread            " << yes_no(dr) << "\nagree            "
      << yes_no(ag) << "\nweakly balanced  " << to_string(weak.verdict);
    if (!weak.reason.empty()) o << "  (" << weak.reason << ")";
    o << "\nbalanced         " << to_string(strong.verdict);
    if (!strong.reason.empty()) o << "  (" << strong.reason << ")";
    o << "\n";
    for (const auto& [msg, x] : weights) o << "weight " << msg << "  " << x.str() << "\n";
    if (derivation && strong.derivation) o << render_derivation(*strong.derivation, show);
    else if (derivation && weak.derivation) o << render_derivation(*weak.derivation, show);
  }
  return !witness && strong.verdict == BalanceResult::Verdict::Accept ? 0 : 1;
}

// Communications a configuration can perform, without requiring boundedness.
std::vector<Communication> config_options(const TypeConfig& c) {
  std::vector<Communication> out;
  for (const auto& b : type_communications(c.type))
    if (step_config(c, b)) out.push_back(b);
  return out;
}

std::string config_status(const TypeConfig& c) {
  if (c.type.kind() == Kind::End) return c.queue.empty() ? "Terminated" : "Deadlocked";
  return config_options(c).empty() ? "Deadlocked" : "Live";
}

int cmd_simulate(const Context& c, const std::string& file, const std::string& target, int steps, bool lock,
                 const std::string& policy_spec, bool config, const std::string& qname) {
  Document d = parse_file(file);
  const Queue q0 = queue_arg(d, qname);
  std::unique_ptr<ChoicePolicy> policy;
  try {
    policy = make_policy(policy_spec, c.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  auto line = [&](int i, const std::vector<Communication>& delta, const Queue& q, const std::string& cls) {
    if (c.json) {
      json j{{"step", i}, {"delta", strings(delta)}, {"queue", to_string(q)}, {"classification", cls}};
      if (config) j["config"] = true;
      *c.out << j.dump() << "\n";
    } else {
      std::string ds;
      for (const auto& b : delta) ds += (ds.empty() ? "" : " ") + b.str();
      *c.out << i << "  " << ds << "  " << to_string(q) << "\n";
    }
  };

  int taken = 0;
  std::string final_status;
  try {
    if (config) {
      TypeConfig cur{lookup(d.globals, target, "global type"), q0};
      for (int i = 1; i <= steps; ++i) {
        std::vector<Communication> delta;
        if (lock) {
          auto st = lockstep_config(cur, *policy);
          if (!st) break;
          delta = st->delta;
          cur = std::move(st->next);
        } else {
          auto opts = config_options(cur);
          if (opts.empty()) break;
          Communication b = policy->choose_step(opts);
          cur = *step_config(cur, b);
          delta = {b};
        }
        taken = i;
        line(i, delta, cur.queue, config_status(cur));
      }
      final_status = config_status(cur);
    } else {
      Session cur{lookup(d.networks, target, "network"), q0};
      for (int i = 1; i <= steps; ++i) {
        std::vector<Communication> delta;
        if (lock) {
          auto st = lockstep(cur, *policy);
          if (!st) break;
          delta = st->delta;
          cur = std::move(st->next);
        } else {
          auto opts = enabled(cur);
          if (opts.empty()) break;
          Communication b = policy->choose_step(opts);
          cur = *step_session(cur, b);
          delta = {b};
        }
        taken = i;
        line(i, delta, cur.queue, to_string(classify(cur)));
      }
      final_status = to_string(classify(cur));
    }
  } catch (const UnboundedType& e) {
    throw UsageError(std::string("lockstep needs a bounded type: ") + e.what());
  }
  if (c.json) emit(c, {{"final", final_status}}, {{"steps", taken}});
  else *c.out << "final: " << final_status << " after " << taken << " step" << (taken == 1 ? "" : "s") << "\n";
  return 0;
}

int cmd_qm(const Context& c, const std::string& file, const std::string& mname, const std::string& input, bool run,
           bool enc, std::size_t max_steps, bool analyze) {
  Document d = parse_file(file);
  const QueueMachine& m = lookup(d.machines, mname, "machine");
  const std::vector<Symbol> w = split_word(input, m);
  if (!run && !enc && !analyze) run = true;
  // Verdicts become comments when a document follows.
  const std::string lead = enc ? "// " : "";
  json v = json::object(), a = json::object();
  auto& o = *c.out;
  if (run) {
    RunResult r;
    try {
      r = qm_run(m, w, max_steps);
    } catch (const InvalidInputSymbol& e) {
      throw UsageError(e.what());
    }
    const std::string verdict =
        (r.accepted ? "Accepted(" + std::to_string(r.steps) : "RunningAfter(" + std::to_string(max_steps)) + ")";
    v["run"] = verdict;
    a["final_state"] = r.last.state;
    if (!c.json) o << lead << verdict << "\n";
  }
  if (analyze) {
    const TypeConfig cfg = encode_initial(m, w);
    const BalanceResult r = balanced_inductive(cfg.type, cfg.queue);
    v["balanced"] = to_string(r.verdict);
    if (!c.json) o << lead << "balanced  " << to_string(r.verdict) << (r.reason.empty() ? "" : "  (" + r.reason + ")") << "\n";
  }
  if (enc) {
    Document e;
    for (const auto& [state, g] : encode(m)) e.globals.emplace("G_" + state, g);
    e.queues.emplace("M0", encode_initial(m, w).queue);
    const std::string text = print_document(e);
    a["document"] = text;
    if (!c.json) o << text;
  }
  if (c.json) emit(c, v, a);
  return 0;
}

// Steps to the nearest reachable deadlocked session, if within `depth`.
std::optional<int> deadlock_distance(const Session& s0, int depth) {
  std::set<std::pair<Network::Key, Queue>> seen{{s0.net.key(), s0.queue}};
  std::vector<Session> frontier{s0};
  for (int d = 0; d <= depth && !frontier.empty(); ++d) {
    std::vector<Session> next;
    for (const auto& s : frontier) {
      if (classify(s) == Status::Deadlocked) return d;
      for (const auto& b : enabled(s)) {
        Session t = *step_session(s, b);
        if (seen.insert({t.net.key(), t.queue}).second) next.push_back(std::move(t));
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

int cmd_properties(const Context& c, const std::string& file, const std::string& gname, const std::string& nname,
                   int depth) {
  Document d = parse_file(file);
  const Global& g = lookup(d.globals, gname, "global type");
  const Network& n = lookup(d.networks, nname, "network");
  auto& o = *c.out;

  std::string gate;
  if (!check(g, n).accepted) gate = "check Reject";
  else if (!bounded(g)) gate = "bounded no";
  else if (auto b = balanced_inductive(g, {}); b.verdict != BalanceResult::Verdict::Accept)
    gate = "balanced " + to_string(b.verdict);
  if (!gate.empty()) {
    const auto dl = deadlock_distance(Session{n, {}}, depth);
    if (c.json) {
      json a = json::object();
      if (dl) a["deadlock_after"] = *dl;
      emit(c, {{"gate", gate}}, a);
    } else {
      o << "gate failed: " << gate << "\n";
      if (dl) o << "the session deadlocks after " << *dl << " step" << (*dl == 1 ? "" : "s") << "\n";
    }
    return 1;
  }

  const CoSimReport r = co_simulate(g, n, depth);
  const Session s0{n, {}};
  const LivenessResult inputs = check_liveness(s0, depth, LivenessMode::InputEnabling);
  const LivenessResult orphans = check_liveness(s0, depth, LivenessMode::QueueConsuming);
  const bool pass = r.violations() == 0 && inputs.verdict != LivenessResult::Verdict::Counterexample &&
                    orphans.verdict != LivenessResult::Verdict::Counterexample;
  if (c.json) {
    emit(c,
         {{"properties", pass ? "pass" : "fail"},
          {"no_locked_inputs", to_string(inputs.verdict)},
          {"no_orphan_messages", to_string(orphans.verdict)}},
         {{"pairs", r.pairs},
          {"fidelity_violations", r.fidelity_violations},
          {"reduction_violations", r.reduction_violations},
          {"typing_violations", r.typing_violations},
          {"deadlocks", r.deadlocks},
          {"failures", r.failures}});
  } else {
    o << (pass ? "pass" : "fail") << "  " << r.pairs << " pairs to depth " << depth << "\n"
      << "fidelity violations   " << r.fidelity_violations << "\nreduction violations  " << r.reduction_violations
      << "\ntyping violations     " << r.typing_violations << "\ndeadlocks             " << r.deadlocks
      << "\nno locked inputs      " << to_string(inputs.verdict) << "\nno orphan messages    "
      << to_string(orphans.verdict) << "\n";
    for (const auto& f : r.failures) o << "  " << f << "\n";
  }
  return pass ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Global types with split outputs and inputs for asynchronous sessions", "mps"};
  app.require_subcommand(1);
  Context ctx;
  ctx.args = args;
  ctx.out = &out;
  double timeout = 0;
  app.add_flag("--json", ctx.json, "Machine-readable output");
  app.add_option("--seed", ctx.seed, "Seed for random choice policies");
  app.add_option("--timeout", timeout, "Give up after this many seconds (exit 124)");
  app.fallthrough();

  std::string file, gname, nname, qname, target;
  std::function<int()> action;

  auto* check_cmd = app.add_subcommand("check", "Type check a network against a global type");
  check_cmd->add_option("file", file)->required();
  check_cmd->add_option("global", gname)->required();
  check_cmd->add_option("network", nname)->required();
  check_cmd->callback([&] { action = [&] { return cmd_check(ctx, file, gname, nname); }; });

  bool all = false;
  std::size_t max = 1;
  int depth = 0;
  std::string mode = "equations";
  auto* infer_cmd = app.add_subcommand("infer", "Infer global types for a network");
  infer_cmd->add_option("file", file)->required();
  infer_cmd->add_option("network", nname)->required();
  infer_cmd->add_flag("--all", all, "Every solution up to the height bound");
  infer_cmd->add_option("--max", max, "Number of solutions");
  infer_cmd->add_option("--depth", depth, "Derivation height bound (0: default)");
  infer_cmd->add_option("--emit", mode, "equations, solved or both");
  infer_cmd->add_option("--along", gname, "Follow the derivation of this global type");
  infer_cmd->callback([&] { action = [&] { return cmd_infer(ctx, file, nname, all, max, depth, mode, gname); }; });

  bool derivation = false, modulo = false;
  int revisits = 1;
  auto* analyze_cmd = app.add_subcommand("analyze", "Boundedness, readability, agreement and balancing");
  analyze_cmd->add_option("file", file)->required();
  analyze_cmd->add_option("global", gname)->required();
  analyze_cmd->add_option("queue", qname, "Queue name or inline [p->q:l, ...]");
  analyze_cmd->add_option("--emit", mode, "derivation");
  analyze_cmd->add_option("--max-revisits", revisits);
  analyze_cmd->add_flag("--modulo-equiv", modulo, "Compare agreement hypotheses up to queue equivalence");
  analyze_cmd->callback([&] {
    derivation = mode == "derivation";
    action = [&] { return cmd_analyze(ctx, file, gname, qname, derivation, revisits, modulo); };
  });

  int steps = 20;
  bool lock = false, config = false;
  std::string policy = "min-label";
  auto* sim_cmd = app.add_subcommand("simulate", "Run a session or a type configuration");
  sim_cmd->add_option("file", file)->required();
  sim_cmd->add_option("target", target, "Network, or global type with --config")->required();
  sim_cmd->add_option("--steps", steps);
  sim_cmd->add_flag("--lockstep", lock);
  sim_cmd->add_option("--policy", policy, "min-label, random or script:[p->q!l, ...]");
  sim_cmd->add_flag("--config", config, "Target is a global type");
  sim_cmd->add_option("--queue", qname, "Initial queue");
  sim_cmd->callback([&] { action = [&] { return cmd_simulate(ctx, file, target, steps, lock, policy, config, qname); }; });

  std::string input;
  bool run = false, enc = false, qm_analyze = false;
  std::size_t max_steps = 100000;
  auto* qm_cmd = app.add_subcommand("qm", "Queue machines and their encoding");
  qm_cmd->add_option("file", file)->required();
  qm_cmd->add_option("machine", target)->required();
  qm_cmd->add_option("--input", input);
  qm_cmd->add_flag("--run", run);
  qm_cmd->add_flag("--encode", enc);
  qm_cmd->add_option("--max-steps", max_steps);
  qm_cmd->add_flag("--analyze", qm_analyze, "Balancing of the encoded initial configuration");
  qm_cmd->callback([&] { action = [&] { return cmd_qm(ctx, file, target, input, run, enc, max_steps, qm_analyze); }; });

  int prop_depth = 8;
  auto* prop_cmd = app.add_subcommand("properties", "Co-simulate a typed network with its global type");
  prop_cmd->add_option("file", file)->required();
  prop_cmd->add_option("global", gname)->required();
  prop_cmd->add_option("network", nname)->required();
  prop_cmd->add_option("--depth", prop_depth);
  prop_cmd->callback([&] { action = [&] { return cmd_properties(ctx, file, gname, nname, prop_depth); }; });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  Watchdog dog(timeout, err);
  try {
    return action();
  } catch (const UsageError& e) {
    err << "mps: " << e.what() << "\n";
  } catch (const ParseError& e) {
    err << file << ":" << e.what() << "\n";
  } catch (const InvalidMachine& e) {
    err << "mps: invalid machine: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "mps: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace mps
