#include "mps/session.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>

namespace mps {

namespace {

const std::vector<Label> kNoLabels;

}  // namespace

Queue Queue::of(const std::vector<Message>& msgs) {
  Queue q;
  for (const auto& m : msgs) q.push(m);
  return q;
}

void Queue::push(const Participant& from, const Participant& to, const Label& l) {
  channels_[{from, to}].push_back(l);
}

void Queue::pop(const Participant& from, const Participant& to) {
  auto it = channels_.find({from, to});
  if (it == channels_.end()) throw std::logic_error("pop from empty channel");
  it->second.erase(it->second.begin());
  if (it->second.empty()) channels_.erase(it);
}

void Queue::push_front(const Participant& from, const Participant& to, const Label& l) {
  auto& ch = channels_[{from, to}];
  ch.insert(ch.begin(), l);
}

bool Queue::pop_back_if(const Participant& from, const Participant& to, const Label& l) {
  auto it = channels_.find({from, to});
  if (it == channels_.end() || it->second.back() != l) return false;
  it->second.pop_back();
  if (it->second.empty()) channels_.erase(it);
  return true;
}

const Label* Queue::head(const Participant& from, const Participant& to) const {
  auto it = channels_.find({from, to});
  return it == channels_.end() ? nullptr : &it->second.front();
}

const std::vector<Label>& Queue::channel(const Participant& from, const Participant& to) const {
  auto it = channels_.find({from, to});
  return it == channels_.end() ? kNoLabels : it->second;
}

std::size_t Queue::size() const {
  std::size_t n = 0;
  for (const auto& [ch, ls] : channels_) n += ls.size();
  return n;
}

std::vector<Message> Queue::messages() const {
  std::vector<Message> out;
  for (const auto& [ch, ls] : channels_)
    for (const auto& l : ls) out.push_back({ch.first, ch.second, l});
  return out;
}

Queue Queue::concat(const Queue& rest) const {
  Queue out = *this;
  for (const auto& [ch, ls] : rest.channels_) {
    auto& dst = out.channels_[ch];
    dst.insert(dst.end(), ls.begin(), ls.end());
  }
  return out;
}

std::string Communication::str() const {
  return sender + "->" + receiver + (dir == Dir::Output ? "!" : "?") + label;
}

std::optional<Communication> Communication::parse(const std::string& text) {
  auto arrow = text.find("->");
  if (arrow == std::string::npos || arrow == 0) return std::nullopt;
  auto mark = text.find_first_of("!?", arrow + 2);
  if (mark == std::string::npos || mark == arrow + 2 || mark + 1 >= text.size()) return std::nullopt;
  Communication c;
  c.sender = text.substr(0, arrow);
  c.receiver = text.substr(arrow + 2, mark - arrow - 2);
  c.dir = text[mark] == '!' ? Dir::Output : Dir::Input;
  c.label = text.substr(mark + 1);
  if (c.sender == c.receiver) return std::nullopt;
  return c;
}

Network::Network() : pool_(end_process().pool()) {}

Network::Network(std::shared_ptr<const ProcPool> pool, Key comps) : pool_(std::move(pool)) {
  for (auto& [p, v] : comps)
    if ((*pool_)[v].kind != Kind::End) comps_.emplace(p, v);
}

Network Network::of(const std::map<Participant, Process>& comps) {
  if (comps.empty()) return Network();
  std::vector<Process> terms;
  for (const auto& [p, t] : comps) terms.push_back(t);
  auto merged = merge_terms(terms);
  Key key;
  std::size_t i = 0;
  for (const auto& [p, t] : comps) key.emplace(p, merged[i++].root());
  return Network(merged.front().pool(), std::move(key));
}

std::optional<Process> Network::find(const Participant& p) const {
  auto it = comps_.find(p);
  if (it == comps_.end()) return std::nullopt;
  return Process(pool_, it->second);
}

ParticipantSet Network::players() const {
  ParticipantSet out;
  for (const auto& [p, v] : comps_) out.insert(p);
  return out;
}

Network Network::with(const Participant& p, int v) const {
  Network out = *this;
  if ((*pool_)[v].kind == Kind::End)
    out.comps_.erase(p);
  else
    out.comps_[p] = v;
  return out;
}

Network Network::without(const Participant& p) const {
  Network out = *this;
  out.comps_.erase(p);
  return out;
}

bool Network::equivalent(const Network& o) const {
  if (players() != o.players()) return false;
  if (pool_ == o.pool_ && pool_->minimal()) return comps_ == o.comps_;
  for (const auto& [p, v] : comps_)
    if (!bisimilar(Process(pool_, v), Process(o.pool_, o.comps_.at(p)))) return false;
  return true;
}

ParticipantSet players_net(const Network& n) { return n.players(); }

std::string to_string(Status s) {
  switch (s) {
    case Status::Live: return "Live";
    case Status::Terminated: return "Terminated";
    case Status::Deadlocked: return "Deadlocked";
  }
  return "?";
}

std::optional<Session> step_session(const Session& s, const Communication& beta) {
  auto proc = s.net.find(beta.player());
  if (!proc) return std::nullopt;
  const ProcNode& nd = proc->node();
  if (beta.dir == Dir::Output) {
    if (nd.kind != Kind::Out || nd.peer != beta.receiver) return std::nullopt;
    auto i = proc->find_branch(beta.label);
    if (!i) return std::nullopt;
    Session out{s.net.with(beta.sender, nd.branches[*i].target), s.queue};
    out.queue.push(beta.sender, beta.receiver, beta.label);
    return out;
  }
  if (nd.kind != Kind::In || nd.peer != beta.sender) return std::nullopt;
  const Label* head = s.queue.head(beta.sender, beta.receiver);
  if (!head || *head != beta.label) return std::nullopt;
  auto i = proc->find_branch(beta.label);
  if (!i) return std::nullopt;
  Session out{s.net.with(beta.receiver, nd.branches[*i].target), s.queue};
  out.queue.pop(beta.sender, beta.receiver);
  return out;
}

std::vector<Communication> enabled(const Session& s) {
  std::vector<Communication> out;
  for (const auto& [p, v] : s.net.components()) {
    const ProcNode& nd = (*s.net.pool())[v];
    if (nd.kind == Kind::Out) {
      for (const auto& b : nd.branches) out.push_back({Dir::Output, p, nd.peer, b.label});
    } else if (nd.kind == Kind::In) {
      const Label* head = s.queue.head(nd.peer, p);
      if (!head) continue;
      for (const auto& b : nd.branches)
        if (b.label == *head) out.push_back({Dir::Input, nd.peer, p, b.label});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Status classify(const Session& s) {
  if (s.net.empty() && s.queue.empty()) return Status::Terminated;
  return enabled(s).empty() ? Status::Deadlocked : Status::Live;
}

DeadlockInfo diagnose(const Session& s) {
  DeadlockInfo info;
  for (const auto& [p, v] : s.net.components()) {
    const ProcNode& nd = (*s.net.pool())[v];
    if (nd.kind == Kind::In) info.blocked_inputs.push_back({p, {nd.peer, p}});
  }
  for (const auto& [ch, ls] : s.queue.channels()) info.unread_heads.push_back({ch.first, ch.second, ls.front()});
  return info;
}

Communication ChoicePolicy::choose_step(const std::vector<Communication>& options) {
  Participant first = options.front().player();
  for (const auto& c : options) first = std::min(first, c.player());
  std::vector<Communication> mine;
  for (const auto& c : options)
    if (c.player() == first) mine.push_back(c);
  return choose(first, mine);
}

Communication MinLabelPolicy::choose(const Participant&, const std::vector<Communication>& options) {
  return *std::min_element(options.begin(), options.end(), [](const Communication& a, const Communication& b) {
    return std::tie(a.label, a) < std::tie(b.label, b);
  });
}

Communication RandomPolicy::choose(const Participant&, const std::vector<Communication>& options) {
  std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
  return options[pick(rng_)];
}

Communication RandomPolicy::choose_step(const std::vector<Communication>& options) {
  std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
  return options[pick(rng_)];
}

Communication ScriptPolicy::choose(const Participant& player, const std::vector<Communication>& options) {
  used_.resize(script_.size(), 0);
  for (std::size_t i = next_; i < script_.size(); ++i) {
    if (used_[i] || script_[i].player() != player) continue;
    used_[i] = 1;
    while (next_ < script_.size() && used_[next_]) ++next_;
    if (std::find(options.begin(), options.end(), script_[i]) == options.end())
      throw std::runtime_error("scripted communication " + script_[i].str() + " is not enabled");
    return script_[i];
  }
  return MinLabelPolicy().choose(player, options);
}

Communication ScriptPolicy::choose_step(const std::vector<Communication>& options) {
  used_.resize(script_.size(), 0);
  while (next_ < script_.size() && used_[next_]) ++next_;
  if (next_ == script_.size()) return ChoicePolicy::choose_step(options);
  const Communication& c = script_[next_];
  used_[next_] = 1;
  ++next_;
  if (std::find(options.begin(), options.end(), c) == options.end())
    throw std::runtime_error("scripted communication " + c.str() + " is not enabled");
  return c;
}

std::unique_ptr<ChoicePolicy> make_policy(const std::string& spec, std::uint64_t seed) {
  if (spec.empty() || spec == "min" || spec == "min-label") return std::make_unique<MinLabelPolicy>();
  if (spec == "random") return std::make_unique<RandomPolicy>(seed);
  const std::string prefix = "script:";
  if (spec.rfind(prefix, 0) == 0) {
    std::string body = spec.substr(prefix.size());
    if (!body.empty() && body.front() == '[') body.erase(body.begin());
    if (!body.empty() && body.back() == ']') body.pop_back();
    std::vector<Communication> script;
    std::string item;
    auto flush = [&] {
      std::string t;
      for (char ch : item)
        if (ch != ' ' && ch != '\t') t += ch;
      item.clear();
      if (t.empty()) return;
      auto c = Communication::parse(t);
      if (!c) throw std::invalid_argument("bad scripted communication '" + t + "'");
      script.push_back(*c);
    };
    for (char ch : body) {
      if (ch == ',') flush();
      else item += ch;
    }
    flush();
    return std::make_unique<ScriptPolicy>(std::move(script));
  }
  throw std::invalid_argument("unknown policy '" + spec + "'");
}

std::map<Participant, std::vector<Communication>> by_player(const std::vector<Communication>& comms) {
  std::map<Participant, std::vector<Communication>> out;
  for (const auto& c : comms) out[c.player()].push_back(c);
  return out;
}

namespace {

Session apply_in_order(const Session& s, const std::vector<Communication>& delta) {
  Session cur = s;
  for (const auto& b : delta) {
    auto next = step_session(cur, b);
    if (!next) throw std::logic_error("communication " + b.str() + " not enabled inside lockstep");
    cur = std::move(*next);
  }
  return cur;
}

}  // namespace

Session apply_all(const Session& s, const std::vector<Communication>& delta) {
  Session fwd = apply_in_order(s, delta);
  std::vector<Communication> rev(delta.rbegin(), delta.rend());
  Session bwd = apply_in_order(s, rev);
  if (fwd.net.key() != bwd.net.key() || fwd.queue != bwd.queue)
    throw std::logic_error("lockstep result depends on application order");
  return fwd;
}

std::optional<LockstepStep> lockstep(const Session& s, ChoicePolicy& policy) {
  auto groups = by_player(enabled(s));
  if (groups.empty()) return std::nullopt;
  LockstepStep step;
  for (const auto& [p, opts] : groups) step.delta.push_back(policy.choose(p, opts));
  std::sort(step.delta.begin(), step.delta.end());
  step.next = apply_all(s, step.delta);
  return step;
}

std::string to_string(LivenessResult::Verdict v) {
  switch (v) {
    case LivenessResult::Verdict::Verified: return "Verified";
    case LivenessResult::Verdict::Counterexample: return "CounterexampleTrace";
    case LivenessResult::Verdict::HorizonExceeded: return "HorizonExceeded";
  }
  return "?";
}

namespace {

// One obligation: some lockstep set must contain an input on `ch` whose label is in `labels`.
struct Obligation {
  Channel ch;
  std::set<Label> labels;

  bool met_by(const std::vector<Communication>& delta) const {
    for (const auto& c : delta)
      if (c.dir == Dir::Input && c.sender == ch.first && c.receiver == ch.second && labels.count(c.label)) return true;
    return false;
  }
};

class LivenessSearch {
 public:
  LivenessSearch(std::vector<Obligation> obs, int horizon) : obs_(std::move(obs)), horizon_(horizon) {}

  LivenessResult run(const Session& s) {
    std::vector<char> unmet(obs_.size(), 1);
    explore(s, unmet, 0);
    result_.states = verified_.size() + visits_;
    if (found_) {
      result_.verdict = LivenessResult::Verdict::Counterexample;
    } else if (horizon_hit_) {
      result_.verdict = LivenessResult::Verdict::HorizonExceeded;
      result_.trace = horizon_trace_;
      result_.sessions = horizon_sessions_;
      result_.unmet = horizon_unmet_;
    }
    return result_;
  }

 private:
  using State = std::tuple<Network::Key, Queue, std::vector<char>>;

  // Returns true iff every complete computation from here meets all obligations.
  bool explore(const Session& s, const std::vector<char>& unmet, int depth) {
    if (found_) return false;
    if (std::find(unmet.begin(), unmet.end(), 1) == unmet.end()) return true;
    State st{s.net.key(), s.queue, unmet};
    if (verified_.count(st)) return true;
    ++visits_;
    if (on_path_.count(st)) {
      report(s, unmet);
      return false;
    }
    auto groups = by_player(enabled(s));
    if (groups.empty()) {
      report(s, unmet);
      return false;
    }
    if (depth >= horizon_) {
      if (!horizon_hit_) {
        horizon_hit_ = true;
        horizon_trace_ = path_;
        horizon_sessions_ = sessions_;
        horizon_sessions_.push_back(s);
        horizon_unmet_ = describe(unmet);
      }
      return false;
    }
    on_path_.insert(st);
    std::vector<std::vector<Communication>> opts;
    for (auto& [p, o] : groups) opts.push_back(o);
    std::vector<std::size_t> idx(opts.size(), 0);
    bool all_ok = true;
    while (true) {
      std::vector<Communication> delta;
      for (std::size_t i = 0; i < opts.size(); ++i) delta.push_back(opts[i][idx[i]]);
      std::sort(delta.begin(), delta.end());
      Session next = apply_all(s, delta);
      std::vector<char> rest = unmet;
      for (std::size_t k = 0; k < obs_.size(); ++k)
        if (rest[k] && obs_[k].met_by(delta)) rest[k] = 0;
      path_.push_back(delta);
      sessions_.push_back(s);
      bool ok = explore(next, rest, depth + 1);
      path_.pop_back();
      sessions_.pop_back();
      if (found_) {
        on_path_.erase(st);
        return false;
      }
      all_ok = all_ok && ok;
      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == opts[i].size()) idx[i++] = 0;
      if (i == idx.size()) break;
    }
    on_path_.erase(st);
    if (all_ok) verified_.insert(st);
    return all_ok;
  }

  void report(const Session& s, const std::vector<char>& unmet) {
    found_ = true;
    result_.trace = path_;
    result_.sessions = sessions_;
    result_.sessions.push_back(s);
    result_.unmet = describe(unmet);
  }

  std::vector<std::string> describe(const std::vector<char>& unmet) const {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < obs_.size(); ++k) {
      if (!unmet[k]) continue;
      std::string labels;
      for (const auto& l : obs_[k].labels) labels += (labels.empty() ? "" : "|") + l;
      out.push_back(obs_[k].ch.first + "->" + obs_[k].ch.second + "?" + labels);
    }
    return out;
  }

  std::vector<Obligation> obs_;
  int horizon_;
  std::set<State> verified_;
  std::set<State> on_path_;
  std::vector<std::vector<Communication>> path_;
  std::vector<Session> sessions_;
  bool found_ = false;
  bool horizon_hit_ = false;
  std::vector<std::vector<Communication>> horizon_trace_;
  std::vector<Session> horizon_sessions_;
  std::vector<std::string> horizon_unmet_;
  std::size_t visits_ = 0;
  LivenessResult result_;
};

}  // namespace

LivenessResult check_liveness(const Session& s, int horizon, LivenessMode mode) {
  std::vector<Obligation> obs;
  if (mode == LivenessMode::InputEnabling) {
    for (const auto& [p, v] : s.net.components()) {
      const ProcNode& nd = (*s.net.pool())[v];
      if (nd.kind != Kind::In) continue;
      Obligation o{{nd.peer, p}, {}};
      for (const auto& b : nd.branches) o.labels.insert(b.label);
      obs.push_back(std::move(o));
    }
  } else {
    for (const auto& [ch, ls] : s.queue.channels()) obs.push_back({ch, {ls.front()}});
  }
  LivenessSearch search(std::move(obs), horizon);
  return search.run(s);
}

std::string to_string(const Message& m) { return m.sender + "->" + m.receiver + ":" + m.label; }

std::string to_string(const Queue& q) {
  std::string out = "[";
  bool first = true;
  for (const auto& m : q.messages()) {
    if (!first) out += ", ";
    first = false;
    out += to_string(m);
  }
  return out + "]";
}

}  // namespace mps
