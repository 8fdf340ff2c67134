#include "mps/queue_machine.hpp"

#include <deque>
#include <sstream>

namespace mps {

std::string QueueMachine::validate() const {
  if (states.empty()) return "no states";
  if (!states.count(start)) return "start state '" + start + "' is not a state";
  if (!alphabet.count(bottom)) return "bottom symbol '" + bottom + "' is not in the queue alphabet";
  if (input.count(bottom)) return "bottom symbol '" + bottom + "' is in the input alphabet";
  for (const auto& a : input)
    if (!alphabet.count(a)) return "input symbol '" + a + "' is not in the queue alphabet";
  for (const auto& q : states)
    for (const auto& a : alphabet) {
      auto it = delta.find({q, a});
      if (it == delta.end()) return "transition for (" + q + "," + a + ") is missing";
      if (!states.count(it->second.first)) return "transition (" + q + "," + a + ") targets an unknown state";
      for (const auto& b : it->second.second)
        if (!alphabet.count(b)) return "transition (" + q + "," + a + ") writes unknown symbol '" + b + "'";
    }
  for (const auto& [k, v] : delta)
    if (!states.count(k.first) || !alphabet.count(k.second))
      return "transition for (" + k.first + "," + k.second + ") is outside the machine";
  return "";
}

std::optional<MachineConfig> qm_step(const QueueMachine& m, const MachineConfig& c) {
  if (c.queue.empty()) return std::nullopt;
  auto it = m.delta.find({c.state, c.queue.front()});
  if (it == m.delta.end()) throw InvalidMachine("no transition for (" + c.state + "," + c.queue.front() + ")");
  MachineConfig next{it->second.first, std::vector<Symbol>(c.queue.begin() + 1, c.queue.end())};
  next.queue.insert(next.queue.end(), it->second.second.begin(), it->second.second.end());
  return next;
}

RunResult qm_run(const QueueMachine& m, const std::vector<Symbol>& w, std::size_t max_steps) {
  for (const auto& a : w)
    if (!m.input.count(a)) throw InvalidInputSymbol("symbol '" + a + "' is not in the input alphabet");
  RunResult r;
  // Same transitions as qm_step, on a deque so long runs stay linear.
  std::string state = m.start;
  std::deque<Symbol> queue(w.begin(), w.end());
  queue.push_back(m.bottom);
  while (r.steps < max_steps && !queue.empty()) {
    auto it = m.delta.find({state, queue.front()});
    if (it == m.delta.end()) throw InvalidMachine("no transition for (" + state + "," + queue.front() + ")");
    queue.pop_front();
    state = it->second.first;
    queue.insert(queue.end(), it->second.second.begin(), it->second.second.end());
    ++r.steps;
  }
  r.last = {state, std::vector<Symbol>(queue.begin(), queue.end())};
  r.accepted = r.last.queue.empty();
  return r;
}

std::map<std::string, Global> encode(const QueueMachine& m) {
  if (auto err = m.validate(); !err.empty()) throw InvalidMachine(err);
  std::vector<GlobNode> nodes;
  std::map<std::string, int> root;
  for (const auto& q : m.states) {
    root[q] = static_cast<int>(nodes.size());
    nodes.emplace_back();
  }
  for (const auto& q : m.states) {
    GlobNode in;
    in.kind = Kind::In;
    in.sender = kQmSender;
    in.receiver = kQmReceiver;
    for (const auto& a : m.alphabet) {
      const auto& [next, written] = m.delta.at({q, a});
      int target = root[next];
      for (auto it = written.rbegin(); it != written.rend(); ++it) {
        GlobNode out;
        out.kind = Kind::Out;
        out.sender = kQmSender;
        out.receiver = kQmReceiver;
        out.branches.push_back({*it, target});
        target = static_cast<int>(nodes.size());
        nodes.push_back(std::move(out));
      }
      in.branches.push_back({a, target});
    }
    nodes[static_cast<std::size_t>(root[q])] = std::move(in);
  }
  std::vector<int> roots;
  for (const auto& q : m.states) roots.push_back(root[q]);
  std::vector<int> map;
  auto pool = make_pool(std::move(nodes), roots, &map);
  std::map<std::string, Global> out;
  for (const auto& q : m.states) out.emplace(q, Global(pool, map[static_cast<std::size_t>(root[q])]));
  return out;
}

TypeConfig encode_config(const QueueMachine& m, const MachineConfig& c) {
  auto types = encode(m);
  Queue queue;
  for (const auto& a : c.queue) queue.push(kQmSender, kQmReceiver, a);
  return {types.at(c.state), queue};
}

TypeConfig encode_initial(const QueueMachine& m, const std::vector<Symbol>& w) {
  MachineConfig c{m.start, w};
  c.queue.push_back(m.bottom);
  return encode_config(m, c);
}

std::vector<Symbol> split_word(const std::string& text, const QueueMachine& m) {
  std::vector<Symbol> out;
  if (text.find(' ') != std::string::npos) {
    std::istringstream is(text);
    for (std::string s; is >> s;) out.push_back(s);
    return out;
  }
  // Greedy longest match against the queue alphabet.
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t best = 0;
    for (const auto& a : m.alphabet)
      if (a.size() > best && text.compare(i, a.size(), a) == 0) best = a.size();
    if (best == 0) best = 1;
    out.push_back(text.substr(i, best));
    i += best;
  }
  return out;
}

}  // namespace mps
