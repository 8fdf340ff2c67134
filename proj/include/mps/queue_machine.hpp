// Deterministic single-queue automata and their encoding as type configurations.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/global_lts.hpp"
#include "mps/terms.hpp"

namespace mps {

using Symbol = std::string;

struct QueueMachine {
  std::set<std::string> states;
  std::set<Symbol> input;     // input alphabet
  std::set<Symbol> alphabet;  // queue alphabet, contains input and bottom
  Symbol bottom = "$";
  std::string start;
  std::map<std::pair<std::string, Symbol>, std::pair<std::string, std::vector<Symbol>>> delta;

  // Empty when well formed; otherwise the first violated condition.
  std::string validate() const;
};

class InvalidMachine : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidInputSymbol : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MachineConfig {
  std::string state;
  std::vector<Symbol> queue;
  friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

// One transition; none on an empty queue.
std::optional<MachineConfig> qm_step(const QueueMachine& m, const MachineConfig& c);

struct RunResult {
  bool accepted = false;
  std::size_t steps = 0;  // steps taken (== max_steps when still running)
  MachineConfig last;
};

// Runs from <start, w $>. Throws InvalidInputSymbol when w leaves the input alphabet.
RunResult qm_run(const QueueMachine& m, const std::vector<Symbol>& w, std::size_t max_steps);

inline const Participant kQmSender = "p";
inline const Participant kQmReceiver = "q";

// One global type per state, all in a single pool.
std::map<std::string, Global> encode(const QueueMachine& m);
TypeConfig encode_config(const QueueMachine& m, const MachineConfig& c);
TypeConfig encode_initial(const QueueMachine& m, const std::vector<Symbol>& w);

// Splits "a b c" or "abc" (single-character symbols) into symbols.
std::vector<Symbol> split_word(const std::string& text, const QueueMachine& m);

}  // namespace mps
