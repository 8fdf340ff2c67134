// Well-formedness analyses on global types: depth and boundedness, message weight,
// readability judgments, agreement, and the sound inductive balancing checkers.
#pragma once

#include <compare>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/session.hpp"
#include "mps/terms.hpp"

namespace mps {

// Natural number or infinity.
struct Extended {
  bool infinite = false;
  unsigned long value = 0;

  static Extended inf() { return {true, 0}; }
  static Extended of(unsigned long v) { return {false, v}; }
  bool finite() const { return !infinite; }
  std::string str() const { return infinite ? "inf" : std::to_string(value); }

  friend bool operator==(const Extended&, const Extended&) = default;
  friend std::strong_ordering operator<=>(const Extended& a, const Extended& b) {
    if (a.infinite || b.infinite) return a.infinite <=> b.infinite;
    return a.value <=> b.value;
  }
};
using DepthValue = Extended;
using Weight = Extended;

DepthValue depth(const Global& g, const Participant& p);

struct BoundWitness {
  Global subterm;
  Participant player;
};
// Empty when bounded; otherwise a subterm with a player of infinite depth.
std::optional<BoundWitness> unbounded_witness(const Global& g);
bool bounded(const Global& g);

Weight weight(const Message& m, const Global& g);

bool read(const Global& g, const Queue& m);
bool dread(const Global& g, const Queue& m);

class ChannelMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws ChannelMismatch when the messages use different channels.
bool indist(const Message& a, const Message& b, const Global& g);
bool queue_equiv_g(const Queue& a, const Queue& b, const Global& g);

struct AgreeOptions {
  // Compare hypothesis queues up to the type-indexed equivalence instead of
  // per-channel equality.
  bool modulo_type_equiv = false;
};
bool agree(const Global& g, const Queue& m, AgreeOptions opt = {});

struct Derivation {
  std::string rule;
  Global type;
  Queue queue;
  std::vector<Derivation> premises;
  std::string side;  // rendered side conditions, may be empty

  std::size_t size() const;
  int height() const;
};

// None when not derivable.
std::optional<Derivation> agree_derivation(const Global& g, const Queue& m, AgreeOptions opt = {});
std::optional<Derivation> dread_derivation(const Global& g, const Queue& m);
std::optional<Derivation> read_derivation(const Global& g, const Queue& m);

// The cycle judgment: M' splits per channel as M followed by M'', and M''
// agrees with and is deep read by g, while M is read by g.
bool ok_judgment(const Global& g, const Queue& m, const Queue& m2, AgreeOptions opt = {});

struct BalanceConfig {
  int max_revisits = 1;
  AgreeOptions agree;
  std::size_t max_steps = 200000;  // search nodes before giving up with Unknown
};

struct BalanceResult {
  enum class Verdict : unsigned char { Accept, Unknown } verdict = Verdict::Unknown;
  std::optional<Derivation> derivation;
  std::string reason;  // why the search gave up
};
std::string to_string(BalanceResult::Verdict v);

BalanceResult balanced_inductive(const Global& g, const Queue& m, BalanceConfig cfg = {});
BalanceResult weakly_balanced_inductive(const Global& g, const Queue& m, BalanceConfig cfg = {});

// Indented rule tree; `show` renders a type.
std::string render_derivation(const Derivation& d, const std::function<std::string(const Global&)>& show);

}  // namespace mps
