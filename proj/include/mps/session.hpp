// Queues, networks, sessions and their labelled transition system.
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mps/terms.hpp"

namespace mps {

struct Message {
  Participant sender;
  Participant receiver;
  Label label;
  friend auto operator<=>(const Message&, const Message&) = default;
};

using Channel = std::pair<Participant, Participant>;

// Message queue modulo structural equivalence: one FIFO per ordered pair of
// participants. Empty channels are never stored, so == is equivalence.
class Queue {
 public:
  Queue() = default;
  static Queue of(const std::vector<Message>& msgs);

  void push(const Participant& from, const Participant& to, const Label& l);
  void push(const Message& m) { push(m.sender, m.receiver, m.label); }
  // Removes the channel head; the channel must be nonempty.
  void pop(const Participant& from, const Participant& to);
  void push_front(const Participant& from, const Participant& to, const Label& l);
  // Removes the last label of the channel; it must be `l`. Returns false otherwise.
  bool pop_back_if(const Participant& from, const Participant& to, const Label& l);

  const Label* head(const Participant& from, const Participant& to) const;
  const std::vector<Label>& channel(const Participant& from, const Participant& to) const;
  const std::map<Channel, std::vector<Label>>& channels() const { return channels_; }

  bool empty() const { return channels_.empty(); }
  std::size_t size() const;
  // Messages listed channel by channel.
  std::vector<Message> messages() const;
  // Per-channel concatenation.
  Queue concat(const Queue& rest) const;

  friend bool operator==(const Queue&, const Queue&) = default;
  friend auto operator<=>(const Queue& a, const Queue& b) { return a.channels_ <=> b.channels_; }

 private:
  std::map<Channel, std::vector<Label>> channels_;
};

enum class Dir : unsigned char { Output, Input };

struct Communication {
  Dir dir = Dir::Output;
  Participant sender;
  Participant receiver;
  Label label;

  const Participant& player() const { return dir == Dir::Output ? sender : receiver; }
  // "p->q!l" or "p->q?l".
  std::string str() const;
  static std::optional<Communication> parse(const std::string& text);

  friend auto operator<=>(const Communication&, const Communication&) = default;
};

// Participant -> process, with 0 components dropped. All components share
// one minimized process pool, so component equality is node equality.
class Network {
 public:
  using Key = std::map<Participant, int>;

  Network();
  Network(std::shared_ptr<const ProcPool> pool, Key comps);
  static Network of(const std::map<Participant, Process>& comps);

  const std::shared_ptr<const ProcPool>& pool() const { return pool_; }
  const Key& key() const { return comps_; }
  const Key& components() const { return comps_; }
  std::optional<Process> find(const Participant& p) const;
  bool has(const Participant& p) const { return comps_.count(p) != 0; }
  bool empty() const { return comps_.empty(); }
  ParticipantSet players() const;

  // Replaces the process of `p` by node `v` of the same pool.
  Network with(const Participant& p, int v) const;
  Network without(const Participant& p) const;

  // Equality up to bisimilarity of components.
  bool equivalent(const Network& o) const;

 private:
  std::shared_ptr<const ProcPool> pool_;
  Key comps_;
};

ParticipantSet players_net(const Network& n);

struct Session {
  Network net;
  Queue queue;
};

enum class Status : unsigned char { Live, Terminated, Deadlocked };
std::string to_string(Status s);

std::optional<Session> step_session(const Session& s, const Communication& beta);
// Sorted.
std::vector<Communication> enabled(const Session& s);
Status classify(const Session& s);

struct DeadlockInfo {
  // Participants waiting on an input choice, with the channel they read.
  std::vector<std::pair<Participant, Channel>> blocked_inputs;
  std::vector<Message> unread_heads;
};
DeadlockInfo diagnose(const Session& s);

// Picks among enabled communications. `choose` resolves one player's options
// in a lockstep step; `choose_step` resolves a single asynchronous step.
class ChoicePolicy {
 public:
  virtual ~ChoicePolicy() = default;
  virtual Communication choose(const Participant& player, const std::vector<Communication>& options) = 0;
  virtual Communication choose_step(const std::vector<Communication>& options);
};

class MinLabelPolicy : public ChoicePolicy {
 public:
  Communication choose(const Participant& player, const std::vector<Communication>& options) override;
};

class RandomPolicy : public ChoicePolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  Communication choose(const Participant& player, const std::vector<Communication>& options) override;
  Communication choose_step(const std::vector<Communication>& options) override;

 private:
  std::mt19937_64 rng_;
};

// Follows an explicit list of communications, then falls back to min-label.
// A scripted entry that is not enabled raises std::runtime_error.
class ScriptPolicy : public ChoicePolicy {
 public:
  explicit ScriptPolicy(std::vector<Communication> script) : script_(std::move(script)) {}
  Communication choose(const Participant& player, const std::vector<Communication>& options) override;
  Communication choose_step(const std::vector<Communication>& options) override;

 private:
  std::vector<Communication> script_;
  std::size_t next_ = 0;
  std::vector<char> used_;
};

std::unique_ptr<ChoicePolicy> make_policy(const std::string& spec, std::uint64_t seed);

// Groups sorted communications by player.
std::map<Participant, std::vector<Communication>> by_player(const std::vector<Communication>& comms);

struct LockstepStep {
  std::vector<Communication> delta;  // sorted
  Session next;
};
std::optional<LockstepStep> lockstep(const Session& s, ChoicePolicy& policy);
// Applies a coherent set; throws std::logic_error if some element is not
// enabled along the way or the result depends on the application order.
Session apply_all(const Session& s, const std::vector<Communication>& delta);

enum class LivenessMode : unsigned char { InputEnabling, QueueConsuming };

struct LivenessResult {
  enum class Verdict : unsigned char { Verified, Counterexample, HorizonExceeded } verdict = Verdict::Verified;
  // Lockstep sets along the counterexample (or along one undecided run).
  std::vector<std::vector<Communication>> trace;
  std::vector<Session> sessions;
  // Obligations left unmet at the end of the trace, rendered as communications.
  std::vector<std::string> unmet;
  std::size_t states = 0;
};
std::string to_string(LivenessResult::Verdict v);

LivenessResult check_liveness(const Session& s, int horizon, LivenessMode mode);

std::string to_string(const Queue& q);
std::string to_string(const Message& m);

}  // namespace mps
