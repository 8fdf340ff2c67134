// Typing of networks by global types, and the canonical type of a network.
#pragma once

#include <string>
#include <vector>

#include "mps/session.hpp"
#include "mps/terms.hpp"

namespace mps {

struct TypingResult {
  bool accepted = false;
  // Rule applications from the root to the first failing premise (on reject),
  // or the number of distinct judgments visited (on accept).
  std::vector<std::string> path;
  std::string reason;
  std::size_t judgments = 0;
};

TypingResult check(const Global& g, const Network& n);

// Canonical global type following the participant list `order`.
Global gt_net(const Network& n, const std::vector<Participant>& order);

struct TypedNetwork {
  Global type;
  TypingResult evidence;
};
// gt_net over the participants in lexicographic order, checked.
TypedNetwork any_network_typable(const Network& n);

}  // namespace mps
