// Transition system of type configurations (global type in parallel with a queue).
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/session.hpp"
#include "mps/terms.hpp"

namespace mps {

struct TypeConfig {
  Global type;
  Queue queue;
};

class UnboundedType : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ConfigRule : unsigned char { TopOut, TopIn, InsideOut, InsideIn };
std::string to_string(ConfigRule r);

struct ConfigStep {
  TypeConfig next;
  ConfigRule rule;  // rule applied at the root
};

std::optional<ConfigStep> step_config_rule(const TypeConfig& c, const Communication& beta);
std::optional<TypeConfig> step_config(const TypeConfig& c, const Communication& beta);

// Communications occurring in the type, in sorted order.
std::vector<Communication> type_communications(const Global& g);

// Throws UnboundedType unless the type is bounded.
std::vector<Communication> enabled_config(const TypeConfig& c);

struct ConfigLockstep {
  std::vector<Communication> delta;  // sorted
  TypeConfig next;
};
std::optional<ConfigLockstep> lockstep_config(const TypeConfig& c, ChoicePolicy& policy);
// Applies a coherent set of communications; throws std::logic_error when an
// element is not enabled or the outcome depends on the order.
TypeConfig apply_all_config(const TypeConfig& c, const std::vector<Communication>& delta);

// Stuck: not End and nothing enabled.
bool config_deadlocked(const TypeConfig& c);

}  // namespace mps
