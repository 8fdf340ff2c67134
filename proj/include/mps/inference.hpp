// Goal-directed inference of global types for a network, producing regular
// systems of equations, and their solution into term graphs.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/session.hpp"
#include "mps/terms.hpp"

namespace mps {

using Var = std::string;

// Finite global type pattern; leaves are End or variables.
struct Gpat {
  enum class Tag : unsigned char { End, Var, Comm } tag = Tag::End;
  Var var;
  Kind kind = Kind::Out;  // Out or In when tag == Comm
  Participant sender;
  Participant receiver;
  std::vector<std::pair<Label, Gpat>> branches;

  static Gpat end() { return {}; }
  static Gpat ref(Var v) {
    Gpat g;
    g.tag = Tag::Var;
    g.var = std::move(v);
    return g;
  }
  std::set<Var> vars() const;
  friend bool operator==(const Gpat&, const Gpat&) = default;
};

struct EquationSystem {
  // Variables in order of definition; each defined once.
  std::vector<std::pair<Var, Gpat>> equations;

  const Gpat* find(const Var& x) const;
  // False when a variable is defined twice.
  bool add(Var x, Gpat p);
  std::size_t size() const { return equations.size(); }
  std::set<Var> vars() const;
  std::set<Var> domain() const;
  // No chain of variable-to-variable equations revisits a variable.
  bool guarded() const;
};

class SolveError : public std::runtime_error {
 public:
  enum class Kind : unsigned char { Unguarded, UnboundVariable };
  SolveError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
  Kind kind;
};

Global solve(const EquationSystem& e, const Var& x);

// Players of a variable: three-case definition (own equation, goal network,
// otherwise empty), closed over the equations.
ParticipantSet plays(const EquationSystem& e, const std::map<Var, ParticipantSet>& goals, const Gpat& p);

struct InferBudget {
  std::size_t max_solutions = 1;
  int max_depth = 0;  // derivation height; 0 selects the default
  std::size_t max_steps = 20'000'000;  // goals expanded plus candidates built
};

struct InferredSystem {
  EquationSystem system;
  Var root;
  Global solution;
  int height = 0;
};

struct InferResult {
  std::vector<InferredSystem> systems;
  // Stopped because of the budget rather than running out of derivations.
  bool exhausted = false;
  int depth_reached = 0;
  // Gave up because of max_steps.
  bool out_of_steps = false;
  // Derivations whose solution does not type the network.
  std::size_t discarded = 0;
};

// Default height bound: four times the number of distinct subnetworks.
int default_infer_depth(const Network& n);

// Streams systems by increasing derivation height, skipping solutions
// bisimilar to an earlier one or not typing `n`. `emit` returning false
// stops the search.
InferResult infer(const Network& n, InferBudget budget = {},
                  const std::function<bool(const InferredSystem&)>& emit = nullptr);

// Inference steered by a known typing `g`: every goal expands the player of
// the matching type node, and a cycle closes when an ancestor goal has the
// same network and a bisimilar type. None when `g` does not type `n`.
std::optional<InferredSystem> infer_along(const Network& n, const Global& g);

// Same equations up to a bijective renaming mapping one root to the other.
bool same_up_to_renaming(const EquationSystem& a, const Var& ra, const EquationSystem& b, const Var& rb);

}  // namespace mps
