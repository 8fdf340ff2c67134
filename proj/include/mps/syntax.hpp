// Surface syntax of .mps documents: parser and printer.
//
//   proc P = s!nd; P1            proc P1 = s?{ok; P, ko; s!pr; P}
//   global G = p s!nd; G1        global G1 = p s?{nd; G2, pr; G2}
//   network N { p |> P, s |> S }
//   queue M = [p->s:nd, p->s:pr]
//   machine E { states s; input a; queue_alphabet a, $; bottom $; start s;
//               delta (s,a) -> (s, ""), (s,$) -> (s, "") }
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/inference.hpp"
#include "mps/queue_machine.hpp"
#include "mps/session.hpp"
#include "mps/terms.hpp"

namespace mps {

struct Document {
  std::map<std::string, Process> procs;
  std::map<std::string, Global> globals;
  std::map<std::string, Network> networks;
  std::map<std::string, Queue> queues;
  std::map<std::string, QueueMachine> machines;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind : unsigned char {
    Syntax,
    UnboundName,
    DuplicateLabelInChoice,
    EmptyChoice,
    SelfCommunication,
    InvalidMachine,
    DuplicateDefinition,
    UnguardedRecursion,
    TooLarge,
  };
  ParseError(Kind k, int line, int col, const std::string& msg);
  Kind kind;
  int line;
  int col;
  std::string detail;
};
std::string to_string(ParseError::Kind k);

Document parse(const std::string& text);
Document parse_file(const std::string& path);

// Inline expression; nodes named in `names` print as references.
std::string print_expr(const Global& g, const std::map<int, std::string>& names = {});
std::string print_expr(const Process& p, const std::map<int, std::string>& names = {});

// Names for the root and every node with in-degree at least two: `base`,
// `base_1`, `base_2`, ... in discovery order.
std::map<int, std::string> definition_names(const Global& g, const std::string& base);
std::map<int, std::string> definition_names(const std::vector<Process>& roots, const std::string& base);

// Definitions ("global G = ...") for the global type under the name `name`.
std::string print_global(const Global& g, const std::string& name);
std::string print_process(const Process& p, const std::string& name);
// Network definition together with the process definitions it needs.
std::string print_network(const Network& n, const std::string& name);
std::string print_queue(const Queue& q, const std::string& name);
std::string print_machine(const QueueMachine& m, const std::string& name);
std::string print_document(const Document& d);

// One-line rendering of a type: its expression, followed by the shared
// definitions it uses.
std::string show_global(const Global& g);

// "global X = ..." per equation, in definition order.
std::string print_equations(const EquationSystem& e);
std::string print_gpat(const Gpat& p);

// Maximum term graph size accepted by the parser (MPS_MAX_NODES, default 10000).
std::size_t max_nodes();

}  // namespace mps
