#include "mps/syntax.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace mps {

std::string to_string(ParseError::Kind k) {
  switch (k) {
    case ParseError::Kind::Syntax: return "SyntaxError";
    case ParseError::Kind::UnboundName: return "UnboundName";
    case ParseError::Kind::DuplicateLabelInChoice: return "DuplicateLabelInChoice";
    case ParseError::Kind::EmptyChoice: return "EmptyChoice";
    case ParseError::Kind::SelfCommunication: return "SelfCommunication";
    case ParseError::Kind::InvalidMachine: return "InvalidMachine";
    case ParseError::Kind::DuplicateDefinition: return "DuplicateDefinition";
    case ParseError::Kind::UnguardedRecursion: return "UnguardedRecursion";
    case ParseError::Kind::TooLarge: return "TooLarge";
  }
  return "?";
}

ParseError::ParseError(Kind k, int l, int c, const std::string& msg)
    : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + to_string(k) + ": " + msg),
      kind(k), line(l), col(c), detail(msg) {}

std::size_t max_nodes() {
  if (const char* env = std::getenv("MPS_MAX_NODES")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 10000;
}

namespace {

// ---------------------------------------------------------------------------
// Lexer.

struct Token {
  enum class Type : unsigned char { Ident, Str, Sym, Eof } type = Type::Eof;
  std::string text;
  int line = 1;
  int col = 1;
};

bool ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '$' || c == '\'' || c >= 0x80;
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (src.compare(i, 2, "//") == 0) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (ident_char(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(static_cast<unsigned char>(src[j]))) ++j;
      t.type = Token::Type::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') throw ParseError(ParseError::Kind::Syntax, line, col, "unterminated string");
      t.type = Token::Type::Str;
      t.text = src.substr(i + 1, j - i - 1);
      advance(j - i + 1);
    } else if (src.compare(i, 2, "|>") == 0 || src.compare(i, 2, "->") == 0) {
      t.type = Token::Type::Sym;
      t.text = src.substr(i, 2);
      advance(2);
    } else if (std::string("=;,{}!?:[]()").find(static_cast<char>(c)) != std::string::npos) {
      t.type = Token::Type::Sym;
      t.text = std::string(1, static_cast<char>(c));
      advance(1);
    } else {
      throw ParseError(ParseError::Kind::Syntax, line, col, std::string("unexpected character '") + static_cast<char>(c) + "'");
    }
    out.push_back(std::move(t));
  }
  Token eof;
  eof.line = line;
  eof.col = col;
  out.push_back(eof);
  return out;
}

// ---------------------------------------------------------------------------
// Abstract syntax.

struct Expr {
  enum class Tag : unsigned char { End, Ref, Comm } tag = Tag::End;
  int line = 0, col = 0;
  std::string name;  // Ref
  Kind kind = Kind::Out;
  std::string first, second;  // peer (process) or sender/receiver (global)
  std::vector<std::string> labels;
  std::vector<Expr> bodies;
};

struct Def {
  std::string name;
  int line = 0, col = 0;
  Expr body;
};

struct NetDef {
  std::string name;
  int line = 0, col = 0;
  std::vector<std::pair<std::string, Expr>> comps;
};

const std::set<std::string> kItemKeywords = {"proc", "global", "network", "queue", "machine"};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  std::vector<Def> procs, globals;
  std::vector<NetDef> nets;
  Document doc;

  void document() {
    while (!at_eof()) {
      if (is_sym(";")) {
        ++pos_;
        continue;
      }
      const Token& kw = peek();
      if (kw.type != Token::Type::Ident || !kItemKeywords.count(kw.text))
        fail(kw, "expected a definition (proc, global, network, queue or machine)");
      ++pos_;
      if (kw.text == "proc") procs.push_back(definition(false));
      else if (kw.text == "global") globals.push_back(definition(true));
      else if (kw.text == "network") network();
      else if (kw.text == "queue") queue();
      else machine();
    }
  }

 private:
  const Token& peek(std::size_t k = 0) const { return t_[std::min(pos_ + k, t_.size() - 1)]; }
  bool at_eof() const { return peek().type == Token::Type::Eof; }
  bool is_sym(const char* s, std::size_t k = 0) const {
    return peek(k).type == Token::Type::Sym && peek(k).text == s;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(ParseError::Kind::Syntax, t.line, t.col,
                     msg + (t.type == Token::Type::Eof ? " at end of input" : ", found '" + t.text + "'"));
  }
  const Token& expect_sym(const char* s) {
    if (!is_sym(s)) fail(peek(), std::string("expected '") + s + "'");
    return t_[pos_++];
  }
  const Token& ident(const char* what) {
    if (peek().type != Token::Type::Ident) fail(peek(), std::string("expected ") + what);
    return t_[pos_++];
  }

  Def definition(bool global) {
    const Token& n = ident("a name");
    Def d{n.text, n.line, n.col, {}};
    expect_sym("=");
    d.body = global ? gexpr() : pexpr();
    return d;
  }

  Expr pexpr() {
    const Token& t = peek();
    if (t.type != Token::Type::Ident) fail(t, "expected a process");
    Expr e;
    e.line = t.line;
    e.col = t.col;
    if (is_sym("!", 1) || is_sym("?", 1)) {
      e.tag = Expr::Tag::Comm;
      e.first = t.text;
      e.kind = peek(1).text == "!" ? Kind::Out : Kind::In;
      pos_ += 2;
      arms(e, false);
      return e;
    }
    ++pos_;
    if (t.text == "end") return e;
    if (kItemKeywords.count(t.text)) fail(t, "expected a process");
    e.tag = Expr::Tag::Ref;
    e.name = t.text;
    return e;
  }

  Expr gexpr() {
    const Token& t = peek();
    if (t.type != Token::Type::Ident) fail(t, "expected a global type");
    Expr e;
    e.line = t.line;
    e.col = t.col;
    if (peek(1).type == Token::Type::Ident && (is_sym("!", 2) || is_sym("?", 2))) {
      e.tag = Expr::Tag::Comm;
      e.first = t.text;
      e.second = peek(1).text;
      e.kind = peek(2).text == "!" ? Kind::Out : Kind::In;
      if (e.first == e.second)
        throw ParseError(ParseError::Kind::SelfCommunication, t.line, t.col, "participant '" + e.first + "' talks to itself");
      pos_ += 3;
      arms(e, true);
      return e;
    }
    ++pos_;
    if (t.text == "end") return e;
    if (kItemKeywords.count(t.text)) fail(t, "expected a global type");
    e.tag = Expr::Tag::Ref;
    e.name = t.text;
    return e;
  }

  void arm(Expr& e, bool global, std::set<std::string>& seen) {
    const Token& l = ident("a label");
    if (!seen.insert(l.text).second)
      throw ParseError(ParseError::Kind::DuplicateLabelInChoice, l.line, l.col, "label '" + l.text + "' repeated");
    Expr body;
    body.line = l.line;
    body.col = l.col;
    if (is_sym(";")) {
      ++pos_;
      body = global ? gexpr() : pexpr();
    }
    e.labels.push_back(l.text);
    e.bodies.push_back(std::move(body));
  }

  void arms(Expr& e, bool global) {
    std::set<std::string> seen;
    if (!is_sym("{")) {
      arm(e, global, seen);
      return;
    }
    const Token& open = expect_sym("{");
    if (is_sym("}")) throw ParseError(ParseError::Kind::EmptyChoice, open.line, open.col, "choice without branches");
    arm(e, global, seen);
    while (is_sym(",")) {
      ++pos_;
      arm(e, global, seen);
    }
    expect_sym("}");
  }

  void network() {
    const Token& n = ident("a network name");
    NetDef d{n.text, n.line, n.col, {}};
    expect_sym("{");
    std::set<std::string> parts;
    if (!is_sym("}")) {
      while (true) {
        const Token& p = ident("a participant");
        if (!parts.insert(p.text).second)
          throw ParseError(ParseError::Kind::DuplicateDefinition, p.line, p.col, "participant '" + p.text + "' repeated");
        expect_sym("|>");
        d.comps.emplace_back(p.text, pexpr());
        if (!is_sym(",")) break;
        ++pos_;
      }
    }
    expect_sym("}");
    nets.push_back(std::move(d));
  }

  void queue() {
    const Token& n = ident("a queue name");
    expect_sym("=");
    expect_sym("[");
    Queue q;
    if (!is_sym("]")) {
      while (true) {
        const Token& from = ident("a sender");
        expect_sym("->");
        const Token& to = ident("a receiver");
        expect_sym(":");
        const Token& l = ident("a label");
        q.push(from.text, to.text, l.text);
        if (!is_sym(",")) break;
        ++pos_;
      }
    }
    expect_sym("]");
    if (!doc.queues.emplace(n.text, q).second)
      throw ParseError(ParseError::Kind::DuplicateDefinition, n.line, n.col, "queue '" + n.text + "' defined twice");
  }

  std::vector<std::string> ident_list() {
    std::vector<std::string> out;
    while (peek().type == Token::Type::Ident) {
      out.push_back(t_[pos_++].text);
      if (is_sym(",")) ++pos_;
    }
    return out;
  }

  void machine() {
    const Token& n = ident("a machine name");
    expect_sym("{");
    QueueMachine m;
    bool have_input = false, have_alpha = false;
    while (!is_sym("}")) {
      if (is_sym(";")) {
        ++pos_;
        continue;
      }
      const Token& kw = ident("a machine clause");
      if (kw.text == "states") {
        for (auto& s : ident_list()) m.states.insert(s);
      } else if (kw.text == "input") {
        have_input = true;
        for (auto& s : ident_list()) m.input.insert(s);
      } else if (kw.text == "queue_alphabet") {
        have_alpha = true;
        for (auto& s : ident_list()) m.alphabet.insert(s);
      } else if (kw.text == "bottom") {
        m.bottom = ident("the bottom symbol").text;
      } else if (kw.text == "start") {
        m.start = ident("the start state").text;
      } else if (kw.text == "delta") {
        while (true) {
          const Token& open = expect_sym("(");
          std::string q = ident("a state").text;
          expect_sym(",");
          std::string a = ident("a symbol").text;
          expect_sym(")");
          expect_sym("->");
          expect_sym("(");
          std::string q2 = ident("a state").text;
          expect_sym(",");
          if (peek().type != Token::Type::Str) fail(peek(), "expected a quoted symbol sequence");
          std::istringstream words(t_[pos_++].text);
          std::vector<Symbol> written;
          for (std::string w; words >> w;) written.push_back(w);
          expect_sym(")");
          if (!m.delta.emplace(std::make_pair(q, a), std::make_pair(q2, written)).second)
            throw ParseError(ParseError::Kind::InvalidMachine, open.line, open.col,
                             "transition (" + q + "," + a + ") given twice");
          if (!is_sym(",")) break;
          ++pos_;
        }
      } else {
        fail(kw, "unknown machine clause");
      }
    }
    expect_sym("}");
    if (!have_alpha) {
      m.alphabet = m.input;
      m.alphabet.insert(m.bottom);
    }
    if (!have_input) {
      m.input = m.alphabet;
      m.input.erase(m.bottom);
    }
    if (auto err = m.validate(); !err.empty()) throw ParseError(ParseError::Kind::InvalidMachine, n.line, n.col, err);
    if (!doc.machines.emplace(n.text, std::move(m)).second)
      throw ParseError(ParseError::Kind::DuplicateDefinition, n.line, n.col, "machine '" + n.text + "' defined twice");
  }

  std::vector<Token> t_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Name resolution into node vectors.

template <class Node>
class Resolver {
 public:
  Resolver(const std::vector<Def>& defs, const char* what) : what_(what) {
    for (const auto& d : defs) {
      if (defs_.count(d.name))
        throw ParseError(ParseError::Kind::DuplicateDefinition, d.line, d.col,
                         std::string(what) + " '" + d.name + "' defined twice");
      defs_.emplace(d.name, &d);
    }
  }

  int named(const std::string& name, int line, int col) {
    if (auto it = done_.find(name); it != done_.end()) return it->second;
    auto d = defs_.find(name);
    if (d == defs_.end())
      throw ParseError(ParseError::Kind::UnboundName, line, col, std::string(what_) + " '" + name + "' is not defined");
    const Expr& body = d->second->body;
    if (body.tag == Expr::Tag::Ref) {
      if (!aliasing_.insert(name).second)
        throw ParseError(ParseError::Kind::UnguardedRecursion, d->second->line, d->second->col,
                         "definition of '" + name + "' never reaches a communication");
      int v = named(body.name, body.line, body.col);
      aliasing_.erase(name);
      done_.emplace(name, v);
      return v;
    }
    int v = alloc(line, col);
    done_.emplace(name, v);
    fill(v, body);
    return v;
  }

  int compile(const Expr& e) {
    if (e.tag == Expr::Tag::Ref) return named(e.name, e.line, e.col);
    int v = alloc(e.line, e.col);
    fill(v, e);
    return v;
  }

  std::vector<Node> nodes;

 private:
  int alloc(int line, int col) {
    if (nodes.size() >= max_nodes())
      throw ParseError(ParseError::Kind::TooLarge, line, col, "term graph exceeds " + std::to_string(max_nodes()) + " nodes");
    nodes.emplace_back();
    return static_cast<int>(nodes.size()) - 1;
  }

  void fill(int v, const Expr& e) {
    if (e.tag == Expr::Tag::End) return;
    Node n;
    n.kind = e.kind;
    if constexpr (std::is_same_v<Node, ProcNode>) {
      n.peer = e.first;
    } else {
      n.sender = e.first;
      n.receiver = e.second;
    }
    for (std::size_t i = 0; i < e.labels.size(); ++i) {
      int t = compile(e.bodies[i]);
      n.branches.push_back(Branch{e.labels[i], t});
    }
    nodes[static_cast<std::size_t>(v)] = std::move(n);
  }

  const char* what_;
  std::map<std::string, const Def*> defs_;
  std::map<std::string, int> done_;
  std::set<std::string> aliasing_;
};

}  // namespace

Document parse(const std::string& text) {
  Parser p(lex(text));
  p.document();
  Document doc = std::move(p.doc);

  Resolver<ProcNode> pr(p.procs, "process");
  std::vector<std::pair<std::string, int>> proc_roots;
  for (const auto& d : p.procs) proc_roots.emplace_back(d.name, pr.named(d.name, d.line, d.col));
  std::map<std::string, const NetDef*> seen_nets;
  std::vector<std::vector<std::pair<std::string, int>>> net_roots;
  for (const auto& n : p.nets) {
    if (!seen_nets.emplace(n.name, &n).second)
      throw ParseError(ParseError::Kind::DuplicateDefinition, n.line, n.col, "network '" + n.name + "' defined twice");
    std::vector<std::pair<std::string, int>> comps;
    for (const auto& [part, e] : n.comps) comps.emplace_back(part, pr.compile(e));
    net_roots.push_back(std::move(comps));
  }
  {
    std::vector<int> roots;
    for (const auto& [n, v] : proc_roots) roots.push_back(v);
    for (const auto& cs : net_roots)
      for (const auto& [part, v] : cs) roots.push_back(v);
    if (pr.nodes.empty()) pr.nodes.emplace_back();
    if (roots.empty()) roots.push_back(0);
    std::vector<int> map;
    auto pool = make_pool(std::move(pr.nodes), roots, &map);
    for (const auto& [n, v] : proc_roots) doc.procs.emplace(n, Process(pool, map[static_cast<std::size_t>(v)]));
    for (std::size_t i = 0; i < p.nets.size(); ++i) {
      Network::Key key;
      for (const auto& [part, v] : net_roots[i]) key.emplace(part, map[static_cast<std::size_t>(v)]);
      doc.networks.emplace(p.nets[i].name, Network(pool, key));
    }
  }

  Resolver<GlobNode> gr(p.globals, "global type");
  std::vector<std::pair<std::string, int>> glob_roots;
  for (const auto& d : p.globals) glob_roots.emplace_back(d.name, gr.named(d.name, d.line, d.col));
  if (!glob_roots.empty()) {
    std::vector<int> roots;
    for (const auto& [n, v] : glob_roots) roots.push_back(v);
    std::vector<int> map;
    auto pool = make_pool(std::move(gr.nodes), roots, &map);
    for (const auto& [n, v] : glob_roots) doc.globals.emplace(n, Global(pool, map[static_cast<std::size_t>(v)]));
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------------------
// Printing.

namespace {

template <class Node>
std::map<int, std::string> names_for(const std::vector<Node>& nodes, const std::vector<int>& roots,
                                     const std::vector<std::string>& root_names, const std::string& base,
                                     std::set<std::string>* taken) {
  std::vector<int> order = reachable_nodes(nodes, roots);
  std::map<int, int> indeg;
  for (int v : order)
    for (const auto& b : nodes[static_cast<std::size_t>(v)].branches) ++indeg[b.target];
  std::map<int, std::string> out;
  std::set<std::string> local;
  std::set<std::string>& used = taken ? *taken : local;
  for (std::size_t i = 0; i < roots.size(); ++i)
    if (!out.count(roots[i])) {
      out.emplace(roots[i], root_names[i]);
      used.insert(root_names[i]);
    }
  int k = 0;
  for (int v : order) {
    if (out.count(v) || indeg[v] < 2 || nodes[static_cast<std::size_t>(v)].kind == Kind::End) continue;
    std::string n;
    do n = base + "_" + std::to_string(++k);
    while (used.count(n));
    used.insert(n);
    out.emplace(v, n);
  }
  return out;
}

void print_arms(std::ostringstream& os, const std::vector<Branch>& bs, const std::function<void(int)>& sub,
                const std::function<bool(int)>& is_end) {
  auto one = [&](const Branch& b) {
    os << b.label;
    if (!is_end(b.target)) {
      os << "; ";
      sub(b.target);
    }
  };
  if (bs.size() == 1) {
    one(bs[0]);
    return;
  }
  os << "{";
  for (std::size_t i = 0; i < bs.size(); ++i) {
    if (i) os << ", ";
    one(bs[i]);
  }
  os << "}";
}

template <class Node>
void print_node(std::ostringstream& os, const Pool<Node>& pool, int v, const std::map<int, std::string>& names, bool top) {
  if (!top)
    if (auto it = names.find(v); it != names.end()) {
      os << it->second;
      return;
    }
  const Node& n = pool[v];
  if (n.kind == Kind::End) {
    os << "end";
    return;
  }
  if constexpr (std::is_same_v<Node, ProcNode>) {
    os << n.peer;
  } else {
    os << n.sender << " " << n.receiver;
  }
  os << (n.kind == Kind::Out ? "!" : "?");
  print_arms(
      os, n.branches, [&](int t) { print_node(os, pool, t, names, false); },
      [&](int t) { return pool[t].kind == Kind::End && !names.count(t); });
}

template <class Node>
std::string expr_of(const Term<Node>& t, const std::map<int, std::string>& names, bool top) {
  std::ostringstream os;
  print_node(os, *t.pool(), t.root(), names, top);
  return os.str();
}

template <class Node>
std::string defs_text(const Pool<Node>& pool, const std::map<int, std::string>& names, const std::vector<int>& order,
                      const char* keyword) {
  std::ostringstream os;
  for (int v : order) {
    auto it = names.find(v);
    if (it == names.end()) continue;
    os << keyword << " " << it->second << " = ";
    print_node(os, pool, v, names, true);
    os << "\n";
  }
  return os.str();
}

std::string global_defs(const Global& g, const std::string& name, std::set<std::string>* taken) {
  auto names = names_for(g.pool()->nodes(), {g.root()}, {name}, name, taken);
  return defs_text(*g.pool(), names, reachable_nodes(g), "global");
}

std::string process_defs(const Process& p, const std::string& name, std::set<std::string>* taken) {
  auto names = names_for(p.pool()->nodes(), {p.root()}, {name}, name, taken);
  return defs_text(*p.pool(), names, reachable_nodes(p), "proc");
}

std::string network_defs(const Network& n, const std::string& name, std::set<std::string>* taken) {
  std::vector<int> roots;
  std::vector<std::string> root_names;
  std::set<std::string> local;
  std::set<std::string>& used = taken ? *taken : local;
  std::map<int, std::string> first_name;
  for (const auto& [p, v] : n.components()) {
    roots.push_back(v);
    std::string base = name + "_" + p;
    while (used.count(base)) base += "_";
    root_names.push_back(base);
  }
  auto names = names_for(n.pool()->nodes(), roots, root_names, name, &used);
  std::ostringstream os;
  os << defs_text(*n.pool(), names, reachable_nodes(n.pool()->nodes(), roots), "proc");
  os << "network " << name << " {";
  bool first = true;
  for (const auto& [p, v] : n.components()) {
    os << (first ? " " : ", ") << p << " |> " << names.at(v);
    first = false;
  }
  os << (first ? "}" : " }") << "\n";
  return os.str();
}

}  // namespace

std::string print_expr(const Global& g, const std::map<int, std::string>& names) { return expr_of(g, names, true); }
std::string print_expr(const Process& p, const std::map<int, std::string>& names) { return expr_of(p, names, true); }

std::map<int, std::string> definition_names(const Global& g, const std::string& base) {
  return names_for(g.pool()->nodes(), {g.root()}, {base}, base, nullptr);
}

std::map<int, std::string> definition_names(const std::vector<Process>& roots, const std::string& base) {
  if (roots.empty()) return {};
  std::vector<int> rs;
  std::vector<std::string> ns;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    rs.push_back(roots[i].root());
    ns.push_back(i == 0 ? base : base + "_r" + std::to_string(i));
  }
  return names_for(roots[0].pool()->nodes(), rs, ns, base, nullptr);
}

std::string print_global(const Global& g, const std::string& name) { return global_defs(g, name, nullptr); }
std::string print_process(const Process& p, const std::string& name) { return process_defs(p, name, nullptr); }
std::string print_network(const Network& n, const std::string& name) { return network_defs(n, name, nullptr); }

std::string print_queue(const Queue& q, const std::string& name) { return "queue " + name + " = " + to_string(q) + "\n"; }

std::string print_machine(const QueueMachine& m, const std::string& name) {
  std::ostringstream os;
  auto list = [&](const std::set<std::string>& xs) {
    bool first = true;
    for (const auto& x : xs) {
      os << (first ? " " : ", ") << x;
      first = false;
    }
  };
  os << "machine " << name << " {\n  states";
  list(m.states);
  os << ";\n  input";
  list(m.input);
  os << ";\n  queue_alphabet";
  list(m.alphabet);
  os << ";\n  bottom " << m.bottom << ";\n  start " << m.start << ";\n  delta";
  bool first = true;
  for (const auto& [k, v] : m.delta) {
    os << (first ? " " : ",\n        ") << "(" << k.first << "," << k.second << ") -> (" << v.first << ", \"";
    for (std::size_t i = 0; i < v.second.size(); ++i) os << (i ? " " : "") << v.second[i];
    os << "\")";
    first = false;
  }
  os << "\n}\n";
  return os.str();
}

std::string print_document(const Document& d) {
  std::ostringstream os;
  std::set<std::string> proc_names, glob_names;
  for (const auto& [n, p] : d.procs) proc_names.insert(n);
  for (const auto& [n, g] : d.globals) glob_names.insert(n);
  // Every definition prints its own reachable part; shared nodes are simply
  // printed again under fresh names, which preserves bisimilarity.
  for (const auto& [n, p] : d.procs) {
    std::set<std::string> taken = proc_names;
    taken.erase(n);
    os << process_defs(p, n, &taken);
    proc_names = taken;
    proc_names.insert(n);
  }
  for (const auto& [n, net] : d.networks) os << network_defs(net, n, &proc_names);
  for (const auto& [n, g] : d.globals) {
    std::set<std::string> taken = glob_names;
    taken.erase(n);
    os << global_defs(g, n, &taken);
    glob_names = taken;
    glob_names.insert(n);
  }
  for (const auto& [n, q] : d.queues) os << print_queue(q, n);
  for (const auto& [n, m] : d.machines) os << print_machine(m, n);
  return os.str();
}

std::string show_global(const Global& g) {
  auto names = definition_names(g, "G");
  std::string out = print_expr(g, names);
  std::string defs;
  for (int v : reachable_nodes(g)) {
    if (v == g.root() || !names.count(v)) continue;
    defs += (defs.empty() ? " where " : ", ") + names.at(v) + " = " + print_expr(g.at_node(v), names);
  }
  return out + defs;
}

std::string print_gpat(const Gpat& p) {
  switch (p.tag) {
    case Gpat::Tag::End: return "end";
    case Gpat::Tag::Var: return p.var;
    case Gpat::Tag::Comm: break;
  }
  std::string s = p.sender + " " + p.receiver + (p.kind == Kind::Out ? "!" : "?");
  auto arm = [](const std::pair<Label, Gpat>& a) {
    return a.second.tag == Gpat::Tag::End ? a.first : a.first + "; " + print_gpat(a.second);
  };
  if (p.branches.size() == 1) return s + arm(p.branches[0]);
  s += "{";
  for (std::size_t i = 0; i < p.branches.size(); ++i) s += (i ? ", " : "") + arm(p.branches[i]);
  return s + "}";
}

std::string print_equations(const EquationSystem& e) {
  std::string out;
  for (const auto& [v, p] : e.equations) out += "global " + v + " = " + print_gpat(p) + "\n";
  return out;
}

}  // namespace mps
