#pragma once

// Reader and writer for the DOT subset used for workflow files:
//
//   graph      := ["strict"] "digraph" [ID] "{" stmt* "}"
//   stmt       := (node_stmt | edge_stmt | attr_stmt | ID "=" ID) [";"]
//   node_stmt  := ID [attr_list]
//   edge_stmt  := ID ("->" ID)+ [attr_list]
//   attr_stmt  := ("graph" | "node" | "edge") attr_list
//   attr_list  := ("[" [ID "=" ID ([";" | ","] ID "=" ID)*] "]")+
//   ID         := [A-Za-z0-9_.-]+ | '"' ( '\"' | any char but '"' )* '"'
//
// Node attributes: work (default 1), memory (default 0). Edge attribute: size
// (default 0). Other attributes are accepted and ignored. Every edge endpoint
// must be declared by a node statement somewhere in the file. Comments: //,
// /* */ and lines starting with #.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wfmap/workflow.hpp"

namespace wfmap {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that reads back to the same double.
inline std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

namespace detail {

class DotLexer {
 public:
  enum class Kind { Id, Arrow, UndirectedEdge, LBrace, RBrace, LBracket, RBracket, Equals, Semi, Comma, End };
  struct Token {
    Kind kind;
    std::string text;
    int line;
  };

  explicit DotLexer(std::string_view src) : src_(src) {}

  Token next() {
    skip();
    if (pos_ >= src_.size()) return {Kind::End, "", line_};
    char c = src_[pos_];
    int line = line_;
    auto single = [&](Kind k) {
      ++pos_;
      return Token{k, std::string(1, c), line};
    };
    switch (c) {
      case '{': return single(Kind::LBrace);
      case '}': return single(Kind::RBrace);
      case '[': return single(Kind::LBracket);
      case ']': return single(Kind::RBracket);
      case '=': return single(Kind::Equals);
      case ';': return single(Kind::Semi);
      case ',': return single(Kind::Comma);
      default: break;
    }
    if (c == '-' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '>' || src_[pos_ + 1] == '-')) {
      pos_ += 2;
      return {src_[pos_ - 1] == '>' ? Kind::Arrow : Kind::UndirectedEdge, "", line};
    }
    if (c == '"') {
      ++pos_;
      std::string text;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '"' || src_[pos_ + 1] == '\\')) ++pos_;
        if (src_[pos_] == '\n') ++line_;
        text += src_[pos_++];
      }
      if (pos_ >= src_.size()) throw ParseError("line " + std::to_string(line) + ": unterminated string");
      ++pos_;
      return {Kind::Id, text, line};
    }
    if (is_id_char(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_id_char(src_[pos_])) {
        // stop before an arrow glued to an identifier ("a->b")
        if (src_[pos_] == '-' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '>' || src_[pos_ + 1] == '-')) break;
        ++pos_;
      }
      if (pos_ > start) return {Kind::Id, std::string(src_.substr(start, pos_ - start)), line};
    }
    throw ParseError("line " + std::to_string(line) + ": unexpected character '" + std::string(1, c) + "'");
  }

 private:
  static bool is_id_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
           c == '-' || static_cast<unsigned char>(c) >= 0x80;
  }

  void skip() {
    bool line_start = pos_ == 0 || src_[pos_ - 1] == '\n';
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
        line_start = true;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '#' && line_start) {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (src_.substr(pos_, 2) == "/*") {
        auto close = src_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) throw ParseError("line " + std::to_string(line_) + ": unterminated comment");
        for (auto i = pos_; i < close; ++i)
          if (src_[i] == '\n') ++line_;
        pos_ = close + 2;
      } else {
        return;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

class DotParser {
  using Kind = DotLexer::Kind;
  using Attrs = std::map<std::string, std::pair<std::string, int>>;

 public:
  explicit DotParser(std::string_view src) : lex_(src) { advance(); }

  WorkflowDag parse() {
    if (is_keyword("strict")) advance();
    if (is_keyword("graph")) fail("workflow must be a digraph");
    if (!is_keyword("digraph")) fail("expected 'digraph'");
    advance();
    if (tok_.kind == Kind::Id) advance();
    expect(Kind::LBrace, "'{'");
    while (tok_.kind != Kind::RBrace) {
      if (tok_.kind == Kind::End) fail("missing closing '}'");
      statement();
    }
    advance();
    if (tok_.kind != Kind::End) fail("unexpected content after graph");
    return build();
  }

 private:
  struct PendingEdge {
    std::string tail, head;
    double size;
    int line;
  };

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(tok_.line) + ": " + msg);
  }
  void advance() { tok_ = lex_.next(); }
  bool is_keyword(std::string_view kw) const { return tok_.kind == Kind::Id && tok_.text == kw; }
  void expect(Kind k, const char* what) {
    if (tok_.kind != k) fail(std::string("expected ") + what);
    advance();
  }

  static double number(const std::string& text, int line, const std::string& key) {
    double v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
      throw ParseError("line " + std::to_string(line) + ": attribute " + key + " is not a number: '" + text + "'");
    }
    return v;
  }

  Attrs attr_lists() {
    Attrs attrs;
    while (tok_.kind == Kind::LBracket) {
      advance();
      while (tok_.kind != Kind::RBracket) {
        if (tok_.kind != Kind::Id) fail("expected attribute name");
        std::string key = tok_.text;
        int line = tok_.line;
        advance();
        expect(Kind::Equals, "'='");
        if (tok_.kind != Kind::Id) fail("expected attribute value");
        attrs[key] = {tok_.text, line};
        advance();
        if (tok_.kind == Kind::Semi || tok_.kind == Kind::Comma) advance();
      }
      advance();
    }
    return attrs;
  }

  void statement() {
    if (tok_.kind == Kind::Semi) {
      advance();
      return;
    }
    if (tok_.kind == Kind::LBrace || is_keyword("subgraph")) fail("subgraphs are not supported");
    if (tok_.kind != Kind::Id) fail("expected a statement");
    if (is_keyword("node") || is_keyword("edge") || is_keyword("graph")) {
      std::string which = tok_.text;
      advance();
      auto attrs = attr_lists();
      if (which == "node") {
        for (auto& [k, v] : attrs) node_defaults_[k] = v;
      } else if (which == "edge") {
        for (auto& [k, v] : attrs) edge_defaults_[k] = v;
      }
      return;
    }
    std::string first = tok_.text;
    int line = tok_.line;
    advance();
    if (tok_.kind == Kind::Equals) {  // graph attribute
      advance();
      if (tok_.kind != Kind::Id) fail("expected attribute value");
      advance();
      return;
    }
    if (tok_.kind == Kind::UndirectedEdge) fail("undirected edge '--' in a digraph");
    if (tok_.kind == Kind::Arrow) {
      std::vector<std::string> chain{first};
      while (tok_.kind == Kind::Arrow) {
        advance();
        if (tok_.kind != Kind::Id) fail("expected node id after '->'");
        chain.push_back(tok_.text);
        advance();
      }
      auto attrs = edge_defaults_;
      for (auto& [k, v] : attr_lists()) attrs[k] = v;
      double size = 0;
      if (auto it = attrs.find("size"); it != attrs.end()) {
        size = number(it->second.first, it->second.second, "size");
      }
      for (std::size_t i = 0; i + 1 < chain.size(); ++i) edges_.push_back({chain[i], chain[i + 1], size, line});
      return;
    }
    auto attrs = attr_lists();
    auto [it, fresh] = nodes_.try_emplace(first);
    if (fresh) {
      order_.push_back(first);
      it->second = node_defaults_;
    }
    for (auto& [k, v] : attrs) it->second[k] = v;
  }

  WorkflowDag build() {
    std::vector<Task> tasks;
    tasks.reserve(order_.size());
    for (const auto& id : order_) {
      const auto& attrs = nodes_.at(id);
      Task t{id, 1.0, 0.0};
      if (auto it = attrs.find("work"); it != attrs.end()) t.work = number(it->second.first, it->second.second, "work");
      if (auto it = attrs.find("memory"); it != attrs.end())
        t.memory = number(it->second.first, it->second.second, "memory");
      tasks.push_back(std::move(t));
    }
    std::unordered_set<std::string> pairs;
    std::vector<EdgeSpec> edges;
    edges.reserve(edges_.size());
    for (const auto& e : edges_) {
      for (const auto* end : {&e.tail, &e.head}) {
        if (!nodes_.count(*end)) {
          throw ParseError("line " + std::to_string(e.line) + ": edge " + e.tail + " -> " + e.head +
                           " references undeclared node '" + *end + "'");
        }
      }
      if (!pairs.insert(e.tail + '\0' + e.head).second) {
        throw ParseError("line " + std::to_string(e.line) + ": duplicate edge " + e.tail + " -> " + e.head);
      }
      edges.push_back({e.tail, e.head, e.size});
    }
    WorkflowDag dag(std::move(tasks), std::move(edges));
    auto report = validate(dag);
    if (!report.ok()) throw ParseError("invalid workflow: " + report.summary());
    return dag;
  }

  DotLexer lex_;
  DotLexer::Token tok_{Kind::End, "", 1};
  Attrs node_defaults_;
  Attrs edge_defaults_;
  std::unordered_map<std::string, Attrs> nodes_;
  std::vector<std::string> order_;
  std::vector<PendingEdge> edges_;
};

inline std::string quote(const std::string& id) {
  std::string out = "\"";
  for (char c : id) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

inline WorkflowDag parse_workflow_text(std::string_view text) { return detail::DotParser(text).parse(); }

inline WorkflowDag parse_workflow(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open workflow file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_workflow_text(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.what());
  }
}

/// Writes the DAG (or the subgraph induced by `subset`) in the DOT subset
/// above. Tasks appear in index order, edges sorted by (tail, head).
inline void write_workflow(std::ostream& out, const WorkflowDag& dag, const std::vector<TaskIndex>* subset = nullptr) {
  std::vector<char> keep(dag.size(), subset ? 0 : 1);
  if (subset)
    for (TaskIndex u : *subset) keep.at(u) = 1;
  out << "digraph workflow {\n";
  for (TaskIndex u = 0; u < dag.size(); ++u) {
    if (!keep[u]) continue;
    const auto& t = dag.task(u);
    out << "  " << detail::quote(t.id) << " [work=" << format_real(t.work) << ", memory=" << format_real(t.memory)
        << "];\n";
  }
  for (TaskIndex u = 0; u < dag.size(); ++u) {
    if (!keep[u]) continue;
    for (EdgeIndex e : dag.out_edges(u)) {
      const auto& edge = dag.edge(e);
      if (!keep[edge.head]) continue;
      out << "  " << detail::quote(dag.task(edge.tail).id) << " -> " << detail::quote(dag.task(edge.head).id)
          << " [size=" << format_real(edge.volume) << "];\n";
    }
  }
  out << "}\n";
}

inline std::string workflow_to_dot(const WorkflowDag& dag) {
  std::ostringstream ss;
  write_workflow(ss, dag);
  return ss.str();
}

inline void write_workflow_file(const std::string& path, const WorkflowDag& dag) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_workflow(out, dag);
}

}  // namespace wfmap
