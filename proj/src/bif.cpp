#include "cbandit/bif.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <queue>
#include <sstream>

#include "cbandit/error.hpp"

namespace cbandit {

namespace {

enum class Tok { kWord, kString, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

bool is_punct(char c) { return std::string_view("{}()[]|,;").find(c) != std::string_view::npos; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_blank();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= text_.size()) return tok;
    const char c = text_[pos_];
    if (is_punct(c)) {
      tok.kind = Tok::kPunct;
      tok.text = std::string(1, c);
      advance();
      return tok;
    }
    if (c == '"') {
      tok.kind = Tok::kString;
      advance();
      while (pos_ < text_.size() && text_[pos_] != '"') {
        tok.text += text_[pos_];
        advance();
      }
      if (pos_ >= text_.size()) throw ParseError("unterminated string", tok.line, tok.column);
      advance();
      return tok;
    }
    tok.kind = Tok::kWord;
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || is_punct(d) || d == '"' || starts_comment()) break;
      tok.text += d;
      advance();
    }
    return tok;
  }

  /// Raw text up to (not including) the next ';' on any line. Used for
  /// property lines, whose values are free-form.
  void skip_to_semicolon(const Token& from) {
    while (pos_ < text_.size() && text_[pos_] != ';') advance();
    if (pos_ >= text_.size()) throw ParseError("property without ';'", from.line, from.column);
    advance();
  }

 private:
  bool starts_comment() const {
    return pos_ + 1 < text_.size() && text_[pos_] == '/' && (text_[pos_ + 1] == '/' || text_[pos_ + 1] == '*');
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      } else if (starts_comment() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (starts_comment()) {
        const std::size_t line = line_;
        const std::size_t column = column_;
        advance();
        advance();
        while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= text_.size()) throw ParseError("unterminated block comment", line, column);
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

bool is_number(const std::string& s) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

struct ProbabilityBlock {
  std::string child;
  std::vector<std::string> parents;
  Token at;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { bump(); }

  BifNetwork parse() {
    BifNetwork net;
    bool have_network = false;
    std::vector<ProbabilityBlock> blocks;
    std::map<std::string, Token> declared_at;

    while (cur_.kind != Tok::kEnd) {
      const Token head = expect_word("a block keyword");
      if (head.text == "network") {
        if (have_network) throw ParseError("second network block", head.line, head.column);
        have_network = true;
        net.name = cur_.kind == Tok::kPunct ? std::string() : take_name("network name").text;
        parse_property_block();
      } else if (head.text == "variable") {
        const Token name = take_name("variable name");
        if (declared_at.count(name.text)) throw ParseError("variable '" + name.text + "' declared twice", name.line, name.column);
        declared_at[name.text] = name;
        net.variables.push_back(parse_variable_body(name));
      } else if (head.text == "probability") {
        blocks.push_back(parse_probability(head));
      } else {
        throw ParseError("unknown keyword '" + head.text + "'", head.line, head.column);
      }
    }

    std::map<std::string, Token> defined;
    for (const auto& block : blocks) {
      if (!declared_at.count(block.child)) {
        throw ParseError("probability for undeclared variable '" + block.child + "'", block.at.line, block.at.column);
      }
      if (defined.count(block.child)) {
        throw ParseError("second probability block for '" + block.child + "'", block.at.line, block.at.column);
      }
      defined[block.child] = block.at;
      for (const auto& p : block.parents) {
        if (!declared_at.count(p)) {
          throw ParseError("unresolved parent '" + p + "' of '" + block.child + "'", block.at.line, block.at.column);
        }
        if (p == block.child) throw ParseError("variable '" + p + "' is its own parent", block.at.line, block.at.column);
      }
      std::vector<std::string> sorted = block.parents;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ParseError("duplicate parent of '" + block.child + "'", block.at.line, block.at.column);
      }
      net.parent_map[block.child] = block.parents;
    }
    for (const auto& v : net.variables) net.parent_map.try_emplace(v.name);

    check_acyclic(net, defined);
    return net;
  }

 private:
  void bump() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& what) const {
    const std::string found = cur_.kind == Tok::kEnd ? "end of input" : "'" + cur_.text + "'";
    throw ParseError("expected " + what + ", found " + found, cur_.line, cur_.column);
  }

  Token expect_word(const std::string& what) {
    if (cur_.kind != Tok::kWord) fail(what);
    Token t = cur_;
    bump();
    return t;
  }

  Token take_name(const std::string& what) {
    if (cur_.kind != Tok::kWord && cur_.kind != Tok::kString) fail(what);
    Token t = cur_;
    bump();
    return t;
  }

  void expect_punct(char c) {
    if (cur_.kind != Tok::kPunct || cur_.text[0] != c) {
      if (cur_.kind == Tok::kEnd && c == '}') throw ParseError("unbalanced braces: missing '}'", cur_.line, cur_.column);
      fail(std::string("'") + c + "'");
    }
    bump();
  }

  bool at_punct(char c) const { return cur_.kind == Tok::kPunct && cur_.text[0] == c; }

  bool at_property() {
    if (cur_.kind == Tok::kWord && cur_.text == "property") {
      lexer_.skip_to_semicolon(cur_);
      bump();
      return true;
    }
    return false;
  }

  void parse_property_block() {
    expect_punct('{');
    while (!at_punct('}')) {
      if (cur_.kind == Tok::kEnd) throw ParseError("unbalanced braces: missing '}'", cur_.line, cur_.column);
      if (!at_property()) {
        if (cur_.kind == Tok::kWord) throw ParseError("unknown keyword '" + cur_.text + "'", cur_.line, cur_.column);
        fail("'property' or '}'");
      }
    }
    bump();
  }

  BifVariable parse_variable_body(const Token& name) {
    BifVariable var{name.text, {}};
    bool typed = false;
    expect_punct('{');
    while (!at_punct('}')) {
      if (cur_.kind == Tok::kEnd) throw ParseError("unbalanced braces: missing '}'", cur_.line, cur_.column);
      if (at_property()) continue;
      const Token kw = expect_word("'type' or 'property'");
      if (kw.text != "type") throw ParseError("unknown keyword '" + kw.text + "'", kw.line, kw.column);
      const Token kind = expect_word("'discrete'");
      if (kind.text != "discrete") throw ParseError("unsupported variable type '" + kind.text + "'", kind.line, kind.column);
      expect_punct('[');
      const Token count = expect_word("state count");
      std::size_t declared = 0;
      const auto [ptr, ec] = std::from_chars(count.text.data(), count.text.data() + count.text.size(), declared);
      if (ec != std::errc() || ptr != count.text.data() + count.text.size() || declared == 0) {
        throw ParseError("bad state count '" + count.text + "'", count.line, count.column);
      }
      expect_punct(']');
      expect_punct('{');
      while (true) {
        var.states.push_back(take_name("state name").text);
        if (at_punct(',')) {
          bump();
          continue;
        }
        break;
      }
      expect_punct('}');
      expect_punct(';');
      if (var.states.size() != declared) {
        throw ParseError("variable '" + var.name + "' declares " + std::to_string(declared) + " states but lists " +
                             std::to_string(var.states.size()),
                         count.line, count.column);
      }
      typed = true;
    }
    bump();
    if (!typed) throw ParseError("variable '" + var.name + "' has no type", name.line, name.column);
    return var;
  }

  void parse_numbers_until_semicolon() {
    bool any = false;
    while (true) {
      if (cur_.kind != Tok::kWord || !is_number(cur_.text)) fail("a probability value");
      any = true;
      bump();
      if (at_punct(',')) {
        bump();
        continue;
      }
      break;
    }
    if (!any) fail("a probability value");
    expect_punct(';');
  }

  ProbabilityBlock parse_probability(const Token& head) {
    ProbabilityBlock block;
    block.at = head;
    expect_punct('(');
    block.child = take_name("variable name").text;
    if (at_punct('|')) {
      bump();
      while (true) {
        block.parents.push_back(take_name("parent name").text);
        if (at_punct(',')) {
          bump();
          continue;
        }
        break;
      }
    }
    expect_punct(')');
    expect_punct('{');
    while (!at_punct('}')) {
      if (cur_.kind == Tok::kEnd) throw ParseError("unbalanced braces: missing '}'", cur_.line, cur_.column);
      if (at_property()) continue;
      if (at_punct('(')) {
        bump();
        while (true) {
          take_name("state name");
          if (at_punct(',')) {
            bump();
            continue;
          }
          break;
        }
        expect_punct(')');
        parse_numbers_until_semicolon();
      } else if (cur_.kind == Tok::kWord && (cur_.text == "table" || cur_.text == "default")) {
        bump();
        parse_numbers_until_semicolon();
      } else if (cur_.kind == Tok::kWord) {
        throw ParseError("unknown keyword '" + cur_.text + "'", cur_.line, cur_.column);
      } else {
        fail("a table entry");
      }
    }
    bump();
    return block;
  }

  static void check_acyclic(const BifNetwork& net, const std::map<std::string, Token>& defined) {
    // 0 unvisited, 1 on stack, 2 done
    std::map<std::string, int> state;
    std::function<void(const std::string&)> visit = [&](const std::string& v) {
      state[v] = 1;
      for (const auto& p : net.parent_map.at(v)) {
        if (state[p] == 1) {
          const Token& at = defined.at(v);
          throw ParseError("cycle through '" + p + "' and '" + v + "'", at.line, at.column);
        }
        if (state[p] == 0) visit(p);
      }
      state[v] = 2;
    };
    for (const auto& v : net.variables) {
      if (state[v.name] == 0) visit(v.name);
    }
  }

  Lexer lexer_;
  Token cur_;
};

std::string quoted_if_needed(const std::string& s) {
  const bool plain = !s.empty() && std::none_of(s.begin(), s.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || is_punct(c) || c == '"' || c == '/';
  });
  return plain ? s : "\"" + s + "\"";
}

}  // namespace

std::size_t BifNetwork::find(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return i;
  }
  return variables.size();
}

BifNetwork parse_bif(std::string_view text) { return Parser(text).parse(); }

BifNetwork parse_bif(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_bif(std::string_view(text));
}

BifNetwork read_bif_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open '" + path + "'");
  return parse_bif(in);
}

std::string write_bif(const BifNetwork& net) {
  std::ostringstream out;
  out << "network " << quoted_if_needed(net.name.empty() ? "unknown" : net.name) << " {\n}\n";
  for (const auto& v : net.variables) {
    out << "variable " << quoted_if_needed(v.name) << " {\n  type discrete [ " << v.states.size() << " ] { ";
    for (std::size_t s = 0; s < v.states.size(); ++s) out << (s ? ", " : "") << quoted_if_needed(v.states[s]);
    out << " };\n}\n";
  }
  for (const auto& v : net.variables) {
    const auto it = net.parent_map.find(v.name);
    const std::vector<std::string> none;
    const auto& parents = it == net.parent_map.end() ? none : it->second;
    out << "probability ( " << quoted_if_needed(v.name);
    std::size_t cells = v.states.size();
    for (std::size_t i = 0; i < parents.size(); ++i) {
      out << (i ? ", " : " | ") << quoted_if_needed(parents[i]);
      const std::size_t p = net.find(parents[i]);
      if (p < net.variables.size()) cells *= net.variables[p].states.size();
    }
    out << " ) {\n  table ";
    const double u = 1.0 / static_cast<double>(v.states.size());
    for (std::size_t c = 0; c < cells; ++c) out << (c ? ", " : "") << u;
    out << ";\n}\n";
  }
  return out.str();
}

BifDag to_causal_dag(const BifNetwork& net) {
  const std::size_t n = net.variables.size();
  std::vector<std::vector<std::size_t>> parents(n);
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto it = net.parent_map.find(net.variables[v].name);
    if (it == net.parent_map.end()) continue;
    for (const auto& p : it->second) {
      const std::size_t pi = net.find(p);
      if (pi >= n) throw ParameterError("unresolved parent '" + p + "'");
      parents[v].push_back(pi);
      children[pi].push_back(v);
      ++indegree[v];
    }
  }

  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t c : children[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != n) throw ParameterError("network has a cycle");

  std::vector<NodeIndex> position(n);
  for (std::size_t i = 0; i < n; ++i) position[order[i]] = i;

  BifDag out;
  std::vector<std::vector<NodeIndex>> lists(n);
  out.names.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = order[i];
    out.names[i] = net.variables[v].name;
    out.index[out.names[i]] = i;
    for (std::size_t p : parents[v]) lists[i].push_back(position[p]);
    std::sort(lists[i].begin(), lists[i].end());
  }
  out.dag = CausalDag(std::move(lists));
  out.targets = out.dag.parentless();
  return out;
}

}  // namespace cbandit
