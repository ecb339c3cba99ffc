// Copyright 2026 The mpsc-check Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mpsc/parser.h"

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "mpsc/format.h"

namespace mpsc {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { kNumber, kIdent, kPlus, kMinus, kStar, kSlash, kCaret, kLParen,
                 kRParen, kComma, kEnd };

struct Token {
  Tok kind;
  std::string text;
  int column;  // 1-based within the line
};

bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(const std::string& s, int offset, int line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const int col = offset + static_cast<int>(i) + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      out.push_back({Tok::kNumber, s.substr(i, j - i), col});
      i = j;
      continue;
    }
    if (identStart(c)) {
      size_t j = i;
      while (j < s.size() && identChar(s[j])) ++j;
      out.push_back({Tok::kIdent, s.substr(i, j - i), col});
      i = j;
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::kPlus; break;
      case '-': k = Tok::kMinus; break;
      case '*': k = Tok::kStar; break;
      case '/': k = Tok::kSlash; break;
      case '^': k = Tok::kCaret; break;
      case '(': k = Tok::kLParen; break;
      case ')': k = Tok::kRParen; break;
      case ',': k = Tok::kComma; break;
      default:
        throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back({k, std::string(1, c), col});
    ++i;
  }
  out.push_back({Tok::kEnd, "", offset + static_cast<int>(s.size()) + 1});
  return out;
}

const std::map<std::string, UnaryKind>& functions() {
  static const std::map<std::string, UnaryKind> table{
      {"sin", UnaryKind::kSin}, {"cos", UnaryKind::kCos}, {"exp", UnaryKind::kExp},
      {"log", UnaryKind::kLog}, {"sqrt", UnaryKind::kSqrt}};
  return table;
}

class ExprParser {
 public:
  ExprParser(std::vector<Token> toks, const std::map<std::string, int>& vars, int line)
      : toks_(std::move(toks)), vars_(vars), line_(line) {}

  // Comma-separated expressions up to the end of the line.
  std::vector<Expr> parseList() {
    std::vector<Expr> out;
    out.push_back(parseExpr());
    while (peek().kind == Tok::kComma) {
      next();
      out.push_back(parseExpr());
    }
    if (peek().kind != Tok::kEnd) fail(peek(), "unexpected '" + peek().text + "'");
    return out;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw SyntaxError(line_, t.column, msg);
  }

  Expr parseExpr() {
    if (peek().kind == Tok::kEnd || peek().kind == Tok::kComma)
      fail(peek(), "expression expected");
    Expr e = parseTerm();
    while (peek().kind == Tok::kPlus || peek().kind == Tok::kMinus) {
      const bool plus = next().kind == Tok::kPlus;
      Expr r = parseTerm();
      e = plus ? e + r : e - r;
    }
    return e;
  }

  Expr parseTerm() {
    Expr e = parseUnary();
    while (peek().kind == Tok::kStar || peek().kind == Tok::kSlash) {
      const bool mul = next().kind == Tok::kStar;
      Expr r = parseUnary();
      e = mul ? e * r : e / r;
    }
    return e;
  }

  Expr parseUnary() {
    if (peek().kind == Tok::kMinus) {
      next();
      return -parseUnary();
    }
    if (peek().kind == Tok::kPlus) {
      next();
      return parseUnary();
    }
    return parsePower();
  }

  Expr parsePower() {
    Expr base = parsePrimary();
    if (peek().kind != Tok::kCaret) return base;
    next();
    return pow(base, parseExponent());
  }

  int parseExponent() {
    bool paren = false;
    if (peek().kind == Tok::kLParen) {
      paren = true;
      next();
    }
    bool neg = false;
    if (peek().kind == Tok::kMinus || peek().kind == Tok::kPlus) neg = next().kind == Tok::kMinus;
    const Token& t = peek();
    if (t.kind != Tok::kNumber || t.text.find_first_not_of("0123456789") != std::string::npos)
      fail(t, "integer exponent expected");
    next();
    int value = 0;
    try {
      value = std::stoi(t.text);
    } catch (const std::exception&) {
      fail(t, "exponent out of range");
    }
    if (paren) {
      if (peek().kind != Tok::kRParen) fail(peek(), "')' expected");
      next();
    }
    return neg ? -value : value;
  }

  Expr parsePrimary() {
    const Token t = next();
    switch (t.kind) {
      case Tok::kNumber: {
        double v = 0.0;
        if (!parseDouble(t.text, v)) fail(t, "malformed number '" + t.text + "'");
        return Expr::constant(v);
      }
      case Tok::kIdent: {
        if (auto f = functions().find(t.text); f != functions().end() &&
                                               peek().kind == Tok::kLParen) {
          next();
          std::vector<Expr> args{parseExpr()};
          while (peek().kind == Tok::kComma) {
            next();
            args.push_back(parseExpr());
          }
          if (peek().kind != Tok::kRParen) fail(peek(), "')' expected");
          next();
          if (args.size() != 1)
            throw ArityError(line_, t.column, t.text + " takes one argument, got " +
                                                  std::to_string(args.size()));
          return apply(f->second, args[0]);
        }
        auto v = vars_.find(t.text);
        if (v == vars_.end())
          throw UnknownVariable(line_, t.column, "unknown variable '" + t.text + "'");
        return Expr::var(v->second);
      }
      case Tok::kLParen: {
        Expr e = parseExpr();
        if (peek().kind != Tok::kRParen) fail(peek(), "')' expected");
        next();
        return e;
      }
      default:
        fail(t, t.kind == Tok::kEnd ? "unexpected end of expression"
                                    : "unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  const std::map<std::string, int>& vars_;
  int line_;
  size_t pos_ = 0;
};

}  // namespace

MpscInstance parseInstance(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int lineNo = 0;
  std::optional<std::vector<std::string>> names;
  std::map<std::string, int> vars;
  std::optional<Expr> objective;
  std::vector<Expr> ineq, eq;
  std::vector<std::pair<Expr, Expr>> switches;
  int lastLine = 0;

  while (std::getline(in, raw)) {
    ++lineNo;
    lastLine = lineNo;
    std::string line = raw.substr(0, raw.find('#'));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw SyntaxError(lineNo, static_cast<int>(first) + 1, "section 'name:' expected");
    std::string key = line.substr(first, colon - first);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    const std::string body = line.substr(colon + 1);
    const int offset = static_cast<int>(colon) + 1;

    if (key == "vars") {
      if (names) throw SyntaxError(lineNo, static_cast<int>(first) + 1, "duplicate vars section");
      names.emplace();
      for (const Token& t : tokenize(body, offset, lineNo)) {
        if (t.kind == Tok::kEnd) break;
        if (t.kind == Tok::kComma) continue;
        if (t.kind != Tok::kIdent || functions().count(t.text))
          throw SyntaxError(lineNo, t.column, "variable name expected");
        if (vars.count(t.text))
          throw SyntaxError(lineNo, t.column, "duplicate variable '" + t.text + "'");
        vars[t.text] = static_cast<int>(names->size());
        names->push_back(t.text);
      }
      if (names->empty()) throw SyntaxError(lineNo, offset + 1, "no variables declared");
      continue;
    }
    if (key != "objective" && key != "ineq" && key != "eq" && key != "switch")
      throw SyntaxError(lineNo, static_cast<int>(first) + 1, "unknown section '" + key + "'");
    if (!names) throw SyntaxError(lineNo, static_cast<int>(first) + 1, "vars section must come first");

    ExprParser parser(tokenize(body, offset, lineNo), vars, lineNo);
    const std::vector<Expr> exprs = parser.parseList();
    const size_t want = key == "switch" ? 2 : 1;
    if (exprs.size() != want)
      throw ArityError(lineNo, offset + 1,
                       key + " takes " + std::to_string(want) + " expression" +
                           (want > 1 ? "s" : "") + ", got " + std::to_string(exprs.size()));
    if (key == "objective") {
      if (objective) throw SyntaxError(lineNo, static_cast<int>(first) + 1, "duplicate objective");
      objective = exprs[0];
    } else if (key == "ineq") {
      ineq.push_back(exprs[0]);
    } else if (key == "eq") {
      eq.push_back(exprs[0]);
    } else {
      switches.emplace_back(exprs[0], exprs[1]);
    }
  }
  if (!names) throw SyntaxError(lastLine + 1, 1, "missing vars section");
  if (!objective) throw SyntaxError(lastLine + 1, 1, "missing objective section");
  const int n = static_cast<int>(names->size());
  return MpscInstance(n, *objective, std::move(ineq), std::move(eq), std::move(switches),
                      *names);
}

MpscInstance loadInstance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read instance file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseInstance(ss.str());
}

}  // namespace mpsc
