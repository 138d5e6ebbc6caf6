#include "elk/parse.hpp"

#include <cctype>
#include <map>
#include <set>

namespace elk {

namespace {

enum class Tok {
  End,
  Ident,
  Int,
  KwKernel,
  KwIf,
  KwElse,
  KwDo,
  KwWhile,
  KwReturn,
  KwI32,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semi,
  Colon,
  Assign,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  Amp,
  Pipe,
  Caret,
  Shl,
  Shr,
  Eq,
  Ne,
  Lt,
  Gt,
  Le,
  Ge,
};

struct Token {
  Tok kind;
  std::string text;
  int32_t value = 0;
  SourceLoc loc;
};

class Lexer {
public:
  explicit Lexer(const std::string &src) : src(src) {}

  Token next() {
    skipWs();
    Token t;
    t.loc = {line, col};
    if (pos >= src.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = src[pos];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) ||
              src[pos] == '_'))
        advance();
      t.text = src.substr(start, pos - start);
      static const std::map<std::string, Tok> keywords = {
          {"kernel", Tok::KwKernel}, {"if", Tok::KwIf},
          {"else", Tok::KwElse},     {"do", Tok::KwDo},
          {"while", Tok::KwWhile},   {"return", Tok::KwReturn},
          {"i32", Tok::KwI32},
      };
      auto it = keywords.find(t.text);
      t.kind = it == keywords.end() ? Tok::Ident : it->second;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      int64_t v = 0;
      while (pos < src.size() &&
             std::isdigit(static_cast<unsigned char>(src[pos]))) {
        v = v * 10 + (src[pos] - '0');
        if (v > INT32_MAX)
          throw Error("integer literal out of i32 range", t.loc);
        advance();
      }
      t.kind = Tok::Int;
      t.value = static_cast<int32_t>(v);
      return t;
    }
    auto two = [&](char a, char b) {
      return c == a && pos + 1 < src.size() && src[pos + 1] == b;
    };
    if (two('<', '<')) return punct(t, Tok::Shl, 2);
    if (two('>', '>')) return punct(t, Tok::Shr, 2);
    if (two('=', '=')) return punct(t, Tok::Eq, 2);
    if (two('!', '=')) return punct(t, Tok::Ne, 2);
    if (two('<', '=')) return punct(t, Tok::Le, 2);
    if (two('>', '=')) return punct(t, Tok::Ge, 2);
    switch (c) {
    case '(': return punct(t, Tok::LParen, 1);
    case ')': return punct(t, Tok::RParen, 1);
    case '{': return punct(t, Tok::LBrace, 1);
    case '}': return punct(t, Tok::RBrace, 1);
    case '[': return punct(t, Tok::LBracket, 1);
    case ']': return punct(t, Tok::RBracket, 1);
    case ',': return punct(t, Tok::Comma, 1);
    case ';': return punct(t, Tok::Semi, 1);
    case ':': return punct(t, Tok::Colon, 1);
    case '=': return punct(t, Tok::Assign, 1);
    case '+': return punct(t, Tok::Plus, 1);
    case '-': return punct(t, Tok::Minus, 1);
    case '*': return punct(t, Tok::Star, 1);
    case '/': return punct(t, Tok::Slash, 1);
    case '%': return punct(t, Tok::Percent, 1);
    case '&': return punct(t, Tok::Amp, 1);
    case '|': return punct(t, Tok::Pipe, 1);
    case '^': return punct(t, Tok::Caret, 1);
    case '<': return punct(t, Tok::Lt, 1);
    case '>': return punct(t, Tok::Gt, 1);
    default:
      throw Error(std::string("unexpected character '") + c + "'", t.loc);
    }
  }

private:
  Token punct(Token &t, Tok k, int n) {
    t.kind = k;
    for (int i = 0; i < n; ++i)
      advance();
    return t;
  }

  void skipWs() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
        while (pos < src.size() && src[pos] != '\n')
          advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (src[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  const std::string &src;
  size_t pos = 0;
  int line = 1;
  int col = 1;
};

class Parser {
public:
  explicit Parser(const std::string &src) : lexer(src) { bump(); }

  Kernel parseKernel() {
    Kernel k;
    expect(Tok::KwKernel, "expected 'kernel'");
    k.name = expectIdent("expected kernel name");
    expect(Tok::LParen, "expected '('");
    if (cur.kind != Tok::RParen) {
      for (;;) {
        k.params.push_back(parseParam());
        if (cur.kind != Tok::Comma)
          break;
        bump();
      }
    }
    expect(Tok::RParen, "expected ')'");
    for (const auto &p : k.params) {
      if (scalars.count(p.name) || arrays.count(p.name))
        throw Error("duplicate parameter '" + p.name + "'", p.loc);
      if (p.isArray)
        arrays.insert(p.name);
      else
        scalars.insert(p.name);
    }
    expect(Tok::LBrace, "expected '{'");
    k.body = parseStmts(/*topLevel=*/true);
    expect(Tok::RBrace, "expected '}'");
    if (cur.kind != Tok::End)
      throw Error("trailing input after kernel body", cur.loc);
    numberMemOps(k);
    return k;
  }

private:
  Param parseParam() {
    Param p;
    p.loc = cur.loc;
    p.name = expectIdent("expected parameter name");
    expect(Tok::Colon, "expected ':'");
    expect(Tok::KwI32, "expected 'i32'");
    if (cur.kind == Tok::LBracket) {
      bump();
      if (cur.kind != Tok::Int)
        throw Error("expected array length", cur.loc);
      p.isArray = true;
      p.length = cur.value;
      if (p.length <= 0)
        throw Error("array length must be positive", cur.loc);
      bump();
      expect(Tok::RBracket, "expected ']'");
    }
    return p;
  }

  std::vector<StmtPtr> parseStmts(bool topLevel) {
    std::vector<StmtPtr> out;
    while (cur.kind != Tok::RBrace && cur.kind != Tok::End) {
      bool isReturn = cur.kind == Tok::KwReturn;
      out.push_back(parseStmt());
      if (isReturn) {
        if (!topLevel)
          throw Error("return only allowed at top level", out.back()->loc);
        if (cur.kind != Tok::RBrace)
          throw Error("return must be the last statement", cur.loc);
      }
    }
    return out;
  }

  StmtPtr parseStmt() {
    switch (cur.kind) {
    case Tok::KwIf:
      return parseIf();
    case Tok::KwDo:
      return parseDoWhile();
    case Tok::KwWhile:
      return parseWhile();
    case Tok::KwReturn: {
      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Return;
      s->loc = cur.loc;
      bump();
      s->value = parseExpr();
      expect(Tok::Semi, "expected ';'");
      return s;
    }
    case Tok::Ident:
      return parseAssignOrStore();
    default:
      throw Error("expected statement", cur.loc);
    }
  }

  StmtPtr parseAssignOrStore() {
    auto s = std::make_unique<Stmt>();
    s->loc = cur.loc;
    s->target = expectIdent("expected identifier");
    if (cur.kind == Tok::LBracket) {
      if (!arrays.count(s->target))
        throw Error("'" + s->target + "' is not an array", s->loc);
      s->kind = Stmt::Kind::ArrayStore;
      bump();
      s->index = parseExpr();
      expect(Tok::RBracket, "expected ']'");
    } else {
      if (arrays.count(s->target))
        throw Error("arrays cannot be assigned wholesale", s->loc);
      s->kind = Stmt::Kind::Assign;
      scalars.insert(s->target);
    }
    expect(Tok::Assign, "expected '='");
    s->value = parseExpr();
    expect(Tok::Semi, "expected ';'");
    return s;
  }

  StmtPtr parseIf() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::If;
    s->loc = cur.loc;
    bump();
    expect(Tok::LParen, "expected '('");
    s->cond = parseExpr();
    expect(Tok::RParen, "expected ')'");
    expect(Tok::LBrace, "expected '{'");
    s->thenBody = parseStmts(false);
    expect(Tok::RBrace, "expected '}'");
    if (cur.kind == Tok::KwElse) {
      bump();
      expect(Tok::LBrace, "expected '{'");
      s->elseBody = parseStmts(false);
      expect(Tok::RBrace, "expected '}'");
    }
    return s;
  }

  StmtPtr parseDoWhile() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::DoWhile;
    s->loc = cur.loc;
    bump();
    expect(Tok::LBrace, "expected '{'");
    s->thenBody = parseStmts(false);
    expect(Tok::RBrace, "expected '}'");
    expect(Tok::KwWhile, "expected 'while'");
    expect(Tok::LParen, "expected '('");
    s->cond = parseExpr();
    expect(Tok::RParen, "expected ')'");
    expect(Tok::Semi, "expected ';'");
    return s;
  }

  // while (c) { b } desugars to if (c) { do { b } while (c); } so theta
  // stays the only loop form in the IR.
  StmtPtr parseWhile() {
    SourceLoc loc = cur.loc;
    bump();
    expect(Tok::LParen, "expected '('");
    ExprPtr cond = parseExpr();
    expect(Tok::RParen, "expected ')'");
    expect(Tok::LBrace, "expected '{'");
    std::vector<StmtPtr> body = parseStmts(false);
    expect(Tok::RBrace, "expected '}'");

    auto loop = std::make_unique<Stmt>();
    loop->kind = Stmt::Kind::DoWhile;
    loop->loc = loc;
    loop->thenBody = std::move(body);
    loop->cond = cloneExpr(*cond);

    auto guard = std::make_unique<Stmt>();
    guard->kind = Stmt::Kind::If;
    guard->loc = loc;
    guard->cond = std::move(cond);
    guard->thenBody.push_back(std::move(loop));
    return guard;
  }

  ExprPtr parseExpr() {
    ExprPtr lhs = parseBitOr();
    switch (cur.kind) {
    case Tok::Eq:
    case Tok::Ne:
    case Tok::Lt:
    case Tok::Gt:
    case Tok::Le:
    case Tok::Ge: {
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Compare;
      e->loc = cur.loc;
      switch (cur.kind) {
      case Tok::Eq: e->cmpOp = CmpOp::Eq; break;
      case Tok::Ne: e->cmpOp = CmpOp::Ne; break;
      case Tok::Lt: e->cmpOp = CmpOp::Lt; break;
      case Tok::Gt: e->cmpOp = CmpOp::Gt; break;
      case Tok::Le: e->cmpOp = CmpOp::Le; break;
      default: e->cmpOp = CmpOp::Ge; break;
      }
      bump();
      e->lhs = std::move(lhs);
      e->rhs = parseBitOr();
      return e;
    }
    default:
      return lhs;
    }
  }

  ExprPtr parseBitOr() { return parseLeftAssoc({{Tok::Pipe, BinaryOp::Or}}, &Parser::parseBitXor); }
  ExprPtr parseBitXor() { return parseLeftAssoc({{Tok::Caret, BinaryOp::Xor}}, &Parser::parseBitAnd); }
  ExprPtr parseBitAnd() { return parseLeftAssoc({{Tok::Amp, BinaryOp::And}}, &Parser::parseShift); }
  ExprPtr parseShift() {
    return parseLeftAssoc({{Tok::Shl, BinaryOp::Shl}, {Tok::Shr, BinaryOp::Shr}},
                          &Parser::parseAdd);
  }
  ExprPtr parseAdd() {
    return parseLeftAssoc({{Tok::Plus, BinaryOp::Add}, {Tok::Minus, BinaryOp::Sub}},
                          &Parser::parseMul);
  }
  ExprPtr parseMul() {
    return parseLeftAssoc({{Tok::Star, BinaryOp::Mul},
                           {Tok::Slash, BinaryOp::Div},
                           {Tok::Percent, BinaryOp::Rem}},
                          &Parser::parsePrimary);
  }

  ExprPtr parseLeftAssoc(std::initializer_list<std::pair<Tok, BinaryOp>> ops,
                         ExprPtr (Parser::*sub)()) {
    ExprPtr lhs = (this->*sub)();
    for (;;) {
      bool matched = false;
      for (auto [tok, op] : ops) {
        if (cur.kind == tok) {
          auto e = std::make_unique<Expr>();
          e->kind = Expr::Kind::Binary;
          e->binOp = op;
          e->loc = cur.loc;
          bump();
          e->lhs = std::move(lhs);
          e->rhs = (this->*sub)();
          lhs = std::move(e);
          matched = true;
          break;
        }
      }
      if (!matched)
        return lhs;
    }
  }

  ExprPtr parsePrimary() {
    auto e = std::make_unique<Expr>();
    e->loc = cur.loc;
    switch (cur.kind) {
    case Tok::Int:
      e->kind = Expr::Kind::IntLit;
      e->value = cur.value;
      bump();
      return e;
    case Tok::Ident: {
      std::string name = cur.text;
      bump();
      if (cur.kind == Tok::LBracket) {
        if (!arrays.count(name))
          throw Error("'" + name + "' is not an array", e->loc);
        e->kind = Expr::Kind::ArrayLoad;
        e->name = name;
        bump();
        e->lhs = parseExpr();
        expect(Tok::RBracket, "expected ']'");
        return e;
      }
      if (arrays.count(name))
        throw Error("array '" + name + "' must be indexed", e->loc);
      if (!scalars.count(name))
        throw Error("use of undeclared identifier '" + name + "'", e->loc);
      e->kind = Expr::Kind::ScalarRef;
      e->name = name;
      return e;
    }
    case Tok::LParen: {
      bump();
      ExprPtr inner = parseExpr();
      expect(Tok::RParen, "expected ')'");
      return inner;
    }
    default:
      throw Error("expected expression", cur.loc);
    }
  }

  ExprPtr cloneExpr(const Expr &e) {
    auto c = std::make_unique<Expr>();
    c->kind = e.kind;
    c->loc = e.loc;
    c->value = e.value;
    c->name = e.name;
    c->binOp = e.binOp;
    c->cmpOp = e.cmpOp;
    if (e.lhs)
      c->lhs = cloneExpr(*e.lhs);
    if (e.rhs)
      c->rhs = cloneExpr(*e.rhs);
    return c;
  }

  // Static site ids in program order: expressions left to right, store
  // after its index and value, do-while condition after the body.
  void numberExpr(Expr &e, int &next) {
    if (e.lhs)
      numberExpr(*e.lhs, next);
    if (e.rhs)
      numberExpr(*e.rhs, next);
    if (e.kind == Expr::Kind::ArrayLoad)
      e.memOpId = next++;
  }

  void numberStmts(std::vector<StmtPtr> &body, int &next) {
    for (auto &s : body) {
      switch (s->kind) {
      case Stmt::Kind::Assign:
      case Stmt::Kind::Return:
        numberExpr(*s->value, next);
        break;
      case Stmt::Kind::ArrayStore:
        numberExpr(*s->index, next);
        numberExpr(*s->value, next);
        s->memOpId = next++;
        break;
      case Stmt::Kind::If:
        numberExpr(*s->cond, next);
        numberStmts(s->thenBody, next);
        numberStmts(s->elseBody, next);
        break;
      case Stmt::Kind::DoWhile:
        numberStmts(s->thenBody, next);
        numberExpr(*s->cond, next);
        break;
      }
    }
  }

  void numberMemOps(Kernel &k) {
    int next = 0;
    numberStmts(k.body, next);
    k.memOpCount = next;
  }

  void bump() { cur = lexer.next(); }

  void expect(Tok k, const char *msg) {
    if (cur.kind != k)
      throw Error(msg, cur.loc);
    bump();
  }

  std::string expectIdent(const char *msg) {
    if (cur.kind != Tok::Ident)
      throw Error(msg, cur.loc);
    std::string s = cur.text;
    bump();
    return s;
  }

  Lexer lexer;
  Token cur;
  std::set<std::string> scalars;
  std::set<std::string> arrays;
};

} // namespace

Kernel parse(const std::string &source) {
  Parser p(source);
  return p.parseKernel();
}

} // namespace elk
