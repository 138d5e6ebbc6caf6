#include "elk/ast.hpp"

#include <sstream>

namespace elk {

namespace {

int precedence(const Expr &e) {
  if (e.kind == Expr::Kind::Compare)
    return 0;
  if (e.kind != Expr::Kind::Binary)
    return 100;
  switch (e.binOp) {
  case BinaryOp::Or:
    return 1;
  case BinaryOp::Xor:
    return 2;
  case BinaryOp::And:
    return 3;
  case BinaryOp::Shl:
  case BinaryOp::Shr:
    return 4;
  case BinaryOp::Add:
  case BinaryOp::Sub:
    return 5;
  case BinaryOp::Mul:
  case BinaryOp::Div:
  case BinaryOp::Rem:
    return 6;
  }
  return 100;
}

void printExprPrec(std::ostream &os, const Expr &e, int minPrec) {
  int p = precedence(e);
  bool paren = p < minPrec;
  if (paren)
    os << "(";
  switch (e.kind) {
  case Expr::Kind::IntLit:
    os << e.value;
    break;
  case Expr::Kind::ScalarRef:
    os << e.name;
    break;
  case Expr::Kind::ArrayLoad:
    os << e.name << "[";
    printExprPrec(os, *e.lhs, 0);
    os << "]";
    break;
  case Expr::Kind::Binary:
    printExprPrec(os, *e.lhs, p);
    os << " " << binaryOpName(e.binOp) << " ";
    printExprPrec(os, *e.rhs, p + 1);
    break;
  case Expr::Kind::Compare:
    printExprPrec(os, *e.lhs, p + 1);
    os << " " << cmpOpName(e.cmpOp) << " ";
    printExprPrec(os, *e.rhs, p + 1);
    break;
  }
  if (paren)
    os << ")";
}

void printStmts(std::ostream &os, const std::vector<StmtPtr> &body, int indent);

void printStmt(std::ostream &os, const Stmt &s, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  os << pad;
  switch (s.kind) {
  case Stmt::Kind::Assign:
    os << s.target << " = ";
    printExprPrec(os, *s.value, 0);
    os << ";\n";
    break;
  case Stmt::Kind::ArrayStore:
    os << s.target << "[";
    printExprPrec(os, *s.index, 0);
    os << "] = ";
    printExprPrec(os, *s.value, 0);
    os << ";\n";
    break;
  case Stmt::Kind::If:
    os << "if (";
    printExprPrec(os, *s.cond, 0);
    os << ") {\n";
    printStmts(os, s.thenBody, indent + 1);
    os << pad << "}";
    if (!s.elseBody.empty()) {
      os << " else {\n";
      printStmts(os, s.elseBody, indent + 1);
      os << pad << "}";
    }
    os << "\n";
    break;
  case Stmt::Kind::DoWhile:
    os << "do {\n";
    printStmts(os, s.thenBody, indent + 1);
    os << pad << "} while (";
    printExprPrec(os, *s.cond, 0);
    os << ");\n";
    break;
  case Stmt::Kind::Return:
    os << "return ";
    printExprPrec(os, *s.value, 0);
    os << ";\n";
    break;
  }
}

void printStmts(std::ostream &os, const std::vector<StmtPtr> &body, int indent) {
  for (const auto &s : body)
    printStmt(os, *s, indent);
}

} // namespace

std::string printExpr(const Expr &e) {
  std::ostringstream os;
  printExprPrec(os, e, 0);
  return os.str();
}

std::string printKernel(const Kernel &k) {
  std::ostringstream os;
  os << "kernel " << k.name << "(";
  for (size_t i = 0; i < k.params.size(); ++i) {
    if (i)
      os << ", ";
    os << k.params[i].name << ":i32";
    if (k.params[i].isArray)
      os << "[" << k.params[i].length << "]";
  }
  os << ") {\n";
  printStmts(os, k.body, 1);
  os << "}\n";
  return os.str();
}

bool exprEqual(const Expr &a, const Expr &b) {
  if (a.kind != b.kind)
    return false;
  switch (a.kind) {
  case Expr::Kind::IntLit:
    return a.value == b.value;
  case Expr::Kind::ScalarRef:
    return a.name == b.name;
  case Expr::Kind::ArrayLoad:
    return a.name == b.name && exprEqual(*a.lhs, *b.lhs);
  case Expr::Kind::Binary:
    return a.binOp == b.binOp && exprEqual(*a.lhs, *b.lhs) &&
           exprEqual(*a.rhs, *b.rhs);
  case Expr::Kind::Compare:
    return a.cmpOp == b.cmpOp && exprEqual(*a.lhs, *b.lhs) &&
           exprEqual(*a.rhs, *b.rhs);
  }
  return false;
}

static bool stmtsEqual(const std::vector<StmtPtr> &a,
                       const std::vector<StmtPtr> &b);

static bool stmtEqual(const Stmt &a, const Stmt &b) {
  if (a.kind != b.kind)
    return false;
  switch (a.kind) {
  case Stmt::Kind::Assign:
    return a.target == b.target && exprEqual(*a.value, *b.value);
  case Stmt::Kind::ArrayStore:
    return a.target == b.target && exprEqual(*a.index, *b.index) &&
           exprEqual(*a.value, *b.value);
  case Stmt::Kind::If:
    return exprEqual(*a.cond, *b.cond) && stmtsEqual(a.thenBody, b.thenBody) &&
           stmtsEqual(a.elseBody, b.elseBody);
  case Stmt::Kind::DoWhile:
    return exprEqual(*a.cond, *b.cond) && stmtsEqual(a.thenBody, b.thenBody);
  case Stmt::Kind::Return:
    return exprEqual(*a.value, *b.value);
  }
  return false;
}

static bool stmtsEqual(const std::vector<StmtPtr> &a,
                       const std::vector<StmtPtr> &b) {
  if (a.size() != b.size())
    return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!stmtEqual(*a[i], *b[i]))
      return false;
  return true;
}

bool kernelEqual(const Kernel &a, const Kernel &b) {
  if (a.name != b.name || a.params.size() != b.params.size())
    return false;
  for (size_t i = 0; i < a.params.size(); ++i) {
    const Param &pa = a.params[i], &pb = b.params[i];
    if (pa.name != pb.name || pa.isArray != pb.isArray ||
        pa.length != pb.length)
      return false;
  }
  return stmtsEqual(a.body, b.body);
}

} // namespace elk
