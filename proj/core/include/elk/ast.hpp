#ifndef ELK_AST_HPP
#define ELK_AST_HPP

#include "elk/common.hpp"
#include "elk/ops.hpp"

#include <memory>
#include <string>
#include <vector>

namespace elk {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { IntLit, ScalarRef, ArrayLoad, Binary, Compare };
  Kind kind;
  SourceLoc loc;

  int32_t value = 0;  // IntLit
  std::string name;   // ScalarRef / ArrayLoad array name
  BinaryOp binOp{};   // Binary
  CmpOp cmpOp{};      // Compare
  ExprPtr lhs, rhs;   // Binary/Compare operands; ArrayLoad index in lhs
  int memOpId = -1;   // ArrayLoad: static memory-op site id
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  enum class Kind { Assign, ArrayStore, If, DoWhile, Return };
  Kind kind;
  SourceLoc loc;

  std::string target;                  // Assign scalar / ArrayStore array
  ExprPtr index;                       // ArrayStore index
  ExprPtr value;                       // Assign/ArrayStore rhs, Return value
  ExprPtr cond;                        // If / DoWhile condition
  std::vector<StmtPtr> thenBody;       // If then-branch; DoWhile body
  std::vector<StmtPtr> elseBody;       // If else-branch
  int memOpId = -1;                    // ArrayStore: static site id
};

struct Param {
  std::string name;
  bool isArray = false;
  int length = 0; // elements, arrays only
  SourceLoc loc;
};

/// Parsed kernel. `while` loops are desugared to if + do-while at parse
/// time, so DoWhile is the only loop form past this point. Static memory
/// operation sites (loads and stores) are numbered in program order.
struct Kernel {
  std::string name;
  std::vector<Param> params;
  std::vector<StmtPtr> body; // optional trailing Return
  int memOpCount = 0;

  const Param *findParam(const std::string &n) const {
    for (const auto &p : params)
      if (p.name == n)
        return &p;
    return nullptr;
  }
};

std::string printExpr(const Expr &e);
std::string printKernel(const Kernel &k);

bool exprEqual(const Expr &a, const Expr &b);
bool kernelEqual(const Kernel &a, const Kernel &b);

} // namespace elk

#endif
