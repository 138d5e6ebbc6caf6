#include "elk/ops.hpp"

#include <limits>

namespace elk {

std::optional<int32_t> evalBinary(BinaryOp op, int32_t a, int32_t b) {
  uint32_t ua = static_cast<uint32_t>(a);
  uint32_t ub = static_cast<uint32_t>(b);
  switch (op) {
  case BinaryOp::Add:
    return static_cast<int32_t>(ua + ub);
  case BinaryOp::Sub:
    return static_cast<int32_t>(ua - ub);
  case BinaryOp::Mul:
    return static_cast<int32_t>(ua * ub);
  case BinaryOp::Div:
    if (b == 0)
      return std::nullopt;
    if (a == std::numeric_limits<int32_t>::min() && b == -1)
      return a; // wraps
    return a / b;
  case BinaryOp::Rem:
    if (b == 0)
      return std::nullopt;
    if (a == std::numeric_limits<int32_t>::min() && b == -1)
      return 0;
    return a % b;
  case BinaryOp::And:
    return static_cast<int32_t>(ua & ub);
  case BinaryOp::Or:
    return static_cast<int32_t>(ua | ub);
  case BinaryOp::Xor:
    return static_cast<int32_t>(ua ^ ub);
  case BinaryOp::Shl:
    return static_cast<int32_t>(ua << (ub & 31u));
  case BinaryOp::Shr:
    return static_cast<int32_t>(a >> (ub & 31u)); // arithmetic
  }
  return std::nullopt;
}

bool evalCompare(CmpOp op, int32_t a, int32_t b) {
  switch (op) {
  case CmpOp::Eq:
    return a == b;
  case CmpOp::Ne:
    return a != b;
  case CmpOp::Lt:
    return a < b;
  case CmpOp::Gt:
    return a > b;
  case CmpOp::Le:
    return a <= b;
  case CmpOp::Ge:
    return a >= b;
  }
  return false;
}

const char *binaryOpName(BinaryOp op) {
  switch (op) {
  case BinaryOp::Add:
    return "+";
  case BinaryOp::Sub:
    return "-";
  case BinaryOp::Mul:
    return "*";
  case BinaryOp::Div:
    return "/";
  case BinaryOp::Rem:
    return "%";
  case BinaryOp::And:
    return "&";
  case BinaryOp::Or:
    return "|";
  case BinaryOp::Xor:
    return "^";
  case BinaryOp::Shl:
    return "<<";
  case BinaryOp::Shr:
    return ">>";
  }
  return "?";
}

const char *cmpOpName(CmpOp op) {
  switch (op) {
  case CmpOp::Eq:
    return "==";
  case CmpOp::Ne:
    return "!=";
  case CmpOp::Lt:
    return "<";
  case CmpOp::Gt:
    return ">";
  case CmpOp::Le:
    return "<=";
  case CmpOp::Ge:
    return ">=";
  }
  return "?";
}

const char *trapKindName(TrapKind k) {
  switch (k) {
  case TrapKind::None:
    return "none";
  case TrapKind::DivByZero:
    return "div-by-zero";
  case TrapKind::OutOfBounds:
    return "out-of-bounds";
  case TrapKind::MaxCycles:
    return "max-cycles";
  case TrapKind::Deadlock:
    return "deadlock";
  case TrapKind::StepBudget:
    return "step-budget";
  }
  return "?";
}

} // namespace elk
