#ifndef ELK_OPS_HPP
#define ELK_OPS_HPP

#include <cstdint>
#include <optional>
#include <string>

namespace elk {

enum class BinaryOp { Add, Sub, Mul, Div, Rem, And, Or, Xor, Shl, Shr };
enum class CmpOp { Eq, Ne, Lt, Gt, Le, Ge };

enum class TrapKind { None, DivByZero, OutOfBounds, MaxCycles, Deadlock, StepBudget };

/// All kernel values are 32-bit two's complement. The interpreter and the
/// circuit simulator share these helpers so their arithmetic cannot diverge.
/// Division by zero traps; INT_MIN / -1 is defined to wrap (result INT_MIN,
/// remainder 0). Shift amounts are masked to 5 bits; >> is arithmetic.
std::optional<int32_t> evalBinary(BinaryOp op, int32_t a, int32_t b);
bool evalCompare(CmpOp op, int32_t a, int32_t b);

const char *binaryOpName(BinaryOp op); // token spelling, e.g. "+"
const char *cmpOpName(CmpOp op);
const char *trapKindName(TrapKind k);

} // namespace elk

#endif
