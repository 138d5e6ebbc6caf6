#ifndef ELK_INTERP_HPP
#define ELK_INTERP_HPP

#include "elk/ast.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace elk {

/// One observed memory event of a static operation site.
struct MemEvent {
  bool isWrite = false;
  uint32_t addr = 0;
  uint32_t data = 0;
  uint64_t cycle = 0; // interpreter: program-order step index
};

/// Per static memory-op id, the ordered sequence of observed events.
using MemTrace = std::map<int, std::vector<MemEvent>>;

struct Trap {
  TrapKind kind = TrapKind::None;
  int memOpId = -1; // faulting site for memory traps
  std::string detail;
};

/// Result of the sequential reference execution: produced by direct AST
/// interpretation, no IR involved.
struct RefResult {
  std::optional<int32_t> returnValue;
  std::map<std::string, std::vector<int32_t>> memories;
  MemTrace trace;
  Trap trap; // kind None when the run completed
  bool ok() const { return trap.kind == TrapKind::None; }
};

struct InterpLimits {
  uint64_t maxSteps = 10'000'000; // dynamic expression-evaluation budget
};

RefResult interpret(const Kernel &k,
                    const std::map<std::string, std::vector<int32_t>> &arrays,
                    const std::map<std::string, int32_t> &args,
                    const InterpLimits &limits = {});

} // namespace elk

#endif
