#include "elk/interp.hpp"

#include "elk/common.hpp"

namespace elk {

namespace {

struct TrapSignal {
  Trap trap;
};

class Interp {
public:
  Interp(const Kernel &k, RefResult &out, const InterpLimits &limits)
      : kernel(k), out(out), limits(limits) {}

  void run(const std::map<std::string, std::vector<int32_t>> &arrays,
           const std::map<std::string, int32_t> &args) {
    for (const auto &p : kernel.params) {
      if (p.isArray) {
        std::vector<int32_t> mem(static_cast<size_t>(p.length), 0);
        auto it = arrays.find(p.name);
        if (it != arrays.end())
          for (size_t i = 0; i < mem.size() && i < it->second.size(); ++i)
            mem[i] = it->second[i];
        out.memories[p.name] = std::move(mem);
      } else {
        auto it = args.find(p.name);
        scalars[p.name] = it == args.end() ? 0 : it->second;
      }
    }
    execBlock(kernel.body);
  }

private:
  void execBlock(const std::vector<StmtPtr> &body) {
    for (const auto &s : body)
      execStmt(*s);
  }

  void execStmt(const Stmt &s) {
    switch (s.kind) {
    case Stmt::Kind::Assign:
      scalars[s.target] = eval(*s.value);
      break;
    case Stmt::Kind::ArrayStore: {
      int32_t idx = eval(*s.index);
      int32_t val = eval(*s.value);
      store(s.target, s.memOpId, idx, val);
      break;
    }
    case Stmt::Kind::If:
      if (eval(*s.cond) != 0)
        execBlock(s.thenBody);
      else
        execBlock(s.elseBody);
      break;
    case Stmt::Kind::DoWhile:
      do {
        execBlock(s.thenBody);
      } while (eval(*s.cond) != 0);
      break;
    case Stmt::Kind::Return:
      out.returnValue = eval(*s.value);
      break;
    }
  }

  int32_t eval(const Expr &e) {
    if (++steps > limits.maxSteps)
      throw TrapSignal{{TrapKind::StepBudget, -1, "interpreter step budget"}};
    switch (e.kind) {
    case Expr::Kind::IntLit:
      return e.value;
    case Expr::Kind::ScalarRef: {
      auto it = scalars.find(e.name);
      if (it == scalars.end())
        throw Error("read of uninitialized scalar '" + e.name + "'", e.loc);
      return it->second;
    }
    case Expr::Kind::ArrayLoad: {
      int32_t idx = eval(*e.lhs);
      return load(e.name, e.memOpId, idx);
    }
    case Expr::Kind::Binary: {
      int32_t a = eval(*e.lhs);
      int32_t b = eval(*e.rhs);
      auto r = evalBinary(e.binOp, a, b);
      if (!r)
        throw TrapSignal{{TrapKind::DivByZero, -1, "division by zero"}};
      return *r;
    }
    case Expr::Kind::Compare: {
      int32_t a = eval(*e.lhs);
      int32_t b = eval(*e.rhs);
      return evalCompare(e.cmpOp, a, b) ? 1 : 0;
    }
    }
    return 0;
  }

  int32_t load(const std::string &array, int opId, int32_t idx) {
    auto &mem = out.memories.at(array);
    if (idx < 0 || static_cast<size_t>(idx) >= mem.size())
      throw TrapSignal{{TrapKind::OutOfBounds, opId,
                        array + "[" + std::to_string(idx) + "]"}};
    int32_t v = mem[static_cast<size_t>(idx)];
    out.trace[opId].push_back({false, static_cast<uint32_t>(idx),
                               static_cast<uint32_t>(v), steps});
    return v;
  }

  void store(const std::string &array, int opId, int32_t idx, int32_t val) {
    auto &mem = out.memories.at(array);
    if (idx < 0 || static_cast<size_t>(idx) >= mem.size())
      throw TrapSignal{{TrapKind::OutOfBounds, opId,
                        array + "[" + std::to_string(idx) + "]"}};
    mem[static_cast<size_t>(idx)] = val;
    out.trace[opId].push_back({true, static_cast<uint32_t>(idx),
                               static_cast<uint32_t>(val), steps});
  }

  const Kernel &kernel;
  RefResult &out;
  InterpLimits limits;
  std::map<std::string, int32_t> scalars;
  uint64_t steps = 0;

  friend RefResult elk::interpret(
      const Kernel &, const std::map<std::string, std::vector<int32_t>> &,
      const std::map<std::string, int32_t> &, const InterpLimits &);
};

} // namespace

RefResult interpret(const Kernel &k,
                    const std::map<std::string, std::vector<int32_t>> &arrays,
                    const std::map<std::string, int32_t> &args,
                    const InterpLimits &limits) {
  RefResult out;
  Interp interp(k, out, limits);
  try {
    interp.run(arrays, args);
  } catch (const TrapSignal &t) {
    out.trap = t.trap;
  }
  return out;
}

} // namespace elk
