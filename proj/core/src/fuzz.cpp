#include "elk/fuzz.hpp"

#include "elk/equiv.hpp"
#include "elk/interp.hpp"
#include "elk/parse.hpp"

#include <random>
#include <set>
#include <sstream>

namespace elk {

namespace {

uint64_t mix(uint64_t a, uint64_t b) {
  uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdull;
  x ^= x >> 33;
  return x;
}

class Gen {
public:
  Gen(uint64_t seed, const FuzzShape &shape) : rng(seed), shape(shape) {}

  std::string run() {
    int nArrays = 1 + pick(shape.maxArrays);
    for (int i = 0; i < nArrays; ++i) {
      std::string name(1, static_cast<char>('a' + i));
      int len = chance(50) ? 8 : 16;
      arrays.push_back({name, len});
    }
    int nScalars = pick(shape.maxScalars + 1);
    for (int i = 0; i < nScalars; ++i) {
      std::string name(1, static_cast<char>('x' + i));
      scalars.insert(name);
    }

    std::ostringstream os;
    os << "kernel fuzzed(";
    bool first = true;
    for (const auto &s : scalars) {
      os << (first ? "" : ", ") << s << ":i32";
      first = false;
    }
    for (const auto &[name, len] : arrays) {
      os << (first ? "" : ", ") << name << ":i32[" << len << "]";
      first = false;
    }
    os << ") {\n";

    std::set<std::string> defined = scalars;
    genBlock(os, 1, 0, shape.maxStmtsPerBlock + pick(3), defined);

    if (chance(70) && !defined.empty()) {
      os << "  return " << genExpr(1, defined) << ";\n";
    }
    os << "}\n";
    return os.str();
  }

private:
  bool chance(int pct) { return static_cast<int>(rng() % 100) < pct; }
  int pick(int n) { return n <= 0 ? 0 : static_cast<int>(rng() % static_cast<uint64_t>(n)); }

  std::string indexExpr(const std::string &array, int len,
                        const std::set<std::string> &defined) {
    auto it = lastIndex.find(array);
    if (it != lastIndex.end() &&
        chance(static_cast<int>(shape.collisionBias * 100))) {
      // deliberate collision with an earlier access, but only when every
      // scalar the cached expression mentions is still in scope
      bool inScope = true;
      for (const auto &name : it->second.second)
        inScope &= defined.count(name) > 0;
      if (inScope) {
        exprNames.insert(it->second.second.begin(), it->second.second.end());
        return it->second.first;
      }
    }
    // track exactly the names this index expression mentions, nesting-safe
    std::set<std::string> saved = std::move(exprNames);
    exprNames.clear();
    std::string e =
        "(" + genExpr(1, defined) + ") & " + std::to_string(len - 1);
    lastIndex[array] = {e, exprNames};
    exprNames.insert(saved.begin(), saved.end());
    return e;
  }

  std::string genExpr(int depth, const std::set<std::string> &defined) {
    int r = pick(100);
    if (depth >= 3 || r < 25)
      return std::to_string(pick(16));
    if (r < 50 && !defined.empty()) {
      auto it = defined.begin();
      std::advance(it, pick(static_cast<int>(defined.size())));
      exprNames.insert(*it);
      return *it;
    }
    if (r < 65 && !arrays.empty()) {
      const auto &[name, len] = arrays[static_cast<size_t>(pick(
          static_cast<int>(arrays.size())))];
      return name + "[" + indexExpr(name, len, defined) + "]";
    }
    if (r < 70) {
      // guarded division; denominators never reach zero
      return "(" + genExpr(depth + 1, defined) + ") / ((" +
             genExpr(depth + 1, defined) + " & 7) + 1)";
    }
    if (r < 76) // comparison in value context
      return "(" + genExpr(depth + 1, defined) + " < " +
             genExpr(depth + 1, defined) + ")";
    static const char *ops[] = {"+", "-", "*", "&", "|", "^", ">>", "<<"};
    const char *op = ops[pick(8)];
    std::string rhs = genExpr(depth + 1, defined);
    if (std::string(op) == "<<" || std::string(op) == ">>")
      rhs = "(" + rhs + " & 3)";
    return "(" + genExpr(depth + 1, defined) + " " + op + " " + rhs + ")";
  }

  std::string condExpr(const std::set<std::string> &defined) {
    static const char *cmps[] = {"==", "!=", "<", ">", "<=", ">="};
    return genExpr(1, defined) + " " + cmps[pick(6)] + " " +
           genExpr(1, defined);
  }

  void pad(std::ostringstream &os, int indent) {
    for (int i = 0; i < indent; ++i)
      os << "  ";
  }

  void genBlock(std::ostringstream &os, int indent, int loopDepth, int budget,
                std::set<std::string> &defined) {
    for (int k = 0; k < budget; ++k) {
      int r = pick(100);
      if (r < 28 && !arrays.empty()) {
        // store; half of these are read-modify-write on the same address
        const auto &[name, len] = arrays[static_cast<size_t>(pick(
            static_cast<int>(arrays.size())))];
        std::string idx = indexExpr(name, len, defined);
        pad(os, indent);
        if (chance(50))
          os << name << "[" << idx << "] = " << name << "[" << idx << "] + "
             << genExpr(1, defined) << ";\n";
        else
          os << name << "[" << idx << "] = " << genExpr(1, defined) << ";\n";
      } else if (r < 58) {
        std::string target = "t" + std::to_string(nextTemp++);
        pad(os, indent);
        os << target << " = " << genExpr(0, defined) << ";\n";
        defined.insert(target);
      } else if (r < 73) {
        pad(os, indent);
        os << "if (" << condExpr(defined) << ") {\n";
        std::set<std::string> thenDef = defined;
        genBlock(os, indent + 1, loopDepth, 1 + pick(2), thenDef);
        pad(os, indent);
        if (chance(60)) {
          os << "} else {\n";
          std::set<std::string> elseDef = defined;
          genBlock(os, indent + 1, loopDepth, 1 + pick(2), elseDef);
          pad(os, indent);
          // variables assigned in both branches stay defined
          for (const auto &v : thenDef)
            if (elseDef.count(v))
              defined.insert(v);
        }
        os << "}\n";
      } else if (r < 90 && loopDepth < shape.maxLoopDepth) {
        std::string ctr = "i" + std::to_string(nextCounter++);
        int trip = 1 + pick(shape.maxTrip);
        pad(os, indent);
        os << ctr << " = 0;\n";
        pad(os, indent);
        os << "do {\n";
        std::set<std::string> bodyDef = defined;
        bodyDef.insert(ctr);
        activeCounters.insert(ctr);
        genBlock(os, indent + 1, loopDepth + 1, 1 + pick(3), bodyDef);
        activeCounters.erase(ctr);
        pad(os, indent + 1);
        os << ctr << " = " << ctr << " + 1;\n";
        pad(os, indent);
        os << "} while (" << ctr << " < " << trip << ");\n";
        defined.insert(ctr);
      } else if (!defined.empty()) {
        // reassign an existing scalar, but never an active loop counter
        std::vector<std::string> targets;
        for (const auto &v : defined)
          if (!activeCounters.count(v))
            targets.push_back(v);
        if (!targets.empty()) {
          pad(os, indent);
          os << targets[static_cast<size_t>(pick(
                    static_cast<int>(targets.size())))]
             << " = " << genExpr(0, defined) << ";\n";
        }
      }
    }
  }

  std::mt19937_64 rng;
  FuzzShape shape;
  std::vector<std::pair<std::string, int>> arrays;
  std::set<std::string> scalars;
  std::map<std::string, std::pair<std::string, std::set<std::string>>>
      lastIndex;
  std::set<std::string> exprNames;
  std::set<std::string> activeCounters;
  int nextCounter = 0;
  int nextTemp = 0;
};

} // namespace

std::string generateKernelSource(uint64_t seed, const FuzzShape &shape) {
  Gen gen(seed, shape);
  return gen.run();
}

std::vector<FuzzVerdict>
fuzzCampaign(const FuzzOptions &opts,
             const std::function<void(const FuzzVerdict &)> &onVerdict) {
  std::vector<FuzzVerdict> verdicts;
  std::vector<PipelineOptions> configs = opts.configs;
  if (configs.empty()) {
    PipelineOptions full;
    PipelineOptions noq;
    noq.addrQueues = false;
    PipelineOptions nobuf;
    nobuf.buffers = false;
    configs = {full, noq, nobuf};
  }

  for (int k = 0; k < opts.count; ++k) {
    FuzzVerdict v;
    v.kernelSeed = mix(opts.seed, static_cast<uint64_t>(k));
    v.kernelName = "fuzz-" + std::to_string(k);
    v.source = generateKernelSource(v.kernelSeed, opts.shape);
    try {
      Kernel kernel = parse(v.source);

      RunInputs inputs;
      for (const auto &p : kernel.params) {
        uint64_t ps = mix(v.kernelSeed, std::hash<std::string>{}(p.name));
        if (p.isArray)
          inputs.arrays[p.name] =
              seededFill(ps, static_cast<size_t>(p.length));
        else
          inputs.args[p.name] = static_cast<int32_t>(ps & 255);
      }

      RefResult ref = interpret(kernel, inputs.arrays, inputs.args);
      v.pass = true;
      for (const auto &cfg : configs) {
        SimOptions sopts;
        sopts.maxCycles = opts.maxCycles;
        sopts.configFingerprint = cfg.fingerprint();
        SimResult sim = runKernel(kernel, cfg, sopts, inputs);
        EquivReport rep = checkEquivalence(ref, sim);
        if (sim.trap.kind == TrapKind::Deadlock)
          v.deadlock = true;
        if (!rep.pass) {
          v.pass = false;
          v.config = cfg.fingerprint();
          v.divergence = rep.firstDivergence;
          break;
        }
      }
    } catch (const Error &e) {
      v.pass = false;
      v.divergence = std::string("pipeline error: ") + e.what();
    }
    if (onVerdict)
      onVerdict(v);
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

} // namespace elk
