// elk - elastic kernel compiler and cycle-accurate circuit simulator.
//
// Subcommands: build, run, check, fuzz, bench, viz.
// Exit codes: 0 success, 1 usage/parse error, 2 validation error,
// 3 simulation trap, 4 equivalence failure.

#include "elk/dot.hpp"
#include "elk/equiv.hpp"
#include "elk/fuzz.hpp"
#include "elk/interp.hpp"
#include "elk/json_io.hpp"
#include "elk/parse.hpp"
#include "elk/pipeline.hpp"
#include "elk/validate.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace elk;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSimTrap = 3;
constexpr int kExitEquivalence = 4;

struct CommonFlags {
  bool noAddrq = false;
  bool noBuffers = false;
  uint32_t addrqCapacity = 0; // 0: default
  uint32_t fifoDepth = 4;
  uint32_t ctlFifoDepth = 16;
  uint64_t maxCycles = 1'000'000;
  uint32_t memLatency = 1;
  std::string inputsPath;
};

void addCommonFlags(CLI::App *cmd, CommonFlags &f, bool withSim = true) {
  cmd->add_flag("--no-addrq", f.noAddrq,
                "disable distributed address disambiguation (NoQ)");
  cmd->add_flag("--no-buffers", f.noBuffers, "disable buffer placement");
  cmd->add_option("--addrq-capacity", f.addrqCapacity,
                  "ADDR-Q capacity in entries (default 8)");
  cmd->add_option("--fifo-depth", f.fifoDepth,
                  "transparent FIFO depth on fork outputs");
  cmd->add_option("--ctl-fifo-depth", f.ctlFifoDepth,
                  "FIFO depth on control-type fork outputs");
  if (withSim) {
    cmd->add_option("--max-cycles", f.maxCycles, "simulation cycle budget");
    cmd->add_option("--mem-latency", f.memLatency,
                    "memory read latency in cycles");
    cmd->add_option("--inputs", f.inputsPath,
                    "memory/argument initialization JSON");
  }
}

PipelineOptions toPipelineOptions(const CommonFlags &f) {
  if (f.noAddrq && f.addrqCapacity != 0)
    throw CLI::ValidationError(
        "--addrq-capacity requires disambiguation enabled");
  PipelineOptions p;
  p.addrQueues = !f.noAddrq;
  if (f.addrqCapacity != 0)
    p.addrQueueCapacity = f.addrqCapacity;
  p.buffers = !f.noBuffers;
  p.bufferPolicy.forkFifoDepth = f.fifoDepth;
  p.bufferPolicy.controlForkFifoDepth = f.ctlFifoDepth;
  return p;
}

SimOptions toSimOptions(const CommonFlags &f, const PipelineOptions &p) {
  SimOptions s;
  s.maxCycles = f.maxCycles;
  s.memLatency = f.memLatency;
  s.configFingerprint = p.fingerprint();
  return s;
}

std::string readFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Kernel parseFile(const std::string &path) {
  try {
    return parse(readFile(path));
  } catch (const Error &e) {
    std::cerr << formatDiag(path, e) << "\n";
    std::exit(kExitUsage);
  }
}

RunInputs loadInputs(const CommonFlags &f, const Kernel &k) {
  RunInputs inputs;
  if (f.inputsPath.empty())
    return inputs;
  Json j = Json::parse(readFile(f.inputsPath));
  return parseInputs(j, k);
}

Json statsJson(const SimResult &res) {
  Json j;
  j["cycles"] = res.stats.cycles;
  if (res.returnValue)
    j["return"] = *res.returnValue;
  j["node_counts"] = res.stats.nodeCounts;
  j["buffer_slots"] = res.stats.bufferSlots;
  j["peak_occupancy"] = res.stats.peakOccupancy;
  j["config"] = res.stats.configFingerprint;
  return j;
}

void writeTrace(const std::string &path, const MemTrace &trace) {
  std::ofstream out(path, std::ios::binary);
  std::vector<std::pair<uint64_t, Json>> lines;
  for (const auto &[op, events] : trace)
    for (const auto &e : events) {
      Json j;
      j["op"] = op;
      j["kind"] = e.isWrite ? "write" : "read";
      j["addr"] = e.addr;
      j["data"] = e.data;
      j["cycle"] = e.cycle;
      lines.push_back({e.cycle, j});
    }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const auto &a, const auto &b) { return a.first < b.first; });
  for (const auto &[c, j] : lines)
    out << j.dump() << "\n";
}

int exitForTrap(const Trap &t) {
  return t.kind == TrapKind::None ? 0 : kExitSimTrap;
}

// --- build -------------------------------------------------------------------

int cmdBuild(const std::string &input, const CommonFlags &flags,
             const std::string &stopAfter, const std::string &emit,
             const std::string &outDir) {
  Kernel k = parseFile(input);
  Stage upTo = Stage::PlaceBuffers;
  if (!stopAfter.empty()) {
    auto s = stageFromName(stopAfter);
    if (!s) {
      std::cerr << "unknown stage '" << stopAfter << "'\n";
      return kExitUsage;
    }
    upTo = *s;
  }
  PipelineOptions popts = toPipelineOptions(flags);
  Graph g = compile(k, popts, upTo);

  fs::path dir = outDir.empty() ? fs::path(".") : fs::path(outDir);
  fs::create_directories(dir);
  std::string base = fs::path(input).stem().string();
  std::string kind = stageIsRvsdg(upTo) ? "rvsdg" : "netlist";

  if (emit == "json" || emit == "both") {
    fs::path p = dir / (base + "." + kind + ".json");
    std::ofstream(p) << graphToJson(g, kind).dump(2) << "\n";
    std::cout << p.string() << "\n";
  }
  if (emit == "dot" || emit == "both") {
    fs::path p = dir / (base + "." + kind + ".dot");
    std::ofstream(p) << dotExport(g);
    std::cout << p.string() << "\n";
  }
  return 0;
}

// --- run ---------------------------------------------------------------------

int cmdRun(const std::string &input, const CommonFlags &flags,
           const std::string &tracePath) {
  Kernel k = parseFile(input);
  PipelineOptions popts = toPipelineOptions(flags);
  RunInputs inputs = loadInputs(flags, k);
  SimResult res = runKernel(k, popts, toSimOptions(flags, popts), inputs);

  if (!res.ok()) {
    std::cerr << "trap: " << trapKindName(res.trap.kind);
    if (!res.trap.detail.empty())
      std::cerr << " (" << res.trap.detail << ")";
    std::cerr << "\n";
    for (const auto &s : res.stalledNodes)
      std::cerr << "  stalled: " << s << "\n";
    return kExitSimTrap;
  }
  std::cout << "cycles=" << res.stats.cycles;
  if (res.returnValue)
    std::cout << " return=" << *res.returnValue;
  std::cout << "\n" << statsJson(res).dump() << "\n";
  if (!tracePath.empty())
    writeTrace(tracePath, res.trace);
  return 0;
}

// --- check -------------------------------------------------------------------

int cmdCheck(const std::string &input, const CommonFlags &flags,
             bool allConfigs) {
  Kernel k = parseFile(input);
  RunInputs inputs = loadInputs(flags, k);
  RefResult ref = interpret(k, inputs.arrays, inputs.args);

  std::vector<PipelineOptions> configs;
  if (allConfigs) {
    for (bool buffers : {true, false})
      for (bool addrq : {true, false}) {
        PipelineOptions p = toPipelineOptions(flags);
        p.buffers = buffers;
        p.addrQueues = addrq;
        configs.push_back(p);
      }
  } else {
    configs.push_back(toPipelineOptions(flags));
  }

  bool allPass = true;
  for (const auto &p : configs) {
    SimOptions sopts = toSimOptions(flags, p);
    SimResult sim = runKernel(k, p, sopts, inputs);
    EquivReport rep = checkEquivalence(ref, sim);
    Json j;
    j["config"] = p.fingerprint();
    j["addrq"] = p.addrQueues;
    j["buffers"] = p.buffers;
    j["verdict"] = rep.pass ? "PASS" : "FAIL";
    j["cycles"] = sim.stats.cycles;
    if (!rep.pass)
      j["divergence"] = rep.firstDivergence;
    std::cout << j.dump() << "\n";
    allPass &= rep.pass;
  }
  return allPass ? 0 : kExitEquivalence;
}

// --- fuzz --------------------------------------------------------------------

int cmdFuzz(uint64_t seed, int count, const std::string &outDir,
            bool fullOnly, uint64_t maxCycles) {
  FuzzOptions opts;
  opts.seed = seed;
  opts.count = count;
  opts.maxCycles = maxCycles;
  if (fullOnly)
    opts.configs = {PipelineOptions{}};

  int fails = 0;
  fuzzCampaign(opts, [&](const FuzzVerdict &v) {
    Json j;
    j["kernel"] = v.kernelName;
    j["seed"] = v.kernelSeed;
    j["verdict"] = v.pass ? "PASS" : "FAIL";
    if (!v.pass) {
      j["config"] = v.config;
      j["divergence"] = v.divergence;
      ++fails;
      fs::path dir = outDir.empty() ? fs::path(".") : fs::path(outDir);
      fs::create_directories(dir);
      fs::path p = dir / (v.kernelName + ".rk");
      std::ofstream out(p);
      out << "// repro seed " << v.kernelSeed << "\n" << v.source;
      j["repro"] = p.string();
    }
    std::cout << j.dump() << "\n";
  });
  return fails == 0 ? 0 : kExitEquivalence;
}

// --- bench -------------------------------------------------------------------

int cmdBench(const std::string &corpusDir, const CommonFlags &flags,
             const std::string &csvPath) {
  std::vector<fs::path> kernels;
  for (const auto &e : fs::directory_iterator(corpusDir))
    if (e.path().extension() == ".rk")
      kernels.push_back(e.path());
  std::sort(kernels.begin(), kernels.end());

  std::ostringstream csv;
  csv << "kernel,cycles_full,cycles_noq,ratio\n";
  double logSum = 0;
  int ok = 0;

  std::cout << "kernel            full      NoQ    ratio\n";
  for (const auto &path : kernels) {
    std::string name = path.stem().string();
    try {
      Kernel k = parse(readFile(path.string()));
      CommonFlags kf = flags;
      fs::path inputs = path;
      inputs.replace_extension(".inputs.json");
      if (fs::exists(inputs))
        kf.inputsPath = inputs.string();
      RunInputs in = loadInputs(kf, k);

      PipelineOptions full = toPipelineOptions(kf);
      PipelineOptions noq = full;
      noq.addrQueues = false;

      SimResult rFull = runKernel(k, full, toSimOptions(kf, full), in);
      SimResult rNoq = runKernel(k, noq, toSimOptions(kf, noq), in);
      if (!rFull.ok() || !rNoq.ok())
        throw Error(std::string("trap: ") +
                    trapKindName((!rFull.ok() ? rFull : rNoq).trap.kind));

      double ratio = static_cast<double>(rFull.stats.cycles) /
                     static_cast<double>(rNoq.stats.cycles);
      logSum += std::log(ratio);
      ++ok;
      csv << name << "," << rFull.stats.cycles << "," << rNoq.stats.cycles
          << "," << ratio << "\n";
      printf("%-14s %8llu %8llu   %.3f\n", name.c_str(),
             static_cast<unsigned long long>(rFull.stats.cycles),
             static_cast<unsigned long long>(rNoq.stats.cycles), ratio);
    } catch (const Error &e) {
      csv << name << ",FAILED,FAILED,\n";
      printf("%-14s FAILED (%s)\n", name.c_str(), e.what());
    }
  }
  if (ok > 0) {
    double geomean = std::exp(logSum / ok);
    printf("geomean ratio (full/NoQ): %.3f over %d kernels\n", geomean, ok);
    csv << "geomean,,," << geomean << "\n";
  }
  if (!csvPath.empty())
    std::ofstream(csvPath) << csv.str();
  return 0;
}

// --- viz ---------------------------------------------------------------------

int cmdViz(const std::string &input, const CommonFlags &flags,
           const std::string &stage) {
  Kernel k = parseFile(input);
  Stage upTo = Stage::PlaceBuffers;
  if (!stage.empty()) {
    auto s = stageFromName(stage);
    if (!s) {
      std::cerr << "unknown stage '" << stage << "'\n";
      return kExitUsage;
    }
    upTo = *s;
  }
  Graph g = compile(k, toPipelineOptions(flags), upTo);
  std::cout << dotExport(g);
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"elastic kernel compiler and circuit simulator"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string input, outDir, stopAfter, tracePath, csvPath, stage;
  std::string emit = "json";
  bool allConfigs = false;
  uint64_t fuzzSeed = 1;
  int fuzzCount = 100;
  bool fullOnly = false;
  uint64_t fuzzMaxCycles = 200'000;
  std::string corpusDir;

  CLI::App *build = app.add_subcommand("build", "compile a kernel to a netlist");
  build->add_option("input", input, "kernel source (.rk)")->required();
  build->add_option("--stop-after", stopAfter, "stop after a pipeline stage");
  build->add_option("--emit", emit, "json|dot|both")->default_val("json");
  build->add_option("-o,--out-dir", outDir, "output directory");
  addCommonFlags(build, flags, /*withSim=*/false);

  CLI::App *run = app.add_subcommand("run", "simulate a kernel");
  run->add_option("input", input, "kernel source (.rk)")->required();
  run->add_option("--dump-trace", tracePath, "write memory trace JSONL");
  addCommonFlags(run, flags);

  CLI::App *check =
      app.add_subcommand("check", "interpreter vs circuit equivalence");
  check->add_option("input", input, "kernel source (.rk)")->required();
  check->add_flag("--all-configs", allConfigs,
                  "check all four {buffers}x{addrq} configurations");
  addCommonFlags(check, flags);

  CLI::App *fuzz = app.add_subcommand("fuzz", "randomized differential testing");
  fuzz->add_option("--seed", fuzzSeed, "campaign seed");
  fuzz->add_option("--count", fuzzCount, "number of kernels");
  fuzz->add_option("--out-dir", outDir, "directory for .rk repro files");
  fuzz->add_flag("--full-only", fullOnly, "only the full configuration");
  fuzz->add_option("--max-cycles", fuzzMaxCycles, "per-kernel cycle budget");

  CLI::App *bench = app.add_subcommand("bench", "NoQ vs full corpus table");
  bench->add_option("corpus", corpusDir, "directory of .rk kernels")
      ->required();
  bench->add_option("--csv", csvPath, "write machine-readable CSV");
  addCommonFlags(bench, flags);

  CLI::App *viz = app.add_subcommand("viz", "Graphviz DOT to stdout");
  viz->add_option("input", input, "kernel source (.rk)")->required();
  viz->add_option("--stage", stage, "pipeline stage to render");
  addCommonFlags(viz, flags, /*withSim=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed())
      return cmdBuild(input, flags, stopAfter, emit, outDir);
    if (run->parsed())
      return cmdRun(input, flags, tracePath);
    if (check->parsed())
      return cmdCheck(input, flags, allConfigs);
    if (fuzz->parsed())
      return cmdFuzz(fuzzSeed, fuzzCount, outDir, fullOnly, fuzzMaxCycles);
    if (bench->parsed())
      return cmdBench(corpusDir, flags, csvPath);
    if (viz->parsed())
      return cmdViz(input, flags, stage);
  } catch (const CLI::ValidationError &e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    std::string what = e.what();
    return what.find("validation failed") != std::string::npos
               ? kExitValidation
               : kExitSimTrap;
  }
  return kExitUsage;
}
