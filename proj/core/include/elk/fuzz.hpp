#ifndef ELK_FUZZ_HPP
#define ELK_FUZZ_HPP

#include "elk/pipeline.hpp"

#include <functional>
#include <string>
#include <vector>

namespace elk {

struct FuzzShape {
  int maxArrays = 3;
  int maxScalars = 2;
  int maxLoopDepth = 2;
  int maxTrip = 6;
  int maxStmtsPerBlock = 5;
  double collisionBias = 0.30; // share of address expressions reused verbatim
};

struct FuzzOptions {
  uint64_t seed = 1;
  int count = 100;
  FuzzShape shape;
  // configurations to compare against the reference interpreter
  std::vector<PipelineOptions> configs;
  uint64_t maxCycles = 200'000;
};

struct FuzzVerdict {
  uint64_t kernelSeed = 0;
  std::string kernelName;
  bool pass = false;
  bool deadlock = false;
  std::string config;     // fingerprint of the failing configuration
  std::string divergence; // first divergence on FAIL
  std::string source;     // kernel text, for repro files
};

/// Generates a random well-formed kernel as source text. Loops are
/// bounded counter loops; address expressions are biased to collide.
std::string generateKernelSource(uint64_t seed, const FuzzShape &shape);

/// Differential campaign: every generated kernel runs through the
/// interpreter and each configuration's circuit; any inequivalence or
/// deadlock is a FAIL verdict carrying the reproducing seed.
std::vector<FuzzVerdict>
fuzzCampaign(const FuzzOptions &opts,
             const std::function<void(const FuzzVerdict &)> &onVerdict = {});

} // namespace elk

#endif
