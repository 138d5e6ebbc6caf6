#ifndef ELK_PIPELINE_HPP
#define ELK_PIPELINE_HPP

#include "elk/ast.hpp"
#include "elk/buffers.hpp"
#include "elk/disambig.hpp"
#include "elk/ir.hpp"
#include "elk/json_io.hpp"
#include "elk/lower.hpp"
#include "elk/sim.hpp"

#include <optional>
#include <string>

namespace elk {

enum class Stage {
  Parse,
  BuildRvsdg,
  SeparateState,
  LowerGamma,
  LowerTheta,
  LowerMemory,
  Disambiguate,
  PointToPoint,
  PlaceBuffers,
  Flatten,
};

const char *stageName(Stage s);
std::optional<Stage> stageFromName(const std::string &name);

/// True for stages whose output is still the region IR.
bool stageIsRvsdg(Stage s);

struct PipelineOptions {
  bool addrQueues = true; // false: the NoQ configuration
  uint32_t addrQueueCapacity = 8;
  bool buffers = true;
  BufferPolicy bufferPolicy;
  SgRole omitRole = SgRole::None; // mutation testing hook

  std::string fingerprint() const;
};

/// Runs the fixed pass pipeline up to and including `upTo`. Throws
/// elk::Error on validation failures between stages.
Graph compile(const Kernel &k, const PipelineOptions &opts,
              Stage upTo = Stage::Flatten, LowerStats *stats = nullptr);

/// Memory/argument initialization, read from the sidecar JSON:
///   {"args":{...}, "arrays":{"a":[...] | {"fill":v} | {"seed":s}}}
struct RunInputs {
  std::map<std::string, int32_t> args;
  std::map<std::string, std::vector<int32_t>> arrays;
};

RunInputs parseInputs(const Json &j, const Kernel &k);

/// Deterministic array fill used by the {"seed":s} form and the fuzzer.
std::vector<int32_t> seededFill(uint64_t seed, size_t n, int32_t mask = 255);

/// compile + flatten + simulate in one go.
SimResult runKernel(const Kernel &k, const PipelineOptions &popts,
                    SimOptions sopts, const RunInputs &inputs);

} // namespace elk

#endif
