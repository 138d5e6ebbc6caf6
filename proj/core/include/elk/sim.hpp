#ifndef ELK_SIM_HPP
#define ELK_SIM_HPP

#include "elk/interp.hpp" // MemEvent, MemTrace, Trap
#include "elk/ir.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace elk {

/// Inlines every Loop region into its parent, materializing the implicit
/// back edges as real cyclic channels. Only primitive kinds remain. Throws
/// on residual structural nodes other than Loop.
void flatten(Graph &g);

struct SimOptions {
  uint64_t maxCycles = 1'000'000;
  uint32_t memLatency = 1;
  uint32_t memPortsPerCycle = 2; // dual-ported memory
  std::string configFingerprint;
};

struct SimStats {
  uint64_t cycles = 0;
  std::map<std::string, int> nodeCounts;
  int bufferSlots = 0;
  uint64_t peakOccupancy = 0;
  std::string configFingerprint;
};

struct SimResult {
  Trap trap;
  std::optional<int32_t> returnValue;
  std::map<std::string, std::vector<int32_t>> memories;
  MemTrace trace;
  SimStats stats;
  std::vector<std::string> stalledNodes; // deadlock diagnosis
  bool ok() const { return trap.kind == TrapKind::None; }
};

/// Deterministic two-phase cycle engine over a flattened netlist: a
/// combinational fixpoint propagates valid/ready/payload through
/// transparent components, then the sequential phase latches buffers,
/// commits memory grants and queue updates. Exposes single-cycle stepping
/// for scripted tests and debugging.
class SimEngine {
public:
  SimEngine(Graph &g, const SimOptions &opts,
            const std::map<std::string, std::vector<int32_t>> &arrays,
            const std::map<std::string, int32_t> &args);
  ~SimEngine();

  /// Advances exactly one cycle. Returns false once the run has finished
  /// (completed or trapped).
  bool step();

  bool finished() const;
  uint64_t cycle() const;
  SimResult takeResult();

  // Debug snapshots.
  int channelCount() const;
  int occupiedChannels() const; // channels offering a token right now
  struct NodeProbe {
    bool exists = false;
    bool full = false;   // buffer/latch occupancy
    int32_t value = 0;   // buffered payload
    size_t queueSize = 0;
  };
  NodeProbe probeNode(int nodeId) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl;
};

/// Runs a flattened netlist to completion.
SimResult simulate(Graph &g, const SimOptions &opts,
                   const std::map<std::string, std::vector<int32_t>> &arrays,
                   const std::map<std::string, int32_t> &args);

} // namespace elk

#endif
