#ifndef ELK_BUFFERS_HPP
#define ELK_BUFFERS_HPP

#include "elk/ir.hpp"

namespace elk {

struct BufferPolicy {
  uint32_t forkFifoDepth = 4;
  uint32_t controlForkFifoDepth = 16;
  bool multiplierBuffering = true;
  bool loopOutputBuffering = true;
  bool backedgeElision = true;
};

/// Buffer placement heuristics on the point-to-point netlist, in order:
/// 1. removes the opaque back-edge BUF when the back-edge value traces
///    through only FORK/SG nodes to a memory operation's state output (the
///    memory op's registered state output keeps the cycle broken),
/// 2. places an opaque BUF after every multiplier without a constant
///    operand and after every outer-loop output,
/// 3. places a transparent FIFO on every fork output, deeper for control
///    forks.
/// No buffer is inserted on an edge that reaches a memory request address
/// or data port without passing a stateful node, nor on edges feeding an
/// ADDR-Q port (their timing is part of the disambiguation contract).
void placeBuffers(Graph &g, const BufferPolicy &policy = {});

} // namespace elk

#endif
