#ifndef ELK_VALIDATE_HPP
#define ELK_VALIDATE_HPP

#include "elk/ir.hpp"

#include <string>
#include <vector>

namespace elk {

/// Violations are data, not failures: each names the offending node or
/// region and the rule it breaks.
struct Violation {
  std::string rule;
  int nodeId = -1;
  std::string detail;
};

std::string formatViolations(const std::vector<Violation> &vs);

/// Region-IR discipline: per-region acyclicity, boundary mapping rules of
/// gamma/theta, edge type agreement, no region-crossing edges, memory-op
/// port shapes, and one state chain through every pair of same-array ops.
std::vector<Violation> validateRvsdg(Graph &g);

/// Netlist discipline: only elastic node kinds, point-to-point edges
/// (exactly one user per output, one driver per input), kind port shapes,
/// and no combinational cycle: every directed cycle (with loop back edges
/// materialized) passes through an opaque element. Opaque elements are
/// opaque BUF/PRED-BUF/LOOP-BUF plus the registered state/data outputs of
/// memory operations.
std::vector<Violation> validateNetlist(Graph &g);

} // namespace elk

#endif
