#ifndef ELK_BUILD_HPP
#define ELK_BUILD_HPP

#include "elk/ast.hpp"
#include "elk/ir.hpp"

namespace elk {

/// AST -> region IR. Produces a single Lambda whose body region holds the
/// dataflow graph: if/else become Gamma nodes, do-while become Theta nodes,
/// scalars are SSA-converted, and all memory operations are sequentialized
/// on one global memory-state chain in program order.
Graph buildRvsdg(const Kernel &k);

/// Splits the single global state chain into one independent chain per
/// array. Distinct array parameters never alias (type-based separation);
/// within one array, program order is preserved. No-op for graphs with
/// fewer than two touched arrays, other than labeling the chain.
void separateStateEdges(Graph &g);

// Port-removal surgery shared by passes. All stored edge references are
// re-indexed; the removed port must already be disconnected (no users, no
// origin).
void removeInput(Graph &g, Node *n, int k);
void removeOutput(Graph &g, Node *n, int k);
void removeArgument(Graph &g, Region *r, int k);
void removeResult(Graph &g, Region *r, int k);

// The lambda node of a built graph.
Node *findLambda(Graph &g);

} // namespace elk

#endif
