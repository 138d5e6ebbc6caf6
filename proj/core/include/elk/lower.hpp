#ifndef ELK_LOWER_HPP
#define ELK_LOWER_HPP

#include "elk/ir.hpp"

#include <map>

namespace elk {

enum class GammaForm { Speculative, Guarded };

struct LowerStats {
  // gamma node id -> chosen lowering form (pass metadata for tests)
  std::map<int, GammaForm> gammaForms;
};

/// Flattens every gamma into its parent region, innermost first. A gamma
/// with no state edge through it and no theta in a subregion lowers to the
/// speculative form (inputs wired into all subregions, DMUX per output);
/// any other gamma lowers to the guarded form (BRANCH per input, NDMUX per
/// output).
void lowerGammas(Graph &g, LowerStats *stats = nullptr);

/// Converts every theta into a Loop node, innermost first. The loop body
/// is kept as a subregion; per modified variable an entry NDMUX (selected
/// by the PRED-BUF token stream), an exit BRANCH (selected by the raw
/// predicate) and an opaque back-edge BUF are created. Invariant variables
/// become LOOP-BUFs reloaded on termination tokens; their loop outputs are
/// dropped and consumers use the loop input's source directly.
void lowerThetas(Graph &g);

/// Creates one MEM-REQ/MEM-RESP pair per touched array and rewires every
/// load and store to them. Stores get no response wire; they are finished
/// the cycle after acceptance.
void lowerMemoryPorts(Graph &g);

/// Dissolves the lambda shell into argument sources and result observers,
/// deletes dead constant sources, then inserts FORK nodes on multi-user
/// outputs and SINK nodes on unused outputs until every edge is
/// point-to-point.
void enforcePointToPoint(Graph &g);

} // namespace elk

#endif
