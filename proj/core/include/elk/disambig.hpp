#ifndef ELK_DISAMBIG_HPP
#define ELK_DISAMBIG_HPP

#include "elk/ir.hpp"

namespace elk {

struct DisambigOptions {
  uint32_t addrQueueCapacity = 8;
  // Test hook: wire the disambiguation with one gate role left out. Each
  // role is load-bearing; removing any must break equivalence somewhere.
  SgRole omitRole = SgRole::None;
};

/// Duplicates the state chain of `array` through one outer loop: the
/// original chain keeps ordering data access (stores stay, loads are
/// replaced by SG4 gates triggered by the load data), the new chain orders
/// address generation (stores become SG1, loads become consecutive SG2 and
/// SG3 gates spliced into the load address path). The chain is split
/// before the loop and merged after it. Returns false when the loop
/// contains no store-load pair on the array (nothing to do).
bool duplicateStateEdge(Graph &g, Node *outerLoop, const std::string &array,
                        const DisambigOptions &opts = {});

/// Runs the full distributed disambiguation pass: for every array and
/// every outer loop with at least one store-load pair on that array,
/// duplicates the chain and places one ADDR-Q per pair on the load address
/// path between its SG2 and SG3, with enqueue wired from SG1's address
/// output and dequeue from the store's state output.
void insertAddrQueues(Graph &g, const DisambigOptions &opts = {});

} // namespace elk

#endif
