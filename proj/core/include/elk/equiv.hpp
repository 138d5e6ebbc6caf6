#ifndef ELK_EQUIV_HPP
#define ELK_EQUIV_HPP

#include "elk/interp.hpp"
#include "elk/sim.hpp"

#include <string>

namespace elk {

struct EquivReport {
  bool pass = false;
  std::string firstDivergence; // empty on PASS
};

/// PASS iff return values match, final memory contents match word for
/// word, and for every static memory-op id the ordered (address, data)
/// sequences are identical; cycle stamps are ignored. Two runs trapping
/// with the same trap kind also PASS.
EquivReport checkEquivalence(const RefResult &ref, const SimResult &sim);

} // namespace elk

#endif
