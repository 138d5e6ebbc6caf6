#include "elk/equiv.hpp"

#include <sstream>

namespace elk {

EquivReport checkEquivalence(const RefResult &ref, const SimResult &sim) {
  EquivReport rep;
  std::ostringstream os;

  if (!ref.ok() || !sim.ok()) {
    if (ref.trap.kind == sim.trap.kind) {
      rep.pass = true;
      return rep;
    }
    os << "trap mismatch: reference=" << trapKindName(ref.trap.kind)
       << " circuit=" << trapKindName(sim.trap.kind);
    if (!sim.trap.detail.empty())
      os << " (" << sim.trap.detail << ")";
    rep.firstDivergence = os.str();
    return rep;
  }

  if (ref.returnValue.has_value() != sim.returnValue.has_value() ||
      (ref.returnValue && *ref.returnValue != *sim.returnValue)) {
    os << "return value: reference="
       << (ref.returnValue ? std::to_string(*ref.returnValue) : "none")
       << " circuit="
       << (sim.returnValue ? std::to_string(*sim.returnValue) : "none");
    rep.firstDivergence = os.str();
    return rep;
  }

  for (const auto &[array, mem] : ref.memories) {
    auto it = sim.memories.find(array);
    if (it == sim.memories.end()) {
      rep.firstDivergence = "memory '" + array + "' missing from circuit run";
      return rep;
    }
    for (size_t i = 0; i < mem.size(); ++i) {
      if (i >= it->second.size() || mem[i] != it->second[i]) {
        os << "memory '" << array << "'[" << i << "]: reference=" << mem[i]
           << " circuit="
           << (i < it->second.size() ? std::to_string(it->second[i]) : "?");
        rep.firstDivergence = os.str();
        return rep;
      }
    }
  }

  // Per-static-op event sequences; order across different ops is free.
  for (const auto &[opId, events] : ref.trace) {
    auto it = sim.trace.find(opId);
    size_t simCount = it == sim.trace.end() ? 0 : it->second.size();
    for (size_t i = 0; i < events.size(); ++i) {
      if (i >= simCount) {
        os << "op " << opId << " event " << i
           << ": missing from circuit trace (" << simCount << " of "
           << events.size() << " events)";
        rep.firstDivergence = os.str();
        return rep;
      }
      const MemEvent &a = events[i];
      const MemEvent &b = it->second[i];
      if (a.isWrite != b.isWrite || a.addr != b.addr || a.data != b.data) {
        os << "op " << opId << " event " << i << ": reference "
           << (a.isWrite ? "write" : "read") << " [" << a.addr
           << "]=" << a.data << " circuit " << (b.isWrite ? "write" : "read")
           << " [" << b.addr << "]=" << b.data;
        rep.firstDivergence = os.str();
        return rep;
      }
    }
    if (simCount > events.size()) {
      os << "op " << opId << ": circuit trace has " << simCount
         << " events, reference has " << events.size();
      rep.firstDivergence = os.str();
      return rep;
    }
  }
  for (const auto &[opId, events] : sim.trace) {
    if (!events.empty() && !ref.trace.count(opId)) {
      os << "op " << opId << ": circuit produced events, reference none";
      rep.firstDivergence = os.str();
      return rep;
    }
  }

  rep.pass = true;
  return rep;
}

} // namespace elk
