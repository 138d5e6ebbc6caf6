#ifndef ELK_JSON_IO_HPP
#define ELK_JSON_IO_HPP

#include "elk/ir.hpp"

#include <nlohmann/json.hpp>

namespace elk {

using Json = nlohmann::ordered_json;

/// Versioned graph serialization for golden snapshots:
///   {"version":1, "kind":"rvsdg"|"netlist", "nodes":[...], "edges":[...]}
/// Key order is fixed so equal graphs serialize byte-identically.
Json graphToJson(Graph &g, const std::string &kind);

} // namespace elk

#endif
