#ifndef ELK_DOT_HPP
#define ELK_DOT_HPP

#include "elk/ir.hpp"

#include <string>

namespace elk {

struct DotOptions {
  bool showIds = true;
  bool showPortTypes = false;
};

/// Graphviz text for either graph form. Regions render as clusters; edge
/// style encodes the payload kind (solid black: value, blue: control,
/// dashed red: memory state, orange/green: memory request/response).
std::string dotExport(Graph &g, const DotOptions &opts = {});

} // namespace elk

#endif
