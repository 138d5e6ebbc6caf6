#include "elk/dot.hpp"

#include <map>
#include <sstream>

namespace elk {

namespace {

std::string nodeLabel(Node *n, const DotOptions &opts) {
  std::ostringstream os;
  switch (n->kind) {
  case NodeKind::Constant:
    os << n->value;
    break;
  case NodeKind::Binary:
    os << binaryOpName(n->binOp);
    break;
  case NodeKind::Compare:
    os << cmpOpName(n->cmpOp);
    break;
  case NodeKind::Load:
  case NodeKind::Store:
    os << nodeKindName(n->kind) << " " << n->array << "#" << n->memOpId;
    break;
  case NodeKind::MemReq:
  case NodeKind::MemResp:
    os << nodeKindName(n->kind) << " " << n->array;
    break;
  case NodeKind::Buf:
    os << (n->opaque ? "BUF" : "FIFO") << "(" << n->capacity << ")";
    break;
  case NodeKind::AddrQueue:
    os << "ADDR-Q(" << n->capacity << ")";
    break;
  case NodeKind::StateGate:
    os << sgRoleName(n->sgRole);
    break;
  case NodeKind::Fork:
    os << "FORK(" << n->outputs.size() << ")";
    break;
  case NodeKind::Source:
    os << (n->argName.empty() ? "SOURCE" : "ARG " + n->argName);
    break;
  case NodeKind::Observer:
    os << (n->observerRole == ObserverRole::Result ? "RESULT"
                                                   : "STATE " + n->argName);
    break;
  default:
    os << nodeKindName(n->kind);
    break;
  }
  if (opts.showIds)
    os << " [" << n->id << "]";
  return os.str();
}

const char *edgeStyle(TypeKind k) {
  switch (k) {
  case TypeKind::Value:
    return "color=black";
  case TypeKind::Control:
    return "color=blue";
  case TypeKind::MemState:
    return "color=red, style=dashed";
  case TypeKind::MemRequest:
    return "color=orange";
  case TypeKind::MemResponse:
    return "color=darkgreen";
  }
  return "color=black";
}

std::string escapeLabel(const std::string &s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\')
      out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

class DotWriter {
public:
  DotWriter(Graph &g, const DotOptions &opts) : g(g), opts(opts) {}

  std::string run() {
    os << "digraph G {\n";
    os << "  node [shape=box, fontname=\"monospace\"];\n";
    emitRegion(g.root(), "r");
    emitEdges(g.root());
    os << "}\n";
    return os.str();
  }

private:
  std::string argName(Region *r, int i) {
    return "a" + regionIds[r] + "_" + std::to_string(i);
  }
  std::string resName(Region *r, int i) {
    return "q" + regionIds[r] + "_" + std::to_string(i);
  }

  void emitRegion(Region &r, const std::string &rid) {
    regionIds[&r] = rid;
    for (size_t i = 0; i < r.arguments.size(); ++i) {
      const ArgBind &b = r.arguments[i].bind;
      std::string label = "arg" + std::to_string(i);
      if (!b.name.empty())
        label += " (" + b.name + ")";
      else if (b.kind == ArgBind::Kind::LoopBackedge)
        label += " (back " + std::to_string(b.index) + ")";
      else if (b.kind == ArgBind::Kind::LoopInput)
        label += " (in " + std::to_string(b.index) + ")";
      os << "  " << argName(&r, static_cast<int>(i)) << " [label=\""
         << escapeLabel(label) << "\", shape=ellipse];\n";
    }
    for (const auto &np : r.nodes) {
      Node *n = np.get();
      if (n->regions.empty()) {
        os << "  n" << n->id << " [label=\"" << escapeLabel(nodeLabel(n, opts))
           << "\"];\n";
      } else {
        for (size_t k = 0; k < n->regions.size(); ++k) {
          os << "  subgraph cluster_n" << n->id << "_" << k << " {\n";
          os << "  label=\"" << escapeLabel(nodeLabel(n, opts));
          if (n->regions.size() > 1)
            os << " region " << k;
          os << "\";\n";
          emitRegion(*n->regions[k], rid + "_" + std::to_string(n->id) + "_" +
                                         std::to_string(k));
          os << "  }\n";
        }
      }
    }
    for (size_t i = 0; i < r.results.size(); ++i) {
      const ResBind &b = r.results[i].bind;
      std::string label = "res" + std::to_string(i);
      if (b.kind == ResBind::Kind::ReturnValue)
        label += " (return)";
      else if (!b.name.empty())
        label += " (" + b.name + ")";
      else if (b.kind == ResBind::Kind::LoopBackedge)
        label += " (back " + std::to_string(b.index) + ")";
      else if (b.kind == ResBind::Kind::LoopOutput)
        label += " (out " + std::to_string(b.index) + ")";
      os << "  " << resName(&r, static_cast<int>(i)) << " [label=\""
         << escapeLabel(label) << "\", shape=ellipse];\n";
    }
  }

  std::string originNode(const OriginRef &o) {
    if (o.node)
      return "n" + std::to_string(o.node->id);
    return argName(o.region, o.index);
  }

  void emitEdge(const OriginRef &o, const std::string &dst, PortType t) {
    os << "  " << originNode(o) << " -> " << dst << " [" << edgeStyle(t.kind);
    if (opts.showPortTypes)
      os << ", label=\"" << portTypeName(t) << "\"";
    os << "];\n";
  }

  void emitEdges(Region &r) {
    for (const auto &np : r.nodes) {
      Node *n = np.get();
      for (size_t i = 0; i < n->inputs.size(); ++i)
        if (n->inputs[i].origin.valid())
          emitEdge(n->inputs[i].origin, "n" + std::to_string(n->id),
                   n->inputs[i].type);
      for (auto &sub : n->regions)
        emitEdges(*sub);
    }
    for (size_t i = 0; i < r.results.size(); ++i)
      if (r.results[i].origin.valid())
        emitEdge(r.results[i].origin, resName(&r, static_cast<int>(i)),
                 r.results[i].type);
  }

  Graph &g;
  DotOptions opts;
  std::ostringstream os;
  std::map<Region *, std::string> regionIds;
};

} // namespace

std::string dotExport(Graph &g, const DotOptions &opts) {
  DotWriter w(g, opts);
  return w.run();
}

} // namespace elk
