#include "elk/json_io.hpp"

#include <map>

namespace elk {

namespace {

const char *argBindName(ArgBind::Kind k) {
  switch (k) {
  case ArgBind::Kind::None: return "none";
  case ArgBind::Kind::ScalarArg: return "scalar";
  case ArgBind::Kind::ArrayState: return "array-state";
  case ArgBind::Kind::LoopInput: return "loop-input";
  case ArgBind::Kind::LoopBackedge: return "backedge";
  }
  return "?";
}

const char *resBindName(ResBind::Kind k) {
  switch (k) {
  case ResBind::Kind::None: return "none";
  case ResBind::Kind::ReturnValue: return "return";
  case ResBind::Kind::ArrayState: return "array-state";
  case ResBind::Kind::LoopOutput: return "loop-output";
  case ResBind::Kind::LoopBackedge: return "backedge";
  }
  return "?";
}

class JsonWriter {
public:
  explicit JsonWriter(Graph &g) : g(g) {}

  Json run(const std::string &kind) {
    Json j;
    j["version"] = 1;
    j["kind"] = kind;
    j["kernel"] = g.kernelName;
    collectRegion(g.root(), "0");
    j["regions"] = regions;
    j["nodes"] = nodes;
    j["edges"] = edges;
    return j;
  }

private:
  Json typeJson(const PortType &t) { return portTypeName(t); }

  Json originJson(const OriginRef &o) {
    Json j;
    if (o.node) {
      j["node"] = o.node->id;
      j["port"] = o.index;
    } else {
      j["region"] = regionIds.at(o.region);
      j["arg"] = o.index;
    }
    return j;
  }

  void collectRegion(Region &r, const std::string &rid) {
    regionIds[&r] = rid;
    Json jr;
    jr["id"] = rid;
    jr["owner"] = r.owner ? Json(r.owner->id) : Json(nullptr);
    jr["index"] = r.indexInOwner;
    Json args = Json::array();
    for (const auto &a : r.arguments) {
      Json ja;
      ja["type"] = typeJson(a.type);
      if (a.bind.kind != ArgBind::Kind::None) {
        ja["bind"] = argBindName(a.bind.kind);
        if (!a.bind.name.empty())
          ja["name"] = a.bind.name;
        if (a.bind.index >= 0)
          ja["ref"] = a.bind.index;
      }
      args.push_back(ja);
    }
    jr["arguments"] = args;
    regions.push_back(jr);

    for (const auto &np : r.nodes) {
      Node *n = np.get();
      Json jn;
      jn["id"] = n->id;
      jn["kind"] = nodeKindName(n->kind);
      jn["region"] = rid;
      switch (n->kind) {
      case NodeKind::Constant:
        jn["value"] = n->value;
        break;
      case NodeKind::Binary:
        jn["op"] = binaryOpName(n->binOp);
        break;
      case NodeKind::Compare:
        jn["op"] = cmpOpName(n->cmpOp);
        break;
      case NodeKind::Load:
      case NodeKind::Store:
        jn["array"] = n->array;
        jn["memop"] = n->memOpId;
        break;
      case NodeKind::MemReq:
      case NodeKind::MemResp:
        jn["array"] = n->array;
        break;
      case NodeKind::Buf:
        jn["capacity"] = n->capacity;
        jn["opaque"] = n->opaque;
        break;
      case NodeKind::AddrQueue:
        jn["capacity"] = n->capacity;
        jn["store"] = n->pairedStore;
        jn["load"] = n->pairedLoad;
        break;
      case NodeKind::StateGate:
        jn["role"] = sgRoleName(n->sgRole);
        break;
      case NodeKind::Source:
        if (!n->argName.empty())
          jn["name"] = n->argName;
        break;
      case NodeKind::Observer:
        jn["role"] = n->observerRole == ObserverRole::Result ? "result"
                                                             : "array-state";
        if (!n->argName.empty())
          jn["name"] = n->argName;
        break;
      default:
        break;
      }
      nodes.push_back(jn);
      for (size_t k = 0; k < n->regions.size(); ++k)
        collectRegion(*n->regions[k],
                      rid + "." + std::to_string(n->id) + "." + std::to_string(k));
    }

    // edges: node inputs then region results, in port order
    for (const auto &np : r.nodes) {
      Node *n = np.get();
      for (size_t i = 0; i < n->inputs.size(); ++i) {
        if (!n->inputs[i].origin.valid())
          continue;
        Json je;
        je["from"] = originJson(n->inputs[i].origin);
        je["to"] = Json{{"node", n->id}, {"port", i}};
        je["type"] = typeJson(n->inputs[i].type);
        edges.push_back(je);
      }
    }
    for (size_t i = 0; i < r.results.size(); ++i) {
      const Result &res = r.results[i];
      if (!res.origin.valid())
        continue;
      Json je;
      je["from"] = originJson(res.origin);
      Json to;
      to["region"] = rid;
      to["res"] = i;
      if (res.bind.kind != ResBind::Kind::None) {
        to["bind"] = resBindName(res.bind.kind);
        if (!res.bind.name.empty())
          to["name"] = res.bind.name;
        if (res.bind.index >= 0)
          to["ref"] = res.bind.index;
      }
      je["to"] = to;
      je["type"] = typeJson(res.type);
      edges.push_back(je);
    }
  }

  Graph &g;
  std::map<Region *, std::string> regionIds;
  Json regions = Json::array();
  Json nodes = Json::array();
  Json edges = Json::array();
};

} // namespace

Json graphToJson(Graph &g, const std::string &kind) {
  JsonWriter w(g);
  return w.run(kind);
}

} // namespace elk
