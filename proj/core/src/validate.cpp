#include "elk/validate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace elk {

std::string formatViolations(const std::vector<Violation> &vs) {
  std::ostringstream os;
  for (const auto &v : vs) {
    os << v.rule;
    if (v.nodeId >= 0)
      os << " (node " << v.nodeId << ")";
    if (!v.detail.empty())
      os << ": " << v.detail;
    os << "\n";
  }
  return os.str();
}

namespace {

bool isSourceKind(NodeKind k) {
  switch (k) {
  case NodeKind::Constant:
  case NodeKind::Binary:
  case NodeKind::Compare:
  case NodeKind::Load:
  case NodeKind::Store:
  case NodeKind::Gamma:
  case NodeKind::Theta:
  case NodeKind::Lambda:
    return true;
  default:
    return false;
  }
}

bool isElasticKind(NodeKind k) {
  switch (k) {
  case NodeKind::Gamma:
  case NodeKind::Theta:
  case NodeKind::Lambda:
    return false;
  default:
    return true;
  }
}

Region *originRegion(const OriginRef &o) {
  return o.node ? o.node->region : o.region;
}

void checkPortBasics(Graph &g, std::vector<Violation> &out) {
  g.forEachNode([&](Node *n) {
    for (size_t i = 0; i < n->inputs.size(); ++i) {
      const Input &in = n->inputs[i];
      if (!in.origin.valid()) {
        out.push_back({"unconnected-input", n->id,
                       "input " + std::to_string(i)});
        continue;
      }
      if (Graph::originType(in.origin) != in.type)
        out.push_back({"type-mismatch", n->id,
                       "input " + std::to_string(i) + " expects " +
                           portTypeName(in.type) + " got " +
                           portTypeName(Graph::originType(in.origin))});
      if (in.type.kind == TypeKind::Control && in.type.param < 2)
        out.push_back({"control-arity", n->id, "arity < 2"});
      if (in.type.kind == TypeKind::Value && in.type.param != 32)
        out.push_back({"value-width", n->id, "width != 32"});
    }
  });
}

// Region discipline: every edge stays within one region. Memory request
// and response channels are exempt; they are routed directly to the
// per-array port nodes without following control flow.
void checkRegionContainment(Graph &g, std::vector<Violation> &out) {
  g.forEachNode([&](Node *n) {
    for (size_t i = 0; i < n->inputs.size(); ++i) {
      const Input &in = n->inputs[i];
      if (!in.origin.valid())
        continue;
      if (in.type.kind == TypeKind::MemRequest ||
          in.type.kind == TypeKind::MemResponse)
        continue;
      if (originRegion(in.origin) != n->region)
        out.push_back({"region-escape", n->id,
                       "input " + std::to_string(i) +
                           " crosses a region boundary"});
    }
    for (const auto &sub : n->regions) {
      for (size_t i = 0; i < sub->results.size(); ++i) {
        const Result &res = sub->results[i];
        if (!res.origin.valid()) {
          out.push_back({"unconnected-result", n->id,
                         "result " + std::to_string(i)});
          continue;
        }
        if (originRegion(res.origin) != sub.get())
          out.push_back({"region-escape", n->id,
                         "result " + std::to_string(i) +
                             " crosses a region boundary"});
      }
    }
  });
}

void checkAcyclicRegions(Region &r, std::vector<Violation> &out) {
  try {
    topoOrder(r);
  } catch (const Error &) {
    out.push_back({"region-cycle", r.owner ? r.owner->id : -1,
                   "value edges form a cycle within a region"});
  }
  for (const auto &n : r.nodes)
    for (const auto &sub : n->regions)
      checkAcyclicRegions(*sub, out);
}

// --- state chain coverage --------------------------------------------------

int walkChainInRegion(OriginRef start, std::set<Node *> &ops,
                      std::vector<Violation> &out, int depth);

// Threads node `n` entered at state input `u`; returns the node's state
// exit origin, or an invalid ref on malformed graphs.
OriginRef advanceState(Node *n, const UserRef &u, std::set<Node *> &ops,
                       std::vector<Violation> &out, int depth) {
  switch (n->kind) {
  case NodeKind::Load:
    ops.insert(n);
    return n->out(1);
  case NodeKind::Store:
    ops.insert(n);
    return n->out(0);
  case NodeKind::Theta: {
    Region *sub = n->subregion(0);
    int e = walkChainInRegion(OriginRef{nullptr, sub, u.index}, ops, out,
                              depth + 1);
    if (e < 0)
      return {};
    if (e != u.index + 1) {
      out.push_back({"state-chain-theta", n->id,
                     "loop state variable exits at a different result"});
      return {};
    }
    return n->out(u.index);
  }
  case NodeKind::Gamma: {
    int exitIdx = -1;
    for (const auto &subPtr : n->regions) {
      Region *sub = subPtr.get();
      int e = walkChainInRegion(OriginRef{nullptr, sub, u.index - 1}, ops, out,
                                depth + 1);
      if (e < 0)
        return {};
      if (exitIdx < 0)
        exitIdx = e;
      else if (exitIdx != e) {
        out.push_back({"state-chain-gamma", n->id,
                       "chain exits differ across subregions"});
        return {};
      }
    }
    return n->out(exitIdx);
  }
  default:
    out.push_back({"state-chain-node", n->id,
                   std::string("unexpected kind ") + nodeKindName(n->kind)});
    return {};
  }
}

// Walks the chain from `start` to its region result; returns the result
// index, or -1 on malformed graphs.
int walkChainInRegion(OriginRef start, std::set<Node *> &ops,
                      std::vector<Violation> &out, int depth) {
  if (depth > 64) {
    out.push_back({"state-chain-depth", -1, "suspicious nesting"});
    return -1;
  }
  OriginRef o = start;
  std::set<const Node *> visited;
  for (;;) {
    auto users = Graph::originUsers(o);
    if (users.size() != 1) {
      out.push_back({"state-chain-fanout", o.node ? o.node->id : -1,
                     "state origin has " + std::to_string(users.size()) +
                         " users"});
      return -1;
    }
    UserRef u = users[0];
    if (u.region)
      return u.index;
    if (!visited.insert(u.node).second) {
      out.push_back({"state-chain-cycle", u.node->id, ""});
      return -1;
    }
    o = advanceState(u.node, u, ops, out, depth);
    if (!o.valid())
      return -1;
  }
}

void walkStateChain(OriginRef start, std::set<Node *> &ops,
                    std::vector<Violation> &out) {
  walkChainInRegion(start, ops, out, 0);
}

void checkStateChains(Graph &g, std::vector<Violation> &out) {
  Node *lambda = nullptr;
  for (const auto &n : g.root().nodes)
    if (n->kind == NodeKind::Lambda)
      lambda = n.get();
  if (!lambda)
    return;
  Region *body = lambda->subregion(0);

  std::map<std::string, std::set<Node *>> arrayOps;
  g.forEachNode([&](Node *n) {
    if (n->kind == NodeKind::Load || n->kind == NodeKind::Store)
      arrayOps[n->array].insert(n);
  });

  // chain id per memory op
  std::map<Node *, int> chainOf;
  int chainId = 0;
  for (size_t i = 0; i < body->arguments.size(); ++i) {
    if (body->arguments[i].bind.kind != ArgBind::Kind::ArrayState)
      continue;
    std::set<Node *> ops;
    walkStateChain(OriginRef{nullptr, body, static_cast<int>(i)}, ops, out);
    for (Node *n : ops) {
      if (chainOf.count(n))
        out.push_back({"state-chain-overlap", n->id,
                       "memory op on two chains"});
      chainOf[n] = chainId;
    }
    ++chainId;
  }

  for (const auto &[array, ops] : arrayOps) {
    std::set<int> chains;
    for (Node *n : ops) {
      auto it = chainOf.find(n);
      if (it == chainOf.end())
        out.push_back({"state-chain-missing", n->id,
                       "memory op on array '" + array + "' not on a chain"});
      else
        chains.insert(it->second);
    }
    if (chains.size() > 1)
      out.push_back({"state-chain-split", -1,
                     "array '" + array + "' ops on multiple chains"});
  }
}

} // namespace

std::vector<Violation> validateRvsdg(Graph &g) {
  std::vector<Violation> out;

  g.forEachNode([&](Node *n) {
    if (!isSourceKind(n->kind))
      out.push_back({"dialect", n->id,
                     std::string("non-source kind ") + nodeKindName(n->kind)});
    switch (n->kind) {
    case NodeKind::Gamma: {
      if (n->regions.size() < 2)
        out.push_back({"gamma-regions", n->id, "fewer than 2 subregions"});
      if (n->inputs.empty() || n->inputs[0].type.kind != TypeKind::Control ||
          n->inputs[0].type.param != n->regions.size())
        out.push_back({"gamma-predicate", n->id,
                       "predicate arity != subregion count"});
      for (const auto &sub : n->regions) {
        if (sub->arguments.size() + 1 != n->inputs.size())
          out.push_back({"gamma-arity", n->id,
                         "arguments != inputs - 1"});
        if (sub->results.size() != n->outputs.size())
          out.push_back({"gamma-arity", n->id, "results != outputs"});
      }
      break;
    }
    case NodeKind::Theta: {
      if (n->regions.size() != 1) {
        out.push_back({"theta-regions", n->id, "must have 1 subregion"});
        break;
      }
      Region *sub = n->subregion(0);
      if (sub->arguments.size() != n->inputs.size() ||
          sub->arguments.size() != n->outputs.size())
        out.push_back({"theta-arity", n->id,
                       "inputs, arguments and outputs must agree"});
      if (sub->results.size() != sub->arguments.size() + 1)
        out.push_back({"theta-arity", n->id,
                       "results must be arguments + 1 (predicate)"});
      else if (sub->results[0].type.kind != TypeKind::Control ||
               sub->results[0].type.param != 2)
        out.push_back({"theta-predicate", n->id, "result 0 must be ctl2"});
      break;
    }
    case NodeKind::Load:
      if (n->inputs.size() != 2 || n->outputs.size() != 2)
        out.push_back({"load-ports", n->id, "expects (addr,state)->(data,state)"});
      break;
    case NodeKind::Store:
      if (n->inputs.size() != 3 || n->outputs.size() != 1)
        out.push_back({"store-ports", n->id,
                       "expects (addr,data,state)->(state)"});
      break;
    default:
      break;
    }
  });

  checkPortBasics(g, out);
  checkRegionContainment(g, out);
  checkAcyclicRegions(g.root(), out);
  if (out.empty()) // chain walking assumes a structurally sane graph
    checkStateChains(g, out);
  return out;
}

// ---------------------------------------------------------------------------
// Netlist validation
// ---------------------------------------------------------------------------

namespace {

// User-port granularity vertex for the combinational-step graph.
struct ChanVert {
  Node *node = nullptr;
  Region *region = nullptr;
  int index = -1;
  auto operator<=>(const ChanVert &) const = default;
};

// Combinational input->output pairs per elastic node kind.
std::vector<std::pair<int, int>> combPairs(Node *n) {
  std::vector<std::pair<int, int>> ps;
  auto all = [&]() {
    for (size_t i = 0; i < n->inputs.size(); ++i)
      for (size_t o = 0; o < n->outputs.size(); ++o)
        ps.push_back({static_cast<int>(i), static_cast<int>(o)});
  };
  switch (n->kind) {
  case NodeKind::Binary:
  case NodeKind::Compare:
  case NodeKind::Branch:
  case NodeKind::NdMux:
  case NodeKind::DMux:
  case NodeKind::Fork:
  case NodeKind::StateGate:
    all();
    break;
  case NodeKind::LoopBuf:
    all(); // emits on trigger the same cycle, including reload pass-through
    break;
  case NodeKind::Buf:
    if (!n->opaque)
      all(); // transparent FIFO falls through when empty
    break;
  case NodeKind::AddrQueue:
    // check-in -> check-out, plus the combinational compare against the
    // address being enqueued (when wired); a dequeue never unblocks the
    // same cycle.
    ps.push_back({2, 0});
    if (n->combCheck)
      ps.push_back({0, 0});
    break;
  case NodeKind::Load:
    // address/state to the issued request; the response data is latched.
    ps.push_back({n->loadAddrIn(), n->loadReqOut()});
    if (n->hasStatePort)
      ps.push_back({n->loadStateIn(), n->loadReqOut()});
    break;
  case NodeKind::Store:
    ps.push_back({n->storeAddrIn(), n->storeReqOut()});
    ps.push_back({n->storeDataIn(), n->storeReqOut()});
    if (n->hasStatePort)
      ps.push_back({n->storeStateIn(), n->storeReqOut()});
    break;
  default:
    break; // PredBuf, opaque Buf, memory ports, sinks, sources: cut
  }
  return ps;
}

struct CombGraph {
  std::map<ChanVert, int> ids;
  std::vector<std::vector<int>> adj;
  std::vector<ChanVert> verts;

  int id(const ChanVert &v) {
    auto it = ids.find(v);
    if (it != ids.end())
      return it->second;
    int i = static_cast<int>(verts.size());
    ids[v] = i;
    verts.push_back(v);
    adj.emplace_back();
    return i;
  }
  void edge(const ChanVert &a, const ChanVert &b) {
    int ia = id(a);
    int ib = id(b);
    adj[static_cast<size_t>(ia)].push_back(ib);
  }
};

// Every consumer of `origin`, following loop boundary wiring transparently.
void originConsumers(Graph &g, OriginRef o, std::vector<ChanVert> &out,
                     int depth = 0) {
  if (depth > 64)
    return;
  for (const UserRef &u : Graph::originUsers(o)) {
    if (u.node) {
      if (u.node->kind == NodeKind::Loop) {
        // node input i feeds the loop-input arguments bound to i
        Region *sub = u.node->subregion(0);
        for (size_t a = 0; a < sub->arguments.size(); ++a)
          if (sub->arguments[a].bind.kind == ArgBind::Kind::LoopInput &&
              sub->arguments[a].bind.index == u.index)
            originConsumers(g, OriginRef{nullptr, sub, static_cast<int>(a)},
                            out, depth + 1);
      } else {
        out.push_back({u.node, nullptr, u.index});
      }
    } else {
      Region *r = u.region;
      const Result &res = r->results[static_cast<size_t>(u.index)];
      if (res.bind.kind == ResBind::Kind::LoopBackedge) {
        for (size_t a = 0; a < r->arguments.size(); ++a)
          if (r->arguments[a].bind.kind == ArgBind::Kind::LoopBackedge &&
              r->arguments[a].bind.index == res.bind.index)
            originConsumers(g, OriginRef{nullptr, r, static_cast<int>(a)}, out,
                            depth + 1);
      } else if (res.bind.kind == ResBind::Kind::LoopOutput) {
        Node *loop = r->owner;
        originConsumers(g, OriginRef{loop, nullptr, res.bind.index}, out,
                        depth + 1);
      }
    }
  }
}

bool hasCycle(CombGraph &cg, std::vector<int> &cycleOut) {
  enum { White, Gray, Black };
  std::vector<int> color(cg.adj.size(), White);
  std::vector<int> stack;
  std::function<bool(int)> dfs = [&](int v) -> bool {
    color[v] = Gray;
    stack.push_back(v);
    for (int w : cg.adj[v]) {
      if (color[w] == Gray) {
        auto it = std::find(stack.begin(), stack.end(), w);
        cycleOut.assign(it, stack.end());
        return true;
      }
      if (color[w] == White && dfs(w))
        return true;
    }
    stack.pop_back();
    color[v] = Black;
    return false;
  };
  for (size_t v = 0; v < cg.adj.size(); ++v)
    if (color[v] == White && dfs(static_cast<int>(v)))
      return true;
  return false;
}

} // namespace

std::vector<Violation> validateNetlist(Graph &g) {
  std::vector<Violation> out;

  g.forEachNode([&](Node *n) {
    if (!isElasticKind(n->kind)) {
      out.push_back({"dialect", n->id,
                     std::string("non-elastic kind ") + nodeKindName(n->kind)});
      return;
    }
    switch (n->kind) {
    case NodeKind::Branch:
      if (n->inputs.size() != 2 || n->inputs[0].type.kind != TypeKind::Control ||
          n->outputs.size() != n->inputs[0].type.param)
        out.push_back({"branch-ports", n->id, ""});
      break;
    case NodeKind::NdMux:
    case NodeKind::DMux:
      if (n->inputs.size() < 3 || n->inputs[0].type.kind != TypeKind::Control ||
          n->inputs.size() != n->inputs[0].type.param + 1 ||
          n->outputs.size() != 1)
        out.push_back({"mux-ports", n->id, ""});
      break;
    case NodeKind::Fork:
      if (n->inputs.size() != 1 || n->outputs.size() < 2)
        out.push_back({"fork-ports", n->id, "needs 1 input, >=2 outputs"});
      break;
    case NodeKind::Sink:
    case NodeKind::Observer:
      if (n->inputs.size() != 1 || !n->outputs.empty())
        out.push_back({"sink-ports", n->id, ""});
      break;
    case NodeKind::Buf:
      if (n->inputs.size() != 1 || n->outputs.size() != 1 || n->capacity < 1)
        out.push_back({"buf-ports", n->id, ""});
      break;
    case NodeKind::PredBuf:
      if (n->inputs.size() != 1 || n->outputs.size() != 1 ||
          n->inputs[0].type.kind != TypeKind::Control)
        out.push_back({"predbuf-ports", n->id, ""});
      break;
    case NodeKind::LoopBuf:
      if (n->inputs.size() != 2 || n->outputs.size() != 1 ||
          n->inputs[0].type.kind != TypeKind::Control)
        out.push_back({"loopbuf-ports", n->id, ""});
      break;
    case NodeKind::AddrQueue:
      if (n->inputs.size() != 3 || n->outputs.size() != 1 || n->capacity < 1)
        out.push_back({"addrq-ports", n->id, ""});
      break;
    case NodeKind::StateGate:
      if (n->inputs.size() != 2 || n->outputs.size() != 2)
        out.push_back({"sg-ports", n->id, ""});
      break;
    case NodeKind::Load:
    case NodeKind::Store:
      if (!n->memLowered)
        out.push_back({"mem-unlowered", n->id,
                       "memory op without request/response ports"});
      break;
    default:
      break;
    }

    // Point-to-point: exactly one user per output.
    for (size_t o = 0; o < n->outputs.size(); ++o)
      if (n->outputs[o].users.size() != 1)
        out.push_back({"fan-out", n->id,
                       "output " + std::to_string(o) + " has " +
                           std::to_string(n->outputs[o].users.size()) +
                           " users"});
    for (size_t i = 0; i < n->inputs.size(); ++i)
      if (!n->inputs[i].origin.valid())
        out.push_back({"unconnected-input", n->id,
                       "input " + std::to_string(i)});
    for (const auto &sub : n->regions) {
      for (size_t a = 0; a < sub->arguments.size(); ++a)
        if (sub->arguments[a].users.size() != 1)
          out.push_back({"fan-out", n->id,
                         "region argument " + std::to_string(a)});
      for (size_t r = 0; r < sub->results.size(); ++r)
        if (!sub->results[r].origin.valid())
          out.push_back({"unconnected-result", n->id,
                         "result " + std::to_string(r)});
    }
  });

  if (!out.empty())
    return out;

  // Combinational cycle check with loop back edges materialized.
  CombGraph cg;
  g.forEachNode([&](Node *n) {
    auto pairs = combPairs(n);
    for (auto [i, o] : pairs) {
      std::vector<ChanVert> consumers;
      originConsumers(g, OriginRef{n, nullptr, o}, consumers);
      for (const auto &c : consumers)
        cg.edge({n, nullptr, i}, c);
    }
  });
  // Region boundary steps are wires: argument -> consumers handled inside
  // originConsumers; nothing extra needed here.

  std::vector<int> cycle;
  if (hasCycle(cg, cycle)) {
    std::string detail;
    for (int v : cycle) {
      if (!detail.empty())
        detail += " -> ";
      const ChanVert &cv = cg.verts[static_cast<size_t>(v)];
      detail += cv.node ? std::to_string(cv.node->id) : "?";
    }
    out.push_back({"combinational-cycle", -1, detail});
  }
  return out;
}

} // namespace elk
