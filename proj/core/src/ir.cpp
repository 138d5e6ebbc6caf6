#include "elk/ir.hpp"

#include <algorithm>
#include <cassert>

namespace elk {

std::string portTypeName(const PortType &t) {
  switch (t.kind) {
  case TypeKind::Value:
    return "i" + std::to_string(t.param);
  case TypeKind::Control:
    return "ctl" + std::to_string(t.param);
  case TypeKind::MemState:
    return "state";
  case TypeKind::MemRequest:
    return "req";
  case TypeKind::MemResponse:
    return "resp";
  }
  return "?";
}

const char *nodeKindName(NodeKind k) {
  switch (k) {
  case NodeKind::Constant: return "CONST";
  case NodeKind::Binary: return "BINOP";
  case NodeKind::Compare: return "CMP";
  case NodeKind::Load: return "LOAD";
  case NodeKind::Store: return "STORE";
  case NodeKind::Gamma: return "GAMMA";
  case NodeKind::Theta: return "THETA";
  case NodeKind::Lambda: return "LAMBDA";
  case NodeKind::Branch: return "BRANCH";
  case NodeKind::NdMux: return "NDMUX";
  case NodeKind::DMux: return "DMUX";
  case NodeKind::Fork: return "FORK";
  case NodeKind::Sink: return "SINK";
  case NodeKind::Buf: return "BUF";
  case NodeKind::PredBuf: return "PRED-BUF";
  case NodeKind::LoopBuf: return "LOOP-BUF";
  case NodeKind::Loop: return "LOOP";
  case NodeKind::MemReq: return "MEM-REQ";
  case NodeKind::MemResp: return "MEM-RESP";
  case NodeKind::AddrQueue: return "ADDR-Q";
  case NodeKind::StateGate: return "SG";
  case NodeKind::Source: return "SOURCE";
  case NodeKind::Observer: return "OBSERVER";
  }
  return "?";
}

const char *sgRoleName(SgRole r) {
  switch (r) {
  case SgRole::None: return "SG";
  case SgRole::Sg1: return "SG1";
  case SgRole::Sg2: return "SG2";
  case SgRole::Sg3: return "SG3";
  case SgRole::Sg4: return "SG4";
  case SgRole::Merge: return "SG-MERGE";
  }
  return "SG";
}

int Region::addArgument(PortType t, ArgBind bind) {
  arguments.push_back(Argument{t, {}, std::move(bind)});
  return static_cast<int>(arguments.size()) - 1;
}

int Region::addResult(PortType t, OriginRef origin, ResBind bind) {
  results.push_back(Result{t, {}, std::move(bind)});
  int idx = static_cast<int>(results.size()) - 1;
  if (origin.valid())
    graph->connect(origin, UserRef{nullptr, this, idx});
  return idx;
}

Graph::Graph() : rootRegion(std::make_unique<Region>()) {
  rootRegion->graph = this;
}

Node *Graph::addNode(Region &r, NodeKind kind) {
  auto n = std::make_unique<Node>();
  n->id = nextId++;
  n->kind = kind;
  n->region = &r;
  Node *p = n.get();
  r.nodes.push_back(std::move(n));
  return p;
}

Region *Graph::addRegion(Node &n) {
  auto r = std::make_unique<Region>();
  r->owner = &n;
  r->indexInOwner = static_cast<int>(n.regions.size());
  r->graph = this;
  Region *p = r.get();
  n.regions.push_back(std::move(r));
  return p;
}

void Graph::connect(OriginRef from, UserRef to) {
  assert(from.valid() && to.valid());
  if (to.node) {
    to.node->inputs.at(static_cast<size_t>(to.index)).origin = from;
  } else {
    to.region->results.at(static_cast<size_t>(to.index)).origin = from;
  }
  if (from.node)
    from.node->outputs.at(static_cast<size_t>(from.index)).users.push_back(to);
  else
    from.region->arguments.at(static_cast<size_t>(from.index)).users.push_back(to);
}

void Graph::disconnect(UserRef u) {
  OriginRef o = userOrigin(u);
  if (!o.valid())
    return;
  auto &users = o.node ? o.node->outputs.at(static_cast<size_t>(o.index)).users
                       : o.region->arguments.at(static_cast<size_t>(o.index)).users;
  users.erase(std::remove(users.begin(), users.end(), u), users.end());
  if (u.node)
    u.node->inputs.at(static_cast<size_t>(u.index)).origin = OriginRef{};
  else
    u.region->results.at(static_cast<size_t>(u.index)).origin = OriginRef{};
}

void Graph::moveUsers(OriginRef from, OriginRef to) {
  auto users = originUsers(from);
  for (const UserRef &u : users) {
    disconnect(u);
    connect(to, u);
  }
}

void Graph::eraseNode(Node *n) {
  for (size_t i = 0; i < n->inputs.size(); ++i)
    disconnect(UserRef{n, nullptr, static_cast<int>(i)});
  for (const auto &out : n->outputs) {
    (void)out;
    assert(out.users.empty() && "erasing node with live users");
  }
  auto &nodes = n->region->nodes;
  auto it = std::find_if(nodes.begin(), nodes.end(),
                         [&](const auto &p) { return p.get() == n; });
  assert(it != nodes.end());
  nodes.erase(it);
}

PortType Graph::originType(const OriginRef &o) {
  if (o.node)
    return o.node->outputs.at(static_cast<size_t>(o.index)).type;
  return o.region->arguments.at(static_cast<size_t>(o.index)).type;
}

PortType Graph::userType(const UserRef &u) {
  if (u.node)
    return u.node->inputs.at(static_cast<size_t>(u.index)).type;
  return u.region->results.at(static_cast<size_t>(u.index)).type;
}

OriginRef Graph::userOrigin(const UserRef &u) {
  if (u.node)
    return u.node->inputs.at(static_cast<size_t>(u.index)).origin;
  return u.region->results.at(static_cast<size_t>(u.index)).origin;
}

std::vector<UserRef> Graph::originUsers(const OriginRef &o) {
  if (o.node)
    return o.node->outputs.at(static_cast<size_t>(o.index)).users;
  return o.region->arguments.at(static_cast<size_t>(o.index)).users;
}

static void forEachNodeIn(const Region &r, const std::function<void(Node *)> &fn) {
  for (const auto &n : r.nodes) {
    fn(n.get());
    for (const auto &sub : n->regions)
      forEachNodeIn(*sub, fn);
  }
}

void Graph::forEachNode(const std::function<void(Node *)> &fn) const {
  forEachNodeIn(*rootRegion, fn);
}

std::vector<Node *> Graph::allNodes() const {
  std::vector<Node *> out;
  forEachNode([&](Node *n) { out.push_back(n); });
  return out;
}

Node *makeConstant(Graph &g, Region &r, int32_t value) {
  Node *n = g.addNode(r, NodeKind::Constant);
  n->value = value;
  n->outputs.push_back({valueType(), {}});
  return n;
}

Node *makeBinary(Graph &g, Region &r, BinaryOp op, OriginRef a, OriginRef b) {
  Node *n = g.addNode(r, NodeKind::Binary);
  n->binOp = op;
  n->inputs.push_back({valueType(), {}});
  n->inputs.push_back({valueType(), {}});
  n->outputs.push_back({valueType(), {}});
  g.connect(a, n->in(0));
  g.connect(b, n->in(1));
  return n;
}

Node *makeCompare(Graph &g, Region &r, CmpOp op, OriginRef a, OriginRef b) {
  Node *n = g.addNode(r, NodeKind::Compare);
  n->cmpOp = op;
  n->inputs.push_back({valueType(), {}});
  n->inputs.push_back({valueType(), {}});
  n->outputs.push_back({controlType(2), {}});
  g.connect(a, n->in(0));
  g.connect(b, n->in(1));
  return n;
}

Node *makeFork(Graph &g, Region &r, OriginRef in, int n) {
  Node *f = g.addNode(r, NodeKind::Fork);
  PortType t = Graph::originType(in);
  f->inputs.push_back({t, {}});
  for (int i = 0; i < n; ++i)
    f->outputs.push_back({t, {}});
  g.connect(in, f->in(0));
  return f;
}

Node *makeSink(Graph &g, Region &r, OriginRef in) {
  Node *s = g.addNode(r, NodeKind::Sink);
  s->inputs.push_back({Graph::originType(in), {}});
  g.connect(in, s->in(0));
  return s;
}

Node *makeBuf(Graph &g, Region &r, OriginRef in, uint32_t capacity, bool opaque) {
  Node *b = g.addNode(r, NodeKind::Buf);
  PortType t = Graph::originType(in);
  b->capacity = capacity;
  b->opaque = opaque;
  b->inputs.push_back({t, {}});
  b->outputs.push_back({t, {}});
  g.connect(in, b->in(0));
  return b;
}

Node *makeStateGate(Graph &g, Region &r, SgRole role, OriginRef primary,
                    OriginRef trigger) {
  Node *sg = g.addNode(r, NodeKind::StateGate);
  sg->sgRole = role;
  PortType pt = Graph::originType(primary);
  PortType tt = Graph::originType(trigger);
  sg->inputs.push_back({pt, {}});
  sg->inputs.push_back({tt, {}});
  sg->outputs.push_back({pt, {}});
  sg->outputs.push_back({tt, {}});
  g.connect(primary, sg->in(0));
  g.connect(trigger, sg->in(1));
  return sg;
}

std::vector<Node *> topoOrder(Region &r) {
  std::map<Node *, int> pending;
  std::vector<Node *> ready, order;
  for (const auto &np : r.nodes) {
    Node *n = np.get();
    int deps = 0;
    for (const auto &in : n->inputs)
      if (in.origin.valid() && in.origin.node && in.origin.node->region == &r)
        ++deps;
    pending[n] = deps;
    if (deps == 0)
      ready.push_back(n);
  }
  while (!ready.empty()) {
    Node *n = ready.front();
    ready.erase(ready.begin());
    order.push_back(n);
    for (const auto &out : n->outputs) {
      for (const auto &u : out.users) {
        if (u.node && u.node->region == &r) {
          if (--pending[u.node] == 0)
            ready.push_back(u.node);
        }
      }
    }
  }
  if (order.size() != r.nodes.size())
    throw Error("cycle within region");
  return order;
}

} // namespace elk
