#include "elk/buffers.hpp"

#include <set>
#include <vector>

namespace elk {

namespace {

// Backward trace through FORK/SG nodes only: does this origin come from a
// memory operation's state output?
bool tracesToMemoryStateOut(OriginRef o) {
  for (int guard = 0; guard < 10000; ++guard) {
    if (!o.valid() || !o.node)
      return false;
    Node *n = o.node;
    switch (n->kind) {
    case NodeKind::Load:
      return n->hasStatePort && o.index == n->loadStateOut();
    case NodeKind::Store:
      return n->hasStatePort && o.index == n->storeStateOut();
    case NodeKind::Fork:
      o = n->inputs[0].origin;
      break;
    case NodeKind::StateGate:
      o = n->inputs[static_cast<size_t>(o.index)].origin;
      break;
    default:
      return false;
    }
  }
  return false;
}

// Forward walk from a user: does the token reach a memory request address
// or data port without passing a stateful node?
bool reachesMemoryPort(Graph &g, UserRef u, std::set<const void *> &seen,
                       int depth = 0) {
  if (depth > 512)
    return true; // be conservative
  if (u.region) {
    const Result &res = u.region->results[static_cast<size_t>(u.index)];
    Node *loop = u.region->owner;
    if (res.bind.kind == ResBind::Kind::LoopBackedge) {
      for (size_t a = 0; a < u.region->arguments.size(); ++a)
        if (u.region->arguments[a].bind.kind == ArgBind::Kind::LoopBackedge &&
            u.region->arguments[a].bind.index == res.bind.index)
          for (const UserRef &next : u.region->arguments[a].users)
            if (reachesMemoryPort(g, next, seen, depth + 1))
              return true;
      return false;
    }
    if (res.bind.kind == ResBind::Kind::LoopOutput && loop) {
      for (const UserRef &next :
           loop->outputs[static_cast<size_t>(res.bind.index)].users)
        if (reachesMemoryPort(g, next, seen, depth + 1))
          return true;
    }
    return false;
  }

  Node *n = u.node;
  if (!seen.insert(n).second)
    return false;

  auto fanAll = [&](int outIdx) {
    for (const UserRef &next : n->outputs[static_cast<size_t>(outIdx)].users)
      if (reachesMemoryPort(g, next, seen, depth + 1))
        return true;
    return false;
  };

  switch (n->kind) {
  case NodeKind::Load:
    return u.index == n->loadAddrIn();
  case NodeKind::Store:
    return u.index == n->storeAddrIn() || u.index == n->storeDataIn();
  case NodeKind::AddrQueue:
    if (u.index == 0)
      return true; // enqueue address port
    if (u.index == 2)
      return fanAll(0); // check passes through toward the load
    return false;
  case NodeKind::Binary:
  case NodeKind::Compare:
  case NodeKind::NdMux:
  case NodeKind::DMux:
  case NodeKind::StateGate:
  case NodeKind::Fork:
  case NodeKind::Branch: {
    bool hit = false;
    for (size_t o = 0; o < n->outputs.size() && !hit; ++o)
      hit = fanAll(static_cast<int>(o));
    return hit;
  }
  case NodeKind::Loop: {
    Region *body = n->subregion(0);
    for (size_t a = 0; a < body->arguments.size(); ++a)
      if (body->arguments[a].bind.kind == ArgBind::Kind::LoopInput &&
          body->arguments[a].bind.index == u.index)
        for (const UserRef &next : body->arguments[a].users)
          if (reachesMemoryPort(g, next, seen, depth + 1))
            return true;
    return false;
  }
  default:
    return false; // stateful or terminal node cuts the path
  }
}

bool edgeReachesMemoryPort(Graph &g, UserRef u) {
  std::set<const void *> seen;
  return reachesMemoryPort(g, u, seen);
}

bool hasConstantOperand(Node *mul) {
  for (const auto &in : mul->inputs) {
    OriginRef o = in.origin;
    for (int guard = 0; guard < 64 && o.valid() && o.node; ++guard) {
      if (o.node->kind == NodeKind::Constant)
        return true;
      if (o.node->kind == NodeKind::Fork) {
        o = o.node->inputs[0].origin;
        continue;
      }
      break;
    }
  }
  return false;
}

// Splices an opaque BUF or transparent FIFO into the channel feeding `u`.
void spliceBuffer(Graph &g, Region &r, UserRef u, uint32_t capacity,
                  bool opaque) {
  OriginRef o = Graph::userOrigin(u);
  g.disconnect(u);
  Node *b = makeBuf(g, r, o, capacity, opaque);
  g.connect(b->out(0), u);
}

void elideBackedgeBufs(Graph &g, Region &r) {
  std::vector<Node *> bufs;
  for (const auto &np : r.nodes) {
    Node *n = np.get();
    for (auto &sub : n->regions)
      elideBackedgeBufs(g, *sub);
    if (n->kind == NodeKind::Buf && n->onBackedge)
      bufs.push_back(n);
  }
  for (Node *buf : bufs) {
    // The BUF sits after the exit BRANCH; trace from the branch data input.
    OriginRef from = buf->inputs[0].origin;
    if (!from.node || from.node->kind != NodeKind::Branch)
      continue;
    OriginRef data = from.node->inputs[1].origin;
    if (!tracesToMemoryStateOut(data))
      continue;
    // Splice the BUF out; the memory op's registered state output keeps
    // the cycle broken.
    auto users = Graph::originUsers(buf->out(0));
    OriginRef in = buf->inputs[0].origin;
    g.disconnect(buf->in(0));
    for (const UserRef &u : users) {
      g.disconnect(u);
      g.connect(in, u);
    }
    g.eraseNode(buf);
  }
}

void placeOpaque(Graph &g, Region &r, const BufferPolicy &policy,
                 bool isRoot) {
  std::vector<Node *> snapshot;
  for (const auto &np : r.nodes)
    snapshot.push_back(np.get());
  for (Node *n : snapshot) {
    for (auto &sub : n->regions)
      placeOpaque(g, *sub, policy, false);

    if (policy.multiplierBuffering && n->kind == NodeKind::Binary &&
        n->binOp == BinaryOp::Mul && !hasConstantOperand(n)) {
      UserRef u = n->outputs[0].users.size() == 1 ? n->outputs[0].users[0]
                                                  : UserRef{};
      if (u.valid() && !edgeReachesMemoryPort(g, u))
        spliceBuffer(g, r, u, 1, /*opaque=*/true);
    }

    if (policy.loopOutputBuffering && n->kind == NodeKind::Loop && isRoot) {
      for (size_t o = 0; o < n->outputs.size(); ++o) {
        if (n->outputs[o].users.size() != 1)
          continue;
        UserRef u = n->outputs[o].users[0];
        if (!edgeReachesMemoryPort(g, u))
          spliceBuffer(g, r, u, 1, /*opaque=*/true);
      }
    }
  }
}

void placeForkFifos(Graph &g, Region &r, const BufferPolicy &policy) {
  std::vector<Node *> snapshot;
  for (const auto &np : r.nodes)
    snapshot.push_back(np.get());
  for (Node *n : snapshot) {
    for (auto &sub : n->regions)
      placeForkFifos(g, *sub, policy);
    if (n->kind != NodeKind::Fork)
      continue;
    for (size_t o = 0; o < n->outputs.size(); ++o) {
      if (n->outputs[o].users.size() != 1)
        continue;
      UserRef u = n->outputs[o].users[0];
      // Transparent FIFOs add no latency, so memory paths may keep them;
      // only edges feeding an ADDR-Q port stay bare, their timing is part
      // of the disambiguation contract.
      if (u.node && u.node->kind == NodeKind::AddrQueue)
        continue;
      uint32_t depth = n->outputs[o].type.kind == TypeKind::Control
                           ? policy.controlForkFifoDepth
                           : policy.forkFifoDepth;
      spliceBuffer(g, r, u, depth, /*opaque=*/false);
    }
  }
}

} // namespace

void placeBuffers(Graph &g, const BufferPolicy &policy) {
  if (policy.backedgeElision)
    elideBackedgeBufs(g, g.root());
  placeOpaque(g, g.root(), policy, /*isRoot=*/true);
  placeForkFifos(g, g.root(), policy);
}

} // namespace elk
