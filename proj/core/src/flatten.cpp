#include "elk/sim.hpp"

#include "elk/build.hpp"

#include <algorithm>
#include <cassert>

namespace elk {

namespace {

void migrate(Node *n, Region &dst) {
  Region &src = *n->region;
  auto it = std::find_if(src.nodes.begin(), src.nodes.end(),
                         [&](const auto &p) { return p.get() == n; });
  assert(it != src.nodes.end());
  std::unique_ptr<Node> holder = std::move(*it);
  src.nodes.erase(it);
  n->region = &dst;
  dst.nodes.push_back(std::move(holder));
}

void flattenLoop(Graph &g, Node *loop) {
  Region *body = loop->subregion(0);

  // Inner loops first.
  std::vector<Node *> innerLoops;
  for (const auto &np : body->nodes)
    if (np->kind == NodeKind::Loop)
      innerLoops.push_back(np.get());
  for (Node *inner : innerLoops)
    flattenLoop(g, inner);

  // Loop inputs feed the bound arguments directly.
  for (size_t a = 0; a < body->arguments.size(); ++a) {
    const ArgBind &bind = body->arguments[a].bind;
    if (bind.kind == ArgBind::Kind::LoopInput) {
      OriginRef src = loop->inputs[static_cast<size_t>(bind.index)].origin;
      g.moveUsers(OriginRef{nullptr, body, static_cast<int>(a)}, src);
    }
  }
  // Back edges become real cyclic channels.
  for (size_t r = 0; r < body->results.size(); ++r) {
    const Result &res = body->results[r];
    if (res.bind.kind != ResBind::Kind::LoopBackedge)
      continue;
    OriginRef origin = res.origin;
    g.disconnect(UserRef{nullptr, body, static_cast<int>(r)});
    for (size_t a = 0; a < body->arguments.size(); ++a)
      if (body->arguments[a].bind.kind == ArgBind::Kind::LoopBackedge &&
          body->arguments[a].bind.index == res.bind.index)
        g.moveUsers(OriginRef{nullptr, body, static_cast<int>(a)}, origin);
  }
  // Loop outputs come straight from their results.
  for (size_t r = 0; r < body->results.size(); ++r) {
    const Result &res = body->results[r];
    if (res.bind.kind != ResBind::Kind::LoopOutput)
      continue;
    OriginRef origin = res.origin;
    g.disconnect(UserRef{nullptr, body, static_cast<int>(r)});
    g.moveUsers(loop->out(res.bind.index), origin);
  }

  std::vector<Node *> toMove;
  for (const auto &np : body->nodes)
    toMove.push_back(np.get());
  for (Node *n : toMove)
    migrate(n, *loop->region);

  g.eraseNode(loop);
}

} // namespace

void flatten(Graph &g) {
  g.forEachNode([&](Node *n) {
    if (n->kind == NodeKind::Gamma || n->kind == NodeKind::Theta ||
        n->kind == NodeKind::Lambda)
      throw Error(std::string("cannot flatten: residual structural node ") +
                  nodeKindName(n->kind));
  });
  for (;;) {
    Node *loop = nullptr;
    for (const auto &np : g.root().nodes)
      if (np->kind == NodeKind::Loop) {
        loop = np.get();
        break;
      }
    if (!loop)
      break;
    flattenLoop(g, loop);
  }
}

} // namespace elk
