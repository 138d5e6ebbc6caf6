#include "elk/lower.hpp"

#include "elk/build.hpp"

#include <algorithm>
#include <cassert>

namespace elk {

namespace {

// Moves node `n` (with its unique_ptr) from its region into `dst`.
void migrateNode(Node *n, Region &dst) {
  Region &src = *n->region;
  auto it = std::find_if(src.nodes.begin(), src.nodes.end(),
                         [&](const auto &p) { return p.get() == n; });
  assert(it != src.nodes.end());
  std::unique_ptr<Node> holder = std::move(*it);
  src.nodes.erase(it);
  n->region = &dst;
  dst.nodes.push_back(std::move(holder));
}

bool regionHasTheta(Region &r) {
  for (const auto &n : r.nodes)
    if (n->kind == NodeKind::Theta)
      return true;
  return false;
}

bool gammaHasStateEdge(Node *gamma) {
  for (const auto &in : gamma->inputs)
    if (in.type.kind == TypeKind::MemState)
      return true;
  return false;
}

// ---------------------------------------------------------------------------
// Gamma lowering
// ---------------------------------------------------------------------------

void flattenGamma(Graph &g, Node *gamma, LowerStats *stats) {
  Region &parent = *gamma->region;
  size_t nRegions = gamma->regions.size();
  bool speculative = !gammaHasStateEdge(gamma);
  for (auto &sub : gamma->regions)
    if (regionHasTheta(*sub))
      speculative = false;
  if (stats)
    stats->gammaForms[gamma->id] =
        speculative ? GammaForm::Speculative : GammaForm::Guarded;

  OriginRef pred = gamma->inputs[0].origin;

  std::vector<OriginRef> inputOrigins;
  for (auto &in : gamma->inputs)
    inputOrigins.push_back(in.origin);

  if (speculative) {
    // Inputs feed every subregion directly.
    for (size_t s = 0; s < nRegions; ++s) {
      Region *sub = gamma->subregion(static_cast<int>(s));
      for (size_t a = 0; a < sub->arguments.size(); ++a)
        g.moveUsers(OriginRef{nullptr, sub, static_cast<int>(a)},
                    inputOrigins[a + 1]);
    }
  } else {
    // One BRANCH per input steers the token into the selected subregion.
    for (size_t i = 1; i < gamma->inputs.size(); ++i) {
      Node *br = g.addNode(parent, NodeKind::Branch);
      PortType t = gamma->inputs[i].type;
      br->inputs.push_back({controlType(static_cast<uint32_t>(nRegions)), {}});
      br->inputs.push_back({t, {}});
      for (size_t s = 0; s < nRegions; ++s)
        br->outputs.push_back({t, {}});
      g.connect(pred, br->in(0));
      g.connect(inputOrigins[i], br->in(1));
      for (size_t s = 0; s < nRegions; ++s) {
        Region *sub = gamma->subregion(static_cast<int>(s));
        g.moveUsers(OriginRef{nullptr, sub, static_cast<int>(i) - 1},
                    br->out(static_cast<int>(s)));
      }
    }
  }

  // Result origins are final only after the argument rewiring above
  // (pass-through results follow their argument to the new source).
  std::vector<std::vector<OriginRef>> resultOrigins(nRegions);
  for (size_t s = 0; s < nRegions; ++s) {
    Region *sub = gamma->subregion(static_cast<int>(s));
    for (auto &res : sub->results)
      resultOrigins[s].push_back(res.origin);
    for (size_t r = 0; r < sub->results.size(); ++r)
      g.disconnect(UserRef{nullptr, sub, static_cast<int>(r)});
    std::vector<Node *> toMove;
    for (const auto &np : sub->nodes)
      toMove.push_back(np.get());
    for (Node *n : toMove)
      migrateNode(n, parent);
  }

  // Outputs: a multiplexer per output selects among subregion results.
  for (size_t o = 0; o < gamma->outputs.size(); ++o) {
    Node *mux = g.addNode(parent, speculative ? NodeKind::DMux : NodeKind::NdMux);
    PortType t = gamma->outputs[o].type;
    mux->inputs.push_back({controlType(static_cast<uint32_t>(nRegions)), {}});
    for (size_t s = 0; s < nRegions; ++s)
      mux->inputs.push_back({t, {}});
    mux->outputs.push_back({t, {}});
    g.connect(pred, mux->in(0));
    for (size_t s = 0; s < nRegions; ++s)
      g.connect(resultOrigins[s][o], mux->in(static_cast<int>(s) + 1));
    g.moveUsers(gamma->out(static_cast<int>(o)), mux->out(0));
  }

  g.eraseNode(gamma);
}

void lowerGammasIn(Graph &g, Region &r, LowerStats *stats) {
  std::vector<Node *> snapshot;
  for (const auto &n : r.nodes)
    snapshot.push_back(n.get());
  for (Node *n : snapshot) {
    for (auto &sub : n->regions)
      lowerGammasIn(g, *sub, stats);
    if (n->kind == NodeKind::Gamma)
      flattenGamma(g, n, stats);
  }
}

// ---------------------------------------------------------------------------
// Theta lowering
// ---------------------------------------------------------------------------

void lowerTheta(Graph &g, Node *theta) {
  Region &parent = *theta->region;
  size_t n = theta->inputs.size();
  if (n == 0)
    throw Error("theta with zero loop variables");
  Region *body = theta->subregion(0);

  std::vector<bool> invariant(n, false);
  for (size_t i = 0; i < n; ++i) {
    const OriginRef &resOrigin = body->results[i + 1].origin;
    invariant[i] = !resOrigin.node && resOrigin.region == body &&
                   resOrigin.index == static_cast<int>(i);
  }

  // The loop node adopts the theta body region.
  Node *loop = g.addNode(parent, NodeKind::Loop);
  assert(theta->regions.size() == 1);
  loop->regions.push_back(std::move(theta->regions[0]));
  theta->regions.clear();
  body->owner = loop;
  body->indexInOwner = 0;

  // Loop inputs mirror theta inputs.
  std::vector<OriginRef> inputOrigins;
  for (size_t i = 0; i < n; ++i) {
    inputOrigins.push_back(theta->inputs[i].origin);
    loop->inputs.push_back({theta->inputs[i].type, {}});
  }
  for (size_t i = 0; i < n; ++i) {
    g.disconnect(theta->in(static_cast<int>(i)));
    g.connect(inputOrigins[i], loop->in(static_cast<int>(i)));
  }

  // Predicate buffer and its back edge. Pair ids index the backedge pairs.
  int pairPred = 0;
  int nextPair = 1;
  Node *predBuf = g.addNode(*body, NodeKind::PredBuf);
  predBuf->inputs.push_back({controlType(2), {}});
  predBuf->outputs.push_back({controlType(2), {}});
  int aPred = body->addArgument(controlType(2),
                                {ArgBind::Kind::LoopBackedge, "", pairPred});
  g.connect(OriginRef{nullptr, body, aPred}, predBuf->in(0));

  // Entry routing first: every original argument is rewired onto its
  // NDMUX or LOOP-BUF so result origins that pass an argument through
  // settle on the new source before they are captured.
  for (size_t i = 0; i < n; ++i) {
    PortType t = loop->inputs[i].type;
    if (invariant[i]) {
      // Loop-constant buffer: reloads from the loop input on termination
      // tokens, replicates its contents once per predicate token.
      int aInv = body->addArgument(
          t, {ArgBind::Kind::LoopInput, "", static_cast<int>(i)});
      Node *lb = g.addNode(*body, NodeKind::LoopBuf);
      lb->inputs.push_back({controlType(2), {}});
      lb->inputs.push_back({t, {}});
      lb->outputs.push_back({t, {}});
      g.connect(predBuf->out(0), lb->in(0));
      g.connect(OriginRef{nullptr, body, aInv}, lb->in(1));
      g.moveUsers(OriginRef{nullptr, body, static_cast<int>(i)}, lb->out(0));
    } else {
      int aExt = body->addArgument(
          t, {ArgBind::Kind::LoopInput, "", static_cast<int>(i)});
      int aBack = body->addArgument(t, {ArgBind::Kind::LoopBackedge, "",
                                        nextPair + static_cast<int>(i)});
      Node *mux = g.addNode(*body, NodeKind::NdMux);
      mux->inputs.push_back({controlType(2), {}});
      mux->inputs.push_back({t, {}}); // select 0: loop entry
      mux->inputs.push_back({t, {}}); // select 1: back edge
      mux->outputs.push_back({t, {}});
      g.connect(predBuf->out(0), mux->in(0));
      g.connect(OriginRef{nullptr, body, aExt}, mux->in(1));
      g.connect(OriginRef{nullptr, body, aBack}, mux->in(2));
      g.moveUsers(OriginRef{nullptr, body, static_cast<int>(i)}, mux->out(0));
    }
  }

  // Now the original result origins are final; capture and disconnect.
  OriginRef predOrigin = body->results[0].origin;
  std::vector<OriginRef> resOrigins(n + 1);
  for (size_t r = 0; r <= n; ++r) {
    resOrigins[r] = body->results[r].origin;
    g.disconnect(UserRef{nullptr, body, static_cast<int>(r)});
  }
  body->addResult(controlType(2), predOrigin,
                  {ResBind::Kind::LoopBackedge, "", pairPred});

  int nextOutput = 0;
  for (size_t i = 0; i < n; ++i) {
    PortType t = loop->inputs[i].type;
    if (invariant[i]) {
      // Outputs of unchanged loop variables are unused; consumers take the
      // loop input's source instead.
      g.moveUsers(theta->out(static_cast<int>(i)), inputOrigins[i]);
      continue;
    }
    int pair = nextPair + static_cast<int>(i);
    Node *br = g.addNode(*body, NodeKind::Branch);
    br->inputs.push_back({controlType(2), {}});
    br->inputs.push_back({t, {}});
    br->outputs.push_back({t, {}}); // 0: terminate -> loop output
    br->outputs.push_back({t, {}}); // 1: continue -> back edge
    g.connect(predOrigin, br->in(0));
    g.connect(resOrigins[i + 1], br->in(1));

    Node *buf = makeBuf(g, *body, br->out(1), 1, /*opaque=*/true);
    buf->onBackedge = true;
    body->addResult(t, buf->out(0), {ResBind::Kind::LoopBackedge, "", pair});

    int outIdx = nextOutput++;
    loop->outputs.push_back({t, {}});
    body->addResult(t, br->out(0), {ResBind::Kind::LoopOutput, "", outIdx});
    g.moveUsers(theta->out(static_cast<int>(i)), loop->out(outIdx));
  }

  // Remove the original arguments and results (descending index order).
  for (int r = static_cast<int>(n); r >= 0; --r)
    removeResult(g, body, r);
  for (int a = static_cast<int>(n) - 1; a >= 0; --a)
    removeArgument(g, body, a);

  g.eraseNode(theta);
}

void lowerThetasIn(Graph &g, Region &r) {
  std::vector<Node *> snapshot;
  for (const auto &n : r.nodes)
    snapshot.push_back(n.get());
  for (Node *n : snapshot) {
    for (auto &sub : n->regions)
      lowerThetasIn(g, *sub);
    if (n->kind == NodeKind::Theta)
      lowerTheta(g, n);
  }
}

} // namespace

void lowerGammas(Graph &g, LowerStats *stats) {
  lowerGammasIn(g, g.root(), stats);
}

void lowerThetas(Graph &g) { lowerThetasIn(g, g.root()); }

// ---------------------------------------------------------------------------
// Memory ports
// ---------------------------------------------------------------------------

void lowerMemoryPorts(Graph &g) {
  std::map<std::string, std::vector<Node *>> ops;
  g.forEachNode([&](Node *n) {
    if (n->kind == NodeKind::Load || n->kind == NodeKind::Store)
      ops[n->array].push_back(n);
  });

  for (auto &[array, nodes] : ops) {
    std::sort(nodes.begin(), nodes.end(),
              [](Node *a, Node *b) { return a->memOpId < b->memOpId; });
    Node *req = g.addNode(g.root(), NodeKind::MemReq);
    req->array = array;
    Node *resp = g.addNode(g.root(), NodeKind::MemResp);
    resp->array = array;

    for (Node *n : nodes) {
      if (n->memLowered)
        continue;
      n->memLowered = true;
      n->hasStatePort = true;
      if (n->kind == NodeKind::Load) {
        n->inputs.push_back({memResponseType(), {}});  // index 2
        n->outputs.push_back({memRequestType(), {}});  // index 2
        req->inputs.push_back({memRequestType(), {}});
        g.connect(n->out(n->loadReqOut()),
                  req->in(static_cast<int>(req->inputs.size()) - 1));
        resp->outputs.push_back({memResponseType(), {}});
        g.connect(resp->out(static_cast<int>(resp->outputs.size()) - 1),
                  n->in(n->loadRespIn()));
      } else {
        n->outputs.push_back({memRequestType(), {}}); // index 1
        req->inputs.push_back({memRequestType(), {}});
        g.connect(n->out(n->storeReqOut()),
                  req->in(static_cast<int>(req->inputs.size()) - 1));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Point-to-point enforcement
// ---------------------------------------------------------------------------

namespace {

void dissolveLambda(Graph &g) {
  Node *lambda = nullptr;
  for (const auto &n : g.root().nodes)
    if (n->kind == NodeKind::Lambda)
      lambda = n.get();
  if (!lambda)
    return;
  Region *body = lambda->subregion(0);

  std::vector<Node *> toMove;
  for (const auto &np : body->nodes)
    toMove.push_back(np.get());
  for (Node *n : toMove)
    migrateNode(n, g.root());

  for (size_t a = 0; a < body->arguments.size(); ++a) {
    const ArgBind &bind = body->arguments[a].bind;
    Node *src = g.addNode(g.root(), NodeKind::Source);
    src->outputs.push_back({body->arguments[a].type, {}});
    src->argName = bind.name;
    src->schedule = {{0, 0}}; // one token at cycle 0; value set per run
    g.moveUsers(OriginRef{nullptr, body, static_cast<int>(a)}, src->out(0));
  }
  for (size_t r = 0; r < body->results.size(); ++r) {
    const Result &res = body->results[r];
    Node *obs = g.addNode(g.root(), NodeKind::Observer);
    obs->inputs.push_back({res.type, {}});
    obs->observerRole = res.bind.kind == ResBind::Kind::ReturnValue
                            ? ObserverRole::Result
                            : ObserverRole::ArrayState;
    obs->argName = res.bind.name;
    OriginRef origin = res.origin;
    g.disconnect(UserRef{nullptr, body, static_cast<int>(r)});
    g.connect(origin, obs->in(0));
  }
  while (!body->results.empty())
    removeResult(g, body, static_cast<int>(body->results.size()) - 1);
  while (!body->arguments.empty())
    removeArgument(g, body, static_cast<int>(body->arguments.size()) - 1);
  g.eraseNode(lambda);
}

void eraseDeadSources(Graph &g, Region &r) {
  for (;;) {
    bool changed = false;
    std::vector<Node *> dead;
    for (const auto &np : r.nodes) {
      Node *n = np.get();
      if (n->kind != NodeKind::Constant && n->kind != NodeKind::Source)
        continue;
      bool used = false;
      for (const auto &o : n->outputs)
        used |= !o.users.empty();
      if (!used)
        dead.push_back(n);
    }
    for (Node *n : dead) {
      g.eraseNode(n);
      changed = true;
    }
    if (!changed)
      break;
  }
  for (const auto &np : r.nodes)
    for (auto &sub : np->regions)
      eraseDeadSources(g, *sub);
}

void pointToPointIn(Graph &g, Region &r) {
  // Snapshot origins first; fork/sink insertion adds nodes.
  struct Fixup {
    OriginRef origin;
    std::vector<UserRef> users;
  };
  std::vector<Fixup> multi;
  std::vector<OriginRef> dead;

  auto scanOrigin = [&](OriginRef o) {
    auto users = Graph::originUsers(o);
    if (users.empty())
      dead.push_back(o);
    else if (users.size() > 1)
      multi.push_back({o, users});
  };

  for (const auto &np : r.nodes) {
    Node *n = np.get();
    for (size_t o = 0; o < n->outputs.size(); ++o)
      scanOrigin(OriginRef{n, nullptr, static_cast<int>(o)});
  }
  for (size_t a = 0; a < r.arguments.size(); ++a)
    scanOrigin(OriginRef{nullptr, &r, static_cast<int>(a)});

  for (const auto &f : multi) {
    Node *fork = makeFork(g, r, f.origin, static_cast<int>(f.users.size()));
    for (size_t k = 0; k < f.users.size(); ++k) {
      g.disconnect(f.users[k]);
      g.connect(fork->out(static_cast<int>(k)), f.users[k]);
    }
  }
  for (const auto &o : dead)
    makeSink(g, r, o);

  for (const auto &np : r.nodes)
    for (auto &sub : np->regions)
      pointToPointIn(g, *sub);
}

} // namespace

void enforcePointToPoint(Graph &g) {
  dissolveLambda(g);
  eraseDeadSources(g, g.root());
  pointToPointIn(g, g.root());
}

} // namespace elk
