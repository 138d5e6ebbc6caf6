#include "elk/disambig.hpp"

#include "elk/build.hpp"

#include <algorithm>
#include <cassert>

namespace elk {

namespace {

// --- chain structure collection ---------------------------------------------

struct Seg;

struct SegElem {
  enum class Kind { Op, InnerLoop, Cond };
  Kind kind{};
  Node *op = nullptr;        // Op: load or store
  Node *loop = nullptr;      // InnerLoop
  std::unique_ptr<Seg> inner;
  Node *branch = nullptr;    // Cond
  Node *mux = nullptr;       // Cond join
  std::vector<std::vector<SegElem>> sides;
};

// The state loop variable routing of one loop: entry mux, exit branch and
// the elements of one iteration's chain.
struct Seg {
  Node *ndmux = nullptr;
  Node *exitBranch = nullptr;
  int outIdx = -1; // loop output index of the chain
  std::vector<SegElem> elems;
};

bool isLoopExitBranch(Node *br) {
  if (br->kind != NodeKind::Branch || br->outputs.size() != 2)
    return false;
  auto users = br->outputs[0].users;
  return users.size() == 1 && users[0].region &&
         users[0].region->results[static_cast<size_t>(users[0].index)]
                 .bind.kind == ResBind::Kind::LoopOutput;
}

UserRef singleUser(const OriginRef &o) {
  auto users = Graph::originUsers(o);
  if (users.size() != 1)
    throw Error("state chain expects point-to-point edges during "
                "disambiguation");
  return users[0];
}

OriginRef loopStateExit(Node *loop, const Seg &seg) {
  return loop->out(seg.outIdx);
}

std::unique_ptr<Seg> collectLoopSeg(Node *loop, int inputIdx);

// Walks from `o` collecting elements until `stop` decides the walk is done
// with the current user.
std::vector<SegElem> collectElems(OriginRef o, UserRef &terminal) {
  std::vector<SegElem> elems;
  for (;;) {
    UserRef u = singleUser(o);
    if (u.region) {
      terminal = u;
      return elems;
    }
    Node *n = u.node;
    switch (n->kind) {
    case NodeKind::Load: {
      SegElem e;
      e.kind = SegElem::Kind::Op;
      e.op = n;
      elems.push_back(std::move(e));
      o = n->out(n->loadStateOut());
      break;
    }
    case NodeKind::Store: {
      SegElem e;
      e.kind = SegElem::Kind::Op;
      e.op = n;
      elems.push_back(std::move(e));
      o = n->out(n->storeStateOut());
      break;
    }
    case NodeKind::Loop: {
      SegElem e;
      e.kind = SegElem::Kind::InnerLoop;
      e.loop = n;
      e.inner = collectLoopSeg(n, u.index);
      o = loopStateExit(n, *e.inner);
      elems.push_back(std::move(e));
      break;
    }
    case NodeKind::Branch: {
      if (isLoopExitBranch(n)) {
        terminal = u; // caller is inside a loop body; this is the exit
        return elems;
      }
      // Conditional routing from a lowered guarded gamma: one sub-path per
      // branch output, joining at an NDMUX.
      SegElem e;
      e.kind = SegElem::Kind::Cond;
      e.branch = n;
      Node *join = nullptr;
      for (size_t s = 0; s < n->outputs.size(); ++s) {
        UserRef sideEnd;
        std::vector<SegElem> side =
            collectElems(n->out(static_cast<int>(s)), sideEnd);
        if (!sideEnd.node || sideEnd.node->kind != NodeKind::NdMux)
          throw Error("conditional state path must join at an NDMUX");
        if (!join)
          join = sideEnd.node;
        else if (join != sideEnd.node)
          throw Error("conditional state paths join at different muxes");
        e.sides.push_back(std::move(side));
      }
      e.mux = join;
      o = join->out(0);
      elems.push_back(std::move(e));
      break;
    }
    case NodeKind::NdMux:
      // Join of an enclosing conditional: report to the caller.
      terminal = u;
      return elems;
    case NodeKind::StateGate:
      // A merge gate from a previously processed loop at the same level.
      o = n->out(u.index);
      break;
    default:
      throw Error(std::string("unexpected node on state chain: ") +
                  nodeKindName(n->kind));
    }
  }
}

std::unique_ptr<Seg> collectLoopSeg(Node *loop, int inputIdx) {
  Region *body = loop->subregion(0);
  int argIdx = -1;
  for (size_t a = 0; a < body->arguments.size(); ++a)
    if (body->arguments[a].bind.kind == ArgBind::Kind::LoopInput &&
        body->arguments[a].bind.index == inputIdx)
      argIdx = static_cast<int>(a);
  if (argIdx < 0)
    throw Error("loop input has no matching argument");

  auto seg = std::make_unique<Seg>();
  UserRef muxIn = singleUser(OriginRef{nullptr, body, argIdx});
  if (!muxIn.node || muxIn.node->kind != NodeKind::NdMux)
    throw Error("loop state variable must enter through an NDMUX");
  seg->ndmux = muxIn.node;

  UserRef terminal;
  seg->elems = collectElems(seg->ndmux->out(0), terminal);
  if (!terminal.node || !isLoopExitBranch(terminal.node))
    throw Error("loop state variable must exit through a BRANCH");
  seg->exitBranch = terminal.node;
  UserRef exitRes = singleUser(seg->exitBranch->out(0));
  seg->outIdx =
      exitRes.region->results[static_cast<size_t>(exitRes.index)].bind.index;
  return seg;
}

// --- inventory ---------------------------------------------------------------

void countOps(const std::vector<SegElem> &elems, int &loads, int &stores) {
  for (const auto &e : elems) {
    switch (e.kind) {
    case SegElem::Kind::Op:
      (e.op->kind == NodeKind::Load ? loads : stores)++;
      break;
    case SegElem::Kind::InnerLoop:
      countOps(e.inner->elems, loads, stores);
      break;
    case SegElem::Kind::Cond:
      for (const auto &side : e.sides)
        countOps(side, loads, stores);
      break;
    }
  }
}

// --- transformation ----------------------------------------------------------

struct Gates {
  struct LoadGate {
    Node *load;
    Node *sg2;
    Node *sg3;
    int pos; // red-chain construction order
  };
  struct StoreGate {
    Node *store;
    Node *sg1; // null when omitted; enqueue taps the address directly
    int pos;
  };
  std::vector<LoadGate> loadGates;
  std::vector<StoreGate> storeGates;
};

class Duplicator {
public:
  Duplicator(Graph &g, const std::string &array, const DisambigOptions &opts)
      : g(g), array(array), opts(opts) {}

  // Builds the red chain through `elems`, returning the red origin after
  // the last element. Gates are placed in the region of their memory op.
  OriginRef buildRed(const std::vector<SegElem> &elems, OriginRef redCur,
                     Region &region) {
    for (const auto &e : elems) {
      switch (e.kind) {
      case SegElem::Kind::Op:
        redCur = e.op->kind == NodeKind::Store
                     ? placeStoreGate(e.op, redCur, region)
                     : placeLoadGates(e.op, redCur, region);
        break;
      case SegElem::Kind::InnerLoop:
        redCur = duplicateThroughLoop(e.loop, *e.inner, redCur);
        break;
      case SegElem::Kind::Cond: {
        // Mirror the conditional routing: same select origins.
        OriginRef sel = e.branch->inputs[0].origin;
        Node *br = g.addNode(region, NodeKind::Branch);
        br->inputs.push_back({e.branch->inputs[0].type, {}});
        br->inputs.push_back({memStateType(), {}});
        for (size_t s = 0; s < e.sides.size(); ++s)
          br->outputs.push_back({memStateType(), {}});
        g.connect(sel, br->in(0));
        g.connect(redCur, br->in(1));

        Node *mux = g.addNode(region, NodeKind::NdMux);
        OriginRef muxSel = e.mux->inputs[0].origin;
        mux->inputs.push_back({e.mux->inputs[0].type, {}});
        for (size_t s = 0; s < e.sides.size(); ++s)
          mux->inputs.push_back({memStateType(), {}});
        mux->outputs.push_back({memStateType(), {}});
        g.connect(muxSel, mux->in(0));
        for (size_t s = 0; s < e.sides.size(); ++s) {
          OriginRef sideCur =
              buildRed(e.sides[s], br->out(static_cast<int>(s)), region);
          g.connect(sideCur, mux->in(static_cast<int>(s) + 1));
        }
        redCur = mux->out(0);
        break;
      }
      }
    }
    return redCur;
  }

  // Splices SG4 into the blue chain at every load and removes load state
  // ports. Done after red construction so the collected structure stays
  // valid during the walk.
  void gateBlueLoads(const std::vector<SegElem> &elems) {
    for (const auto &e : elems) {
      switch (e.kind) {
      case SegElem::Kind::Op:
        if (e.op->kind == NodeKind::Load)
          spliceSg4(e.op);
        break;
      case SegElem::Kind::InnerLoop:
        gateBlueLoads(e.inner->elems);
        break;
      case SegElem::Kind::Cond:
        for (const auto &side : e.sides)
          gateBlueLoads(side);
        break;
      }
    }
  }

  OriginRef duplicateThroughLoop(Node *loop, const Seg &seg, OriginRef redIn) {
    Region *body = loop->subregion(0);

    // New loop input for the red chain.
    loop->inputs.push_back({memStateType(), {}});
    int redInIdx = static_cast<int>(loop->inputs.size()) - 1;
    g.connect(redIn, loop->in(redInIdx));

    // Entry NDMUX selected by the same PRED-BUF stream.
    OriginRef predBufOut = seg.ndmux->inputs[0].origin;
    OriginRef predOrigin = seg.exitBranch->inputs[0].origin;

    int aExt = body->addArgument(memStateType(),
                                 {ArgBind::Kind::LoopInput, "", redInIdx});
    int pair = nextBackedgePair(body);
    int aBack = body->addArgument(memStateType(),
                                  {ArgBind::Kind::LoopBackedge, "", pair});
    Node *mux = g.addNode(*body, NodeKind::NdMux);
    mux->inputs.push_back({controlType(2), {}});
    mux->inputs.push_back({memStateType(), {}});
    mux->inputs.push_back({memStateType(), {}});
    mux->outputs.push_back({memStateType(), {}});
    g.connect(predBufOut, mux->in(0));
    g.connect(OriginRef{nullptr, body, aExt}, mux->in(1));
    g.connect(OriginRef{nullptr, body, aBack}, mux->in(2));

    OriginRef redCur = buildRed(seg.elems, mux->out(0), *body);

    Node *br = g.addNode(*body, NodeKind::Branch);
    br->inputs.push_back({controlType(2), {}});
    br->inputs.push_back({memStateType(), {}});
    br->outputs.push_back({memStateType(), {}});
    br->outputs.push_back({memStateType(), {}});
    g.connect(predOrigin, br->in(0));
    g.connect(redCur, br->in(1));

    Node *buf = makeBuf(g, *body, br->out(1), 1, /*opaque=*/true);
    buf->onBackedge = true;
    body->addResult(memStateType(), buf->out(0),
                    {ResBind::Kind::LoopBackedge, "", pair});

    loop->outputs.push_back({memStateType(), {}});
    int outIdx = static_cast<int>(loop->outputs.size()) - 1;
    body->addResult(memStateType(), br->out(0),
                    {ResBind::Kind::LoopOutput, "", outIdx});
    return loop->out(outIdx);
  }

  Gates gates;

private:
  int nextBackedgePair(Region *body) {
    int maxPair = -1;
    for (const auto &a : body->arguments)
      if (a.bind.kind == ArgBind::Kind::LoopBackedge)
        maxPair = std::max(maxPair, a.bind.index);
    return maxPair + 1;
  }

  // Store: SG1 dependent on the store address; the red chain passes once
  // the address is available for enqueueing.
  OriginRef placeStoreGate(Node *store, OriginRef redCur, Region &) {
    int pos = nextPos++;
    if (opts.omitRole == SgRole::Sg1) {
      gates.storeGates.push_back({store, nullptr, pos});
      return redCur;
    }
    OriginRef addr = store->inputs[static_cast<size_t>(store->storeAddrIn())]
                         .origin;
    Node *sg1 = makeStateGate(*store->region->graph, *store->region,
                              SgRole::Sg1, addr, redCur);
    gates.storeGates.push_back({store, sg1, pos});
    return sg1->out(1);
  }

  // Load: consecutive SG2 and SG3 on the red chain, spliced into the load
  // address path. Queues go between them afterwards.
  OriginRef placeLoadGates(Node *load, OriginRef redCur, Region &) {
    int pos = nextPos++;
    Region &r = *load->region;
    OriginRef addr =
        load->inputs[static_cast<size_t>(load->loadAddrIn())].origin;
    g.disconnect(load->in(load->loadAddrIn()));

    Node *sg2 = nullptr, *sg3 = nullptr;
    OriginRef addrCur = addr;
    if (opts.omitRole != SgRole::Sg2) {
      sg2 = makeStateGate(g, r, SgRole::Sg2, addrCur, redCur);
      addrCur = sg2->out(0);
      redCur = sg2->out(1);
    }
    if (opts.omitRole != SgRole::Sg3) {
      sg3 = makeStateGate(g, r, SgRole::Sg3, addrCur, redCur);
      addrCur = sg3->out(0);
      redCur = sg3->out(1);
    }
    g.connect(addrCur, load->in(load->loadAddrIn()));
    gates.loadGates.push_back({load, sg2, sg3, pos});
    return redCur;
  }

  void spliceSg4(Node *load) {
    if (!load->hasStatePort)
      return;
    OriginRef stateIn =
        load->inputs[static_cast<size_t>(load->loadStateIn())].origin;
    g.disconnect(load->in(load->loadStateIn()));
    if (opts.omitRole == SgRole::Sg4) {
      g.moveUsers(load->out(load->loadStateOut()), stateIn);
    } else {
      Node *sg4 = makeStateGate(g, *load->region, SgRole::Sg4, stateIn,
                                load->out(load->loadDataOut()));
      g.moveUsers(load->out(load->loadStateOut()), sg4->out(0));
    }
    // Drop the load's state ports; it is driven by its address alone now.
    int stateOut = load->loadStateOut();
    int stateIdx = load->loadStateIn();
    load->hasStatePort = false;
    removeOutput(g, load, stateOut);
    removeInput(g, load, stateIdx);
  }

  Graph &g;
  std::string array;
  DisambigOptions opts;
  int nextPos = 0;
};

// Find the chain entry (argument index) for `array` in the lambda body.
int findChainArg(Region *body, const std::string &array) {
  for (size_t a = 0; a < body->arguments.size(); ++a)
    if (body->arguments[a].bind.kind == ArgBind::Kind::ArrayState &&
        body->arguments[a].bind.name == array)
      return static_cast<int>(a);
  return -1;
}

// Top-level chain walk: finds loop nodes threading the chain of `array`,
// including loops nested in conditional routing. Returns the user that
// terminated the walk (a region result, or the join NDMUX of an enclosing
// conditional).
UserRef findChainLoopsFrom(OriginRef o, std::vector<std::pair<Node *, int>> &out) {
  for (;;) {
    UserRef u = singleUser(o);
    if (u.region)
      return u;
    Node *n = u.node;
    switch (n->kind) {
    case NodeKind::Load:
      o = n->out(n->loadStateOut());
      break;
    case NodeKind::Store:
      o = n->out(n->storeStateOut());
      break;
    case NodeKind::Loop: {
      out.push_back({n, u.index});
      auto seg = collectLoopSeg(n, u.index);
      o = loopStateExit(n, *seg);
      break;
    }
    case NodeKind::Branch: {
      Node *join = nullptr;
      for (size_t s = 0; s < n->outputs.size(); ++s) {
        UserRef end = findChainLoopsFrom(n->out(static_cast<int>(s)), out);
        if (!end.node || end.node->kind != NodeKind::NdMux)
          throw Error("conditional state path must join at an NDMUX");
        if (!join)
          join = end.node;
        else if (join != end.node)
          throw Error("conditional state paths join at different muxes");
      }
      o = join->out(0);
      break;
    }
    case NodeKind::NdMux:
      return u; // join of the enclosing conditional
    case NodeKind::StateGate:
      o = n->out(u.index);
      break;
    default:
      throw Error(std::string("unexpected node on state chain: ") +
                  nodeKindName(n->kind));
    }
  }
}

void findChainLoops(OriginRef o, std::vector<std::pair<Node *, int>> &out) {
  UserRef end = findChainLoopsFrom(o, out);
  if (!end.region)
    throw Error("top-level state chain must end at a region result");
}

bool transformLoop(Graph &g, Node *loop, int stateInIdx,
                   const std::string &array, const DisambigOptions &opts,
                   bool placeQueues) {
  auto seg = collectLoopSeg(loop, stateInIdx);
  int loads = 0, stores = 0;
  countOps(seg->elems, loads, stores);
  if (loads == 0 || stores == 0)
    return false; // nothing to disambiguate in this loop

  Region &parent = *loop->region;
  Duplicator dup(g, array, opts);

  // Split the chain before the loop: the incoming state feeds both the
  // blue (existing) loop input and the new red input.
  OriginRef entry = loop->inputs[static_cast<size_t>(stateInIdx)].origin;
  OriginRef redOut = dup.duplicateThroughLoop(loop, *seg, entry);

  // Merge after the loop: the blue output passes once the red chain has
  // exited too.
  OriginRef blueOut = loop->out(seg->outIdx);
  Node *merge = g.addNode(parent, NodeKind::StateGate);
  merge->sgRole = SgRole::Merge;
  merge->inputs.push_back({memStateType(), {}});
  merge->inputs.push_back({memStateType(), {}});
  merge->outputs.push_back({memStateType(), {}});
  merge->outputs.push_back({memStateType(), {}});
  g.moveUsers(blueOut, merge->out(0));
  g.connect(blueOut, merge->in(0));
  g.connect(redOut, merge->in(1));

  dup.gateBlueLoads(seg->elems);

  if (placeQueues) {
    // One ADDR-Q per store-load pair, on the load address path between its
    // SG2 and SG3 (or what remains of that path under omission).
    for (auto &lg : dup.gates.loadGates) {
      Node *load = lg.load;
      // Splice point: the edge feeding the load address (after SG2/SG3
      // placement this is SG3's primary input, or the load input itself).
      UserRef spliceUser =
          lg.sg3 ? lg.sg3->in(0) : load->in(load->loadAddrIn());
      for (auto &sg : dup.gates.storeGates) {
        Node *store = sg.store;
        Node *sg1 = sg.sg1;
        OriginRef pathOrigin = Graph::userOrigin(spliceUser);
        Node *q = g.addNode(*loop->subregion(0), NodeKind::AddrQueue);
        q->array = array;
        q->capacity = opts.addrQueueCapacity;
        if (q->capacity < 1)
          throw Error("ADDR-Q capacity must be at least 1");
        q->pairedStore = store->memOpId;
        q->pairedLoad = load->memOpId;
        // The combinational compare against a same-cycle enqueue exists
        // for stores that precede the load on the address-ordering chain.
        // For a load-before-store pair the coincidence cannot happen (the
        // chain's back-edge buffer separates them by a cycle) and wiring
        // the compare would close a combinational cycle.
        q->combCheck = sg.pos < lg.pos;
        q->inputs.push_back({valueType(), {}});    // enqueue address
        q->inputs.push_back({memStateType(), {}}); // dequeue trigger
        q->inputs.push_back({valueType(), {}});    // check in
        q->outputs.push_back({valueType(), {}});   // check out

        g.disconnect(spliceUser);
        g.connect(pathOrigin, q->in(2));
        g.connect(q->out(0), spliceUser);

        // Enqueue directly from SG1's address output (or the raw store
        // address under omission); dequeue from the store state output.
        OriginRef enqSrc =
            sg1 ? sg1->out(0)
                : store->inputs[static_cast<size_t>(store->storeAddrIn())]
                      .origin;
        g.connect(enqSrc, q->in(0));
        g.connect(store->out(store->storeStateOut()), q->in(1));
      }
    }
  }
  return true;
}

} // namespace

bool duplicateStateEdge(Graph &g, Node *outerLoop, const std::string &array,
                        const DisambigOptions &opts) {
  // Locate the loop input carrying this array's chain.
  Region *body = outerLoop->subregion(0);
  for (size_t a = 0; a < body->arguments.size(); ++a) {
    const ArgBind &b = body->arguments[a].bind;
    if (b.kind != ArgBind::Kind::LoopInput)
      continue;
    if (outerLoop->inputs[static_cast<size_t>(b.index)].type.kind !=
        TypeKind::MemState)
      continue;
    // Does this loop variable thread ops of `array`?
    auto seg = collectLoopSeg(outerLoop, b.index);
    bool onArray = false;
    std::function<void(const std::vector<SegElem> &)> scan =
        [&](const std::vector<SegElem> &elems) {
          for (const auto &e : elems) {
            if (e.kind == SegElem::Kind::Op && e.op->array == array)
              onArray = true;
            else if (e.kind == SegElem::Kind::InnerLoop)
              scan(e.inner->elems);
            else if (e.kind == SegElem::Kind::Cond)
              for (const auto &side : e.sides)
                scan(side);
          }
        };
    scan(seg->elems);
    if (onArray)
      return transformLoop(g, outerLoop, b.index, array, opts,
                           /*placeQueues=*/false);
  }
  return false;
}

void insertAddrQueues(Graph &g, const DisambigOptions &opts) {
  Node *lambda = findLambda(g);
  Region *body = lambda->subregion(0);

  std::vector<std::string> arrays;
  for (const auto &a : body->arguments)
    if (a.bind.kind == ArgBind::Kind::ArrayState)
      arrays.push_back(a.bind.name);
  std::sort(arrays.begin(), arrays.end());

  for (const auto &array : arrays) {
    int argIdx = findChainArg(body, array);
    if (argIdx < 0)
      continue;
    std::vector<std::pair<Node *, int>> loops;
    findChainLoops(OriginRef{nullptr, body, argIdx}, loops);
    for (auto &[loop, inIdx] : loops)
      transformLoop(g, loop, inIdx, array, opts, /*placeQueues=*/true);
  }
}

} // namespace elk
