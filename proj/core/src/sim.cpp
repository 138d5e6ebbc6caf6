#include "elk/sim.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <sstream>

namespace elk {

namespace {

struct Channel {
  int src = -1, srcPort = -1;
  int dst = -1, dstPort = -1;
  PortType type;
  bool memResponse = false; // driven by the memory model, not by signals
};

struct NodeState {
  // fork / state gate
  std::vector<uint8_t> done;
  // dmux owed discards per data input
  std::vector<uint32_t> owed;
  // buffers
  bool full = false;
  int32_t val = 0;
  std::deque<int32_t> fifo;
  bool hasVal = false; // loop-buf
  // load/store
  bool slotFull = false;
  int32_t slotVal = 0;
  uint8_t stateTokens = 0; // completion tokens waiting on the state output
  bool outstanding = false;
  // source
  size_t emitted = 0;
  // observer
  bool captured = false;
  int32_t capturedVal = 0;
  // addr queue
  std::deque<uint32_t> queue;
  // binary op trap flag (valid payload impossible)
  bool poisoned = false;
};

struct MemoryModel {
  std::string array;
  std::vector<int32_t> contents;
  struct InFlight {
    uint64_t deliverAfterCycle; // delivered in the sequential phase of this cycle
    int loadNode;
    int32_t data;
  };
  std::vector<InFlight> inflight;
  // request ports in arbitration priority order (stores first, then index)
  struct Port {
    int channel;
    int opNode;
    bool isStore;
  };
  std::vector<Port> ports;
};

} // namespace

struct SimEngine::Impl {
  Graph &g;
  SimOptions opts;

  std::vector<Node *> nodes;          // dense index
  std::map<const Node *, int> nodeIdx;
  std::map<int, int> byNodeId;        // node id -> dense index
  std::vector<Channel> channels;
  std::vector<std::vector<int>> inCh, outCh; // per node, -1 when missing

  // signals (per channel)
  std::vector<uint8_t> V, R;
  std::vector<int32_t> A, B;
  std::vector<uint8_t> fired;

  std::vector<NodeState> st;
  std::vector<MemoryModel> mems;
  std::map<std::string, int> memByArray;

  uint64_t curCycle = 0;
  bool done = false;
  bool changed = false;
  Trap trap;
  MemTrace trace;
  uint64_t peakOccupancy = 0;

  Impl(Graph &graph, const SimOptions &o,
       const std::map<std::string, std::vector<int32_t>> &arrays,
       const std::map<std::string, int32_t> &args)
      : g(graph), opts(o) {
    build(arrays, args);
  }

  void build(const std::map<std::string, std::vector<int32_t>> &arrays,
             const std::map<std::string, int32_t> &args) {
    for (const auto &np : g.root().nodes) {
      if (!np->regions.empty())
        throw Error("simulator requires a flattened netlist");
      nodeIdx[np.get()] = static_cast<int>(nodes.size());
      byNodeId[np->id] = static_cast<int>(nodes.size());
      nodes.push_back(np.get());
    }
    inCh.assign(nodes.size(), {});
    outCh.assign(nodes.size(), {});
    st.assign(nodes.size(), {});

    for (size_t i = 0; i < nodes.size(); ++i) {
      Node *n = nodes[i];
      inCh[i].assign(n->inputs.size(), -1);
      outCh[i].assign(n->outputs.size(), -1);
    }
    for (size_t i = 0; i < nodes.size(); ++i) {
      Node *n = nodes[i];
      for (size_t p = 0; p < n->inputs.size(); ++p) {
        const OriginRef &o = n->inputs[p].origin;
        if (!o.valid())
          throw Error("unconnected input in simulation netlist (node " +
                      std::to_string(n->id) + ")");
        if (!o.node)
          throw Error("region argument survived flattening");
        int srcIdx = nodeIdx.at(o.node);
        Channel c;
        c.src = srcIdx;
        c.srcPort = o.index;
        c.dst = static_cast<int>(i);
        c.dstPort = static_cast<int>(p);
        c.type = n->inputs[p].type;
        c.memResponse = o.node->kind == NodeKind::MemResp;
        int ci = static_cast<int>(channels.size());
        channels.push_back(c);
        inCh[i][p] = ci;
        outCh[static_cast<size_t>(srcIdx)][static_cast<size_t>(o.index)] = ci;
      }
    }

    V.assign(channels.size(), 0);
    R.assign(channels.size(), 0);
    A.assign(channels.size(), 0);
    B.assign(channels.size(), 0);
    fired.assign(channels.size(), 0);

    // per-node initial state
    for (size_t i = 0; i < nodes.size(); ++i) {
      Node *n = nodes[i];
      NodeState &s = st[i];
      switch (n->kind) {
      case NodeKind::Fork:
        s.done.assign(n->outputs.size(), 0);
        break;
      case NodeKind::StateGate:
        s.done.assign(2, 0);
        break;
      case NodeKind::DMux:
        s.owed.assign(n->inputs.size() - 1, 0);
        break;
      case NodeKind::PredBuf:
        s.fifo.push_back(0); // pre-initialized with a loop-termination token
        break;
      case NodeKind::Source:
        if (!n->argName.empty() &&
            n->outputs[0].type.kind == TypeKind::Value) {
          auto it = args.find(n->argName);
          if (!n->schedule.empty())
            n->schedule[0].second = it == args.end() ? 0 : it->second;
        }
        break;
      default:
        break;
      }
    }

    // memories
    for (const auto &np : g.root().nodes) {
      if (np->kind != NodeKind::MemReq)
        continue;
      MemoryModel m;
      m.array = np->array;
      int len = 1;
      auto lit = g.arrayLengths.find(np->array);
      if (lit != g.arrayLengths.end())
        len = lit->second;
      m.contents.assign(static_cast<size_t>(len), 0);
      auto ait = arrays.find(np->array);
      if (ait != arrays.end())
        for (size_t k = 0; k < m.contents.size() && k < ait->second.size(); ++k)
          m.contents[k] = ait->second[k];
      int idx = nodeIdx.at(np.get());
      // stores first, then loads, each by port index
      for (int pass = 0; pass < 2; ++pass) {
        for (size_t p = 0; p < np->inputs.size(); ++p) {
          int ci = inCh[static_cast<size_t>(idx)][p];
          Node *op = nodes[static_cast<size_t>(channels[static_cast<size_t>(ci)].src)];
          bool isStore = op->kind == NodeKind::Store;
          if ((pass == 0) == isStore)
            m.ports.push_back({ci, channels[static_cast<size_t>(ci)].src, isStore});
        }
      }
      memByArray[m.array] = static_cast<int>(mems.size());
      mems.push_back(std::move(m));
    }
    // Arrays declared but never touched still belong in the result.
  }

  // --- combinational phase -------------------------------------------------

  bool evalNode(size_t i) {
    Node *n = nodes[i];
    NodeState &s = st[i];
    bool delta = false;

    auto setV = [&](int ch, bool v, int32_t a = 0, int32_t b = 0) {
      if (ch < 0)
        return;
      uint8_t nv = v ? 1 : 0;
      if (V[static_cast<size_t>(ch)] != nv || (v && (A[static_cast<size_t>(ch)] != a ||
                                                     B[static_cast<size_t>(ch)] != b))) {
        V[static_cast<size_t>(ch)] = nv;
        A[static_cast<size_t>(ch)] = a;
        B[static_cast<size_t>(ch)] = b;
        delta = true;
      }
    };
    auto setR = [&](int ch, bool r) {
      if (ch < 0)
        return;
      uint8_t nr = r ? 1 : 0;
      if (R[static_cast<size_t>(ch)] != nr) {
        R[static_cast<size_t>(ch)] = nr;
        delta = true;
      }
    };
    auto v = [&](int ch) { return ch >= 0 && V[static_cast<size_t>(ch)] != 0; };
    auto r = [&](int ch) { return ch >= 0 && R[static_cast<size_t>(ch)] != 0; };
    auto a = [&](int ch) { return ch >= 0 ? A[static_cast<size_t>(ch)] : 0; };
    auto b = [&](int ch) { return ch >= 0 ? B[static_cast<size_t>(ch)] : 0; };

    const auto &in = inCh[i];
    const auto &out = outCh[i];

    switch (n->kind) {
    case NodeKind::Constant:
      setV(out[0], true, n->value);
      break;
    case NodeKind::Source: {
      bool have = s.emitted < n->schedule.size() &&
                  n->schedule[s.emitted].first <= curCycle;
      setV(out[0], have, have ? n->schedule[s.emitted].second : 0);
      break;
    }
    case NodeKind::Binary: {
      bool iv = v(in[0]) && v(in[1]);
      int32_t res = 0;
      s.poisoned = false;
      if (iv) {
        auto rr = evalBinary(n->binOp, a(in[0]), a(in[1]));
        if (rr)
          res = *rr;
        else
          s.poisoned = true;
      }
      setV(out[0], iv, res);
      bool consume = iv && r(out[0]);
      setR(in[0], consume);
      setR(in[1], consume);
      break;
    }
    case NodeKind::Compare: {
      bool iv = v(in[0]) && v(in[1]);
      int32_t res = iv && evalCompare(n->cmpOp, a(in[0]), a(in[1])) ? 1 : 0;
      setV(out[0], iv, res);
      bool consume = iv && r(out[0]);
      setR(in[0], consume);
      setR(in[1], consume);
      break;
    }
    case NodeKind::Branch: {
      bool iv = v(in[0]) && v(in[1]);
      int sel = iv ? a(in[0]) : 0;
      if (iv && (sel < 0 || sel >= static_cast<int>(n->outputs.size())))
        throw Error("branch select out of range");
      for (size_t o = 0; o < n->outputs.size(); ++o)
        setV(out[o], iv && static_cast<int>(o) == sel, a(in[1]), b(in[1]));
      bool consume = iv && r(out[static_cast<size_t>(sel)]);
      setR(in[0], consume);
      setR(in[1], consume);
      break;
    }
    case NodeKind::NdMux: {
      bool sv = v(in[0]);
      int sel = sv ? a(in[0]) : 0;
      if (sv && (sel < 0 || sel + 1 >= static_cast<int>(n->inputs.size())))
        throw Error("mux select out of range");
      bool iv = sv && v(in[static_cast<size_t>(sel) + 1]);
      setV(out[0], iv, a(in[static_cast<size_t>(sel) + 1]),
           b(in[static_cast<size_t>(sel) + 1]));
      bool consume = iv && r(out[0]);
      setR(in[0], consume);
      for (size_t j = 1; j < n->inputs.size(); ++j)
        setR(in[j], consume && static_cast<int>(j) == sel + 1);
      break;
    }
    case NodeKind::DMux: {
      bool sv = v(in[0]);
      int sel = sv ? a(in[0]) : 0;
      if (sv && (sel < 0 || sel + 1 >= static_cast<int>(n->inputs.size())))
        throw Error("mux select out of range");
      bool iv = sv && v(in[static_cast<size_t>(sel) + 1]);
      setV(out[0], iv, a(in[static_cast<size_t>(sel) + 1]),
           b(in[static_cast<size_t>(sel) + 1]));
      bool consume = iv && r(out[0]);
      setR(in[0], consume);
      for (size_t j = 1; j < n->inputs.size(); ++j) {
        bool selected = consume && static_cast<int>(j) == sel + 1;
        bool discard = s.owed[j - 1] > 0 && v(in[j]);
        setR(in[j], selected || discard);
      }
      break;
    }
    case NodeKind::Fork: {
      bool iv = v(in[0]);
      for (size_t o = 0; o < n->outputs.size(); ++o)
        setV(out[o], iv && !s.done[o], a(in[0]), b(in[0]));
      bool all = iv;
      for (size_t o = 0; o < n->outputs.size(); ++o)
        all = all && (s.done[o] || r(out[o]));
      setR(in[0], all);
      break;
    }
    case NodeKind::StateGate: {
      bool joint = v(in[0]) && v(in[1]);
      // SG1 must not release the chain before the enqueue happened; SG3
      // must not release it before the checked address actually moved on
      // (a transiently passing check may still fail later). Their trigger
      // output waits for the primary transfer.
      bool ordered = n->sgRole == SgRole::Sg1 || n->sgRole == SgRole::Sg3;
      bool pv = joint && !s.done[0];
      setV(out[0], pv, a(in[0]), b(in[0]));
      bool pFiring = pv && r(out[0]);
      bool tv = joint && !s.done[1] &&
                (!ordered || s.done[0] || pFiring);
      setV(out[1], tv, a(in[1]), b(in[1]));
      bool tFiring = tv && r(out[1]);
      bool complete = joint && (s.done[0] || pFiring) && (s.done[1] || tFiring);
      setR(in[0], complete);
      setR(in[1], complete);
      break;
    }
    case NodeKind::Buf: {
      if (n->opaque) {
        // Registered elastic buffer with a skid slot: the input ready
        // depends only on occupancy, cutting the combinational ready path.
        setV(out[0], !s.fifo.empty(), s.fifo.empty() ? 0 : s.fifo.front());
        setR(in[0], s.fifo.size() < 2);
      } else {
        bool has = !s.fifo.empty();
        bool iv = v(in[0]);
        setV(out[0], has || iv, has ? s.fifo.front() : a(in[0]));
        setR(in[0], s.fifo.size() < n->capacity || r(out[0]));
      }
      break;
    }
    case NodeKind::PredBuf: {
      setV(out[0], !s.fifo.empty(), s.fifo.empty() ? 0 : s.fifo.front());
      setR(in[0], s.fifo.size() < 2);
      break;
    }
    case NodeKind::LoopBuf: {
      bool tv = v(in[0]);
      bool reload = tv && a(in[0]) == 0;
      bool ov = false;
      int32_t oval = 0;
      if (tv) {
        if (reload) {
          ov = v(in[1]);
          oval = a(in[1]);
        } else {
          ov = s.hasVal;
          oval = s.val;
        }
      }
      setV(out[0], ov, oval);
      bool firing = ov && r(out[0]);
      setR(in[0], firing);
      setR(in[1], reload && firing);
      break;
    }
    case NodeKind::Sink:
    case NodeKind::Observer:
      setR(in[0], true);
      break;
    case NodeKind::Load: {
      bool stateOk = !n->hasStatePort || v(in[n->loadStateIn()]);
      // The response buffer has exactly one slot; a request may only be
      // issued while it is empty or draining this cycle.
      bool slotFree = !s.slotFull || r(out[n->loadDataOut()]);
      bool latchFree = !n->hasStatePort || s.stateTokens < 2;
      bool reqV = v(in[n->loadAddrIn()]) && stateOk && !s.outstanding &&
                  slotFree && latchFree;
      setV(out[n->loadReqOut()], reqV, a(in[n->loadAddrIn()]));
      setV(out[n->loadDataOut()], s.slotFull, s.slotVal);
      if (n->hasStatePort)
        setV(out[n->loadStateOut()], s.stateTokens > 0);
      bool granted = reqV && r(out[n->loadReqOut()]);
      setR(in[n->loadAddrIn()], granted);
      if (n->hasStatePort)
        setR(in[n->loadStateIn()], granted);
      setR(in[n->loadRespIn()], false);
      break;
    }
    case NodeKind::Store: {
      bool stateOk = !n->hasStatePort || v(in[n->storeStateIn()]);
      bool latchFree = !n->hasStatePort || s.stateTokens < 2;
      bool reqV = v(in[n->storeAddrIn()]) && v(in[n->storeDataIn()]) &&
                  stateOk && latchFree;
      setV(out[n->storeReqOut()], reqV, a(in[n->storeAddrIn()]),
           a(in[n->storeDataIn()]));
      if (n->hasStatePort)
        setV(out[n->storeStateOut()], s.stateTokens > 0);
      bool granted = reqV && r(out[n->storeReqOut()]);
      setR(in[n->storeAddrIn()], granted);
      setR(in[n->storeDataIn()], granted);
      if (n->hasStatePort)
        setR(in[n->storeStateIn()], granted);
      break;
    }
    case NodeKind::MemReq: {
      // arbitration: stores before loads, by port index; at most
      // `memPortsPerCycle` grants; a load against a just-granted store
      // address defers one cycle.
      const MemoryModel &m = mems[static_cast<size_t>(memByArray.at(n->array))];
      uint32_t grants = 0;
      std::vector<int32_t> storeAddrs;
      for (const auto &port : m.ports) {
        bool grant = false;
        if (v(port.channel) && grants < opts.memPortsPerCycle) {
          if (port.isStore) {
            grant = true;
            storeAddrs.push_back(a(port.channel));
          } else {
            bool conflict = false;
            for (int32_t sa : storeAddrs)
              conflict |= sa == a(port.channel);
            grant = !conflict;
          }
        }
        if (grant)
          ++grants;
        setR(port.channel, grant);
      }
      break;
    }
    case NodeKind::MemResp:
      // response channels are driven by the memory model in the
      // sequential phase; no combinational behavior
      break;
    case NodeKind::AddrQueue: {
      bool enqFire = v(in[0]) && s.queue.size() < n->capacity;
      setR(in[0], s.queue.size() < n->capacity);
      setR(in[1], !s.queue.empty());
      bool conflict = false;
      if (v(in[2])) {
        uint32_t addr = static_cast<uint32_t>(a(in[2]));
        for (uint32_t q : s.queue)
          conflict |= q == addr;
        if (n->combCheck && enqFire && static_cast<uint32_t>(a(in[0])) == addr)
          conflict = true; // combinational compare against the enqueue
      }
      bool pass = v(in[2]) && !conflict;
      setV(out[0], pass, a(in[2]));
      setR(in[2], pass && r(out[0]));
      break;
    }
    case NodeKind::Loop:
    case NodeKind::Gamma:
    case NodeKind::Theta:
    case NodeKind::Lambda:
      throw Error("structural node in simulation");
    }
    return delta;
  }

  void combinationalFixpoint() {
    size_t maxSweeps = channels.size() + nodes.size() + 16;
    for (size_t sweep = 0; sweep < maxSweeps; ++sweep) {
      bool delta = false;
      for (size_t i = 0; i < nodes.size(); ++i)
        delta |= evalNode(i);
      if (!delta)
        return;
    }
    throw Error("combinational fixpoint did not converge");
  }

  // --- sequential phase ----------------------------------------------------

  void mark() { changed = true; }

  void trapOut(TrapKind k, int opId, const std::string &detail) {
    if (trap.kind == TrapKind::None)
      trap = {k, opId, detail};
    done = true;
  }

  void sequential() {
    for (size_t c = 0; c < channels.size(); ++c)
      fired[c] = V[c] && R[c] && !channels[c].memResponse ? 1 : 0;

    auto f = [&](int ch) { return ch >= 0 && fired[static_cast<size_t>(ch)]; };

    // memory grants must be read before node updates overwrite signals
    struct Grant {
      int memIdx;
      int opNode;
      bool isStore;
      int32_t addr, data;
    };
    std::vector<Grant> grants;
    for (size_t mi = 0; mi < mems.size(); ++mi)
      for (const auto &port : mems[mi].ports)
        if (fired[static_cast<size_t>(port.channel)])
          grants.push_back({static_cast<int>(mi), port.opNode, port.isStore,
                            A[static_cast<size_t>(port.channel)],
                            B[static_cast<size_t>(port.channel)]});

    for (size_t i = 0; i < nodes.size(); ++i) {
      Node *n = nodes[i];
      NodeState &s = st[i];
      const auto &in = inCh[i];
      const auto &out = outCh[i];
      switch (n->kind) {
      case NodeKind::Source:
        if (f(out[0])) {
          ++s.emitted;
          mark();
        }
        break;
      case NodeKind::Binary:
        if (f(out[0]) && s.poisoned)
          trapOut(TrapKind::DivByZero, -1, "division by zero");
        break;
      case NodeKind::Fork: {
        bool inFired = f(in[0]);
        for (size_t o = 0; o < n->outputs.size(); ++o)
          if (f(out[o]) && !s.done[o]) {
            s.done[o] = 1;
            mark();
          }
        if (inFired) {
          std::fill(s.done.begin(), s.done.end(), 0);
          mark();
        }
        break;
      }
      case NodeKind::StateGate: {
        bool inFired = f(in[0]);
        for (int o = 0; o < 2; ++o)
          if (f(out[static_cast<size_t>(o)]) && !s.done[static_cast<size_t>(o)]) {
            s.done[static_cast<size_t>(o)] = 1;
            mark();
          }
        if (inFired) {
          s.done[0] = s.done[1] = 0;
          mark();
        }
        break;
      }
      case NodeKind::DMux: {
        if (f(in[0])) {
          int sel = A[static_cast<size_t>(in[0])];
          for (size_t j = 1; j < n->inputs.size(); ++j)
            if (static_cast<int>(j) != sel + 1) {
              ++s.owed[j - 1];
              mark();
            }
        }
        for (size_t j = 1; j < n->inputs.size(); ++j) {
          if (f(in[j])) {
            bool selected = f(in[0]) &&
                            A[static_cast<size_t>(in[0])] + 1 ==
                                static_cast<int>(j);
            if (!selected && s.owed[j - 1] > 0) {
              --s.owed[j - 1]; // discarded token
              mark();
            }
          }
        }
        break;
      }
      case NodeKind::Buf: {
        if (n->opaque) {
          bool outF = f(out[0]), inF = f(in[0]);
          if (outF) {
            s.fifo.pop_front();
            mark();
          }
          if (inF) {
            s.fifo.push_back(A[static_cast<size_t>(in[0])]);
            mark();
          }
        } else {
          bool outF = f(out[0]), inF = f(in[0]);
          if (inF && outF) {
            if (!s.fifo.empty()) {
              s.fifo.pop_front();
              s.fifo.push_back(A[static_cast<size_t>(in[0])]);
              mark();
            } // empty: pure pass-through
          } else if (outF) {
            s.fifo.pop_front();
            mark();
          } else if (inF) {
            s.fifo.push_back(A[static_cast<size_t>(in[0])]);
            mark();
          }
        }
        break;
      }
      case NodeKind::PredBuf: {
        bool outF = f(out[0]), inF = f(in[0]);
        if (outF) {
          s.fifo.pop_front();
          mark();
        }
        if (inF) {
          s.fifo.push_back(A[static_cast<size_t>(in[0])]);
          mark();
        }
        break;
      }
      case NodeKind::LoopBuf: {
        if (f(in[0]) && A[static_cast<size_t>(in[0])] == 0 && f(in[1])) {
          s.val = A[static_cast<size_t>(in[1])];
          s.hasVal = true;
          mark();
        }
        break;
      }
      case NodeKind::Observer:
        if (f(in[0])) {
          s.captured = true;
          s.capturedVal = A[static_cast<size_t>(in[0])];
          mark();
        }
        break;
      case NodeKind::AddrQueue: {
        if (f(in[1])) {
          if (s.queue.empty())
            throw Error("ADDR-Q dequeue on empty queue");
          s.queue.pop_front();
          mark();
        }
        if (f(in[0])) {
          s.queue.push_back(static_cast<uint32_t>(A[static_cast<size_t>(in[0])]));
          mark();
        }
        break;
      }
      case NodeKind::Load:
        if (f(out[n->loadDataOut()])) {
          s.slotFull = false;
          mark();
        }
        if (n->hasStatePort && f(out[n->loadStateOut()])) {
          --s.stateTokens;
          mark();
        }
        break;
      case NodeKind::Store:
        if (n->hasStatePort && f(out[n->storeStateOut()])) {
          --s.stateTokens;
          mark();
        }
        break;
      default:
        break;
      }
      if (done)
        return;
    }

    // memory: writes commit now (visible to later cycles), loads are read
    // now and delivered after the configured latency
    for (const Grant &gr : grants) {
      MemoryModel &m = mems[static_cast<size_t>(gr.memIdx)];
      Node *op = nodes[static_cast<size_t>(gr.opNode)];
      uint32_t addr = static_cast<uint32_t>(gr.addr);
      if (addr >= m.contents.size()) {
        trapOut(TrapKind::OutOfBounds, op->memOpId,
                m.array + "[" + std::to_string(gr.addr) + "]");
        return;
      }
      if (gr.isStore) {
        m.contents[addr] = gr.data;
        trace[op->memOpId].push_back({true, addr,
                                      static_cast<uint32_t>(gr.data),
                                      curCycle});
        if (op->hasStatePort)
          ++st[static_cast<size_t>(gr.opNode)].stateTokens;
        mark();
      } else {
        int32_t data = m.contents[addr];
        trace[op->memOpId].push_back({false, addr,
                                      static_cast<uint32_t>(data), curCycle});
        m.inflight.push_back({curCycle + opts.memLatency - 1,
                              gr.opNode, data});
        st[static_cast<size_t>(gr.opNode)].outstanding = true;
        mark();
      }
    }

    // deliveries
    for (auto &m : mems) {
      for (auto it = m.inflight.begin(); it != m.inflight.end();) {
        if (it->deliverAfterCycle <= curCycle) {
          NodeState &ls = st[static_cast<size_t>(it->loadNode)];
          Node *ld = nodes[static_cast<size_t>(it->loadNode)];
          if (ls.slotFull)
            throw Error("load response buffer collision");
          ls.slotFull = true;
          ls.slotVal = it->data;
          ls.outstanding = false;
          if (ld->hasStatePort)
            ++ls.stateTokens;
          it = m.inflight.erase(it);
          mark();
        } else {
          ++it;
        }
      }
    }
  }

  // --- bookkeeping -----------------------------------------------------------

  uint64_t residentTokens() const {
    uint64_t sum = 0;
    for (size_t i = 0; i < nodes.size(); ++i) {
      const NodeState &s = st[i];
      sum += s.fifo.size() + s.queue.size();
      sum += (s.full ? 1 : 0) + (s.slotFull ? 1 : 0) + s.stateTokens;
    }
    return sum;
  }

  // Done once every observer (return value and final array states) has
  // its token and no memory response is in flight.
  bool complete() const {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i]->kind == NodeKind::Observer && !st[i].captured)
        return false;
    for (const auto &m : mems)
      if (!m.inflight.empty())
        return false;
    return true;
  }

  std::vector<std::string> stalledNodes() {
    std::vector<std::string> out;
    for (size_t i = 0; i < nodes.size(); ++i) {
      Node *n = nodes[i];
      std::string waits;
      for (size_t p = 0; p < n->inputs.size(); ++p) {
        int ch = inCh[i][p];
        if (ch < 0 || channels[static_cast<size_t>(ch)].memResponse)
          continue;
        if (V[static_cast<size_t>(ch)] && !R[static_cast<size_t>(ch)])
          waits += " in" + std::to_string(p) + "=blocked";
        if (!V[static_cast<size_t>(ch)])
          waits += " in" + std::to_string(p) + "=empty";
      }
      bool pending = false;
      for (size_t p = 0; p < n->inputs.size(); ++p) {
        int ch = inCh[i][p];
        if (ch >= 0 && V[static_cast<size_t>(ch)] && !R[static_cast<size_t>(ch)])
          pending = true;
      }
      if (pending)
        out.push_back(std::string(nodeKindName(n->kind)) + "[" +
                      std::to_string(n->id) + "]" + waits);
    }
    return out;
  }

  bool stepOnce() {
    if (done)
      return false;
    changed = false;
    try {
      combinationalFixpoint();
      sequential();
    } catch (const Error &e) {
      trapOut(TrapKind::Deadlock, -1, e.what());
      return false;
    }
    peakOccupancy = std::max(peakOccupancy, residentTokens());
    ++curCycle;
    if (done) // trapped inside sequential
      return false;
    if (complete()) {
      done = true;
      return false;
    }
    // A scripted source still holding a token for an upcoming cycle means
    // a quiet cycle is not a deadlock yet.
    bool futureWork = false;
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i]->kind == NodeKind::Source &&
          st[i].emitted < nodes[i]->schedule.size() &&
          nodes[i]->schedule[st[i].emitted].first >= curCycle)
        futureWork = true;
    if (!changed && !futureWork) {
      auto stalls = stalledNodes();
      std::string detail = "no progress; stalled nodes: ";
      for (size_t k = 0; k < stalls.size() && k < 8; ++k)
        detail += (k ? ", " : "") + stalls[k];
      trapOut(TrapKind::Deadlock, -1, detail);
      lastStalls = std::move(stalls);
      return false;
    }
    if (curCycle >= opts.maxCycles) {
      trapOut(TrapKind::MaxCycles, -1,
              "exceeded " + std::to_string(opts.maxCycles) + " cycles");
      return false;
    }
    return true;
  }

  SimResult takeResult() {
    SimResult res;
    res.trap = trap;
    res.trace = std::move(trace);
    res.stalledNodes = std::move(lastStalls);
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i]->kind == NodeKind::Observer &&
          nodes[i]->observerRole == ObserverRole::Result && st[i].captured)
        res.returnValue = st[i].capturedVal;
    }
    for (const auto &m : mems)
      res.memories[m.array] = m.contents;
    // arrays never touched by any op keep their initial contents
    for (const auto &[name, len] : g.arrayLengths)
      if (!res.memories.count(name))
        res.memories[name] = initUntouched(name, len);

    res.stats.cycles = curCycle;
    res.stats.configFingerprint = opts.configFingerprint;
    res.stats.peakOccupancy = peakOccupancy;
    for (Node *n : nodes) {
      res.stats.nodeCounts[nodeKindName(n->kind)]++;
      if (n->kind == NodeKind::Buf || n->kind == NodeKind::AddrQueue)
        res.stats.bufferSlots += static_cast<int>(n->capacity);
      else if (n->kind == NodeKind::PredBuf || n->kind == NodeKind::LoopBuf)
        res.stats.bufferSlots += 1;
    }
    return res;
  }

  std::vector<int32_t> initUntouched(const std::string &name, int len) {
    auto it = initialArrays.find(name);
    std::vector<int32_t> v(static_cast<size_t>(len), 0);
    if (it != initialArrays.end())
      for (size_t k = 0; k < v.size() && k < it->second.size(); ++k)
        v[k] = it->second[k];
    return v;
  }

  std::map<std::string, std::vector<int32_t>> initialArrays;
  std::vector<std::string> lastStalls;
};

SimEngine::SimEngine(Graph &g, const SimOptions &opts,
                     const std::map<std::string, std::vector<int32_t>> &arrays,
                     const std::map<std::string, int32_t> &args)
    : impl(std::make_unique<Impl>(g, opts, arrays, args)) {
  impl->initialArrays = arrays;
}

SimEngine::~SimEngine() = default;

bool SimEngine::step() { return impl->stepOnce(); }
bool SimEngine::finished() const { return impl->done; }
uint64_t SimEngine::cycle() const { return impl->curCycle; }
SimResult SimEngine::takeResult() { return impl->takeResult(); }
int SimEngine::channelCount() const {
  return static_cast<int>(impl->channels.size());
}
int SimEngine::occupiedChannels() const {
  int n = 0;
  for (size_t c = 0; c < impl->channels.size(); ++c)
    if (impl->V[c])
      ++n;
  return n;
}

SimEngine::NodeProbe SimEngine::probeNode(int nodeId) const {
  NodeProbe p;
  auto it = impl->byNodeId.find(nodeId);
  if (it == impl->byNodeId.end())
    return p;
  const NodeState &s = impl->st[static_cast<size_t>(it->second)];
  p.exists = true;
  p.full = s.full || s.slotFull || s.hasVal || !s.fifo.empty();
  p.value = !s.fifo.empty() ? s.fifo.front()
                            : (s.slotFull ? s.slotVal : s.val);
  p.queueSize = s.queue.size() + s.fifo.size();
  return p;
}

SimResult simulate(Graph &g, const SimOptions &opts,
                   const std::map<std::string, std::vector<int32_t>> &arrays,
                   const std::map<std::string, int32_t> &args) {
  SimEngine engine(g, opts, arrays, args);
  while (engine.step()) {
  }
  return engine.takeResult();
}

} // namespace elk
