#ifndef ELK_IR_HPP
#define ELK_IR_HPP

#include "elk/common.hpp"
#include "elk/ops.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace elk {

// ---------------------------------------------------------------------------
// Port types
// ---------------------------------------------------------------------------

enum class TypeKind : uint8_t { Value, Control, MemState, MemRequest, MemResponse };

struct PortType {
  TypeKind kind = TypeKind::Value;
  uint32_t param = 32; // Value: bit width; Control: arity
  bool operator==(const PortType &) const = default;
};

inline PortType valueType() { return {TypeKind::Value, 32}; }
inline PortType controlType(uint32_t arity) { return {TypeKind::Control, arity}; }
inline PortType memStateType() { return {TypeKind::MemState, 0}; }
inline PortType memRequestType() { return {TypeKind::MemRequest, 0}; }
inline PortType memResponseType() { return {TypeKind::MemResponse, 0}; }

std::string portTypeName(const PortType &t);

// ---------------------------------------------------------------------------
// Node kinds
// ---------------------------------------------------------------------------

// The source (region) dialect and the elastic (netlist) dialect share one
// graph substrate; simple operations are common to both. Structural control
// flow (Gamma/Theta) exists only in the source dialect; the handshake
// components only in the netlist.
enum class NodeKind : uint8_t {
  // common simple operations
  Constant, // () -> value
  Binary,   // (value, value) -> value
  Compare,  // (value, value) -> control(2)
  Load,     // source: (addr, state) -> (data, state)
            // elastic: (addr [, state]) -> (data [, state]) + req/resp ports
  Store,    // source: (addr, data, state) -> (state)
            // elastic: (addr, data [, state]) -> ([state]) + req port
  // source structural nodes
  Gamma,  // (pred, v...) with k subregions
  Theta,  // (v...) with 1 subregion; result 0 is the predicate
  Lambda, // kernel shell with 1 body region
  // elastic components
  Branch,    // (ctl, data) -> data x arity
  NdMux,     // (ctl, data x arity) -> data      non-discarding
  DMux,      // (ctl, data x arity) -> data      discards non-selected
  Fork,      // (x) -> x * n
  Sink,      // (x) -> ()
  Buf,       // (x) -> x  capacity + opaque flag
  PredBuf,   // (ctl) -> ctl  opaque, pre-initialized with a termination token
  LoopBuf,   // (trigger ctl, data) -> data  loop-constant buffer
  Loop,      // structural loop shell with 1 subregion (HLS-LOOP)
  MemReq,    // (request x n) -> ()   per-array request arbiter
  MemResp,   // () -> (response x n) per-array response router
  AddrQueue, // (enq, deq, check-in) -> (check-out)
  StateGate, // (primary, trigger) -> (primary, trigger)
  Source,    // () -> x  scheduled token source (kernel arguments, tests)
  Observer,  // (x) -> () always-ready capture sink (results, final states)
};

const char *nodeKindName(NodeKind k);

enum class SgRole : uint8_t { None, Sg1, Sg2, Sg3, Sg4, Merge };
const char *sgRoleName(SgRole r);

enum class ObserverRole : uint8_t { None, Result, ArrayState };

// ---------------------------------------------------------------------------
// Regions, ports, nodes
// ---------------------------------------------------------------------------

struct Node;
struct Region;
class Graph;

// Origin of a value: a node output or a region argument.
struct OriginRef {
  Node *node = nullptr;
  Region *region = nullptr;
  int index = -1;
  bool valid() const { return (node || region) && index >= 0; }
  bool operator==(const OriginRef &) const = default;
};

// Consumer of a value: a node input or a region result.
struct UserRef {
  Node *node = nullptr;
  Region *region = nullptr;
  int index = -1;
  bool valid() const { return (node || region) && index >= 0; }
  bool operator==(const UserRef &) const = default;
};

// Role annotations for region boundary ports.
struct ArgBind {
  enum class Kind : uint8_t {
    None,
    ScalarArg,    // lambda body: scalar parameter (name)
    ArrayState,   // lambda body: initial memory state of array (name)
    LoopInput,    // loop region: routed from node input `index`
    LoopBackedge, // loop region: paired with a backedge result (pair id)
  };
  Kind kind = Kind::None;
  std::string name;
  int index = -1; // LoopInput: node input index; LoopBackedge: pair id
};

struct ResBind {
  enum class Kind : uint8_t {
    None,
    ReturnValue,  // lambda body: kernel return value
    ArrayState,   // lambda body: final memory state of array (name)
    LoopOutput,   // loop region: routed to node output `index`
    LoopBackedge, // loop region: paired with a backedge argument (pair id)
  };
  Kind kind = Kind::None;
  std::string name;
  int index = -1;
};

struct Input {
  PortType type;
  OriginRef origin; // may be invalid during construction
};

struct Output {
  PortType type;
  std::vector<UserRef> users;
};

struct Argument {
  PortType type;
  std::vector<UserRef> users;
  ArgBind bind;
};

struct Result {
  PortType type;
  OriginRef origin;
  ResBind bind;
};

struct Region {
  Node *owner = nullptr; // structural node owning this region (null: root)
  int indexInOwner = 0;
  Graph *graph = nullptr;
  std::vector<std::unique_ptr<Node>> nodes;
  std::vector<Argument> arguments;
  std::vector<Result> results;

  int addArgument(PortType t, ArgBind bind = {});
  int addResult(PortType t, OriginRef origin, ResBind bind = {});
};

struct Node {
  int id = -1;
  NodeKind kind{};
  Region *region = nullptr;
  std::vector<Input> inputs;
  std::vector<Output> outputs;
  std::vector<std::unique_ptr<Region>> regions; // structural nodes only

  // kind-specific payload
  int32_t value = 0;          // Constant
  BinaryOp binOp{};           // Binary
  CmpOp cmpOp{};              // Compare
  std::string array;          // Load/Store/MemReq/MemResp/AddrQueue
  int memOpId = -1;           // Load/Store static site id
  bool hasStatePort = true;   // elastic Load/Store: still on a state chain
  bool memLowered = false;    // Load/Store: request/response ports attached
  uint32_t capacity = 1;      // Buf/AddrQueue
  bool opaque = true;         // Buf
  bool onBackedge = false;    // Buf inserted on a loop back edge
  SgRole sgRole = SgRole::None;
  int pairedStore = -1;       // AddrQueue: memOpId of the store
  int pairedLoad = -1;        // AddrQueue: memOpId of the load
  bool combCheck = true;      // AddrQueue: compare against same-cycle enqueue
  ObserverRole observerRole = ObserverRole::None;
  std::vector<std::pair<uint64_t, int32_t>> schedule; // Source tokens
  std::string argName; // Source: kernel argument / array-state name

  Region *subregion(int i = 0) const { return regions.at(static_cast<size_t>(i)).get(); }
  OriginRef out(int i) { return OriginRef{this, nullptr, i}; }
  UserRef in(int i) { return UserRef{this, nullptr, i}; }

  // Elastic Load/Store port index helpers (after memory lowering).
  int loadAddrIn() const { return 0; }
  int loadStateIn() const { return 1; }      // only if hasStatePort
  int loadRespIn() const { return hasStatePort ? 2 : 1; }
  int loadDataOut() const { return 0; }
  int loadStateOut() const { return 1; }     // only if hasStatePort
  int loadReqOut() const { return hasStatePort ? 2 : 1; }
  int storeAddrIn() const { return 0; }
  int storeDataIn() const { return 1; }
  int storeStateIn() const { return 2; }     // only if hasStatePort
  int storeStateOut() const { return 0; }    // only if hasStatePort
  int storeReqOut() const { return hasStatePort ? 1 : 0; }
};

class Graph {
public:
  Graph();
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;
  Graph(Graph &&) = default;
  Graph &operator=(Graph &&) = default;

  Region &root() { return *rootRegion; }
  const Region &root() const { return *rootRegion; }

  // kernel metadata carried alongside the graph
  std::string kernelName;
  std::map<std::string, int> arrayLengths;

  Node *addNode(Region &r, NodeKind kind);
  Region *addRegion(Node &n);

  // Edge management. connect() appends a user; moveUsers redirects all
  // users of `from` to `to`.
  void connect(OriginRef from, UserRef to);
  void disconnect(UserRef u);
  void moveUsers(OriginRef from, OriginRef to);
  void eraseNode(Node *n); // node must have no connected users/origins

  static PortType originType(const OriginRef &o);
  static PortType userType(const UserRef &u);
  static OriginRef userOrigin(const UserRef &u);
  static std::vector<UserRef> originUsers(const OriginRef &o);

  int nextNodeId() const { return nextId; }

  // Deterministic traversal of every node, pre-order over regions.
  void forEachNode(const std::function<void(Node *)> &fn) const;
  std::vector<Node *> allNodes() const;

private:
  std::unique_ptr<Region> rootRegion;
  int nextId = 0;
};

// Convenience constructors for common node shapes (used by passes/tests).
Node *makeConstant(Graph &g, Region &r, int32_t value);
Node *makeBinary(Graph &g, Region &r, BinaryOp op, OriginRef a, OriginRef b);
Node *makeCompare(Graph &g, Region &r, CmpOp op, OriginRef a, OriginRef b);
Node *makeFork(Graph &g, Region &r, OriginRef in, int n);
Node *makeSink(Graph &g, Region &r, OriginRef in);
Node *makeBuf(Graph &g, Region &r, OriginRef in, uint32_t capacity, bool opaque);
Node *makeStateGate(Graph &g, Region &r, SgRole role, OriginRef primary,
                    OriginRef trigger);

// Topological order of nodes within one region; back edges of Loop regions
// are implicit so every region is a DAG. Throws Error on an intra-region
// cycle.
std::vector<Node *> topoOrder(Region &r);

} // namespace elk

#endif
