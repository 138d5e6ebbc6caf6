#include "elk/build.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace elk {

// ---------------------------------------------------------------------------
// Port surgery
// ---------------------------------------------------------------------------

void removeInput(Graph &g, Node *n, int k) {
  (void)g;
  assert(!n->inputs.at(static_cast<size_t>(k)).origin.valid() &&
         "removing a connected input");
  n->inputs.erase(n->inputs.begin() + k);
  for (size_t j = static_cast<size_t>(k); j < n->inputs.size(); ++j) {
    OriginRef o = n->inputs[j].origin;
    if (!o.valid())
      continue;
    auto &users = o.node ? o.node->outputs[static_cast<size_t>(o.index)].users
                         : o.region->arguments[static_cast<size_t>(o.index)].users;
    for (auto &u : users)
      if (u.node == n && u.index == static_cast<int>(j) + 1)
        u.index = static_cast<int>(j);
  }
}

void removeOutput(Graph &g, Node *n, int k) {
  assert(n->outputs.at(static_cast<size_t>(k)).users.empty() &&
         "removing an output with users");
  n->outputs.erase(n->outputs.begin() + k);
  for (size_t j = static_cast<size_t>(k); j < n->outputs.size(); ++j) {
    for (auto &u : n->outputs[j].users) {
      if (u.node)
        u.node->inputs[static_cast<size_t>(u.index)].origin.index =
            static_cast<int>(j);
      else
        u.region->results[static_cast<size_t>(u.index)].origin.index =
            static_cast<int>(j);
    }
  }
  (void)g;
}

void removeArgument(Graph &g, Region *r, int k) {
  assert(r->arguments.at(static_cast<size_t>(k)).users.empty() &&
         "removing an argument with users");
  r->arguments.erase(r->arguments.begin() + k);
  for (size_t j = static_cast<size_t>(k); j < r->arguments.size(); ++j) {
    for (auto &u : r->arguments[j].users) {
      if (u.node)
        u.node->inputs[static_cast<size_t>(u.index)].origin.index =
            static_cast<int>(j);
      else
        u.region->results[static_cast<size_t>(u.index)].origin.index =
            static_cast<int>(j);
    }
  }
  (void)g;
}

void removeResult(Graph &g, Region *r, int k) {
  (void)g;
  assert(!r->results.at(static_cast<size_t>(k)).origin.valid() &&
         "removing a connected result");
  r->results.erase(r->results.begin() + k);
  for (size_t j = static_cast<size_t>(k); j < r->results.size(); ++j) {
    OriginRef o = r->results[j].origin;
    if (!o.valid())
      continue;
    auto &users = o.node ? o.node->outputs[static_cast<size_t>(o.index)].users
                         : o.region->arguments[static_cast<size_t>(o.index)].users;
    for (auto &u : users)
      if (u.region == r && u.index == static_cast<int>(j) + 1)
        u.index = static_cast<int>(j);
  }
}

Node *findLambda(Graph &g) {
  for (const auto &n : g.root().nodes)
    if (n->kind == NodeKind::Lambda)
      return n.get();
  throw Error("graph has no lambda node");
}

// ---------------------------------------------------------------------------
// AST -> RVSDG
// ---------------------------------------------------------------------------

namespace {

// The global memory-state chain threads the environment like a scalar
// under this reserved name.
const char *kStateVar = "@state";

struct Binding {
  OriginRef origin;
  bool tainted = false; // dummy-initialized loop variable, unread so far
};

using Env = std::map<std::string, Binding>;

// Flow-aware use analysis for gamma/theta shaping: `readsBeforeWrite`
// holds scalars (and the state chain) whose value flows in from outside;
// `maybeWritten` holds everything assigned on some path. `written` tracks
// definite assignment along the statement flow (both branches of an if;
// a do-while body runs at least once).
struct UseSet {
  std::set<std::string> readsBeforeWrite;
  std::set<std::string> maybeWritten;
};

void flowExpr(const Expr &e, std::set<std::string> &written, UseSet &u) {
  switch (e.kind) {
  case Expr::Kind::ScalarRef:
    if (!written.count(e.name))
      u.readsBeforeWrite.insert(e.name);
    break;
  case Expr::Kind::ArrayLoad:
    flowExpr(*e.lhs, written, u);
    if (!written.count(kStateVar))
      u.readsBeforeWrite.insert(kStateVar);
    u.maybeWritten.insert(kStateVar);
    written.insert(kStateVar); // the load advances the chain
    break;
  case Expr::Kind::Binary:
  case Expr::Kind::Compare:
    flowExpr(*e.lhs, written, u);
    flowExpr(*e.rhs, written, u);
    break;
  case Expr::Kind::IntLit:
    break;
  }
}

std::set<std::string> flowStmts(const std::vector<StmtPtr> &body,
                                std::set<std::string> written, UseSet &u) {
  for (const auto &sp : body) {
    const Stmt &s = *sp;
    switch (s.kind) {
    case Stmt::Kind::Assign:
      flowExpr(*s.value, written, u);
      written.insert(s.target);
      u.maybeWritten.insert(s.target);
      break;
    case Stmt::Kind::ArrayStore:
      flowExpr(*s.index, written, u);
      flowExpr(*s.value, written, u);
      if (!written.count(kStateVar))
        u.readsBeforeWrite.insert(kStateVar);
      u.maybeWritten.insert(kStateVar);
      written.insert(kStateVar);
      break;
    case Stmt::Kind::If: {
      flowExpr(*s.cond, written, u);
      std::set<std::string> t = flowStmts(s.thenBody, written, u);
      std::set<std::string> e2 = flowStmts(s.elseBody, written, u);
      std::set<std::string> merged;
      for (const auto &v : t)
        if (e2.count(v))
          merged.insert(v);
      written = std::move(merged);
      break;
    }
    case Stmt::Kind::DoWhile: {
      std::set<std::string> b = flowStmts(s.thenBody, written, u);
      flowExpr(*s.cond, b, u);
      written = std::move(b);
      break;
    }
    case Stmt::Kind::Return:
      flowExpr(*s.value, written, u);
      break;
    }
  }
  return written;
}

class Builder {
public:
  explicit Builder(const Kernel &k) : kernel(k) {}

  Graph build() {
    Graph g;
    graph = &g;
    g.kernelName = kernel.name;

    Node *lambda = g.addNode(g.root(), NodeKind::Lambda);
    Region *body = g.addRegion(*lambda);

    Env env;
    for (const auto &p : kernel.params) {
      if (p.isArray) {
        g.arrayLengths[p.name] = p.length;
      } else {
        int idx = body->addArgument(valueType(),
                                    {ArgBind::Kind::ScalarArg, p.name, -1});
        env[p.name] = {OriginRef{nullptr, body, idx}, false};
      }
    }
    if (kernel.memOpCount > 0) {
      int idx = body->addArgument(memStateType(),
                                  {ArgBind::Kind::ArrayState, "", -1});
      env[kStateVar] = {OriginRef{nullptr, body, idx}, false};
    }

    OriginRef ret = buildStmts(kernel.body, *body, env);
    if (ret.valid())
      body->addResult(valueType(), ret, {ResBind::Kind::ReturnValue, "", -1});
    if (kernel.memOpCount > 0)
      body->addResult(memStateType(), env[kStateVar].origin,
                      {ResBind::Kind::ArrayState, "", -1});
    return g;
  }

private:
  OriginRef lookup(Env &env, const std::string &name, SourceLoc loc) {
    auto it = env.find(name);
    if (it == env.end() || it->second.tainted)
      throw Error("read of uninitialized scalar '" + name + "'", loc);
    return it->second.origin;
  }

  // Returns the origin of the return value if a Return was built.
  OriginRef buildStmts(const std::vector<StmtPtr> &body, Region &r, Env &env) {
    OriginRef ret;
    for (const auto &sp : body) {
      const Stmt &s = *sp;
      switch (s.kind) {
      case Stmt::Kind::Assign:
        env[s.target] = {buildValue(*s.value, r, env), false};
        break;
      case Stmt::Kind::ArrayStore: {
        OriginRef idx = buildValue(*s.index, r, env);
        OriginRef val = buildValue(*s.value, r, env);
        Node *st = graph->addNode(r, NodeKind::Store);
        st->array = s.target;
        st->memOpId = s.memOpId;
        st->inputs.push_back({valueType(), {}});
        st->inputs.push_back({valueType(), {}});
        st->inputs.push_back({memStateType(), {}});
        st->outputs.push_back({memStateType(), {}});
        graph->connect(idx, st->in(0));
        graph->connect(val, st->in(1));
        graph->connect(lookup(env, kStateVar, s.loc), st->in(2));
        env[kStateVar] = {st->out(0), false};
        break;
      }
      case Stmt::Kind::If:
        buildIf(s, r, env);
        break;
      case Stmt::Kind::DoWhile:
        buildDoWhile(s, r, env);
        break;
      case Stmt::Kind::Return:
        ret = buildValue(*s.value, r, env);
        break;
      }
    }
    return ret;
  }

  // A condition yields a control(2) token: comparisons directly, any other
  // expression via != 0.
  OriginRef buildPredicate(const Expr &e, Region &r, Env &env) {
    if (e.kind == Expr::Kind::Compare) {
      OriginRef a = buildValue(*e.lhs, r, env);
      OriginRef b = buildValue(*e.rhs, r, env);
      return makeCompare(*graph, r, e.cmpOp, a, b)->out(0);
    }
    OriginRef v = buildValue(e, r, env);
    OriginRef zero = makeConstant(*graph, r, 0)->out(0);
    return makeCompare(*graph, r, CmpOp::Ne, v, zero)->out(0);
  }

  OriginRef buildValue(const Expr &e, Region &r, Env &env) {
    switch (e.kind) {
    case Expr::Kind::IntLit:
      return makeConstant(*graph, r, e.value)->out(0);
    case Expr::Kind::ScalarRef:
      return lookup(env, e.name, e.loc);
    case Expr::Kind::ArrayLoad: {
      OriginRef idx = buildValue(*e.lhs, r, env);
      Node *ld = graph->addNode(r, NodeKind::Load);
      ld->array = e.name;
      ld->memOpId = e.memOpId;
      ld->inputs.push_back({valueType(), {}});
      ld->inputs.push_back({memStateType(), {}});
      ld->outputs.push_back({valueType(), {}});
      ld->outputs.push_back({memStateType(), {}});
      graph->connect(idx, ld->in(0));
      graph->connect(lookup(env, kStateVar, e.loc), ld->in(1));
      env[kStateVar] = {ld->out(1), false};
      return ld->out(0);
    }
    case Expr::Kind::Binary: {
      OriginRef a = buildValue(*e.lhs, r, env);
      OriginRef b = buildValue(*e.rhs, r, env);
      return makeBinary(*graph, r, e.binOp, a, b)->out(0);
    }
    case Expr::Kind::Compare: {
      // Comparison in value context: a tiny speculative gamma selecting
      // the constants 0 and 1.
      OriginRef pred = buildPredicate(e, r, env);
      Node *gamma = graph->addNode(r, NodeKind::Gamma);
      gamma->inputs.push_back({controlType(2), {}});
      graph->connect(pred, gamma->in(0));
      for (int s = 0; s < 2; ++s) {
        Region *sub = graph->addRegion(*gamma);
        Node *c = makeConstant(*graph, *sub, s);
        sub->addResult(valueType(), c->out(0));
      }
      gamma->outputs.push_back({valueType(), {}});
      return gamma->out(0);
    }
    }
    throw Error("unreachable expression kind");
  }

  void buildIf(const Stmt &s, Region &r, Env &env) {
    OriginRef pred = buildPredicate(*s.cond, r, env);

    UseSet thenUses, elseUses;
    std::set<std::string> thenWritten = flowStmts(s.thenBody, {}, thenUses);
    std::set<std::string> elseWritten = flowStmts(s.elseBody, {}, elseUses);

    // Gamma inputs: every scalar (and the state chain) whose value flows
    // into a branch, plus written ones with an existing definition for
    // pass-through. Outputs: variables defined on every path afterwards.
    std::vector<std::string> varsIn, varsOut;
    std::set<std::string> seen;
    auto consider = [&](const std::string &name) {
      if (seen.count(name))
        return;
      seen.insert(name);
      bool defined = env.count(name) && !env[name].tainted;
      bool read = thenUses.readsBeforeWrite.count(name) > 0 ||
                  elseUses.readsBeforeWrite.count(name) > 0;
      bool written = thenUses.maybeWritten.count(name) > 0 ||
                     elseUses.maybeWritten.count(name) > 0;
      bool bothWritten =
          thenWritten.count(name) > 0 && elseWritten.count(name) > 0;
      if (read && !defined)
        throw Error("read of uninitialized scalar '" + name + "'", s.loc);
      if (read || (written && defined))
        varsIn.push_back(name);
      if (written && (defined || bothWritten))
        varsOut.push_back(name);
      else if (written)
        env.erase(name); // defined on one path only; unusable afterwards
    };
    // Deterministic order: incoming reads then writes, each sorted.
    for (const auto &n : thenUses.readsBeforeWrite)
      consider(n);
    for (const auto &n : elseUses.readsBeforeWrite)
      consider(n);
    for (const auto &n : thenUses.maybeWritten)
      consider(n);
    for (const auto &n : elseUses.maybeWritten)
      consider(n);

    Node *gamma = graph->addNode(r, NodeKind::Gamma);
    gamma->inputs.push_back({controlType(2), {}});
    graph->connect(pred, gamma->in(0));
    for (const auto &name : varsIn) {
      OriginRef o = env[name].origin;
      gamma->inputs.push_back({Graph::originType(o), {}});
      graph->connect(o, gamma->in(static_cast<int>(gamma->inputs.size()) - 1));
    }

    // Subregion 0 is the else branch, 1 the then branch: the predicate
    // token value selects the region index.
    for (int sub = 0; sub < 2; ++sub) {
      Region *reg = graph->addRegion(*gamma);
      Env inner;
      for (size_t i = 0; i < varsIn.size(); ++i) {
        int idx = reg->addArgument(Graph::originType(env[varsIn[i]].origin));
        inner[varsIn[i]] = {OriginRef{nullptr, reg, idx}, false};
      }
      buildStmts(sub == 1 ? s.thenBody : s.elseBody, *reg, inner);
      for (const auto &name : varsOut) {
        auto it = inner.find(name);
        if (it == inner.end() || it->second.tainted)
          throw Error("scalar '" + name + "' not defined on all paths", s.loc);
        reg->addResult(Graph::originType(it->second.origin), it->second.origin);
      }
    }

    for (size_t i = 0; i < varsOut.size(); ++i) {
      PortType t = gamma->subregion(0)->results[i].type;
      gamma->outputs.push_back({t, {}});
      env[varsOut[i]] = {gamma->out(static_cast<int>(i)), false};
    }
  }

  void buildDoWhile(const Stmt &s, Region &r, Env &env) {
    UseSet uses;
    std::set<std::string> bodyWritten = flowStmts(s.thenBody, {}, uses);
    flowExpr(*s.cond, bodyWritten, uses);

    // Loop variables: every scalar (and the state chain) referenced
    // inside. A value read before any write must be defined outside (it
    // is genuinely consumed on the first iteration); variables first
    // defined inside get a dummy initial value that is never observed.
    std::vector<std::string> vars;
    std::set<std::string> seen;
    std::set<std::string> taintedInit;
    auto consider = [&](const std::string &name, bool readFirst) {
      if (seen.count(name))
        return;
      seen.insert(name);
      bool defined = env.count(name) && !env[name].tainted;
      if (!defined) {
        if (readFirst)
          throw Error("read of uninitialized scalar '" + name + "'", s.loc);
        taintedInit.insert(name);
      }
      vars.push_back(name);
    };
    for (const auto &n : uses.readsBeforeWrite)
      consider(n, true);
    for (const auto &n : uses.maybeWritten)
      consider(n, false);

    if (vars.empty())
      throw Error("loop with no loop variables", s.loc);

    Node *theta = graph->addNode(r, NodeKind::Theta);
    Region *body = graph->addRegion(*theta);
    Env inner;
    for (const auto &name : vars) {
      OriginRef init;
      PortType t = name == kStateVar ? memStateType() : valueType();
      if (taintedInit.count(name))
        init = makeConstant(*graph, r, 0)->out(0);
      else {
        init = env[name].origin;
        t = Graph::originType(init);
      }
      theta->inputs.push_back({t, {}});
      graph->connect(init, theta->in(static_cast<int>(theta->inputs.size()) - 1));
      int idx = body->addArgument(t);
      inner[name] = {OriginRef{nullptr, body, idx},
                     taintedInit.count(name) > 0};
    }

    buildStmts(s.thenBody, *body, inner);
    OriginRef pred = buildPredicate(*s.cond, *body, inner);

    // Result 0 is the continuation predicate; loop variable i maps to
    // result i+1 and output i.
    body->addResult(controlType(2), pred);
    for (const auto &name : vars) {
      auto it = inner.find(name);
      if (it == inner.end() || it->second.tainted) {
        // Never (re)assigned on some path; keep the argument value.
        size_t pos =
            static_cast<size_t>(std::find(vars.begin(), vars.end(), name) -
                                vars.begin());
        body->addResult(body->arguments[pos].type,
                        OriginRef{nullptr, body, static_cast<int>(pos)});
      } else {
        body->addResult(Graph::originType(it->second.origin),
                        it->second.origin);
      }
    }
    for (size_t i = 0; i < vars.size(); ++i) {
      theta->outputs.push_back({body->arguments[i].type, {}});
      bool wasTaintedOnly =
          taintedInit.count(vars[i]) &&
          (!inner.count(vars[i]) || inner[vars[i]].tainted);
      env[vars[i]] = {theta->out(static_cast<int>(i)), wasTaintedOnly};
    }
  }

  const Kernel &kernel;
  Graph *graph = nullptr;
};

} // namespace

Graph buildRvsdg(const Kernel &k) {
  Builder b(k);
  return b.build();
}

// ---------------------------------------------------------------------------
// State-edge separation
// ---------------------------------------------------------------------------

namespace {

struct ChainElem {
  Node *node = nullptr;
  UserRef entry;    // state input on the node
  OriginRef exit;   // state output of the node
};

struct ChainWalk {
  std::vector<ChainElem> elems;
  UserRef exitUser; // region result consuming the chain
};

OriginRef stateExitOf(Node *n, const UserRef &entry) {
  switch (n->kind) {
  case NodeKind::Load:
    return n->out(1);
  case NodeKind::Store:
    return n->out(0);
  case NodeKind::Theta:
    return n->out(entry.index);
  case NodeKind::Gamma: {
    // Follow the chain inside subregion 0 to find the matching result.
    Region *sub = n->subregion(0);
    OriginRef o{nullptr, sub, entry.index - 1};
    for (;;) {
      auto users = Graph::originUsers(o);
      assert(users.size() == 1 && "state chain must be a path");
      UserRef u = users[0];
      if (u.region)
        return n->out(u.index);
      o = stateExitOf(u.node, u);
    }
  }
  default:
    throw Error("unexpected node on state chain: " +
                std::string(nodeKindName(n->kind)));
  }
}

ChainWalk collectChain(OriginRef start) {
  ChainWalk w;
  OriginRef o = start;
  for (;;) {
    auto users = Graph::originUsers(o);
    assert(users.size() == 1 && "state chain must be a path");
    UserRef u = users[0];
    if (u.region) {
      w.exitUser = u;
      return w;
    }
    ChainElem e;
    e.node = u.node;
    e.entry = u;
    e.exit = stateExitOf(u.node, u);
    w.elems.push_back(e);
    o = e.exit;
  }
}

void arraysTouched(Node *n, std::set<std::string> &out) {
  if (n->kind == NodeKind::Load || n->kind == NodeKind::Store) {
    out.insert(n->array);
    return;
  }
  for (const auto &sub : n->regions)
    for (const auto &inner : sub->nodes)
      arraysTouched(inner.get(), out);
}

struct Removal {
  Node *node = nullptr;
  Region *region = nullptr;
  enum class What { Input, Output, Argument, Result } what{};
  int index = 0;
};

class Separator {
public:
  explicit Separator(Graph &g) : g(g) {}

  void run() {
    Node *lambda = findLambda(g);
    Region *body = lambda->subregion(0);

    int origArg = -1;
    for (size_t i = 0; i < body->arguments.size(); ++i)
      if (body->arguments[i].bind.kind == ArgBind::Kind::ArrayState)
        origArg = static_cast<int>(i);
    if (origArg < 0)
      return; // no memory operations

    std::set<std::string> arrays;
    g.forEachNode([&](Node *n) {
      if (n->kind == NodeKind::Load || n->kind == NodeKind::Store)
        arrays.insert(n->array);
    });

    if (arrays.size() <= 1) {
      // Single array: relabel the existing chain.
      body->arguments[static_cast<size_t>(origArg)].bind.name =
          arrays.empty() ? "" : *arrays.begin();
      for (auto &res : body->results)
        if (res.bind.kind == ResBind::Kind::ArrayState)
          res.bind.name = arrays.empty() ? "" : *arrays.begin();
      return;
    }

    std::map<std::string, OriginRef> cur;
    for (const auto &a : arrays) {
      int idx = body->addArgument(memStateType(),
                                  {ArgBind::Kind::ArrayState, a, -1});
      cur[a] = OriginRef{nullptr, body, idx};
    }

    OriginRef start{nullptr, body, origArg};
    UserRef exitUser = splitRegion(*body, start, cur);

    assert(exitUser.region == body);
    int origRes = exitUser.index;
    g.disconnect(exitUser);
    for (const auto &a : arrays)
      body->addResult(memStateType(), cur[a],
                      {ResBind::Kind::ArrayState, a, -1});

    removals.push_back({nullptr, body, Removal::What::Result, origRes});
    removals.push_back({nullptr, body, Removal::What::Argument, origArg});

    for (const auto &rm : removals) {
      switch (rm.what) {
      case Removal::What::Input:
        removeInput(g, rm.node, rm.index);
        break;
      case Removal::What::Output:
        removeOutput(g, rm.node, rm.index);
        break;
      case Removal::What::Argument:
        removeArgument(g, rm.region, rm.index);
        break;
      case Removal::What::Result:
        removeResult(g, rm.region, rm.index);
        break;
      }
    }
  }

private:
  // Rewires the chain elements of `r` onto per-array chains. `cur` holds
  // the live head origin per array and is updated in place. Returns the
  // original chain's exit user (still connected).
  UserRef splitRegion(Region &r, OriginRef origStart,
                      std::map<std::string, OriginRef> &cur) {
    (void)r;
    ChainWalk walk = collectChain(origStart);
    for (const ChainElem &e : walk.elems) {
      switch (e.node->kind) {
      case NodeKind::Load:
      case NodeKind::Store: {
        const std::string &a = e.node->array;
        g.disconnect(e.entry);
        g.connect(cur[a], e.entry);
        cur[a] = e.exit;
        break;
      }
      case NodeKind::Gamma:
        splitGamma(e, cur);
        break;
      case NodeKind::Theta:
        splitTheta(e, cur);
        break;
      default:
        throw Error("unexpected node on state chain");
      }
    }
    return walk.exitUser;
  }

  void splitGamma(const ChainElem &e, std::map<std::string, OriginRef> &cur) {
    Node *gamma = e.node;
    std::set<std::string> touched;
    arraysTouched(gamma, touched);

    int origIn = e.entry.index;
    int origArgIdx = origIn - 1;
    int origResIdx = -1;

    std::map<std::string, int> newIn, newOut;
    for (const auto &a : touched) {
      gamma->inputs.push_back({memStateType(), {}});
      newIn[a] = static_cast<int>(gamma->inputs.size()) - 1;
    }

    for (auto &subPtr : gamma->regions) {
      Region *sub = subPtr.get();
      std::map<std::string, OriginRef> inner;
      for (const auto &a : touched) {
        int idx = sub->addArgument(memStateType());
        inner[a] = OriginRef{nullptr, sub, idx};
      }
      UserRef exitUser =
          splitRegion(*sub, OriginRef{nullptr, sub, origArgIdx}, inner);
      assert(exitUser.region == sub);
      if (origResIdx < 0)
        origResIdx = exitUser.index;
      assert(exitUser.index == origResIdx && "chain exits differ per region");
      g.disconnect(exitUser);
      for (const auto &a : touched)
        sub->addResult(memStateType(), inner[a]);
      removals.push_back({nullptr, sub, Removal::What::Result, origResIdx});
      removals.push_back({nullptr, sub, Removal::What::Argument, origArgIdx});
    }

    for (const auto &a : touched) {
      gamma->outputs.push_back({memStateType(), {}});
      newOut[a] = static_cast<int>(gamma->outputs.size()) - 1;
    }

    for (const auto &a : touched) {
      g.connect(cur[a], gamma->in(newIn[a]));
      cur[a] = gamma->out(newOut[a]);
    }

    g.disconnect(e.entry);
    removals.push_back({gamma, nullptr, Removal::What::Input, origIn});
    removals.push_back({gamma, nullptr, Removal::What::Output, origResIdx});
  }

  void splitTheta(const ChainElem &e, std::map<std::string, OriginRef> &cur) {
    Node *theta = e.node;
    Region *body = theta->subregion(0);
    std::set<std::string> touched;
    arraysTouched(theta, touched);

    int origIn = e.entry.index; // == argument index == output index
    std::map<std::string, int> newVar;

    std::map<std::string, OriginRef> inner;
    for (const auto &a : touched) {
      theta->inputs.push_back({memStateType(), {}});
      int argIdx = body->addArgument(memStateType());
      newVar[a] = static_cast<int>(theta->inputs.size()) - 1;
      assert(argIdx == newVar[a]);
      inner[a] = OriginRef{nullptr, body, argIdx};
    }

    UserRef exitUser =
        splitRegion(*body, OriginRef{nullptr, body, origIn}, inner);
    assert(exitUser.region == body && exitUser.index == origIn + 1);
    g.disconnect(exitUser);
    for (const auto &a : touched)
      body->addResult(memStateType(), inner[a]);

    for (const auto &a : touched) {
      theta->outputs.push_back({memStateType(), {}});
      assert(static_cast<int>(theta->outputs.size()) - 1 == newVar[a]);
      g.connect(cur[a], theta->in(newVar[a]));
      cur[a] = theta->out(newVar[a]);
    }

    g.disconnect(e.entry);
    removals.push_back({theta, nullptr, Removal::What::Input, origIn});
    removals.push_back({theta, nullptr, Removal::What::Output, origIn});
    removals.push_back({nullptr, body, Removal::What::Argument, origIn});
    removals.push_back({nullptr, body, Removal::What::Result, origIn + 1});
  }

  Graph &g;
  std::vector<Removal> removals;
};

} // namespace

void separateStateEdges(Graph &g) {
  Separator sep(g);
  sep.run();
}

} // namespace elk
