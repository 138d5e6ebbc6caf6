#include "elk/build.hpp"
#include "elk/parse.hpp"
#include "elk/pipeline.hpp"
#include "elk/validate.hpp"

#include <doctest.h>

#include "helpers.hpp"

using namespace elk;

namespace {

Graph compileSrc(const char *src, Stage upTo, LowerStats *stats = nullptr,
                 bool addrq = true) {
  PipelineOptions p;
  p.addrQueues = addrq;
  return compile(parse(src), p, upTo, stats);
}

} // namespace

TEST_CASE("side-effect-free diamond lowers to the speculative DMUX form") {
  LowerStats stats;
  Graph g = compileSrc(
      "kernel max2(a:i32, b:i32){ if (a > b) { m = a; } else { m = b; } return m; }",
      Stage::LowerGamma, &stats);
  auto c = elktest::census(g);
  CHECK(c["DMUX"] >= 1);
  CHECK(c["NDMUX"] == 0);
  CHECK(c["BRANCH"] == 0);
  REQUIRE(stats.gammaForms.size() == 1);
  CHECK(stats.gammaForms.begin()->second == GammaForm::Speculative);
}

TEST_CASE("a store inside a branch flips the gamma to BRANCH+NDMUX") {
  LowerStats stats;
  Graph g = compileSrc(R"(
    kernel k(a:i32, s:i32[4]) {
      if (a > 0) { s[0] = a; } else { }
    })", Stage::LowerGamma, &stats);
  auto c = elktest::census(g);
  CHECK(c["NDMUX"] >= 1);
  CHECK(c["BRANCH"] >= 1);
  CHECK(c["DMUX"] == 0);
  REQUIRE(stats.gammaForms.size() == 1);
  CHECK(stats.gammaForms.begin()->second == GammaForm::Guarded);
}

TEST_CASE("a theta in a subregion also forces the guarded form") {
  LowerStats stats;
  compileSrc(R"(
    kernel k(a:i32) {
      m = 0;
      if (a > 0) {
        i = 0;
        do { i = i + 1; } while (i < a);
        m = i;
      } else { m = 1; }
      return m;
    })", Stage::LowerTheta, &stats);
  REQUIRE(stats.gammaForms.size() == 1);
  CHECK(stats.gammaForms.begin()->second == GammaForm::Guarded);
}

TEST_CASE("counting loop lowers to the expected loop machinery") {
  Graph g = compileSrc(
      "kernel k(n:i32){ s = 0; i = 0; do { s = s + i; i = i + 1; } while (i < n); return s; }",
      Stage::LowerTheta);
  auto c = elktest::census(g);
  CHECK(c["LOOP"] == 1);
  CHECK(c["PRED-BUF"] == 1);
  CHECK(c["NDMUX"] == 2);  // entry muxes for s and i
  CHECK(c["BRANCH"] == 2); // exit branches for s and i
  CHECK(c["BUF"] == 2);    // back-edge buffers
  CHECK(c["LOOP-BUF"] == 1); // invariant n
  CHECK(c["CMP"] == 1);

  // the PRED-BUF output drives entry mux selects; exit branches take the
  // raw predicate
  Node *predBuf = nullptr, *cmp = nullptr;
  g.forEachNode([&](Node *n) {
    if (n->kind == NodeKind::PredBuf)
      predBuf = n;
    if (n->kind == NodeKind::Compare)
      cmp = n;
  });
  REQUIRE(predBuf);
  REQUIRE(cmp);
  int muxSelects = 0, loopBufTriggers = 0;
  for (const auto &u : predBuf->outputs[0].users) {
    if (u.node && u.node->kind == NodeKind::NdMux && u.index == 0)
      ++muxSelects;
    if (u.node && u.node->kind == NodeKind::LoopBuf && u.index == 0)
      ++loopBufTriggers;
  }
  CHECK(muxSelects == 2);
  CHECK(loopBufTriggers == 1);
  int branchSelects = 0;
  for (const auto &u : cmp->outputs[0].users)
    if (u.node && u.node->kind == NodeKind::Branch && u.index == 0)
      ++branchSelects;
  CHECK(branchSelects == 2);
}

TEST_CASE("loop with only an invariant array base gets a single LOOP-BUF") {
  Graph g = compileSrc(R"(
    kernel k(n:i32, a:i32[8]) {
      i = 0;
      do { a[i] = n; i = i + 1; } while (i < n);
    })", Stage::LowerTheta);
  auto c = elktest::census(g);
  CHECK(c["LOOP-BUF"] == 1); // n
  // data back edges: i and the state chain
  CHECK(c["BUF"] == 2);
}

TEST_CASE("nested do-while keeps the inner loop inside the outer region") {
  Graph g = compileSrc(R"(
    kernel k(n:i32) {
      s = 0;
      i = 0;
      do {
        j = 0;
        do { s = s + 1; j = j + 1; } while (j < n);
        i = i + 1;
      } while (i < n);
      return s;
    })", Stage::LowerTheta);
  std::vector<Node *> loops;
  g.forEachNode([&](Node *n) {
    if (n->kind == NodeKind::Loop)
      loops.push_back(n);
  });
  REQUIRE(loops.size() == 2);
  int nestings = 0;
  for (Node *l : loops)
    if (l->region->owner && l->region->owner->kind == NodeKind::Loop)
      ++nestings;
  CHECK(nestings == 1);
}

TEST_CASE("memory lowering creates one port pair per array") {
  Graph g = compileSrc(R"(
    kernel k(a:i32[4], b:i32[4]) {
      a[0] = b[0];
      b[1] = a[1];
    })", Stage::LowerMemory);
  auto c = elktest::census(g);
  CHECK(c["MEM-REQ"] == 2);
  CHECK(c["MEM-RESP"] == 2);
  g.forEachNode([&](Node *n) {
    if (n->kind == NodeKind::MemReq)
      CHECK(n->inputs.size() == 2); // one load + one store each
    if (n->kind == NodeKind::MemResp)
      CHECK(n->outputs.size() == 1); // responses only for loads
  });
}

TEST_CASE("load-only kernel gets a single-route response") {
  Graph g = compileSrc("kernel k(a:i32[4]){ x = a[0]; return x; }",
                       Stage::LowerMemory);
  g.forEachNode([&](Node *n) {
    if (n->kind == NodeKind::MemReq)
      CHECK(n->inputs.size() == 1);
    if (n->kind == NodeKind::MemResp)
      CHECK(n->outputs.size() == 1);
  });
}

TEST_CASE("point-to-point enforcement inserts forks and sinks") {
  Graph g = compileSrc(R"(
    kernel k(n:i32) {
      i = 0;
      do { i = i + 1; } while (i < n);
    })", Stage::PointToPoint);
  CHECK(validateNetlist(g).empty());
  g.forEachNode([&](Node *n) {
    // no fork output fans out, no sink has an output
    if (n->kind == NodeKind::Fork)
      for (const auto &out : n->outputs)
        CHECK(out.users.size() == 1);
    if (n->kind == NodeKind::Sink)
      CHECK(n->outputs.empty());
  });
}

TEST_CASE("already point-to-point graphs gain no forks") {
  Graph g = compileSrc("kernel k(a:i32){ return a; }", Stage::PointToPoint);
  auto c = elktest::census(g);
  CHECK(c["FORK"] == 0);
  CHECK(c["SINK"] == 0);
  CHECK(validateNetlist(g).empty());
}

TEST_CASE("netlist validation catches fan-out and missing opacity") {
  Graph g = compileSrc("kernel k(a:i32){ return a + 1; }", Stage::PointToPoint);
  REQUIRE(validateNetlist(g).empty());

  SUBCASE("fan-out") {
    Node *cst = makeConstant(g, g.root(), 1);
    Node *a1 = nullptr;
    g.forEachNode([&](Node *n) {
      if (n->kind == NodeKind::Binary)
        a1 = n;
    });
    REQUIRE(a1);
    // connect the constant into nothing, then give the binary's output a
    // second user
    Node *sink = makeSink(g, g.root(), cst->out(0));
    (void)sink;
    Node *sink2 = g.addNode(g.root(), NodeKind::Sink);
    sink2->inputs.push_back({valueType(), {}});
    g.connect(a1->out(0), sink2->in(0));
    auto vs = validateNetlist(g);
    bool fanout = false;
    for (const auto &v : vs)
      fanout |= v.rule == "fan-out";
    CHECK(fanout);
  }

  SUBCASE("combinational cycle") {
    // two muxes wired in a loop with no opaque element
    Node *c0 = makeConstant(g, g.root(), 0);
    Node *fork = makeFork(g, g.root(), c0->out(0), 2);
    Node *m1 = g.addNode(g.root(), NodeKind::NdMux);
    Node *m2 = g.addNode(g.root(), NodeKind::NdMux);
    for (Node *m : {m1, m2}) {
      m->inputs.push_back({controlType(2), {}});
      m->inputs.push_back({valueType(), {}});
      m->inputs.push_back({valueType(), {}});
      m->outputs.push_back({valueType(), {}});
    }
    Node *cv = makeConstant(g, g.root(), 3);
    Node *cv2 = makeConstant(g, g.root(), 4);
    // m1 select/first input; m2 likewise; cycle m1.out -> m2.in2, m2.out -> m1.in2
    Node *pred = g.addNode(g.root(), NodeKind::Compare);
    pred->cmpOp = CmpOp::Lt;
    pred->inputs.push_back({valueType(), {}});
    pred->inputs.push_back({valueType(), {}});
    pred->outputs.push_back({controlType(2), {}});
    g.connect(fork->out(0), pred->in(0));
    g.connect(fork->out(1), pred->in(1));
    Node *pfork = makeFork(g, g.root(), pred->out(0), 2);
    g.connect(pfork->out(0), m1->in(0));
    g.connect(pfork->out(1), m2->in(0));
    g.connect(cv->out(0), m1->in(1));
    g.connect(cv2->out(0), m2->in(1));
    g.connect(m1->out(0), m2->in(2));
    g.connect(m2->out(0), m1->in(2));
    auto vs = validateNetlist(g);
    bool cyc = false;
    for (const auto &v : vs)
      cyc |= v.rule == "combinational-cycle";
    CHECK(cyc);
  }
}

TEST_CASE("full pipeline output validates for the whole corpus") {
  for (const char *name : {"histogram", "sumloop", "twomm", "atax",
                           "triangular", "gettanh", "jacobi1d"}) {
    Kernel k = elktest::parseCorpus(std::string(name) + ".rk");
    for (bool addrq : {true, false}) {
      PipelineOptions p;
      p.addrQueues = addrq;
      Graph g1 = compile(k, p, Stage::PointToPoint);
      CHECK_MESSAGE(validateNetlist(g1).empty(), name, " p2p addrq=", addrq);
      Graph g2 = compile(k, p, Stage::PlaceBuffers);
      CHECK_MESSAGE(validateNetlist(g2).empty(), name, " buffers addrq=", addrq);
    }
  }
}
