#include "elk/buffers.hpp"
#include "elk/parse.hpp"
#include "elk/pipeline.hpp"
#include "elk/validate.hpp"

#include <doctest.h>

#include "helpers.hpp"

using namespace elk;

namespace {

uint64_t steadyStateII(const std::vector<MemEvent> &writes) {
  REQUIRE(writes.size() >= 4);
  // measure the last few deltas, past the pipeline fill
  uint64_t delta = writes.back().cycle - writes[writes.size() - 2].cycle;
  uint64_t prev =
      writes[writes.size() - 2].cycle - writes[writes.size() - 3].cycle;
  CHECK(delta == prev);
  return delta;
}

} // namespace

TEST_CASE("back-edge elision enables one store per cycle") {
  Kernel k = elktest::parseCorpus("sumloop.rk");
  RunInputs in = elktest::corpusInputs("sumloop", k);

  PipelineOptions with;
  SimResult a = elktest::runConfig(k, with, in);
  REQUIRE(a.ok());
  CHECK(steadyStateII(a.trace.at(1)) == 1);

  PipelineOptions without; // buffer pass off: the back-edge BUF remains
  without.buffers = false;
  SimResult b = elktest::runConfig(k, without, in);
  REQUIRE(b.ok());
  CHECK(steadyStateII(b.trace.at(1)) >= 2);
}

TEST_CASE("elision only fires for memory-traced back edges") {
  Kernel k = parse(
      "kernel k(n:i32){ s = 0; i = 0; do { s = s + i; i = i + 1; } while (i < n); return s; }");
  PipelineOptions p;
  Graph g = compile(k, p, Stage::PlaceBuffers);
  int backedgeBufs = 0;
  g.forEachNode([&](Node *n) {
    if (n->kind == NodeKind::Buf && n->onBackedge)
      ++backedgeBufs;
  });
  // scalar back edges keep their buffers (i, s and the predicate path)
  CHECK(backedgeBufs == 2);
}

TEST_CASE("multiplier buffering skips constant operands") {
  Kernel k = parse(R"(
    kernel k(a:i32, b:i32) {
      x = a * b;
      y = a * 3;
      return x + y;
    })");
  PipelineOptions p;
  Graph g = compile(k, p, Stage::PlaceBuffers);
  int opaqueAfterMul = 0;
  g.forEachNode([&](Node *n) {
    if (n->kind == NodeKind::Buf && n->opaque && !n->onBackedge) {
      OriginRef o = Graph::userOrigin(n->in(0));
      if (o.node && o.node->kind == NodeKind::Binary &&
          o.node->binOp == BinaryOp::Mul)
        ++opaqueAfterMul;
    }
  });
  CHECK(opaqueAfterMul == 1); // a*b buffered, a*3 not
}

TEST_CASE("control forks receive the deeper FIFOs") {
  Kernel k = parse(
      "kernel k(n:i32){ s = 0; i = 0; do { s = s + i; i = i + 1; } while (i < n); return s; }");
  PipelineOptions p;
  p.bufferPolicy.forkFifoDepth = 4;
  p.bufferPolicy.controlForkFifoDepth = 16;
  Graph g = compile(k, p, Stage::PlaceBuffers);
  int ctl16 = 0, data4 = 0, wrongDepth = 0;
  g.forEachNode([&](Node *n) {
    if (n->kind != NodeKind::Buf || n->opaque)
      return;
    OriginRef o = Graph::userOrigin(n->in(0));
    if (!o.node || o.node->kind != NodeKind::Fork)
      return;
    if (n->inputs[0].type.kind == TypeKind::Control) {
      if (n->capacity == 16)
        ++ctl16;
      else
        ++wrongDepth;
    } else {
      if (n->capacity == 4)
        ++data4;
      else
        ++wrongDepth;
    }
  });
  CHECK(ctl16 > 0);
  CHECK(data4 > 0);
  CHECK(wrongDepth == 0);
}

TEST_CASE("no buffers are placed on ADDR-Q port edges") {
  Kernel k = parse(R"(
    kernel k(n:i32, a:i32[8]) {
      i = 0;
      do { a[i] = i; x = a[i & 3]; i = i + 1; } while (i < n);
    })");
  PipelineOptions p;
  Graph g = compile(k, p, Stage::PlaceBuffers);
  g.forEachNode([&](Node *n) {
    if (n->kind != NodeKind::AddrQueue)
      return;
    for (int i = 0; i < 3; ++i) {
      OriginRef o = Graph::userOrigin(n->in(i));
      REQUIRE(o.valid());
      CHECK(o.node->kind != NodeKind::Buf);
    }
  });
}

TEST_CASE("buffer placement preserves netlist validity on the corpus") {
  for (const char *name : {"histogram", "twomm", "triangular", "jacobi1d"}) {
    Kernel k = elktest::parseCorpus(std::string(name) + ".rk");
    PipelineOptions p;
    Graph g = compile(k, p, Stage::PlaceBuffers);
    CHECK_MESSAGE(validateNetlist(g).empty(), name);
  }
}

TEST_CASE("buffers never change results and never cost cycles on the corpus") {
  for (const char *name :
       {"histogram", "sumloop", "atax", "gettanh", "jacobi1d"}) {
    Kernel k = elktest::parseCorpus(std::string(name) + ".rk");
    RunInputs in = elktest::corpusInputs(name, k);
    PipelineOptions on, off;
    off.buffers = false;
    SimResult a = elktest::runConfig(k, on, in);
    SimResult b = elktest::runConfig(k, off, in);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(a.memories == b.memories);
    CHECK(a.returnValue == b.returnValue);
    CHECK(a.stats.cycles <= b.stats.cycles);
  }
}
