#include "elk/interp.hpp"
#include "elk/parse.hpp"

#include <doctest.h>

using namespace elk;

TEST_CASE("constant expression") {
  Kernel k = parse("kernel k(){ return 2 + 3; }");
  RefResult r = interpret(k, {}, {});
  REQUIRE(r.ok());
  CHECK(r.returnValue == 5);
}

TEST_CASE("histogram hand oracle") {
  // features=[1,1,0], weights=[2,3,4] -> hist[0]=4, hist[1]=5
  Kernel k = parse(R"(
    kernel hist(n:i32, f:i32[4], w:i32[4], h:i32[4]) {
      i = 0;
      do {
        h[f[i]] = h[f[i]] + w[i];
        i = i + 1;
      } while (i < n);
    })");
  RefResult r = interpret(k, {{"f", {1, 1, 0}}, {"w", {2, 3, 4}}, {"h", {}}},
                          {{"n", 3}});
  REQUIRE(r.ok());
  CHECK(r.memories.at("h")[0] == 4);
  CHECK(r.memories.at("h")[1] == 5);
}

TEST_CASE("trace interleaves per program order") {
  Kernel k = parse(R"(
    kernel k(n:i32, a:i32[4]) {
      i = 0;
      do {
        a[i] = i;          // store op 0
        x = a[i];          // load op 1
        i = i + 1;
      } while (i < n);
    })");
  RefResult r = interpret(k, {}, {{"n", 3}});
  REQUIRE(r.ok());
  REQUIRE(r.trace.at(0).size() == 3);
  REQUIRE(r.trace.at(1).size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(r.trace.at(0)[static_cast<size_t>(i)].isWrite);
    CHECK(r.trace.at(0)[static_cast<size_t>(i)].addr == static_cast<uint32_t>(i));
    CHECK(r.trace.at(1)[static_cast<size_t>(i)].data == static_cast<uint32_t>(i));
    // per-op event order is program order
    CHECK(r.trace.at(0)[static_cast<size_t>(i)].cycle <
          r.trace.at(1)[static_cast<size_t>(i)].cycle);
  }
}

TEST_CASE("wrapping arithmetic and signed comparison") {
  Kernel k = parse("kernel k(a:i32){ x = a + 1; return x < a; }");
  RefResult r = interpret(k, {}, {{"a", 2147483647}});
  REQUIRE(r.ok());
  CHECK(r.returnValue == 1); // INT_MAX + 1 wraps negative
}

TEST_CASE("division by zero traps") {
  Kernel k = parse("kernel k(a:i32){ return 4 / a; }");
  RefResult r = interpret(k, {}, {{"a", 0}});
  CHECK_FALSE(r.ok());
  CHECK(r.trap.kind == TrapKind::DivByZero);
}

TEST_CASE("out-of-bounds traps with the op id") {
  Kernel k = parse("kernel k(a:i32[4], i:i32){ a[i] = 1; }");
  RefResult r = interpret(k, {}, {{"i", 9}});
  CHECK_FALSE(r.ok());
  CHECK(r.trap.kind == TrapKind::OutOfBounds);
  CHECK(r.trap.memOpId == 0);
}

TEST_CASE("do-while runs the body at least once") {
  Kernel k = parse("kernel k(){ s = 0; do { s = s + 1; } while (s < 0); return s; }");
  RefResult r = interpret(k, {}, {});
  CHECK(r.returnValue == 1);
}
