#include "elk/parse.hpp"

#include <doctest.h>

using namespace elk;

TEST_CASE("parse minimal kernel") {
  Kernel k = parse("kernel k(a:i32){ return a; }");
  CHECK(k.name == "k");
  CHECK(k.params.size() == 1);
  CHECK_FALSE(k.params[0].isArray);
  REQUIRE(k.body.size() == 1);
  CHECK(k.body[0]->kind == Stmt::Kind::Return);
}

TEST_CASE("histogram-shaped kernel parses to the expected ops") {
  Kernel k = parse(R"(
    kernel hist(n:i32, f:i32[8], h:i32[8]) {
      i = 0;
      do {
        x = f[i];
        h[x] = h[x] + 1;
        i = i + 1;
      } while (i < n);
    })");
  // one do-while, loads f[i] and h[x], one store
  REQUIRE(k.body.size() == 2);
  CHECK(k.body[1]->kind == Stmt::Kind::DoWhile);
  CHECK(k.memOpCount == 3);
}

TEST_CASE("syntax error carries the position") {
  try {
    parse("kernel k(){ x = ; }");
    FAIL("expected a syntax error");
  } catch (const Error &e) {
    CHECK(e.loc.line == 1);
    CHECK(e.loc.col == 17);
  }
}

TEST_CASE("semantic rejections") {
  CHECK_THROWS_AS(parse("kernel k(a:i32[0]){}"), Error);
  CHECK_THROWS_AS(parse("kernel k(){ return y; }"), Error);
  CHECK_THROWS_AS(parse("kernel k(a:i32[4]){ a = 1; }"), Error);
  CHECK_THROWS_AS(parse("kernel k(a:i32[4]){ x = a; }"), Error);
  CHECK_THROWS_AS(parse("kernel k(a:i32, a:i32){}"), Error);
  CHECK_THROWS_AS(parse("kernel k(a:i32){ return a; x = 1; }"), Error);
}

TEST_CASE("while desugars to if + do-while") {
  Kernel k = parse("kernel k(n:i32){ i = 0; while (i < n) { i = i + 1; } }");
  REQUIRE(k.body.size() == 2);
  const Stmt &guard = *k.body[1];
  CHECK(guard.kind == Stmt::Kind::If);
  REQUIRE(guard.thenBody.size() == 1);
  CHECK(guard.thenBody[0]->kind == Stmt::Kind::DoWhile);
  CHECK(guard.elseBody.empty());
}

TEST_CASE("memory op sites are numbered in program order") {
  Kernel k = parse(R"(
    kernel k(a:i32[4], b:i32[4]) {
      a[0] = b[1];
      do { x = a[b[0]]; } while (x > 0);
    })");
  // b[1] load=0, a[0] store=1, then inside the loop b[0]=2, a[..]=3
  CHECK(k.memOpCount == 4);
  CHECK(k.body[0]->memOpId == 1);
}

TEST_CASE("pretty-print round trip") {
  const char *src = R"(
    kernel rt(n:i32, a:i32[8]) {
      s = 0;
      i = 0;
      do {
        if (a[i] > 3) { s = s + a[i] * 2; } else { s = s - 1; }
        i = i + 1;
      } while (i < n);
      return s & 255;
    })";
  Kernel k1 = parse(src);
  std::string printed = printKernel(k1);
  Kernel k2 = parse(printed);
  CHECK(kernelEqual(k1, k2));
  CHECK(printKernel(k2) == printed);
  CHECK(k1.memOpCount == k2.memOpCount);
}

TEST_CASE("comparison precedence is lowest and non-associative") {
  Kernel k = parse("kernel k(a:i32,b:i32){ x = a + 1 < b * 2; return x; }");
  const Expr &e = *k.body[0]->value;
  CHECK(e.kind == Expr::Kind::Compare);
  CHECK(e.lhs->kind == Expr::Kind::Binary);
  CHECK(e.rhs->kind == Expr::Kind::Binary);
}
