#include "elk/dot.hpp"
#include "elk/json_io.hpp"
#include "elk/parse.hpp"
#include "elk/pipeline.hpp"

#include <doctest.h>

#include "helpers.hpp"

using namespace elk;

TEST_CASE("empty graph exports a digraph with no nodes") {
  Graph g;
  std::string dot = dotExport(g);
  CHECK(elktest::dotWellFormed(dot));
  CHECK(dot.find(" -> ") == std::string::npos);
}

TEST_CASE("gamma with a state edge renders two clusters and dashed edges") {
  Kernel k = parse(R"(
    kernel k(c:i32, s:i32[4]) {
      if (c > 0) { s[0] = 1; } else { s[1] = 2; }
    })");
  PipelineOptions p;
  Graph g = compile(k, p, Stage::SeparateState);
  std::string dot = dotExport(g);
  CHECK(elktest::dotWellFormed(dot));
  // two gamma subregion clusters plus the lambda body cluster
  size_t clusters = 0;
  for (size_t pos = 0; (pos = dot.find("subgraph cluster", pos)) != std::string::npos; ++pos)
    ++clusters;
  CHECK(clusters == 3);
  CHECK(dot.find("style=dashed") != std::string::npos);
}

TEST_CASE("lowered loop netlist renders loop cluster with mux and pred-buf") {
  Kernel k = parse(
      "kernel k(n:i32){ i = 0; do { i = i + 1; } while (i < n); return i; }");
  PipelineOptions p;
  Graph g = compile(k, p, Stage::PlaceBuffers);
  std::string dot = dotExport(g);
  CHECK(elktest::dotWellFormed(dot));
  CHECK(dot.find("LOOP") != std::string::npos);
  CHECK(dot.find("NDMUX") != std::string::npos);
  CHECK(dot.find("PRED-BUF") != std::string::npos);
  CHECK(dot.find("BRANCH") != std::string::npos);
}

TEST_CASE("dot output is well-formed across corpus and stages") {
  for (const char *name : {"histogram", "twomm", "triangular"}) {
    Kernel k = elktest::parseCorpus(std::string(name) + ".rk");
    for (Stage st : {Stage::SeparateState, Stage::LowerTheta,
                     Stage::Disambiguate, Stage::PlaceBuffers}) {
      PipelineOptions p;
      Graph g = compile(k, p, st);
      CHECK_MESSAGE(elktest::dotWellFormed(dotExport(g)), name, " at ",
                    stageName(st));
    }
  }
}

TEST_CASE("json serialization carries the version header and round-trips byte-identically") {
  Kernel k = elktest::parseCorpus("histogram.rk");
  PipelineOptions p;
  Graph g1 = compile(k, p, Stage::PlaceBuffers);
  Json j1 = graphToJson(g1, "netlist");
  CHECK(j1["version"] == 1);
  CHECK(j1["kind"] == "netlist");
  CHECK(j1.contains("nodes"));
  CHECK(j1.contains("edges"));
  // a second compilation serializes to the identical bytes
  Graph g2 = compile(k, p, Stage::PlaceBuffers);
  Json j2 = graphToJson(g2, "netlist");
  CHECK(j1.dump() == j2.dump());
}

TEST_CASE("rvsdg json uses the rvsdg kind tag") {
  Kernel k = parse("kernel k(a:i32){ return a; }");
  PipelineOptions p;
  Graph g = compile(k, p, Stage::SeparateState);
  Json j = graphToJson(g, "rvsdg");
  CHECK(j["kind"] == "rvsdg");
  bool hasLambda = false;
  for (const auto &n : j["nodes"])
    hasLambda |= n["kind"] == "LAMBDA";
  CHECK(hasLambda);
}
