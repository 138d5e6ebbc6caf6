#ifndef ELK_TEST_HELPERS_HPP
#define ELK_TEST_HELPERS_HPP

#include "elk/equiv.hpp"
#include "elk/interp.hpp"
#include "elk/parse.hpp"
#include "elk/pipeline.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace elktest {

inline std::string readFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpusPath(const std::string &name) {
  return std::string(ELK_CORPUS_DIR) + "/" + name;
}

inline elk::Kernel parseCorpus(const std::string &name) {
  return elk::parse(readFile(corpusPath(name)));
}

inline elk::RunInputs corpusInputs(const std::string &base,
                                   const elk::Kernel &k) {
  std::string path = corpusPath(base + ".inputs.json");
  std::ifstream in(path);
  if (!in.good())
    return {};
  elk::Json j = elk::Json::parse(readFile(path));
  return elk::parseInputs(j, k);
}

// The four {buffers} x {addr queues} configurations.
inline std::vector<elk::PipelineOptions> allConfigs() {
  std::vector<elk::PipelineOptions> out;
  for (bool buffers : {true, false})
    for (bool addrq : {true, false}) {
      elk::PipelineOptions p;
      p.buffers = buffers;
      p.addrQueues = addrq;
      out.push_back(p);
    }
  return out;
}

inline elk::SimResult runConfig(const elk::Kernel &k,
                                const elk::PipelineOptions &p,
                                const elk::RunInputs &in,
                                uint64_t maxCycles = 500'000) {
  elk::SimOptions s;
  s.maxCycles = maxCycles;
  s.configFingerprint = p.fingerprint();
  return elk::runKernel(k, p, s, in);
}

// A small structural check for Graphviz output: brace balance and
// well-formed statements. Not a full grammar, but enough to catch
// malformed emission.
inline bool dotWellFormed(const std::string &dot) {
  if (dot.rfind("digraph", 0) != 0)
    return false;
  int depth = 0;
  std::istringstream ss(dot);
  std::string line;
  while (std::getline(ss, line)) {
    size_t a = line.find_first_not_of(" \t");
    if (a == std::string::npos)
      continue;
    std::string t = line.substr(a);
    for (char c : t) {
      if (c == '{')
        ++depth;
      if (c == '}')
        --depth;
      if (depth < 0)
        return false;
    }
    if (t == "{" || t == "}" || t.back() == '{')
      continue;
    if (t.rfind("digraph", 0) == 0 || t.rfind("label=", 0) == 0 ||
        t.rfind("node ", 0) == 0 || t.rfind("subgraph", 0) == 0)
      continue;
    if (t.back() != ';' && t != "}")
      return false;
  }
  return depth == 0;
}

// Node census of a graph, by kind name.
inline std::map<std::string, int> census(elk::Graph &g) {
  std::map<std::string, int> out;
  g.forEachNode([&](elk::Node *n) { out[elk::nodeKindName(n->kind)]++; });
  return out;
}

} // namespace elktest

#endif
