#include "elk/pipeline.hpp"

#include "elk/build.hpp"
#include "elk/validate.hpp"

namespace elk {

const char *stageName(Stage s) {
  switch (s) {
  case Stage::Parse: return "parse";
  case Stage::BuildRvsdg: return "build-rvsdg";
  case Stage::SeparateState: return "separate-state";
  case Stage::LowerGamma: return "lower-gamma";
  case Stage::LowerTheta: return "lower-theta";
  case Stage::LowerMemory: return "lower-memory";
  case Stage::Disambiguate: return "disambiguate";
  case Stage::PointToPoint: return "point-to-point";
  case Stage::PlaceBuffers: return "place-buffers";
  case Stage::Flatten: return "flatten";
  }
  return "?";
}

std::optional<Stage> stageFromName(const std::string &name) {
  for (Stage s : {Stage::Parse, Stage::BuildRvsdg, Stage::SeparateState,
                  Stage::LowerGamma, Stage::LowerTheta, Stage::LowerMemory,
                  Stage::Disambiguate, Stage::PointToPoint,
                  Stage::PlaceBuffers, Stage::Flatten})
    if (name == stageName(s))
      return s;
  return std::nullopt;
}

bool stageIsRvsdg(Stage s) {
  return s == Stage::Parse || s == Stage::BuildRvsdg ||
         s == Stage::SeparateState;
}

std::string PipelineOptions::fingerprint() const {
  std::string cfg = std::string("addrq=") + (addrQueues ? "1" : "0") +
                    ";cap=" + std::to_string(addrQueueCapacity) +
                    ";buf=" + (buffers ? "1" : "0") +
                    ";fifo=" + std::to_string(bufferPolicy.forkFifoDepth) +
                    ";ctl=" + std::to_string(bufferPolicy.controlForkFifoDepth) +
                    ";mulbuf=" + (bufferPolicy.multiplierBuffering ? "1" : "0") +
                    ";elide=" + (bufferPolicy.backedgeElision ? "1" : "0") +
                    ";omit=" + sgRoleName(omitRole);
  // FNV-1a
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : cfg) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void requireValidRvsdg(Graph &g, const char *stage) {
  auto vs = validateRvsdg(g);
  if (!vs.empty())
    throw Error(std::string("validation failed after ") + stage + ":\n" +
                formatViolations(vs));
}

void requireValidNetlist(Graph &g, const char *stage) {
  auto vs = validateNetlist(g);
  if (!vs.empty())
    throw Error(std::string("validation failed after ") + stage + ":\n" +
                formatViolations(vs));
}

} // namespace

Graph compile(const Kernel &k, const PipelineOptions &opts, Stage upTo,
              LowerStats *stats) {
  Graph g = buildRvsdg(k);
  if (upTo == Stage::Parse || upTo == Stage::BuildRvsdg) {
    requireValidRvsdg(g, "build-rvsdg");
    return g;
  }
  requireValidRvsdg(g, "build-rvsdg");

  separateStateEdges(g);
  if (upTo == Stage::SeparateState) {
    requireValidRvsdg(g, "separate-state");
    return g;
  }
  requireValidRvsdg(g, "separate-state");

  lowerGammas(g, stats);
  if (upTo == Stage::LowerGamma)
    return g;

  lowerThetas(g);
  if (upTo == Stage::LowerTheta)
    return g;

  lowerMemoryPorts(g);
  if (upTo == Stage::LowerMemory)
    return g;

  if (opts.addrQueues) {
    DisambigOptions dopts;
    dopts.addrQueueCapacity = opts.addrQueueCapacity;
    dopts.omitRole = opts.omitRole;
    insertAddrQueues(g, dopts);
  }
  if (upTo == Stage::Disambiguate)
    return g;

  enforcePointToPoint(g);
  requireValidNetlist(g, "point-to-point");
  if (upTo == Stage::PointToPoint)
    return g;

  if (opts.buffers) {
    placeBuffers(g, opts.bufferPolicy);
    requireValidNetlist(g, "place-buffers");
  }
  if (upTo == Stage::PlaceBuffers)
    return g;

  flatten(g);
  return g;
}

std::vector<int32_t> seededFill(uint64_t seed, size_t n, int32_t mask) {
  // splitmix64
  std::vector<int32_t> out(n);
  uint64_t x = seed;
  for (size_t i = 0; i < n; ++i) {
    x += 0x9e3779b97f4a7c15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    out[i] = static_cast<int32_t>(z & static_cast<uint64_t>(mask));
  }
  return out;
}

RunInputs parseInputs(const Json &j, const Kernel &k) {
  RunInputs in;
  if (j.contains("args"))
    for (auto it = j["args"].begin(); it != j["args"].end(); ++it) {
      const Param *p = k.findParam(it.key());
      if (!p || p->isArray)
        throw Error("input spec: unknown scalar argument '" + it.key() + "'");
      in.args[it.key()] = it.value().get<int32_t>();
    }
  if (j.contains("arrays"))
    for (auto it = j["arrays"].begin(); it != j["arrays"].end(); ++it) {
      const Param *p = k.findParam(it.key());
      if (!p || !p->isArray)
        throw Error("input spec: unknown array '" + it.key() + "'");
      size_t len = static_cast<size_t>(p->length);
      const Json &spec = it.value();
      std::vector<int32_t> v(len, 0);
      if (spec.is_array()) {
        if (spec.size() > len)
          throw Error("input spec: array '" + it.key() + "' too long");
        for (size_t i = 0; i < spec.size(); ++i)
          v[i] = spec[i].get<int32_t>();
      } else if (spec.is_object() && spec.contains("fill")) {
        std::fill(v.begin(), v.end(), spec["fill"].get<int32_t>());
      } else if (spec.is_object() && spec.contains("seed")) {
        v = seededFill(spec["seed"].get<uint64_t>(), len);
      } else {
        throw Error("input spec: array '" + it.key() +
                    "' must be a list, {\"fill\":v} or {\"seed\":s}");
      }
      in.arrays[it.key()] = std::move(v);
    }
  return in;
}

SimResult runKernel(const Kernel &k, const PipelineOptions &popts,
                    SimOptions sopts, const RunInputs &inputs) {
  Graph g = compile(k, popts, Stage::Flatten);
  if (sopts.configFingerprint.empty())
    sopts.configFingerprint = popts.fingerprint();
  return simulate(g, sopts, inputs.arrays, inputs.args);
}

} // namespace elk
