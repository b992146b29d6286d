#pragma once

#include <optional>
#include <string>
#include <vector>

#include "groundmem/constructor.hpp"
#include "groundmem/memory.hpp"
#include "groundmem/observer.hpp"

namespace groundmem {

struct BuildOptions {
  Condition condition = Condition::Visual;
  ConstructorConfig constructor;
  int parse_retries = 2;
};

struct TurnRecord {
  Utterance utterance;
  ObserverDecision decision;
  std::optional<FrameId> target;
  std::vector<FaithfulnessReport> reports;  // visual candidates of the stored version
  std::vector<Triplet> triplets;
  std::vector<std::string> diagnostics;
};

struct BuildResult {
  MemoryBank bank;
  PerspectiveState state;
  std::vector<TurnRecord> turns;
};

/// Sequential pass over one dialogue: observe, route, construct, link.
BuildResult build_memory(const Dialogue& dialogue, const BuildOptions& options, Gateway& gateway);

}  // namespace groundmem
