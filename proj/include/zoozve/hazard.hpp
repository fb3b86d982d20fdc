#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "zoozve/config.hpp"
#include "zoozve/instruction.hpp"

namespace zoozve {

enum class HazardKind : uint8_t { RAW, WAR, WAW };

struct HazardEdge {
  uint32_t from, to;  // instruction indices, from < to
  HazardKind kind;
  auto operator<=>(const HazardEdge&) const = default;
};

struct HazardGraph {
  uint32_t num_nodes = 0;
  std::vector<HazardEdge> edges;  // sorted, deduplicated
};

// Register-group dependence analysis over a straight-line program. avl
// values must be statically known: either traceable to li instructions or
// supplied per instruction index in `avl_overrides`. Branches and
// gather/scatter (whose source extents depend on runtime index values) are
// unsupported inputs.
HazardGraph build_hazard_graph(
    const Program& program, const VConfig& config,
    const std::map<uint32_t, uint64_t>& avl_overrides = {});

}  // namespace zoozve
