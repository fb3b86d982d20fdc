#include "zoozve/hazard.hpp"

#include <algorithm>
#include <optional>
#include <variant>

#include "zoozve/errors.hpp"
#include "zoozve/sim.hpp"

namespace zoozve {

namespace {

struct Access {
  std::vector<RegisterGroup> reads;
  std::vector<RegisterGroup> writes;
};

}  // namespace

HazardGraph build_hazard_graph(
    const Program& program, const VConfig& config,
    const std::map<uint32_t, uint64_t>& avl_overrides) {
  config.validate();

  // Constant-propagate scalar registers through the straight line so avl
  // operands resolve to values. Anything written by a non-li scalar op
  // becomes unknown.
  std::array<std::optional<uint64_t>, 32> known{};
  known[0] = 0;

  std::vector<Access> accesses(program.code.size());
  uint32_t vew = config.vew_bits;

  for (uint32_t idx = 0; idx < program.code.size(); ++idx) {
    const Instruction& instr = program.code[idx];
    if (std::holds_alternative<Branch>(instr) ||
        std::holds_alternative<Jal>(instr))
      throw UnsupportedError(
          "hazard analysis requires a straight-line program (branch at index " +
          std::to_string(idx) + ")");
    if (std::holds_alternative<VGather>(instr) ||
        std::holds_alternative<VScatter>(instr))
      throw UnsupportedError(
          "gather/scatter extents depend on runtime indices (index " +
          std::to_string(idx) + ")");
    if (is_rvv(instr))
      throw UnsupportedError("rvv instruction at index " + std::to_string(idx));

    auto avl_of = [&](uint8_t reg) -> uint64_t {
      if (auto it = avl_overrides.find(idx); it != avl_overrides.end())
        return it->second;
      if (reg < 32 && known[reg]) return *known[reg];
      throw UnsupportedError("avl register x" + std::to_string(reg) +
                             " has no statically known value at index " +
                             std::to_string(idx));
    };
    auto group = [&](uint16_t head, uint64_t avl) {
      return compute_group(head, avl == 0 ? 1 : avl, vew, config.vlen_bits);
    };

    Access& a = accesses[idx];
    if (const auto* i = std::get_if<VLoad>(&instr)) {
      a.writes.push_back(group(i->vd_head, avl_of(i->rs_avl)));
    } else if (const auto* i = std::get_if<VStore>(&instr)) {
      a.reads.push_back(group(i->vs3_head, avl_of(i->rs_avl)));
    } else if (const auto* i = std::get_if<VArithVV>(&instr)) {
      uint64_t avl = avl_of(i->rs_avl);
      a.writes.push_back(group(i->vd_head, avl));
      a.reads.push_back(group(i->vs1_head, avl));
      a.reads.push_back(group(i->vs2_head, avl));
    } else if (const auto* i = std::get_if<VArithVX>(&instr)) {
      uint64_t avl = avl_of(i->rs_avl);
      a.writes.push_back(group(i->vd_head, avl));
      a.reads.push_back(group(i->vs2_head, avl));
    } else if (const auto* i = std::get_if<VRedSum>(&instr)) {
      a.reads.push_back(group(i->vs2_head, avl_of(i->rs_avl)));
      a.writes.push_back(group(i->vd_head, 1));
    } else if (const auto* i = std::get_if<VSetCsr>(&instr)) {
      // Changing the element width mid-segment would invalidate every group
      // computed so far; accept only writes that keep it fixed.
      if (i->csr_id == kCsrVew)
        throw UnsupportedError(
            "element-width change inside analyzed segment (index " +
            std::to_string(idx) + ")");
    } else if (const auto* i = std::get_if<ScalarLi>(&instr)) {
      if (i->rd != 0)
        known[i->rd] = static_cast<uint64_t>(static_cast<int64_t>(i->imm));
    } else if (const auto* i = std::get_if<ScalarAlu>(&instr)) {
      if (i->rd != 0) known[i->rd].reset();
    } else if (const auto* i = std::get_if<ScalarSlli>(&instr)) {
      if (i->rd != 0) known[i->rd].reset();
    } else if (const auto* i = std::get_if<ScalarLw>(&instr)) {
      if (i->rd != 0) known[i->rd].reset();
    }
    // ScalarSw touches memory only.
  }

  HazardGraph g;
  g.num_nodes = static_cast<uint32_t>(program.code.size());
  for (uint32_t i = 0; i < accesses.size(); ++i) {
    for (uint32_t j = i + 1; j < accesses.size(); ++j) {
      bool raw = false, war = false, waw = false;
      for (const auto& w : accesses[i].writes)
        for (const auto& r : accesses[j].reads)
          raw = raw || hazard_check(w, r);
      for (const auto& r : accesses[i].reads)
        for (const auto& w : accesses[j].writes)
          war = war || hazard_check(r, w);
      for (const auto& w1 : accesses[i].writes)
        for (const auto& w2 : accesses[j].writes)
          waw = waw || hazard_check(w1, w2);
      if (raw) g.edges.push_back({i, j, HazardKind::RAW});
      if (war) g.edges.push_back({i, j, HazardKind::WAR});
      if (waw) g.edges.push_back({i, j, HazardKind::WAW});
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

}  // namespace zoozve
