#include "zoozve/rvv.hpp"

#include <algorithm>
#include <string>
#include <variant>

#include "zoozve/errors.hpp"

namespace zoozve {

RvvState::RvvState(const RvvConfig& cfg, size_t mem_size) : config(cfg) {
  config.validate();
  vregs.assign(static_cast<size_t>(RvvConfig::kNumRegs) * config.vlen_bits / 8,
               0);
  core.mem.assign(mem_size, 0);
  vtype_vew = config.vew_bits;
  vtype_lmul = config.lmul;
}

uint64_t RvvState::vreg_elem(uint32_t base, uint64_t elem) const {
  size_t off = static_cast<size_t>(base) * (config.vlen_bits / 8) +
               elem * (vtype_vew / 8);
  return detail::load_elem(vregs, off, vtype_vew);
}

void RvvState::set_vreg_elem(uint32_t base, uint64_t elem, uint64_t value) {
  size_t off = static_cast<size_t>(base) * (config.vlen_bits / 8) +
               elem * (vtype_vew / 8);
  detail::store_elem(vregs, off, vtype_vew, value);
}

uint32_t vsetvli(uint64_t avl, const RvvConfig& config) {
  return static_cast<uint32_t>(
      std::min<uint64_t>(avl, config.vlmax()));
}

uint64_t strip_mine_iterations(uint64_t n, const RvvConfig& config) {
  uint32_t vlmax = config.vlmax();
  return (n + vlmax - 1) / vlmax;
}

double rvv_utilization(uint64_t vl, const RvvConfig& config) {
  uint32_t vlmax = config.vlmax();
  if (vl == 0 || vl > vlmax)
    throw Error("vl " + std::to_string(vl) + " outside (0, vlmax=" +
                std::to_string(vlmax) + "]");
  return static_cast<double>(vl) / vlmax;
}

namespace {

void check_aligned(const RvvState& s, uint8_t base, const char* what) {
  if (base % s.vtype_lmul != 0)
    throw Trap(std::string(what) + " register v" + std::to_string(base) +
                   " not aligned to lmul " + std::to_string(s.vtype_lmul),
               s.core.pc);
  if (base + s.vtype_lmul > RvvConfig::kNumRegs)
    throw Trap(std::string(what) + " group exceeds the 32-register file",
               s.core.pc);
}

void check_mem(const RvvState& s, uint64_t addr, uint64_t bytes,
               uint32_t align) {
  if (addr % align != 0)
    throw Trap("misaligned vector memory access at address " +
                   std::to_string(addr),
               s.core.pc);
  if (addr + bytes > s.core.mem.size())
    throw Trap("vector memory access out of bounds", s.core.pc);
}

std::vector<uint64_t> read_group(const RvvState& s, uint8_t base,
                                 uint64_t count) {
  std::vector<uint64_t> out(count);
  for (uint64_t i = 0; i < count; ++i) out[i] = s.vreg_elem(base, i);
  return out;
}

}  // namespace

int64_t step_rvv(RvvState& s, const Instruction& instr, uint64_t program_len) {
  if (is_wide_vector(instr))
    throw Trap("wide-register vector instruction is not valid on the rvv "
               "machine",
               s.core.pc);
  if (detail::step_scalar(s.core, instr, program_len)) return -1;

  uint32_t vew = s.vtype_vew;
  uint32_t esz = vew / 8;
  uint64_t next = s.core.pc + 1;
  int64_t produced_vl = -1;

  if (const auto* i = std::get_if<VSetVli>(&instr)) {
    RvvConfig cfg = s.config;
    cfg.vew_bits = 1u << i->vew_bits_log2;
    cfg.lmul = i->lmul;
    cfg.validate();
    uint32_t vl = vsetvli(s.core.x(i->rs_avl), cfg);
    s.vtype_vew = cfg.vew_bits;
    s.vtype_lmul = cfg.lmul;
    s.vl = vl;
    s.core.set_x(i->rd, vl);
    produced_vl = vl;
  } else if (const auto* i = std::get_if<RvvLoad>(&instr)) {
    check_aligned(s, i->vd, "load destination");
    uint64_t addr = s.core.x(i->rs_addr);
    check_mem(s, addr, static_cast<uint64_t>(s.vl) * esz, esz);
    for (uint64_t e = 0; e < s.vl; ++e)
      s.set_vreg_elem(i->vd, e,
                      detail::load_elem(s.core.mem, addr + e * esz, vew));
    if (i->post_inc)
      s.core.set_x(i->rs_addr, addr + static_cast<uint64_t>(s.vl) * esz);
  } else if (const auto* i = std::get_if<RvvStore>(&instr)) {
    check_aligned(s, i->vs3, "store source");
    uint64_t addr = s.core.x(i->rs_addr);
    check_mem(s, addr, static_cast<uint64_t>(s.vl) * esz, esz);
    for (uint64_t e = 0; e < s.vl; ++e)
      detail::store_elem(s.core.mem, addr + e * esz, vew,
                         s.vreg_elem(i->vs3, e));
    if (i->post_inc)
      s.core.set_x(i->rs_addr, addr + static_cast<uint64_t>(s.vl) * esz);
  } else if (const auto* i = std::get_if<RvvArithVV>(&instr)) {
    check_aligned(s, i->vd, "destination");
    check_aligned(s, i->vs1, "source 1");
    check_aligned(s, i->vs2, "source 2");
    std::vector<uint64_t> a = read_group(s, i->vs1, s.vl);
    std::vector<uint64_t> b = read_group(s, i->vs2, s.vl);
    for (uint64_t e = 0; e < s.vl; ++e)
      s.set_vreg_elem(i->vd, e, eval_arith(i->op, a[e], b[e], vew));
  } else if (const auto* i = std::get_if<RvvArithVX>(&instr)) {
    check_aligned(s, i->vd, "destination");
    check_aligned(s, i->vs2, "source");
    uint64_t mask = vew == 64 ? ~uint64_t{0} : (uint64_t{1} << vew) - 1;
    uint64_t scalar = s.core.x(i->rs2) & mask;
    std::vector<uint64_t> a = read_group(s, i->vs2, s.vl);
    for (uint64_t e = 0; e < s.vl; ++e)
      s.set_vreg_elem(i->vd, e, eval_arith(i->op, a[e], scalar, vew));
  } else if (const auto* i = std::get_if<RvvRedSum>(&instr)) {
    check_aligned(s, i->vd, "destination");
    check_aligned(s, i->vs1, "accumulator source");
    check_aligned(s, i->vs2, "reduction source");
    uint64_t sum = s.vreg_elem(i->vs1, 0);
    for (uint64_t e = 0; e < s.vl; ++e)
      sum = eval_arith(VArithOp::Add, sum, s.vreg_elem(i->vs2, e), vew);
    s.set_vreg_elem(i->vd, 0, sum);
  } else if (const auto* i = std::get_if<VRGatherVV>(&instr)) {
    // Same VL on source and destination; out-of-range indices read as zero.
    check_aligned(s, i->vd, "destination");
    check_aligned(s, i->vs1, "source");
    check_aligned(s, i->vs2, "index source");
    uint32_t vlmax = s.vlmax();
    std::vector<uint64_t> idx = read_group(s, i->vs2, s.vl);
    std::vector<uint64_t> data(s.vl);
    for (uint64_t e = 0; e < s.vl; ++e)
      data[e] = idx[e] < vlmax ? s.vreg_elem(i->vs1, idx[e]) : 0;
    for (uint64_t e = 0; e < s.vl; ++e) s.set_vreg_elem(i->vd, e, data[e]);
  } else {
    throw Trap("unhandled instruction", s.core.pc);
  }

  s.core.pc = next;
  return produced_vl;
}

std::pair<RvvState, TraceStats> run_rvv(const Program& program,
                                        const RvvConfig& config,
                                        const std::vector<uint8_t>& init_mem,
                                        const RunOptions& opts) {
  program.validate();
  RvvState state(config, opts.mem_size);
  if (init_mem.size() > state.core.mem.size())
    throw Error("initial memory image larger than machine memory");
  std::copy(init_mem.begin(), init_mem.end(), state.core.mem.begin());
  state.core.pc = program.entry;

  TraceStats stats;
  uint64_t steps = 0;
  while (state.core.pc < program.code.size()) {
    if (steps >= opts.max_steps)
      throw SimTimeout("exceeded max_steps = " + std::to_string(opts.max_steps),
                       stats);
    const Instruction& instr = program.code[state.core.pc];
    InstrClass cls = class_of(instr);
    uint64_t at = state.core.pc;
    int64_t vl = -1;
    try {
      vl = step_rvv(state, instr, program.code.size());
    } catch (const Trap& t) {
      throw SimTrap(t, stats);
    }
    stats.count(cls);
    if (vl > 0) ++stats.strip_iterations;
    if (opts.trace) opts.trace(at, instr, cls);
    ++steps;
  }
  return {std::move(state), std::move(stats)};
}

}  // namespace zoozve
