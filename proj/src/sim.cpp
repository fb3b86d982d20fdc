#include "zoozve/sim.hpp"

#include <string>
#include <variant>
#include <vector>

namespace zoozve {

namespace detail {

uint64_t load_elem(const std::vector<uint8_t>& buf, size_t byte_offset,
                   uint32_t vew_bits) {
  uint64_t v = 0;
  for (uint32_t i = 0; i < vew_bits / 8; ++i)
    v |= static_cast<uint64_t>(buf[byte_offset + i]) << (8 * i);
  return v;
}

void store_elem(std::vector<uint8_t>& buf, size_t byte_offset,
                uint32_t vew_bits, uint64_t value) {
  for (uint32_t i = 0; i < vew_bits / 8; ++i)
    buf[byte_offset + i] = static_cast<uint8_t>((value >> (8 * i)) & 0xFF);
}

bool step_scalar(ScalarCore& c, const Instruction& instr,
                 uint64_t program_len) {
  uint64_t next = c.pc + 1;
  if (const auto* i = std::get_if<ScalarLi>(&instr)) {
    c.set_x(i->rd, static_cast<uint64_t>(static_cast<int64_t>(i->imm)));
  } else if (const auto* i = std::get_if<ScalarAlu>(&instr)) {
    uint64_t a = c.x(i->rs1), b = c.x(i->rs2);
    uint64_t r = i->op == ScalarAluOp::Add   ? a + b
                 : i->op == ScalarAluOp::Sub ? a - b
                                             : a * b;
    c.set_x(i->rd, r);
  } else if (const auto* i = std::get_if<ScalarSlli>(&instr)) {
    c.set_x(i->rd, c.x(i->rs1) << (i->shamt & 63));
  } else if (const auto* i = std::get_if<Branch>(&instr)) {
    bool taken = i->op == BranchOp::Bne
                     ? c.x(i->rs1) != c.x(i->rs2)
                     : static_cast<int64_t>(c.x(i->rs1)) >=
                           static_cast<int64_t>(c.x(i->rs2));
    if (taken) next = i->target;
  } else if (const auto* i = std::get_if<Jal>(&instr)) {
    c.set_x(i->rd, c.pc + 1);
    next = i->target;
  } else if (const auto* i = std::get_if<ScalarLw>(&instr)) {
    uint64_t addr = c.x(i->rs1) + static_cast<int64_t>(i->imm);
    if (addr % 4 != 0) throw Trap("misaligned lw at address " + std::to_string(addr), c.pc);
    if (addr + 4 > c.mem.size()) throw Trap("lw out of memory bounds", c.pc);
    int32_t v = static_cast<int32_t>(load_elem(c.mem, addr, 32));
    c.set_x(i->rd, static_cast<uint64_t>(static_cast<int64_t>(v)));
  } else if (const auto* i = std::get_if<ScalarSw>(&instr)) {
    uint64_t addr = c.x(i->rs1) + static_cast<int64_t>(i->imm);
    if (addr % 4 != 0) throw Trap("misaligned sw at address " + std::to_string(addr), c.pc);
    if (addr + 4 > c.mem.size()) throw Trap("sw out of memory bounds", c.pc);
    store_elem(c.mem, addr, 32, c.x(i->rs2) & 0xFFFFFFFF);
  } else {
    return false;
  }
  if (next > program_len) throw Trap("jump beyond program end", c.pc);
  c.pc = next;
  return true;
}

}  // namespace detail

uint64_t eval_arith(VArithOp op, uint64_t a, uint64_t b, uint32_t vew_bits) {
  uint64_t mask = vew_bits == 64 ? ~uint64_t{0}
                                 : (uint64_t{1} << vew_bits) - 1;
  switch (op) {
    case VArithOp::Add: return (a + b) & mask;
    case VArithOp::Sub: return (a - b) & mask;
    case VArithOp::Mul: return (a * b) & mask;
    case VArithOp::And: return a & b;
    case VArithOp::Or: return a | b;
    case VArithOp::Xor: return a ^ b;
    case VArithOp::Sll: return (a << (b & (vew_bits - 1))) & mask;
    case VArithOp::Sra: {
      uint32_t sh = static_cast<uint32_t>(b & (vew_bits - 1));
      // sign-extend a from vew_bits, then shift
      int64_t sa = static_cast<int64_t>(a << (64 - vew_bits)) >>
                   (64 - vew_bits);
      return static_cast<uint64_t>(sa >> sh) & mask;
    }
  }
  return 0;
}

MachineState::MachineState(const VConfig& cfg, size_t mem_size)
    : config(cfg) {
  config.validate();
  vregs.assign(static_cast<size_t>(config.num_vregs) * config.vlen_bits / 8,
               0);
  csrs[kCsrVew] = config.vew_bits == 8 ? 0 : config.vew_bits == 16 ? 1 : 2;
  csrs[kCsrHeadExt] = 0;
  core.mem.assign(mem_size, 0);
}

uint32_t MachineState::current_vew() const {
  switch (csrs.at(kCsrVew)) {
    case 0: return 8;
    case 1: return 16;
    case 2: return 32;
  }
  throw Error("corrupt element-width csr");
}

uint64_t MachineState::vreg_elem(uint32_t head, uint64_t elem) const {
  uint32_t vew = current_vew();
  size_t off = static_cast<size_t>(head) * (config.vlen_bits / 8) +
               elem * (vew / 8);
  return detail::load_elem(vregs, off, vew);
}

void MachineState::set_vreg_elem(uint32_t head, uint64_t elem,
                                 uint64_t value) {
  uint32_t vew = current_vew();
  size_t off = static_cast<size_t>(head) * (config.vlen_bits / 8) +
               elem * (vew / 8);
  detail::store_elem(vregs, off, vew, value);
}

namespace {

// Bounds-checks the group [head, head + regs-for-avl-elements) and returns it.
RegisterGroup checked_group(const MachineState& s, uint32_t head, uint64_t avl,
                            const char* what) {
  uint64_t count = avl == 0 ? 1 : avl;
  RegisterGroup g = compute_group(head, count, s.current_vew(),
                                  s.config.vlen_bits);
  if (head >= s.config.num_vregs || g.tail > s.config.num_vregs)
    throw Trap(std::string(what) + " group [" + std::to_string(g.head) + ", " +
                   std::to_string(g.tail) + ") exceeds register file of " +
                   std::to_string(s.config.num_vregs),
               s.core.pc);
  return g;
}

void check_mem(const MachineState& s, uint64_t addr, uint64_t bytes,
               uint32_t align) {
  if (addr % align != 0)
    throw Trap("misaligned vector memory access at address " +
                   std::to_string(addr),
               s.core.pc);
  if (addr + bytes > s.core.mem.size())
    throw Trap("vector memory access [" + std::to_string(addr) + ", " +
                   std::to_string(addr + bytes) + ") out of bounds",
               s.core.pc);
}

std::vector<uint64_t> read_group(const MachineState& s, uint32_t head,
                                 uint64_t count) {
  std::vector<uint64_t> out(count);
  for (uint64_t i = 0; i < count; ++i) out[i] = s.vreg_elem(head, i);
  return out;
}

}  // namespace

void step(MachineState& s, const Instruction& instr, uint64_t program_len) {
  if (is_rvv(instr))
    throw Trap("rvv instruction is not valid on the wide-register machine",
               s.core.pc);
  if (detail::step_scalar(s.core, instr, program_len)) return;

  uint32_t vew = s.current_vew();
  uint32_t esz = vew / 8;
  uint64_t next = s.core.pc + 1;

  if (const auto* i = std::get_if<VLoad>(&instr)) {
    uint64_t avl = s.core.x(i->rs_avl);
    checked_group(s, i->vd_head, avl, "vload destination");
    uint64_t addr = s.core.x(i->rs_addr);
    check_mem(s, addr, avl * esz, esz);
    for (uint64_t e = 0; e < avl; ++e)
      s.set_vreg_elem(i->vd_head, e,
                      detail::load_elem(s.core.mem, addr + e * esz, vew));
  } else if (const auto* i = std::get_if<VStore>(&instr)) {
    uint64_t avl = s.core.x(i->rs_avl);
    checked_group(s, i->vs3_head, avl, "vstore source");
    uint64_t addr = s.core.x(i->rs_addr);
    check_mem(s, addr, avl * esz, esz);
    for (uint64_t e = 0; e < avl; ++e)
      detail::store_elem(s.core.mem, addr + e * esz, vew,
                         s.vreg_elem(i->vs3_head, e));
  } else if (const auto* i = std::get_if<VArithVV>(&instr)) {
    uint64_t avl = s.core.x(i->rs_avl);
    checked_group(s, i->vd_head, avl, "destination");
    checked_group(s, i->vs1_head, avl, "source 1");
    checked_group(s, i->vs2_head, avl, "source 2");
    std::vector<uint64_t> a = read_group(s, i->vs1_head, avl);
    std::vector<uint64_t> b = read_group(s, i->vs2_head, avl);
    for (uint64_t e = 0; e < avl; ++e)
      s.set_vreg_elem(i->vd_head, e, eval_arith(i->op, a[e], b[e], vew));
  } else if (const auto* i = std::get_if<VArithVX>(&instr)) {
    uint64_t avl = s.core.x(i->rs_avl);
    checked_group(s, i->vd_head, avl, "destination");
    checked_group(s, i->vs2_head, avl, "source");
    uint64_t mask = vew == 64 ? ~uint64_t{0} : (uint64_t{1} << vew) - 1;
    uint64_t scalar = s.core.x(i->rs2) & mask;
    std::vector<uint64_t> a = read_group(s, i->vs2_head, avl);
    for (uint64_t e = 0; e < avl; ++e)
      s.set_vreg_elem(i->vd_head, e, eval_arith(i->op, a[e], scalar, vew));
  } else if (const auto* i = std::get_if<VRedSum>(&instr)) {
    uint64_t avl = s.core.x(i->rs_avl);
    checked_group(s, i->vs2_head, avl, "reduction source");
    checked_group(s, i->vd_head, 1, "reduction destination");
    uint64_t sum = 0;
    for (uint64_t e = 0; e < avl; ++e)
      sum = eval_arith(VArithOp::Add, sum, s.vreg_elem(i->vs2_head, e), vew);
    s.set_vreg_elem(i->vd_head, 0, sum);
  } else if (const auto* i = std::get_if<VGather>(&instr)) {
    // Destination VL equals the index count, independent of the source VL.
    uint64_t avl = s.core.x(i->rs_avl);
    checked_group(s, i->vd_head, avl, "gather destination");
    checked_group(s, i->vs2_head, avl, "gather index");
    if (i->vs1_head >= s.config.num_vregs)
      throw Trap("gather source head out of range", s.core.pc);
    uint64_t src_capacity =
        static_cast<uint64_t>(s.config.num_vregs - i->vs1_head) *
        s.elements_per_register();
    std::vector<uint64_t> idx = read_group(s, i->vs2_head, avl);
    std::vector<uint64_t> data(avl);
    for (uint64_t e = 0; e < avl; ++e) {
      if (idx[e] >= src_capacity)
        throw Trap("gather index " + std::to_string(idx[e]) +
                       " exceeds source capacity " +
                       std::to_string(src_capacity),
                   s.core.pc);
      data[e] = s.vreg_elem(i->vs1_head, idx[e]);
    }
    for (uint64_t e = 0; e < avl; ++e) s.set_vreg_elem(i->vd_head, e, data[e]);
  } else if (const auto* i = std::get_if<VScatter>(&instr)) {
    // Source VL = avl; duplicate indices resolve to the highest i.
    uint64_t avl = s.core.x(i->rs_avl);
    checked_group(s, i->vs1_head, avl, "scatter source");
    checked_group(s, i->vs2_head, avl, "scatter index");
    if (i->vd_head >= s.config.num_vregs)
      throw Trap("scatter destination head out of range", s.core.pc);
    uint64_t dst_capacity =
        static_cast<uint64_t>(s.config.num_vregs - i->vd_head) *
        s.elements_per_register();
    std::vector<uint64_t> idx = read_group(s, i->vs2_head, avl);
    std::vector<uint64_t> data = read_group(s, i->vs1_head, avl);
    for (uint64_t e = 0; e < avl; ++e) {
      if (idx[e] >= dst_capacity)
        throw Trap("scatter index " + std::to_string(idx[e]) +
                       " exceeds destination capacity " +
                       std::to_string(dst_capacity),
                   s.core.pc);
      s.set_vreg_elem(i->vd_head, idx[e], data[e]);
    }
  } else if (const auto* i = std::get_if<VSetCsr>(&instr)) {
    uint64_t value = s.core.x(i->rs_value);
    if (i->csr_id == kCsrVew) {
      if (value > 2)
        throw Trap("bad element-width selector " + std::to_string(value),
                   s.core.pc);
      s.csrs[kCsrVew] = value;
    } else if (i->csr_id == kCsrHeadExt) {
      if (value != 0)
        throw Trap("nonzero register-index extension is not supported",
                   s.core.pc);
      s.csrs[kCsrHeadExt] = 0;
    } else {
      throw Trap("undefined csr " + std::to_string(i->csr_id), s.core.pc);
    }
  } else {
    throw Trap("unhandled instruction", s.core.pc);
  }

  s.core.pc = next;
}

std::pair<MachineState, TraceStats> run(const Program& program,
                                        const VConfig& config,
                                        const std::vector<uint8_t>& init_mem,
                                        const RunOptions& opts) {
  program.validate();
  MachineState state(config, opts.mem_size);
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
    try {
      step(state, instr, program.code.size());
    } catch (const SimTrap&) {
      throw;
    } catch (const Trap& t) {
      throw SimTrap(t, stats);
    }
    stats.count(cls);
    if (opts.trace) opts.trace(at, instr, cls);
    ++steps;
  }
  return {std::move(state), std::move(stats)};
}

}  // namespace zoozve
