#include "zoozve/compiler.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "zoozve/assembler.hpp"
#include "zoozve/encoding.hpp"
#include "zoozve/errors.hpp"
#include "zoozve/sim.hpp"

namespace zoozve {

IrModule split_intrinsics(const IrModule& m, const VConfig& config) {
  verify(m);
  config.validate();
  if (config.vlen_bits % m.vew_bits != 0)
    throw VerifyError("vlen is not a multiple of the module element width");

  uint32_t epr = config.vlen_bits / m.vew_bits;
  IrModule s;
  s.vew_bits = m.vew_bits;
  s.split_vlen = config.vlen_bits;
  s.buffers = m.buffers;
  s.values.reserve(m.values.size());
  for (const IrValue& v : m.values) s.values.push_back({v.name, v.type, -1});

  int next_group = 0;
  auto members_of = [&](int value) {
    uint64_t bits = static_cast<uint64_t>(s.values[value].type.elems) *
                    s.vew_bits;
    uint64_t k = (bits + config.vlen_bits - 1) / config.vlen_bits;
    if (k > config.num_vregs)
      throw CapacityError("value %" + s.values[value].name + " needs " +
                          std::to_string(k) + " registers, register file has " +
                          std::to_string(config.num_vregs));
    return static_cast<uint32_t>(k);
  };
  auto begin_group = [&](int value) {
    int g = next_group++;
    if (value >= 0) s.values[value].group_id = g;
    IrOp d;
    d.kind = IrOpKind::DelimBegin;
    d.group_id = g;
    s.ops.push_back(d);
    return g;
  };
  auto end_group = [&](int g) {
    IrOp d;
    d.kind = IrOpKind::DelimEnd;
    d.group_id = g;
    s.ops.push_back(d);
  };

  for (const IrOp& op : m.ops) {
    switch (op.kind) {
      case IrOpKind::Load: {
        uint32_t k = members_of(op.result);
        int g = begin_group(op.result);
        for (uint32_t j = 0; j < k; ++j) {
          IrOp mo = op;
          mo.member = static_cast<int>(j);
          mo.buf_elem_offset = op.buf_elem_offset + static_cast<uint64_t>(j) * epr;
          mo.group_id = g;
          s.ops.push_back(mo);
        }
        end_group(g);
        break;
      }
      case IrOpKind::Store: {
        uint32_t k = members_of(op.operands[0]);
        int g = begin_group(-1);
        for (uint32_t j = 0; j < k; ++j) {
          IrOp mo = op;
          mo.member = static_cast<int>(j);
          mo.buf_elem_offset = op.buf_elem_offset + static_cast<uint64_t>(j) * epr;
          mo.group_id = g;
          s.ops.push_back(mo);
        }
        end_group(g);
        break;
      }
      case IrOpKind::ArithVV:
      case IrOpKind::ArithVX: {
        uint32_t k = members_of(op.result);
        int g = begin_group(op.result);
        for (uint32_t j = 0; j < k; ++j) {
          IrOp mo = op;
          mo.member = static_cast<int>(j);
          mo.group_id = g;
          s.ops.push_back(mo);
        }
        end_group(g);
        break;
      }
      case IrOpKind::RedSum:
      case IrOpKind::Gather:
      case IrOpKind::Scatter: {
        members_of(op.result);  // capacity check
        int g = begin_group(op.result);
        IrOp mo = op;
        mo.group_id = g;
        s.ops.push_back(mo);
        end_group(g);
        break;
      }
      case IrOpKind::DelimBegin:
      case IrOpKind::DelimEnd:
        throw VerifyError("input to split_intrinsics is already split");
    }
  }

  verify(s);
  return s;
}

std::vector<LiveInterval> compute_raw_intervals(const IrModule& split) {
  if (split.split_vlen == 0)
    throw VerifyError("live intervals are computed on split modules");

  std::map<std::pair<int, int>, LiveInterval> table;
  auto define = [&](int v, int member, uint32_t at) {
    table[{v, member}] = LiveInterval{
        v, member, at, at, split.values[v].group_id, member};
  };
  auto use = [&](int v, int member, uint32_t at) {
    auto it = table.find({v, member});
    if (it != table.end()) it->second.end = std::max(it->second.end, at);
  };
  auto use_whole = [&](int v, uint32_t at) {
    for (uint32_t k = 0; k < split.member_count(v); ++k)
      use(v, static_cast<int>(k), at);
  };

  for (uint32_t i = 0; i < split.ops.size(); ++i) {
    const IrOp& op = split.ops[i];
    switch (op.kind) {
      case IrOpKind::Load:
        define(op.result, op.member, i);
        break;
      case IrOpKind::Store:
        use(op.operands[0], op.member, i);
        break;
      case IrOpKind::ArithVV:
        use(op.operands[0], op.member, i);
        use(op.operands[1], op.member, i);
        define(op.result, op.member, i);
        break;
      case IrOpKind::ArithVX:
        use(op.operands[0], op.member, i);
        define(op.result, op.member, i);
        break;
      case IrOpKind::RedSum:
        use_whole(op.operands[0], i);
        define(op.result, 0, i);
        break;
      case IrOpKind::Gather:
      case IrOpKind::Scatter:
        use_whole(op.operands[0], i);
        use_whole(op.operands[1], i);
        for (uint32_t k = 0; k < split.member_count(op.result); ++k)
          define(op.result, static_cast<int>(k), i);
        break;
      case IrOpKind::DelimBegin:
      case IrOpKind::DelimEnd:
        break;
    }
  }

  std::vector<LiveInterval> out;
  out.reserve(table.size());
  for (auto& [key, iv] : table) out.push_back(iv);
  return out;  // ordered by (value, member) via map key order
}

std::vector<LiveInterval> force_group_intervals(
    std::vector<LiveInterval> intervals) {
  std::map<int, std::pair<uint32_t, uint32_t>> extent;  // group -> [min, max]
  for (const LiveInterval& iv : intervals) {
    if (iv.group_id < 0) continue;
    auto it = extent.find(iv.group_id);
    if (it == extent.end())
      extent[iv.group_id] = {iv.start, iv.end};
    else {
      it->second.first = std::min(it->second.first, iv.start);
      it->second.second = std::max(it->second.second, iv.end);
    }
  }
  for (LiveInterval& iv : intervals) {
    if (iv.group_id < 0) continue;
    iv.start = extent[iv.group_id].first;
    iv.end = extent[iv.group_id].second;
  }
  return intervals;
}

std::vector<LiveInterval> compute_live_intervals(const IrModule& split) {
  return force_group_intervals(compute_raw_intervals(split));
}

Assignment allocate_grouped(const std::vector<LiveInterval>& intervals,
                            const VConfig& config) {
  config.validate();

  struct Job {
    int group_id;   // -1 for a lone interval
    int value;
    uint32_t start, end, size;
    uint32_t order;  // creation order, for deterministic ties
    RegisterGroup assigned;
  };
  std::vector<Job> jobs;
  std::map<int, size_t> by_group;
  uint32_t order = 0;
  for (const LiveInterval& iv : intervals) {
    if (iv.group_id < 0) {
      jobs.push_back({-1, iv.value, iv.start, iv.end, 1, order++, {}});
      continue;
    }
    auto it = by_group.find(iv.group_id);
    if (it == by_group.end()) {
      by_group[iv.group_id] = jobs.size();
      jobs.push_back({iv.group_id, iv.value, iv.start, iv.end, 1, order++, {}});
    } else {
      Job& j = jobs[it->second];
      if (j.value != iv.value)
        throw AllocationError("delimiter group g" +
                              std::to_string(iv.group_id) +
                              " spans more than one value");
      j.start = std::min(j.start, iv.start);
      j.end = std::max(j.end, iv.end);
      j.size += 1;
    }
  }

  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    return a.start != b.start ? a.start < b.start : a.order < b.order;
  });

  std::vector<Job*> active;
  Assignment result;
  for (Job& job : jobs) {
    std::erase_if(active, [&](Job* a) { return a->end < job.start; });

    std::vector<RegisterGroup> occupied;
    occupied.reserve(active.size());
    uint32_t pressure = job.size;
    for (Job* a : active) {
      occupied.push_back(a->assigned);
      pressure += a->assigned.size();
    }
    std::sort(occupied.begin(), occupied.end(),
              [](const RegisterGroup& a, const RegisterGroup& b) {
                return a.head < b.head;
              });

    uint32_t head = 0;
    for (const RegisterGroup& o : occupied) {
      if (head + job.size <= o.head) break;
      head = std::max(head, o.tail);
    }
    if (head + job.size > config.num_vregs)
      throw AllocationError(
          "no run of " + std::to_string(job.size) +
          " consecutive free registers for group g" +
          std::to_string(job.group_id) + " (value " +
          std::to_string(job.value) + "); peak pressure " +
          std::to_string(pressure) + " of " + std::to_string(config.num_vregs));

    job.assigned = RegisterGroup{head, head + job.size};
    active.push_back(&job);
    if (job.group_id >= 0) result.groups[job.group_id] = job.assigned;
    result.value_groups[job.value] = job.assigned;
  }
  return result;
}

BufferLayout layout_buffers(const IrModule& m, uint64_t base) {
  BufferLayout layout;
  uint64_t addr = base;
  uint32_t esz = m.vew_bits / 8;
  for (const IrBuffer& b : m.buffers) {
    layout.address[b.name] = addr;
    addr += static_cast<uint64_t>(b.elems) * esz;
    addr = (addr + 63) & ~uint64_t{63};
  }
  layout.end = addr;
  return layout;
}

namespace {

// li-on-demand with a round-robin pool. Value 0 maps to x0 and never costs
// an instruction.
class ScalarMaterializer {
 public:
  uint8_t get(int64_t value, std::vector<AsmInstr>& out) {
    if (value == 0) return 0;
    if (value < INT32_MIN || value > INT32_MAX)
      throw EncodeError("scalar value " + std::to_string(value) +
                        " does not fit in an li immediate");
    auto it = by_value_.find(value);
    if (it != by_value_.end()) return it->second;
    uint8_t reg = static_cast<uint8_t>(1 + next_);
    next_ = (next_ + 1) % 31;
    for (auto e = by_value_.begin(); e != by_value_.end();)
      e = e->second == reg ? by_value_.erase(e) : std::next(e);
    by_value_[value] = reg;
    AsmInstr li;
    li.instr = ScalarLi{reg, static_cast<int32_t>(value)};
    out.push_back(li);
    return reg;
  }

 private:
  std::map<int64_t, uint8_t> by_value_;
  size_t next_ = 0;
};

uint8_t vew_selector(uint32_t vew_bits) {
  return vew_bits == 8 ? 0 : vew_bits == 16 ? 1 : 2;
}

void emit_prologue(uint32_t vew_bits, ScalarMaterializer& scalars,
                   std::vector<AsmInstr>& out) {
  uint8_t sel = vew_selector(vew_bits);
  AsmInstr set_vew;
  set_vew.instr = VSetCsr{kCsrVew, scalars.get(sel, out)};
  set_vew.scalar_value = sel;
  set_vew.has_scalar = true;
  out.push_back(set_vew);
  AsmInstr set_ext;
  set_ext.instr = VSetCsr{kCsrHeadExt, 0};
  set_ext.scalar_value = 0;
  set_ext.has_scalar = true;
  out.push_back(set_ext);
}

}  // namespace

std::vector<AsmInstr> lower(const IrModule& split, const Assignment& a,
                            const VConfig& config, const BufferLayout& layout) {
  if (split.split_vlen == 0) throw VerifyError("lower expects a split module");
  if (split.split_vlen != config.vlen_bits)
    throw VerifyError("module was split for a different vlen");
  uint32_t esz = split.vew_bits / 8;

  std::vector<AsmInstr> out;
  ScalarMaterializer scalars;
  emit_prologue(split.vew_bits, scalars, out);

  auto head_of = [&](int value) { return a.value_groups.at(value).head; };
  auto head16 = [&](uint32_t h) {
    if (h > kMaxVHead)
      throw EncodeError("register head " + std::to_string(h) +
                        " exceeds the 13-bit field");
    return static_cast<uint16_t>(h);
  };

  for (const IrOp& op : split.ops) {
    switch (op.kind) {
      case IrOpKind::DelimBegin:
      case IrOpKind::DelimEnd:
        break;  // compiler-internal, never emitted
      case IrOpKind::Load: {
        uint64_t elems = split.member_elems(op.result, op.member);
        uint64_t addr = layout.address.at(split.buffers[op.buffer].name) +
                        op.buf_elem_offset * esz;
        AsmInstr i;
        i.group_id = op.group_id;
        i.elems = elems;
        i.addr = addr;
        i.has_addr = true;
        i.elem_bytes = esz;
        uint8_t addr_reg = scalars.get(static_cast<int64_t>(addr), out);
        uint8_t avl_reg = scalars.get(static_cast<int64_t>(elems), out);
        i.instr = VLoad{head16(a.reg_of(op.result, op.member)), addr_reg,
                        avl_reg};
        out.push_back(i);
        break;
      }
      case IrOpKind::Store: {
        int v = op.operands[0];
        uint64_t elems = split.member_elems(v, op.member);
        uint64_t addr = layout.address.at(split.buffers[op.buffer].name) +
                        op.buf_elem_offset * esz;
        AsmInstr i;
        i.group_id = op.group_id;
        i.elems = elems;
        i.addr = addr;
        i.has_addr = true;
        i.elem_bytes = esz;
        uint8_t addr_reg = scalars.get(static_cast<int64_t>(addr), out);
        uint8_t avl_reg = scalars.get(static_cast<int64_t>(elems), out);
        i.instr = VStore{head16(a.reg_of(v, op.member)), addr_reg, avl_reg};
        out.push_back(i);
        break;
      }
      case IrOpKind::ArithVV: {
        uint64_t elems = split.member_elems(op.result, op.member);
        AsmInstr i;
        i.group_id = op.group_id;
        i.elems = elems;
        uint8_t avl_reg = scalars.get(static_cast<int64_t>(elems), out);
        i.instr = VArithVV{op.arith, head16(a.reg_of(op.result, op.member)),
                           head16(a.reg_of(op.operands[0], op.member)),
                           head16(a.reg_of(op.operands[1], op.member)),
                           avl_reg};
        out.push_back(i);
        break;
      }
      case IrOpKind::ArithVX: {
        uint64_t elems = split.member_elems(op.result, op.member);
        AsmInstr i;
        i.group_id = op.group_id;
        i.elems = elems;
        i.scalar_value = op.scalar_imm;
        i.has_scalar = true;
        uint8_t rs2 = scalars.get(op.scalar_imm, out);
        uint8_t avl_reg = scalars.get(static_cast<int64_t>(elems), out);
        i.instr = VArithVX{op.arith, head16(a.reg_of(op.result, op.member)),
                           head16(a.reg_of(op.operands[0], op.member)), rs2,
                           avl_reg};
        out.push_back(i);
        break;
      }
      case IrOpKind::RedSum: {
        uint64_t elems = split.values[op.operands[0]].type.elems;
        AsmInstr i;
        i.group_id = op.group_id;
        i.elems = elems;
        uint8_t avl_reg = scalars.get(static_cast<int64_t>(elems), out);
        i.instr = VRedSum{head16(head_of(op.result)),
                          head16(head_of(op.operands[0])), avl_reg};
        out.push_back(i);
        break;
      }
      case IrOpKind::Gather: {
        uint64_t elems = split.values[op.operands[1]].type.elems;
        AsmInstr i;
        i.group_id = op.group_id;
        i.elems = elems;
        uint8_t avl_reg = scalars.get(static_cast<int64_t>(elems), out);
        i.instr = VGather{head16(head_of(op.result)),
                          head16(head_of(op.operands[0])),
                          head16(head_of(op.operands[1])), avl_reg};
        out.push_back(i);
        break;
      }
      case IrOpKind::Scatter: {
        uint64_t elems = split.values[op.operands[0]].type.elems;
        AsmInstr i;
        i.group_id = op.group_id;
        i.elems = elems;
        uint8_t avl_reg = scalars.get(static_cast<int64_t>(elems), out);
        i.instr = VScatter{head16(head_of(op.result)),
                           head16(head_of(op.operands[0])),
                           head16(head_of(op.operands[1])), avl_reg};
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

// Merging walks the split assembly in order. Two adjacent vector
// instructions fuse when they belong to the same delimiter group, are the
// same operation, every vector operand register is exactly one past its
// predecessor's, memory operands continue contiguously, and scalar operands
// carry the same value. The fused instruction keeps the head registers and
// the summed element count, which matches the register-file layout because
// only a group's last member can be partial. Scalar setup is thrown away and
// rematerialized afterwards, so li instructions that only served unmerged
// splits disappear.
std::vector<AsmInstr> coalesce(const std::vector<AsmInstr>& split_asm) {
  struct Pending {
    AsmInstr acc;
    uint32_t next_vd = 0, next_vs1 = 0, next_vs2 = 0;
    uint64_t next_addr = 0;
  };
  std::optional<Pending> pend;
  std::vector<AsmInstr> merged;
  auto flush = [&] {
    if (pend) merged.push_back(pend->acc);
    pend.reset();
  };

  for (const AsmInstr& cur : split_asm) {
    if (std::holds_alternative<ScalarLi>(cur.instr)) continue;

    if (pend) {
      Pending& p = *pend;
      bool fused = false;
      if (cur.group_id >= 0 && cur.group_id == p.acc.group_id) {
        if (const auto* l = std::get_if<VLoad>(&cur.instr);
            l && std::holds_alternative<VLoad>(p.acc.instr)) {
          if (l->vd_head == p.next_vd && cur.has_addr &&
              cur.addr == p.next_addr) {
            p.acc.elems += cur.elems;
            p.next_vd += 1;
            p.next_addr += cur.elems * cur.elem_bytes;
            fused = true;
          }
        } else if (const auto* st = std::get_if<VStore>(&cur.instr);
                   st && std::holds_alternative<VStore>(p.acc.instr)) {
          if (st->vs3_head == p.next_vd && cur.has_addr &&
              cur.addr == p.next_addr) {
            p.acc.elems += cur.elems;
            p.next_vd += 1;
            p.next_addr += cur.elems * cur.elem_bytes;
            fused = true;
          }
        } else if (const auto* vv = std::get_if<VArithVV>(&cur.instr)) {
          const auto* avv = std::get_if<VArithVV>(&p.acc.instr);
          if (avv && vv->op == avv->op && vv->vd_head == p.next_vd &&
              vv->vs1_head == p.next_vs1 && vv->vs2_head == p.next_vs2) {
            p.acc.elems += cur.elems;
            p.next_vd += 1;
            p.next_vs1 += 1;
            p.next_vs2 += 1;
            fused = true;
          }
        } else if (const auto* vx = std::get_if<VArithVX>(&cur.instr)) {
          const auto* avx = std::get_if<VArithVX>(&p.acc.instr);
          if (avx && vx->op == avx->op && vx->vd_head == p.next_vd &&
              vx->vs2_head == p.next_vs2 &&
              cur.scalar_value == p.acc.scalar_value) {
            p.acc.elems += cur.elems;
            p.next_vd += 1;
            p.next_vs2 += 1;
            fused = true;
          }
        }
      }
      if (fused) continue;
      flush();
    }

    // Start a new run; ops that never merge pass straight through.
    Pending p;
    p.acc = cur;
    if (const auto* l = std::get_if<VLoad>(&cur.instr)) {
      p.next_vd = l->vd_head + 1;
      p.next_addr = cur.addr + cur.elems * cur.elem_bytes;
      pend = p;
    } else if (const auto* st = std::get_if<VStore>(&cur.instr)) {
      p.next_vd = st->vs3_head + 1;
      p.next_addr = cur.addr + cur.elems * cur.elem_bytes;
      pend = p;
    } else if (const auto* vv = std::get_if<VArithVV>(&cur.instr)) {
      p.next_vd = vv->vd_head + 1;
      p.next_vs1 = vv->vs1_head + 1;
      p.next_vs2 = vv->vs2_head + 1;
      pend = p;
    } else if (const auto* vx = std::get_if<VArithVX>(&cur.instr)) {
      p.next_vd = vx->vd_head + 1;
      p.next_vs2 = vx->vs2_head + 1;
      pend = p;
    } else {
      merged.push_back(cur);  // redsum/gather/scatter/vsetcsr
    }
  }
  flush();

  // Rematerialize scalar setup for the merged stream.
  std::vector<AsmInstr> out;
  ScalarMaterializer scalars;
  for (AsmInstr i : merged) {
    if (auto* l = std::get_if<VLoad>(&i.instr)) {
      l->rs_addr = scalars.get(static_cast<int64_t>(i.addr), out);
      l->rs_avl = scalars.get(static_cast<int64_t>(i.elems), out);
    } else if (auto* st = std::get_if<VStore>(&i.instr)) {
      st->rs_addr = scalars.get(static_cast<int64_t>(i.addr), out);
      st->rs_avl = scalars.get(static_cast<int64_t>(i.elems), out);
    } else if (auto* vv = std::get_if<VArithVV>(&i.instr)) {
      vv->rs_avl = scalars.get(static_cast<int64_t>(i.elems), out);
    } else if (auto* vx = std::get_if<VArithVX>(&i.instr)) {
      vx->rs2 = scalars.get(i.scalar_value, out);
      vx->rs_avl = scalars.get(static_cast<int64_t>(i.elems), out);
    } else if (auto* rs = std::get_if<VRedSum>(&i.instr)) {
      rs->rs_avl = scalars.get(static_cast<int64_t>(i.elems), out);
    } else if (auto* g = std::get_if<VGather>(&i.instr)) {
      g->rs_avl = scalars.get(static_cast<int64_t>(i.elems), out);
    } else if (auto* sc = std::get_if<VScatter>(&i.instr)) {
      sc->rs_avl = scalars.get(static_cast<int64_t>(i.elems), out);
    } else if (auto* cs = std::get_if<VSetCsr>(&i.instr)) {
      cs->rs_value = scalars.get(i.scalar_value, out);
    }
    out.push_back(i);
  }
  return out;
}

Program to_program(const std::vector<AsmInstr>& asm_instrs) {
  Program p;
  p.code.reserve(asm_instrs.size());
  for (const AsmInstr& i : asm_instrs) p.code.push_back(i.instr);
  p.validate();
  return p;
}

std::string format_asm(const std::vector<AsmInstr>& asm_instrs,
                       bool annotations) {
  std::ostringstream out;
  for (const AsmInstr& i : asm_instrs) {
    out << "    " << format_instruction(i.instr);
    if (annotations && i.group_id >= 0) {
      out << "    # g" << i.group_id << " n=" << i.elems;
      if (i.has_addr) out << " addr=" << i.addr;
      if (i.has_scalar) out << " x=" << i.scalar_value;
    }
    out << "\n";
  }
  return out.str();
}

CompileResult compile(const IrModule& m, const VConfig& config) {
  CompileResult r;
  r.module = m;
  verify(r.module);
  r.layout = layout_buffers(m);
  r.split = split_intrinsics(m, config);
  r.intervals = compute_live_intervals(r.split);
  r.assignment = allocate_grouped(r.intervals, config);
  r.split_asm = lower(r.split, r.assignment, config, r.layout);
  r.final_asm = coalesce(r.split_asm);
  r.program = to_program(r.final_asm);
  return r;
}

CompileResult compile_text(const std::string& ir_text, const VConfig& config) {
  return compile(parse_ir(ir_text), config);
}

std::vector<std::string> write_staged_files(const CompileResult& r,
                                            const std::string& outdir,
                                            const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  auto path = [&](const std::string& suffix) {
    return (fs::path(outdir) / (name + suffix)).string();
  };
  auto write_text = [](const std::string& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw Error("cannot open " + p + " for writing");
    out << text;
  };

  std::vector<std::string> paths;
  paths.push_back(path(".0.ir"));
  write_text(paths.back(), print_ir(r.module));
  paths.push_back(path(".split.ir"));
  write_text(paths.back(), print_ir(r.split));
  paths.push_back(path("_before_merge.s"));
  write_text(paths.back(), format_asm(r.split_asm, true));
  paths.push_back(path(".s"));
  write_text(paths.back(), format_asm(r.final_asm, false));
  paths.push_back(path(".bin"));
  save_program_file(r.program, paths.back());
  paths.push_back(path("_asm.txt"));
  write_text(paths.back(), disassemble(load_program_file(path(".bin"))));
  return paths;
}

}  // namespace zoozve
