#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zoozve/config.hpp"
#include "zoozve/instruction.hpp"
#include "zoozve/ir.hpp"

namespace zoozve {

// Rewrites every splittable op (load/store/arith) into per-register member
// ops bracketed by delimiters; redsum/gather/scatter carry their whole
// groups through as single ops inside their own delimiter pair. Split j of a
// value holds elements [j*epr, min((j+1)*epr, L)).
IrModule split_intrinsics(const IrModule& m, const VConfig& config);

struct LiveInterval {
  int value;
  int member;          // register slot within the value
  uint32_t start, end; // op indices in the split module, inclusive
  int group_id;        // delimiter group (-1 for ungrouped intervals)
  int group_rank;      // slot within the group
  bool operator==(const LiveInterval&) const = default;
};

std::vector<LiveInterval> compute_raw_intervals(const IrModule& split);

// Widens each delimiter group's member intervals to the group union,
// anchored at the first member's definition. Idempotent.
std::vector<LiveInterval> force_group_intervals(
    std::vector<LiveInterval> intervals);

// compute_raw_intervals + force_group_intervals.
std::vector<LiveInterval> compute_live_intervals(const IrModule& split);

struct Assignment {
  std::map<int, RegisterGroup> groups;        // group_id -> physical group
  std::map<int, RegisterGroup> value_groups;  // value -> physical group

  uint32_t reg_of(int value, int member) const {
    return value_groups.at(value).head + static_cast<uint32_t>(member);
  }
};

// Linear scan over forced intervals in start order (FIFO, ties by group id).
// Each group gets the lowest-head run of consecutive registers that is free
// for its whole interval; member k lands at head + k. No spilling: failure
// is an AllocationError naming the group, its size and the peak pressure.
Assignment allocate_grouped(const std::vector<LiveInterval>& intervals,
                            const VConfig& config);

// Buffer placement used by lowering and by the bench harness. The base
// avoids small powers of two so address constants rarely collide with
// element counts in the li-reuse cache.
constexpr uint64_t kBufferBase = 0x1040;

struct BufferLayout {
  std::map<std::string, uint64_t> address;
  uint64_t end = 0;
};
BufferLayout layout_buffers(const IrModule& m, uint64_t base = kBufferBase);

// One lowered instruction plus the metadata the coalescer needs.
struct AsmInstr {
  Instruction instr;
  int group_id = -1;        // -1: scalar setup
  uint64_t elems = 0;       // vector element count
  uint64_t addr = 0;        // memory operand address (loads/stores)
  bool has_addr = false;
  int64_t scalar_value = 0; // value in the scalar operand register
  bool has_scalar = false;
  uint32_t elem_bytes = 0;  // loads/stores: bytes per element
};

// Split assembly: one machine instruction per member op, plus li setup and a
// CSR prologue. Runnable as-is.
std::vector<AsmInstr> lower(const IrModule& split, const Assignment& a,
                            const VConfig& config, const BufferLayout& layout);

// Merges runs of member instructions within one delimiter group whose vector
// registers are consecutive and whose other parameters match, then
// rematerializes scalar setup. Runnable as-is.
std::vector<AsmInstr> coalesce(const std::vector<AsmInstr>& split_asm);

Program to_program(const std::vector<AsmInstr>& asm_instrs);

// Staged-pipeline listing with the coalescer's annotations as comments.
std::string format_asm(const std::vector<AsmInstr>& asm_instrs,
                       bool annotations);

struct CompileResult {
  IrModule module;
  IrModule split;
  std::vector<LiveInterval> intervals;
  Assignment assignment;
  std::vector<AsmInstr> split_asm;
  std::vector<AsmInstr> final_asm;
  Program program;
  BufferLayout layout;
};

CompileResult compile(const IrModule& m, const VConfig& config);
CompileResult compile_text(const std::string& ir_text, const VConfig& config);

// Emits <name>.0.ir, <name>.split.ir, <name>_before_merge.s, <name>.s,
// <name>.bin and <name>_asm.txt under outdir; returns the paths.
std::vector<std::string> write_staged_files(const CompileResult& r,
                                            const std::string& outdir,
                                            const std::string& name);

}  // namespace zoozve
