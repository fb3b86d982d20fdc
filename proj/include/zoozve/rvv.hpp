#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "zoozve/config.hpp"
#include "zoozve/instruction.hpp"
#include "zoozve/sim.hpp"

namespace zoozve {

// Baseline simulator: 32 vector registers, lmul-aligned power-of-two
// grouping, vsetvli-driven strips. Scalar subset and memory model are shared
// with the wide-register machine.
struct RvvState {
  RvvConfig config;
  std::vector<uint8_t> vregs;  // 32 * vlen_bits/8 bytes
  ScalarCore core;
  uint32_t vl = 0;
  uint32_t vtype_vew = 0;
  uint32_t vtype_lmul = 0;

  explicit RvvState(const RvvConfig& cfg, size_t mem_size = 16u << 20);

  uint32_t vlmax() const { return vtype_lmul * config.vlen_bits / vtype_vew; }
  uint64_t vreg_elem(uint32_t base, uint64_t elem) const;
  void set_vreg_elem(uint32_t base, uint64_t elem, uint64_t value);
};

// vl = min(avl, vlmax).
uint32_t vsetvli(uint64_t avl, const RvvConfig& config);

// ceil(n / vlmax): strips needed for n elements.
uint64_t strip_mine_iterations(uint64_t n, const RvvConfig& config);

// Fraction of the register group a strip of vl elements actually uses.
double rvv_utilization(uint64_t vl, const RvvConfig& config);

// Executes one RVV or scalar instruction; returns the vl produced when the
// instruction was a vsetvli (so callers can count strip iterations), or -1.
int64_t step_rvv(RvvState& state, const Instruction& instr,
                 uint64_t program_len);

// TraceStats.strip_iterations counts vsetvli executions that produced vl > 0.
std::pair<RvvState, TraceStats> run_rvv(const Program& program,
                                        const RvvConfig& config,
                                        const std::vector<uint8_t>& init_mem,
                                        const RunOptions& opts = {});

}  // namespace zoozve
