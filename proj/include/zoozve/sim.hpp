#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "zoozve/config.hpp"
#include "zoozve/errors.hpp"
#include "zoozve/instruction.hpp"

namespace zoozve {

struct TraceStats {
  uint64_t dynamic_count = 0;
  std::map<InstrClass, uint64_t> per_class;
  uint64_t strip_iterations = 0;

  void count(InstrClass c) {
    ++dynamic_count;
    ++per_class[c];
  }
  bool operator==(const TraceStats&) const = default;
};

// Scalar machine shared by both simulators: 32 x 64-bit registers with x0
// hardwired to zero, flat little-endian byte-addressable memory, pc as an
// instruction index (pc == program length means halted).
struct ScalarCore {
  std::array<uint64_t, 32> xregs{};
  std::vector<uint8_t> mem;
  uint64_t pc = 0;

  uint64_t x(uint8_t r) const { return r == 0 ? 0 : xregs[r]; }
  void set_x(uint8_t r, uint64_t v) {
    if (r != 0) xregs[r] = v;
  }
};

struct MachineState {
  VConfig config;
  std::vector<uint8_t> vregs;  // num_vregs * vlen_bits/8 bytes
  std::map<uint16_t, uint64_t> csrs;
  ScalarCore core;

  explicit MachineState(const VConfig& cfg, size_t mem_size = 16u << 20);

  uint32_t current_vew() const;
  uint32_t elements_per_register() const {
    return config.vlen_bits / current_vew();
  }

  // Raw element access at (head register, element offset within its group).
  uint64_t vreg_elem(uint32_t head, uint64_t elem) const;
  void set_vreg_elem(uint32_t head, uint64_t elem, uint64_t value);
};

// csr 0 selects the element width (0 -> 8, 1 -> 16, 2 -> 32); csr 1 holds
// register-index extension bits and must stay zero on this machine.
constexpr uint16_t kCsrVew = 0;
constexpr uint16_t kCsrHeadExt = 1;

// Wraparound two's-complement element arithmetic; shifts mask their amount
// to vew-1 bits and sra is arithmetic.
uint64_t eval_arith(VArithOp op, uint64_t a, uint64_t b, uint32_t vew_bits);

// Executes one non-RVV instruction. Inputs are read in full before any
// output is written, so overlapping operands are well defined. Elements at
// and beyond avl keep their previous contents.
void step(MachineState& state, const Instruction& instr,
          uint64_t program_len);

using TraceSink =
    std::function<void(uint64_t index, const Instruction&, InstrClass)>;

struct RunOptions {
  uint64_t max_steps = 100'000'000;
  size_t mem_size = 16u << 20;
  TraceSink trace;
};

// Trap/timeout variants that carry the stats gathered so far.
struct SimTrap : Trap {
  SimTrap(const Trap& t, TraceStats s) : Trap(t), partial(std::move(s)) {}
  TraceStats partial;
};
struct SimTimeout : TimeoutError {
  SimTimeout(std::string msg, TraceStats s)
      : TimeoutError(std::move(msg)), partial(std::move(s)) {}
  TraceStats partial;
};

std::pair<MachineState, TraceStats> run(const Program& program,
                                        const VConfig& config,
                                        const std::vector<uint8_t>& init_mem,
                                        const RunOptions& opts = {});

// Shared with the RVV simulator.
namespace detail {
uint64_t load_elem(const std::vector<uint8_t>& buf, size_t byte_offset,
                   uint32_t vew_bits);
void store_elem(std::vector<uint8_t>& buf, size_t byte_offset,
                uint32_t vew_bits, uint64_t value);
// True if the instruction was a scalar one and has been executed.
bool step_scalar(ScalarCore& core, const Instruction& instr,
                 uint64_t program_len);
}  // namespace detail

}  // namespace zoozve
