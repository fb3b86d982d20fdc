#pragma once

#include <cstdint>

#include "zoozve/errors.hpp"

namespace zoozve {

inline bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Half-open run [head, tail) of physical vector registers holding one value.
struct RegisterGroup {
  uint32_t head = 0;
  uint32_t tail = 0;  // exclusive

  uint32_t size() const { return tail - head; }
  bool operator==(const RegisterGroup&) const = default;
};

// Interval-overlap test on register groups. Groups are half-open, so
// adjacent groups are disjoint.
inline bool hazard_check(const RegisterGroup& a, const RegisterGroup& b) {
  return a.head < b.tail && b.head < a.tail;
}

// Registers needed for elem_count elements of vew_bits each:
// ceil(elem_count * vew / vlen), at least one register.
inline RegisterGroup compute_group(uint32_t head, uint64_t elem_count,
                                   uint32_t vew_bits, uint32_t vlen_bits) {
  uint64_t bits = elem_count * static_cast<uint64_t>(vew_bits);
  uint64_t regs = (bits + vlen_bits - 1) / vlen_bits;
  if (regs == 0) regs = 1;
  return RegisterGroup{head, head + static_cast<uint32_t>(regs)};
}

// Machine parameters for the wide-register-file vector extension.
// vew_bits is the reset value of the element-width CSR; it can be changed
// at run time with vsetcsr.
struct VConfig {
  uint32_t vlen_bits = 512;
  uint32_t num_vregs = 2048;
  uint32_t vew_bits = 16;

  void validate() const {
    if (!is_pow2(vlen_bits) || vlen_bits % 8 != 0)
      throw Error("vlen_bits must be a power of two and a multiple of 8");
    if (vew_bits != 8 && vew_bits != 16 && vew_bits != 32)
      throw Error("vew_bits must be one of 8, 16, 32");
    if (vlen_bits < vew_bits) throw Error("vlen_bits must be >= vew_bits");
    if (num_vregs < 32) throw Error("num_vregs must be >= 32");
  }

  uint32_t elements_per_register() const { return vlen_bits / vew_bits; }

  // As compute_group, but rejects groups that fall off the register file.
  RegisterGroup group_for(uint32_t head, uint64_t elem_count) const {
    RegisterGroup g = compute_group(head, elem_count, vew_bits, vlen_bits);
    if (g.tail > num_vregs)
      throw CapacityError("register group at head " + std::to_string(head) +
                          " needs " + std::to_string(g.size()) +
                          " registers, exceeding the " +
                          std::to_string(num_vregs) + "-register file");
    return g;
  }
};

// Baseline machine: fixed 32 registers, power-of-two grouping.
struct RvvConfig {
  static constexpr uint32_t kNumRegs = 32;

  uint32_t vlen_bits = 512;
  uint32_t vew_bits = 16;
  uint32_t lmul = 1;

  void validate() const {
    if (!is_pow2(vlen_bits) || vlen_bits % 8 != 0)
      throw Error("vlen_bits must be a power of two and a multiple of 8");
    if (vew_bits != 8 && vew_bits != 16 && vew_bits != 32)
      throw Error("vew_bits must be one of 8, 16, 32");
    if (lmul != 1 && lmul != 2 && lmul != 4 && lmul != 8)
      throw Error("lmul must be one of 1, 2, 4, 8");
    if (vlen_bits < vew_bits) throw Error("vlen_bits must be >= vew_bits");
  }

  // Per-strip element capacity.
  uint32_t vlmax() const { return lmul * vlen_bits / vew_bits; }
};

}  // namespace zoozve
