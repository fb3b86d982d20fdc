#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zoozve/config.hpp"
#include "zoozve/instruction.hpp"

namespace zoozve {

// Straight-line SSA intrinsic IR. One element width per module; every value
// is a vector type <L x iVEW>. Text grammar in docs/ir.md.

struct VecType {
  uint32_t elems = 0;
  uint32_t vew_bits = 0;
  bool operator==(const VecType&) const = default;
};

struct IrBuffer {
  std::string name;  // without '@'
  uint32_t elems = 0;
};

struct IrValue {
  std::string name;  // without '%'
  VecType type;
  int group_id = -1;  // delimiter group owning its defining ops (split form)
};

enum class IrOpKind : uint8_t {
  Load,
  Store,
  ArithVV,
  ArithVX,
  RedSum,
  Gather,
  Scatter,
  DelimBegin,
  DelimEnd,
};

struct IrOp {
  IrOpKind kind;
  VArithOp arith = VArithOp::Add;  // ArithVV / ArithVX
  int result = -1;                 // value index; -1 for Store / delimiters
  std::vector<int> operands;       // value indices
  int member = -1;    // split form: register slot this op defines/uses
  int buffer = -1;    // Load / Store
  uint64_t buf_elem_offset = 0;
  int64_t scalar_imm = 0;  // ArithVX
  int group_id = -1;       // delimiters and member ops
};

struct IrModule {
  uint32_t vew_bits = 0;
  uint32_t split_vlen = 0;  // nonzero once split into per-register form
  std::vector<IrBuffer> buffers;
  std::vector<IrValue> values;
  std::vector<IrOp> ops;

  int find_value(const std::string& name) const;
  int find_buffer(const std::string& name) const;

  uint32_t elements_per_register() const { return split_vlen / vew_bits; }

  // Registers a value occupies in split form.
  uint32_t member_count(int value) const;
  uint32_t member_elems(int value, uint32_t member) const;
};

// Parses and SSA-verifies; throws ParseError / VerifyError with the
// offending line or op index.
IrModule parse_ir(const std::string& text);

// Round-trips through parse_ir.
std::string print_ir(const IrModule& m);

// SSA + type checking; split-form rules (delimiter nesting, member slots)
// when m.split_vlen != 0.
void verify(const IrModule& m);

}  // namespace zoozve
