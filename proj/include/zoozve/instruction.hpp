#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "zoozve/config.hpp"

namespace zoozve {

// Shared arithmetic/logical op selector for both vector ISAs.
enum class VArithOp : uint8_t { Add, Sub, Mul, And, Or, Xor, Sra, Sll };
enum class ScalarAluOp : uint8_t { Add, Sub, Mul };
enum class BranchOp : uint8_t { Bne, Bge };

constexpr uint32_t kMaxVHead = (1u << 13) - 1;  // 13-bit register-head fields

// --- wide-register-file vector extension ---------------------------------

struct VLoad {  // unit-stride, avl elements from mem[x[rs_addr]]
  uint16_t vd_head;
  uint8_t rs_addr;
  uint8_t rs_avl;
  bool operator==(const VLoad&) const = default;
};

struct VStore {
  uint16_t vs3_head;
  uint8_t rs_addr;
  uint8_t rs_avl;
  bool operator==(const VStore&) const = default;
};

struct VArithVV {
  VArithOp op;
  uint16_t vd_head, vs1_head, vs2_head;
  uint8_t rs_avl;
  bool operator==(const VArithVV&) const = default;
};

struct VArithVX {  // vd[i] = vs2[i] op x[rs2]
  VArithOp op;
  uint16_t vd_head, vs2_head;
  uint8_t rs2;
  uint8_t rs_avl;
  bool operator==(const VArithVX&) const = default;
};

struct VRedSum {  // vd element 0 = wraparound sum of vs2[0..avl)
  uint16_t vd_head, vs2_head;
  uint8_t rs_avl;
  bool operator==(const VRedSum&) const = default;
};

struct VGather {  // vd[i] = vs1[vs2[i]], i < avl; destination VL = index count
  uint16_t vd_head, vs1_head, vs2_head;
  uint8_t rs_avl;
  bool operator==(const VGather&) const = default;
};

struct VScatter {  // vd[vs2[i]] = vs1[i], i < avl; source VL = avl
  uint16_t vd_head, vs1_head, vs2_head;
  uint8_t rs_avl;
  bool operator==(const VScatter&) const = default;
};

struct VSetCsr {  // csr 0: element width selector; csr 1: head extension bits
  uint16_t csr_id;
  uint8_t rs_value;
  bool operator==(const VSetCsr&) const = default;
};

// --- scalar subset ---------------------------------------------------------

struct ScalarLi {
  uint8_t rd;
  int32_t imm;
  bool operator==(const ScalarLi&) const = default;
};

struct ScalarAlu {
  ScalarAluOp op;
  uint8_t rd, rs1, rs2;
  bool operator==(const ScalarAlu&) const = default;
};

struct ScalarSlli {
  uint8_t rd, rs1;
  uint8_t shamt;  // masked to [0, 63]
  bool operator==(const ScalarSlli&) const = default;
};

struct Branch {  // target is an absolute instruction index
  BranchOp op;
  uint8_t rs1, rs2;
  uint32_t target;
  bool operator==(const Branch&) const = default;
};

struct Jal {  // rd = index of next instruction; pc = target
  uint8_t rd;
  uint32_t target;
  bool operator==(const Jal&) const = default;
};

struct ScalarLw {  // rd = sign-extended 32-bit load from x[rs1]+imm
  uint8_t rd, rs1;
  int32_t imm;
  bool operator==(const ScalarLw&) const = default;
};

struct ScalarSw {  // mem[x[rs1]+imm] = low 32 bits of x[rs2]
  uint8_t rs2, rs1;
  int32_t imm;
  bool operator==(const ScalarSw&) const = default;
};

// --- RVV-style baseline subset ----------------------------------------------

struct VSetVli {  // x[rd] = vl = min(x[rs_avl], vlmax(vew, lmul))
  uint8_t rd;
  uint8_t rs_avl;
  uint8_t vew_bits_log2;  // 3 -> e8, 4 -> e16, 5 -> e32
  uint8_t lmul;           // 1, 2, 4, 8
  bool operator==(const VSetVli&) const = default;
};

struct RvvLoad {  // vl elements; post_inc bumps x[rs_addr] past them
  uint8_t vd;
  uint8_t rs_addr;
  bool post_inc = false;
  bool operator==(const RvvLoad&) const = default;
};

struct RvvStore {
  uint8_t vs3;
  uint8_t rs_addr;
  bool post_inc = false;
  bool operator==(const RvvStore&) const = default;
};

struct RvvArithVV {
  VArithOp op;
  uint8_t vd, vs1, vs2;
  bool operator==(const RvvArithVV&) const = default;
};

struct RvvArithVX {
  VArithOp op;
  uint8_t vd, vs2, rs2;
  bool operator==(const RvvArithVX&) const = default;
};

struct RvvRedSum {  // vd[0] = vs1[0] + sum(vs2[0..vl))
  uint8_t vd, vs1, vs2;
  bool operator==(const RvvRedSum&) const = default;
};

struct VRGatherVV {  // vd[i] = vs2[i] < vlmax ? vs1[vs2[i]] : 0; i < vl
  uint8_t vd, vs1, vs2;
  bool operator==(const VRGatherVV&) const = default;
};

using Instruction =
    std::variant<VLoad, VStore, VArithVV, VArithVX, VRedSum, VGather, VScatter,
                 VSetCsr, ScalarLi, ScalarAlu, ScalarSlli, Branch, Jal,
                 ScalarLw, ScalarSw, VSetVli, RvvLoad, RvvStore, RvvArithVV,
                 RvvArithVX, RvvRedSum, VRGatherVV>;

enum class InstrClass { VectorLoadStore, VectorArith, VectorControl, Scalar };

InstrClass class_of(const Instruction& instr);
const char* class_name(InstrClass c);

bool is_rvv(const Instruction& instr);
bool is_wide_vector(const Instruction& instr);  // non-RVV vector variant
bool is_scalar(const Instruction& instr);

struct Program {
  std::vector<Instruction> code;
  std::map<std::string, uint32_t> labels;  // name -> instruction index
  uint32_t entry = 0;

  // Branch/jump targets must land in [0, size]; index == size halts.
  void validate() const;
};

const char* arith_name(VArithOp op);

}  // namespace zoozve
