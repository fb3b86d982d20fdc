#include "zoozve/instruction.hpp"

#include <variant>

#include "zoozve/errors.hpp"

namespace zoozve {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

}  // namespace

InstrClass class_of(const Instruction& instr) {
  return std::visit(
      Overload{
          [](const VLoad&) { return InstrClass::VectorLoadStore; },
          [](const VStore&) { return InstrClass::VectorLoadStore; },
          [](const RvvLoad&) { return InstrClass::VectorLoadStore; },
          [](const RvvStore&) { return InstrClass::VectorLoadStore; },
          [](const VArithVV&) { return InstrClass::VectorArith; },
          [](const VArithVX&) { return InstrClass::VectorArith; },
          [](const VRedSum&) { return InstrClass::VectorArith; },
          [](const VGather&) { return InstrClass::VectorArith; },
          [](const VScatter&) { return InstrClass::VectorArith; },
          [](const RvvArithVV&) { return InstrClass::VectorArith; },
          [](const RvvArithVX&) { return InstrClass::VectorArith; },
          [](const RvvRedSum&) { return InstrClass::VectorArith; },
          [](const VRGatherVV&) { return InstrClass::VectorArith; },
          [](const VSetCsr&) { return InstrClass::VectorControl; },
          [](const VSetVli&) { return InstrClass::VectorControl; },
          [](const auto&) { return InstrClass::Scalar; },
      },
      instr);
}

const char* class_name(InstrClass c) {
  switch (c) {
    case InstrClass::VectorLoadStore: return "vector-load/store";
    case InstrClass::VectorArith: return "vector-arith";
    case InstrClass::VectorControl: return "vector-control";
    case InstrClass::Scalar: return "scalar";
  }
  return "?";
}

bool is_rvv(const Instruction& instr) {
  return std::holds_alternative<VSetVli>(instr) ||
         std::holds_alternative<RvvLoad>(instr) ||
         std::holds_alternative<RvvStore>(instr) ||
         std::holds_alternative<RvvArithVV>(instr) ||
         std::holds_alternative<RvvArithVX>(instr) ||
         std::holds_alternative<RvvRedSum>(instr) ||
         std::holds_alternative<VRGatherVV>(instr);
}

bool is_scalar(const Instruction& instr) {
  return class_of(instr) == InstrClass::Scalar;
}

bool is_wide_vector(const Instruction& instr) {
  return !is_scalar(instr) && !is_rvv(instr);
}

const char* arith_name(VArithOp op) {
  switch (op) {
    case VArithOp::Add: return "add";
    case VArithOp::Sub: return "sub";
    case VArithOp::Mul: return "mul";
    case VArithOp::And: return "and";
    case VArithOp::Or: return "or";
    case VArithOp::Xor: return "xor";
    case VArithOp::Sra: return "sra";
    case VArithOp::Sll: return "sll";
  }
  return "?";
}

void Program::validate() const {
  auto check_target = [this](uint32_t target) {
    if (target > code.size())
      throw Error("branch target " + std::to_string(target) +
                  " outside program of length " + std::to_string(code.size()));
  };
  for (const Instruction& instr : code) {
    if (const auto* b = std::get_if<Branch>(&instr)) check_target(b->target);
    if (const auto* j = std::get_if<Jal>(&instr)) check_target(j->target);
  }
  if (entry > code.size()) throw Error("entry point outside program");
}

}  // namespace zoozve
