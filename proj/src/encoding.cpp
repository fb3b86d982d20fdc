#include "zoozve/encoding.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "zoozve/errors.hpp"

// 64-bit instruction words. Bit layout (see docs/isa.md for the full table):
//
//   all       [6:0] opcode, [12:7] funct
//   wide vec  [25:13] vd/vs3 head, [38:26] vs1 head, [51:39] vs2 head,
//             [56:52] rs_a, [61:57] rs_b, [63:62] zero
//   scalar    [17:13] rd, [22:18] rs1, [27:23] rs2, [31:28] zero,
//             [63:32] imm32
//   rvv       [17:13] vd/vs3/rd, [22:18] vs1, [27:23] vs2, [32:28] rs_a,
//             [39:38] vew selector, [41:40] lmul selector, [42] post-inc,
//             [63:43] zero
//
// Any bit a variant does not define must be zero; decode rejects words with
// stray bits so that decode(encode(i)) == i and nothing else decodes.

namespace zoozve {

namespace {

constexpr uint64_t kOpVecMem = 0x0B;    // custom-0
constexpr uint64_t kOpVecArith = 0x2B;  // custom-1
constexpr uint64_t kOpVecCtrl = 0x5B;   // custom-2
constexpr uint64_t kOpLi = 0x13;
constexpr uint64_t kOpAlu = 0x33;
constexpr uint64_t kOpBranch = 0x63;
constexpr uint64_t kOpJal = 0x6F;
constexpr uint64_t kOpLw = 0x03;
constexpr uint64_t kOpSw = 0x23;
constexpr uint64_t kOpRvvArith = 0x57;
constexpr uint64_t kOpRvvLoad = 0x07;
constexpr uint64_t kOpRvvStore = 0x27;

constexpr uint64_t kFunctVV = 0;    // +op
constexpr uint64_t kFunctVX = 8;    // +op
constexpr uint64_t kFunctRedSum = 16;
constexpr uint64_t kFunctGather = 17;
constexpr uint64_t kFunctScatter = 18;
constexpr uint64_t kFunctVSetVli = 31;

uint64_t bits(uint64_t value, unsigned lo, unsigned width) {
  return (value >> lo) & ((uint64_t{1} << width) - 1);
}

void put(uint64_t& word, uint64_t value, unsigned lo, unsigned width,
         const char* what) {
  if (value >= (uint64_t{1} << width))
    throw EncodeError(std::string(what) + " value " + std::to_string(value) +
                      " does not fit in " + std::to_string(width) + " bits");
  word |= value << lo;
}

uint64_t head13(uint16_t v, uint64_t& word, unsigned lo, const char* what) {
  put(word, v, lo, 13, what);
  return word;
}

struct WideFields {
  uint16_t vd, vs1, vs2;
  uint8_t rs_a, rs_b;
};

uint64_t enc_wide(uint64_t opcode, uint64_t funct, const WideFields& f) {
  uint64_t w = 0;
  put(w, opcode, 0, 7, "opcode");
  put(w, funct, 7, 6, "funct");
  head13(f.vd, w, 13, "vd_head");
  head13(f.vs1, w, 26, "vs1_head");
  head13(f.vs2, w, 39, "vs2_head");
  put(w, f.rs_a, 52, 5, "rs_a");
  put(w, f.rs_b, 57, 5, "rs_b");
  return w;
}

WideFields dec_wide(uint64_t w) {
  return WideFields{static_cast<uint16_t>(bits(w, 13, 13)),
                    static_cast<uint16_t>(bits(w, 26, 13)),
                    static_cast<uint16_t>(bits(w, 39, 13)),
                    static_cast<uint8_t>(bits(w, 52, 5)),
                    static_cast<uint8_t>(bits(w, 57, 5))};
}

uint64_t enc_scalar(uint64_t opcode, uint64_t funct, uint8_t rd, uint8_t rs1,
                    uint8_t rs2, uint32_t imm) {
  uint64_t w = 0;
  put(w, opcode, 0, 7, "opcode");
  put(w, funct, 7, 6, "funct");
  put(w, rd, 13, 5, "rd");
  put(w, rs1, 18, 5, "rs1");
  put(w, rs2, 23, 5, "rs2");
  put(w, imm, 32, 32, "imm");
  return w;
}

struct RvvFields {
  uint8_t vd, vs1, vs2, rs_a;
  uint8_t vew_sel = 0, lmul_sel = 0;
  bool post_inc = false;
};

uint64_t enc_rvv(uint64_t opcode, uint64_t funct, const RvvFields& f) {
  uint64_t w = 0;
  put(w, opcode, 0, 7, "opcode");
  put(w, funct, 7, 6, "funct");
  put(w, f.vd, 13, 5, "vd");
  put(w, f.vs1, 18, 5, "vs1");
  put(w, f.vs2, 23, 5, "vs2");
  put(w, f.rs_a, 28, 5, "rs_a");
  put(w, f.vew_sel, 38, 2, "vew");
  put(w, f.lmul_sel, 40, 2, "lmul");
  if (f.post_inc) w |= uint64_t{1} << 42;
  return w;
}

RvvFields dec_rvv(uint64_t w) {
  RvvFields f;
  f.vd = static_cast<uint8_t>(bits(w, 13, 5));
  f.vs1 = static_cast<uint8_t>(bits(w, 18, 5));
  f.vs2 = static_cast<uint8_t>(bits(w, 23, 5));
  f.rs_a = static_cast<uint8_t>(bits(w, 28, 5));
  f.vew_sel = static_cast<uint8_t>(bits(w, 38, 2));
  f.lmul_sel = static_cast<uint8_t>(bits(w, 40, 2));
  f.post_inc = bits(w, 42, 1) != 0;
  return f;
}

uint8_t vew_sel_of(uint8_t vew_log2) {
  switch (vew_log2) {
    case 3: return 0;
    case 4: return 1;
    case 5: return 2;
  }
  throw EncodeError("bad element width selector");
}

[[noreturn]] void bad_word(uint64_t w, const std::string& why) {
  std::ostringstream os;
  os << "cannot decode word 0x" << std::hex << w << ": " << why;
  throw DecodeError(os.str(), w);
}

}  // namespace

uint64_t encode(const Instruction& instr) {
  struct Enc {
    uint64_t operator()(const VLoad& i) const {
      return enc_wide(kOpVecMem, 0, {i.vd_head, 0, 0, i.rs_addr, i.rs_avl});
    }
    uint64_t operator()(const VStore& i) const {
      return enc_wide(kOpVecMem, 1, {i.vs3_head, 0, 0, i.rs_addr, i.rs_avl});
    }
    uint64_t operator()(const VArithVV& i) const {
      return enc_wide(kOpVecArith, kFunctVV + static_cast<uint64_t>(i.op),
                      {i.vd_head, i.vs1_head, i.vs2_head, 0, i.rs_avl});
    }
    uint64_t operator()(const VArithVX& i) const {
      return enc_wide(kOpVecArith, kFunctVX + static_cast<uint64_t>(i.op),
                      {i.vd_head, 0, i.vs2_head, i.rs2, i.rs_avl});
    }
    uint64_t operator()(const VRedSum& i) const {
      return enc_wide(kOpVecArith, kFunctRedSum,
                      {i.vd_head, 0, i.vs2_head, 0, i.rs_avl});
    }
    uint64_t operator()(const VGather& i) const {
      return enc_wide(kOpVecArith, kFunctGather,
                      {i.vd_head, i.vs1_head, i.vs2_head, 0, i.rs_avl});
    }
    uint64_t operator()(const VScatter& i) const {
      return enc_wide(kOpVecArith, kFunctScatter,
                      {i.vd_head, i.vs1_head, i.vs2_head, 0, i.rs_avl});
    }
    uint64_t operator()(const VSetCsr& i) const {
      return enc_wide(kOpVecCtrl, 0, {i.csr_id, 0, 0, i.rs_value, 0});
    }
    uint64_t operator()(const ScalarLi& i) const {
      return enc_scalar(kOpLi, 0, i.rd, 0, 0, static_cast<uint32_t>(i.imm));
    }
    uint64_t operator()(const ScalarAlu& i) const {
      return enc_scalar(kOpAlu, static_cast<uint64_t>(i.op), i.rd, i.rs1,
                        i.rs2, 0);
    }
    uint64_t operator()(const ScalarSlli& i) const {
      if (i.shamt > 63) throw EncodeError("slli shift amount > 63");
      return enc_scalar(kOpAlu, 3, i.rd, i.rs1, 0, i.shamt);
    }
    uint64_t operator()(const Branch& i) const {
      return enc_scalar(kOpBranch, static_cast<uint64_t>(i.op), 0, i.rs1,
                        i.rs2, i.target);
    }
    uint64_t operator()(const Jal& i) const {
      return enc_scalar(kOpJal, 0, i.rd, 0, 0, i.target);
    }
    uint64_t operator()(const ScalarLw& i) const {
      return enc_scalar(kOpLw, 0, i.rd, i.rs1, 0,
                        static_cast<uint32_t>(i.imm));
    }
    uint64_t operator()(const ScalarSw& i) const {
      return enc_scalar(kOpSw, 0, 0, i.rs1, i.rs2,
                        static_cast<uint32_t>(i.imm));
    }
    uint64_t operator()(const VSetVli& i) const {
      RvvFields f;
      f.vd = i.rd;
      f.vs1 = 0;
      f.vs2 = 0;
      f.rs_a = i.rs_avl;
      f.vew_sel = vew_sel_of(i.vew_bits_log2);
      if (!is_pow2(i.lmul) || i.lmul > 8) throw EncodeError("bad lmul");
      f.lmul_sel = i.lmul == 1 ? 0 : i.lmul == 2 ? 1 : i.lmul == 4 ? 2 : 3;
      return enc_rvv(kOpRvvArith, kFunctVSetVli, f);
    }
    uint64_t operator()(const RvvLoad& i) const {
      RvvFields f;
      f.vd = i.vd;
      f.vs1 = f.vs2 = 0;
      f.rs_a = i.rs_addr;
      f.post_inc = i.post_inc;
      return enc_rvv(kOpRvvLoad, 0, f);
    }
    uint64_t operator()(const RvvStore& i) const {
      RvvFields f;
      f.vd = i.vs3;
      f.vs1 = f.vs2 = 0;
      f.rs_a = i.rs_addr;
      f.post_inc = i.post_inc;
      return enc_rvv(kOpRvvStore, 0, f);
    }
    uint64_t operator()(const RvvArithVV& i) const {
      return enc_rvv(kOpRvvArith, kFunctVV + static_cast<uint64_t>(i.op),
                     {i.vd, i.vs1, i.vs2, 0});
    }
    uint64_t operator()(const RvvArithVX& i) const {
      return enc_rvv(kOpRvvArith, kFunctVX + static_cast<uint64_t>(i.op),
                     {i.vd, 0, i.vs2, i.rs2});
    }
    uint64_t operator()(const RvvRedSum& i) const {
      return enc_rvv(kOpRvvArith, kFunctRedSum, {i.vd, i.vs1, i.vs2, 0});
    }
    uint64_t operator()(const VRGatherVV& i) const {
      return enc_rvv(kOpRvvArith, kFunctGather, {i.vd, i.vs1, i.vs2, 0});
    }
  };
  return std::visit(Enc{}, instr);
}

Instruction decode(uint64_t w) {
  uint64_t opcode = bits(w, 0, 7);
  uint64_t funct = bits(w, 7, 6);

  // Reconstruct, then re-encode: mismatches (stray bits, fields that must be
  // zero) surface as a decode error without per-variant masking logic.
  Instruction instr;
  switch (opcode) {
    case kOpVecMem: {
      WideFields f = dec_wide(w);
      if (funct == 0)
        instr = VLoad{f.vd, f.rs_a, f.rs_b};
      else if (funct == 1)
        instr = VStore{f.vd, f.rs_a, f.rs_b};
      else
        bad_word(w, "bad vector load/store funct");
      break;
    }
    case kOpVecArith: {
      WideFields f = dec_wide(w);
      if (funct < 8)
        instr = VArithVV{static_cast<VArithOp>(funct), f.vd, f.vs1, f.vs2,
                         f.rs_b};
      else if (funct < 16)
        instr = VArithVX{static_cast<VArithOp>(funct - 8), f.vd, f.vs2, f.rs_a,
                         f.rs_b};
      else if (funct == kFunctRedSum)
        instr = VRedSum{f.vd, f.vs2, f.rs_b};
      else if (funct == kFunctGather)
        instr = VGather{f.vd, f.vs1, f.vs2, f.rs_b};
      else if (funct == kFunctScatter)
        instr = VScatter{f.vd, f.vs1, f.vs2, f.rs_b};
      else
        bad_word(w, "bad vector arith funct");
      break;
    }
    case kOpVecCtrl: {
      WideFields f = dec_wide(w);
      if (funct != 0) bad_word(w, "bad vector control funct");
      instr = VSetCsr{f.vd, f.rs_a};
      break;
    }
    case kOpLi:
      if (funct != 0) bad_word(w, "bad li funct");
      instr = ScalarLi{static_cast<uint8_t>(bits(w, 13, 5)),
                       static_cast<int32_t>(bits(w, 32, 32))};
      break;
    case kOpAlu: {
      uint8_t rd = static_cast<uint8_t>(bits(w, 13, 5));
      uint8_t rs1 = static_cast<uint8_t>(bits(w, 18, 5));
      uint8_t rs2 = static_cast<uint8_t>(bits(w, 23, 5));
      if (funct < 3)
        instr = ScalarAlu{static_cast<ScalarAluOp>(funct), rd, rs1, rs2};
      else if (funct == 3)
        instr = ScalarSlli{rd, rs1, static_cast<uint8_t>(bits(w, 32, 6))};
      else
        bad_word(w, "bad scalar alu funct");
      break;
    }
    case kOpBranch:
      if (funct > 1) bad_word(w, "bad branch funct");
      instr = Branch{static_cast<BranchOp>(funct),
                     static_cast<uint8_t>(bits(w, 18, 5)),
                     static_cast<uint8_t>(bits(w, 23, 5)),
                     static_cast<uint32_t>(bits(w, 32, 32))};
      break;
    case kOpJal:
      if (funct != 0) bad_word(w, "bad jal funct");
      instr = Jal{static_cast<uint8_t>(bits(w, 13, 5)),
                  static_cast<uint32_t>(bits(w, 32, 32))};
      break;
    case kOpLw:
      if (funct != 0) bad_word(w, "bad lw funct");
      instr = ScalarLw{static_cast<uint8_t>(bits(w, 13, 5)),
                       static_cast<uint8_t>(bits(w, 18, 5)),
                       static_cast<int32_t>(bits(w, 32, 32))};
      break;
    case kOpSw:
      if (funct != 0) bad_word(w, "bad sw funct");
      instr = ScalarSw{static_cast<uint8_t>(bits(w, 23, 5)),
                       static_cast<uint8_t>(bits(w, 18, 5)),
                       static_cast<int32_t>(bits(w, 32, 32))};
      break;
    case kOpRvvArith: {
      RvvFields f = dec_rvv(w);
      if (funct < 8)
        instr = RvvArithVV{static_cast<VArithOp>(funct), f.vd, f.vs1, f.vs2};
      else if (funct < 16)
        instr = RvvArithVX{static_cast<VArithOp>(funct - 8), f.vd, f.vs2,
                           f.rs_a};
      else if (funct == kFunctRedSum)
        instr = RvvRedSum{f.vd, f.vs1, f.vs2};
      else if (funct == kFunctGather)
        instr = VRGatherVV{f.vd, f.vs1, f.vs2};
      else if (funct == kFunctVSetVli)
        instr = VSetVli{f.vd, f.rs_a,
                        static_cast<uint8_t>(f.vew_sel + 3),
                        static_cast<uint8_t>(1u << f.lmul_sel)};
      else
        bad_word(w, "bad rvv arith funct");
      break;
    }
    case kOpRvvLoad: {
      RvvFields f = dec_rvv(w);
      if (funct != 0) bad_word(w, "bad rvv load funct");
      instr = RvvLoad{f.vd, f.rs_a, f.post_inc};
      break;
    }
    case kOpRvvStore: {
      RvvFields f = dec_rvv(w);
      if (funct != 0) bad_word(w, "bad rvv store funct");
      instr = RvvStore{f.vd, f.rs_a, f.post_inc};
      break;
    }
    default:
      bad_word(w, "undefined opcode");
  }

  if (encode(instr) != w) bad_word(w, "stray bits in reserved fields");
  return instr;
}

namespace {

void write_u16(std::ostream& out, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void write_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void write_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

uint64_t read_uint(std::istream& in, int nbytes) {
  uint64_t v = 0;
  for (int i = 0; i < nbytes; ++i) {
    int c = in.get();
    if (c == EOF) throw Error("truncated program file");
    v |= static_cast<uint64_t>(c & 0xFF) << (8 * i);
  }
  return v;
}

}  // namespace

void save_program(const Program& program, std::ostream& out) {
  out.write("ZOOZ", 4);
  write_u16(out, kBinaryFormatVersion);
  write_u32(out, static_cast<uint32_t>(program.code.size()));
  for (const Instruction& instr : program.code) write_u64(out, encode(instr));
  if (!out) throw Error("failed to write program");
}

Program load_program(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "ZOOZ")
    throw Error("bad magic: not a program file");
  uint16_t version = static_cast<uint16_t>(read_uint(in, 2));
  if (version != kBinaryFormatVersion)
    throw Error("unsupported program file version " + std::to_string(version));
  uint32_t count = static_cast<uint32_t>(read_uint(in, 4));
  Program p;
  p.code.reserve(count);
  for (uint32_t i = 0; i < count; ++i) p.code.push_back(decode(read_uint(in, 8)));
  p.validate();
  return p;
}

void save_program_file(const Program& program, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  save_program(program, out);
}

Program load_program_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return load_program(in);
}

}  // namespace zoozve
