#include "zoozve/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "zoozve/errors.hpp"

namespace zoozve {

namespace {

struct Token {
  std::string text;
};

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_operands(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = strip(cur);
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct LineParser {
  size_t line_no;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_no);
  }

  uint8_t xreg(const std::string& t) const {
    if (t.size() < 2 || t[0] != 'x') fail("expected scalar register, got '" + t + "'");
    return static_cast<uint8_t>(number(t.substr(1), 0, 31, "scalar register"));
  }

  uint16_t vreg(const std::string& t) const {
    if (t.size() < 2 || t[0] != 'v') fail("expected vector register, got '" + t + "'");
    return static_cast<uint16_t>(number(t.substr(1), 0, kMaxVHead, "vector register"));
  }

  int64_t number(const std::string& t, int64_t lo, int64_t hi,
                 const char* what) const {
    if (t.empty()) fail(std::string("missing ") + what);
    int64_t v = 0;
    size_t pos = 0;
    try {
      v = std::stoll(t, &pos, 0);  // handles decimal, 0x..., negatives
    } catch (const std::exception&) {
      fail(std::string("malformed ") + what + " '" + t + "'");
    }
    if (pos != t.size()) fail(std::string("malformed ") + what + " '" + t + "'");
    if (v < lo || v > hi)
      fail(std::string(what) + " " + t + " out of range [" +
           std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  // "imm(xN)" or "(xN)" with optional trailing '+' for post-increment.
  struct MemOperand {
    int32_t offset = 0;
    uint8_t base = 0;
    bool post_inc = false;
  };

  MemOperand mem(const std::string& t, bool allow_offset,
                 bool allow_post_inc) const {
    MemOperand m;
    std::string s = t;
    if (!s.empty() && s.back() == '+') {
      if (!allow_post_inc) fail("post-increment not allowed here");
      m.post_inc = true;
      s.pop_back();
    }
    size_t open = s.find('(');
    if (open == std::string::npos || s.back() != ')')
      fail("expected memory operand like '(x5)', got '" + t + "'");
    std::string off = strip(s.substr(0, open));
    if (!off.empty()) {
      if (!allow_offset) fail("offset not allowed here");
      m.offset = static_cast<int32_t>(
          number(off, INT32_MIN, INT32_MAX, "memory offset"));
    }
    m.base = xreg(strip(s.substr(open + 1, s.size() - open - 2)));
    return m;
  }
};

std::optional<VArithOp> arith_from_name(const std::string& n) {
  static const std::map<std::string, VArithOp> table = {
      {"add", VArithOp::Add}, {"sub", VArithOp::Sub}, {"mul", VArithOp::Mul},
      {"and", VArithOp::And}, {"or", VArithOp::Or},   {"xor", VArithOp::Xor},
      {"sra", VArithOp::Sra}, {"sll", VArithOp::Sll}};
  auto it = table.find(n);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

struct PendingLabel {
  size_t line_no;
  std::string label;
  uint32_t instr_index;
  bool is_jal;
};

}  // namespace

Program assemble(const std::string& text) {
  Program prog;
  std::vector<std::pair<uint32_t, std::string>> label_refs_todo;  // filled below
  std::vector<PendingLabel> pending;

  // lmul is only known statically along straight-line code after a vsetvli;
  // labels (join points) reset it. Used for the assembly-time alignment check.
  std::optional<uint32_t> known_lmul;

  std::istringstream in(text);
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (size_t hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;

    LineParser p{line_no};

    if (line.back() == ':') {
      std::string name = strip(line.substr(0, line.size() - 1));
      if (name.empty()) p.fail("empty label");
      if (prog.labels.count(name)) p.fail("duplicate label '" + name + "'");
      prog.labels[name] = static_cast<uint32_t>(prog.code.size());
      known_lmul.reset();
      continue;
    }

    size_t sp = line.find_first_of(" \t");
    std::string mnem = sp == std::string::npos ? line : line.substr(0, sp);
    std::vector<std::string> ops =
        sp == std::string::npos ? std::vector<std::string>{}
                                : split_operands(line.substr(sp + 1));
    auto want = [&](size_t n) {
      if (ops.size() != n)
        p.fail("'" + mnem + "' takes " + std::to_string(n) + " operands, got " +
               std::to_string(ops.size()));
    };

    auto avl_reg = [&](const std::string& t) { return p.xreg(t); };

    auto check_rvv_align = [&](std::initializer_list<uint8_t> regs) {
      if (!known_lmul) return;
      for (uint8_t r : regs)
        if (r % *known_lmul != 0)
          p.fail("rvv register v" + std::to_string(r) +
                 " not aligned to lmul " + std::to_string(*known_lmul));
    };

    Instruction instr;
    if (mnem == "li") {
      want(2);
      instr = ScalarLi{p.xreg(ops[0]),
                       static_cast<int32_t>(p.number(ops[1], INT32_MIN,
                                                     INT32_MAX, "immediate"))};
    } else if (mnem == "add" || mnem == "sub" || mnem == "mul") {
      want(3);
      ScalarAluOp op = mnem == "add" ? ScalarAluOp::Add
                       : mnem == "sub" ? ScalarAluOp::Sub
                                       : ScalarAluOp::Mul;
      instr = ScalarAlu{op, p.xreg(ops[0]), p.xreg(ops[1]), p.xreg(ops[2])};
    } else if (mnem == "slli") {
      want(3);
      instr = ScalarSlli{p.xreg(ops[0]), p.xreg(ops[1]),
                         static_cast<uint8_t>(p.number(ops[2], 0, 63, "shift amount"))};
    } else if (mnem == "bne" || mnem == "bge") {
      want(3);
      Branch b{mnem == "bne" ? BranchOp::Bne : BranchOp::Bge, p.xreg(ops[0]),
               p.xreg(ops[1]), 0};
      pending.push_back({line_no, ops[2], static_cast<uint32_t>(prog.code.size()), false});
      instr = b;
    } else if (mnem == "jal") {
      want(2);
      pending.push_back({line_no, ops[1], static_cast<uint32_t>(prog.code.size()), true});
      instr = Jal{p.xreg(ops[0]), 0};
    } else if (mnem == "lw") {
      want(2);
      auto m = p.mem(ops[1], true, false);
      instr = ScalarLw{p.xreg(ops[0]), m.base, m.offset};
    } else if (mnem == "sw") {
      want(2);
      auto m = p.mem(ops[1], true, false);
      instr = ScalarSw{p.xreg(ops[0]), m.base, m.offset};
    } else if (mnem == "vld") {
      want(3);
      auto m = p.mem(ops[1], false, false);
      instr = VLoad{p.vreg(ops[0]), m.base, avl_reg(ops[2])};
    } else if (mnem == "vst") {
      want(3);
      auto m = p.mem(ops[1], false, false);
      instr = VStore{p.vreg(ops[0]), m.base, avl_reg(ops[2])};
    } else if (mnem == "vredsum") {
      want(3);
      instr = VRedSum{p.vreg(ops[0]), p.vreg(ops[1]), avl_reg(ops[2])};
    } else if (mnem == "vgather") {
      want(4);
      instr = VGather{p.vreg(ops[0]), p.vreg(ops[1]), p.vreg(ops[2]),
                      avl_reg(ops[3])};
    } else if (mnem == "vscatter") {
      want(4);
      instr = VScatter{p.vreg(ops[0]), p.vreg(ops[1]), p.vreg(ops[2]),
                       avl_reg(ops[3])};
    } else if (mnem == "vsetcsr") {
      want(2);
      instr = VSetCsr{static_cast<uint16_t>(p.number(ops[0], 0, kMaxVHead, "csr id")),
                      p.xreg(ops[1])};
    } else if (mnem.rfind("rvv.", 0) == 0) {
      std::string sub = mnem.substr(4);
      if (sub == "vsetvli") {
        want(4);
        uint8_t vew_log2 = 0;
        if (ops[2] == "e8") vew_log2 = 3;
        else if (ops[2] == "e16") vew_log2 = 4;
        else if (ops[2] == "e32") vew_log2 = 5;
        else p.fail("bad element width '" + ops[2] + "' (e8/e16/e32)");
        uint8_t lmul = 0;
        if (ops[3] == "m1") lmul = 1;
        else if (ops[3] == "m2") lmul = 2;
        else if (ops[3] == "m4") lmul = 4;
        else if (ops[3] == "m8") lmul = 8;
        else p.fail("bad lmul '" + ops[3] + "' (m1/m2/m4/m8)");
        instr = VSetVli{p.xreg(ops[0]), p.xreg(ops[1]), vew_log2, lmul};
        known_lmul = lmul;
      } else if (sub == "vle") {
        want(2);
        auto m = p.mem(ops[1], false, true);
        uint8_t vd = static_cast<uint8_t>(p.number(ops[0].substr(1), 0, 31, "vector register"));
        if (ops[0].empty() || ops[0][0] != 'v') p.fail("expected vector register");
        check_rvv_align({vd});
        instr = RvvLoad{vd, m.base, m.post_inc};
      } else if (sub == "vse") {
        want(2);
        auto m = p.mem(ops[1], false, true);
        if (ops[0].empty() || ops[0][0] != 'v') p.fail("expected vector register");
        uint8_t vs3 = static_cast<uint8_t>(p.number(ops[0].substr(1), 0, 31, "vector register"));
        check_rvv_align({vs3});
        instr = RvvStore{vs3, m.base, m.post_inc};
      } else if (sub == "vredsum") {
        want(3);
        auto r = [&](const std::string& t) {
          if (t.empty() || t[0] != 'v') p.fail("expected vector register");
          return static_cast<uint8_t>(p.number(t.substr(1), 0, 31, "vector register"));
        };
        RvvRedSum i{r(ops[0]), r(ops[1]), r(ops[2])};
        check_rvv_align({i.vd, i.vs1, i.vs2});
        instr = i;
      } else if (sub == "vrgather") {
        want(3);
        auto r = [&](const std::string& t) {
          if (t.empty() || t[0] != 'v') p.fail("expected vector register");
          return static_cast<uint8_t>(p.number(t.substr(1), 0, 31, "vector register"));
        };
        VRGatherVV i{r(ops[0]), r(ops[1]), r(ops[2])};
        check_rvv_align({i.vd, i.vs1, i.vs2});
        instr = i;
      } else {
        bool vx = false;
        std::string base = sub;
        if (base.size() > 3 && base.rfind(".vx") == base.size() - 3) {
          vx = true;
          base = base.substr(0, base.size() - 3);
        }
        if (base.empty() || base[0] != 'v')
          p.fail("unknown mnemonic '" + mnem + "'");
        auto op = arith_from_name(base.substr(1));
        if (!op) p.fail("unknown mnemonic '" + mnem + "'");
        auto r = [&](const std::string& t) {
          if (t.empty() || t[0] != 'v') p.fail("expected vector register");
          return static_cast<uint8_t>(p.number(t.substr(1), 0, 31, "vector register"));
        };
        want(3);
        if (vx) {
          RvvArithVX i{*op, r(ops[0]), r(ops[1]), p.xreg(ops[2])};
          check_rvv_align({i.vd, i.vs2});
          instr = i;
        } else {
          RvvArithVV i{*op, r(ops[0]), r(ops[1]), r(ops[2])};
          check_rvv_align({i.vd, i.vs1, i.vs2});
          instr = i;
        }
      }
    } else if (mnem[0] == 'v') {
      bool vx = false;
      std::string base = mnem;
      if (base.size() > 3 && base.rfind(".vx") == base.size() - 3) {
        vx = true;
        base = base.substr(0, base.size() - 3);
      }
      auto op = arith_from_name(base.substr(1));
      if (!op) p.fail("unknown mnemonic '" + mnem + "'");
      if (vx) {
        want(4);
        instr = VArithVX{*op, p.vreg(ops[0]), p.vreg(ops[1]), p.xreg(ops[2]),
                         avl_reg(ops[3])};
      } else {
        want(4);
        instr = VArithVV{*op, p.vreg(ops[0]), p.vreg(ops[1]), p.vreg(ops[2]),
                         avl_reg(ops[3])};
      }
    } else {
      p.fail("unknown mnemonic '" + mnem + "'");
    }

    prog.code.push_back(instr);
  }

  for (const PendingLabel& ref : pending) {
    auto it = prog.labels.find(ref.label);
    if (it == prog.labels.end())
      throw ParseError("unresolved label '" + ref.label + "'", ref.line_no);
    if (ref.is_jal)
      std::get<Jal>(prog.code[ref.instr_index]).target = it->second;
    else
      std::get<Branch>(prog.code[ref.instr_index]).target = it->second;
  }

  prog.validate();
  return prog;
}

namespace {

std::string v(uint32_t n) { return "v" + std::to_string(n); }
std::string x(uint32_t n) { return "x" + std::to_string(n); }

struct Formatter {
  // target index -> label name; empty when printing a lone instruction.
  const std::map<uint32_t, std::string>* target_labels = nullptr;

  std::string target(uint32_t t) const {
    if (target_labels) {
      auto it = target_labels->find(t);
      if (it != target_labels->end()) return it->second;
    }
    return std::to_string(t);
  }

  std::string operator()(const VLoad& i) const {
    return "vld " + v(i.vd_head) + ", (" + x(i.rs_addr) + "), " + x(i.rs_avl);
  }
  std::string operator()(const VStore& i) const {
    return "vst " + v(i.vs3_head) + ", (" + x(i.rs_addr) + "), " + x(i.rs_avl);
  }
  std::string operator()(const VArithVV& i) const {
    return std::string("v") + arith_name(i.op) + " " + v(i.vd_head) + ", " +
           v(i.vs1_head) + ", " + v(i.vs2_head) + ", " + x(i.rs_avl);
  }
  std::string operator()(const VArithVX& i) const {
    return std::string("v") + arith_name(i.op) + ".vx " + v(i.vd_head) + ", " +
           v(i.vs2_head) + ", " + x(i.rs2) + ", " + x(i.rs_avl);
  }
  std::string operator()(const VRedSum& i) const {
    return "vredsum " + v(i.vd_head) + ", " + v(i.vs2_head) + ", " + x(i.rs_avl);
  }
  std::string operator()(const VGather& i) const {
    return "vgather " + v(i.vd_head) + ", " + v(i.vs1_head) + ", " +
           v(i.vs2_head) + ", " + x(i.rs_avl);
  }
  std::string operator()(const VScatter& i) const {
    return "vscatter " + v(i.vd_head) + ", " + v(i.vs1_head) + ", " +
           v(i.vs2_head) + ", " + x(i.rs_avl);
  }
  std::string operator()(const VSetCsr& i) const {
    return "vsetcsr " + std::to_string(i.csr_id) + ", " + x(i.rs_value);
  }
  std::string operator()(const ScalarLi& i) const {
    return "li " + x(i.rd) + ", " + std::to_string(i.imm);
  }
  std::string operator()(const ScalarAlu& i) const {
    const char* n = i.op == ScalarAluOp::Add ? "add"
                    : i.op == ScalarAluOp::Sub ? "sub"
                                               : "mul";
    return std::string(n) + " " + x(i.rd) + ", " + x(i.rs1) + ", " + x(i.rs2);
  }
  std::string operator()(const ScalarSlli& i) const {
    return "slli " + x(i.rd) + ", " + x(i.rs1) + ", " + std::to_string(i.shamt);
  }
  std::string operator()(const Branch& i) const {
    return std::string(i.op == BranchOp::Bne ? "bne" : "bge") + " " + x(i.rs1) +
           ", " + x(i.rs2) + ", " + target(i.target);
  }
  std::string operator()(const Jal& i) const {
    return "jal " + x(i.rd) + ", " + target(i.target);
  }
  std::string operator()(const ScalarLw& i) const {
    return "lw " + x(i.rd) + ", " + std::to_string(i.imm) + "(" + x(i.rs1) + ")";
  }
  std::string operator()(const ScalarSw& i) const {
    return "sw " + x(i.rs2) + ", " + std::to_string(i.imm) + "(" + x(i.rs1) + ")";
  }
  std::string operator()(const VSetVli& i) const {
    return "rvv.vsetvli " + x(i.rd) + ", " + x(i.rs_avl) + ", e" +
           std::to_string(1u << i.vew_bits_log2) + ", m" + std::to_string(i.lmul);
  }
  std::string operator()(const RvvLoad& i) const {
    return "rvv.vle " + v(i.vd) + ", (" + x(i.rs_addr) + ")" +
           (i.post_inc ? "+" : "");
  }
  std::string operator()(const RvvStore& i) const {
    return "rvv.vse " + v(i.vs3) + ", (" + x(i.rs_addr) + ")" +
           (i.post_inc ? "+" : "");
  }
  std::string operator()(const RvvArithVV& i) const {
    return std::string("rvv.v") + arith_name(i.op) + " " + v(i.vd) + ", " +
           v(i.vs1) + ", " + v(i.vs2);
  }
  std::string operator()(const RvvArithVX& i) const {
    return std::string("rvv.v") + arith_name(i.op) + ".vx " + v(i.vd) + ", " +
           v(i.vs2) + ", " + x(i.rs2);
  }
  std::string operator()(const RvvRedSum& i) const {
    return "rvv.vredsum " + v(i.vd) + ", " + v(i.vs1) + ", " + v(i.vs2);
  }
  std::string operator()(const VRGatherVV& i) const {
    return "rvv.vrgather " + v(i.vd) + ", " + v(i.vs1) + ", " + v(i.vs2);
  }
};

}  // namespace

std::string format_instruction(const Instruction& instr) {
  return std::visit(Formatter{}, instr);
}

std::string disassemble(const Program& program) {
  std::set<uint32_t> targets;
  for (const Instruction& instr : program.code) {
    if (const auto* b = std::get_if<Branch>(&instr)) targets.insert(b->target);
    if (const auto* j = std::get_if<Jal>(&instr)) targets.insert(j->target);
  }
  std::map<uint32_t, std::string> names;
  for (uint32_t t : targets) names[t] = ".L" + std::to_string(t);

  Formatter fmt{&names};
  std::ostringstream out;
  for (uint32_t i = 0; i <= program.code.size(); ++i) {
    if (names.count(i)) out << names[i] << ":\n";
    if (i < program.code.size())
      out << "    " << std::visit(fmt, program.code[i]) << "\n";
  }
  return out.str();
}

}  // namespace zoozve
