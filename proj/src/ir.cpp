#include "zoozve/ir.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "zoozve/errors.hpp"

namespace zoozve {

int IrModule::find_value(const std::string& name) const {
  for (size_t i = 0; i < values.size(); ++i)
    if (values[i].name == name) return static_cast<int>(i);
  return -1;
}

int IrModule::find_buffer(const std::string& name) const {
  for (size_t i = 0; i < buffers.size(); ++i)
    if (buffers[i].name == name) return static_cast<int>(i);
  return -1;
}

uint32_t IrModule::member_count(int value) const {
  if (split_vlen == 0) return 1;
  uint64_t bits = static_cast<uint64_t>(values[value].type.elems) * vew_bits;
  return static_cast<uint32_t>((bits + split_vlen - 1) / split_vlen);
}

uint32_t IrModule::member_elems(int value, uint32_t member) const {
  uint32_t epr = elements_per_register();
  uint32_t total = values[value].type.elems;
  uint64_t lo = static_cast<uint64_t>(member) * epr;
  uint64_t hi = std::min<uint64_t>(lo + epr, total);
  return static_cast<uint32_t>(hi > lo ? hi - lo : 0);
}

namespace {

struct Cursor {
  std::string s;
  size_t pos = 0;
  size_t line_no;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool eat(const std::string& tok) {
    skip_ws();
    if (s.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& tok, const char* ctx) {
    if (!eat(tok))
      throw ParseError("expected '" + tok + "' in " + ctx, line_no);
  }
  std::string ident() {
    skip_ws();
    size_t b = pos;
    while (pos < s.size() &&
           (isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    if (b == pos) throw ParseError("expected identifier", line_no);
    return s.substr(b, pos - b);
  }
  // identifier that may contain dots (op names like add.vx)
  std::string opname() {
    skip_ws();
    size_t b = pos;
    while (pos < s.size() &&
           (isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_' ||
            s[pos] == '.'))
      ++pos;
    if (b == pos) throw ParseError("expected op name", line_no);
    return s.substr(b, pos - b);
  }
  int64_t number() {
    skip_ws();
    size_t consumed = 0;
    int64_t v = 0;
    try {
      v = std::stoll(s.substr(pos), &consumed, 0);
    } catch (const std::exception&) {
      throw ParseError("expected number", line_no);
    }
    pos += consumed;
    return v;
  }
  bool at_end() {
    skip_ws();
    return pos >= s.size();
  }
};

VecType parse_type(Cursor& c) {
  c.expect("<", "vector type");
  int64_t elems = c.number();
  c.expect("x", "vector type");
  c.expect("i", "vector type");
  int64_t vew = c.number();
  c.expect(">", "vector type");
  if (elems < 1) throw ParseError("vector length must be >= 1", c.line_no);
  if (vew != 8 && vew != 16 && vew != 32)
    throw ParseError("element width must be i8, i16 or i32", c.line_no);
  return VecType{static_cast<uint32_t>(elems), static_cast<uint32_t>(vew)};
}

// "%name" or "%name[3]"
std::pair<std::string, int> parse_value_ref(Cursor& c) {
  c.expect("%", "value reference");
  std::string name = c.ident();
  int member = -1;
  if (c.eat("[")) {
    member = static_cast<int>(c.number());
    c.expect("]", "member reference");
  }
  return {name, member};
}

std::optional<VArithOp> arith_kind(const std::string& n) {
  if (n == "add") return VArithOp::Add;
  if (n == "sub") return VArithOp::Sub;
  if (n == "mul") return VArithOp::Mul;
  if (n == "and") return VArithOp::And;
  if (n == "or") return VArithOp::Or;
  if (n == "xor") return VArithOp::Xor;
  if (n == "sra") return VArithOp::Sra;
  if (n == "sll") return VArithOp::Sll;
  return std::nullopt;
}

std::string type_str(const VecType& t) {
  return "<" + std::to_string(t.elems) + " x i" + std::to_string(t.vew_bits) +
         ">";
}

}  // namespace

IrModule parse_ir(const std::string& text) {
  IrModule m;
  std::istringstream in(text);
  std::string raw;
  size_t line_no = 0;
  int current_group = -1;
  // For member-defined values the annotated lengths accumulate into the
  // value's total length.
  std::map<int, uint64_t> member_len_sum;

  auto value_index = [&](const std::string& name, size_t ln) {
    int v = m.find_value(name);
    if (v < 0) throw ParseError("use of undefined value %" + name, ln);
    return v;
  };
  auto define_value = [&](const std::string& name, VecType t, size_t /*ln*/,
                          bool is_member) {
    int v = m.find_value(name);
    if (v < 0) {
      m.values.push_back(IrValue{name, t, current_group});
      v = static_cast<int>(m.values.size() - 1);
    }
    if (is_member) member_len_sum[v] += t.elems;
    return v;
  };
  auto check_vew = [&](uint32_t vew, size_t ln) {
    if (m.vew_bits == 0) m.vew_bits = vew;
    if (m.vew_bits != vew)
      throw ParseError("mixed element widths in one module (i" +
                           std::to_string(vew) + " vs i" +
                           std::to_string(m.vew_bits) + ")",
                       ln);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (size_t hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    Cursor c{line, 0, line_no};
    if (c.at_end()) continue;

    if (c.eat("split")) {
      c.expect("vlen", "split directive");
      m.split_vlen = static_cast<uint32_t>(c.number());
      continue;
    }
    if (c.eat("buffer")) {
      c.expect("@", "buffer declaration");
      std::string name = c.ident();
      c.expect(":", "buffer declaration");
      c.expect("i", "buffer declaration");
      int64_t vew = c.number();
      c.expect("[", "buffer declaration");
      int64_t elems = c.number();
      c.expect("]", "buffer declaration");
      if (m.find_buffer(name) >= 0)
        throw ParseError("duplicate buffer @" + name, line_no);
      if (elems < 1)
        throw ParseError("buffer must hold >= 1 elements", line_no);
      check_vew(static_cast<uint32_t>(vew), line_no);
      m.buffers.push_back(IrBuffer{name, static_cast<uint32_t>(elems)});
      continue;
    }
    if (c.eat("delimiter.begin")) {
      c.expect("g", "delimiter");
      int g = static_cast<int>(c.number());
      IrOp op;
      op.kind = IrOpKind::DelimBegin;
      op.group_id = g;
      m.ops.push_back(op);
      current_group = g;
      continue;
    }
    if (c.eat("delimiter.end")) {
      c.expect("g", "delimiter");
      int g = static_cast<int>(c.number());
      IrOp op;
      op.kind = IrOpKind::DelimEnd;
      op.group_id = g;
      m.ops.push_back(op);
      current_group = -1;
      continue;
    }
    if (c.eat("store")) {
      IrOp op;
      op.kind = IrOpKind::Store;
      op.group_id = current_group;
      VecType t = parse_type(c);
      check_vew(t.vew_bits, line_no);
      auto [name, member] = parse_value_ref(c);
      c.expect(",", "store");
      c.expect("@", "store");
      std::string buf = c.ident();
      op.buffer = m.find_buffer(buf);
      if (op.buffer < 0) throw ParseError("unknown buffer @" + buf, line_no);
      if (c.eat("+")) op.buf_elem_offset = static_cast<uint64_t>(c.number());
      op.operands.push_back(value_index(name, line_no));
      op.member = member;
      if (!c.at_end()) throw ParseError("trailing tokens", line_no);
      m.ops.push_back(op);
      continue;
    }

    if (!c.eat("%")) throw ParseError("unrecognized statement", line_no);
    std::string res_name = c.ident();
    int member = -1;
    if (c.eat("[")) {
      member = static_cast<int>(c.number());
      c.expect("]", "member reference");
    }
    c.expect("=", "definition");
    std::string opname = c.opname();
    VecType t = parse_type(c);
    check_vew(t.vew_bits, line_no);

    IrOp op;
    op.member = member;
    op.group_id = current_group;
    bool is_member = member >= 0;
    if (opname == "load") {
      op.kind = IrOpKind::Load;
      c.expect("@", "load");
      std::string buf = c.ident();
      op.buffer = m.find_buffer(buf);
      if (op.buffer < 0) throw ParseError("unknown buffer @" + buf, line_no);
      if (c.eat("+")) op.buf_elem_offset = static_cast<uint64_t>(c.number());
      op.result = define_value(res_name, t, line_no, is_member);
    } else if (opname == "redsum") {
      op.kind = IrOpKind::RedSum;
      auto [a, am] = parse_value_ref(c);
      if (am != -1) throw ParseError("redsum takes a whole value", line_no);
      op.operands.push_back(value_index(a, line_no));
      op.result = define_value(res_name, VecType{1, t.vew_bits}, line_no, false);
    } else if (opname == "gather" || opname == "scatter") {
      op.kind = opname == "gather" ? IrOpKind::Gather : IrOpKind::Scatter;
      auto [a, am] = parse_value_ref(c);
      c.expect(",", opname.c_str());
      auto [b, bm] = parse_value_ref(c);
      if (am != -1 || bm != -1)
        throw ParseError(opname + " takes whole values", line_no);
      op.operands.push_back(value_index(a, line_no));
      op.operands.push_back(value_index(b, line_no));
      op.result = define_value(res_name, t, line_no, false);
    } else {
      bool vx = false;
      std::string base = opname;
      if (base.size() > 3 && base.rfind(".vx") == base.size() - 3) {
        vx = true;
        base = base.substr(0, base.size() - 3);
      }
      auto ak = arith_kind(base);
      if (!ak) throw ParseError("unknown op '" + opname + "'", line_no);
      op.arith = *ak;
      auto [a, am] = parse_value_ref(c);
      if (am != member)
        throw ParseError("operand member must match result member", line_no);
      op.operands.push_back(value_index(a, line_no));
      c.expect(",", "arith");
      if (vx) {
        op.kind = IrOpKind::ArithVX;
        op.scalar_imm = c.number();
      } else {
        op.kind = IrOpKind::ArithVV;
        auto [b, bm] = parse_value_ref(c);
        if (bm != member)
          throw ParseError("operand member must match result member", line_no);
        op.operands.push_back(value_index(b, line_no));
      }
      op.result = define_value(res_name, t, line_no, is_member);
    }
    if (!c.at_end()) throw ParseError("trailing tokens", line_no);
    m.ops.push_back(op);
  }

  // Member-defined values carried per-register lengths; restore totals.
  for (auto& [v, total] : member_len_sum)
    m.values[v].type.elems = static_cast<uint32_t>(total);

  verify(m);
  return m;
}

std::string print_ir(const IrModule& m) {
  std::ostringstream out;
  if (m.split_vlen != 0) out << "split vlen " << m.split_vlen << "\n";
  for (const IrBuffer& b : m.buffers)
    out << "buffer @" << b.name << " : i" << m.vew_bits << "[" << b.elems
        << "]\n";
  auto ref = [&](int v, int member) {
    std::string s = "%" + m.values[v].name;
    if (member >= 0) s += "[" + std::to_string(member) + "]";
    return s;
  };
  auto slice_type = [&](int v, int member) {
    return VecType{member >= 0 ? m.member_elems(v, static_cast<uint32_t>(member))
                               : m.values[v].type.elems,
                   m.vew_bits};
  };
  for (const IrOp& op : m.ops) {
    switch (op.kind) {
      case IrOpKind::DelimBegin:
        out << "delimiter.begin g" << op.group_id << "\n";
        break;
      case IrOpKind::DelimEnd:
        out << "delimiter.end g" << op.group_id << "\n";
        break;
      case IrOpKind::Load:
        out << ref(op.result, op.member) << " = load "
            << type_str(slice_type(op.result, op.member)) << " @"
            << m.buffers[op.buffer].name;
        if (op.buf_elem_offset != 0) out << " + " << op.buf_elem_offset;
        out << "\n";
        break;
      case IrOpKind::Store:
        out << "store " << type_str(slice_type(op.operands[0], op.member))
            << " " << ref(op.operands[0], op.member) << ", @"
            << m.buffers[op.buffer].name;
        if (op.buf_elem_offset != 0) out << " + " << op.buf_elem_offset;
        out << "\n";
        break;
      case IrOpKind::ArithVV:
      case IrOpKind::ArithVX:
        out << ref(op.result, op.member) << " = " << arith_name(op.arith);
        if (op.kind == IrOpKind::ArithVX) out << ".vx";
        out << " " << type_str(slice_type(op.result, op.member)) << " "
            << ref(op.operands[0], op.member);
        if (op.kind == IrOpKind::ArithVV)
          out << ", " << ref(op.operands[1], op.member);
        else
          out << ", " << op.scalar_imm;
        out << "\n";
        break;
      case IrOpKind::RedSum:
        out << ref(op.result, -1) << " = redsum "
            << type_str(m.values[op.operands[0]].type) << " "
            << ref(op.operands[0], -1) << "\n";
        break;
      case IrOpKind::Gather:
      case IrOpKind::Scatter:
        out << ref(op.result, -1) << " = "
            << (op.kind == IrOpKind::Gather ? "gather" : "scatter") << " "
            << type_str(m.values[op.result].type) << " "
            << ref(op.operands[0], -1) << ", " << ref(op.operands[1], -1)
            << "\n";
        break;
    }
  }
  return out.str();
}

void verify(const IrModule& m) {
  if (m.vew_bits != 8 && m.vew_bits != 16 && m.vew_bits != 32)
    throw VerifyError("module element width must be 8, 16 or 32");
  if (m.split_vlen != 0 && m.split_vlen % m.vew_bits != 0)
    throw VerifyError("split vlen must be a multiple of the element width");

  bool split = m.split_vlen != 0;
  std::map<std::pair<int, int>, int> defs;  // (value, member) -> op index
  std::set<int> seen_groups;
  int current_group = -1;

  auto op_err = [](size_t idx, const std::string& msg) {
    throw VerifyError("op " + std::to_string(idx) + ": " + msg);
  };

  for (size_t i = 0; i < m.ops.size(); ++i) {
    const IrOp& op = m.ops[i];
    auto use = [&](int v, int member) {
      if (v < 0 || v >= static_cast<int>(m.values.size()))
        op_err(i, "bad value index");
      uint32_t members = split ? m.member_count(v) : 1;
      if (member >= 0) {
        if (static_cast<uint32_t>(member) >= members)
          op_err(i, "member index out of range for %" + m.values[v].name);
        if (!defs.count({v, member}))
          op_err(i, "use of undefined %" + m.values[v].name + "[" +
                        std::to_string(member) + "]");
      } else {
        for (uint32_t k = 0; k < members; ++k)
          if (!defs.count({v, split ? static_cast<int>(k) : -1}))
            op_err(i, "use of incompletely defined %" + m.values[v].name);
      }
    };
    auto define = [&](int v, int member) {
      std::pair<int, int> key{v, member};
      if (defs.count(key))
        op_err(i, "value %" + m.values[v].name + " defined twice");
      defs[key] = static_cast<int>(i);
    };
    auto check_in_group = [&] {
      if (split && op.group_id != current_group)
        op_err(i, "op outside its delimiter group");
    };

    switch (op.kind) {
      case IrOpKind::DelimBegin:
        if (!split) op_err(i, "delimiter outside split form");
        if (current_group != -1) op_err(i, "nested delimiter groups");
        if (seen_groups.count(op.group_id))
          op_err(i,
                 "delimiter group g" + std::to_string(op.group_id) + " reopened");
        seen_groups.insert(op.group_id);
        current_group = op.group_id;
        break;
      case IrOpKind::DelimEnd:
        if (current_group != op.group_id) op_err(i, "mismatched delimiter.end");
        current_group = -1;
        break;
      case IrOpKind::Load: {
        if (op.buffer < 0 || op.buffer >= static_cast<int>(m.buffers.size()))
          op_err(i, "bad buffer");
        if (split && op.member < 0) op_err(i, "unsplit load in split module");
        uint32_t len = split ? m.member_elems(op.result, op.member)
                             : m.values[op.result].type.elems;
        if (op.buf_elem_offset + len > m.buffers[op.buffer].elems)
          op_err(i, "load past end of @" + m.buffers[op.buffer].name);
        define(op.result, op.member);
        check_in_group();
        break;
      }
      case IrOpKind::Store: {
        if (op.buffer < 0 || op.buffer >= static_cast<int>(m.buffers.size()))
          op_err(i, "bad buffer");
        if (split && op.member < 0) op_err(i, "unsplit store in split module");
        int v = op.operands[0];
        use(v, op.member);
        uint32_t len = split ? m.member_elems(v, op.member)
                             : m.values[v].type.elems;
        if (op.buf_elem_offset + len > m.buffers[op.buffer].elems)
          op_err(i, "store past end of @" + m.buffers[op.buffer].name);
        check_in_group();
        break;
      }
      case IrOpKind::ArithVV:
      case IrOpKind::ArithVX: {
        if (split && op.member < 0) op_err(i, "unsplit arith in split module");
        int a = op.operands[0];
        use(a, op.member);
        if (!(m.values[a].type == m.values[op.result].type))
          op_err(i, "arith operand/result types differ");
        if (op.kind == IrOpKind::ArithVV) {
          int b = op.operands[1];
          use(b, op.member);
          if (!(m.values[b].type == m.values[op.result].type))
            op_err(i, "arith operand/result types differ");
        }
        define(op.result, op.member);
        check_in_group();
        break;
      }
      case IrOpKind::RedSum:
        use(op.operands[0], -1);
        if (m.values[op.result].type.elems != 1)
          op_err(i, "redsum result must be <1 x iN>");
        define(op.result, split ? 0 : -1);
        check_in_group();
        break;
      case IrOpKind::Gather:
      case IrOpKind::Scatter: {
        use(op.operands[0], -1);
        use(op.operands[1], -1);
        uint32_t idx_len = m.values[op.operands[1]].type.elems;
        if (op.kind == IrOpKind::Gather &&
            m.values[op.result].type.elems != idx_len)
          op_err(i, "gather result length must equal index length");
        if (op.kind == IrOpKind::Scatter &&
            m.values[op.operands[0]].type.elems != idx_len)
          op_err(i, "scatter data length must equal index length");
        if (split)
          for (uint32_t k = 0; k < m.member_count(op.result); ++k)
            define(op.result, static_cast<int>(k));
        else
          define(op.result, -1);
        check_in_group();
        break;
      }
    }
    if (!split && op.member >= 0)
      op_err(i, "member reference outside split form");
  }
  if (current_group != -1) throw VerifyError("unterminated delimiter group");

  for (size_t v = 0; v < m.values.size(); ++v) {
    if (m.values[v].type.elems < 1)
      throw VerifyError("value %" + m.values[v].name + " has zero length");
    uint32_t members = split ? m.member_count(static_cast<int>(v)) : 1;
    for (uint32_t k = 0; k < members; ++k)
      if (!defs.count({static_cast<int>(v), split ? static_cast<int>(k) : -1}))
        throw VerifyError("value %" + m.values[v].name +
                          " is never (fully) defined");
  }
}

}  // namespace zoozve
