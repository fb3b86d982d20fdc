#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "zoozve/instruction.hpp"

namespace zoozve {

// Fixed 64-bit encoding; the field layout is documented in docs/isa.md.
// encode/decode are mutually inverse on legal instructions, and decode
// rejects any word that encode cannot produce.
uint64_t encode(const Instruction& instr);
Instruction decode(uint64_t word);

// Program container: "ZOOZ" magic, u16 version, u32 count, then count
// little-endian 64-bit words. Labels are not stored; entry is index 0.
void save_program(const Program& program, std::ostream& out);
Program load_program(std::istream& in);
void save_program_file(const Program& program, const std::string& path);
Program load_program_file(const std::string& path);

constexpr uint16_t kBinaryFormatVersion = 1;

}  // namespace zoozve
