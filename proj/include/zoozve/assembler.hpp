#pragma once

#include <string>

#include "zoozve/instruction.hpp"

namespace zoozve {

// One instruction or label per line, '#' comments. Full grammar and mnemonic
// table in docs/isa.md. Two-pass: forward label references are fine.
Program assemble(const std::string& text);

// Prints in the assemble() grammar; synthesizes .L<n> labels at branch
// targets, so assemble(disassemble(p)) reproduces p instruction for
// instruction.
std::string disassemble(const Program& program);

// Single-instruction printer used by trace output and staged listings.
std::string format_instruction(const Instruction& instr);

}  // namespace zoozve
