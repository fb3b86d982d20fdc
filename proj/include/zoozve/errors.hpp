#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace zoozve {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Assembly / IR text rejected. line is 1-based, 0 = unknown.
struct ParseError : Error {
  ParseError(std::string msg, std::size_t line_no = 0)
      : Error(line_no ? "line " + std::to_string(line_no) + ": " + std::move(msg)
                      : std::move(msg)),
        line(line_no) {}
  std::size_t line;
};

struct EncodeError : Error {
  using Error::Error;
};

struct DecodeError : Error {
  DecodeError(std::string msg, uint64_t raw_word)
      : Error(std::move(msg)), word(raw_word) {}
  uint64_t word;
};

// A register group does not fit in the register file.
struct CapacityError : Error {
  using Error::Error;
};

// Runtime fault. pc is the index of the faulting instruction.
struct Trap : Error {
  Trap(std::string cause, uint64_t at_pc)
      : Error("trap at instruction " + std::to_string(at_pc) + ": " + cause),
        pc(at_pc) {}
  uint64_t pc;
};

struct TimeoutError : Error {
  using Error::Error;
};

struct VerifyError : Error {
  using Error::Error;
};

struct AllocationError : Error {
  using Error::Error;
};

struct UnsupportedError : Error {
  using Error::Error;
};

}  // namespace zoozve
