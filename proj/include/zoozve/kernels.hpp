#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zoozve/compiler.hpp"
#include "zoozve/config.hpp"
#include "zoozve/instruction.hpp"
#include "zoozve/sim.hpp"

namespace zoozve {

enum class Kernel { Dotproduct, Axpy, Fft };
enum class Isa { Zoozve, Rvv };

const char* kernel_name(Kernel k);
const char* isa_name(Isa isa);
Kernel kernel_from_name(const std::string& name);

std::vector<uint64_t> default_sizes(Kernel k);

// Machine configurations. The wide-register machine is the same for every
// kernel; the baseline uses per-kernel element width / lmul chosen so the
// strip capacity is 64 (dotproduct), 256 (axpy) and 32 (fft).
VConfig wide_config();
RvvConfig rvv_config(Kernel k);

struct KernelInputs {
  std::vector<int16_t> a, b;   // dotproduct: a,b; axpy: x,y
  int16_t scalar = 0;          // axpy multiplier
  std::vector<int32_t> re, im; // fft, values in int16 range (Q15)
};

KernelInputs random_inputs(Kernel k, uint64_t n, uint64_t seed);

// Program + initial memory + where the result lands.
struct KernelArtifacts {
  Program program;
  std::vector<uint8_t> memory;
  uint64_t out_addr = 0;
  uint64_t out_bytes = 0;
};

KernelArtifacts build_kernel(Kernel k, uint64_t n, Isa isa,
                             const KernelInputs& inputs);

// Scalar references with the exact machine arithmetic (wraparound int16 /
// the fixed-point butterfly defined in docs/kernels.md).
int16_t ref_dotproduct(const std::vector<int16_t>& a,
                       const std::vector<int16_t>& b);
std::vector<int16_t> ref_axpy(int16_t scalar, const std::vector<int16_t>& x,
                              const std::vector<int16_t>& y);
void ref_fft(std::vector<int32_t>& re, std::vector<int32_t>& im);

// Expected result-region bytes for a kernel run.
std::vector<uint8_t> expected_output(Kernel k, const KernelInputs& inputs);

// Fixed-point FFT plumbing shared by the generators and the reference.
struct FftTables {
  std::vector<int32_t> rev;              // bit-reversal permutation
  std::vector<int32_t> top_idx, bot_idx; // per stage, n/2 entries each
  std::vector<int32_t> tw_re, tw_im;     // per stage, n/2 Q15 entries each
};
FftTables fft_tables(uint64_t n);

struct BenchCase {
  Kernel kernel;
  uint64_t n;
  Isa isa;
  uint64_t seed;
};

struct BenchResult {
  BenchCase bench_case;
  TraceStats stats;
  double speedup = 0;  // rvv dynamic count / wide dynamic count, per pair
  bool correct = false;
};

// Runs every (kernel, size) pair on both machines, checks outputs against
// the scalar references and against each other, and computes speedups.
// Deterministic for a fixed seed; jobs > 1 runs cases concurrently.
std::vector<BenchResult> run_benchmark(const std::vector<Kernel>& kernels,
                                       uint64_t seed, unsigned jobs = 1);
std::vector<BenchResult> run_benchmark(
    const std::vector<Kernel>& kernels,
    const std::vector<std::vector<uint64_t>>& sizes, uint64_t seed,
    unsigned jobs = 1);

struct CsvRow {
  std::string kernel;
  uint64_t n = 0;
  std::string isa;
  uint64_t dyn_count = 0;
  uint64_t strip_iters = 0;
  double speedup = 0;
};

std::vector<CsvRow> to_rows(const std::vector<BenchResult>& results);
void emit_csv(const std::vector<CsvRow>& rows, const std::string& path);
std::vector<CsvRow> read_csv(const std::string& path);
void emit_plot(const std::vector<CsvRow>& rows, const std::string& path);

}  // namespace zoozve
