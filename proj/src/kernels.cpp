#include "zoozve/kernels.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "zoozve/assembler.hpp"
#include "zoozve/errors.hpp"

namespace zoozve {

const char* kernel_name(Kernel k) {
  switch (k) {
    case Kernel::Dotproduct: return "dotproduct";
    case Kernel::Axpy: return "axpy";
    case Kernel::Fft: return "fft";
  }
  return "?";
}

const char* isa_name(Isa isa) {
  return isa == Isa::Zoozve ? "zoozve" : "rvv";
}

Kernel kernel_from_name(const std::string& name) {
  if (name == "dotproduct" || name == "dot") return Kernel::Dotproduct;
  if (name == "axpy") return Kernel::Axpy;
  if (name == "fft") return Kernel::Fft;
  throw Error("unknown kernel '" + name + "'");
}

std::vector<uint64_t> default_sizes(Kernel k) {
  if (k == Kernel::Fft) return {32, 64, 128, 256, 512, 1024, 2048};
  return {512, 1024, 2048, 4096, 8192, 16384};
}

VConfig wide_config() { return VConfig{512, 2048, 16}; }

RvvConfig rvv_config(Kernel k) {
  switch (k) {
    case Kernel::Dotproduct: return RvvConfig{512, 16, 2};  // strips of 64
    case Kernel::Axpy: return RvvConfig{512, 16, 8};        // strips of 256
    case Kernel::Fft: return RvvConfig{512, 32, 2};         // strips of 32
  }
  return {};
}

namespace {



uint64_t align64(uint64_t v) { return (v + 63) & ~uint64_t{63}; }

void check_sweep(Kernel k, uint64_t n) {
  for (uint64_t s : default_sizes(k))
    if (s == n) return;
  throw Error(std::string(kernel_name(k)) + " size " + std::to_string(n) +
              " outside the supported sweep");
}

void write_i16(std::vector<uint8_t>& mem, uint64_t addr,
               const std::vector<int16_t>& v) {
  for (size_t i = 0; i < v.size(); ++i) {
    uint16_t u = static_cast<uint16_t>(v[i]);
    mem[addr + 2 * i] = static_cast<uint8_t>(u & 0xFF);
    mem[addr + 2 * i + 1] = static_cast<uint8_t>(u >> 8);
  }
}

void write_i32(std::vector<uint8_t>& mem, uint64_t addr,
               const std::vector<int32_t>& v) {
  for (size_t i = 0; i < v.size(); ++i) {
    uint32_t u = static_cast<uint32_t>(v[i]);
    for (int b = 0; b < 4; ++b)
      mem[addr + 4 * i + b] = static_cast<uint8_t>((u >> (8 * b)) & 0xFF);
  }
}

uint32_t ilog2(uint64_t n) {
  uint32_t l = 0;
  while ((uint64_t{1} << l) < n) ++l;
  return l;
}

// Wraparound 32-bit helpers matching the machine ops exactly.
int32_t wmul(int32_t a, int32_t b) {
  return static_cast<int32_t>(static_cast<uint32_t>(a) *
                              static_cast<uint32_t>(b));
}
int32_t wadd(int32_t a, int32_t b) {
  return static_cast<int32_t>(static_cast<uint32_t>(a) +
                              static_cast<uint32_t>(b));
}
int32_t wsub(int32_t a, int32_t b) {
  return static_cast<int32_t>(static_cast<uint32_t>(a) -
                              static_cast<uint32_t>(b));
}
// round-half-up >>15 used after twiddle multiplies
int32_t rnd15(int32_t v) { return wadd(v, 0x4000) >> 15; }

int32_t q15(double x) {
  long v = std::lround(x * 32768.0);
  if (v > 32767) v = 32767;
  if (v < -32768) v = -32768;
  return static_cast<int32_t>(v);
}

}  // namespace

KernelInputs random_inputs(Kernel k, uint64_t n, uint64_t seed) {
  KernelInputs in;
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (n + 1)) ^
                      (static_cast<uint64_t>(k) << 56));
  auto next16 = [&] { return static_cast<int16_t>(rng() & 0xFFFF); };
  if (k == Kernel::Fft) {
    in.re.resize(n);
    in.im.resize(n);
    for (uint64_t i = 0; i < n; ++i) {
      in.re[i] = next16();
      in.im[i] = next16();
    }
  } else {
    in.a.resize(n);
    in.b.resize(n);
    for (uint64_t i = 0; i < n; ++i) {
      in.a[i] = next16();
      in.b[i] = next16();
    }
    // The multiplier comes from the seed alone and avoids values the
    // compiled kernel already holds (0, 1, sizes, addresses), keeping the
    // instruction count independent of n.
    std::mt19937_64 rng_scalar(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
    in.scalar = static_cast<int16_t>(3 + rng_scalar() % 398);
  }
  return in;
}

int16_t ref_dotproduct(const std::vector<int16_t>& a,
                       const std::vector<int16_t>& b) {
  uint16_t acc = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    uint16_t p = static_cast<uint16_t>(static_cast<uint32_t>(
        static_cast<uint16_t>(a[i]) * static_cast<uint32_t>(
                                          static_cast<uint16_t>(b[i]))));
    acc = static_cast<uint16_t>(acc + p);
  }
  return static_cast<int16_t>(acc);
}

std::vector<int16_t> ref_axpy(int16_t scalar, const std::vector<int16_t>& x,
                              const std::vector<int16_t>& y) {
  std::vector<int16_t> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    uint16_t ax = static_cast<uint16_t>(
        static_cast<uint32_t>(static_cast<uint16_t>(x[i])) *
        static_cast<uint16_t>(scalar));
    out[i] = static_cast<int16_t>(
        static_cast<uint16_t>(ax + static_cast<uint16_t>(y[i])));
  }
  return out;
}

FftTables fft_tables(uint64_t n) {
  uint32_t logn = ilog2(n);
  FftTables t;
  t.rev.resize(n);
  for (uint64_t i = 0; i < n; ++i) {
    uint64_t r = 0;
    for (uint32_t b = 0; b < logn; ++b)
      if (i & (uint64_t{1} << b)) r |= uint64_t{1} << (logn - 1 - b);
    t.rev[i] = static_cast<int32_t>(r);
  }
  uint64_t half_n = n / 2;
  t.top_idx.resize(half_n * logn);
  t.bot_idx.resize(half_n * logn);
  t.tw_re.resize(half_n * logn);
  t.tw_im.resize(half_n * logn);
  for (uint32_t s = 1; s <= logn; ++s) {
    uint64_t m = uint64_t{1} << s;
    uint64_t half = m / 2;
    uint64_t so = (s - 1) * half_n;
    for (uint64_t g = 0; g < n / m; ++g) {
      for (uint64_t j = 0; j < half; ++j) {
        uint64_t k = so + g * half + j;
        t.top_idx[k] = static_cast<int32_t>(g * m + j);
        t.bot_idx[k] = static_cast<int32_t>(g * m + j + half);
        double ang = 2.0 * M_PI * static_cast<double>(j) /
                     static_cast<double>(m);
        t.tw_re[k] = q15(std::cos(ang));
        t.tw_im[k] = q15(-std::sin(ang));
      }
    }
  }
  return t;
}

// Radix-2 decimation-in-time, Q15 twiddles, one arithmetic >>1 per stage
// (output is DFT(x)/n). All 32-bit ops wrap exactly like the vector units.
void ref_fft(std::vector<int32_t>& re, std::vector<int32_t>& im) {
  uint64_t n = re.size();
  uint32_t logn = ilog2(n);
  FftTables t = fft_tables(n);

  std::vector<int32_t> wr(n), wi(n);
  for (uint64_t i = 0; i < n; ++i) {
    wr[i] = re[static_cast<uint64_t>(t.rev[i])];
    wi[i] = im[static_cast<uint64_t>(t.rev[i])];
  }
  uint64_t half_n = n / 2;
  for (uint32_t s = 1; s <= logn; ++s) {
    uint64_t so = (s - 1) * half_n;
    for (uint64_t k = 0; k < half_n; ++k) {
      uint64_t ti = static_cast<uint64_t>(t.top_idx[so + k]);
      uint64_t bi = static_cast<uint64_t>(t.bot_idx[so + k]);
      int32_t wre = t.tw_re[so + k], wim = t.tw_im[so + k];
      int32_t are = wr[ti], aim = wi[ti];
      int32_t bre = wr[bi], bim = wi[bi];
      int32_t tre = rnd15(wsub(wmul(bre, wre), wmul(bim, wim)));
      int32_t tim = rnd15(wadd(wmul(bre, wim), wmul(bim, wre)));
      wr[ti] = wadd(are, tre) >> 1;
      wi[ti] = wadd(aim, tim) >> 1;
      wr[bi] = wsub(are, tre) >> 1;
      wi[bi] = wsub(aim, tim) >> 1;
    }
  }
  re = wr;
  im = wi;
}

std::vector<uint8_t> expected_output(Kernel k, const KernelInputs& inputs) {
  std::vector<uint8_t> out;
  if (k == Kernel::Dotproduct) {
    uint16_t r = static_cast<uint16_t>(ref_dotproduct(inputs.a, inputs.b));
    out = {static_cast<uint8_t>(r & 0xFF), static_cast<uint8_t>(r >> 8)};
  } else if (k == Kernel::Axpy) {
    std::vector<int16_t> y = ref_axpy(inputs.scalar, inputs.a, inputs.b);
    out.resize(2 * y.size());
    write_i16(out, 0, y);
  } else {
    std::vector<int32_t> re = inputs.re, im = inputs.im;
    ref_fft(re, im);
    out.resize(8 * re.size());
    write_i32(out, 0, re);
    write_i32(out, 4 * re.size(), im);
  }
  return out;
}

// --- generators --------------------------------------------------------

namespace {

std::string dot_ir(uint64_t n) {
  std::ostringstream ir;
  ir << "buffer @A : i16[" << n << "]\n"
     << "buffer @B : i16[" << n << "]\n"
     << "buffer @OUT : i16[64]\n"
     << "%a = load <" << n << " x i16> @A\n"
     << "%b = load <" << n << " x i16> @B\n"
     << "%p = mul <" << n << " x i16> %a, %b\n"
     << "%s = redsum <" << n << " x i16> %p\n"
     << "store <1 x i16> %s, @OUT\n";
  return ir.str();
}

std::string axpy_ir(uint64_t n, int16_t scalar) {
  std::ostringstream ir;
  ir << "buffer @X : i16[" << n << "]\n"
     << "buffer @Y : i16[" << n << "]\n"
     << "%x = load <" << n << " x i16> @X\n"
     << "%y = load <" << n << " x i16> @Y\n"
     << "%ax = mul.vx <" << n << " x i16> %x, " << scalar << "\n"
     << "%r = add <" << n << " x i16> %ax, %y\n"
     << "store <" << n << " x i16> %r, @Y\n";
  return ir.str();
}

KernelArtifacts build_dot(uint64_t n, Isa isa, const KernelInputs& in) {
  IrModule m = parse_ir(dot_ir(n));
  BufferLayout layout = layout_buffers(m, kBufferBase);
  uint64_t a_addr = layout.address.at("A");
  uint64_t b_addr = layout.address.at("B");
  uint64_t out_addr = layout.address.at("OUT");

  KernelArtifacts art;
  art.out_addr = out_addr;
  art.out_bytes = 2;
  art.memory.assign(layout.end, 0);
  write_i16(art.memory, a_addr, in.a);
  write_i16(art.memory, b_addr, in.b);

  if (isa == Isa::Zoozve) {
    art.program = compile(m, wide_config()).program;
    return art;
  }

  RvvConfig cfg = rvv_config(Kernel::Dotproduct);
  if (n % cfg.vlmax() != 0)
    throw Error("rvv dotproduct requires n to be a multiple of " +
                std::to_string(cfg.vlmax()));
  std::ostringstream s;
  s << "    li x10, " << n << "\n"
    << "    li x11, " << a_addr << "\n"
    << "    li x12, " << b_addr << "\n"
    << "    li x13, " << a_addr + 2 * n << "\n"
    << "loop:\n"
    << "    rvv.vsetvli x5, x10, e16, m2\n"
    << "    rvv.vle v0, (x11)+\n"
    << "    rvv.vle v2, (x12)+\n"
    << "    rvv.vmul v4, v0, v2\n"
    << "    rvv.vredsum v6, v6, v4\n"
    << "    bne x11, x13, loop\n"
    << "    li x14, " << out_addr << "\n"
    << "    rvv.vse v6, (x14)\n";
  art.program = assemble(s.str());
  return art;
}

KernelArtifacts build_axpy(uint64_t n, Isa isa, const KernelInputs& in) {
  IrModule m = parse_ir(axpy_ir(n, in.scalar));
  BufferLayout layout = layout_buffers(m, kBufferBase);
  uint64_t x_addr = layout.address.at("X");
  uint64_t y_addr = layout.address.at("Y");

  KernelArtifacts art;
  art.out_addr = y_addr;
  art.out_bytes = 2 * n;
  art.memory.assign(layout.end, 0);
  write_i16(art.memory, x_addr, in.a);
  write_i16(art.memory, y_addr, in.b);

  if (isa == Isa::Zoozve) {
    art.program = compile(m, wide_config()).program;
    return art;
  }

  std::ostringstream s;
  s << "    li x10, " << n << "\n"
    << "    li x11, " << x_addr << "\n"
    << "    li x12, " << y_addr << "\n"
    << "    li x7, " << in.scalar << "\n"
    << "loop:\n"
    << "    rvv.vsetvli x5, x10, e16, m8\n"
    << "    rvv.vle v0, (x11)\n"
    << "    rvv.vle v8, (x12)\n"
    << "    rvv.vmul.vx v16, v0, x7\n"
    << "    rvv.vadd v24, v16, v8\n"
    << "    rvv.vse v24, (x12)\n"
    << "    slli x6, x5, 1\n"
    << "    add x11, x11, x6\n"
    << "    add x12, x12, x6\n"
    << "    sub x10, x10, x5\n"
    << "    bne x10, x0, loop\n";
  art.program = assemble(s.str());
  return art;
}

struct FftLayout {
  uint64_t re, im, out_re, out_im, rev, top, bot, twre, twim, end;
};

FftLayout fft_layout(uint64_t n) {
  uint32_t logn = ilog2(n);
  uint64_t table_bytes = (n / 2) * logn * 4;
  FftLayout l;
  uint64_t p = kBufferBase;
  l.re = p; p = align64(p + 4 * n);
  l.im = p; p = align64(p + 4 * n);
  l.out_re = p; p += 4 * n;          // out_im must follow contiguously
  l.out_im = p; p = align64(p + 4 * n);
  l.rev = p; p = align64(p + 4 * n);
  l.top = p; p = align64(p + table_bytes);
  l.bot = p; p = align64(p + table_bytes);
  l.twre = p; p = align64(p + table_bytes);
  l.twim = p; p = align64(p + table_bytes);
  l.end = p;
  return l;
}

// Register-file plan for the wide fft kernel (element width 32, 16 elements
// per register, so a full 2048-point array needs 128 registers).
namespace fft_regs {
constexpr uint32_t x_re = 0, x_im = 128, rev = 256;
constexpr uint32_t work_re = 384, work_im = 512;
constexpr uint32_t top = 640, bot = 704, tw_re = 768, tw_im = 832;
constexpr uint32_t a_re = 896, a_im = 960, b_re = 1024, b_im = 1088;
constexpr uint32_t p1 = 1152, p2 = 1216, t_re = 1280, t_im = 1344;
constexpr uint32_t top_re = 1408, top_im = 1472, bot_re = 1536,
                   bot_im = 1600;
}  // namespace fft_regs

std::string fft_wide_asm(uint64_t n, const FftLayout& l) {
  using namespace fft_regs;
  uint32_t logn = ilog2(n);
  uint64_t half_bytes = (n / 2) * 4;
  std::ostringstream s;
  s << "    li x9, 2\n"          // e32 selector
    << "    vsetcsr 0, x9\n"
    << "    vsetcsr 1, x0\n"
    << "    li x20, " << n << "\n"
    << "    li x21, " << n / 2 << "\n"
    << "    li x22, 16384\n"
    << "    li x23, 15\n"
    << "    li x24, 1\n"
    << "    li x1, " << l.re << "\n"
    << "    vld v" << x_re << ", (x1), x20\n"
    << "    li x2, " << l.im << "\n"
    << "    vld v" << x_im << ", (x2), x20\n"
    << "    li x3, " << l.rev << "\n"
    << "    vld v" << rev << ", (x3), x20\n"
    << "    vgather v" << work_re << ", v" << x_re << ", v" << rev
    << ", x20\n"
    << "    vgather v" << work_im << ", v" << x_im << ", v" << rev
    << ", x20\n";
  for (uint32_t st = 1; st <= logn; ++st) {
    uint64_t off = (st - 1) * half_bytes;
    s << "    li x4, " << l.top + off << "\n"
      << "    vld v" << top << ", (x4), x21\n"
      << "    li x5, " << l.bot + off << "\n"
      << "    vld v" << bot << ", (x5), x21\n"
      << "    li x6, " << l.twre + off << "\n"
      << "    vld v" << tw_re << ", (x6), x21\n"
      << "    li x7, " << l.twim + off << "\n"
      << "    vld v" << tw_im << ", (x7), x21\n"
      << "    vgather v" << a_re << ", v" << work_re << ", v" << top << ", x21\n"
      << "    vgather v" << a_im << ", v" << work_im << ", v" << top << ", x21\n"
      << "    vgather v" << b_re << ", v" << work_re << ", v" << bot << ", x21\n"
      << "    vgather v" << b_im << ", v" << work_im << ", v" << bot << ", x21\n"
      << "    vmul v" << p1 << ", v" << b_re << ", v" << tw_re << ", x21\n"
      << "    vmul v" << p2 << ", v" << b_im << ", v" << tw_im << ", x21\n"
      << "    vsub v" << t_re << ", v" << p1 << ", v" << p2 << ", x21\n"
      << "    vadd.vx v" << t_re << ", v" << t_re << ", x22, x21\n"
      << "    vsra.vx v" << t_re << ", v" << t_re << ", x23, x21\n"
      << "    vmul v" << p1 << ", v" << b_re << ", v" << tw_im << ", x21\n"
      << "    vmul v" << p2 << ", v" << b_im << ", v" << tw_re << ", x21\n"
      << "    vadd v" << t_im << ", v" << p1 << ", v" << p2 << ", x21\n"
      << "    vadd.vx v" << t_im << ", v" << t_im << ", x22, x21\n"
      << "    vsra.vx v" << t_im << ", v" << t_im << ", x23, x21\n"
      << "    vadd v" << top_re << ", v" << a_re << ", v" << t_re << ", x21\n"
      << "    vsra.vx v" << top_re << ", v" << top_re << ", x24, x21\n"
      << "    vadd v" << top_im << ", v" << a_im << ", v" << t_im << ", x21\n"
      << "    vsra.vx v" << top_im << ", v" << top_im << ", x24, x21\n"
      << "    vsub v" << bot_re << ", v" << a_re << ", v" << t_re << ", x21\n"
      << "    vsra.vx v" << bot_re << ", v" << bot_re << ", x24, x21\n"
      << "    vsub v" << bot_im << ", v" << a_im << ", v" << t_im << ", x21\n"
      << "    vsra.vx v" << bot_im << ", v" << bot_im << ", x24, x21\n"
      << "    vscatter v" << work_re << ", v" << top_re << ", v" << top << ", x21\n"
      << "    vscatter v" << work_im << ", v" << top_im << ", v" << top << ", x21\n"
      << "    vscatter v" << work_re << ", v" << bot_re << ", v" << bot << ", x21\n"
      << "    vscatter v" << work_im << ", v" << bot_im << ", v" << bot << ", x21\n";
  }
  s << "    li x1, " << l.out_re << "\n"
    << "    vst v" << work_re << ", (x1), x20\n"
    << "    li x2, " << l.out_im << "\n"
    << "    vst v" << work_im << ", (x2), x20\n";
  return s.str();
}

std::string fft_rvv_asm(uint64_t n, const FftLayout& l) {
  uint32_t logn = ilog2(n);
  uint64_t half_bytes_total = (n / 2) * 4;
  std::ostringstream s;
  s << "    li x22, 16384\n"
    << "    li x23, 15\n"
    << "    li x24, 1\n"
    // bit-reversed copy of both arrays through the scalar core
    << "    li x1, " << l.rev << "\n"
    << "    li x2, " << l.re << "\n"
    << "    li x3, " << l.im << "\n"
    << "    li x4, " << l.out_re << "\n"
    << "    li x5, " << l.out_im << "\n"
    << "    li x6, 4\n"
    << "    li x8, " << l.rev + 4 * n << "\n"
    << "brl:\n"
    << "    lw x9, 0(x1)\n"
    << "    slli x10, x9, 2\n"
    << "    add x11, x2, x10\n"
    << "    lw x12, 0(x11)\n"
    << "    sw x12, 0(x4)\n"
    << "    add x11, x3, x10\n"
    << "    lw x12, 0(x11)\n"
    << "    sw x12, 0(x5)\n"
    << "    add x1, x1, x6\n"
    << "    add x4, x4, x6\n"
    << "    add x5, x5, x6\n"
    << "    bne x1, x8, brl\n";
  for (uint32_t st = 1; st <= logn; ++st) {
    uint64_t m = uint64_t{1} << st;
    uint64_t half = m / 2;
    uint64_t off = (st - 1) * half_bytes_total;
    std::string grp = "grp" + std::to_string(st);
    std::string str = "str" + std::to_string(st);
    s << "    li x1, " << l.twre + off << "\n"
      << "    li x2, " << l.twim + off << "\n"
      << "    li x3, " << l.out_re << "\n"
      << "    li x4, " << l.out_im << "\n"
      << "    li x5, " << l.out_re + half * 4 << "\n"
      << "    li x6, " << l.out_im + half * 4 << "\n"
      << "    li x7, " << n / m << "\n"
      << "    li x13, " << half * 4 << "\n"
      << grp << ":\n"
      << "    li x15, " << half << "\n"
      << str << ":\n"
      << "    rvv.vsetvli x16, x15, e32, m2\n"
      << "    rvv.vle v0, (x3)\n"
      << "    rvv.vle v2, (x4)\n"
      << "    rvv.vle v4, (x5)\n"
      << "    rvv.vle v6, (x6)\n"
      << "    rvv.vle v8, (x1)\n"
      << "    rvv.vle v10, (x2)\n"
      << "    rvv.vmul v12, v4, v8\n"
      << "    rvv.vmul v14, v6, v10\n"
      << "    rvv.vsub v12, v12, v14\n"
      << "    rvv.vadd.vx v12, v12, x22\n"
      << "    rvv.vsra.vx v12, v12, x23\n"
      << "    rvv.vmul v14, v4, v10\n"
      << "    rvv.vmul v16, v6, v8\n"
      << "    rvv.vadd v14, v14, v16\n"
      << "    rvv.vadd.vx v14, v14, x22\n"
      << "    rvv.vsra.vx v14, v14, x23\n"
      << "    rvv.vadd v18, v0, v12\n"
      << "    rvv.vsra.vx v18, v18, x24\n"
      << "    rvv.vadd v20, v2, v14\n"
      << "    rvv.vsra.vx v20, v20, x24\n"
      << "    rvv.vsub v22, v0, v12\n"
      << "    rvv.vsra.vx v22, v22, x24\n"
      << "    rvv.vsub v24, v2, v14\n"
      << "    rvv.vsra.vx v24, v24, x24\n"
      << "    rvv.vse v18, (x3)\n"
      << "    rvv.vse v20, (x4)\n"
      << "    rvv.vse v22, (x5)\n"
      << "    rvv.vse v24, (x6)\n"
      << "    slli x17, x16, 2\n"
      << "    add x3, x3, x17\n"
      << "    add x4, x4, x17\n"
      << "    add x5, x5, x17\n"
      << "    add x6, x6, x17\n"
      << "    add x1, x1, x17\n"
      << "    add x2, x2, x17\n"
      << "    sub x15, x15, x16\n"
      << "    bne x15, x0, " << str << "\n"
      << "    add x3, x3, x13\n"
      << "    add x4, x4, x13\n"
      << "    add x5, x5, x13\n"
      << "    add x6, x6, x13\n"
      << "    sub x7, x7, x24\n"
      << "    bne x7, x0, " << grp << "\n";
  }
  return s.str();
}

KernelArtifacts build_fft(uint64_t n, Isa isa, const KernelInputs& in) {
  FftLayout l = fft_layout(n);
  FftTables t = fft_tables(n);

  KernelArtifacts art;
  art.out_addr = l.out_re;
  art.out_bytes = 8 * n;  // out_re then out_im, contiguous
  art.memory.assign(l.end, 0);
  write_i32(art.memory, l.re, in.re);
  write_i32(art.memory, l.im, in.im);
  write_i32(art.memory, l.rev, t.rev);
  write_i32(art.memory, l.top, t.top_idx);
  write_i32(art.memory, l.bot, t.bot_idx);
  write_i32(art.memory, l.twre, t.tw_re);
  write_i32(art.memory, l.twim, t.tw_im);

  art.program = assemble(isa == Isa::Zoozve ? fft_wide_asm(n, l)
                                            : fft_rvv_asm(n, l));
  return art;
}

}  // namespace

KernelArtifacts build_kernel(Kernel k, uint64_t n, Isa isa,
                             const KernelInputs& inputs) {
  check_sweep(k, n);
  switch (k) {
    case Kernel::Dotproduct: return build_dot(n, isa, inputs);
    case Kernel::Axpy: return build_axpy(n, isa, inputs);
    case Kernel::Fft: return build_fft(n, isa, inputs);
  }
  throw Error("bad kernel");
}

}  // namespace zoozve
