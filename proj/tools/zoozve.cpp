// Command-line front end: assemble, disassemble, run, compile, bench, plot.
// stdout carries machine-readable JSON lines / file artifacts only; human
// diagnostics go to stderr. Exit codes: 0 ok, 1 input error, 2 usage error,
// 3 correctness-check failure, 4 simulator trap.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "zoozve/assembler.hpp"
#include "zoozve/compiler.hpp"
#include "zoozve/encoding.hpp"
#include "zoozve/errors.hpp"
#include "zoozve/kernels.hpp"
#include "zoozve/rvv.hpp"
#include "zoozve/sim.hpp"

using nlohmann::json;
using namespace zoozve;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load_any(const std::string& path) {
  if (path.size() > 2 && path.substr(path.size() - 2) == ".s")
    return assemble(read_file(path));
  return load_program_file(path);
}

struct DumpRange {
  uint64_t start = 0, count = 0;
};

DumpRange parse_range(const std::string& s) {
  size_t colon = s.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("expected START:COUNT, got '" + s + "'");
  DumpRange r;
  r.start = std::stoull(s.substr(0, colon), nullptr, 0);
  r.count = std::stoull(s.substr(colon + 1), nullptr, 0);
  return r;
}

std::string hex_bytes(const uint8_t* data, size_t len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (size_t i = 0; i < len; ++i) {
    out += digits[data[i] >> 4];
    out += digits[data[i] & 0xF];
  }
  return out;
}

json stats_json(const TraceStats& stats) {
  json per;
  for (auto& [cls, count] : stats.per_class) per[class_name(cls)] = count;
  return json{{"dynamic_count", stats.dynamic_count},
              {"per_class", per},
              {"strip_iterations", stats.strip_iterations}};
}

struct RunFlags {
  std::string input, isa = "zoozve", trace_path;
  uint32_t vlen = 512, vregs = 2048, vew = 16, lmul = 1;
  uint64_t max_steps = 100'000'000;
  uint64_t mem_size = 16u << 20;
  std::vector<std::string> dump_mem, dump_vregs;
};

int cmd_run(const RunFlags& f) {
  Program program = load_any(f.input);

  std::ofstream trace_file;
  RunOptions opts;
  opts.max_steps = f.max_steps;
  opts.mem_size = f.mem_size;
  if (!f.trace_path.empty()) {
    trace_file.open(f.trace_path);
    if (!trace_file) throw Error("cannot open " + f.trace_path);
    opts.trace = [&trace_file](uint64_t idx, const Instruction& instr,
                               InstrClass cls) {
      trace_file << idx << "\t" << format_instruction(instr) << "\t"
                 << class_name(cls) << "\n";
    };
  }

  json out;
  if (f.isa == "zoozve") {
    VConfig cfg{f.vlen, f.vregs, f.vew};
    cfg.validate();
    auto [state, stats] = run(program, cfg, {}, opts);
    out = stats_json(stats);
    out["halted"] = true;
    json mem_dumps = json::object(), vreg_dumps = json::object();
    for (const std::string& d : f.dump_mem) {
      DumpRange r = parse_range(d);
      mem_dumps[d] = hex_bytes(state.core.mem.data() + r.start, r.count);
    }
    for (const std::string& d : f.dump_vregs) {
      DumpRange r = parse_range(d);
      size_t reg_bytes = cfg.vlen_bits / 8;
      vreg_dumps[d] = hex_bytes(state.vregs.data() + r.start * reg_bytes,
                                r.count * reg_bytes);
    }
    if (!f.dump_mem.empty()) out["mem"] = mem_dumps;
    if (!f.dump_vregs.empty()) out["vregs"] = vreg_dumps;
  } else if (f.isa == "rvv") {
    RvvConfig cfg{f.vlen, f.vew, f.lmul};
    cfg.validate();
    auto [state, stats] = run_rvv(program, cfg, {}, opts);
    out = stats_json(stats);
    out["halted"] = true;
    json mem_dumps = json::object(), vreg_dumps = json::object();
    for (const std::string& d : f.dump_mem) {
      DumpRange r = parse_range(d);
      mem_dumps[d] = hex_bytes(state.core.mem.data() + r.start, r.count);
    }
    for (const std::string& d : f.dump_vregs) {
      DumpRange r = parse_range(d);
      size_t reg_bytes = cfg.vlen_bits / 8;
      vreg_dumps[d] = hex_bytes(state.vregs.data() + r.start * reg_bytes,
                                r.count * reg_bytes);
    }
    if (!f.dump_mem.empty()) out["mem"] = mem_dumps;
    if (!f.dump_vregs.empty()) out["vregs"] = vreg_dumps;
  } else {
    throw CLI::ValidationError("--isa must be zoozve or rvv");
  }
  std::cout << out.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toolkit for the Zoozve wide-register vector ISA"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file");

  // asm
  std::string asm_in, asm_out;
  CLI::App* casm = app.add_subcommand("asm", "assemble .s into a .bin program");
  casm->add_option("input", asm_in, "assembly source")->required();
  casm->add_option("output", asm_out, "binary program")->required();

  // disasm
  std::string dis_in, dis_out;
  CLI::App* cdis =
      app.add_subcommand("disasm", "disassemble a .bin program into text");
  cdis->add_option("input", dis_in, "binary program")->required();
  cdis->add_option("output", dis_out, "output text file")->required();

  // run
  RunFlags rf;
  CLI::App* crun = app.add_subcommand("run", "run a program and print stats");
  crun->add_option("input", rf.input, "program (.s or .bin)")->required();
  crun->add_option("--isa", rf.isa, "zoozve or rvv")
      ->check(CLI::IsMember({"zoozve", "rvv"}));
  crun->add_option("--vlen", rf.vlen, "vector register width in bits");
  crun->add_option("--vregs", rf.vregs, "register count (zoozve)");
  crun->add_option("--vew", rf.vew, "initial element width in bits");
  crun->add_option("--lmul", rf.lmul, "initial lmul (rvv)");
  crun->add_option("--max-steps", rf.max_steps, "instruction budget");
  crun->add_option("--mem-size", rf.mem_size, "memory size in bytes");
  crun->add_option("--trace", rf.trace_path, "write per-instruction trace");
  crun->add_option("--dump-mem", rf.dump_mem,
                   "ADDR:BYTES memory range to dump (hex), repeatable");
  crun->add_option("--dump-vregs", rf.dump_vregs,
                   "HEAD:COUNT register range to dump (hex), repeatable");

  // compile
  std::string comp_in, comp_outdir = ".", comp_name;
  uint32_t comp_vlen = 512, comp_vregs = 2048, comp_vew = 16;
  CLI::App* ccomp = app.add_subcommand(
      "compile", "run the splitting/allocation/coalescing pipeline");
  ccomp->add_option("input", comp_in, "IR source (.ir)")->required();
  ccomp->add_option("--outdir", comp_outdir, "staged-artifact directory");
  ccomp->add_option("--name", comp_name, "artifact base name (default: stem)");
  ccomp->add_option("--vlen", comp_vlen, "vector register width in bits");
  ccomp->add_option("--vregs", comp_vregs, "register count");
  ccomp->add_option("--vew", comp_vew, "machine reset element width");

  // bench
  std::vector<std::string> bk_names = {"fft", "dotproduct", "axpy"};
  std::vector<uint64_t> bench_sizes;
  std::string bench_csv, bench_plot;
  uint64_t bench_seed = 1;
  unsigned bench_jobs = 1;
  CLI::App* cbench =
      app.add_subcommand("bench", "run the kernel comparison suite");
  cbench->add_option("--kernels", bk_names, "kernels: fft dotproduct axpy");
  cbench->add_option("--sizes", bench_sizes,
                     "problem sizes (single kernel only; default sweep)");
  cbench->add_option("--seed", bench_seed, "input randomization seed");
  cbench->add_option("--csv", bench_csv, "write results as csv");
  cbench->add_option("--plot", bench_plot, "write results as svg");
  cbench->add_option("--jobs", bench_jobs, "worker threads");

  // plot
  std::string plot_in, plot_out;
  CLI::App* cplot = app.add_subcommand("plot", "render a results csv as svg");
  cplot->add_option("input", plot_in, "csv produced by bench")->required();
  cplot->add_option("output", plot_out, "svg path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (casm->parsed()) {
      save_program_file(assemble(read_file(asm_in)), asm_out);
      std::cout << json{{"output", asm_out}}.dump() << "\n";
      return 0;
    }
    if (cdis->parsed()) {
      std::ofstream out(dis_out);
      if (!out) throw Error("cannot open " + dis_out);
      out << disassemble(load_program_file(dis_in));
      std::cout << json{{"output", dis_out}}.dump() << "\n";
      return 0;
    }
    if (crun->parsed()) return cmd_run(rf);
    if (ccomp->parsed()) {
      VConfig cfg{comp_vlen, comp_vregs, comp_vew};
      cfg.validate();
      CompileResult result = compile_text(read_file(comp_in), cfg);
      std::string name = comp_name.empty()
                             ? std::filesystem::path(comp_in).stem().string()
                             : comp_name;
      std::vector<std::string> paths =
          write_staged_files(result, comp_outdir, name);
      std::cout << json{{"artifacts", paths}}.dump() << "\n";
      return 0;
    }
    if (cbench->parsed()) {
      std::vector<Kernel> kernels;
      for (const std::string& n : bk_names)
        kernels.push_back(kernel_from_name(n));
      std::vector<std::vector<uint64_t>> sizes;
      if (!bench_sizes.empty()) {
        if (kernels.size() != 1)
          throw CLI::ValidationError("--sizes needs exactly one --kernels");
        sizes.push_back(bench_sizes);
      } else {
        for (Kernel k : kernels) sizes.push_back(default_sizes(k));
      }
      std::vector<BenchResult> results =
          run_benchmark(kernels, sizes, bench_seed, bench_jobs);
      bool all_correct = true;
      for (const BenchResult& r : results) {
        all_correct = all_correct && r.correct;
        std::cout << json{{"kernel", kernel_name(r.bench_case.kernel)},
                          {"n", r.bench_case.n},
                          {"isa", isa_name(r.bench_case.isa)},
                          {"dyn_count", r.stats.dynamic_count},
                          {"strip_iterations", r.stats.strip_iterations},
                          {"speedup", r.speedup},
                          {"correct", r.correct}}
                         .dump()
                  << "\n";
      }
      std::vector<CsvRow> rows = to_rows(results);
      if (!bench_csv.empty()) emit_csv(rows, bench_csv);
      if (!bench_plot.empty()) emit_plot(rows, bench_plot);
      std::cerr << "bench: " << results.size() << " runs, "
                << (all_correct ? "all outputs correct"
                                : "CORRECTNESS FAILURES")
                << "\n";
      return all_correct ? 0 : 3;
    }
    if (cplot->parsed()) {
      emit_plot(read_csv(plot_in), plot_out);
      std::cout << json{{"output", plot_out}}.dump() << "\n";
      return 0;
    }
  } catch (const SimTrap& t) {
    std::cerr << "error: " << t.what() << "\n";
    return 4;
  } catch (const Trap& t) {
    std::cerr << "error: " << t.what() << "\n";
    return 4;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
