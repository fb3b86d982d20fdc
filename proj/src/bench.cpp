#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "zoozve/errors.hpp"
#include "zoozve/kernels.hpp"
#include "zoozve/rvv.hpp"

namespace zoozve {

namespace {

std::vector<uint8_t> slice(const std::vector<uint8_t>& mem, uint64_t addr,
                           uint64_t bytes) {
  return std::vector<uint8_t>(mem.begin() + static_cast<long>(addr),
                              mem.begin() + static_cast<long>(addr + bytes));
}

struct Pair {
  BenchResult wide, rvv;
};

Pair run_pair(Kernel k, uint64_t n, uint64_t seed) {
  KernelInputs inputs = random_inputs(k, n, seed);
  std::vector<uint8_t> expected = expected_output(k, inputs);

  KernelArtifacts wide_art = build_kernel(k, n, Isa::Zoozve, inputs);
  KernelArtifacts rvv_art = build_kernel(k, n, Isa::Rvv, inputs);

  auto [wstate, wstats] = run(wide_art.program, wide_config(),
                              wide_art.memory);
  auto [rstate, rstats] = run_rvv(rvv_art.program, rvv_config(k),
                                  rvv_art.memory);

  std::vector<uint8_t> wout =
      slice(wstate.core.mem, wide_art.out_addr, wide_art.out_bytes);
  std::vector<uint8_t> rout =
      slice(rstate.core.mem, rvv_art.out_addr, rvv_art.out_bytes);

  double speedup = static_cast<double>(rstats.dynamic_count) /
                   static_cast<double>(wstats.dynamic_count);

  Pair p;
  p.wide = BenchResult{BenchCase{k, n, Isa::Zoozve, seed}, wstats, speedup,
                       wout == expected};
  p.rvv = BenchResult{BenchCase{k, n, Isa::Rvv, seed}, rstats, speedup,
                      rout == expected && rout == wout};
  return p;
}

}  // namespace

std::vector<BenchResult> run_benchmark(
    const std::vector<Kernel>& kernels,
    const std::vector<std::vector<uint64_t>>& sizes, uint64_t seed,
    unsigned jobs) {
  struct Job {
    Kernel k;
    uint64_t n;
  };
  std::vector<Job> todo;
  for (size_t i = 0; i < kernels.size(); ++i)
    for (uint64_t n : sizes[i]) todo.push_back({kernels[i], n});

  std::vector<Pair> pairs(todo.size());
  if (jobs <= 1) {
    for (size_t i = 0; i < todo.size(); ++i)
      pairs[i] = run_pair(todo[i].k, todo[i].n, seed);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto worker = [&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= todo.size()) return;
        try {
          pairs[i] = run_pair(todo[i].k, todo[i].n, seed);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<BenchResult> out;
  out.reserve(pairs.size() * 2);
  for (const Pair& p : pairs) {
    out.push_back(p.wide);
    out.push_back(p.rvv);
  }
  return out;
}

std::vector<BenchResult> run_benchmark(const std::vector<Kernel>& kernels,
                                       uint64_t seed, unsigned jobs) {
  std::vector<std::vector<uint64_t>> sizes;
  for (Kernel k : kernels) sizes.push_back(default_sizes(k));
  return run_benchmark(kernels, sizes, seed, jobs);
}

std::vector<CsvRow> to_rows(const std::vector<BenchResult>& results) {
  std::vector<CsvRow> rows;
  rows.reserve(results.size());
  for (const BenchResult& r : results)
    rows.push_back(CsvRow{kernel_name(r.bench_case.kernel), r.bench_case.n,
                          isa_name(r.bench_case.isa), r.stats.dynamic_count,
                          r.stats.strip_iterations, r.speedup});
  return rows;
}

void emit_csv(const std::vector<CsvRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "# schema: 1\n";
  out << "kernel,n,isa,dyn_count,strip_iters,speedup\n";
  for (const CsvRow& r : rows)
    out << r.kernel << "," << r.n << "," << r.isa << "," << r.dyn_count << ","
        << r.strip_iters << "," << std::setprecision(10) << r.speedup << "\n";
}

std::vector<CsvRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<CsvRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "kernel,n,isa,dyn_count,strip_iters,speedup")
        throw Error("unexpected csv header: " + line);
      header_seen = true;
      continue;
    }
    std::istringstream ls(line);
    CsvRow r;
    std::string field;
    std::getline(ls, r.kernel, ',');
    std::getline(ls, field, ',');
    r.n = std::stoull(field);
    std::getline(ls, r.isa, ',');
    std::getline(ls, field, ',');
    r.dyn_count = std::stoull(field);
    std::getline(ls, field, ',');
    r.strip_iters = std::stoull(field);
    std::getline(ls, field, ',');
    r.speedup = std::stod(field);
    rows.push_back(r);
  }
  if (!header_seen) throw Error("csv has no header row: " + path);
  return rows;
}

namespace {

struct PanelData {
  std::string kernel;
  std::vector<uint64_t> sizes;
  std::vector<double> speedups;
  std::vector<uint64_t> iters;  // rvv strip iterations
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

void emit_plot(const std::vector<CsvRow>& rows, const std::string& path) {
  // Group by kernel; one panel each: speedup bars (log scale) plus the rvv
  // strip-iteration series as a line.
  std::vector<PanelData> panels;
  for (const CsvRow& r : rows) {
    PanelData* p = nullptr;
    for (PanelData& cand : panels)
      if (cand.kernel == r.kernel) p = &cand;
    if (!p) {
      panels.push_back(PanelData{r.kernel, {}, {}, {}});
      p = &panels.back();
    }
    if (r.isa == "rvv") {
      p->sizes.push_back(r.n);
      p->speedups.push_back(r.speedup);
      p->iters.push_back(r.strip_iters);
    }
  }

  const int width = 960, panel_h = 240, margin = 56, bottom = 38;
  int height = margin + static_cast<int>(panels.size()) * (panel_h + 40);

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n"
      << "<style>text{font-family:sans-serif;font-size:12px}"
         ".t{font-size:14px;font-weight:bold}</style>\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  int top = margin / 2;
  for (const PanelData& p : panels) {
    double max_speedup = 1.0, max_iter = 1.0;
    for (double s : p.speedups) max_speedup = std::max(max_speedup, s);
    for (uint64_t it : p.iters)
      max_iter = std::max(max_iter, static_cast<double>(it));
    double logmax = std::log10(1.0 + max_speedup);

    int plot_w = width - 2 * margin;
    int plot_h = panel_h - bottom;
    int x0 = margin, y0 = top + plot_h;
    size_t nbar = p.sizes.size();
    double slot = static_cast<double>(plot_w) / std::max<size_t>(nbar, 1);

    out << "<text class=\"t\" x=\"" << x0 << "\" y=\"" << top - 6 << "\">"
        << p.kernel
        << " - dynamic-instruction-count speedup (bars, log scale) and "
           "baseline strip-mining iterations (line)</text>\n";
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\""
        << x0 + plot_w << "\" y2=\"" << y0
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    std::ostringstream line_pts;
    for (size_t i = 0; i < nbar; ++i) {
      double cx = x0 + slot * (static_cast<double>(i) + 0.5);
      double bh = plot_h * std::log10(1.0 + p.speedups[i]) / logmax;
      double bw = slot * 0.45;
      out << "<rect x=\"" << cx - bw / 2 << "\" y=\"" << y0 - bh
          << "\" width=\"" << bw << "\" height=\"" << bh
          << "\" fill=\"#4878a8\"/>\n";
      out << "<text x=\"" << cx << "\" y=\"" << y0 - bh - 4
          << "\" text-anchor=\"middle\">" << fmt(p.speedups[i]) << "x</text>\n";
      out << "<text x=\"" << cx << "\" y=\"" << y0 + 16
          << "\" text-anchor=\"middle\">" << p.sizes[i] << "</text>\n";
      double ly =
          y0 - plot_h * (static_cast<double>(p.iters[i]) / max_iter) * 0.9;
      line_pts << cx << "," << ly << " ";
      out << "<circle cx=\"" << cx << "\" cy=\"" << ly
          << "\" r=\"3\" fill=\"#c05040\"/>\n";
      out << "<text x=\"" << cx + 6 << "\" y=\"" << ly - 5
          << "\" fill=\"#c05040\">" << p.iters[i] << "</text>\n";
    }
    out << "<polyline points=\"" << line_pts.str()
        << "\" fill=\"none\" stroke=\"#c05040\" stroke-width=\"1.5\"/>\n";
    top += panel_h + 40;
  }
  out << "</svg>\n";
}

}  // namespace zoozve
