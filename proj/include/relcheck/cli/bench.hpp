#pragma once

#include <string>
#include <vector>

namespace relcheck::cli {

// Instrumentation overhead on a checksum workload: one routine called once
// per iteration, a checksum of its array taken at entry and exit.
struct BenchOptions {
  int reps = 5;
  long large = 40800;  // doubles
  long small = 408;
  long span = 500;       // elements updated per sweep (clamped to the array size)
  int heavy_passes = 8;  // sweeps per call
  int light_passes = 2;
  // Calls per run; heavy cells use a quarter as many.
  int iterations = 4000;
};

struct BenchRow {
  std::string size;  // "large" | "small"
  std::string work;  // "heavy" | "light"
  // Median wall seconds per method.
  double none = 0, compiled = 0, patched = 0, trap = 0;
};

// Source of the workload; `compiled_in` writes the checksum calls into it.
std::string bench_program(long n, long span, int passes, int iterations, bool compiled_in);

// Times one method ("none", "compiled-in", "patched", "trap") once.
double time_method(const std::string& method, long n, long span, int passes, int iterations);

// Median of opts.reps runs per method, methods interleaved within each rep.
std::vector<BenchRow> bench(const BenchOptions& opts);
std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace relcheck::cli
