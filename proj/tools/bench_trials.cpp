// Compares the serial trial runner against the OpenMP one on the same suite:
// wall time for both, and a byte-level check that the reports agree.

#include <chrono>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "btfleet/benchmark.hpp"

using namespace btfleet;
using Clock = std::chrono::steady_clock;

int main(int argc, char** argv) {
    std::string suite_path = "suites/benchmark60.json";
    std::string planner = "oracle";
    int jobs = 0;  // 0 = hardware default
    if (argc > 1) suite_path = argv[1];
    if (argc > 2) planner = argv[2];
    if (argc > 3) jobs = std::atoi(argv[3]);
#ifdef _OPENMP
    if (jobs <= 0) jobs = omp_get_num_procs();
#else
    if (jobs <= 0) jobs = 1;
#endif

    const Suite suite = load_suite(suite_path);
    BenchmarkOptions options;
    options.keep_traces = true;

    auto t0 = Clock::now();
    const BenchmarkReport serial = run_benchmark_serial(suite, planner, options);
    auto t1 = Clock::now();
    options.jobs = jobs;
    const BenchmarkReport parallel = run_benchmark(suite, planner, options);
    auto t2 = Clock::now();

    const double serial_s = std::chrono::duration<double>(t1 - t0).count();
    const double parallel_s = std::chrono::duration<double>(t2 - t1).count();

    const bool identical = serial.to_json() == parallel.to_json() &&
                           serial.to_text() == parallel.to_text();
    std::cout << "suite " << suite.name << "  planner " << planner << "\n";
    std::cout << "serial    " << serial_s << " s\n";
    std::cout << "parallel  " << parallel_s << " s  (jobs=" << jobs << ")\n";
    std::cout << "speedup   " << (parallel_s > 0 ? serial_s / parallel_s : 0.0) << "x\n";
    std::cout << "reports   " << (identical ? "identical" : "DIFFER") << "\n";
    return identical ? 0 : 1;
}
