#pragma once

#include <string>
#include <vector>

#include "prw/measures.hpp"
#include "prw/solvers.hpp"
#include "prw/types.hpp"

namespace prw::cli {

enum class Command { compute, bench_hypercube, bench_gaussian, bench_time, distmatrix };

Command command_from_name(const std::string& name);

// Fully resolved description of one CLI invocation. The cmd_* functions only
// read it, so tests can drive them without going through argv parsing.
struct RunSpec {
    Command command = Command::compute;
    Algorithm algorithm = Algorithm::rbcd;
    std::vector<Algorithm> algorithms;  // bench commands; empty -> {algorithm}
    SolverConfig config;

    std::string input_mu;
    std::string input_nu;
    std::string input_dir;  // distmatrix corpus
    std::string out_dir;
    MeasureFormat format = MeasureFormat::csv;

    std::vector<Index> n_list{100};
    std::vector<Index> d_list{30};
    std::vector<Index> k_list;  // empty -> {config.k}
    Index k_star = 2;
    std::vector<double> sigma_list;      // bench-gaussian noise levels
    std::vector<std::uint64_t> seeds;    // explicit seeds; empty -> 0..repeats-1
    int repeats = 1;
    int threads = 0;  // 0 -> hardware concurrency
    double oracle_tol = 1e-3;
    double rel_eta_ref = 1e-3;  // reference Wasserstein precision (bench-gaussian)
    // Matched step sizes for the gradient-ascent baselines, whose
    // step acts on 2VU instead of (2/eta)VU: tau_gas = tau / eta.
    bool scale_gas_tau = true;
    bool write_trace = false;

    void validate() const;
    std::vector<std::uint64_t> resolve_seeds() const;
    std::vector<Algorithm> resolve_algorithms() const;
    SolverConfig config_for(Algorithm algo) const;
};

int cmd_compute(const RunSpec& spec);
int cmd_bench_hypercube(const RunSpec& spec);
int cmd_bench_gaussian(const RunSpec& spec);
int cmd_bench_time(const RunSpec& spec);
int cmd_distmatrix(const RunSpec& spec);

// Dispatch on spec.command. Exit codes: 0 success, 1 usage/IO error,
// 2 solver non-convergence.
int run(const RunSpec& spec);

// Parses a CSV written by the bench commands: '#' comment lines are skipped,
// the first remaining line is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    Index column(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

}  // namespace prw::cli
