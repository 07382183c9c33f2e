#include "harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "prw/testbed.hpp"
#include "prw/transport.hpp"

namespace fs = std::filesystem;

namespace prw::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoConvergence = 2;

std::string sanitize(std::string message) {
    for (char& c : message)
        if (c == ',' || c == '\n') c = ';';
    return message;
}

void ensure_out_dir(const std::string& out_dir) {
    if (out_dir.empty()) throw invalid_input("--out directory is required");
    fs::create_directories(out_dir);
    const fs::path probe = fs::path(out_dir) / ".write_probe";
    std::ofstream test(probe);
    if (!test) throw invalid_input("output directory not writable: " + out_dir);
    test.close();
    fs::remove(probe);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write " + path);
    out << content;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& schema,
              const nlohmann::json& config_echo, const std::string& header)
        : out_(path) {
        if (!out_) throw invalid_input("cannot write " + path);
        out_.precision(17);
        out_ << "# " << schema << "\n";
        out_ << "# config: " << config_echo.dump() << "\n";
        out_ << header << "\n";
    }
    void row(const std::string& line) { out_ << line << "\n"; }

private:
    std::ofstream out_;
};

std::string fmt(double value) {
    std::ostringstream ss;
    ss.precision(17);
    ss << value;
    return ss.str();
}

// Runs tasks over a bounded pool; results land in caller-owned slots indexed
// by task id, so aggregation order never depends on completion order.
void parallel_for(int threads, int tasks, const std::function<void(int)>& body) {
    int count = threads <= 0 ? static_cast<int>(std::thread::hardware_concurrency())
                             : threads;
    count = std::max(1, std::min(count, tasks));
    if (count == 1) {
        for (int i = 0; i < tasks; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (int w = 0; w < count; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) body(i);
        });
    for (auto& t : pool) t.join();
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

struct CellStats {
    int count = 0;
    double sum = 0.0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    void add(double v) {
        ++count;
        sum += v;
        min = std::min(min, v);
        max = std::max(max, v);
    }
    double mean() const { return count ? sum / count : std::nan(""); }
};

nlohmann::json spec_echo(const RunSpec& spec) {
    nlohmann::json j = to_json(spec.config);
    j["algorithms"] = nlohmann::json::array();
    for (Algorithm algo : spec.resolve_algorithms())
        j["algorithms"].push_back(algorithm_name(algo));
    j["k_star"] = spec.k_star;
    j["repeats"] = spec.repeats;
    j["scale_gas_tau"] = spec.scale_gas_tau;
    return j;
}

}  // namespace

Command command_from_name(const std::string& name) {
    if (name == "compute") return Command::compute;
    if (name == "bench-hypercube") return Command::bench_hypercube;
    if (name == "bench-gaussian") return Command::bench_gaussian;
    if (name == "bench-time") return Command::bench_time;
    if (name == "distmatrix") return Command::distmatrix;
    throw invalid_input("unknown command: " + name);
}

void RunSpec::validate() const {
    config.validate();
    if (repeats < 1) throw invalid_input("repeats must be at least 1");
    if (command != Command::compute) {
        if (n_list.empty() || d_list.empty())
            throw invalid_input("n and d grids must be non-empty");
    }
    if (command == Command::bench_gaussian && sigma_list.empty())
        throw invalid_input("bench-gaussian needs a non-empty sigma list");
}

std::vector<std::uint64_t> RunSpec::resolve_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out(static_cast<std::size_t>(repeats));
    for (int i = 0; i < repeats; ++i) out[static_cast<std::size_t>(i)] = i;
    return out;
}

std::vector<Algorithm> RunSpec::resolve_algorithms() const {
    return algorithms.empty() ? std::vector<Algorithm>{algorithm} : algorithms;
}

SolverConfig RunSpec::config_for(Algorithm algo) const {
    SolverConfig out = config;
    const bool gas = algo == Algorithm::rgas || algo == Algorithm::ragas;
    if (gas && scale_gas_tau && out.mode == ParamMode::practical)
        out.tau = out.tau / out.eta;
    return out;
}

int cmd_compute(const RunSpec& spec) {
    try {
        spec.validate();
        if (spec.input_mu.empty() || spec.input_nu.empty())
            throw invalid_input("compute needs two measure files");
        const ProblemInstance instance =
            load_instance(spec.input_mu, spec.input_nu, spec.format);

        const auto start = std::chrono::steady_clock::now();
        const SolveResult result =
            solve(spec.algorithm, instance, spec.config_for(spec.algorithm));
        const StationarityReport cert =
            stationarity_report(instance, result, spec.oracle_tol);
        const double wall_ms = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();

        nlohmann::json out{
            {"prw_value", result.prw_value},
            {"grad_norm", cert.grad_norm},
            {"primal_gap", cert.primal_gap},
            {"oracle_bound", cert.oracle_bound},
            {"iterations", result.iterations},
            {"converged", result.converged},
            {"wall_ms", wall_ms},
            {"algorithm", algorithm_name(spec.algorithm)},
            {"instance", instance_metadata(instance)},
            {"config", to_json(spec.config)},
            {"params", {{"eta", result.params.eta}, {"tau", result.params.tau}}},
        };
        std::cout << out.dump(2) << std::endl;
        if (!spec.out_dir.empty()) {
            ensure_out_dir(spec.out_dir);
            write_text(join_path(spec.out_dir, "compute.json"), out.dump(2));
            if (spec.write_trace)
                write_text(join_path(spec.out_dir, "trace.json"),
                           to_json(result, true)["trace"].dump());
        }
        return result.converged ? kExitOk : kExitNoConvergence;
    } catch (const std::exception& err) {
        std::cerr << "compute: " << err.what() << std::endl;
        return kExitError;
    }
}

namespace {

struct BenchRow {
    std::string algorithm;
    Index n = 0, d = 0, k = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    double prw = std::nan("");
    double subspace_err = std::nan("");
    double ref_value = std::nan("");
    double ratio = std::nan("");
    double rel_error = std::nan("");
    int iterations = 0;
    bool converged = false;
    double wall_ms = std::nan("");
    std::string error;
};

int write_hypercube_outputs(const RunSpec& spec, const std::vector<BenchRow>& rows) {
    ensure_out_dir(spec.out_dir);
    const nlohmann::json echo = spec_echo(spec);
    write_text(join_path(spec.out_dir, "config.json"), echo.dump(2));

    CsvWriter out(join_path(spec.out_dir, "rows.csv"), "prw.bench_hypercube.v1", echo,
                  "algorithm,n,d,k,k_star,seed,prw_value,subspace_error,iterations,"
                  "converged,wall_ms,error");
    std::map<std::string, std::array<CellStats, 3>> cells;  // prw, subspace, wall
    int failures = 0;
    for (const BenchRow& row : rows) {
        out.row(row.algorithm + "," + std::to_string(row.n) + "," +
                std::to_string(row.d) + "," + std::to_string(row.k) + "," +
                std::to_string(spec.k_star) + "," + std::to_string(row.seed) + "," +
                fmt(row.prw) + "," + fmt(row.subspace_err) + "," +
                std::to_string(row.iterations) + "," + (row.converged ? "1" : "0") +
                "," + fmt(row.wall_ms) + "," + row.error);
        if (!row.error.empty()) {
            ++failures;
            continue;
        }
        auto& cell = cells[row.algorithm + "," + std::to_string(row.n) + "," +
                           std::to_string(row.d) + "," + std::to_string(row.k)];
        cell[0].add(row.prw);
        cell[1].add(row.subspace_err);
        cell[2].add(row.wall_ms);
    }

    CsvWriter summary(join_path(spec.out_dir, "summary.csv"),
                      "prw.bench_hypercube_summary.v1", echo,
                      "algorithm,n,d,k,rows,prw_mean,prw_min,prw_max,"
                      "subspace_error_mean,wall_ms_mean");
    for (const auto& [key, cell] : cells)
        summary.row(key + "," + std::to_string(cell[0].count) + "," +
                    fmt(cell[0].mean()) + "," + fmt(cell[0].min) + "," +
                    fmt(cell[0].max) + "," + fmt(cell[1].mean()) + "," +
                    fmt(cell[2].mean()));
    return failures == 0 ? kExitOk : kExitError;
}

}  // namespace

int cmd_bench_hypercube(const RunSpec& spec) {
    try {
        spec.validate();
        ensure_out_dir(spec.out_dir);
        const auto seeds = spec.resolve_seeds();
        const auto algos = spec.resolve_algorithms();
        const std::vector<Index> ks = spec.k_list.empty()
                                          ? std::vector<Index>{spec.config.k}
                                          : spec.k_list;

        struct Task {
            Algorithm algo;
            Index n, d, k;
            std::uint64_t seed;
        };
        std::vector<Task> tasks;
        for (Algorithm algo : algos)
            for (Index n : spec.n_list)
                for (Index d : spec.d_list)
                    for (Index k : ks)
                        for (std::uint64_t seed : seeds)
                            tasks.push_back({algo, n, d, k, seed});

        std::vector<BenchRow> rows(tasks.size());
        parallel_for(spec.threads, static_cast<int>(tasks.size()), [&](int i) {
            const Task& task = tasks[static_cast<std::size_t>(i)];
            BenchRow& row = rows[static_cast<std::size_t>(i)];
            row.algorithm = algorithm_name(task.algo);
            row.n = task.n;
            row.d = task.d;
            row.k = task.k;
            row.seed = task.seed;
            try {
                const auto [instance, truth] =
                    gen_fragmented_hypercube(task.n, task.d, spec.k_star, task.seed);
                SolverConfig config = spec.config_for(task.algo);
                config.k = task.k;
                config.seed = task.seed;
                const SolveResult result = solve(task.algo, instance, config);
                row.prw = result.prw_value;
                row.subspace_err = subspace_error(result.U_hat, *truth.U_star);
                row.iterations = result.iterations;
                row.converged = result.converged;
                row.wall_ms = result.timings.total_ms;
            } catch (const std::exception& err) {
                row.error = sanitize(err.what());
            }
        });
        return write_hypercube_outputs(spec, rows);
    } catch (const std::exception& err) {
        std::cerr << "bench-hypercube: " << err.what() << std::endl;
        return kExitError;
    }
}

int cmd_bench_gaussian(const RunSpec& spec) {
    try {
        spec.validate();
        ensure_out_dir(spec.out_dir);
        const auto seeds = spec.resolve_seeds();
        const auto algos = spec.resolve_algorithms();
        const std::vector<Index> ks = spec.k_list.empty()
                                          ? std::vector<Index>{spec.config.k}
                                          : spec.k_list;

        struct Task {
            Algorithm algo;
            Index n, d, k;
            double sigma;
            std::uint64_t seed;
        };
        std::vector<Task> tasks;
        std::vector<double> sigmas = spec.sigma_list;
        if (std::find(sigmas.begin(), sigmas.end(), 0.0) == sigmas.end())
            sigmas.insert(sigmas.begin(), 0.0);  // noise-free baseline pairs by seed
        for (Algorithm algo : algos)
            for (Index n : spec.n_list)
                for (Index d : spec.d_list)
                    for (Index k : ks)
                        for (double sigma : sigmas)
                            for (std::uint64_t seed : seeds)
                                tasks.push_back({algo, n, d, k, sigma, seed});

        std::vector<BenchRow> rows(tasks.size());
        parallel_for(spec.threads, static_cast<int>(tasks.size()), [&](int i) {
            const Task& task = tasks[static_cast<std::size_t>(i)];
            BenchRow& row = rows[static_cast<std::size_t>(i)];
            row.algorithm = algorithm_name(task.algo);
            row.n = task.n;
            row.d = task.d;
            row.k = task.k;
            row.sigma = task.sigma;
            row.seed = task.seed;
            try {
                const ProblemInstance instance = gen_wishart_gaussian(
                    task.n, task.d, spec.k_star, task.sigma, task.seed);
                SolverConfig config = spec.config_for(task.algo);
                config.k = task.k;
                config.seed = task.seed;
                const SolveResult result = solve(task.algo, instance, config);
                row.prw = result.prw_value;
                row.iterations = result.iterations;
                row.converged = result.converged;
                row.wall_ms = result.timings.total_ms;
                const ReferenceValue ref =
                    reference_wasserstein(instance, spec.rel_eta_ref);
                row.ref_value = ref.value;
                row.ratio = ref.value > 0.0 ? result.prw_value / ref.value : std::nan("");
            } catch (const std::exception& err) {
                row.error = sanitize(err.what());
            }
        });

        // Pair each noisy row with its sigma = 0 partner of the same
        // (algorithm, n, d, k, seed) to compute the relative error.
        std::map<std::string, double> baseline;
        for (const BenchRow& row : rows)
            if (row.sigma == 0.0 && row.error.empty())
                baseline[row.algorithm + "," + std::to_string(row.n) + "," +
                         std::to_string(row.d) + "," + std::to_string(row.k) + "," +
                         std::to_string(row.seed)] = row.prw;
        for (BenchRow& row : rows) {
            if (!row.error.empty()) continue;
            const auto it = baseline.find(row.algorithm + "," + std::to_string(row.n) +
                                          "," + std::to_string(row.d) + "," +
                                          std::to_string(row.k) + "," +
                                          std::to_string(row.seed));
            if (it != baseline.end() && it->second > 0.0)
                row.rel_error = (row.prw - it->second) / it->second;
        }

        const nlohmann::json echo = spec_echo(spec);
        write_text(join_path(spec.out_dir, "config.json"), echo.dump(2));
        CsvWriter out(join_path(spec.out_dir, "rows.csv"), "prw.bench_gaussian.v1", echo,
                      "algorithm,n,d,k,k_star,sigma,seed,prw_value,ref_wasserstein,"
                      "ratio,rel_error,iterations,converged,wall_ms,error");
        std::map<std::string, std::array<CellStats, 3>> cells;  // ratio, rel_err, wall
        int failures = 0;
        for (const BenchRow& row : rows) {
            out.row(row.algorithm + "," + std::to_string(row.n) + "," +
                    std::to_string(row.d) + "," + std::to_string(row.k) + "," +
                    std::to_string(spec.k_star) + "," + fmt(row.sigma) + "," +
                    std::to_string(row.seed) + "," + fmt(row.prw) + "," +
                    fmt(row.ref_value) + "," + fmt(row.ratio) + "," +
                    fmt(row.rel_error) + "," + std::to_string(row.iterations) + "," +
                    (row.converged ? "1" : "0") + "," + fmt(row.wall_ms) + "," +
                    row.error);
            if (!row.error.empty()) {
                ++failures;
                continue;
            }
            auto& cell =
                cells[row.algorithm + "," + std::to_string(row.n) + "," +
                      std::to_string(row.d) + "," + std::to_string(row.k) + "," +
                      fmt(row.sigma)];
            if (std::isfinite(row.ratio)) cell[0].add(row.ratio);
            if (std::isfinite(row.rel_error)) cell[1].add(row.rel_error);
            cell[2].add(row.wall_ms);
        }
        CsvWriter summary(join_path(spec.out_dir, "summary.csv"),
                          "prw.bench_gaussian_summary.v1", echo,
                          "algorithm,n,d,k,sigma,rows,ratio_mean,ratio_min,ratio_max,"
                          "rel_error_mean,wall_ms_mean");
        for (const auto& [key, cell] : cells)
            summary.row(key + "," + std::to_string(cell[2].count) + "," +
                        fmt(cell[0].mean()) + "," + fmt(cell[0].min) + "," +
                        fmt(cell[0].max) + "," + fmt(cell[1].mean()) + "," +
                        fmt(cell[2].mean()));
        return failures == 0 ? kExitOk : kExitError;
    } catch (const std::exception& err) {
        std::cerr << "bench-gaussian: " << err.what() << std::endl;
        return kExitError;
    }
}

int cmd_bench_time(const RunSpec& spec) {
    try {
        spec.validate();
        ensure_out_dir(spec.out_dir);
        const auto seeds = spec.resolve_seeds();
        const auto algos = spec.resolve_algorithms();

        struct Task {
            Algorithm algo;
            Index n, d;
            std::uint64_t seed;
        };
        std::vector<Task> tasks;
        for (Index n : spec.n_list)
            for (Index d : spec.d_list)
                for (std::uint64_t seed : seeds)
                    for (Algorithm algo : algos)
                        tasks.push_back({algo, n, d, seed});

        // Timing rows run sequentially: concurrent solves would contend for
        // cores and skew the medians.
        std::vector<BenchRow> rows(tasks.size());
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const Task& task = tasks[i];
            BenchRow& row = rows[i];
            row.algorithm = algorithm_name(task.algo);
            row.n = task.n;
            row.d = task.d;
            row.seed = task.seed;
            try {
                const auto [instance, truth] =
                    gen_fragmented_hypercube(task.n, task.d, spec.k_star, task.seed);
                SolverConfig config = spec.config_for(task.algo);
                config.seed = task.seed;
                const SolveResult result = solve(task.algo, instance, config);
                row.prw = result.prw_value;
                row.iterations = result.iterations;
                row.converged = result.converged;
                row.wall_ms = result.timings.total_ms;
            } catch (const std::exception& err) {
                row.error = sanitize(err.what());
            }
        }

        const nlohmann::json echo = spec_echo(spec);
        write_text(join_path(spec.out_dir, "config.json"), echo.dump(2));
        CsvWriter out(join_path(spec.out_dir, "rows.csv"), "prw.bench_time.v1", echo,
                      "algorithm,n,d,seed,prw_value,iterations,converged,wall_ms,error");
        std::map<std::string, std::vector<double>> cells;
        int failures = 0;
        for (const BenchRow& row : rows) {
            out.row(row.algorithm + "," + std::to_string(row.n) + "," +
                    std::to_string(row.d) + "," + std::to_string(row.seed) + "," +
                    fmt(row.prw) + "," + std::to_string(row.iterations) + "," +
                    (row.converged ? "1" : "0") + "," + fmt(row.wall_ms) + "," +
                    row.error);
            if (!row.error.empty())
                ++failures;
            else
                cells[row.algorithm + "," + std::to_string(row.n) + "," +
                      std::to_string(row.d)]
                    .push_back(row.wall_ms);
        }
        CsvWriter summary(join_path(spec.out_dir, "summary.csv"),
                          "prw.bench_time_summary.v1", echo,
                          "algorithm,n,d,rows,wall_ms_median");
        for (const auto& [key, walls] : cells)
            summary.row(key + "," + std::to_string(walls.size()) + "," +
                        fmt(median(walls)));
        return failures == 0 ? kExitOk : kExitError;
    } catch (const std::exception& err) {
        std::cerr << "bench-time: " << err.what() << std::endl;
        return kExitError;
    }
}

int cmd_distmatrix(const RunSpec& spec) {
    try {
        spec.validate();
        if (spec.input_dir.empty()) throw invalid_input("distmatrix needs --dir");
        ensure_out_dir(spec.out_dir);

        const std::string ext = spec.format == MeasureFormat::csv ? ".csv" : ".jsonl";
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(spec.input_dir))
            if (entry.is_regular_file() && entry.path().extension() == ext)
                files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        if (files.size() < 2)
            throw invalid_input("distmatrix needs at least two " + ext + " files in " +
                                spec.input_dir);

        std::vector<DiscreteMeasure> measures;
        measures.reserve(files.size());
        for (const auto& path : files) measures.push_back(load_measure(path, spec.format));

        const std::size_t count = files.size();
        struct Pair {
            std::size_t i, j;
        };
        std::vector<Pair> pairs;
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t j = i + 1; j < count; ++j) pairs.push_back({i, j});

        std::vector<double> values(pairs.size(), std::nan(""));
        std::vector<double> times(pairs.size(), std::nan(""));
        std::vector<std::string> errors(pairs.size());
        std::mutex log_mutex;
        parallel_for(spec.threads, static_cast<int>(pairs.size()), [&](int t) {
            const auto [i, j] = pairs[static_cast<std::size_t>(t)];
            try {
                const ProblemInstance instance(measures[i], measures[j]);
                const SolveResult result = solve(
                    spec.algorithm, instance, spec.config_for(spec.algorithm));
                values[static_cast<std::size_t>(t)] = result.prw_value;
                times[static_cast<std::size_t>(t)] = result.timings.total_ms;
            } catch (const std::exception& err) {
                errors[static_cast<std::size_t>(t)] = err.what();
                std::lock_guard<std::mutex> lock(log_mutex);
                std::cerr << "distmatrix: pair (" << files[i] << ", " << files[j]
                          << ") failed: " << err.what() << std::endl;
            }
        });

        Matrix dist = Matrix::Zero(count, count);
        Matrix wall = Matrix::Zero(count, count);
        for (std::size_t t = 0; t < pairs.size(); ++t) {
            const auto [i, j] = pairs[t];
            dist(i, j) = dist(j, i) = values[t];
            wall(i, j) = wall(j, i) = times[t];
        }

        const nlohmann::json echo = spec_echo(spec);
        write_text(join_path(spec.out_dir, "config.json"), echo.dump(2));
        auto write_matrix = [&](const std::string& name, const std::string& schema,
                                const Matrix& m) {
            std::string header = "file";
            for (const auto& f : files) header += "," + fs::path(f).filename().string();
            CsvWriter out(join_path(spec.out_dir, name), schema, echo, header);
            for (std::size_t i = 0; i < count; ++i) {
                std::string line = fs::path(files[i]).filename().string();
                for (std::size_t j = 0; j < count; ++j) line += "," + fmt(m(i, j));
                out.row(line);
            }
        };
        write_matrix("distance_matrix.csv", "prw.distmatrix.v1", dist);
        write_matrix("timing_matrix.csv", "prw.distmatrix_timing.v1", wall);

        const bool any_failed =
            std::any_of(errors.begin(), errors.end(),
                        [](const std::string& e) { return !e.empty(); });
        return any_failed ? kExitError : kExitOk;
    } catch (const std::exception& err) {
        std::cerr << "distmatrix: " << err.what() << std::endl;
        return kExitError;
    }
}

int run(const RunSpec& spec) {
    switch (spec.command) {
        case Command::compute: return cmd_compute(spec);
        case Command::bench_hypercube: return cmd_bench_hypercube(spec);
        case Command::bench_gaussian: return cmd_bench_gaussian(spec);
        case Command::bench_time: return cmd_bench_time(spec);
        case Command::distmatrix: return cmd_distmatrix(spec);
    }
    return kExitError;
}

Index CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<Index>(i);
    throw invalid_input("column not found: " + name);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open " + path);
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {  // keeps trailing empty fields, unlike getline splitting
            const std::size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (table.header.empty())
            table.header = std::move(fields);
        else
            table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) throw invalid_input(path + ": empty CSV");
    return table;
}

}  // namespace prw::cli
