#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "harness.hpp"

using namespace prw;
using namespace prw::cli;

namespace {

// Raw flag storage; only flags the user actually passed override the config
// file, which in turn overrides the built-in defaults.
struct Flags {
    std::string config_file;
    std::string algo = "rbcd";
    std::vector<std::string> algos;
    double eta = 0.0, tau = 0.0, eps1 = 0.0, eps2 = 0.0;
    double alpha = 0.0, beta = 0.0, l1 = 0.0, l2 = 0.0, inner_tol = 0.0;
    int max_iter = 0;
    Index k = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    std::string mode = "practical";
    std::string retraction = "qr";
    bool deterministic = false;
};

void add_solver_flags(CLI::App* app, Flags& flags) {
    app->add_option("--config", flags.config_file,
                    "JSON file mirroring the solver configuration");
    app->add_option("--algo", flags.algo, "rbcd | rabcd | rgas | ragas");
    app->add_option("--eta", flags.eta, "entropic regularization (practical mode)");
    app->add_option("--tau", flags.tau, "step size (practical mode)");
    app->add_option("--eps1", flags.eps1, "gradient tolerance");
    app->add_option("--eps2", flags.eps2, "marginal tolerance (eps1 >= eps2)");
    app->add_option("--mode", flags.mode, "practical | theory")
        ->check(CLI::IsMember({"practical", "theory"}));
    app->add_option("--alpha", flags.alpha, "adaptive weight floor");
    app->add_option("--beta", flags.beta, "adaptive averaging factor");
    app->add_option("--retraction", flags.retraction, "qr | polar")
        ->check(CLI::IsMember({"qr", "polar"}));
    app->add_option("-k,--k", flags.k, "projection dimension");
    app->add_option("--seed", flags.seed, "seed (initialization and generators)");
    app->add_option("--seeds", flags.seeds, "explicit seed list for repeated runs")->delimiter(',');
    app->add_option("--max-iter", flags.max_iter, "outer iteration cap");
    app->add_option("--l1", flags.l1, "retraction constant L1 (theory mode)");
    app->add_option("--l2", flags.l2, "retraction constant L2 (theory mode)");
    app->add_option("--inner-tol", flags.inner_tol,
                    "inner Sinkhorn l1 tolerance (rgas/ragas)");
    app->add_flag("--deterministic", flags.deterministic,
                  "fixed reduction order (always on; accepted for compatibility)");
}

SolverConfig build_config(const CLI::App* app, const Flags& flags) {
    SolverConfig config;
    if (!flags.config_file.empty()) {
        std::ifstream in(flags.config_file);
        if (!in) throw invalid_input("cannot open config file " + flags.config_file);
        nlohmann::json j;
        in >> j;
        config = solver_config_from_json(j);
    }
    const auto passed = [&](const std::string& name) { return app->count(name) > 0; };
    if (passed("--eta")) config.eta = flags.eta;
    if (passed("--tau")) config.tau = flags.tau;
    if (passed("--eps1")) config.eps1 = flags.eps1;
    if (passed("--eps2")) config.eps2 = flags.eps2;
    if (passed("--mode"))
        config.mode = flags.mode == "theory" ? ParamMode::theory : ParamMode::practical;
    if (passed("--alpha")) config.alpha = flags.alpha;
    if (passed("--beta")) config.beta = flags.beta;
    if (passed("--retraction"))
        config.retraction =
            flags.retraction == "polar" ? Retraction::polar : Retraction::qr;
    if (passed("--k")) config.k = flags.k;
    if (passed("--seed")) config.seed = flags.seed;
    if (passed("--max-iter")) config.max_iter = flags.max_iter;
    if (passed("--l1")) config.l1 = flags.l1;
    if (passed("--l2")) config.l2 = flags.l2;
    if (passed("--inner-tol")) config.inner_tol = flags.inner_tol;
    if (passed("--deterministic")) config.deterministic = flags.deterministic;
    return config;
}

MeasureFormat format_from_name(const std::string& name) {
    if (name == "csv") return MeasureFormat::csv;
    if (name == "jsonl") return MeasureFormat::jsonl;
    throw invalid_input("unknown format: " + name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projection robust Wasserstein distance solvers"};
    app.require_subcommand(1);

    struct SubState {
        CLI::App* sub = nullptr;
        Flags flags;
        RunSpec spec;
        std::string format = "csv";
        std::vector<std::string> algos;
    };
    std::vector<std::unique_ptr<SubState>> states;

    auto make_sub = [&](const std::string& name, const std::string& desc,
                        Command command) -> SubState& {
        states.push_back(std::make_unique<SubState>());
        SubState& state = *states.back();
        state.sub = app.add_subcommand(name, desc);
        state.spec.command = command;
        add_solver_flags(state.sub, state.flags);
        state.sub->add_option("--out", state.spec.out_dir, "output directory");
        state.sub->add_option("--format", state.format, "csv | jsonl")
            ->check(CLI::IsMember({"csv", "jsonl"}));
        state.sub->add_option("--threads", state.spec.threads,
                              "worker pool size (0 = hardware)");
        state.sub->add_option("--repeats", state.spec.repeats, "runs per grid cell");
        return state;
    };

    {
        SubState& state = make_sub("compute", "PRW distance between two measure files",
                                   Command::compute);
        state.sub->add_option("mu", state.spec.input_mu, "first measure file")
            ->required();
        state.sub->add_option("nu", state.spec.input_nu, "second measure file")
            ->required();
        state.sub->add_option("--oracle-tol", state.spec.oracle_tol,
                              "stationarity oracle precision");
        state.sub->add_flag("--trace", state.spec.write_trace,
                            "write the per-iteration trace next to the result");
    }
    {
        SubState& state = make_sub(
            "bench-hypercube", "fragmented-hypercube value/subspace benchmark",
            Command::bench_hypercube);
        state.sub->add_option("-n", state.spec.n_list, "atom counts")->delimiter(',');
        state.sub->add_option("-d", state.spec.d_list, "ambient dimensions")->delimiter(',');
        state.sub->add_option("--k-list", state.spec.k_list, "projection dimensions")->delimiter(',');
        state.sub->add_option("--k-star", state.spec.k_star, "intrinsic dimension");
        state.sub->add_option("--algos", state.algos, "algorithms to run")->delimiter(',');
    }
    {
        SubState& state =
            make_sub("bench-gaussian", "Wishart-Gaussian recovery/noise benchmark",
                     Command::bench_gaussian);
        state.spec.sigma_list = {0.01, 0.1, 1.0, 2.0, 4.0, 7.0, 10.0};
        state.sub->add_option("-n", state.spec.n_list, "atom counts")->delimiter(',');
        state.sub->add_option("-d", state.spec.d_list, "ambient dimensions")->delimiter(',');
        state.sub->add_option("--k-list", state.spec.k_list, "projection dimensions")->delimiter(',');
        state.sub->add_option("--k-star", state.spec.k_star, "covariance rank");
        state.sub->add_option("--sigma", state.spec.sigma_list, "noise levels")->delimiter(',');
        state.sub->add_option("--algos", state.algos, "algorithms to run")->delimiter(',');
        state.sub->add_option("--ref-eta", state.spec.rel_eta_ref,
                              "relative eta of the reference Wasserstein solve");
    }
    {
        SubState& state = make_sub("bench-time", "wall-clock comparison across solvers",
                                   Command::bench_time);
        state.sub->add_option("-n", state.spec.n_list, "atom counts")->delimiter(',');
        state.sub->add_option("-d", state.spec.d_list, "ambient dimensions")->delimiter(',');
        state.sub->add_option("--k-star", state.spec.k_star, "intrinsic dimension");
        state.sub->add_option("--algos", state.algos, "algorithms to run")->delimiter(',');
        state.sub->add_flag("!--no-gas-tau-scaling", state.spec.scale_gas_tau,
                            "disable tau/eta matching for rgas/ragas");
    }
    {
        SubState& state = make_sub(
            "distmatrix", "pairwise PRW matrix over a directory of measure files",
            Command::distmatrix);
        state.sub->add_option("--dir", state.spec.input_dir, "corpus directory")
            ->required();
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& state_ptr : states) {
        SubState& state = *state_ptr;
        if (!state.sub->parsed()) continue;
        try {
            state.spec.config = build_config(state.sub, state.flags);
            state.spec.algorithm = algorithm_from_name(state.flags.algo);
            state.spec.format = format_from_name(state.format);
            state.spec.seeds = state.flags.seeds;
            for (const auto& name : state.algos)
                state.spec.algorithms.push_back(algorithm_from_name(name));
            return run(state.spec);
        } catch (const std::exception& err) {
            std::cerr << "prw: " << err.what() << std::endl;
            return 1;
        }
    }
    return 1;
}
