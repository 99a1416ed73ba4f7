#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_commands.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
namespace cli = lcid::cli;

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    return json::parse(in);
}

// Pulls the value for `key` out of the config json, if present.
template <typename T>
void from_config(const json& cfg, const char* key, T& target) {
    if (cfg.contains(key)) target = cfg[key].get<T>();
}

void check_config_keys(const json& cfg, const std::set<std::string>& known) {
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "'");
}

// The config file provides defaults; explicitly passed flags override them,
// so the config is applied before CLI11 writes any bound variable.
std::string config_path_from_args(const std::vector<std::string>& args) {
    for (size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") return args[i + 1];
    return {};
}

void add_design_config_flags(CLI::App* app, lcid::DesignConfig& config, double& psd_floor_eps) {
    app->add_option("--lambda", config.lambda, "coherence penalty");
    app->add_option("--lambda-prime", config.lambda_prime, "Gram-fit penalty");
    app->add_option("--sigma0", config.sigma0, "initial coupling weight");
    app->add_option("--decay", config.decay, "coupling decay factor in (0,1)");
    app->add_option("--psd-floor", psd_floor_eps, "eigenvalue floor for N + I");
    app->add_option("--max-outer-iters", config.max_outer_iters, "outer iteration budget");
    app->add_option("--inner-iters", config.inner_iters, "inner rounds per step");
    app->add_option("--stop-tol", config.stop_tol, "stop when iterates change less than this");
}

void apply_design_config_json(const json& cfg, lcid::DesignConfig& config, double& psd_floor_eps) {
    from_config(cfg, "lambda", config.lambda);
    from_config(cfg, "lambda_prime", config.lambda_prime);
    from_config(cfg, "sigma0", config.sigma0);
    from_config(cfg, "decay", config.decay);
    from_config(cfg, "psd_floor", psd_floor_eps);
    from_config(cfg, "max_outer_iters", config.max_outer_iters);
    from_config(cfg, "inner_iters", config.inner_iters);
    from_config(cfg, "stop_tol", config.stop_tol);
}

const std::set<std::string> kDesignConfigKeys = {
    "lambda", "lambda_prime", "sigma0", "decay", "psd_floor",
    "max_outer_iters", "inner_iters", "stop_tol"};

void add_cv_flags(CLI::App* app, lcid::CvProtocol& cv) {
    app->add_option("--train-fraction", cv.train_fraction, "chronological train split fraction");
    app->add_option("--grid-size", cv.grid_size, "hyperparameter grid size");
    app->add_option("--grid-min", cv.grid_min, "smallest grid value");
    app->add_option("--grid-max", cv.grid_max, "largest grid value");
}

void apply_cv_config_json(const json& cfg, lcid::CvProtocol& cv) {
    from_config(cfg, "train_fraction", cv.train_fraction);
    from_config(cfg, "grid_size", cv.grid_size);
    from_config(cfg, "grid_min", cv.grid_min);
    from_config(cfg, "grid_max", cv.grid_max);
}

const std::set<std::string> kCvConfigKeys = {"train_fraction", "grid_size", "grid_min",
                                             "grid_max"};

std::set<std::string> merged(std::initializer_list<std::set<std::string>> sets) {
    std::set<std::string> out;
    for (const auto& s : sets) out.insert(s.begin(), s.end());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lcid - low-coherence input design for sparse system identification"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print usage");
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "print extra progress information");

    std::vector<std::string> raw_args(argv + 1, argv + argc);
    std::string config_path = config_path_from_args(raw_args);
    std::string config_dummy;

    cli::DesignOptions design;
    double design_floor = design.config.psd_floor.epsilon;
    cli::CoherenceOptions coherence;
    cli::EstimateOptions estimate;
    cli::BenchOptionsCli bench;
    double bench_floor = bench.options.design.psd_floor.epsilon;
    cli::SpectrumOptions spectrum;
    std::string bench_methods;
    std::uint64_t bench_seed = 0;
    bool bench_seed_set = false;
    int bench_mc_runs = 0;
    bool bench_mc_runs_set = false;

    CLI::App* design_cmd =
        app.add_subcommand("design", "jointly design a Toeplitz regressor and transformation");
    design_cmd->set_help_flag("--help", "print usage");
    design_cmd->add_option("--gram-target", design.gram_target_csv, "Gram target matrix CSV");
    design_cmd->add_option("--spectrum", design.spectrum_json, "input spectrum JSON");
    design_cmd->add_option("--n", design.n, "number of samples N");
    design_cmd->add_option("--n-theta", design.n_theta, "number of parameters (spectrum input)");
    design_cmd->add_option("--phi-init", design.phi_init_csv, "initial regressor CSV");
    design_cmd->add_option("--h-init", design.h_init_csv, "initial transformation CSV");
    design_cmd->add_option("--out-dir", design.out_dir, "output directory");
    design_cmd->add_option("--config", config_dummy, "JSON config file with flag defaults");
    add_design_config_flags(design_cmd, design.config, design_floor);

    CLI::App* coherence_cmd =
        app.add_subcommand("coherence", "mutual coherence and recovery condition of a matrix");
    coherence_cmd->set_help_flag("--help", "print usage");
    coherence_cmd->add_option("--matrix", coherence.matrix_csv, "matrix CSV")->required();
    coherence_cmd->add_option("--s", coherence.s, "sparsity level for the 1/(3s) bound");
    coherence_cmd->add_option("--nu", coherence.nu, "probability bound parameter nu");

    CLI::App* estimate_cmd = app.add_subcommand("estimate", "sparse / order-selected estimation");
    estimate_cmd->set_help_flag("--help", "print usage");
    estimate_cmd->add_option("--phi", estimate.phi_csv, "regressor CSV");
    estimate_cmd->add_option("--y", estimate.y_csv, "observations CSV");
    estimate_cmd->add_option("--h", estimate.h_csv, "transformation CSV (lcid-* methods)");
    estimate_cmd
        ->add_option("--method", estimate.method,
                     "omp | ladmm | ls-aicc | ls-bic | lcid-omp | lcid-ladmm | lcid-bic | lcid-aicc");
    estimate_cmd->add_option("--s", estimate.s, "sparsity level (omp methods)");
    estimate_cmd->add_option("--k-max", estimate.k_max, "largest model order");
    estimate_cmd->add_option("--lambda", estimate.lambda,
                             "lasso penalty; omit to tune by cross validation");
    estimate_cmd->add_option("--out-dir", estimate.out_dir, "output directory");
    estimate_cmd->add_option("--config", config_dummy, "JSON config file with flag defaults");
    add_cv_flags(estimate_cmd, estimate.cv);

    CLI::App* bench_cmd = app.add_subcommand("bench", "Monte-Carlo estimator comparison");
    bench_cmd->set_help_flag("--help", "print usage");
    bench_cmd->add_option("--scenario", bench.scenario_json, "scenario JSON file");
    bench_cmd->add_option("--out-dir", bench.out_dir, "output directory");
    bench_cmd->add_option("--methods", bench_methods, "comma-separated method names");
    bench_cmd->add_option("--jobs", bench.options.jobs, "parallel Monte-Carlo workers");
    bench_cmd->add_option("--mc-runs", bench_mc_runs, "runs per SNR")
        ->each([&](const std::string&) { bench_mc_runs_set = true; });
    bench_cmd->add_option("--seed", bench_seed, "master seed override")
        ->each([&](const std::string&) { bench_seed_set = true; });
    bench_cmd->add_flag("--plots", bench.plots, "emit SVG charts");
    bench_cmd->add_flag("--per-run-cv", bench.options.per_run_cv,
                        "re-tune hyperparameters inside every run");
    bench_cmd->add_flag("--per-run-design", bench.options.per_run_design,
                        "re-run the input design inside every run");
    bench_cmd->add_option("--config", config_dummy, "JSON config file with flag defaults");
    add_design_config_flags(bench_cmd, bench.options.design, bench_floor);
    add_cv_flags(bench_cmd, bench.options.cv);

    CLI::App* spectrum_cmd =
        app.add_subcommand("spectrum", "emit a bandpass autocorrelation as spectrum JSON");
    spectrum_cmd->set_help_flag("--help", "print usage");
    spectrum_cmd->add_option("--w1", spectrum.w1, "band start (rad/sample)");
    spectrum_cmd->add_option("--w2", spectrum.w2, "band end (rad/sample)");
    spectrum_cmd->add_option("--power", spectrum.power, "in-band power");
    spectrum_cmd->add_option("--order", spectrum.order, "number of coefficients J");
    spectrum_cmd->add_option("--out", spectrum.out, "output path (default stdout)");

    try {
        if (!config_path.empty()) {
            const json cfg = load_config_file(config_path);
            // Which keys are accepted depends on the subcommand being run.
            for (const std::string& arg : raw_args) {
                if (arg == "design") {
                    check_config_keys(cfg, merged({kDesignConfigKeys,
                                                   {"gram_target", "spectrum", "n", "n_theta",
                                                    "phi_init", "h_init", "out_dir"}}));
                    apply_design_config_json(cfg, design.config, design_floor);
                    from_config(cfg, "gram_target", design.gram_target_csv);
                    from_config(cfg, "spectrum", design.spectrum_json);
                    from_config(cfg, "n", design.n);
                    from_config(cfg, "n_theta", design.n_theta);
                    from_config(cfg, "phi_init", design.phi_init_csv);
                    from_config(cfg, "h_init", design.h_init_csv);
                    from_config(cfg, "out_dir", design.out_dir);
                    break;
                }
                if (arg == "estimate") {
                    check_config_keys(cfg, merged({kCvConfigKeys,
                                                   {"phi", "y", "h", "method", "s", "k_max",
                                                    "lambda", "out_dir"}}));
                    apply_cv_config_json(cfg, estimate.cv);
                    from_config(cfg, "phi", estimate.phi_csv);
                    from_config(cfg, "y", estimate.y_csv);
                    from_config(cfg, "h", estimate.h_csv);
                    from_config(cfg, "method", estimate.method);
                    from_config(cfg, "s", estimate.s);
                    from_config(cfg, "k_max", estimate.k_max);
                    from_config(cfg, "lambda", estimate.lambda);
                    from_config(cfg, "out_dir", estimate.out_dir);
                    break;
                }
                if (arg == "bench") {
                    check_config_keys(cfg, merged({kDesignConfigKeys, kCvConfigKeys,
                                                   {"scenario", "out_dir", "methods", "jobs",
                                                    "mc_runs", "seed", "plots", "per_run_cv",
                                                    "per_run_design"}}));
                    apply_design_config_json(cfg, bench.options.design, bench_floor);
                    apply_cv_config_json(cfg, bench.options.cv);
                    from_config(cfg, "scenario", bench.scenario_json);
                    from_config(cfg, "out_dir", bench.out_dir);
                    from_config(cfg, "methods", bench_methods);
                    from_config(cfg, "jobs", bench.options.jobs);
                    if (cfg.contains("mc_runs")) {
                        bench_mc_runs = cfg["mc_runs"].get<int>();
                        bench_mc_runs_set = true;
                    }
                    if (cfg.contains("seed")) {
                        bench_seed = cfg["seed"].get<std::uint64_t>();
                        bench_seed_set = true;
                    }
                    from_config(cfg, "plots", bench.plots);
                    from_config(cfg, "per_run_cv", bench.options.per_run_cv);
                    from_config(cfg, "per_run_design", bench.options.per_run_design);
                    break;
                }
            }
        }
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : cli::kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitInputError;
    }

    if (design_cmd->parsed()) {
        design.config.psd_floor = lcid::PsdFloor(design_floor);
        if (verbose)
            std::cout << "design config: lambda = " << design.config.lambda
                      << ", lambda_prime = " << design.config.lambda_prime << "\n";
        return cli::cmd_design(design);
    }
    if (coherence_cmd->parsed()) return cli::cmd_coherence(coherence);
    if (estimate_cmd->parsed()) return cli::cmd_estimate(estimate);
    if (bench_cmd->parsed()) {
        try {
            bench.options.design.psd_floor = lcid::PsdFloor(bench_floor);
            if (!bench.scenario_json.empty()) {
                bench.scenario = lcid::load_scenario(bench.scenario_json);
                bench.scenario_json.clear();
            }
            if (bench_mc_runs_set) bench.scenario.mc_runs = bench_mc_runs;
            if (bench_seed_set) bench.scenario.seed = bench_seed;
            if (!bench_methods.empty()) {
                bench.options.methods.clear();
                std::istringstream list(bench_methods);
                std::string name;
                while (std::getline(list, name, ','))
                    bench.options.methods.push_back(lcid::method_from_name(name));
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return cli::kExitInputError;
        }
        if (verbose) std::cout << "bench: jobs = " << bench.options.jobs << "\n";
        return cli::cmd_bench(bench);
    }
    if (spectrum_cmd->parsed()) return cli::cmd_spectrum(spectrum);
    return cli::kExitInputError;
}
