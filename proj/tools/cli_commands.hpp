#pragma once

#include <string>
#include <vector>

#include "lcid/bench.hpp"
#include "lcid/design.hpp"
#include "lcid/estimators.hpp"

namespace lcid::cli {

// Exit codes shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitDegenerateDesign = 2;
constexpr int kExitAllRunsFailed = 3;

struct DesignOptions {
    std::string gram_target_csv;  // exactly one of gram_target_csv / spectrum_json
    std::string spectrum_json;
    int n = 0;
    int n_theta = 0;  // required with a spectrum input; inferred from a gram target
    std::string phi_init_csv;
    std::string h_init_csv;
    DesignConfig config;
    std::string out_dir = ".";
};

/// Writes phi.csv, h.csv, trace.csv and design.json into out_dir.
int cmd_design(const DesignOptions& options);

struct CoherenceOptions {
    std::string matrix_csv;
    int s = 1;
    double nu = 1.0;
};

/// Prints mu, the 1/(3s) bound, the condition verdict, and the recovery
/// probability bound for the given nu.
int cmd_coherence(const CoherenceOptions& options);

struct EstimateOptions {
    std::string phi_csv;
    std::string y_csv;
    std::string h_csv;  // required by the lcid-* methods
    std::string method = "omp";
    int s = 0;
    int k_max = 0;       // 0 means n_theta
    double lambda = -1;  // < 0 means tune by cross validation
    CvProtocol cv;
    std::string out_dir = ".";
};

/// Writes theta.csv and support.json into out_dir.
int cmd_estimate(const EstimateOptions& options);

struct BenchOptionsCli {
    std::string scenario_json;  // empty means desk-scale defaults
    Scenario scenario;
    BenchOptions options;
    bool plots = false;
    std::string out_dir = ".";
};

/// Writes records.csv, summary.csv and (optionally) SVG charts into out_dir.
int cmd_bench(const BenchOptionsCli& options);

struct SpectrumOptions {
    double w1 = 0.1;
    double w2 = 0.3;
    double power = 1.0;
    int order = 50;
    std::string out;  // empty prints to stdout
};

/// Emits the bandpass autocorrelation as a spectrum JSON object.
int cmd_spectrum(const SpectrumOptions& options);

}  // namespace lcid::cli
