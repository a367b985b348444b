#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jdmc/config.hpp"
#include "jdmc/inference.hpp"

namespace jdmc {

/// Sup distance between the empirical CDF of `samples` and Phi.
double ks_statistic(std::span<const double> samples);

/// Asymptotic critical value sqrt(-log(level/2)/2) / sqrt(R).
double ks_critical_value(std::size_t samples, double level);

/// The small-noise Black-Scholes study: observe, estimate, price, normalize.
struct ExperimentConfig {
    ModelSpec model;             // params are theta0; steps is the observation count n
    FunctionalSpec functional;
    std::size_t paths = 10000;          // B per pricing
    std::size_t replications = 300;     // R
    std::size_t pricing_steps = 500;
    std::size_t c_paths = 100000;       // paths for the theta0-based C
    std::size_t c_steps = 2000;
    double alpha = 0.05;
    std::uint64_t root_seed = 0;
    unsigned threads = 0;

    static ExperimentConfig from_json(const Json& j);
    void validate() const;
};

struct ReplicationRow {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    double mu_hat = 0.0;
    double sigma_hat = 0.0;
    double H_hat = 0.0;
    double H_se = 0.0;
    double z = 0.0;          // normalized with theta0-based C and I
    double asy_var_hat = 0.0;  // theta_hat-based
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool covered = false;
    std::string error;

    friend bool operator==(const ReplicationRow&, const ReplicationRow&) = default;
};

struct ExperimentSummary {
    std::size_t replications = 0;
    std::size_t failures = 0;
    double epsilon = 0.0;
    double H_true = 0.0;
    std::vector<double> C_true;
    std::vector<double> C_true_se;
    double asy_var_true = 0.0;
    double rate = 0.0;
    double ks = 0.0;
    double ks_critical_1pct = 0.0;
    double z_mean = 0.0;
    double z_sd = 0.0;
    double coverage = 0.0;
    std::size_t z_outside_histogram = 0;
};

struct ExperimentOutput {
    std::vector<ReplicationRow> rows;
    ExperimentSummary summary;
};

class ExperimentAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact H(theta) where one is known: bs with the identity or a call on X_T
/// (the unsmoothed price), ou with the discounted integral. Empty otherwise.
std::optional<double> closed_form_H(const ModelSpec& model, const FunctionalSpec& functional, ParamSpan theta);

ExperimentOutput run_bs_experiment(const ExperimentConfig& config);

/// replications.csv, summary.json, qq.csv, histogram.csv under `dir`.
void write_experiment_outputs(const ExperimentOutput& output, const ExperimentConfig& config,
                              const std::string& dir);
std::string replications_csv(std::span<const ReplicationRow> rows);
std::vector<ReplicationRow> parse_replications_csv(const std::string& text);
nlohmann::ordered_json summary_json(const ExperimentSummary& summary, const ExperimentConfig& config);
std::string qq_csv(std::span<const ReplicationRow> rows);
/// Bins of width 0.25 over [-4, 4].
std::string histogram_csv(std::span<const ReplicationRow> rows);

/// MC against closed form for the discounted OU functional.
struct OuOracleConfig {
    ModelSpec model;  // "ou"
    double discount = 0.05;
    std::size_t paths = 100000;
    std::uint64_t root_seed = 0;
    unsigned threads = 0;

    static OuOracleConfig from_json(const Json& j);
};

struct OuOracleReport {
    double H_mc = 0.0;
    double H_se = 0.0;
    double H_closed = 0.0;
    double H_z = 0.0;
    std::vector<double> C_mc;
    std::vector<double> C_se;
    std::vector<double> C_numeric;  // central differences of the closed form
    std::vector<double> C_z;
    double H_relative_error = 0.0;
};

OuOracleReport run_ou_oracle(const OuOracleConfig& config);
nlohmann::ordered_json to_json(const OuOracleReport& report);

/// `price` subcommand: plug-in report at the config's params (read as theta_hat).
/// Optional keys: "alpha", "theta0" (fills z_hat for bs), "rates" and "covariance"
/// (override the small-noise estimator's).
nlohmann::ordered_json price_from_config(const Json& config, std::size_t paths, std::uint64_t seed,
                                         unsigned threads = 0);

}  // namespace jdmc
