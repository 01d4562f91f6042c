#ifndef OCO_HARNESS_HPP
#define OCO_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oco/adversary.hpp"
#include "oco/md.hpp"

namespace oco::harness {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct ResultRow {
    std::string experiment_id;
    int n = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::string metric_name;
    double observed = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // bound - observed
    double runtime_ms = 0.0;
};

// Every closed-form bound evaluation is recorded with its inputs so margins
// stay auditable.
struct BoundRecord {
    std::string id;
    std::map<std::string, double> inputs;
    double value = 0.0;
};

struct ExperimentOutput {
    std::vector<ResultRow> rows;
    std::vector<BoundRecord> bounds;
    std::map<std::string, std::string> config_echo;
};

struct RegretExperimentConfig {
    std::string experiment_id = "regret";
    std::string geometry = "euclidean_ball";  // euclidean_ball | entropic_simplex
    std::string policy = "lipschitz";         // lipschitz | smooth | strongly_convex
    std::string adversary = "linear_tree";    // linear_tree | sign_vectors | zero |
                                              // smoothed_abs_realizable |
                                              // smoothed_abs_quarter | strongly_convex_linear
    int d = 8;                               // entropic / strongly-convex dimension
    std::vector<int> n_grid = {64, 256};
    int trials = 1;
    std::uint64_t master_seed = 1;
    double sigma = 1.0;  // strongly convex losses
    int threads = 1;
};

// Build the adversary stream, run the learner, and compare the regret with
// the applicable closed-form guarantee per n and trial. Incompatible
// geometry/policy/adversary combinations are rejected with a diagnostic.
ExperimentOutput run_regret_experiment(const RegretExperimentConfig& cfg);

struct RateFit {
    double exponent = 0.0;
    double intercept = 0.0;  // in log space
    double r2 = 0.0;
};

// Least-squares slope of log(regret) vs log(n), trials averaged first.
RateFit fit_rate(const std::vector<ResultRow>& rows);
RateFit fit_rate(const std::vector<std::pair<double, double>>& n_vs_value);

struct CounterexampleSummary {
    int d = 0;
    int n = 0;
    int trials = 0;
    double unobserved_frequency = 0.0;
    int conditioned_trials = 0;            // trials with an unobserved coordinate
    double erm_population_risk = 0.0;      // mean, conditioned
    double erm_population_risk_stderr = 0.0;
    double erm_norm_mean = 0.0;            // mean ||h|| of the empirical minimizer
    double sgd_suboptimality = 0.0;        // mean over all trials
    double sgd_suboptimality_stderr = 0.0;
    double sgd_bound = 0.0;                // sqrt(2 (1 + eps) / n)
    double population_optimum = 0.0;       // closed form: bias value at the origin
    double runtime_ms = 0.0;
};

// The empirical-minimization failure experiment: frequency of unobserved
// coordinates, population risk of the empirical minimizer conditioned on one
// existing, and the averaged-SGD suboptimality, all on the biased
// center-finding distribution. Population risks are Monte-Carlo with the
// stated draw count plus the deterministic bias term.
CounterexampleSummary counterexample_experiment(int d, int n, int trials,
                                                std::uint64_t master_seed,
                                                int mc_draws = 100000, int threads = 1);

// Monte-Carlo estimate (mean, stderr) of E || mask * h ||_2 under i.i.d.
// fair 0/1 coordinate masks; the population risk kernel of the experiment
// above.
std::pair<double, double> masked_norm_population_risk(const Point& h, int draws,
                                                      std::uint64_t seed);

struct OracleCurveConfig {
    std::string experiment_id = "oracle";
    std::string algorithm = "md";  // md | pgd
    std::vector<int> m_grid = {4, 16, 64};
    std::uint64_t master_seed = 1;
};

// Suboptimality vs query count: against the resisting oracle on orthonormal
// pieces (measured at the last query point, with the construction's value as
// the lower bound) and against a benign fixed linear instance (averaged
// point, with the offline mirror-descent guarantee).
ExperimentOutput oracle_complexity_curve(const OracleCurveConfig& cfg);

struct StabilityConfig {
    std::string rule = "rerm";     // constant | erm | rerm | sgd | averaged_md
    std::string sampler = "linear_unit";  // linear_unit | hidden_biased
    int d = 8;
    int n = 32;
    int trials = 50;
    double lambda = 1.0;  // rerm
    std::uint64_t master_seed = 1;
};

struct StabilityEstimate {
    double estimate = 0.0;  // |mean over trials of the average replace-one gap|
    double stderr_ = 0.0;
    bool low_trial_warning = false;
};

// Monte-Carlo estimate of the average replace-one stability
// |(1/n) sum_i E[ loss(A(S^(i)); z'_i) - loss(A(S); z'_i) ]|.
StabilityEstimate estimate_ro_stability(const StabilityConfig& cfg);

// Block-sign lower-bound game against the expected-loss EWA learner.
struct BlockSignConfig {
    std::string experiment_id = "block_sign";
    int x_points = 4;   // full binary class on this many points
    double alpha = 2.0;
    int n = 64;
    int seeds = 500;
    std::uint64_t master_seed = 1;
    int threads = 1;
};

struct BlockSignSummary {
    double mean_regret = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    double lower_bound_target = 0.0;  // 0.9 sqrt(depth / (8 n))
    int depth = 0;
};

BlockSignSummary block_sign_experiment(const BlockSignConfig& cfg);

enum class EmitFormat { Csv, Json };

// Writes rows sorted by (experiment id, n, trial), 17 significant digits,
// atomically (temp file + rename). JSON mirrors the CSV rows plus the config
// echo and library version.
void emit(const ExperimentOutput& out, EmitFormat format, const std::string& path);

}  // namespace oco::harness

#endif
