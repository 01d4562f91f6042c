#ifndef OCO_EXPERTS_HPP
#define OCO_EXPERTS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "oco/complexity.hpp"

namespace oco::experts {

// Discretization grid of [-1,1]: {-1+alpha/2, -1+3alpha/2, ...}.
std::vector<double> grid_levels(double alpha);

// Nearest grid level; ties break toward the smaller level.
double discretize(double a, double alpha);

struct EwaResult {
    std::vector<double> expected_loss;          // per round, sum_i w_i f_i
    std::vector<std::vector<double>> weights;   // weights[t][i], pre-update
    double cumulative_expected_loss = 0.0;
    std::vector<double> cumulative_expert_loss;  // per expert
};

// Exponentially weighted averaging with prior weights and multiplicative
// update w_i <- w_i exp(-eta f_i); losses must lie in [0,1]. Log-domain
// weights, so long horizons cannot over/underflow. eta defaults to
// 1/sqrt(n).
EwaResult ewa_run(const std::vector<double>& priors,
                  const std::vector<std::vector<double>>& losses,
                  std::optional<double> eta = std::nullopt);

// Cumulative guarantee for expert i under eta = 1/sqrt(n):
// best-expert loss + sqrt(n)/8 + sqrt(n) ln(1/p_i).
double ewa_bound(double expert_cum_loss, int n, double prior);

struct FatSoaResult {
    std::vector<double> predictions;
    int large_error_count = 0;            // rounds with |pred - y| > alpha
    std::vector<int> fat_before_update;   // version-space dimension at updates
    std::vector<int> fat_after_update;
};

// Realizable online learner over a finite class: predict the mean of the
// grid levels whose version-space restriction attains the maximal sequential
// fat dimension; shrink the version space only on errors beyond alpha.
// Throws ProtocolError if the version space empties (stream not realizable).
FatSoaResult fat_soa_run(const cplx::FiniteClass& F, double alpha,
                         const std::vector<std::pair<int, double>>& stream,
                         const cplx::Caps& caps = {});

// One generated expert: replays the realizable learner but forces chosen
// labels at chosen rounds. label_choice[k] indexes the grid minus the
// learner's own discretized prediction at that round, so the enumeration
// size matches sum_L C(n,L) (|grid|-1)^L exactly.
struct GeneratedExpert {
    std::vector<int> force_rounds;   // strictly increasing, 0-based
    std::vector<int> label_choice;   // each in [0, |grid|-2]
};

struct ExpertSet {
    std::vector<GeneratedExpert> experts;
    std::vector<double> priors;  // positive, sum <= 1
    double alpha = 0.0;
    int horizon = 0;
};

std::size_t expert_count(int n, int fat, int grid_size);

// All experts for horizon n at scale alpha (uniform priors 1/|E|).
// Throws CapacityError when the exact count exceeds the cap.
ExpertSet generate_experts(const cplx::FiniteClass& F, double alpha, int n,
                           std::size_t cap = 100000, const cplx::Caps& caps = {});

// Expert predictions for a whole x-stream (each expert sees only the inputs).
std::vector<std::vector<double>> simulate_experts(const cplx::FiniteClass& F,
                                                  const ExpertSet& E,
                                                  const std::vector<int>& xs,
                                                  const cplx::Caps& caps = {});

struct AgnosticResult {
    double expected_regret = 0.0;        // vs the best class member in hindsight
    double best_grid_bound = 0.0;        // regret bound minimized over grid scales
    double best_alpha = 0.0;
    std::vector<int> skipped_scales;     // grid indices whose expert set was over cap
    EwaResult ewa;
};

// Agnostic supervised learning: experts generated at scales alpha_i = 2^{-i},
// i = 1..max_grid_index, expert priors (6/pi^2 i^{-2}) / |E_i|, one EWA run
// over the union (absolute losses scaled into [0,1] internally).
AgnosticResult agnostic_supervised_run(const cplx::FiniteClass& F,
                                       const std::vector<std::pair<int, double>>& stream,
                                       std::size_t cap = 100000, int max_grid_index = 10,
                                       const cplx::Caps& caps = {});

// The regret target as a function of scale: alpha + sqrt(fat_alpha ln(2n/alpha)/n)
//                                           + (3 + 2 ln ln(1/alpha)) / sqrt(n).
double agnostic_bound_at(double alpha, int fat_alpha, int n);

}  // namespace oco::experts

#endif
