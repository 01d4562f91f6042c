#ifndef OCO_MD_HPP
#define OCO_MD_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "oco/geometry.hpp"
#include "oco/losses.hpp"

namespace oco::md {

// --- step-size policies ------------------------------------------------

// eta = (sup_psi / (n B))^{1/p} for streams whose subgradient dual norms
// average below B^{... } (verified bounds assume B = 1).
struct LipschitzRate {
    double sup_psi = 0.5;
    int n = 1;
    double B = 1.0;
    double p = 2.0;  // p = q/(q-1), in (1,2]
};

// Two-branch optimistic step size for non-negative smooth losses; Lbar is an
// upper bound on the comparator's average loss. The large-Lbar branch applies
// when Lbar >= (16 H / p^{2/p}) (sup_psi/n)^{2/q} (inclusive threshold).
struct SmoothRate {
    double sup_psi = 0.5;
    int n = 1;
    double H = 1.0;
    double Lbar = 0.0;
    double p = 2.0;
};

struct Fixed {
    double eta = 0.1;
};

using StepPolicy = std::variant<LipschitzRate, SmoothRate, Fixed>;

double step_size_lipschitz(double sup_psi, int n, double B, double p);
double step_size_smooth(double sup_psi, int n, double H, double Lbar, double p);
double resolve_eta(const StepPolicy& policy);
std::string policy_id(const StepPolicy& policy);

// --- state and traces ----------------------------------------------------

struct MDState {
    Point h;      // current iterate (satisfies the constraint)
    Point h_sum;  // running sum of the points losses were evaluated at
    long t = 0;   // rounds completed
};

MDState init_state(const geom::GeometrySpec& g);

// h' = grad_psi_star(grad_psi(h) - eta * subgrad); h_next = project(h').
MDState md_step(const MDState& state, const geom::GeometrySpec& g, const Point& subgrad,
                double eta);

// Mean of the iterates h_1..h_t (the pre-update points).
Point averaged_output(const MDState& state);

struct RegretRow {
    double loss = 0.0;
    double comparator_loss = 0.0;
    double cum_regret = 0.0;  // averaged regret over the prefix
};

struct RegretTrace {
    std::vector<RegretRow> rows;
    std::string geometry_id;
    std::string policy_id;
    std::string comparator_kind;
    std::uint64_t seed = 0;
    Point comparator;      // the best fixed point used for the regret rows
    Point final_average;   // mean iterate, for online-to-batch use
    double regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
};

// How to find the best fixed comparator for a finished stream.
struct ComparatorSpec {
    enum class Kind {
        Analytic,   // linear losses on a norm ball / simplex, closed form
        Numeric,    // projected-subgradient empirical minimizer
        FixedPoint  // caller supplies the comparator
    };
    Kind kind = Kind::Analytic;
    Point point;         // FixedPoint
    int budget = 10000;  // Numeric
};

// Full-information online mirror descent from h_1 = argmin psi; the
// subgradient is taken at h_t before the update.
RegretTrace run_online_md(const geom::GeometrySpec& g, const StepPolicy& policy,
                          const std::vector<loss::LossInstance>& stream,
                          const ComparatorSpec& comparator, std::uint64_t seed = 0);

// Unknown-horizon wrapper restarting with doubled horizons. Plumbing only:
// the per-run bounds apply to each segment, not the concatenation.
RegretTrace run_online_md_doubling(const geom::GeometrySpec& g, double sup_psi, double B,
                                   double p, const std::vector<loss::LossInstance>& stream,
                                   const ComparatorSpec& comparator, std::uint64_t seed = 0);

// Mirror descent for (sigma, qprime)-uniformly convex losses, run without a
// projection step against a time-growing proxy (1/eta) Psi + R + sigma t psi.
// R is the quadratic c_R/2 ||h||^2; psi is 1/2||h||^2 for qprime = 2 and the
// power proxy (2^{q'}/q') sum |h_i|^{q'} for qprime > 2. eta follows the
// two-branch horizon rule evaluated literally (for qprime = 2 the threshold
// is infinite, so the eta = infinity branch always fires).
struct UcvxReport {
    RegretTrace trace;
    bool eta_infinite_branch = false;
    double eta = 0.0;
};
UcvxReport run_uniformly_convex_md(const geom::GeometrySpec& g, double sigma, double qprime,
                                   double c_R, const std::vector<loss::LossInstance>& stream,
                                   const ComparatorSpec& comparator, std::uint64_t seed = 0);

// Offline optimization: mirror descent fed its own subgradients on a single
// instance for m queries; returns the averaged iterate.
Point offline_optimize(const loss::LossInstance& z, const geom::GeometrySpec& g, int m);

// Projected stochastic gradient descent on the Euclidean unit ball:
// h_1 = 0, eta = 1/sqrt(n), returns the average iterate. Identical to
// Euclidean mirror descent with a fixed step.
Point sgd_unit_ball(const std::vector<loss::LossInstance>& sample);

struct SolveResult {
    Point h;
    double empirical_suboptimality = 0.0;  // estimate vs the best value seen
};

// Approximate empirical minimizer over the geometry's constraint set.
// Generic path: projected subgradient, step (radius/L)/sqrt(t), averaged.
// Samples of masked-norm losses with x = 0 are solved by exact coordinate
// minimization with a norm-constraint multiplier (the generic path cannot
// move the bias-only coordinates whose gradients decay geometrically).
SolveResult erm_solve(const std::vector<loss::LossInstance>& sample,
                      const geom::GeometrySpec& g, int budget = 10000);

// Minimizer of the sample average plus lambda/2 ||h||^2, projected
// subgradient with the strongly-convex step 1/(lambda t), tail-averaged.
SolveResult rerm_solve(const std::vector<loss::LossInstance>& sample,
                       const geom::GeometrySpec& g, double lambda, int budget = 10000);

}  // namespace oco::md

#endif
