#include "oco/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "oco/errors.hpp"
#include "oco/experts.hpp"

namespace oco::harness {

using geom::GeometrySpec;
using loss::LossInstance;

namespace {

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

void parallel_trials(int trials, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || trials <= 1) {
        for (int t = 0; t < trials; ++t) body(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    int k = std::min(threads, trials);
    pool.reserve(k);
    for (int w = 0; w < k; ++w) {
        pool.emplace_back([&] {
            for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) body(t);
        });
    }
    for (auto& th : pool) th.join();
}

struct ComboPlan {
    std::function<double(int n, std::uint64_t seed)> run;  // returns regret
    std::function<double(int n)> bound;
    std::string bound_id;
    std::map<std::string, double> bound_inputs(int n) const {
        auto m = fixed_inputs;
        m["n"] = n;
        return m;
    }
    std::map<std::string, double> fixed_inputs;
};

std::vector<LossInstance> sign_vector_stream(int d, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LossInstance> out;
    out.reserve(n);
    for (int t = 0; t < n; ++t) {
        Point x(d);
        for (int i = 0; i < d; ++i) x[i] = rademacher(rng);
        out.emplace_back(loss::Linear{std::move(x)});
    }
    return out;
}

// Smoothed-absolute-loss stream on the first coordinate. target_comparator
// realizes average comparator loss 0 (labels from a planted point) or 1/4
// (labels at distance 1/2 from the origin prediction).
std::vector<LossInstance> smoothed_abs_stream(int d, int n, std::uint64_t seed, double lbar) {
    Rng rng(seed);
    std::vector<LossInstance> out;
    out.reserve(n);
    for (int t = 0; t < n; ++t) {
        double sg = rademacher(rng);
        Point x = basis(d, 0);
        scale(x, sg);
        double y;
        if (lbar == 0.0) {
            y = sg * 0.6;  // labels realized by the planted point 0.6 e1
        } else {
            y = rademacher(rng) * 0.5;
        }
        out.emplace_back(loss::SmoothedAbs{std::move(x), y});
    }
    return out;
}

// exact minimizer of the average smoothed loss when every x is +-e1: 1-d
// golden-section over the first coordinate
Point smoothed_abs_comparator(const std::vector<LossInstance>& stream, int d) {
    auto value = [&](double a) {
        Point h = zeros(d);
        h[0] = a;
        double s = 0.0;
        for (const auto& z : stream) s += loss::eval(z, h).value;
        return s;
    };
    double lo = -1.0, hi = 1.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), dd = lo + gr * (hi - lo);
    double fc = value(c), fd = value(dd);
    for (int it = 0; it < 200; ++it) {
        if (fc < fd) {
            hi = dd;
            dd = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = value(c);
        } else {
            lo = c;
            c = dd;
            fc = fd;
            dd = lo + gr * (hi - lo);
            fd = value(dd);
        }
    }
    Point h = zeros(d);
    h[0] = 0.5 * (lo + hi);
    return h;
}

ComboPlan make_plan(const RegretExperimentConfig& cfg) {
    const std::string combo = cfg.geometry + "+" + cfg.policy + "+" + cfg.adversary;
    ComboPlan plan;

    if (cfg.geometry == "euclidean_ball" && cfg.policy == "lipschitz" &&
        cfg.adversary == "linear_tree") {
        plan.bound_id = "md_lipschitz";
        plan.fixed_inputs = {{"sup_psi", 0.5}, {"q", 2.0}};
        plan.bound = [](int n) { return 2.0 * std::sqrt(0.5 / n); };
        plan.run = [](int n, std::uint64_t seed) {
            GeometrySpec g = GeometrySpec::euclidean_ball(n, 1.0);
            auto stream = adv::linear_tree_stream(adv::orthonormal_level_tree(n), n, seed);
            md::StepPolicy pol = md::LipschitzRate{0.5, n, 1.0, 2.0};
            auto trace = md::run_online_md(g, pol, stream,
                                           {md::ComparatorSpec::Kind::Analytic, {}, 0}, seed);
            return trace.regret();
        };
        return plan;
    }
    if (cfg.geometry == "euclidean_ball" && cfg.policy == "lipschitz" &&
        cfg.adversary == "zero") {
        plan.bound_id = "md_lipschitz";
        plan.fixed_inputs = {{"sup_psi", 0.5}, {"q", 2.0}};
        plan.bound = [](int n) { return 2.0 * std::sqrt(0.5 / n); };
        int d = cfg.d;
        plan.run = [d](int n, std::uint64_t seed) {
            GeometrySpec g = GeometrySpec::euclidean_ball(d, 1.0);
            std::vector<LossInstance> stream(n, loss::Linear{zeros(d)});
            md::StepPolicy pol = md::LipschitzRate{0.5, n, 1.0, 2.0};
            auto trace = md::run_online_md(g, pol, stream,
                                           {md::ComparatorSpec::Kind::Analytic, {}, 0}, seed);
            return trace.regret();
        };
        return plan;
    }
    if (cfg.geometry == "entropic_simplex" && cfg.policy == "lipschitz" &&
        cfg.adversary == "sign_vectors") {
        int d = cfg.d;
        double sup = std::log(static_cast<double>(d));
        plan.bound_id = "md_lipschitz";
        plan.fixed_inputs = {{"sup_psi", sup}, {"q", 2.0}, {"d", static_cast<double>(d)}};
        plan.bound = [sup](int n) { return 2.0 * std::sqrt(sup / n); };
        plan.run = [d, sup](int n, std::uint64_t seed) {
            GeometrySpec g = GeometrySpec::entropic_simplex(d);
            auto stream = sign_vector_stream(d, n, seed);
            md::StepPolicy pol = md::LipschitzRate{sup, n, 1.0, 2.0};
            auto trace = md::run_online_md(g, pol, stream,
                                           {md::ComparatorSpec::Kind::Analytic, {}, 0}, seed);
            return trace.regret();
        };
        return plan;
    }
    if (cfg.geometry == "euclidean_ball" && cfg.policy == "smooth" &&
        (cfg.adversary == "smoothed_abs_realizable" || cfg.adversary == "smoothed_abs_quarter")) {
        double lbar = cfg.adversary == "smoothed_abs_quarter" ? 0.25 : 0.0;
        // H = ||e1||^2 = 1 on the Euclidean ball
        plan.bound_id = "md_smooth_optimistic";
        plan.fixed_inputs = {{"sup_psi", 0.5}, {"H", 1.0}, {"Lbar", lbar}, {"q", 2.0}};
        plan.bound = [lbar](int n) {
            double ratio = 0.5 / n;
            return std::sqrt(64.0 * 1.0 * lbar) * std::sqrt(ratio) + 40.0 * 1.0 * ratio;
        };
        int d = std::max(cfg.d, 1);
        plan.run = [d, lbar](int n, std::uint64_t seed) {
            GeometrySpec g = GeometrySpec::euclidean_ball(d, 1.0);
            auto stream = smoothed_abs_stream(d, n, seed, lbar);
            md::StepPolicy pol = md::SmoothRate{0.5, n, 1.0, lbar, 2.0};
            md::ComparatorSpec comp{md::ComparatorSpec::Kind::FixedPoint,
                                    smoothed_abs_comparator(stream, d), 0};
            auto trace = md::run_online_md(g, pol, stream, comp, seed);
            return trace.regret();
        };
        return plan;
    }
    if (cfg.geometry == "euclidean_ball" && cfg.policy == "strongly_convex" &&
        cfg.adversary == "strongly_convex_linear") {
        double sigma = cfg.sigma;
        int d = cfg.d;
        double sup_R = 0.5 * sigma;  // sigma/2 ||h||^2 over the unit ball
        plan.bound_id = "md_strongly_convex";
        plan.fixed_inputs = {{"sigma", sigma}, {"qprime", 2.0}, {"sup_R", sup_R}};
        plan.bound = [sigma, sup_R](int n) {
            return 2.0 * std::log(static_cast<double>(n)) / (sigma * n) + sup_R / n;
        };
        plan.run = [d, sigma](int n, std::uint64_t seed) {
            GeometrySpec g = GeometrySpec::euclidean_ball(d, 1.0);
            Rng rng(seed);
            std::vector<LossInstance> stream;
            stream.reserve(n);
            for (int t = 0; t < n; ++t) {
                Point x(d);
                for (int i = 0; i < d; ++i) x[i] = 2.0 * uniform01(rng) - 1.0;
                double nx = norm2(x);
                if (nx == 0.0) x[0] = 1.0;
                scale(x, 1.0 / std::max(nx, 1e-12));
                stream.emplace_back(loss::make_regularized(loss::Linear{std::move(x)}, sigma));
            }
            auto rep = md::run_uniformly_convex_md(
                g, sigma, 2.0, sigma, stream, {md::ComparatorSpec::Kind::Analytic, {}, 0}, seed);
            return rep.trace.regret();
        };
        return plan;
    }
    throw std::invalid_argument(
        "run_regret_experiment: unsupported combination '" + combo +
        "'; supported: euclidean_ball+lipschitz+{linear_tree,zero}, "
        "entropic_simplex+lipschitz+sign_vectors, "
        "euclidean_ball+smooth+{smoothed_abs_realizable,smoothed_abs_quarter}, "
        "euclidean_ball+strongly_convex+strongly_convex_linear");
}

}  // namespace

ExperimentOutput run_regret_experiment(const RegretExperimentConfig& cfg) {
    if (cfg.n_grid.empty()) throw std::invalid_argument("run_regret_experiment: empty n grid");
    for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
        if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
            throw std::invalid_argument("run_regret_experiment: n grid must increase strictly");
    if (cfg.trials < 1) throw std::invalid_argument("run_regret_experiment: trials must be >= 1");

    ComboPlan plan = make_plan(cfg);
    ExperimentOutput out;
    out.config_echo = {{"experiment_id", cfg.experiment_id},
                       {"geometry", cfg.geometry},
                       {"policy", cfg.policy},
                       {"adversary", cfg.adversary},
                       {"d", std::to_string(cfg.d)},
                       {"trials", std::to_string(cfg.trials)},
                       {"master_seed", std::to_string(cfg.master_seed)},
                       {"sigma", std::to_string(cfg.sigma)}};

    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        int n = cfg.n_grid[ni];
        double b = plan.bound(n);
        out.bounds.push_back({plan.bound_id, plan.bound_inputs(n), b});
        std::vector<ResultRow> rows(cfg.trials);
        parallel_trials(cfg.trials, cfg.threads, [&, n, b](int trial) {
            std::uint64_t seed = derive_seed(cfg.master_seed, trial);
            double t0 = now_ms();
            double regret = plan.run(n, seed);
            double t1 = now_ms();
            rows[trial] = {cfg.experiment_id, n,      trial,           seed, "regret",
                           regret,            b,      b - regret,      t1 - t0};
        });
        for (auto& r : rows) out.rows.push_back(std::move(r));
    }
    return out;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& n_vs_value) {
    if (n_vs_value.size() < 3)
        throw std::invalid_argument("fit_rate: need at least 3 grid points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double m = static_cast<double>(n_vs_value.size());
    for (const auto& [n, v] : n_vs_value) {
        if (n <= 0.0 || v <= 0.0)
            throw std::invalid_argument("fit_rate: values must be positive for a log-log fit");
        double x = std::log(n), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double denom = m * sxx - sx * sx;
    RateFit fit;
    fit.exponent = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.exponent * sx) / m;
    double ss_res = 0.0, ss_tot = 0.0, ymean = sy / m;
    for (const auto& [n, v] : n_vs_value) {
        double x = std::log(n), y = std::log(v);
        double e = y - (fit.intercept + fit.exponent * x);
        ss_res += e * e;
        ss_tot += (y - ymean) * (y - ymean);
    }
    fit.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

RateFit fit_rate(const std::vector<ResultRow>& rows) {
    std::map<int, std::pair<double, int>> agg;
    for (const auto& r : rows) {
        agg[r.n].first += r.observed;
        agg[r.n].second += 1;
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& [n, acc] : agg)
        pts.emplace_back(static_cast<double>(n), acc.first / acc.second);
    return fit_rate(pts);
}

namespace {

double bias_value(const Point& h, double eps) {
    double w = 0.5, s = 0.0;
    for (double v : h) {
        s += w * (v - 1.0) * (v - 1.0);
        w *= 0.5;
    }
    return eps * s;
}

}  // namespace

// Monte-Carlo population risk of the masked-norm part E ||mask * h||_2 with
// i.i.d. fair 0/1 masks.
std::pair<double, double> masked_norm_population_risk(const Point& h, int draws,
                                                      std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t d = h.size();
    std::vector<double> h2(d);
    for (std::size_t i = 0; i < d; ++i) h2[i] = h[i] * h[i];
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < draws; ++k) {
        double s = 0.0;
        std::uint64_t bits = 0;
        int left = 0;
        for (std::size_t i = 0; i < d; ++i) {
            if (left == 0) {
                bits = rng();
                left = 64;
            }
            s += h2[i] * static_cast<double>(bits & 1ULL);
            bits >>= 1;
            --left;
        }
        double v = std::sqrt(s);
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / draws;
    double var = std::max(sumsq / draws - mean * mean, 0.0);
    return {mean, std::sqrt(var / draws)};
}

CounterexampleSummary counterexample_experiment(int d, int n, int trials,
                                                std::uint64_t master_seed, int mc_draws,
                                                int threads) {
    if (d < 1 || n < 1 || trials < 1)
        throw std::invalid_argument("counterexample_experiment: positive d, n, trials required");
    double t0 = now_ms();
    const double eps = 0.01;

    CounterexampleSummary sum;
    sum.d = d;
    sum.n = n;
    sum.trials = trials;
    // the population minimizer of the biased objective is the origin: the
    // masked-norm part grows with slope 1/2 per coordinate, dominating the
    // geometric bias pull
    sum.population_optimum = eps * (1.0 - std::pow(0.5, d));
    sum.sgd_bound = std::sqrt(2.0 * (1.0 + eps) / n);

    std::vector<int> has_unobserved(trials, 0);
    std::vector<double> erm_risk(trials, 0.0), erm_norm(trials, 0.0), sgd_sub(trials, 0.0);

    parallel_trials(trials, threads, [&](int trial) {
        std::uint64_t seed = derive_seed(master_seed, trial);
        auto sample = adv::hidden_coordinate_stream(d, n, true, seed);

        std::vector<std::uint8_t> observed(d, 0);
        for (const auto& z : sample) {
            const auto& hb = std::get<loss::HiddenCoordBiased>(z);
            for (int i = 0; i < d; ++i) observed[i] |= hb.mask[i];
        }
        bool unobs = false;
        for (int i = 0; i < d; ++i)
            if (!observed[i]) unobs = true;
        has_unobserved[trial] = unobs ? 1 : 0;

        GeometrySpec g = GeometrySpec::euclidean_ball(d, 1.0);
        if (unobs) {
            md::SolveResult erm = md::erm_solve(sample, g);
            auto [mc, se] = masked_norm_population_risk(erm.h, mc_draws, derive_seed(seed, 1));
            erm_risk[trial] = mc + bias_value(erm.h, eps);
            erm_norm[trial] = norm2(erm.h);
            (void)se;
        }
        Point hbar = md::sgd_unit_ball(sample);
        auto [mc2, se2] = masked_norm_population_risk(hbar, mc_draws, derive_seed(seed, 2));
        sgd_sub[trial] = mc2 + bias_value(hbar, eps) - sum.population_optimum;
        (void)se2;
    });

    int cond = 0;
    double freq = 0.0, risk_sum = 0.0, risk_sq = 0.0, norm_sum = 0.0;
    double sgd_sum = 0.0, sgd_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        freq += has_unobserved[t];
        if (has_unobserved[t]) {
            ++cond;
            risk_sum += erm_risk[t];
            risk_sq += erm_risk[t] * erm_risk[t];
            norm_sum += erm_norm[t];
        }
        sgd_sum += sgd_sub[t];
        sgd_sq += sgd_sub[t] * sgd_sub[t];
    }
    sum.unobserved_frequency = freq / trials;
    sum.conditioned_trials = cond;
    if (cond > 0) {
        sum.erm_population_risk = risk_sum / cond;
        double var = std::max(risk_sq / cond - sum.erm_population_risk * sum.erm_population_risk,
                              0.0);
        sum.erm_population_risk_stderr = std::sqrt(var / cond);
        sum.erm_norm_mean = norm_sum / cond;
    }
    sum.sgd_suboptimality = sgd_sum / trials;
    double var2 = std::max(sgd_sq / trials - sum.sgd_suboptimality * sum.sgd_suboptimality, 0.0);
    sum.sgd_suboptimality_stderr = std::sqrt(var2 / trials);
    sum.runtime_ms = now_ms() - t0;
    return sum;
}

ExperimentOutput oracle_complexity_curve(const OracleCurveConfig& cfg) {
    if (cfg.algorithm != "md" && cfg.algorithm != "pgd")
        throw std::invalid_argument("oracle_complexity_curve: algorithm must be md or pgd");
    ExperimentOutput out;
    out.config_echo = {{"experiment_id", cfg.experiment_id},
                       {"algorithm", cfg.algorithm},
                       {"master_seed", std::to_string(cfg.master_seed)}};

    for (int m : cfg.m_grid) {
        if (m < 1) throw std::invalid_argument("oracle_complexity_curve: m must be >= 1");
        double t0 = now_ms();
        GeometrySpec g = GeometrySpec::euclidean_ball(m, 1.0);

        // resisting game; the adversary only sees the queries
        adv::ResistingOracle oracle(m, adv::ResistingOracle::orthonormal_pieces(m));
        Point h = zeros(m);
        Point last_query = h;
        double eta_md = md::step_size_lipschitz(0.5, m, 1.0, 2.0);
        for (int t = 1; t <= m; ++t) {
            last_query = h;
            loss::LossEval ans = oracle.query(h);
            double eta = cfg.algorithm == "md" ? eta_md : 1.0 / std::sqrt(static_cast<double>(t));
            axpy(-eta, ans.subgrad, h);
            double nh = norm2(h);
            if (nh > 1.0) scale(h, 1.0 / nh);
        }
        loss::MaxOfSignedLinear zfinal = oracle.finalized_instance();
        double opt = oracle.optimum_on_l2_ball(1.0);
        double sub = loss::eval(LossInstance{zfinal}, last_query).value - opt;
        double lower = 1.0 / std::sqrt(static_cast<double>(m));
        out.bounds.push_back(
            {"resisting_lower_bound", {{"m", static_cast<double>(m)}}, lower});
        out.rows.push_back({cfg.experiment_id, m, 0, cfg.master_seed, "resisting_suboptimality",
                            sub, lower, sub - lower, now_ms() - t0});

        // benign instance: fixed unit linear loss, averaged output guarantee
        double t1 = now_ms();
        Point x = basis(m, 0);
        Point hbar = md::offline_optimize(LossInstance{loss::Linear{x}}, g, m);
        double benign_sub = dot(x, hbar) + 1.0;  // optimum is -x with value -1
        double ub = 2.0 * std::sqrt(0.5 / m);
        out.bounds.push_back({"offline_md_guarantee", {{"m", static_cast<double>(m)},
                                                       {"sup_psi", 0.5},
                                                       {"q", 2.0}}, ub});
        out.rows.push_back({cfg.experiment_id, m, 1, cfg.master_seed, "benign_suboptimality",
                            benign_sub, ub, ub - benign_sub, now_ms() - t1});
    }
    return out;
}

StabilityEstimate estimate_ro_stability(const StabilityConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("estimate_ro_stability: trials must be >= 1");
    if (cfg.n < 1) throw std::invalid_argument("estimate_ro_stability: n must be >= 1");

    GeometrySpec g = GeometrySpec::euclidean_ball(cfg.d, 1.0);

    auto draw_instance = [&](Rng& rng) -> LossInstance {
        if (cfg.sampler == "linear_unit") {
            Point x(cfg.d);
            for (int i = 0; i < cfg.d; ++i) x[i] = 2.0 * uniform01(rng) - 1.0;
            double nx = norm2(x);
            if (nx == 0.0) x[0] = 1.0;
            scale(x, 1.0 / std::max(nx, 1e-12));
            return loss::Linear{std::move(x)};
        }
        if (cfg.sampler == "hidden_biased") {
            std::vector<std::uint8_t> mask(cfg.d);
            for (int i = 0; i < cfg.d; ++i) mask[i] = static_cast<std::uint8_t>(rng() & 1u);
            return loss::HiddenCoordBiased{zeros(cfg.d), std::move(mask), 0.01};
        }
        throw std::invalid_argument("estimate_ro_stability: unknown sampler " + cfg.sampler);
    };

    auto fit = [&](const std::vector<LossInstance>& sample) -> Point {
        if (cfg.rule == "constant") return zeros(cfg.d);
        if (cfg.rule == "erm") return md::erm_solve(sample, g).h;
        if (cfg.rule == "rerm") return md::rerm_solve(sample, g, cfg.lambda).h;
        if (cfg.rule == "sgd") return md::sgd_unit_ball(sample);
        if (cfg.rule == "averaged_md") {
            int n = static_cast<int>(sample.size());
            double eta = md::step_size_lipschitz(0.5, n, 1.0, 2.0);
            md::MDState st = md::init_state(g);
            for (const auto& z : sample) st = md::md_step(st, g, loss::eval(z, st.h).subgrad, eta);
            return md::averaged_output(st);
        }
        throw std::invalid_argument("estimate_ro_stability: unknown rule " + cfg.rule);
    };

    auto eval_loss = [&](const Point& h, const LossInstance& z) {
        if (cfg.rule == "rerm") {
            // the strongly-convex objective includes its regularizer
            double n2 = norm2(h);
            return loss::eval(z, h).value + 0.5 * cfg.lambda * n2 * n2;
        }
        return loss::eval(z, h).value;
    };

    std::vector<double> trial_means(cfg.trials, 0.0);
    for (int trial = 0; trial < cfg.trials; ++trial) {
        Rng rng(derive_seed(cfg.master_seed, trial));
        std::vector<LossInstance> S, Sprime;
        S.reserve(cfg.n);
        Sprime.reserve(cfg.n);
        for (int i = 0; i < cfg.n; ++i) S.push_back(draw_instance(rng));
        for (int i = 0; i < cfg.n; ++i) Sprime.push_back(draw_instance(rng));
        Point base = fit(S);
        double acc = 0.0;
        for (int i = 0; i < cfg.n; ++i) {
            std::vector<LossInstance> Si = S;
            Si[i] = Sprime[i];
            Point hi = fit(Si);
            acc += eval_loss(hi, Sprime[i]) - eval_loss(base, Sprime[i]);
        }
        trial_means[trial] = acc / cfg.n;
    }
    double mean = 0.0;
    for (double v : trial_means) mean += v;
    mean /= cfg.trials;
    double var = 0.0;
    for (double v : trial_means) var += (v - mean) * (v - mean);
    var = cfg.trials > 1 ? var / (cfg.trials - 1) : 0.0;

    StabilityEstimate est;
    est.estimate = std::abs(mean);
    est.stderr_ = std::sqrt(var / cfg.trials);
    est.low_trial_warning = cfg.trials < 30;
    return est;
}

BlockSignSummary block_sign_experiment(const BlockSignConfig& cfg) {
    cplx::FiniteClass F = cplx::FiniteClass::full_binary(cfg.x_points);
    cplx::Caps caps;
    caps.seq_fat_max_points = std::max(caps.seq_fat_max_points, cfg.x_points);
    caps.seq_fat_max_depth = std::max(caps.seq_fat_max_depth, cfg.x_points);
    adv::BlockAdversaryPlan plan = adv::BlockAdversaryPlan::make(F, cfg.alpha, cfg.n, caps);
    adv::validate_plan(F, plan);

    const std::size_t K = F.num_functions();
    std::vector<double> priors(K, 1.0 / static_cast<double>(K));

    std::vector<double> regrets(cfg.seeds, 0.0);
    parallel_trials(cfg.seeds, cfg.threads, [&](int s) {
        std::uint64_t seed = derive_seed(cfg.master_seed, s);
        auto stream = adv::block_sign_stream(plan, seed);
        // expected-loss EWA learner over the class members as experts;
        // absolute losses in [0,2] are halved for the weight update
        std::vector<std::vector<double>> losses(stream.size(), std::vector<double>(K));
        for (std::size_t t = 0; t < stream.size(); ++t)
            for (std::size_t f = 0; f < K; ++f)
                losses[t][f] =
                    0.5 * std::abs(F.values[f][stream[t].first] - stream[t].second);
        auto ewa = experts::ewa_run(priors, losses);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < K; ++f)
            best = std::min(best, ewa.cumulative_expert_loss[f]);
        regrets[s] = 2.0 * (ewa.cumulative_expected_loss - best) / cfg.n;
    });

    BlockSignSummary out;
    out.depth = plan.depth;
    double mean = 0.0;
    for (double r : regrets) mean += r;
    mean /= cfg.seeds;
    double var = 0.0;
    for (double r : regrets) var += (r - mean) * (r - mean);
    var = cfg.seeds > 1 ? var / (cfg.seeds - 1) : 0.0;
    double se = std::sqrt(var / cfg.seeds);
    out.mean_regret = mean;
    out.ci95_low = mean - 1.96 * se;
    out.ci95_high = mean + 1.96 * se;
    out.lower_bound_target = 0.9 * std::sqrt(static_cast<double>(plan.depth) / (8.0 * cfg.n));
    return out;
}

namespace {

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("emit: cannot open " + tmp);
        os << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("emit: rename failed for " + path);
}

}  // namespace

void emit(const ExperimentOutput& out, EmitFormat format, const std::string& path) {
    std::vector<ResultRow> rows = out.rows;
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.experiment_id != b.experiment_id) return a.experiment_id < b.experiment_id;
        if (a.n != b.n) return a.n < b.n;
        if (a.trial != b.trial) return a.trial < b.trial;
        return a.metric_name < b.metric_name;
    });

    if (format == EmitFormat::Csv) {
        std::ostringstream os;
        os << "experiment_id,n,trial,seed,metric_name,observed,bound,margin,runtime_ms\n";
        for (const auto& r : rows) {
            os << r.experiment_id << "," << r.n << "," << r.trial << "," << r.seed << ","
               << r.metric_name << "," << format17(r.observed) << "," << format17(r.bound) << ","
               << format17(r.margin) << "," << format17(r.runtime_ms) << "\n";
        }
        atomic_write(path, os.str());
        return;
    }

    nlohmann::json j;
    j["library_version"] = kLibraryVersion;
    j["config"] = out.config_echo;
    j["bounds"] = nlohmann::json::array();
    for (const auto& b : out.bounds) {
        nlohmann::json jb;
        jb["id"] = b.id;
        jb["inputs"] = b.inputs;
        jb["value"] = b.value;
        j["bounds"].push_back(jb);
    }
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json jr;
        jr["experiment_id"] = r.experiment_id;
        jr["n"] = r.n;
        jr["trial"] = r.trial;
        jr["seed"] = r.seed;
        jr["metric_name"] = r.metric_name;
        jr["observed"] = r.observed;
        jr["bound"] = r.bound;
        jr["margin"] = r.margin;
        jr["runtime_ms"] = r.runtime_ms;
        j["rows"].push_back(jr);
    }
    atomic_write(path, j.dump(2));
}

}  // namespace oco::harness
