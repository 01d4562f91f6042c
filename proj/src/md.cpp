#include "oco/md.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oco/errors.hpp"
#include "oco/tolerances.hpp"

namespace oco::md {

using geom::Constraint;
using geom::GeometrySpec;
using loss::LossInstance;

double step_size_lipschitz(double sup_psi, int n, double B, double p) {
    if (sup_psi <= 0.0 || n < 1 || B <= 0.0)
        throw std::invalid_argument("step_size_lipschitz: inputs must be positive");
    if (!(p > 1.0 && p <= 2.0))
        throw std::invalid_argument("step_size_lipschitz: p must lie in (1,2]");
    return std::pow(sup_psi / (static_cast<double>(n) * B), 1.0 / p);
}

double step_size_smooth(double sup_psi, int n, double H, double Lbar, double p) {
    if (H <= 0.0) throw std::invalid_argument("step_size_smooth: H must be positive");
    if (sup_psi <= 0.0 || n < 1)
        throw std::invalid_argument("step_size_smooth: inputs must be positive");
    if (!(p > 1.0 && p <= 2.0))
        throw std::invalid_argument("step_size_smooth: p must lie in (1,2]");
    if (Lbar < 0.0) throw std::invalid_argument("step_size_smooth: Lbar must be nonnegative");
    double q = p / (p - 1.0);
    double ratio = sup_psi / static_cast<double>(n);
    double threshold = 16.0 * H / std::pow(p, 2.0 / p) * std::pow(ratio, 2.0 / q);
    if (Lbar >= threshold) {
        return std::pow(p * ratio, 1.0 / p) / std::sqrt(4.0 * H * Lbar);
    }
    return std::pow(p / 2.0, p / 2.0) / (4.0 * H) * std::pow(ratio, (2.0 - p) / p);
}

double resolve_eta(const StepPolicy& policy) {
    return std::visit(
        [](const auto& pl) -> double {
            using T = std::decay_t<decltype(pl)>;
            if constexpr (std::is_same_v<T, LipschitzRate>) {
                return step_size_lipschitz(pl.sup_psi, pl.n, pl.B, pl.p);
            } else if constexpr (std::is_same_v<T, SmoothRate>) {
                return step_size_smooth(pl.sup_psi, pl.n, pl.H, pl.Lbar, pl.p);
            } else {
                if (pl.eta <= 0.0) throw std::invalid_argument("Fixed: eta must be positive");
                return pl.eta;
            }
        },
        policy);
}

std::string policy_id(const StepPolicy& policy) {
    std::ostringstream os;
    std::visit(
        [&](const auto& pl) {
            using T = std::decay_t<decltype(pl)>;
            if constexpr (std::is_same_v<T, LipschitzRate>) {
                os << "lipschitz(sup_psi=" << pl.sup_psi << ",n=" << pl.n << ",B=" << pl.B
                   << ",p=" << pl.p << ")";
            } else if constexpr (std::is_same_v<T, SmoothRate>) {
                os << "smooth(sup_psi=" << pl.sup_psi << ",n=" << pl.n << ",H=" << pl.H
                   << ",Lbar=" << pl.Lbar << ",p=" << pl.p << ")";
            } else {
                os << "fixed(eta=" << pl.eta << ")";
            }
        },
        policy);
    return os.str();
}

MDState init_state(const GeometrySpec& g) {
    MDState s;
    s.h = geom::argmin_psi(g);
    s.h_sum = zeros(static_cast<std::size_t>(g.d));
    s.t = 0;
    return s;
}

namespace {

// In-place update: record h_t into the running sum, then replace it with the
// mirror step's projection. Avoids the per-round state copies of md_step.
void advance_state(MDState& state, const GeometrySpec& g, const Point& subgrad, double eta) {
    if (eta <= 0.0) throw std::invalid_argument("md_step: eta must be positive");
    check_dim(subgrad, state.h.size(), "md_step");
    axpy(1.0, state.h, state.h_sum);
    ++state.t;
    if (g.family == geom::Family::Euclidean) {
        axpy(-eta, subgrad, state.h);
        if (g.constraint.kind == Constraint::Kind::L2Ball) {
            double n = norm2(state.h);
            if (n > g.constraint.radius) scale(state.h, g.constraint.radius / n);
            return;
        }
        state.h = geom::project(g, state.h);
        return;
    }
    Point theta = geom::grad_psi(g, state.h);
    axpy(-eta, subgrad, theta);
    state.h = geom::project(g, geom::grad_psi_star(g, theta));
}

}  // namespace

MDState md_step(const MDState& state, const GeometrySpec& g, const Point& subgrad, double eta) {
    MDState out = state;
    advance_state(out, g, subgrad, eta);
    return out;
}

Point averaged_output(const MDState& state) {
    if (state.t == 0) throw std::invalid_argument("averaged_output: no rounds completed");
    Point avg = state.h_sum;
    scale(avg, 1.0 / static_cast<double>(state.t));
    return avg;
}

namespace {

bool all_linear(const std::vector<LossInstance>& stream) {
    for (const auto& z : stream)
        if (!std::holds_alternative<loss::Linear>(z)) return false;
    return true;
}

// Closed-form minimizer of <xbar, h> over the constraint set.
Point analytic_linear_minimizer(const GeometrySpec& g, const Point& xbar) {
    const auto& c = g.constraint;
    const int d = g.d;
    switch (c.kind) {
        case Constraint::Kind::Simplex: {
            std::size_t best = 0;
            for (std::size_t i = 1; i < xbar.size(); ++i)
                if (xbar[i] < xbar[best]) best = i;
            return basis(d, best);
        }
        case Constraint::Kind::L2Ball: {
            double n = norm2(xbar);
            if (n == 0.0) return zeros(d);
            Point h = xbar;
            scale(h, -c.radius / n);
            return h;
        }
        case Constraint::Kind::L1Ball: {
            std::size_t best = 0;
            for (std::size_t i = 1; i < xbar.size(); ++i)
                if (std::abs(xbar[i]) > std::abs(xbar[best])) best = i;
            Point h = zeros(d);
            h[best] = xbar[best] > 0.0 ? -c.radius : c.radius;
            return h;
        }
        case Constraint::Kind::LpBall: {
            if (std::isinf(c.p)) {
                Point h(d);
                for (int i = 0; i < d; ++i) h[i] = xbar[i] > 0.0 ? -c.radius : c.radius;
                return h;
            }
            if (c.p == 1.0) {
                GeometrySpec g1 = g;
                g1.constraint = Constraint::l1_ball(c.radius);
                return analytic_linear_minimizer(g1, xbar);
            }
            // min over the l_p ball of <xbar, h> = -radius ||xbar||_{p'}
            double pp = c.p / (c.p - 1.0);
            double npp = norm_p(xbar, pp);
            if (npp == 0.0) return zeros(d);
            Point h(d, 0.0);
            for (int i = 0; i < d; ++i) {
                if (xbar[i] == 0.0) continue;
                h[i] = -std::copysign(std::pow(std::abs(xbar[i]) / npp, pp - 1.0), xbar[i]) *
                       c.radius;
            }
            return h;
        }
        case Constraint::Kind::None:
            throw UnboundedError("analytic comparator: linear loss unbounded without constraint");
    }
    return zeros(d);
}

struct ComparatorResult {
    Point h;
    std::string kind;
};

// Regularized linear streams with one shared lambda admit a radial closed
// form on the Euclidean ball: proj(-xbar / lambda).
bool all_regularized_linear(const std::vector<LossInstance>& stream, double& lambda_out,
                            Point& xbar_out, int d) {
    double lambda = -1.0;
    Point xbar = zeros(d);
    for (const auto& z : stream) {
        const auto* reg = std::get_if<loss::Regularized>(&z);
        if (!reg) return false;
        const auto* lin = std::get_if<loss::Linear>(&reg->inner->z);
        if (!lin) return false;
        if (lambda < 0.0)
            lambda = reg->lambda;
        else if (reg->lambda != lambda)
            return false;
        axpy(1.0, lin->x, xbar);
    }
    scale(xbar, 1.0 / static_cast<double>(stream.size()));
    lambda_out = lambda;
    xbar_out = std::move(xbar);
    return true;
}

ComparatorResult find_comparator(const GeometrySpec& g,
                                 const std::vector<LossInstance>& stream,
                                 const ComparatorSpec& spec) {
    switch (spec.kind) {
        case ComparatorSpec::Kind::FixedPoint: return {spec.point, "fixed"};
        case ComparatorSpec::Kind::Analytic: {
            if (all_linear(stream)) {
                Point xbar = zeros(g.d);
                for (const auto& z : stream) axpy(1.0, std::get<loss::Linear>(z).x, xbar);
                scale(xbar, 1.0 / static_cast<double>(stream.size()));
                return {analytic_linear_minimizer(g, xbar), "analytic"};
            }
            double lambda = 0.0;
            Point xbar;
            if (all_regularized_linear(stream, lambda, xbar, g.d) &&
                g.family == geom::Family::Euclidean &&
                (g.constraint.kind == Constraint::Kind::L2Ball ||
                 g.constraint.kind == Constraint::Kind::None)) {
                scale(xbar, -1.0 / lambda);
                return {geom::project(g, xbar), "analytic"};
            }
            throw std::invalid_argument(
                "comparator: no analytic minimizer for this stream; use Numeric");
        }
        case ComparatorSpec::Kind::Numeric: {
            SolveResult r = erm_solve(stream, g, spec.budget);
            return {r.h, "erm(budget=" + std::to_string(spec.budget) + ")"};
        }
    }
    throw std::invalid_argument("comparator: unknown kind");
}

RegretTrace finish_trace(const GeometrySpec& g, const std::vector<LossInstance>& stream,
                         const ComparatorSpec& comparator, std::vector<double> losses,
                         Point final_average, const std::string& pol_id, std::uint64_t seed) {
    ComparatorResult comp = find_comparator(g, stream, comparator);
    RegretTrace trace;
    trace.geometry_id = g.id();
    trace.policy_id = pol_id;
    trace.comparator_kind = comp.kind;
    trace.seed = seed;
    trace.comparator = comp.h;
    trace.final_average = std::move(final_average);
    trace.rows.resize(stream.size());
    double cum_loss = 0.0, cum_comp = 0.0;
    for (std::size_t t = 0; t < stream.size(); ++t) {
        double cl = loss::eval(stream[t], comp.h).value;
        cum_loss += losses[t];
        cum_comp += cl;
        trace.rows[t].loss = losses[t];
        trace.rows[t].comparator_loss = cl;
        trace.rows[t].cum_regret = (cum_loss - cum_comp) / static_cast<double>(t + 1);
    }
    return trace;
}

}  // namespace

RegretTrace run_online_md(const GeometrySpec& g, const StepPolicy& policy,
                          const std::vector<LossInstance>& stream,
                          const ComparatorSpec& comparator, std::uint64_t seed) {
    if (stream.empty()) throw std::invalid_argument("run_online_md: empty stream");
    if (const auto* lr = std::get_if<LipschitzRate>(&policy)) {
        if (lr->n != static_cast<int>(stream.size()))
            throw std::invalid_argument("run_online_md: policy horizon != stream length");
    }
    if (const auto* sr = std::get_if<SmoothRate>(&policy)) {
        if (sr->n != static_cast<int>(stream.size()))
            throw std::invalid_argument("run_online_md: policy horizon != stream length");
    }
    double eta = resolve_eta(policy);
    MDState state = init_state(g);
    std::vector<double> losses(stream.size());
    for (std::size_t t = 0; t < stream.size(); ++t) {
        loss::LossEval e = loss::eval(stream[t], state.h);
        losses[t] = e.value;
        advance_state(state, g, e.subgrad, eta);
    }
    return finish_trace(g, stream, comparator, std::move(losses), averaged_output(state),
                        policy_id(policy), seed);
}

RegretTrace run_online_md_doubling(const GeometrySpec& g, double sup_psi, double B, double p,
                                   const std::vector<LossInstance>& stream,
                                   const ComparatorSpec& comparator, std::uint64_t seed) {
    if (stream.empty()) throw std::invalid_argument("run_online_md_doubling: empty stream");
    std::vector<double> losses;
    losses.reserve(stream.size());
    std::size_t t = 0;
    int segment = 1;
    Point sum = zeros(g.d);
    long total = 0;
    while (t < stream.size()) {
        double eta = step_size_lipschitz(sup_psi, segment, B, p);
        MDState seg_state = init_state(g);
        for (int i = 0; i < segment && t < stream.size(); ++i, ++t) {
            loss::LossEval e = loss::eval(stream[t], seg_state.h);
            losses.push_back(e.value);
            axpy(1.0, seg_state.h, sum);
            ++total;
            advance_state(seg_state, g, e.subgrad, eta);
        }
        segment *= 2;
    }
    scale(sum, 1.0 / static_cast<double>(total));
    std::ostringstream os;
    os << "doubling(sup_psi=" << sup_psi << ",B=" << B << ",p=" << p << ")";
    return finish_trace(g, stream, comparator, std::move(losses), std::move(sum), os.str(), seed);
}

namespace {

// Inverts c1 * h_i + c2 * qprime * 2^{qprime} / qprime ... the time-varying
// proxy gradient for the uniformly convex run: theta = c1 u + cpow sign(u)|u|^{q'-1}.
double invert_ucvx_coordinate(double c1, double cpow, double qprime, double target) {
    double a = std::abs(target);
    if (a == 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    auto f = [&](double u) { return c1 * u + cpow * std::pow(u, qprime - 1.0); };
    while (f(hi) < a) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) < a)
            lo = mid;
        else
            hi = mid;
    }
    return std::copysign(0.5 * (lo + hi), target);
}

}  // namespace

UcvxReport run_uniformly_convex_md(const GeometrySpec& g, double sigma, double qprime,
                                   double c_R, const std::vector<LossInstance>& stream,
                                   const ComparatorSpec& comparator, std::uint64_t seed) {
    if (qprime < 2.0)
        throw std::invalid_argument("run_uniformly_convex_md: qprime must be >= 2");
    if (sigma <= 0.0) throw std::invalid_argument("run_uniformly_convex_md: sigma must be > 0");
    if (stream.empty()) throw std::invalid_argument("run_uniformly_convex_md: empty stream");
    if (g.family != geom::Family::Euclidean)
        throw std::invalid_argument(
            "run_uniformly_convex_md: only the Euclidean proxy family is supported");

    const int n = static_cast<int>(stream.size());
    const double q = g.q;  // Euclidean: 2
    const double p = q / (q - 1.0);
    const double pprime = qprime / (qprime - 1.0);
    double sup = geom::sup_psi(g);

    // eta rule evaluated literally; the exponent 1/(2 - p' - 1/p) flips sign
    // and the base (2-p') vanishes at qprime = 2, so the threshold is +inf and
    // the eta = infinity branch fires.
    double base = (2.0 - pprime) * std::pow(sigma, pprime - 1.0) * std::pow(sup, 1.0 / q);
    double expo = 1.0 / (2.0 - pprime - 1.0 / p);
    double threshold = std::pow(base, expo);
    if (base == 0.0) threshold = std::numeric_limits<double>::infinity();
    bool eta_inf = !(static_cast<double>(n) >= threshold);
    double eta = eta_inf ? std::numeric_limits<double>::infinity()
                         : std::pow(sup / static_cast<double>(n), 1.0 / p);

    // Proxy at round t: (1/eta + c_R) * 1/2||h||^2 + sigma t psi_{q'} with
    // psi_2 = 1/2||h||^2 and psi_{q'>2}(h) = (2^{q'}/q') sum_i |h_i|^{q'}.
    // No projection step in this regime.
    MDState state = init_state(g);
    state.h = zeros(g.d);
    std::vector<double> losses(stream.size());
    double inv_eta = eta_inf ? 0.0 : 1.0 / eta;
    for (int t = 1; t <= n; ++t) {
        loss::LossEval e = loss::eval(stream[t - 1], state.h);
        losses[t - 1] = e.value;

        double c1 = inv_eta + c_R;
        Point theta(state.h.size());
        if (qprime == 2.0) {
            double coef = c1 + sigma * t;
            for (std::size_t i = 0; i < theta.size(); ++i)
                theta[i] = coef * state.h[i] - e.subgrad[i];
            MDState next;
            next.h = theta;
            scale(next.h, 1.0 / coef);
            next.h_sum = state.h_sum;
            axpy(1.0, state.h, next.h_sum);
            next.t = state.t + 1;
            state = std::move(next);
        } else {
            double cpow = sigma * t * std::pow(2.0, qprime);
            for (std::size_t i = 0; i < theta.size(); ++i) {
                double hi = state.h[i];
                double gpsi = c1 * hi + cpow * (hi == 0.0 ? 0.0
                                                          : std::copysign(std::pow(std::abs(hi),
                                                                                   qprime - 1.0),
                                                                          hi));
                theta[i] = gpsi - e.subgrad[i];
            }
            MDState next;
            next.h.resize(theta.size());
            for (std::size_t i = 0; i < theta.size(); ++i)
                next.h[i] = invert_ucvx_coordinate(c1, cpow, qprime, theta[i]);
            next.h_sum = state.h_sum;
            axpy(1.0, state.h, next.h_sum);
            next.t = state.t + 1;
            state = std::move(next);
        }
    }

    std::ostringstream os;
    os << "ucvx(sigma=" << sigma << ",qprime=" << qprime << ",c_R=" << c_R
       << ",eta=" << (eta_inf ? std::string("inf") : std::to_string(eta)) << ")";
    UcvxReport rep;
    rep.trace = finish_trace(g, stream, comparator, std::move(losses), averaged_output(state),
                             os.str(), seed);
    rep.eta_infinite_branch = eta_inf;
    rep.eta = eta;
    return rep;
}

Point offline_optimize(const LossInstance& z, const GeometrySpec& g, int m) {
    if (m < 1) throw std::invalid_argument("offline_optimize: m must be >= 1");
    double q = g.q;
    double p = q / (q - 1.0);
    double eta = step_size_lipschitz(geom::sup_psi(g), m, 1.0, p);
    MDState state = init_state(g);
    for (int t = 0; t < m; ++t) {
        loss::LossEval e = loss::eval(z, state.h);
        advance_state(state, g, e.subgrad, eta);
    }
    return averaged_output(state);
}

Point sgd_unit_ball(const std::vector<LossInstance>& sample) {
    if (sample.empty()) throw std::invalid_argument("sgd_unit_ball: empty sample");
    const std::size_t d = loss::dim(sample.front());
    GeometrySpec g = GeometrySpec::euclidean_ball(static_cast<int>(d), 1.0);
    double eta = 1.0 / std::sqrt(static_cast<double>(sample.size()));
    MDState state = init_state(g);
    for (const auto& z : sample) {
        loss::LossEval e = loss::eval(z, state.h);
        advance_state(state, g, e.subgrad, eta);
    }
    return averaged_output(state);
}

namespace {

double empirical_value(const std::vector<LossInstance>& sample, const Point& h) {
    double s = 0.0;
    for (const auto& z : sample) s += loss::eval(z, h).value;
    return s / static_cast<double>(sample.size());
}

Point empirical_subgrad(const std::vector<LossInstance>& sample, const Point& h) {
    Point grad = zeros(h.size());
    for (const auto& z : sample) axpy(1.0, loss::eval(z, h).subgrad, grad);
    scale(grad, 1.0 / static_cast<double>(sample.size()));
    return grad;
}

double constraint_radius(const GeometrySpec& g) {
    using CK = Constraint::Kind;
    if (g.constraint.kind == CK::Simplex) return 1.0;
    if (g.constraint.kind == CK::None) return 1.0;
    return g.constraint.radius;
}

bool is_masked_norm_sample(const std::vector<LossInstance>& sample) {
    for (const auto& z : sample) {
        bool ok = false;
        if (const auto* hc = std::get_if<loss::HiddenCoord>(&z)) {
            ok = norm2(hc->x) == 0.0;
        } else if (const auto* hb = std::get_if<loss::HiddenCoordBiased>(&z)) {
            ok = norm2(hb->x) == 0.0;
        }
        if (!ok) return false;
    }
    return !sample.empty();
}

// Exact empirical minimizer for samples of masked-norm losses centered at 0,
// over the Euclidean ball: cyclic coordinate minimization with a norm
// multiplier found by bisection. Coordinates never observed by any mask are
// pulled to 1 by the bias alone; additive gradient schemes cannot reach them
// because the bias weights decay geometrically.
Point masked_norm_erm(const std::vector<LossInstance>& sample, const GeometrySpec& g,
                      int budget) {
    const int d = g.d;
    const int n = static_cast<int>(sample.size());
    double radius = constraint_radius(g);
    std::vector<std::vector<std::uint8_t>> masks(n);
    double eps = 0.0;
    bool biased = false;
    for (int t = 0; t < n; ++t) {
        if (const auto* hc = std::get_if<loss::HiddenCoord>(&sample[t])) {
            masks[t] = hc->mask;
        } else {
            const auto& hb = std::get<loss::HiddenCoordBiased>(sample[t]);
            masks[t] = hb.mask;
            eps = hb.eps_bias;
            biased = true;
        }
    }
    if (!biased) {
        // no bias: h = 0 is an exact empirical (and population) minimizer
        return zeros(d);
    }

    std::vector<std::vector<int>> observers(d);
    for (int t = 0; t < n; ++t)
        for (int i = 0; i < d; ++i)
            if (masks[t][i]) observers[i].push_back(t);

    // Minimize F(h) + mu ||h||^2 by exact cyclic coordinate descent. The 1-D
    // problems are strictly convex with increasing derivative; bisection.
    auto solve_given_mu = [&](double mu, Point h) -> Point {
        std::vector<double> sq(n, 0.0);  // per-instance masked squared norms
        for (int t = 0; t < n; ++t)
            for (int i = 0; i < d; ++i)
                if (masks[t][i]) sq[t] += h[i] * h[i];
        int cycles = std::max(30, budget / std::max(d, 1));
        cycles = std::min(cycles, 500);
        for (int cyc = 0; cyc < cycles; ++cyc) {
            double moved = 0.0;
            double w = 0.5;
            for (int i = 0; i < d; ++i, w *= 0.5) {
                double old = h[i];
                for (int t : observers[i]) sq[t] = std::max(sq[t] - old * old, 0.0);
                // derivative in u > 0:
                //   (1/n) sum_t u/sqrt(c_t + u^2) + 2 eps w (u - 1) + 2 mu u
                auto deriv = [&](double u) {
                    double s = 0.0;
                    for (int t : observers[i]) s += u / std::sqrt(sq[t] + u * u);
                    return s / n + 2.0 * eps * w * (u - 1.0) + 2.0 * mu * u;
                };
                // kink at 0 when some c_t = 0: right derivative there is
                // (#zero terms)/n - 2 eps w
                double zero_terms = 0.0;
                for (int t : observers[i])
                    if (sq[t] == 0.0) zero_terms += 1.0;
                double u;
                if (zero_terms / n - 2.0 * eps * w >= 0.0) {
                    u = 0.0;
                } else {
                    // deriv(1) >= 0 always (bias term vanishes, rest >= 0)
                    double lo = 0.0, hi = 1.0;
                    for (int it = 0; it < 100; ++it) {
                        double mid = 0.5 * (lo + hi);
                        if (deriv(mid) < 0.0)
                            lo = mid;
                        else
                            hi = mid;
                    }
                    u = 0.5 * (lo + hi);
                }
                h[i] = u;
                for (int t : observers[i]) sq[t] += u * u;
                moved = std::max(moved, std::abs(u - old));
            }
            if (moved < 1e-12) break;
        }
        return h;
    };

    Point h = solve_given_mu(0.0, zeros(d));
    if (norm2(h) <= radius + 1e-12) return h;
    double mu_lo = 0.0, mu_hi = 1.0;
    while (norm2(solve_given_mu(mu_hi, h)) > radius) mu_hi *= 2.0;
    Point best = h;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (mu_lo + mu_hi);
        Point cand = solve_given_mu(mid, best);
        if (norm2(cand) > radius)
            mu_lo = mid;
        else
            mu_hi = mid;
        best = std::move(cand);
        if (std::abs(norm2(best) - radius) < 1e-10) break;
    }
    scale(best, radius / std::max(norm2(best), 1e-300));
    return best;
}

}  // namespace

SolveResult erm_solve(const std::vector<LossInstance>& sample, const GeometrySpec& g,
                      int budget) {
    if (budget < 1) throw std::invalid_argument("erm_solve: budget must be >= 1");
    if (sample.empty()) throw std::invalid_argument("erm_solve: empty sample");

    if (is_masked_norm_sample(sample) && g.family == geom::Family::Euclidean) {
        Point h = masked_norm_erm(sample, g, budget);
        return {h, 0.0};
    }

    double L = 0.0;
    for (const auto& z : sample) L = std::max(L, loss::lipschitz_bound(z, g));
    double c = constraint_radius(g) / std::max(L, 1e-12);

    Point h = geom::argmin_psi(g);
    Point sum = zeros(g.d);
    double best_val = empirical_value(sample, h);
    Point best_h = h;
    for (int t = 1; t <= budget; ++t) {
        Point grad = empirical_subgrad(sample, h);
        axpy(-c / std::sqrt(static_cast<double>(t)), grad, h);
        h = geom::project(g, h);
        axpy(1.0, h, sum);
        if (t == budget || (t % 128) == 0) {
            double v = empirical_value(sample, h);
            if (v < best_val) {
                best_val = v;
                best_h = h;
            }
        }
    }
    Point avg = sum;
    scale(avg, 1.0 / static_cast<double>(budget));
    double avg_val = empirical_value(sample, avg);
    if (avg_val <= best_val) return {avg, 0.0};
    return {best_h, 0.0};
}

SolveResult rerm_solve(const std::vector<LossInstance>& sample, const GeometrySpec& g,
                       double lambda, int budget) {
    if (budget < 1) throw std::invalid_argument("rerm_solve: budget must be >= 1");
    if (sample.empty()) throw std::invalid_argument("rerm_solve: empty sample");
    if (lambda <= 0.0) throw std::invalid_argument("rerm_solve: lambda must be positive");

    if (all_linear(sample) && (g.constraint.kind == Constraint::Kind::L2Ball ||
                               g.constraint.kind == Constraint::Kind::None)) {
        // average the linear parts: minimize <xbar,h> + lambda/2 ||h||^2, a
        // radial problem with closed form proj(-xbar/lambda)
        Point xbar = zeros(g.d);
        for (const auto& z : sample) axpy(1.0, std::get<loss::Linear>(z).x, xbar);
        scale(xbar, 1.0 / static_cast<double>(sample.size()));
        scale(xbar, -1.0 / lambda);
        Point h = geom::project(g, xbar);
        return {h, 0.0};
    }

    auto objective = [&](const Point& h) {
        double n2 = norm2(h);
        return empirical_value(sample, h) + 0.5 * lambda * n2 * n2;
    };

    Point h = geom::argmin_psi(g);
    Point sum = zeros(g.d);
    int tail = 0;
    for (int t = 1; t <= budget; ++t) {
        Point grad = empirical_subgrad(sample, h);
        axpy(lambda, h, grad);
        axpy(-1.0 / (lambda * static_cast<double>(t)), grad, h);
        h = geom::project(g, h);
        if (t > budget / 2) {
            axpy(1.0, h, sum);
            ++tail;
        }
    }
    scale(sum, 1.0 / static_cast<double>(std::max(tail, 1)));
    double sub = objective(sum) - objective(h);
    Point out = sub <= 0.0 ? sum : h;
    return {out, std::abs(sub)};
}

}  // namespace oco::md
