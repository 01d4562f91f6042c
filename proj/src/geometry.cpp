#include "oco/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "oco/errors.hpp"
#include "oco/tolerances.hpp"

namespace oco::geom {

namespace {

double conjugate_exponent(double p) {
    if (std::isinf(p)) return 1.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return p / (p - 1.0);
}

void check_point(const GeometrySpec& g, const Point& h, const char* where) {
    check_dim(h, static_cast<std::size_t>(g.d), where);
    if (!all_finite(h)) throw std::invalid_argument(std::string(where) + ": non-finite entry");
}

void check_entropic_domain(const Point& h, const char* where) {
    double sum = 0.0;
    for (double v : h) {
        if (v <= 0.0)
            throw std::domain_error(std::string(where) +
                                    ": entropic proxy needs strictly positive coordinates");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::domain_error(std::string(where) + ": entropic proxy needs a simplex point");
}

// sup of ||h||_r over the l_p ball of given radius.
double sup_lr_over_lp_ball(double r, double p, double radius, int d) {
    double gap = std::max(1.0 / r - 1.0 / p, 0.0);
    return radius * std::pow(static_cast<double>(d), gap);
}

// Euclidean projection onto { h : ||h||_1 <= radius } by sort and threshold.
Point project_l1_ball(const Point& h, double radius) {
    if (norm1(h) <= radius) return h;
    Point mag(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) mag[i] = std::abs(h[i]);
    std::sort(mag.begin(), mag.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < mag.size(); ++j) {
        cum += mag[j];
        double cand = (cum - radius) / static_cast<double>(j + 1);
        if (mag[j] - cand > 0.0) theta = cand;
    }
    Point out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        double v = std::abs(h[i]) - theta;
        out[i] = v > 0.0 ? (h[i] > 0.0 ? v : -v) : 0.0;
    }
    return out;
}

// Euclidean projection onto the probability simplex.
Point project_simplex_euclidean(const Point& h) {
    Point u = h;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        double cand = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - cand > 0.0) theta = cand;
    }
    Point out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) out[i] = std::max(h[i] - theta, 0.0);
    return out;
}

// Solve  coef * u^{r-1} + nu * p * u^{p-1} = target  for u >= 0 (monotone LHS).
double solve_coordinate(double coef, double r, double nu, double p, double target) {
    if (target <= 0.0) return 0.0;
    double hi = 1.0;
    auto lhs = [&](double u) {
        return coef * std::pow(u, r - 1.0) + nu * p * std::pow(u, p - 1.0);
    };
    while (lhs(hi) < target) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (lhs(mid) < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < tol().projection * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

static Point project_lp_ball_bregman(const GeometrySpec& g, const Point& h_in, double p,
                                     double radius);

std::string GeometrySpec::id() const {
    std::ostringstream os;
    switch (family) {
        case Family::Euclidean: os << "euclidean"; break;
        case Family::Entropic: os << "entropic"; break;
        case Family::LpProxy: os << "lp(r=" << r << ",scale=" << scale << ")"; break;
    }
    os << "/d=" << d;
    switch (constraint.kind) {
        case Constraint::Kind::None: os << "/free"; break;
        case Constraint::Kind::L2Ball: os << "/l2ball(" << constraint.radius << ")"; break;
        case Constraint::Kind::L1Ball: os << "/l1ball(" << constraint.radius << ")"; break;
        case Constraint::Kind::Simplex: os << "/simplex"; break;
        case Constraint::Kind::LpBall:
            os << "/lpball(" << constraint.p << "," << constraint.radius << ")";
            break;
    }
    return os.str();
}

GeometrySpec GeometrySpec::euclidean(int d, Constraint c) {
    if (d < 1) throw std::invalid_argument("GeometrySpec: d must be >= 1");
    GeometrySpec g;
    g.family = Family::Euclidean;
    g.r = 2.0;
    g.d = d;
    g.q = 2.0;
    g.constraint = c;
    return g;
}

GeometrySpec GeometrySpec::euclidean_ball(int d, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("GeometrySpec: radius must be positive");
    return euclidean(d, Constraint::l2_ball(radius));
}

GeometrySpec GeometrySpec::entropic_simplex(int d) {
    if (d < 1) throw std::invalid_argument("GeometrySpec: d must be >= 1");
    GeometrySpec g;
    g.family = Family::Entropic;
    g.r = 1.0;
    g.d = d;
    g.q = 2.0;
    g.constraint = Constraint::simplex();
    return g;
}

GeometrySpec GeometrySpec::lp_proxy(double r, int d, double scale, Constraint c) {
    if (!(r > 1.0) || std::isinf(r))
        throw std::invalid_argument("GeometrySpec: LpProxy exponent must lie in (1, inf)");
    if (d < 1) throw std::invalid_argument("GeometrySpec: d must be >= 1");
    if (scale < 1.0) throw std::invalid_argument("GeometrySpec: scale must be >= 1");
    GeometrySpec g;
    g.family = Family::LpProxy;
    g.r = r;
    g.d = d;
    g.scale = scale;
    g.q = std::max(r, 2.0);
    g.constraint = c;
    return g;
}

double norm(const GeometrySpec& g, const Point& h) {
    check_point(g, h, "norm");
    switch (g.family) {
        case Family::Euclidean: return norm2(h);
        case Family::Entropic: return norm1(h);
        case Family::LpProxy: return norm_p(h, g.r);
    }
    return 0.0;
}

double dual_norm(const GeometrySpec& g, const Point& x) {
    check_point(g, x, "dual_norm");
    switch (g.family) {
        case Family::Euclidean: return norm2(x);
        case Family::Entropic: return norm_inf(x);
        case Family::LpProxy: return norm_p(x, conjugate_exponent(g.r));
    }
    return 0.0;
}

double psi(const GeometrySpec& g, const Point& h) {
    check_point(g, h, "psi");
    switch (g.family) {
        case Family::Euclidean: {
            double n = norm2(h);
            return 0.5 * n * n;
        }
        case Family::Entropic: {
            check_entropic_domain(h, "psi");
            // shifted by +ln d so the minimum over the simplex is zero
            double s = 0.0;
            for (double v : h) s += v * std::log(std::max(v, tol().entropic_floor));
            return s + std::log(static_cast<double>(g.d));
        }
        case Family::LpProxy: {
            double n = norm_p(h, g.r);
            if (g.r <= 2.0) return g.scale * n * n / (2.0 * (g.r - 1.0));
            return g.scale * std::pow(2.0, g.r) / g.r * std::pow(n, g.r);
        }
    }
    return 0.0;
}

Point grad_psi(const GeometrySpec& g, const Point& h) {
    check_point(g, h, "grad_psi");
    switch (g.family) {
        case Family::Euclidean: return h;
        case Family::Entropic: {
            check_entropic_domain(h, "grad_psi");
            Point out(h.size());
            for (std::size_t i = 0; i < h.size(); ++i)
                out[i] = std::log(std::max(h[i], tol().entropic_floor)) + 1.0;
            return out;
        }
        case Family::LpProxy: {
            Point out(h.size(), 0.0);
            if (g.r <= 2.0) {
                double n = norm_p(h, g.r);
                // zero vector is a valid subgradient of the squared-norm form at 0
                if (n == 0.0) return out;
                double c = g.scale * std::pow(n, 2.0 - g.r) / (g.r - 1.0);
                for (std::size_t i = 0; i < h.size(); ++i) {
                    if (h[i] == 0.0) continue;
                    out[i] = c * std::copysign(std::pow(std::abs(h[i]), g.r - 1.0), h[i]);
                }
            } else {
                double c = g.scale * std::pow(2.0, g.r);
                for (std::size_t i = 0; i < h.size(); ++i) {
                    if (h[i] == 0.0) continue;
                    out[i] = c * std::copysign(std::pow(std::abs(h[i]), g.r - 1.0), h[i]);
                }
            }
            return out;
        }
    }
    return {};
}

Point grad_psi_star(const GeometrySpec& g, const Point& theta) {
    check_point(g, theta, "grad_psi_star");
    switch (g.family) {
        case Family::Euclidean: return theta;
        case Family::Entropic: {
            // softmax, stabilized; lands back on the simplex
            double m = -std::numeric_limits<double>::infinity();
            for (double v : theta) m = std::max(m, v);
            Point out(theta.size());
            double z = 0.0;
            for (std::size_t i = 0; i < theta.size(); ++i) {
                out[i] = std::exp(theta[i] - m);
                z += out[i];
            }
            for (double& v : out) v /= z;
            return out;
        }
        case Family::LpProxy: {
            Point out(theta.size(), 0.0);
            if (g.r <= 2.0) {
                double s = conjugate_exponent(g.r);
                double c = g.scale / (g.r - 1.0);
                double ns = norm_p(theta, s);
                if (ns == 0.0) return out;
                double mult = std::pow(ns, 2.0 - s) / c;
                for (std::size_t i = 0; i < theta.size(); ++i) {
                    if (theta[i] == 0.0) continue;
                    out[i] = mult * std::copysign(std::pow(std::abs(theta[i]), s - 1.0), theta[i]);
                }
            } else {
                double c = g.scale * std::pow(2.0, g.r);
                for (std::size_t i = 0; i < theta.size(); ++i) {
                    if (theta[i] == 0.0) continue;
                    out[i] = std::copysign(std::pow(std::abs(theta[i]) / c, 1.0 / (g.r - 1.0)),
                                           theta[i]);
                }
            }
            return out;
        }
    }
    return {};
}

double bregman(const GeometrySpec& g, const Point& h, const Point& h0) {
    check_point(g, h, "bregman");
    check_point(g, h0, "bregman");
    Point grad = grad_psi(g, h0);
    double v = psi(g, h) - psi(g, h0);
    for (std::size_t i = 0; i < h.size(); ++i) v -= grad[i] * (h[i] - h0[i]);
    return v;
}

Point project(const GeometrySpec& g, const Point& h) {
    check_point(g, h, "project");
    const Constraint& c = g.constraint;
    if (c.kind == Constraint::Kind::None) return h;

    switch (g.family) {
        case Family::Euclidean:
            switch (c.kind) {
                case Constraint::Kind::L2Ball: {
                    double n = norm2(h);
                    if (n <= c.radius) return h;
                    Point out = h;
                    scale(out, c.radius / n);
                    return out;
                }
                case Constraint::Kind::L1Ball: return project_l1_ball(h, c.radius);
                case Constraint::Kind::Simplex: return project_simplex_euclidean(h);
                default: break;
            }
            break;
        case Family::Entropic:
            if (c.kind == Constraint::Kind::Simplex) {
                double sum = 0.0;
                for (double v : h) {
                    if (v < 0.0)
                        throw std::domain_error("project: entropic projection needs nonnegative mass");
                    sum += v;
                }
                if (sum <= 0.0)
                    throw std::domain_error("project: entropic projection of all-zero mass");
                Point out = h;
                scale(out, 1.0 / sum);
                return out;
            }
            break;
        case Family::LpProxy:
            if (c.kind == Constraint::Kind::LpBall || c.kind == Constraint::Kind::L2Ball ||
                c.kind == Constraint::Kind::L1Ball) {
                double p = c.kind == Constraint::Kind::LpBall ? c.p
                           : c.kind == Constraint::Kind::L2Ball ? 2.0
                                                                : 1.0;
                if (norm_p(h, p) <= c.radius) return h;
                if (std::abs(p - g.r) < 1e-12) {
                    // same exponent: the Bregman projection is a radial rescale
                    Point out = h;
                    scale(out, c.radius / norm_p(h, g.r));
                    return out;
                }
                return project_lp_ball_bregman(g, h, p, c.radius);
            }
            break;
    }
    throw std::invalid_argument("project: unsupported geometry/constraint combination for " +
                                g.id());
}

// Bregman projection onto an l_p ball by bisection on the KKT multiplier:
// solve grad_psi(h) + nu p sign(h)|h|^{p-1} = grad_psi(h_in) per coordinate,
// with an inner bisection for the norm coupling when r < 2, and an outer
// bisection driving ||h(nu)||_p to the radius. No closed form exists when the
// constraint exponent differs from the proxy exponent.
static Point project_lp_ball_bregman(const GeometrySpec& g, const Point& h_in, double p,
                                     double radius) {
    Point theta = grad_psi(g, h_in);
    const int d = g.d;
    std::vector<double> mag(d);
    for (int i = 0; i < d; ++i) mag[i] = std::abs(theta[i]);

    auto solve_for_nu = [&](double nu) -> Point {
        Point out(d, 0.0);
        if (g.r > 2.0) {
            double coef = g.scale * std::pow(2.0, g.r);
            for (int i = 0; i < d; ++i) {
                double u = solve_coordinate(coef, g.r, nu, p, mag[i]);
                out[i] = std::copysign(u, theta[i]);
            }
            return out;
        }
        // r in (1,2]: coefficient depends on N = ||h||_r; N -> ||h(N)||_r is
        // decreasing, so bisect on N.
        double c0 = g.scale / (g.r - 1.0);
        auto norm_given = [&](double N) {
            double coef = c0 * std::pow(N, 2.0 - g.r);
            double acc = 0.0;
            for (int i = 0; i < d; ++i) {
                double u = solve_coordinate(coef, g.r, nu, p, mag[i]);
                acc += std::pow(u, g.r);
            }
            return std::pow(acc, 1.0 / g.r);
        };
        double hi = std::max(norm_p(grad_psi_star(g, theta), g.r), 1e-6);
        while (norm_given(hi) > hi) hi *= 2.0;
        double lo = hi * 1e-12;
        for (int it = 0; it < tol().projection_max_iter; ++it) {
            double mid = 0.5 * (lo + hi);
            if (norm_given(mid) > mid)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < tol().projection * std::max(1.0, hi)) break;
        }
        double N = 0.5 * (lo + hi);
        double coef = c0 * std::pow(N, 2.0 - g.r);
        Point out2(d, 0.0);
        for (int i = 0; i < d; ++i) {
            double u = solve_coordinate(coef, g.r, nu, p, mag[i]);
            out2[i] = std::copysign(u, theta[i]);
        }
        return out2;
    };

    double nu_hi = 1.0;
    while (norm_p(solve_for_nu(nu_hi), p) > radius) nu_hi *= 2.0;
    double nu_lo = 0.0;
    Point best = solve_for_nu(nu_hi);
    for (int it = 0; it < tol().projection_max_iter; ++it) {
        double mid = 0.5 * (nu_lo + nu_hi);
        Point cand = solve_for_nu(mid);
        double n = norm_p(cand, p);
        if (n > radius) {
            nu_lo = mid;
        } else {
            nu_hi = mid;
            best = std::move(cand);
        }
        if (std::abs(n - radius) < tol().projection) break;
    }
    return best;
}

double sup_psi(const GeometrySpec& g) {
    const Constraint& c = g.constraint;
    if (c.kind == Constraint::Kind::None)
        throw UnboundedError("sup_psi: proxy is unbounded without a constraint");
    switch (g.family) {
        case Family::Euclidean: {
            double m = 0.0;
            switch (c.kind) {
                case Constraint::Kind::L2Ball: m = c.radius; break;
                case Constraint::Kind::L1Ball: m = c.radius; break;
                case Constraint::Kind::Simplex: m = 1.0; break;
                case Constraint::Kind::LpBall:
                    m = sup_lr_over_lp_ball(2.0, c.p, c.radius, g.d);
                    break;
                default: break;
            }
            return 0.5 * m * m;
        }
        case Family::Entropic:
            if (c.kind == Constraint::Kind::Simplex) return std::log(static_cast<double>(g.d));
            break;
        case Family::LpProxy: {
            double p = 0.0;
            switch (c.kind) {
                case Constraint::Kind::LpBall: p = c.p; break;
                case Constraint::Kind::L2Ball: p = 2.0; break;
                case Constraint::Kind::L1Ball: p = 1.0; break;
                default: p = -1.0; break;
            }
            if (p > 0.0) {
                double m = sup_lr_over_lp_ball(g.r, p, c.radius, g.d);
                if (g.r <= 2.0) return g.scale * m * m / (2.0 * (g.r - 1.0));
                return g.scale * std::pow(2.0, g.r) / g.r * std::pow(m, g.r);
            }
            break;
        }
    }
    throw std::invalid_argument("sup_psi: unsupported geometry/constraint combination for " +
                                g.id());
}

Point argmin_psi(const GeometrySpec& g) {
    const Constraint& c = g.constraint;
    switch (g.family) {
        case Family::Euclidean:
            if (c.kind == Constraint::Kind::Simplex)
                return Point(g.d, 1.0 / static_cast<double>(g.d));
            return zeros(g.d);
        case Family::Entropic: return Point(g.d, 1.0 / static_cast<double>(g.d));
        case Family::LpProxy: return zeros(g.d);
    }
    return zeros(g.d);
}

GeometrySpec lp_pair_geometry(double p1, double p2, int d) {
    if (d < 1) throw std::invalid_argument("lp_pair_geometry: d must be >= 1");
    if (p1 < 1.0 || p2 < 1.0)
        throw std::invalid_argument("lp_pair_geometry: exponents must be >= 1");
    double q2 = conjugate_exponent(p2);

    double r;
    if (q2 <= 1.0 + 1e-12) {
        // data in the l_inf ball; entropy-like proxy exponent
        double ld = std::log(static_cast<double>(d));
        r = ld > 1.5 ? std::min(2.0, ld / (ld - 1.0)) : 2.0;
    } else if (q2 > 2.0) {
        r = 2.0;
    } else if (q2 >= p1) {
        r = q2;
    } else if (p1 <= 2.0) {
        r = p1;
    } else {
        r = q2;
    }

    double q = std::max(r, 2.0);
    double gap = std::max(1.0 / q2 - 1.0 / r, 0.0);
    double s = std::pow(static_cast<double>(d), q * gap);
    return GeometrySpec::lp_proxy(r, d, std::max(s, 1.0), Constraint::lp_ball(p1, 1.0));
}

}  // namespace oco::geom
