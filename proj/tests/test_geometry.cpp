#include "oco/geometry.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "oco/errors.hpp"
#include "oco/rng.hpp"
#include "oco/tolerances.hpp"

using namespace oco;
using geom::Constraint;
using geom::GeometrySpec;

namespace {

// central finite differences of psi; the independent oracle for gradients
Point fd_grad(const GeometrySpec& g, const Point& h, double step = 1e-6) {
    Point out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        Point hp = h, hm = h;
        hp[i] += step;
        hm[i] -= step;
        out[i] = (geom::psi(g, hp) - geom::psi(g, hm)) / (2.0 * step);
    }
    return out;
}

Point random_interior(const GeometrySpec& g, Rng& rng) {
    Point h(g.d);
    switch (g.family) {
        case geom::Family::Euclidean:
            for (auto& v : h) v = 2.0 * uniform01(rng) - 1.0;
            return h;
        case geom::Family::Entropic: {
            double s = 0.0;
            for (auto& v : h) {
                v = 0.05 + uniform01(rng);
                s += v;
            }
            for (auto& v : h) v /= s;
            return h;
        }
        case geom::Family::LpProxy:
            // keep coordinates away from the |h_i|^{r-1} kink at zero
            for (auto& v : h) {
                double u = 0.05 + 0.9 * uniform01(rng);
                v = (rng() & 1u) ? u : -u;
            }
            return h;
    }
    return h;
}

std::vector<GeometrySpec> test_geometries() {
    return {
        GeometrySpec::euclidean_ball(4, 1.0),
        GeometrySpec::entropic_simplex(4),
        GeometrySpec::lp_proxy(1.5, 4, 1.0, Constraint::lp_ball(1.5, 1.0)),
        GeometrySpec::lp_proxy(3.0, 4, 1.0, Constraint::lp_ball(3.0, 1.0)),
        GeometrySpec::lp_proxy(1.5, 4, 2.0, Constraint::lp_ball(2.0, 1.0)),
    };
}

}  // namespace

TEST(Norm, Examples) {
    auto ge = GeometrySpec::euclidean(2);
    EXPECT_DOUBLE_EQ(geom::norm(ge, {3.0, 4.0}), 5.0);
    auto g1 = GeometrySpec::entropic_simplex(2);
    EXPECT_DOUBLE_EQ(geom::norm(g1, {1.0, -1.0}), 2.0);
    auto gl = GeometrySpec::lp_proxy(1.5, 2);
    EXPECT_DOUBLE_EQ(geom::norm(gl, {1.0, 0.0}), 1.0);
}

TEST(Norm, DimensionMismatchThrows) {
    auto g = GeometrySpec::euclidean(3);
    EXPECT_THROW(geom::norm(g, {1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(geom::dual_norm(g, {1.0}), std::invalid_argument);
}

TEST(DualNorm, Examples) {
    auto ge = GeometrySpec::euclidean(2);
    EXPECT_DOUBLE_EQ(geom::dual_norm(ge, {3.0, 4.0}), 5.0);
    auto g1 = GeometrySpec::entropic_simplex(2);
    EXPECT_DOUBLE_EQ(geom::dual_norm(g1, {1.0, -1.0}), 1.0);
    auto gl = GeometrySpec::lp_proxy(1.5, 2);
    EXPECT_DOUBLE_EQ(geom::dual_norm(gl, {1.0, 0.0}), 1.0);
}

TEST(DualNorm, HolderOnRandomPairs) {
    Rng rng(7);
    for (const auto& g : test_geometries()) {
        for (int it = 0; it < 200; ++it) {
            Point h = random_interior(g, rng);
            Point x = random_interior(g, rng);
            EXPECT_LE(std::abs(dot(h, x)),
                      geom::norm(g, h) * geom::dual_norm(g, x) + 1e-12);
        }
    }
}

TEST(Psi, Examples) {
    auto ge = GeometrySpec::euclidean(2);
    EXPECT_DOUBLE_EQ(geom::psi(ge, {1.0, 1.0}), 1.0);
    auto g15 = GeometrySpec::lp_proxy(1.5, 2);
    EXPECT_NEAR(geom::psi(g15, {1.0, 0.0}), 1.0, 1e-12);
    auto g3 = GeometrySpec::lp_proxy(3.0, 2);
    EXPECT_NEAR(geom::psi(g3, {1.0, 0.0}), 8.0 / 3.0, 1e-12);
}

TEST(Psi, EntropicShiftedAndDomainChecked) {
    auto g = GeometrySpec::entropic_simplex(4);
    Point uniform(4, 0.25);
    EXPECT_NEAR(geom::psi(g, uniform), 0.0, 1e-12);
    Point vertexish = {0.97, 0.01, 0.01, 0.01};
    EXPECT_GT(geom::psi(g, vertexish), 0.0);
    EXPECT_THROW(geom::psi(g, {0.5, 0.5, 0.0, 0.0}), std::domain_error);
    EXPECT_THROW(geom::psi(g, {0.5, 0.5, 0.5, -0.5}), std::domain_error);
}

TEST(GradPsi, ExamplesAndFiniteDifferences) {
    auto ge = GeometrySpec::euclidean(3);
    Point h = {0.3, -0.2, 0.9};
    EXPECT_EQ(geom::grad_psi(ge, h), h);

    auto g15 = GeometrySpec::lp_proxy(1.5, 2);
    Point gr = geom::grad_psi(g15, {1.0, 0.0});
    EXPECT_NEAR(gr[0], 2.0, 1e-9);
    EXPECT_NEAR(gr[1], 0.0, 1e-9);

    auto gent = GeometrySpec::entropic_simplex(2);
    Point ge2 = geom::grad_psi(gent, {0.5, 0.5});
    EXPECT_NEAR(ge2[0], std::log(0.5) + 1.0, 1e-12);
    EXPECT_NEAR(ge2[1], std::log(0.5) + 1.0, 1e-12);
}

TEST(GradPsi, MatchesCentralDifferencesOnRandomPoints) {
    Rng rng(11);
    for (const auto& g : test_geometries()) {
        if (g.family == geom::Family::Entropic) continue;  // simplex handled below
        for (int it = 0; it < 1000; ++it) {
            Point h = random_interior(g, rng);
            Point analytic = geom::grad_psi(g, h);
            Point numeric = fd_grad(g, h);
            for (std::size_t i = 0; i < h.size(); ++i) {
                double denom = std::max(std::abs(analytic[i]), 1.0);
                EXPECT_NEAR(analytic[i], numeric[i], 1e-5 * denom)
                    << g.id() << " coord " << i;
            }
        }
    }
}

TEST(GradPsi, EntropicDirectionalDerivativeOnSimplex) {
    // simplex-tangent directional check: off-simplex steps leave the domain
    auto g = GeometrySpec::entropic_simplex(4);
    Rng rng(13);
    for (int it = 0; it < 1000; ++it) {
        Point h = random_interior(g, rng);
        Point dir(4);
        double s = 0.0;
        for (auto& v : dir) {
            v = 2.0 * uniform01(rng) - 1.0;
            s += v;
        }
        for (auto& v : dir) v -= s / 4.0;  // tangent to the simplex
        double step = 1e-6;
        Point hp = h, hm = h;
        axpy(step, dir, hp);
        axpy(-step, dir, hm);
        double numeric = (geom::psi(g, hp) - geom::psi(g, hm)) / (2.0 * step);
        double analytic = dot(geom::grad_psi(g, h), dir);
        EXPECT_NEAR(analytic, numeric, 1e-5 * std::max(std::abs(analytic), 1.0));
    }
}

TEST(GradPsiStar, ExamplesAndRoundTrip) {
    auto ge = GeometrySpec::euclidean(2);
    Point theta = {0.4, -0.7};
    EXPECT_EQ(geom::grad_psi_star(ge, theta), theta);

    auto gent = GeometrySpec::entropic_simplex(2);
    Point u = geom::grad_psi_star(gent, {0.0, 0.0});
    EXPECT_NEAR(u[0], 0.5, 1e-12);
    EXPECT_NEAR(u[1], 0.5, 1e-12);

    auto g15 = GeometrySpec::lp_proxy(1.5, 2);
    Point back = geom::grad_psi_star(g15, {2.0, 0.0});
    EXPECT_NEAR(back[0], 1.0, 1e-8);
    EXPECT_NEAR(back[1], 0.0, 1e-8);
}

TEST(GradPsiStar, ConjugacyRoundTripOnRandomPoints) {
    Rng rng(17);
    for (const auto& g : test_geometries()) {
        for (int it = 0; it < 1000; ++it) {
            Point h = random_interior(g, rng);
            Point back = geom::grad_psi_star(g, geom::grad_psi(g, h));
            for (std::size_t i = 0; i < h.size(); ++i)
                EXPECT_NEAR(back[i], h[i], 1e-8) << g.id();
        }
    }
}

TEST(Bregman, Examples) {
    auto ge = GeometrySpec::euclidean(2);
    EXPECT_NEAR(geom::bregman(ge, {1.0, 0.0}, {0.0, 0.0}), 0.5, 1e-12);

    for (const auto& g : test_geometries()) {
        Rng rng(23);
        Point h = random_interior(g, rng);
        EXPECT_NEAR(geom::bregman(g, h, h), 0.0, 1e-12) << g.id();
    }

    // direct KL evaluation as the oracle
    auto gent = GeometrySpec::entropic_simplex(2);
    Point a = {0.25, 0.75}, b = {0.5, 0.5};
    double kl = 0.25 * std::log(0.25 / 0.5) + 0.75 * std::log(0.75 / 0.5);
    EXPECT_NEAR(geom::bregman(gent, a, b), kl, 1e-12);
    EXPECT_NEAR(kl, 0.1308120359411371, 1e-12);
}

TEST(Bregman, NonNegativeOnRandomPairs) {
    Rng rng(29);
    for (const auto& g : test_geometries()) {
        for (int it = 0; it < 1000; ++it) {
            Point h = random_interior(g, rng);
            Point h0 = random_interior(g, rng);
            EXPECT_GE(geom::bregman(g, h, h0), -1e-12) << g.id();
        }
    }
}

TEST(Project, RadialAndSimplexExamples) {
    auto ge = GeometrySpec::euclidean_ball(2, 1.0);
    Point p = geom::project(ge, {3.0, 4.0});
    EXPECT_NEAR(p[0], 0.6, 1e-12);
    EXPECT_NEAR(p[1], 0.8, 1e-12);

    auto gent = GeometrySpec::entropic_simplex(2);
    Point q = geom::project(gent, {2.0, 2.0});
    EXPECT_NEAR(q[0], 0.5, 1e-12);
    EXPECT_NEAR(q[1], 0.5, 1e-12);
    EXPECT_THROW(geom::project(gent, {0.0, 0.0}), std::domain_error);
}

TEST(Project, L1BallAgainstGridSearch) {
    auto g = GeometrySpec::euclidean(2, Constraint::l1_ball(1.0));
    Point h = {0.8, 0.6};
    Point p = geom::project(g, h);
    EXPECT_NEAR(p[0], 0.6, 1e-9);
    EXPECT_NEAR(p[1], 0.4, 1e-9);

    // brute-force grid over the l1 ball at resolution 1e-3
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        Point target = {3.0 * uniform01(rng) - 1.5, 3.0 * uniform01(rng) - 1.5};
        Point proj = geom::project(g, target);
        double best = std::numeric_limits<double>::infinity();
        const double step = 1e-3;
        for (double a = -1.0; a <= 1.0 + 1e-12; a += step) {
            double rem = 1.0 - std::abs(a);
            for (double b = -rem; b <= rem + 1e-12; b += step) {
                double da = a - target[0], db = b - target[1];
                best = std::min(best, da * da + db * db);
            }
        }
        double da = proj[0] - target[0], db = proj[1] - target[1];
        double got = da * da + db * db;
        EXPECT_LE(got, best + 5e-3);  // grid resolution slack
        EXPECT_LE(norm1(proj), 1.0 + 1e-12);
    }
}

TEST(Project, EuclideanSimplexAgainstGridSearch) {
    auto g = GeometrySpec::euclidean(2, Constraint::simplex());
    Rng rng(59);
    for (int trial = 0; trial < 5; ++trial) {
        Point target = {3.0 * uniform01(rng) - 1.5, 3.0 * uniform01(rng) - 1.5};
        Point proj = geom::project(g, target);
        EXPECT_NEAR(proj[0] + proj[1], 1.0, 1e-12);
        EXPECT_GE(proj[0], -1e-12);
        EXPECT_GE(proj[1], -1e-12);
        double best = std::numeric_limits<double>::infinity();
        for (double a = 0.0; a <= 1.0 + 1e-12; a += 1e-4) {
            double da = a - target[0], db = (1.0 - a) - target[1];
            best = std::min(best, da * da + db * db);
        }
        double da = proj[0] - target[0], db = proj[1] - target[1];
        EXPECT_LE(da * da + db * db, best + 1e-6);
    }
}

TEST(Project, GeneralizedPythagorasOnEuclideanBall) {
    auto g = GeometrySpec::euclidean_ball(3, 1.0);
    Rng rng(37);
    for (int it = 0; it < 500; ++it) {
        Point h(3);
        for (auto& v : h) v = 4.0 * uniform01(rng) - 2.0;
        Point p = geom::project(g, h);
        Point c(3);
        for (auto& v : c) v = 2.0 * uniform01(rng) - 1.0;
        double nc = norm2(c);
        if (nc > 1.0) scale(c, 1.0 / nc);
        auto sq = [](const Point& a, const Point& b) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
            return s;
        };
        EXPECT_GE(sq(c, h), sq(c, p) + sq(p, h) - 1e-9);
    }
}

TEST(Project, LpBallBisectionIsABregmanMinimizer) {
    // r != p: no closed form; check the iterative projection beats random
    // feasible candidates in Bregman divergence and lands on the boundary
    auto g = GeometrySpec::lp_proxy(1.5, 3, 1.0, Constraint::lp_ball(2.5, 1.0));
    Rng rng(41);
    for (int it = 0; it < 20; ++it) {
        Point h(3);
        for (auto& v : h) v = 3.0 * (2.0 * uniform01(rng) - 1.0);
        if (norm_p(h, 2.5) <= 1.0) continue;
        Point p = geom::project(g, h);
        EXPECT_NEAR(norm_p(p, 2.5), 1.0, 1e-6);
        double dp = geom::bregman(g, p, h);
        for (int cand = 0; cand < 200; ++cand) {
            Point c(3);
            for (auto& v : c) v = 2.0 * uniform01(rng) - 1.0;
            double nc = norm_p(c, 2.5);
            if (nc > 1.0) scale(c, (0.999 + 0.001 * uniform01(rng)) / nc);
            EXPECT_GE(geom::bregman(g, c, h), dp - 1e-6);
        }
    }
}

TEST(Project, LpBallBisectionHighExponentProxy) {
    auto g = GeometrySpec::lp_proxy(3.0, 3, 1.0, Constraint::lp_ball(2.0, 1.0));
    Rng rng(53);
    for (int it = 0; it < 10; ++it) {
        Point h(3);
        for (auto& v : h) v = 3.0 * (2.0 * uniform01(rng) - 1.0);
        if (norm2(h) <= 1.0) continue;
        Point p = geom::project(g, h);
        EXPECT_NEAR(norm2(p), 1.0, 1e-6);
        double dp = geom::bregman(g, p, h);
        for (int cand = 0; cand < 200; ++cand) {
            Point c(3);
            for (auto& v : c) v = 2.0 * uniform01(rng) - 1.0;
            double nc = norm2(c);
            if (nc > 1.0) scale(c, 0.999 / nc);
            EXPECT_GE(geom::bregman(g, c, h), dp - 1e-6);
        }
    }
}

TEST(Project, LpBallSameExponentIsRadial) {
    auto g = GeometrySpec::lp_proxy(1.5, 3, 1.0, Constraint::lp_ball(1.5, 1.0));
    Point h = {1.2, -0.7, 0.4};
    Point p = geom::project(g, h);
    double ratio = p[0] / h[0];
    EXPECT_NEAR(p[1] / h[1], ratio, 1e-9);
    EXPECT_NEAR(p[2] / h[2], ratio, 1e-9);
    EXPECT_NEAR(norm_p(p, 1.5), 1.0, 1e-9);
}

TEST(SupPsi, Examples) {
    EXPECT_NEAR(geom::sup_psi(GeometrySpec::euclidean_ball(3, 1.0)), 0.5, 1e-12);
    EXPECT_NEAR(geom::sup_psi(GeometrySpec::entropic_simplex(8)), std::log(8.0), 1e-12);
    auto g = GeometrySpec::lp_proxy(1.5, 4, 1.0, Constraint::lp_ball(1.5, 1.0));
    EXPECT_NEAR(geom::sup_psi(g), 1.0, 1e-12);
    EXPECT_THROW(geom::sup_psi(GeometrySpec::euclidean(3)), UnboundedError);
}

TEST(SupPsi, NumericMaximizationNeverExceedsClosedForm) {
    Rng rng(43);
    for (const auto& g : test_geometries()) {
        double sup = geom::sup_psi(g);
        for (int it = 0; it < 4000; ++it) {
            Point h(g.d);
            if (g.family == geom::Family::Entropic) {
                for (auto& v : h) v = 1e-9 + uniform01(rng);
            } else {
                for (auto& v : h) v = 2.0 * uniform01(rng) - 1.0;
            }
            Point inside = geom::project(g, h);
            EXPECT_LE(geom::psi(g, inside), sup + 1e-9) << g.id();
        }
    }
}

TEST(UniformConvexity, CertificateHolds) {
    // psi(ah + (1-a)h') <= a psi(h) + (1-a) psi(h')
    //                      - a(1-a)/q ||h - h'||^q  (+ tolerance)
    Rng rng(47);
    for (const auto& g : test_geometries()) {
        for (int it = 0; it < 1000; ++it) {
            Point h = random_interior(g, rng);
            Point hp = random_interior(g, rng);
            double a = uniform01(rng);
            Point mix(h.size());
            for (std::size_t i = 0; i < h.size(); ++i) mix[i] = a * h[i] + (1 - a) * hp[i];
            if (g.family == geom::Family::Entropic) {
                // mixture of simplex points stays on the simplex
            }
            Point diff(h.size());
            for (std::size_t i = 0; i < h.size(); ++i) diff[i] = h[i] - hp[i];
            double mod = a * (1 - a) / g.q * std::pow(geom::norm(g, diff), g.q);
            EXPECT_LE(geom::psi(g, mix),
                      a * geom::psi(g, h) + (1 - a) * geom::psi(g, hp) - mod + 1e-9)
                << g.id();
        }
    }
}

TEST(LpPairGeometry, TableRowLogic) {
    // dual-ish data with small exponent: r = 2, no dimension factor
    auto g1 = geom::lp_pair_geometry(2.0, 1.5, 16);
    EXPECT_DOUBLE_EQ(g1.r, 2.0);
    EXPECT_DOUBLE_EQ(g1.scale, 1.0);

    // q2 in [p1, 2]: r = q2 (p2 = 3 -> q2 = 1.5)
    auto g2 = geom::lp_pair_geometry(1.2, 3.0, 16);
    EXPECT_NEAR(g2.r, 1.5, 1e-12);
    EXPECT_DOUBLE_EQ(g2.scale, 1.0);

    // q2 < p1 <= 2: r = p1 with the dimension factor d^{2(1/q2 - 1/p1)}
    auto g3 = geom::lp_pair_geometry(2.0, 8.0, 16);
    EXPECT_DOUBLE_EQ(g3.r, 2.0);
    double expected = std::pow(16.0, 2.0 * (1.0 / (8.0 / 7.0) - 0.5));
    EXPECT_NEAR(g3.scale, expected, 1e-9);

    // p1 > 2, p2 >= 2: r = q2 <= 2
    auto g4 = geom::lp_pair_geometry(4.0, 4.0, 16);
    EXPECT_NEAR(g4.r, 4.0 / 3.0, 1e-12);
    EXPECT_GE(g4.scale, 1.0);

    // p2 = inf: entropy-like exponent, r in (1, 2]
    auto g5 = geom::lp_pair_geometry(1.0, std::numeric_limits<double>::infinity(), 64);
    EXPECT_GT(g5.r, 1.0);
    EXPECT_LE(g5.r, 2.0);
    EXPECT_GE(g5.scale, 1.0);
}
