#include "oco/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace oco::loss {

namespace {

double sign0(double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
    return 0.0;
}

void check_mask(const Point& x, const std::vector<std::uint8_t>& mask, const char* where) {
    if (x.size() != mask.size())
        throw std::invalid_argument(std::string(where) + ": mask/vector dimension mismatch");
    for (auto m : mask)
        if (m > 1) throw std::invalid_argument(std::string(where) + ": mask entries must be 0/1");
}

double bias_term(const Point& h, double eps) {
    // sum_i 2^{-i} (h[i]-1)^2, i starting at 1
    double w = 0.5, s = 0.0;
    for (double v : h) {
        double dlt = v - 1.0;
        s += w * dlt * dlt;
        w *= 0.5;
    }
    return eps * s;
}

void add_bias_grad(const Point& h, double eps, Point& grad) {
    double w = 0.5;
    for (std::size_t i = 0; i < h.size(); ++i) {
        grad[i] += eps * w * 2.0 * (h[i] - 1.0);
        w *= 0.5;
    }
}

}  // namespace

Regularized make_regularized(LossInstance inner, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("Regularized: lambda must be positive");
    Regularized r;
    r.inner = std::make_shared<LossInstanceBox>(LossInstanceBox{std::move(inner)});
    r.lambda = lambda;
    return r;
}

std::size_t dim(const LossInstance& z) {
    return std::visit(
        [](const auto& v) -> std::size_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Regularized>) {
                return dim(v.inner->z);
            } else if constexpr (std::is_same_v<T, MaxOfSignedLinear>) {
                if (v.pieces.empty())
                    throw std::invalid_argument("MaxOfSignedLinear: needs at least one piece");
                return v.pieces.front().x.size();
            } else {
                return v.x.size();
            }
        },
        z);
}

LossEval eval(const LossInstance& z, const Point& h) {
    const std::size_t d = dim(z);
    check_dim(h, d, "eval");

    return std::visit(
        [&](const auto& v) -> LossEval {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Linear>) {
                return {dot(v.x, h), v.x};
            } else if constexpr (std::is_same_v<T, AbsSupervised>) {
                double margin = dot(h, v.x) - v.y;
                Point g = v.x;
                scale(g, sign0(margin));
                return {std::abs(margin), g};
            } else if constexpr (std::is_same_v<T, SmoothedAbs>) {
                double margin = dot(h, v.x) - v.y;
                double a = std::abs(margin);
                double value, slope;
                if (a <= 0.5) {
                    value = margin * margin;
                    slope = 2.0 * margin;
                } else {
                    value = a - 0.25;
                    slope = sign0(margin);
                }
                Point g = v.x;
                scale(g, slope);
                return {value, g};
            } else if constexpr (std::is_same_v<T, HiddenCoord>) {
                check_mask(v.x, v.mask, "eval");
                double s = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    if (!v.mask[i]) continue;
                    double dlt = h[i] - v.x[i];
                    s += dlt * dlt;
                }
                double value = std::sqrt(s);
                Point g(d, 0.0);
                if (value > 0.0) {
                    for (std::size_t i = 0; i < d; ++i) {
                        if (!v.mask[i]) continue;
                        g[i] = (h[i] - v.x[i]) / value;
                    }
                }
                return {value, g};
            } else if constexpr (std::is_same_v<T, HiddenCoordBiased>) {
                HiddenCoord base{v.x, v.mask};
                LossEval e = eval(LossInstance{base}, h);
                e.value += bias_term(h, v.eps_bias);
                add_bias_grad(h, v.eps_bias, e.subgrad);
                return e;
            } else if constexpr (std::is_same_v<T, Regularized>) {
                LossEval e = eval(v.inner->z, h);
                double n = norm2(h);
                e.value += 0.5 * v.lambda * n * n;
                axpy(v.lambda, h, e.subgrad);
                return e;
            } else {  // MaxOfSignedLinear
                if (v.pieces.empty())
                    throw std::invalid_argument("MaxOfSignedLinear: needs at least one piece");
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_i = 0;
                for (std::size_t i = 0; i < v.pieces.size(); ++i) {
                    const auto& pc = v.pieces[i];
                    double val = pc.sign * (pc.s - dot(h, pc.x));
                    if (val > best) {
                        best = val;
                        best_i = i;
                    }
                }
                const auto& pc = v.pieces[best_i];
                Point g = pc.x;
                scale(g, -static_cast<double>(pc.sign));
                return {best, g};
            }
        },
        z);
}

double lipschitz_bound(const LossInstance& z, const geom::GeometrySpec& g) {
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Linear>) {
                return geom::dual_norm(g, v.x);
            } else if constexpr (std::is_same_v<T, AbsSupervised> ||
                                 std::is_same_v<T, SmoothedAbs>) {
                return geom::dual_norm(g, v.x);
            } else if constexpr (std::is_same_v<T, HiddenCoord>) {
                double m = 0.0;
                for (auto b : v.mask) m = std::max(m, static_cast<double>(b));
                return m;
            } else if constexpr (std::is_same_v<T, HiddenCoordBiased>) {
                // masked-norm part <= 1; bias gradient 2 eps 2^{-i}(h_i - 1)
                // has l2 norm < 2 eps sqrt(2) sqrt(sum 4^{-i}) < 2 eps on the
                // unit ball; 1 + 2 eps is a safe closed form.
                return 1.0 + 2.0 * v.eps_bias;
            } else if constexpr (std::is_same_v<T, Regularized>) {
                double radius = 0.0;
                using CK = geom::Constraint::Kind;
                if (g.constraint.kind != CK::None) radius = g.constraint.radius;
                if (g.constraint.kind == CK::Simplex) radius = 1.0;
                return lipschitz_bound(v.inner->z, g) + v.lambda * radius;
            } else {  // MaxOfSignedLinear
                double m = 0.0;
                for (const auto& pc : v.pieces) m = std::max(m, geom::dual_norm(g, pc.x));
                return m;
            }
        },
        z);
}

std::optional<double> smoothness_constant(const LossInstance& z, const geom::GeometrySpec& g) {
    if (const auto* s = std::get_if<SmoothedAbs>(&z)) {
        double n = geom::dual_norm(g, s->x);
        return n * n;
    }
    return std::nullopt;
}

}  // namespace oco::loss
