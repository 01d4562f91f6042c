#ifndef OCO_LOSSES_HPP
#define OCO_LOSSES_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "oco/geometry.hpp"
#include "oco/vec.hpp"

namespace oco::loss {

// Loss instances z, each evaluable for value and one subgradient at a point.

// <x, h>
struct Linear {
    Point x;
};

// |<h, x> - y|,  y in [-1, 1]
struct AbsSupervised {
    Point x;
    double y = 0.0;
};

// phi(<h,x>, y) with phi(z,y) = (z-y)^2 for |z-y| <= 1/2, |z-y| - 1/4 otherwise.
// Continuous and C^1 across the crossover.
struct SmoothedAbs {
    Point x;
    double y = 0.0;
};

// || mask * (h - x) ||_2 with a 0/1 coordinate mask; the center-finding
// objective with per-coordinate confidences.
struct HiddenCoord {
    Point x;
    std::vector<std::uint8_t> mask;
};

// HiddenCoord plus eps_bias * sum_i 2^{-i} (h[i] - 1)^2 (i is 1-based),
// truncated at the ambient dimension. Strictly convex, so the empirical
// minimizer is unique.
struct HiddenCoordBiased {
    Point x;
    std::vector<std::uint8_t> mask;
    double eps_bias = 0.01;
};

struct LossInstanceBox;

// inner(h) + lambda/2 ||h||_2^2
struct Regularized {
    std::shared_ptr<const LossInstanceBox> inner;
    double lambda = 0.0;
};

// max_i eps_i (<h, -x_i> + s_i); argmax ties break toward the lowest piece
// index so the adversary's piece selection is deterministic.
struct MaxOfSignedLinear {
    struct Piece {
        int sign = 1;  // +1 or -1
        Point x;
        double s = 0.0;
    };
    std::vector<Piece> pieces;
};

using LossInstance = std::variant<Linear, AbsSupervised, SmoothedAbs, HiddenCoord,
                                  HiddenCoordBiased, Regularized, MaxOfSignedLinear>;

struct LossInstanceBox {
    LossInstance z;
};

Regularized make_regularized(LossInstance inner, double lambda);

struct LossEval {
    double value = 0.0;
    Point subgrad;
};

std::size_t dim(const LossInstance& z);

// Value and one subgradient. Kink conventions: sign(0) := 0 for the
// supervised absolute loss; the masked-norm losses return the zero vector at
// their kink; MaxOfSignedLinear uses the lowest tied piece.
LossEval eval(const LossInstance& z, const Point& h);

// Conservative closed-form upper bound on the dual norm of any subgradient
// over the geometry's constraint set. Overestimates are safe (feeds step
// sizes); never a sampled estimate.
double lipschitz_bound(const LossInstance& z, const geom::GeometrySpec& g);

// Smoothness constant H in the self-bounding sense ||grad|| <= sqrt(4 H loss);
// only the smoothed losses are classified.
std::optional<double> smoothness_constant(const LossInstance& z, const geom::GeometrySpec& g);

}  // namespace oco::loss

#endif
