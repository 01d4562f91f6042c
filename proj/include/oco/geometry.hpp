#ifndef OCO_GEOMETRY_HPP
#define OCO_GEOMETRY_HPP

#include <optional>
#include <string>

#include "oco/vec.hpp"

namespace oco::geom {

enum class Family { Euclidean, Entropic, LpProxy };

struct Constraint {
    enum class Kind { None, L2Ball, L1Ball, Simplex, LpBall };
    Kind kind = Kind::None;
    double radius = 0.0;  // L2Ball / L1Ball / LpBall
    double p = 2.0;       // LpBall only

    static Constraint none() { return {Kind::None, 0.0, 2.0}; }
    static Constraint l2_ball(double radius) { return {Kind::L2Ball, radius, 2.0}; }
    static Constraint l1_ball(double radius) { return {Kind::L1Ball, radius, 1.0}; }
    static Constraint simplex() { return {Kind::Simplex, 1.0, 1.0}; }
    static Constraint lp_ball(double p, double radius) { return {Kind::LpBall, radius, p}; }
};

// A norm family plus proxy function bundle: value, mirror maps, Bregman
// divergence, projection and the uniform-convexity exponent q.
//
// Families:
//   Euclidean  psi(h) = 1/2 ||h||_2^2                      q = 2
//   Entropic   psi(h) = sum_i h_i ln h_i + ln d            q = 2 (vs ||.||_1)
//   LpProxy    psi_r(h) = ||h||_r^2 / (2(r-1))   r in (1,2]
//              psi_r(h) = (2^r/r) ||h||_r^r      r in (2,inf)   q = max(r,2)
// The LpProxy value is multiplied by `scale` >= 1 (dimension factor for
// non-dual data/hypothesis norm pairs).
struct GeometrySpec {
    Family family = Family::Euclidean;
    double r = 2.0;      // LpProxy exponent, in (1, inf)
    int d = 1;           // dimension
    double scale = 1.0;  // >= 1
    double q = 2.0;      // uniform-convexity exponent, = max(r, 2)
    Constraint constraint = Constraint::none();

    std::string id() const;

    static GeometrySpec euclidean(int d, Constraint c = Constraint::none());
    static GeometrySpec euclidean_ball(int d, double radius = 1.0);
    static GeometrySpec entropic_simplex(int d);
    static GeometrySpec lp_proxy(double r, int d, double scale = 1.0,
                                 Constraint c = Constraint::none());
};

// Primal norm of the geometry's family (l2, l1 or l_r).
double norm(const GeometrySpec& g, const Point& h);

// Dual norm, with the l_r <-> l_{r/(r-1)} pairing.
double dual_norm(const GeometrySpec& g, const Point& x);

// Proxy function value. Non-negative, zero at its constrained argmin.
double psi(const GeometrySpec& g, const Point& h);

// Exact gradient of psi (mirror map).
Point grad_psi(const GeometrySpec& g, const Point& h);

// Inverse mirror map: grad_psi_star(grad_psi(h)) == h on the unconstrained
// domain (for Entropic, on the simplex).
Point grad_psi_star(const GeometrySpec& g, const Point& theta);

// psi(h) - psi(h0) - <grad psi(h0), h - h0>; >= 0 up to round-off.
double bregman(const GeometrySpec& g, const Point& h, const Point& h0);

// Bregman projection onto g.constraint.
Point project(const GeometrySpec& g, const Point& h);

// Closed-form supremum of psi over the constraint set.
double sup_psi(const GeometrySpec& g);

// Point minimizing psi over the constraint set (the canonical start point).
Point argmin_psi(const GeometrySpec& g);

// Picks the proxy exponent r, scale factor and q for a hypothesis set that is
// the unit l_{p1} ball with data in the unit l_{p2} ball:
//   r = 2        when the dual data exponent q2 = p2/(p2-1) exceeds 2,
//   r = q2       when q2 in [p1, 2],
//   r = p1       when q2 < p1 (scale carries the dimension factor),
//   r = ln d/(ln d - 1) when p2 = inf (entropy-like regime).
// scale = d^{q * max(1/q2 - 1/r, 0)} so that scale * psi_r is q-uniformly
// convex with respect to the l_{q2} norm.
GeometrySpec lp_pair_geometry(double p1, double p2, int d);

}  // namespace oco::geom

#endif
