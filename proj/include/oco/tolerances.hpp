#ifndef OCO_TOLERANCES_HPP
#define OCO_TOLERANCES_HPP

namespace oco {

// All numeric tolerances in one place.
struct Tolerances {
    double eq = 1e-9;            // generic equality / inequality slack
    double grad_check = 1e-5;    // relative error vs central finite differences
    double conjugacy = 1e-8;     // mirror-map round trip
    double projection = 1e-10;   // KKT residual for iterative projections
    double bregman_floor = -1e-12;
    double entropic_floor = 1e-300;  // floor before taking logs
    int projection_max_iter = 200;
};

inline const Tolerances& tol() {
    static const Tolerances t{};
    return t;
}

}  // namespace oco

#endif
