#ifndef OCO_VEC_HPP
#define OCO_VEC_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oco {

// Dense real vector. Hypotheses and data vectors both live here.
using Point = std::vector<double>;

inline void check_dim(const Point& a, std::size_t d, const char* where) {
    if (a.size() != d) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
    }
}

inline double dot(const Point& a, const Point& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Point& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline double norm1(const Point& a) {
    double s = 0.0;
    for (double v : a) s += std::abs(v);
    return s;
}

inline double norm_inf(const Point& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline double norm_p(const Point& a, double p) {
    if (p <= 0) throw std::invalid_argument("norm_p: p must be positive");
    if (std::isinf(p)) return norm_inf(a);
    if (p == 1.0) return norm1(a);
    if (p == 2.0) return norm2(a);
    double s = 0.0;
    for (double v : a) s += std::pow(std::abs(v), p);
    return std::pow(s, 1.0 / p);
}

// y += c * x
inline void axpy(double c, const Point& x, Point& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline void scale(Point& x, double c) {
    for (double& v : x) v *= c;
}

inline Point zeros(std::size_t d) { return Point(d, 0.0); }

inline Point basis(std::size_t d, std::size_t i) {
    Point e(d, 0.0);
    e[i] = 1.0;
    return e;
}

inline bool all_finite(const Point& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace oco

#endif
