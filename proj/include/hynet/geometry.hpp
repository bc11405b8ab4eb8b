#pragma once

// Boxes (products of intervals), points, tangent vectors and a small dense
// matrix type. Boxes stand in for manifolds with corners: every mode carrier
// in this library is an axis-aligned box, possibly unbounded.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hynet/common.hpp"

namespace hynet {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
    double lo = -kInf;
    double hi = kInf;

    double width() const { return hi - lo; }
    bool degenerate() const { return lo == hi; }
    bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

    bool contains(double x, double tol) const { return x >= lo - tol && x <= hi + tol; }

    /// Largest finite value inside, used to clamp samples of unbounded axes.
    double clamp_lo() const { return std::isfinite(lo) ? lo : -kSampleWindow; }
    double clamp_hi() const { return std::isfinite(hi) ? hi : kSampleWindow; }
};

struct Point {
    std::vector<double> x;

    Point() = default;
    explicit Point(std::vector<double> coords) : x(std::move(coords)) {}

    std::size_t dim() const { return x.size(); }
    double operator[](std::size_t i) const { return x[i]; }
    double& operator[](std::size_t i) { return x[i]; }

    bool operator==(const Point& o) const { return x == o.x; }
};

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double c : v) m = std::max(m, std::abs(c));
    return m;
}

inline double inf_dist(const Point& a, const Point& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("inf_dist: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// A box is an ordered product of intervals. The empty product is the
/// one-point 0-dimensional manifold (the terminal object carrier).
struct Box {
    std::vector<Interval> ivs;

    Box() = default;
    explicit Box(std::vector<Interval> intervals) : ivs(std::move(intervals)) {}

    std::size_t dim() const { return ivs.size(); }

    bool contains(const Point& p, double tol) const {
        if (p.dim() != dim())
            throw std::invalid_argument("Box::contains: dimension mismatch");
        for (std::size_t i = 0; i < dim(); ++i)
            if (!ivs[i].contains(p[i], tol)) return false;
        return true;
    }

    /// Midpoint of the clamped box; a canonical interior-ish point.
    Point center() const {
        Point p;
        p.x.reserve(dim());
        for (const auto& iv : ivs) p.x.push_back(0.5 * (iv.clamp_lo() + iv.clamp_hi()));
        return p;
    }

    Point sample(Sampler& rng) const {
        Point p;
        p.x.reserve(dim());
        for (const auto& iv : ivs) p.x.push_back(rng.uniform(iv.clamp_lo(), iv.clamp_hi()));
        return p;
    }
};

/// Mode carriers must have nondegenerate axes; degenerate intervals are only
/// legal inside guards.
inline Box make_mode_box(std::vector<Interval> ivs) {
    for (const auto& iv : ivs)
        if (!(iv.lo < iv.hi))
            throw std::invalid_argument("mode box interval must satisfy lo < hi");
    return Box(std::move(ivs));
}

inline Box concat(const Box& a, const Box& b) {
    Box out = a;
    out.ivs.insert(out.ivs.end(), b.ivs.begin(), b.ivs.end());
    return out;
}

inline Point concat(const Point& a, const Point& b) {
    Point out = a;
    out.x.insert(out.x.end(), b.x.begin(), b.x.end());
    return out;
}

inline bool boxes_equal(const Box& a, const Box& b) {
    if (a.dim() != b.dim()) return false;
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (a.ivs[i].lo != b.ivs[i].lo || a.ivs[i].hi != b.ivs[i].hi) return false;
    return true;
}

[[nodiscard]] inline bool box_contains(const Box& b, const Point& x, double tol) {
    return b.contains(x, tol);
}

/// Tangent vector at a base point; tangent spaces are full vector spaces
/// even at the boundary.
struct Tangent {
    Point base;
    std::vector<double> vec;

    Tangent() = default;
    Tangent(Point b, std::vector<double> v) : base(std::move(b)), vec(std::move(v)) {
        if (base.dim() != vec.size())
            throw std::invalid_argument("Tangent: vec length must equal base dimension");
    }
};

/// Dense row-major matrix, just big enough for desk-scale Jacobians.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    std::vector<double> apply(const std::vector<double>& v) const {
        if (v.size() != cols) throw std::invalid_argument("Matrix::apply: size mismatch");
        std::vector<double> out(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < cols; ++c) s += at(r, c) * v[c];
            out[r] = s;
        }
        return out;
    }

    Matrix mul(const Matrix& o) const {
        if (cols != o.rows) throw std::invalid_argument("Matrix::mul: shape mismatch");
        Matrix out(rows, o.cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < cols; ++k) {
                double v = at(r, k);
                if (v == 0.0) continue;
                for (std::size_t c = 0; c < o.cols; ++c) out.at(r, c) += v * o.at(k, c);
            }
        return out;
    }
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.a.size(); ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
    return m;
}

inline double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.a) m = std::max(m, std::abs(v));
    return m;
}

/// y = A x + b. Carried by maps whose linear structure is known exactly;
/// enables exact guard pullbacks and image boxes.
struct AffineMap {
    Matrix A;
    std::vector<double> b;
};

} // namespace hynet
