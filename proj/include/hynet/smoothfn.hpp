#pragma once

// Smooth maps between boxes. A SmoothFn is backed either by one expression
// per output coordinate (the common case: analytic Jacobians via dual
// numbers, interval enclosures, exportable) or by an opaque callable.
// Affine structure is tracked when known; it enables exact guard pullbacks.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hynet/expr.hpp"
#include "hynet/geometry.hpp"

namespace hynet {

/// Unbounded R^n, the codomain of vector fields and tangent outputs.
inline Box real_box(std::size_t n) {
    return Box(std::vector<Interval>(n, Interval{-kInf, kInf}));
}

inline std::vector<std::string> positional_names(std::size_t n) {
    std::vector<std::string> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back("x" + std::to_string(i));
    return v;
}

struct SmoothFn {
    Box dom, cod;

    // expression backend (empty exprs + no lambda is legal only when cod is 0-dim)
    std::vector<ExprPtr> exprs;
    std::vector<std::string> var_names;

    // opaque backend
    std::function<Point(const Point&)> lambda;
    std::function<Matrix(const Point&)> lambda_jac;

    std::optional<AffineMap> affine;

    bool expr_backed() const { return !lambda; }

    Point operator()(const Point& p) const {
        if (lambda) return lambda(p);
        Point out;
        out.x.reserve(exprs.size());
        for (const auto& e : exprs) out.x.push_back(eval_resolved(e, p.x.data()));
        return out;
    }

    bool has_analytic_jac() const {
        return affine.has_value() || expr_backed() || static_cast<bool>(lambda_jac);
    }
};

Matrix differential(const SmoothFn& f, const Point& x);
Matrix fd_jacobian(const SmoothFn& f, const Point& x);

namespace detail {

inline ExprPtr shift_and_rename(const ExprPtr& e, int offset, const std::vector<std::string>& names) {
    switch (e->op) {
        case Op::lit: return e;
        case Op::var: {
            int s = e->slot + offset;
            return make_var(names[static_cast<std::size_t>(s)], s);
        }
        case Op::neg: return make_neg(shift_and_rename(e->a, offset, names));
        case Op::call: {
            std::vector<ExprPtr> args;
            for (const auto& x : e->args) args.push_back(shift_and_rename(x, offset, names));
            return make_call(e->fn, std::move(args));
        }
        default:
            return make_binary(e->op, shift_and_rename(e->a, offset, names),
                               shift_and_rename(e->b, offset, names));
    }
}

inline std::optional<AffineMap> affine_from_exprs(const std::vector<ExprPtr>& exprs,
                                                  std::size_t in_dim) {
    AffineMap m;
    m.A = Matrix(exprs.size(), in_dim);
    m.b.assign(exprs.size(), 0.0);
    for (std::size_t r = 0; r < exprs.size(); ++r) {
        auto f = linear_form(exprs[r]);
        if (!f) return std::nullopt;
        m.b[r] = f->c0;
        for (const auto& [slot, c] : f->coeff) m.A.at(r, static_cast<std::size_t>(slot)) = c;
    }
    return m;
}

inline ExprPtr expr_from_affine_row(const Matrix& A, const std::vector<double>& b, std::size_t r,
                                    const std::vector<std::string>& names) {
    ExprPtr acc;
    for (std::size_t c = 0; c < A.cols; ++c) {
        double coef = A.at(r, c);
        if (coef == 0.0) continue;
        ExprPtr term = coef == 1.0 ? make_var(names[c], static_cast<int>(c))
                                   : make_binary(Op::mul, make_lit(coef),
                                                 make_var(names[c], static_cast<int>(c)));
        acc = acc ? make_binary(Op::add, acc, term) : term;
    }
    if (b[r] != 0.0 || !acc) {
        ExprPtr k = make_lit(b[r]);
        acc = acc ? make_binary(Op::add, acc, k) : k;
    }
    return acc;
}

} // namespace detail

// --------------------------------------------------------------------------
// Builders

inline SmoothFn make_expr_fn_ast(Box dom, Box cod, const std::vector<std::string>& names,
                                 const std::vector<ExprPtr>& exprs) {
    if (names.size() != dom.dim())
        throw std::invalid_argument("make_expr_fn: variable list size must equal domain dimension");
    if (exprs.size() != cod.dim())
        throw std::invalid_argument("make_expr_fn: one expression per codomain coordinate");
    SmoothFn f;
    f.dom = std::move(dom);
    f.cod = std::move(cod);
    f.var_names = names;
    f.exprs.reserve(exprs.size());
    for (const auto& e : exprs) f.exprs.push_back(bind(e, names));
    f.affine = detail::affine_from_exprs(f.exprs, f.dom.dim());
    return f;
}

inline SmoothFn make_expr_fn(Box dom, Box cod, const std::vector<std::string>& names,
                             const std::vector<std::string>& sources) {
    std::vector<ExprPtr> exprs;
    exprs.reserve(sources.size());
    for (const auto& s : sources) exprs.push_back(parse(s));
    return make_expr_fn_ast(std::move(dom), std::move(cod), names, exprs);
}

inline SmoothFn make_affine_fn(Box dom, Box cod, Matrix A, std::vector<double> b) {
    if (A.rows != cod.dim() || A.cols != dom.dim() || b.size() != cod.dim())
        throw std::invalid_argument("make_affine_fn: shape mismatch");
    SmoothFn f;
    f.dom = std::move(dom);
    f.cod = std::move(cod);
    f.var_names = positional_names(f.dom.dim());
    for (std::size_t r = 0; r < A.rows; ++r)
        f.exprs.push_back(detail::expr_from_affine_row(A, b, r, f.var_names));
    f.affine = AffineMap{std::move(A), std::move(b)};
    return f;
}

inline SmoothFn make_identity_fn(const Box& box) {
    return make_affine_fn(box, box, Matrix::identity(box.dim()), std::vector<double>(box.dim(), 0.0));
}

/// Coordinate projection onto the listed coordinates, in order.
inline SmoothFn make_projection_fn(const Box& dom, const std::vector<std::size_t>& indices) {
    Matrix A(indices.size(), dom.dim());
    Box cod;
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= dom.dim()) throw std::invalid_argument("projection index out of range");
        A.at(r, indices[r]) = 1.0;
        cod.ivs.push_back(dom.ivs[indices[r]]);
    }
    return make_affine_fn(dom, cod, std::move(A), std::vector<double>(indices.size(), 0.0));
}

inline SmoothFn make_constant_fn(Box dom, Box cod, const Point& value) {
    Matrix A(value.dim(), dom.dim());
    return make_affine_fn(std::move(dom), std::move(cod), std::move(A), value.x);
}

inline SmoothFn make_lambda_fn(Box dom, Box cod, std::function<Point(const Point&)> eval,
                               std::function<Matrix(const Point&)> jac = nullptr) {
    SmoothFn f;
    f.dom = std::move(dom);
    f.cod = std::move(cod);
    f.var_names = positional_names(f.dom.dim());
    f.lambda = std::move(eval);
    f.lambda_jac = std::move(jac);
    return f;
}

inline SmoothFn compose_fns(const SmoothFn& g, const SmoothFn& f) {
    if (f.cod.dim() != g.dom.dim())
        throw std::invalid_argument("compose_fns: inner codomain and outer domain disagree");
    SmoothFn h;
    h.dom = f.dom;
    h.cod = g.cod;
    h.var_names = f.var_names;
    if (f.expr_backed() && g.expr_backed()) {
        h.exprs.reserve(g.exprs.size());
        for (const auto& e : g.exprs) h.exprs.push_back(subst(e, f.exprs));
        if (f.affine && g.affine) {
            AffineMap m;
            m.A = g.affine->A.mul(f.affine->A);
            m.b = g.affine->A.apply(f.affine->b);
            for (std::size_t i = 0; i < m.b.size(); ++i) m.b[i] += g.affine->b[i];
            h.affine = std::move(m);
        } else {
            h.affine = detail::affine_from_exprs(h.exprs, h.dom.dim());
        }
    } else {
        SmoothFn fc = f, gc = g;
        h.lambda = [fc, gc](const Point& p) { return gc(fc(p)); };
        h.lambda_jac = [fc, gc](const Point& p) {
            Matrix Jf = differential(fc, p);
            Point mid = fc(p);
            Matrix Jg = differential(gc, mid);
            return Jg.mul(Jf);
        };
    }
    return h;
}

/// Concatenation f x g on the product of the domains, evaluated blockwise.
inline SmoothFn concat_fns(const SmoothFn& f, const SmoothFn& g) {
    SmoothFn h;
    h.dom = concat(f.dom, g.dom);
    h.cod = concat(f.cod, g.cod);
    h.var_names = positional_names(h.dom.dim());
    if (f.expr_backed() && g.expr_backed()) {
        h.exprs.reserve(f.exprs.size() + g.exprs.size());
        for (const auto& e : f.exprs) h.exprs.push_back(detail::shift_and_rename(e, 0, h.var_names));
        const int off = static_cast<int>(f.dom.dim());
        for (const auto& e : g.exprs) h.exprs.push_back(detail::shift_and_rename(e, off, h.var_names));
        if (f.affine && g.affine) {
            AffineMap m;
            m.A = Matrix(h.cod.dim(), h.dom.dim());
            for (std::size_t r = 0; r < f.cod.dim(); ++r)
                for (std::size_t c = 0; c < f.dom.dim(); ++c)
                    m.A.at(r, c) = f.affine->A.at(r, c);
            for (std::size_t r = 0; r < g.cod.dim(); ++r)
                for (std::size_t c = 0; c < g.dom.dim(); ++c)
                    m.A.at(f.cod.dim() + r, f.dom.dim() + c) = g.affine->A.at(r, c);
            m.b = f.affine->b;
            m.b.insert(m.b.end(), g.affine->b.begin(), g.affine->b.end());
            h.affine = std::move(m);
        }
    } else {
        SmoothFn fc = f, gc = g;
        const std::size_t nf = f.dom.dim();
        h.lambda = [fc, gc, nf](const Point& p) {
            Point a, b;
            a.x.assign(p.x.begin(), p.x.begin() + static_cast<long>(nf));
            b.x.assign(p.x.begin() + static_cast<long>(nf), p.x.end());
            return concat(fc(a), gc(b));
        };
    }
    return h;
}

/// <f, g> on a shared domain: outputs stacked.
inline SmoothFn pair_fns(const SmoothFn& f, const SmoothFn& g) {
    if (f.dom.dim() != g.dom.dim())
        throw std::invalid_argument("pair_fns: domains must agree");
    SmoothFn h;
    h.dom = f.dom;
    h.cod = concat(f.cod, g.cod);
    h.var_names = f.var_names;
    if (f.expr_backed() && g.expr_backed()) {
        h.exprs = f.exprs;
        h.exprs.insert(h.exprs.end(), g.exprs.begin(), g.exprs.end());
        if (f.affine && g.affine) {
            AffineMap m;
            m.A = Matrix(h.cod.dim(), h.dom.dim());
            for (std::size_t r = 0; r < f.cod.dim(); ++r)
                for (std::size_t c = 0; c < h.dom.dim(); ++c) m.A.at(r, c) = f.affine->A.at(r, c);
            for (std::size_t r = 0; r < g.cod.dim(); ++r)
                for (std::size_t c = 0; c < h.dom.dim(); ++c)
                    m.A.at(f.cod.dim() + r, c) = g.affine->A.at(r, c);
            m.b = f.affine->b;
            m.b.insert(m.b.end(), g.affine->b.begin(), g.affine->b.end());
            h.affine = std::move(m);
        }
    } else {
        SmoothFn fc = f, gc = g;
        h.lambda = [fc, gc](const Point& p) { return concat(fc(p), gc(p)); };
    }
    return h;
}

/// Pointwise linear combination alpha*f + beta*g of maps with equal
/// domain/codomain shape (the vector-space structure of open systems).
inline SmoothFn lin_comb_fns(double alpha, const SmoothFn& f, double beta, const SmoothFn& g) {
    if (f.dom.dim() != g.dom.dim() || f.cod.dim() != g.cod.dim())
        throw std::invalid_argument("lin_comb_fns: shape mismatch");
    SmoothFn h;
    h.dom = f.dom;
    h.cod = f.cod;
    h.var_names = f.var_names;
    if (f.expr_backed() && g.expr_backed()) {
        for (std::size_t r = 0; r < f.exprs.size(); ++r)
            h.exprs.push_back(make_binary(
                Op::add, make_binary(Op::mul, make_lit(alpha), f.exprs[r]),
                make_binary(Op::mul, make_lit(beta), g.exprs[r])));
        h.affine = detail::affine_from_exprs(h.exprs, h.dom.dim());
    } else {
        SmoothFn fc = f, gc = g;
        h.lambda = [fc, gc, alpha, beta](const Point& p) {
            Point a = fc(p), b = gc(p);
            Point out;
            out.x.reserve(a.dim());
            for (std::size_t i = 0; i < a.dim(); ++i) out.x.push_back(alpha * a[i] + beta * b[i]);
            return out;
        };
    }
    return h;
}

// --------------------------------------------------------------------------
// Differentials

/// Raw finite-difference Jacobian: central where the domain allows stepping
/// both ways, one-sided at boundary coordinates. Step 1e-6 * (1 + |x_i|).
inline Matrix fd_jacobian(const SmoothFn& f, const Point& x) {
    const std::size_t n = f.dom.dim();
    Matrix J(f.cod.dim(), n);
    for (std::size_t c = 0; c < n; ++c) {
        double h = 1e-6 * (1.0 + std::abs(x[c]));
        const Interval& iv = f.dom.ivs[c];
        double room_lo = x[c] - iv.lo, room_hi = iv.hi - x[c];
        if (iv.bounded() && iv.width() < 2 * h) h = iv.width() / 2;
        if (h <= 0.0) continue;
        Point xp = x, xm = x;
        bool up = room_hi >= h, down = room_lo >= h;
        if (up && down) {
            xp[c] += h;
            xm[c] -= h;
        } else if (up) {
            xp[c] += h;
        } else if (down) {
            xm[c] -= h;
        } else {
            continue;  // degenerate axis: derivative column stays zero
        }
        Point fp = f(xp), fm = f(xm);
        double denom = xp[c] - xm[c];
        for (std::size_t r = 0; r < f.cod.dim(); ++r) J.at(r, c) = (fp[r] - fm[r]) / denom;
    }
    return J;
}

/// Jacobian of f at x: analytic when the backend provides one, finite
/// differences otherwise.
inline Matrix differential(const SmoothFn& f, const Point& x) {
    if (x.dim() != f.dom.dim()) throw std::invalid_argument("differential: dimension mismatch");
    if (!f.dom.contains(x, 1e-6 * (1.0 + inf_norm(x.x))))
        throw std::invalid_argument("differential: point outside domain");
    if (f.affine) return f.affine->A;
    if (f.expr_backed()) {
        Matrix J(f.cod.dim(), f.dom.dim());
        for (std::size_t r = 0; r < f.cod.dim(); ++r)
            for (std::size_t c = 0; c < f.dom.dim(); ++c)
                J.at(r, c) = deriv_resolved(f.exprs[r], x.x.data(), static_cast<int>(c));
        return J;
    }
    if (f.lambda_jac) return f.lambda_jac(x);
    return fd_jacobian(f, x);
}

inline Tangent pushforward(const SmoothFn& f, const Tangent& v) {
    Matrix J = differential(f, v.base);
    return Tangent(f(v.base), J.apply(v.vec));
}

// --------------------------------------------------------------------------
// Enclosures and pullbacks (used by the relation algebra)

/// Conservative enclosure of f(B); nullopt when the backend cannot provide one.
inline std::optional<Box> image_box(const SmoothFn& f, const Box& B) {
    if (!f.expr_backed()) return std::nullopt;
    Box out;
    out.ivs.reserve(f.exprs.size());
    for (const auto& e : f.exprs) {
        Interval r = interval_eval(e, B.ivs);
        double pad_lo = 1e-12 * (1.0 + std::abs(r.lo));
        double pad_hi = 1e-12 * (1.0 + std::abs(r.hi));
        out.ivs.push_back({r.lo - pad_lo, r.hi + pad_hi});
    }
    return out;
}

/// Exact preimage {x in dom : f(x) in target} when f is affine with at most
/// one nonzero coefficient per row; nullopt otherwise. The result may contain
/// empty axes (lo > hi), which callers must check.
inline std::optional<Box> pullback_box(const SmoothFn& f, const Box& target) {
    if (!f.affine) return std::nullopt;
    const Matrix& A = f.affine->A;
    for (std::size_t r = 0; r < A.rows; ++r) {
        std::size_t nz = 0;
        for (std::size_t c = 0; c < A.cols; ++c)
            if (A.at(r, c) != 0.0) ++nz;
        if (nz > 1) return std::nullopt;
    }
    Box out = f.dom;
    for (std::size_t r = 0; r < A.rows; ++r) {
        double b = f.affine->b[r];
        std::size_t col = A.cols;
        double a = 0.0;
        for (std::size_t c = 0; c < A.cols; ++c)
            if (A.at(r, c) != 0.0) {
                col = c;
                a = A.at(r, c);
                break;
            }
        const Interval& t = target.ivs[r];
        if (col == A.cols) {
            // constant row: either always inside or always outside
            if (!(b >= t.lo && b <= t.hi)) {
                for (auto& iv : out.ivs) iv = {1.0, -1.0};
                return out;
            }
            continue;
        }
        double lo = (t.lo - b) / a, hi = (t.hi - b) / a;
        if (a < 0) std::swap(lo, hi);
        double pad = (a == 1.0 && b == 0.0) ? 0.0 : 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
        Interval& iv = out.ivs[col];
        iv.lo = std::max(iv.lo, lo - pad);
        iv.hi = std::min(iv.hi, hi + pad);
    }
    return out;
}

} // namespace hynet
