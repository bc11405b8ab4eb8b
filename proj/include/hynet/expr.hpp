#pragma once

// A small expression language for authoring vector fields, reset maps and
// coupling maps in config files: real literals, named variables, + - * / ^,
// unary minus and the functions sin cos exp log tanh abs min max.
//
// Derivatives are exact forward-mode (dual numbers). At the kinks of
// abs/min/max the convention is: min/max ties take the first argument's
// derivative, abs at zero takes the slope of its negative branch (-1).
// See docs/grammar.md for the grammar and the full convention.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hynet/common.hpp"
#include "hynet/geometry.hpp"

namespace hynet {

enum class Op : std::uint8_t { lit, var, add, sub, mul, div, pow, neg, call };
enum class Fn : std::uint8_t { sin, cos, exp, log, tanh, abs, min, max };

inline const char* fn_name(Fn f) {
    switch (f) {
        case Fn::sin: return "sin";
        case Fn::cos: return "cos";
        case Fn::exp: return "exp";
        case Fn::log: return "log";
        case Fn::tanh: return "tanh";
        case Fn::abs: return "abs";
        case Fn::min: return "min";
        case Fn::max: return "max";
    }
    return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    Op op;
    double lit = 0.0;
    std::string name;   // var only
    int slot = -1;      // var only; resolved index into the enclosing variable list
    Fn fn = Fn::sin;    // call only
    ExprPtr a, b;       // operands (a = unary child)
    std::vector<ExprPtr> args;  // call only
};

inline ExprPtr make_lit(double v) {
    auto e = std::make_shared<Expr>();
    e->op = Op::lit;
    e->lit = v;
    return e;
}

inline ExprPtr make_var(std::string name, int slot = -1) {
    auto e = std::make_shared<Expr>();
    e->op = Op::var;
    e->name = std::move(name);
    e->slot = slot;
    return e;
}

inline ExprPtr make_binary(Op op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

inline ExprPtr make_neg(ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->op = Op::neg;
    e->a = std::move(a);
    return e;
}

inline ExprPtr make_call(Fn fn, std::vector<ExprPtr> args) {
    auto e = std::make_shared<Expr>();
    e->op = Op::call;
    e->fn = fn;
    e->args = std::move(args);
    return e;
}

// --------------------------------------------------------------------------
// Parsing

struct ParseError : std::runtime_error {
    std::size_t offset;
    std::vector<std::string> expected;

    ParseError(std::size_t off, const std::string& msg, std::vector<std::string> exp)
        : std::runtime_error(msg + " at byte " + std::to_string(off) +
                             (exp.empty() ? "" : " (expected " + join(exp, ", ") + ")")),
          offset(off),
          expected(std::move(exp)) {}
};

namespace detail {

struct Lexer {
    const std::string& src;
    std::size_t pos = 0;

    enum class Tok { number, name, plus, minus, star, slash, caret, lparen, rparen, comma, end };

    Tok tok = Tok::end;
    double number = 0.0;
    std::string name;
    std::size_t tok_pos = 0;

    explicit Lexer(const std::string& s) : src(s) { next(); }

    static const char* tok_str(Tok t) {
        switch (t) {
            case Tok::number: return "number";
            case Tok::name: return "name";
            case Tok::plus: return "'+'";
            case Tok::minus: return "'-'";
            case Tok::star: return "'*'";
            case Tok::slash: return "'/'";
            case Tok::caret: return "'^'";
            case Tok::lparen: return "'('";
            case Tok::rparen: return "')'";
            case Tok::comma: return "','";
            case Tok::end: return "end of input";
        }
        return "?";
    }

    void next() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\n' || src[pos] == '\r'))
            ++pos;
        tok_pos = pos;
        if (pos >= src.size()) {
            tok = Tok::end;
            return;
        }
        char c = src[pos];
        if ((c >= '0' && c <= '9') || (c == '.' && pos + 1 < src.size() && src[pos + 1] >= '0' && src[pos + 1] <= '9')) {
            const char* begin = src.c_str() + pos;
            char* endp = nullptr;
            number = std::strtod(begin, &endp);
            pos += static_cast<std::size_t>(endp - begin);
            tok = Tok::number;
            return;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::size_t start = pos;
            while (pos < src.size() &&
                   ((src[pos] >= 'a' && src[pos] <= 'z') || (src[pos] >= 'A' && src[pos] <= 'Z') ||
                    (src[pos] >= '0' && src[pos] <= '9') || src[pos] == '_'))
                ++pos;
            name = src.substr(start, pos - start);
            tok = Tok::name;
            return;
        }
        ++pos;
        switch (c) {
            case '+': tok = Tok::plus; return;
            case '-': tok = Tok::minus; return;
            case '*': tok = Tok::star; return;
            case '/': tok = Tok::slash; return;
            case '^': tok = Tok::caret; return;
            case '(': tok = Tok::lparen; return;
            case ')': tok = Tok::rparen; return;
            case ',': tok = Tok::comma; return;
        }
        throw ParseError(tok_pos, std::string("unexpected character '") + c + "'", {});
    }
};

struct Parser {
    Lexer lex;

    explicit Parser(const std::string& s) : lex(s) {}

    [[noreturn]] void fail(std::vector<std::string> expected) {
        throw ParseError(lex.tok_pos,
                         std::string("unexpected ") + Lexer::tok_str(lex.tok), std::move(expected));
    }

    void expect(Lexer::Tok t) {
        if (lex.tok != t) fail({Lexer::tok_str(t)});
        lex.next();
    }

    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        while (lex.tok == Lexer::Tok::plus || lex.tok == Lexer::Tok::minus) {
            Op op = lex.tok == Lexer::Tok::plus ? Op::add : Op::sub;
            lex.next();
            e = make_binary(op, e, parse_term());
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        while (lex.tok == Lexer::Tok::star || lex.tok == Lexer::Tok::slash) {
            Op op = lex.tok == Lexer::Tok::star ? Op::mul : Op::div;
            lex.next();
            e = make_binary(op, e, parse_factor());
        }
        return e;
    }

    ExprPtr parse_factor() {
        if (lex.tok == Lexer::Tok::minus) {
            lex.next();
            return make_neg(parse_factor());
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (lex.tok == Lexer::Tok::caret) {
            lex.next();
            return make_binary(Op::pow, base, parse_factor());
        }
        return base;
    }

    ExprPtr parse_atom() {
        switch (lex.tok) {
            case Lexer::Tok::number: {
                double v = lex.number;
                lex.next();
                return make_lit(v);
            }
            case Lexer::Tok::lparen: {
                lex.next();
                ExprPtr e = parse_expr();
                expect(Lexer::Tok::rparen);
                return e;
            }
            case Lexer::Tok::name: {
                std::string id = lex.name;
                std::size_t id_pos = lex.tok_pos;
                lex.next();
                if (lex.tok != Lexer::Tok::lparen) return make_var(id);
                auto fn = fn_from_name(id);
                if (!fn)
                    throw ParseError(id_pos, "unknown function '" + id + "'",
                                     {"sin", "cos", "exp", "log", "tanh", "abs", "min", "max"});
                lex.next();
                std::vector<ExprPtr> args;
                args.push_back(parse_expr());
                while (lex.tok == Lexer::Tok::comma) {
                    lex.next();
                    args.push_back(parse_expr());
                }
                expect(Lexer::Tok::rparen);
                std::size_t want = (*fn == Fn::min || *fn == Fn::max) ? 2 : 1;
                if (args.size() != want)
                    throw ParseError(id_pos, "function '" + id + "' takes " +
                                                 std::to_string(want) + " argument(s)", {});
                return make_call(*fn, std::move(args));
            }
            default:
                fail({"number", "name", "'('", "'-'"});
        }
    }

    static std::optional<Fn> fn_from_name(const std::string& s) {
        if (s == "sin") return Fn::sin;
        if (s == "cos") return Fn::cos;
        if (s == "exp") return Fn::exp;
        if (s == "log") return Fn::log;
        if (s == "tanh") return Fn::tanh;
        if (s == "abs") return Fn::abs;
        if (s == "min") return Fn::min;
        if (s == "max") return Fn::max;
        return std::nullopt;
    }
};

} // namespace detail

inline ExprPtr parse(const std::string& src) {
    detail::Parser p(src);
    ExprPtr e = p.parse_expr();
    if (p.lex.tok != detail::Lexer::Tok::end) p.fail({"operator", "end of input"});
    return e;
}

// --------------------------------------------------------------------------
// Environments and evaluation

struct Env {
    std::vector<std::string> names;
    std::vector<double> values;

    void set(const std::string& name, double v) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) {
                values[i] = v;
                return;
            }
        names.push_back(name);
        values.push_back(v);
    }

    std::optional<std::size_t> index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        return std::nullopt;
    }
};

/// Resolves every variable against `names`, returning a copy whose vars carry
/// slot indices. Unknown names throw.
inline ExprPtr bind(const ExprPtr& e, const std::vector<std::string>& names) {
    switch (e->op) {
        case Op::lit: return e;
        case Op::var: {
            for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == e->name) return make_var(e->name, static_cast<int>(i));
            throw std::invalid_argument("unbound variable '" + e->name + "'");
        }
        case Op::neg: return make_neg(bind(e->a, names));
        case Op::call: {
            std::vector<ExprPtr> args;
            for (const auto& x : e->args) args.push_back(bind(x, names));
            return make_call(e->fn, std::move(args));
        }
        default: return make_binary(e->op, bind(e->a, names), bind(e->b, names));
    }
}

inline void collect_vars(const ExprPtr& e, std::vector<std::string>& out) {
    switch (e->op) {
        case Op::lit: return;
        case Op::var: {
            for (const auto& n : out)
                if (n == e->name) return;
            out.push_back(e->name);
            return;
        }
        case Op::neg: collect_vars(e->a, out); return;
        case Op::call:
            for (const auto& x : e->args) collect_vars(x, out);
            return;
        default:
            collect_vars(e->a, out);
            collect_vars(e->b, out);
    }
}

namespace detail {

inline double eval_slots(const Expr& e, const double* slots, bool* domain_error) {
    switch (e.op) {
        case Op::lit: return e.lit;
        case Op::var:
            if (e.slot < 0) throw std::invalid_argument("unresolved variable '" + e.name + "'");
            return slots[e.slot];
        case Op::neg: return -eval_slots(*e.a, slots, domain_error);
        case Op::add: return eval_slots(*e.a, slots, domain_error) + eval_slots(*e.b, slots, domain_error);
        case Op::sub: return eval_slots(*e.a, slots, domain_error) - eval_slots(*e.b, slots, domain_error);
        case Op::mul: return eval_slots(*e.a, slots, domain_error) * eval_slots(*e.b, slots, domain_error);
        case Op::div: {
            double x = eval_slots(*e.a, slots, domain_error);
            double y = eval_slots(*e.b, slots, domain_error);
            double r = x / y;
            if (domain_error && std::isnan(r) && !std::isnan(x) && !std::isnan(y)) *domain_error = true;
            return r;
        }
        case Op::pow: {
            double x = eval_slots(*e.a, slots, domain_error);
            double y = eval_slots(*e.b, slots, domain_error);
            double r = std::pow(x, y);
            if (domain_error && std::isnan(r) && !std::isnan(x) && !std::isnan(y)) *domain_error = true;
            return r;
        }
        case Op::call: {
            double a0 = eval_slots(*e.args[0], slots, domain_error);
            switch (e.fn) {
                case Fn::sin: return std::sin(a0);
                case Fn::cos: return std::cos(a0);
                case Fn::exp: return std::exp(a0);
                case Fn::log: {
                    if (domain_error && a0 <= 0.0 && !std::isnan(a0)) *domain_error = true;
                    return std::log(a0);
                }
                case Fn::tanh: return std::tanh(a0);
                case Fn::abs: return std::abs(a0);
                case Fn::min: return std::min(a0, eval_slots(*e.args[1], slots, domain_error));
                case Fn::max: return std::max(a0, eval_slots(*e.args[1], slots, domain_error));
            }
            return 0.0;
        }
    }
    return 0.0;
}

} // namespace detail

struct EvalResult {
    double value = 0.0;
    bool domain_error = false;
};

inline EvalResult eval_checked(const ExprPtr& e, const Env& env) {
    ExprPtr b = bind(e, env.names);
    EvalResult r;
    r.value = detail::eval_slots(*b, env.values.data(), &r.domain_error);
    return r;
}

inline double eval(const ExprPtr& e, const Env& env) { return eval_checked(e, env).value; }

/// Evaluation of an already slot-resolved expression; the hot path.
inline double eval_resolved(const ExprPtr& e, const double* slots) {
    return detail::eval_slots(*e, slots, nullptr);
}

// --------------------------------------------------------------------------
// Dual numbers: exact forward-mode derivatives.

struct Dual {
    double re = 0.0, du = 0.0;
};

namespace detail {

inline Dual dual_eval(const Expr& e, const double* slots, int wrt) {
    switch (e.op) {
        case Op::lit: return {e.lit, 0.0};
        case Op::var: return {slots[e.slot], e.slot == wrt ? 1.0 : 0.0};
        case Op::neg: {
            Dual a = dual_eval(*e.a, slots, wrt);
            return {-a.re, -a.du};
        }
        case Op::add: {
            Dual a = dual_eval(*e.a, slots, wrt), b = dual_eval(*e.b, slots, wrt);
            return {a.re + b.re, a.du + b.du};
        }
        case Op::sub: {
            Dual a = dual_eval(*e.a, slots, wrt), b = dual_eval(*e.b, slots, wrt);
            return {a.re - b.re, a.du - b.du};
        }
        case Op::mul: {
            Dual a = dual_eval(*e.a, slots, wrt), b = dual_eval(*e.b, slots, wrt);
            return {a.re * b.re, a.re * b.du + a.du * b.re};
        }
        case Op::div: {
            Dual a = dual_eval(*e.a, slots, wrt), b = dual_eval(*e.b, slots, wrt);
            return {a.re / b.re, (a.du * b.re - a.re * b.du) / (b.re * b.re)};
        }
        case Op::pow: {
            Dual a = dual_eval(*e.a, slots, wrt), b = dual_eval(*e.b, slots, wrt);
            double v = std::pow(a.re, b.re);
            if (b.du == 0.0) {
                double d = b.re == 0.0 ? 0.0 : b.re * std::pow(a.re, b.re - 1.0) * a.du;
                return {v, d};
            }
            return {v, v * (b.du * std::log(a.re) + b.re * a.du / a.re)};
        }
        case Op::call: {
            Dual a = dual_eval(*e.args[0], slots, wrt);
            switch (e.fn) {
                case Fn::sin: return {std::sin(a.re), std::cos(a.re) * a.du};
                case Fn::cos: return {std::cos(a.re), -std::sin(a.re) * a.du};
                case Fn::exp: {
                    double v = std::exp(a.re);
                    return {v, v * a.du};
                }
                case Fn::log: return {std::log(a.re), a.du / a.re};
                case Fn::tanh: {
                    double v = std::tanh(a.re);
                    return {v, (1.0 - v * v) * a.du};
                }
                case Fn::abs:
                    // kink convention: slope of the negative branch at 0
                    return a.re > 0.0 ? Dual{a.re, a.du} : Dual{-a.re, -a.du};
                case Fn::min: {
                    Dual b = dual_eval(*e.args[1], slots, wrt);
                    return a.re <= b.re ? a : b;  // tie: first argument
                }
                case Fn::max: {
                    Dual b = dual_eval(*e.args[1], slots, wrt);
                    return a.re >= b.re ? a : b;  // tie: first argument
                }
            }
            return {0.0, 0.0};
        }
    }
    return {0.0, 0.0};
}

} // namespace detail

inline double deriv(const ExprPtr& e, const Env& env, const std::string& var) {
    ExprPtr b = bind(e, env.names);
    auto idx = env.index_of(var);
    if (!idx) throw std::invalid_argument("deriv: unbound variable '" + var + "'");
    return detail::dual_eval(*b, env.values.data(), static_cast<int>(*idx)).du;
}

/// Partial derivative of a slot-resolved expression.
inline double deriv_resolved(const ExprPtr& e, const double* slots, int wrt) {
    return detail::dual_eval(*e, slots, wrt).du;
}

// --------------------------------------------------------------------------
// Interval evaluation: a conservative enclosure of the range of the
// expression over a box of inputs. Used only to prune provably-empty
// guard compositions, so coarseness is harmless.

namespace detail {

inline Interval iv(double lo, double hi) { return {lo, hi}; }
inline Interval iv_whole() { return {-kInf, kInf}; }

inline double imul(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;  // endpoint convention 0 * inf = 0
    return a * b;
}

inline Interval interval_eval(const Expr& e, const std::vector<Interval>& slots) {
    switch (e.op) {
        case Op::lit: return iv(e.lit, e.lit);
        case Op::var: return slots[e.slot];
        case Op::neg: {
            Interval a = interval_eval(*e.a, slots);
            return iv(-a.hi, -a.lo);
        }
        case Op::add: {
            Interval a = interval_eval(*e.a, slots), b = interval_eval(*e.b, slots);
            return iv(a.lo + b.lo, a.hi + b.hi);
        }
        case Op::sub: {
            Interval a = interval_eval(*e.a, slots), b = interval_eval(*e.b, slots);
            return iv(a.lo - b.hi, a.hi - b.lo);
        }
        case Op::mul: {
            Interval a = interval_eval(*e.a, slots), b = interval_eval(*e.b, slots);
            double c[4] = {imul(a.lo, b.lo), imul(a.lo, b.hi), imul(a.hi, b.lo), imul(a.hi, b.hi)};
            double lo = c[0], hi = c[0];
            for (double v : c) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            return iv(lo, hi);
        }
        case Op::div: {
            Interval a = interval_eval(*e.a, slots), b = interval_eval(*e.b, slots);
            if (b.lo <= 0.0 && b.hi >= 0.0) return iv_whole();
            double c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
            double lo = c[0], hi = c[0];
            for (double v : c) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            return iv(lo, hi);
        }
        case Op::pow: {
            Interval a = interval_eval(*e.a, slots), b = interval_eval(*e.b, slots);
            if (b.degenerate() && b.lo == std::floor(b.lo) && std::isfinite(b.lo)) {
                double k = b.lo;
                double plo = std::pow(a.lo, k), phi = std::pow(a.hi, k);
                if (k == 0.0) return iv(1.0, 1.0);
                bool even = std::fmod(k, 2.0) == 0.0;
                if (k > 0.0 && even && a.lo < 0.0 && a.hi > 0.0)
                    return iv(0.0, std::max(plo, phi));
                if (k < 0.0 && a.lo <= 0.0 && a.hi >= 0.0) return iv_whole();
                return iv(std::min(plo, phi), std::max(plo, phi));
            }
            if (a.lo <= 0.0) return iv_whole();
            double c[4] = {std::pow(a.lo, b.lo), std::pow(a.lo, b.hi), std::pow(a.hi, b.lo),
                           std::pow(a.hi, b.hi)};
            double lo = c[0], hi = c[0];
            for (double v : c) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            return iv(lo, hi);
        }
        case Op::call: {
            Interval a = interval_eval(*e.args[0], slots);
            switch (e.fn) {
                case Fn::sin:
                case Fn::cos: return iv(-1.0, 1.0);
                case Fn::exp: return iv(std::exp(a.lo), std::exp(a.hi));
                case Fn::log:
                    if (a.hi <= 0.0) return iv_whole();
                    return iv(a.lo <= 0.0 ? -kInf : std::log(a.lo), std::log(a.hi));
                case Fn::tanh: return iv(std::tanh(a.lo), std::tanh(a.hi));
                case Fn::abs: {
                    if (a.lo >= 0.0) return a;
                    if (a.hi <= 0.0) return iv(-a.hi, -a.lo);
                    return iv(0.0, std::max(-a.lo, a.hi));
                }
                case Fn::min: {
                    Interval b = interval_eval(*e.args[1], slots);
                    return iv(std::min(a.lo, b.lo), std::min(a.hi, b.hi));
                }
                case Fn::max: {
                    Interval b = interval_eval(*e.args[1], slots);
                    return iv(std::max(a.lo, b.lo), std::max(a.hi, b.hi));
                }
            }
            return iv_whole();
        }
    }
    return iv_whole();
}

} // namespace detail

inline Interval interval_eval(const ExprPtr& e, const std::vector<Interval>& slot_ranges) {
    return detail::interval_eval(*e, slot_ranges);
}

// --------------------------------------------------------------------------
// Printing, substitution, structural equality, affine extraction

namespace detail {

inline int prec(const Expr& e) {
    switch (e.op) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::pow: return 4;
        default: return 5;
    }
}

inline void print_rec(const Expr& e, std::string& out);

inline void print_child(const Expr& c, std::string& out, bool parens) {
    if (parens) {
        out += '(';
        print_rec(c, out);
        out += ')';
    } else {
        print_rec(c, out);
    }
}

inline void print_rec(const Expr& e, std::string& out) {
    switch (e.op) {
        case Op::lit: out += fmt_double(e.lit); return;
        case Op::var: out += e.name; return;
        case Op::neg:
            out += '-';
            print_child(*e.a, out, prec(*e.a) < 3);
            return;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: {
            int p = prec(e);
            print_child(*e.a, out, prec(*e.a) < p);
            out += e.op == Op::add ? " + " : e.op == Op::sub ? " - " : e.op == Op::mul ? "*" : "/";
            print_child(*e.b, out, prec(*e.b) <= p);
            return;
        }
        case Op::pow:
            print_child(*e.a, out, prec(*e.a) < 5);  // left operand must be an atom
            out += '^';
            print_child(*e.b, out, prec(*e.b) < 3);  // right operand is a factor
            return;
        case Op::call: {
            out += fn_name(e.fn);
            out += '(';
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print_rec(*e.args[i], out);
            }
            out += ')';
            return;
        }
    }
}

} // namespace detail

inline std::string print(const ExprPtr& e) {
    std::string out;
    detail::print_rec(*e, out);
    return out;
}

/// Replaces each slot-resolved variable by `repl[slot]`. All variables must
/// be resolved and have a replacement.
inline ExprPtr subst(const ExprPtr& e, const std::vector<ExprPtr>& repl) {
    switch (e->op) {
        case Op::lit: return e;
        case Op::var:
            if (e->slot < 0 || static_cast<std::size_t>(e->slot) >= repl.size())
                throw std::invalid_argument("subst: unresolved variable '" + e->name + "'");
            return repl[static_cast<std::size_t>(e->slot)];
        case Op::neg: return make_neg(subst(e->a, repl));
        case Op::call: {
            std::vector<ExprPtr> args;
            for (const auto& x : e->args) args.push_back(subst(x, repl));
            return make_call(e->fn, std::move(args));
        }
        default: return make_binary(e->op, subst(e->a, repl), subst(e->b, repl));
    }
}

inline bool equal(const ExprPtr& x, const ExprPtr& y) {
    if (x->op != y->op) return false;
    switch (x->op) {
        case Op::lit: return x->lit == y->lit;
        case Op::var: return x->name == y->name;
        case Op::neg: return equal(x->a, y->a);
        case Op::call: {
            if (x->fn != y->fn || x->args.size() != y->args.size()) return false;
            for (std::size_t i = 0; i < x->args.size(); ++i)
                if (!equal(x->args[i], y->args[i])) return false;
            return true;
        }
        default: return equal(x->a, y->a) && equal(x->b, y->b);
    }
}

/// c0 + sum coeff[slot] * x_slot, when the expression is affine in its
/// (slot-resolved) variables.
struct LinForm {
    double c0 = 0.0;
    std::map<int, double> coeff;

    bool constant() const { return coeff.empty(); }
};

inline std::optional<LinForm> linear_form(const ExprPtr& e) {
    switch (e->op) {
        case Op::lit: return LinForm{e->lit, {}};
        case Op::var: {
            if (e->slot < 0) return std::nullopt;
            LinForm f;
            f.coeff[e->slot] = 1.0;
            return f;
        }
        case Op::neg: {
            auto a = linear_form(e->a);
            if (!a) return std::nullopt;
            a->c0 = -a->c0;
            for (auto& [k, v] : a->coeff) v = -v;
            return a;
        }
        case Op::add:
        case Op::sub: {
            auto a = linear_form(e->a), b = linear_form(e->b);
            if (!a || !b) return std::nullopt;
            double s = e->op == Op::add ? 1.0 : -1.0;
            a->c0 += s * b->c0;
            for (const auto& [k, v] : b->coeff) a->coeff[k] += s * v;
            return a;
        }
        case Op::mul: {
            auto a = linear_form(e->a), b = linear_form(e->b);
            if (!a || !b) return std::nullopt;
            if (!a->constant() && !b->constant()) return std::nullopt;
            if (!a->constant()) std::swap(a, b);
            double c = a->c0;
            b->c0 *= c;
            for (auto& [k, v] : b->coeff) v *= c;
            return b;
        }
        case Op::div: {
            auto a = linear_form(e->a), b = linear_form(e->b);
            if (!a || !b || !b->constant()) return std::nullopt;
            a->c0 /= b->c0;
            for (auto& [k, v] : a->coeff) v /= b->c0;
            return a;
        }
        case Op::pow: {
            auto a = linear_form(e->a), b = linear_form(e->b);
            if (!a || !b || !b->constant()) return std::nullopt;
            if (a->constant()) return LinForm{std::pow(a->c0, b->c0), {}};
            if (b->c0 == 1.0) return a;
            return std::nullopt;
        }
        case Op::call: {
            for (const auto& x : e->args) {
                auto f = linear_form(x);
                if (!f || !f->constant()) return std::nullopt;
            }
            double v = detail::eval_slots(*e, nullptr, nullptr);
            return LinForm{v, {}};
        }
    }
    return std::nullopt;
}

} // namespace hynet
