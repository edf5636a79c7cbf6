#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbvp/errors.hpp"

namespace sbvp {

/// Scalar expressions in the variables `t` and `eps`.
///
/// Immutable AST over real literals, the two variables, the binary operators
/// + - * / ^ (integer exponent in [-9, 9], right associative), unary minus and
/// the functions sin, cos, exp, log, sqrt. Supports exact symbolic
/// differentiation in either variable; simplification is best effort
/// (constant folding and 0/1 identities), correctness is defined by
/// evaluation.
class Expr {
    enum class Op {
        Const,
        VarT,
        VarEps,
        Add,
        Sub,
        Mul,
        Div,
        Pow, // integer exponent stored in `exponent`, single child
        Neg,
        Sin,
        Cos,
        Exp,
        Log,
        Sqrt,
    };

    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        Op op;
        double value = 0.0; // Op::Const
        int exponent = 0;   // Op::Pow
        NodePtr a, b;
    };

public:
    enum class Var { T, Eps };

    static constexpr int kMaxExponent = 9;

    Expr() : node_(constant_node(0.0)) {}

    /// Parses standard infix notation. Precedence ^ > unary minus > * / > + -,
    /// all left associative except ^. The exponent of ^ must constant-fold to
    /// an integer in [-9, 9]. Throws ParseError with the byte offset on
    /// malformed input or identifiers other than t, eps and the function set.
    static Expr parse(std::string_view src) {
        Parser p(src);
        Expr e = p.parse_expr();
        p.expect_end();
        return e;
    }

    static Expr constant(double v) { return Expr(constant_node(v)); }
    static Expr variable(Var v) {
        return Expr(std::make_shared<Node>(Node{v == Var::T ? Op::VarT : Op::VarEps}));
    }

    /// Evaluates at (t, eps). Throws DomainError on division by zero, log or
    /// sqrt outside their domain, or a non-finite intermediate value.
    double eval(double t, double eps) const { return eval_node(*node_, t, eps); }

    /// Exact symbolic derivative with respect to `var`.
    Expr derivative(Var var) const { return Expr(diff(node_, var)); }

    /// [e, d/dt e, ..., d^n/dt^n e] evaluated at (t, eps).
    std::vector<double> jet(double t, double eps, int order) const {
        if (order < 0) throw ShapeError("jet order must be non-negative");
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(order) + 1);
        Expr cur = *this;
        out.push_back(cur.eval(t, eps));
        for (int k = 0; k < order; ++k) {
            cur = cur.derivative(Var::T);
            out.push_back(cur.eval(t, eps));
        }
        return out;
    }

    /// Chain [e, e', ..., e^(order)] of t-derivatives as expressions.
    std::vector<Expr> derivative_chain(int order) const {
        std::vector<Expr> out;
        out.reserve(static_cast<std::size_t>(order) + 1);
        out.push_back(*this);
        for (int k = 0; k < order; ++k) out.push_back(out.back().derivative(Var::T));
        return out;
    }

    /// Replaces eps by a constant and folds. The result depends on t only.
    Expr bind_eps(double eps) const { return Expr(substitute_eps(node_, eps)); }

    /// True if the expression references `var` anywhere in its tree.
    bool uses(Var var) const { return uses_node(*node_, var); }

    bool is_constant() const { return node_->op == Op::Const; }
    double constant_value() const { return node_->value; }

    /// Infix form that parses back to an equivalent expression.
    std::string str() const { return print(*node_, 0); }

    friend Expr operator+(const Expr& a, const Expr& b) { return Expr(make_add(a.node_, b.node_)); }
    friend Expr operator-(const Expr& a, const Expr& b) { return Expr(make_sub(a.node_, b.node_)); }
    friend Expr operator*(const Expr& a, const Expr& b) { return Expr(make_mul(a.node_, b.node_)); }
    friend Expr operator/(const Expr& a, const Expr& b) { return Expr(make_div(a.node_, b.node_)); }
    friend Expr operator-(const Expr& a) { return Expr(make_neg(a.node_)); }

private:
    explicit Expr(NodePtr n) : node_(std::move(n)) {}

    static NodePtr constant_node(double v) { return std::make_shared<Node>(Node{Op::Const, v}); }

    static bool is_const(const NodePtr& n, double v) {
        return n->op == Op::Const && n->value == v;
    }

    // -- smart constructors -------------------------------------------------

    static NodePtr make_add(NodePtr a, NodePtr b) {
        if (a->op == Op::Const && b->op == Op::Const) return constant_node(a->value + b->value);
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        return std::make_shared<Node>(Node{Op::Add, 0, 0, std::move(a), std::move(b)});
    }

    static NodePtr make_sub(NodePtr a, NodePtr b) {
        if (a->op == Op::Const && b->op == Op::Const) return constant_node(a->value - b->value);
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return make_neg(std::move(b));
        return std::make_shared<Node>(Node{Op::Sub, 0, 0, std::move(a), std::move(b)});
    }

    static NodePtr make_mul(NodePtr a, NodePtr b) {
        if (a->op == Op::Const && b->op == Op::Const) return constant_node(a->value * b->value);
        if (is_const(a, 0.0) || is_const(b, 0.0)) return constant_node(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        return std::make_shared<Node>(Node{Op::Mul, 0, 0, std::move(a), std::move(b)});
    }

    static NodePtr make_div(NodePtr a, NodePtr b) {
        if (a->op == Op::Const && b->op == Op::Const && b->value != 0.0)
            return constant_node(a->value / b->value);
        if (is_const(a, 0.0) && !(b->op == Op::Const && b->value == 0.0)) return constant_node(0.0);
        if (is_const(b, 1.0)) return a;
        return std::make_shared<Node>(Node{Op::Div, 0, 0, std::move(a), std::move(b)});
    }

    static NodePtr make_pow(NodePtr base, int k) {
        if (k == 0) return constant_node(1.0);
        if (k == 1) return base;
        if (base->op == Op::Const && !(base->value == 0.0 && k < 0))
            return constant_node(std::pow(base->value, k));
        auto n = std::make_shared<Node>(Node{Op::Pow, 0, k, std::move(base)});
        return n;
    }

    static NodePtr make_neg(NodePtr a) {
        if (a->op == Op::Const) return constant_node(-a->value);
        if (a->op == Op::Neg) return a->a;
        return std::make_shared<Node>(Node{Op::Neg, 0, 0, std::move(a)});
    }

    static NodePtr make_fn(Op op, NodePtr a) {
        if (a->op == Op::Const) {
            // fold only when the value is inside the domain; otherwise keep
            // the node so the error surfaces at evaluation
            const double x = a->value;
            double v = std::numeric_limits<double>::quiet_NaN();
            switch (op) {
                case Op::Sin: v = std::sin(x); break;
                case Op::Cos: v = std::cos(x); break;
                case Op::Exp: v = std::exp(x); break;
                case Op::Log: v = x > 0.0 ? std::log(x) : v; break;
                case Op::Sqrt: v = x >= 0.0 ? std::sqrt(x) : v; break;
                default: break;
            }
            if (std::isfinite(v)) return constant_node(v);
        }
        return std::make_shared<Node>(Node{op, 0, 0, std::move(a)});
    }

    // -- differentiation ----------------------------------------------------

    static NodePtr diff(const NodePtr& n, Var var) {
        switch (n->op) {
            case Op::Const: return constant_node(0.0);
            case Op::VarT: return constant_node(var == Var::T ? 1.0 : 0.0);
            case Op::VarEps: return constant_node(var == Var::Eps ? 1.0 : 0.0);
            case Op::Add: return make_add(diff(n->a, var), diff(n->b, var));
            case Op::Sub: return make_sub(diff(n->a, var), diff(n->b, var));
            case Op::Mul:
                return make_add(make_mul(diff(n->a, var), n->b), make_mul(n->a, diff(n->b, var)));
            case Op::Div:
                // (u/v)' = (u'v - uv')/v^2
                return make_div(make_sub(make_mul(diff(n->a, var), n->b),
                                         make_mul(n->a, diff(n->b, var))),
                                make_pow(n->b, 2));
            case Op::Pow:
                // (u^k)' = k u^(k-1) u'
                return make_mul(constant_node(static_cast<double>(n->exponent)),
                                make_mul(make_pow(n->a, n->exponent - 1), diff(n->a, var)));
            case Op::Neg: return make_neg(diff(n->a, var));
            case Op::Sin: return make_mul(make_fn(Op::Cos, n->a), diff(n->a, var));
            case Op::Cos: return make_neg(make_mul(make_fn(Op::Sin, n->a), diff(n->a, var)));
            case Op::Exp: return make_mul(make_fn(Op::Exp, n->a), diff(n->a, var));
            case Op::Log: return make_div(diff(n->a, var), n->a);
            case Op::Sqrt:
                return make_div(diff(n->a, var),
                                make_mul(constant_node(2.0), make_fn(Op::Sqrt, n->a)));
        }
        throw Error("unreachable expression kind");
    }

    // -- evaluation ----------------------------------------------------------

    static double finite_or_throw(double v, const char* what) {
        if (!std::isfinite(v)) throw DomainError(std::string("non-finite value in ") + what);
        return v;
    }

    static double eval_node(const Node& n, double t, double eps) {
        switch (n.op) {
            case Op::Const: return n.value;
            case Op::VarT: return t;
            case Op::VarEps: return eps;
            case Op::Add: return finite_or_throw(eval_node(*n.a, t, eps) + eval_node(*n.b, t, eps), "+");
            case Op::Sub: return finite_or_throw(eval_node(*n.a, t, eps) - eval_node(*n.b, t, eps), "-");
            case Op::Mul: return finite_or_throw(eval_node(*n.a, t, eps) * eval_node(*n.b, t, eps), "*");
            case Op::Div: {
                const double den = eval_node(*n.b, t, eps);
                if (den == 0.0) throw DomainError("division by zero");
                return finite_or_throw(eval_node(*n.a, t, eps) / den, "/");
            }
            case Op::Pow: {
                const double base = eval_node(*n.a, t, eps);
                if (base == 0.0 && n.exponent < 0) throw DomainError("zero raised to a negative power");
                return finite_or_throw(std::pow(base, n.exponent), "^");
            }
            case Op::Neg: return -eval_node(*n.a, t, eps);
            case Op::Sin: return std::sin(eval_node(*n.a, t, eps));
            case Op::Cos: return std::cos(eval_node(*n.a, t, eps));
            case Op::Exp: return finite_or_throw(std::exp(eval_node(*n.a, t, eps)), "exp");
            case Op::Log: {
                const double x = eval_node(*n.a, t, eps);
                if (x <= 0.0) throw DomainError("log of non-positive argument");
                return std::log(x);
            }
            case Op::Sqrt: {
                const double x = eval_node(*n.a, t, eps);
                if (x < 0.0) throw DomainError("sqrt of negative argument");
                return std::sqrt(x);
            }
        }
        throw Error("unreachable expression kind");
    }

    // -- substitution / queries ----------------------------------------------

    static NodePtr substitute_eps(const NodePtr& n, double eps) {
        switch (n->op) {
            case Op::Const:
            case Op::VarT: return n;
            case Op::VarEps: return constant_node(eps);
            case Op::Add: return make_add(substitute_eps(n->a, eps), substitute_eps(n->b, eps));
            case Op::Sub: return make_sub(substitute_eps(n->a, eps), substitute_eps(n->b, eps));
            case Op::Mul: return make_mul(substitute_eps(n->a, eps), substitute_eps(n->b, eps));
            case Op::Div: return make_div(substitute_eps(n->a, eps), substitute_eps(n->b, eps));
            case Op::Pow: return make_pow(substitute_eps(n->a, eps), n->exponent);
            case Op::Neg: return make_neg(substitute_eps(n->a, eps));
            default: return make_fn(n->op, substitute_eps(n->a, eps));
        }
    }

    static bool uses_node(const Node& n, Var var) {
        switch (n.op) {
            case Op::Const: return false;
            case Op::VarT: return var == Var::T;
            case Op::VarEps: return var == Var::Eps;
            default:
                if (n.a && uses_node(*n.a, var)) return true;
                return n.b && uses_node(*n.b, var);
        }
    }

    // -- printing --------------------------------------------------------------

    static int precedence(Op op) {
        switch (op) {
            case Op::Add:
            case Op::Sub: return 1;
            case Op::Mul:
            case Op::Div: return 2;
            case Op::Neg: return 3;
            case Op::Pow: return 4;
            default: return 5;
        }
    }

    static std::string print_number(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    static std::string print(const Node& n, int parent_prec) {
        std::string s;
        const int prec = precedence(n.op);
        switch (n.op) {
            case Op::Const:
                s = n.value < 0.0 ? "(" + print_number(n.value) + ")" : print_number(n.value);
                return s;
            case Op::VarT: return "t";
            case Op::VarEps: return "eps";
            case Op::Add: s = print(*n.a, prec) + " + " + print(*n.b, prec); break;
            case Op::Sub: s = print(*n.a, prec) + " - " + print(*n.b, prec + 1); break;
            case Op::Mul: s = print(*n.a, prec) + "*" + print(*n.b, prec); break;
            case Op::Div: s = print(*n.a, prec) + "/" + print(*n.b, prec + 1); break;
            case Op::Pow: s = print(*n.a, prec + 1) + "^" + (n.exponent < 0 ? "(" + std::to_string(n.exponent) + ")" : std::to_string(n.exponent)); break;
            case Op::Neg: s = "-" + print(*n.a, prec); break;
            case Op::Sin: return "sin(" + print(*n.a, 0) + ")";
            case Op::Cos: return "cos(" + print(*n.a, 0) + ")";
            case Op::Exp: return "exp(" + print(*n.a, 0) + ")";
            case Op::Log: return "log(" + print(*n.a, 0) + ")";
            case Op::Sqrt: return "sqrt(" + print(*n.a, 0) + ")";
        }
        if (prec < parent_prec) s = "(" + s + ")";
        return s;
    }

    // -- parser ----------------------------------------------------------------

    class Parser {
    public:
        explicit Parser(std::string_view src) : src_(src) {
            if (src_.empty()) throw ParseError("empty expression", 0);
        }

        Expr parse_expr() { return Expr(parse_sum()); }

        void expect_end() {
            skip_ws();
            if (pos_ != src_.size())
                throw ParseError("unexpected trailing input", pos_);
        }

    private:
        std::string_view src_;
        std::size_t pos_ = 0;

        void skip_ws() {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }

        bool consume(char c) {
            skip_ws();
            if (pos_ < src_.size() && src_[pos_] == c) {
                ++pos_;
                return true;
            }
            return false;
        }

        char peek() {
            skip_ws();
            return pos_ < src_.size() ? src_[pos_] : '\0';
        }

        NodePtr parse_sum() {
            NodePtr lhs = parse_term();
            for (;;) {
                if (consume('+')) lhs = make_add(lhs, parse_term());
                else if (consume('-')) lhs = make_sub(lhs, parse_term());
                else return lhs;
            }
        }

        NodePtr parse_term() {
            NodePtr lhs = parse_factor();
            for (;;) {
                if (consume('*')) lhs = make_mul(lhs, parse_factor());
                else if (consume('/')) lhs = make_div(lhs, parse_factor());
                else return lhs;
            }
        }

        // unary minus binds looser than ^
        NodePtr parse_factor() {
            if (consume('-')) return make_neg(parse_factor());
            return parse_power();
        }

        NodePtr parse_power() {
            NodePtr base = parse_primary();
            skip_ws();
            if (!consume('^')) return base;
            const std::size_t exp_pos = pos_;
            NodePtr e = parse_exponent();
            if (e->op != Op::Const)
                throw ParseError("exponent must be a constant integer", exp_pos);
            const double v = e->value;
            if (v != std::floor(v))
                throw ParseError("exponent must be an integer", exp_pos);
            if (std::abs(v) > kMaxExponent)
                throw ParseError("exponent out of range [-9, 9]", exp_pos);
            return make_pow(base, static_cast<int>(v));
        }

        // Right associativity: the exponent position itself parses a signed
        // power, so t^2^3 reads as t^(2^3).
        NodePtr parse_exponent() {
            if (consume('-')) return make_neg(parse_exponent());
            return parse_power();
        }

        NodePtr parse_primary() {
            skip_ws();
            if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
            const char c = src_[pos_];
            if (c == '(') {
                ++pos_;
                NodePtr inner = parse_sum();
                if (!consume(')')) throw ParseError("expected ')'", pos_);
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
            throw ParseError(std::string("unexpected character '") + c + "'", pos_);
        }

        NodePtr parse_number() {
            const std::size_t start = pos_;
            double value = 0.0;
            const char* begin = src_.data() + pos_;
            const char* end = src_.data() + src_.size();
            auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc() || ptr == begin) throw ParseError("malformed number", start);
            pos_ = static_cast<std::size_t>(ptr - src_.data());
            return constant_node(value);
        }

        NodePtr parse_identifier() {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string_view name = src_.substr(start, pos_ - start);
            if (name == "t") return std::make_shared<Node>(Node{Op::VarT});
            if (name == "eps") return std::make_shared<Node>(Node{Op::VarEps});
            Op fn;
            if (name == "sin") fn = Op::Sin;
            else if (name == "cos") fn = Op::Cos;
            else if (name == "exp") fn = Op::Exp;
            else if (name == "log") fn = Op::Log;
            else if (name == "sqrt") fn = Op::Sqrt;
            else throw ParseError("unknown identifier '" + std::string(name) + "'", start);
            if (!consume('(')) throw ParseError("expected '(' after function name", pos_);
            NodePtr arg = parse_sum();
            if (!consume(')')) throw ParseError("expected ')'", pos_);
            return make_fn(fn, arg);
        }
    };

    NodePtr node_;
};

/// Complex-valued expression as a real/imaginary pair. The parser itself is
/// real; complex coefficients enter the model through these pairs.
struct ComplexExpr {
    Expr re;
    std::optional<Expr> im;

    ComplexExpr() = default;
    ComplexExpr(Expr real) : re(std::move(real)) {}
    ComplexExpr(Expr real, Expr imag) : re(std::move(real)), im(std::move(imag)) {}

    static ComplexExpr parse(std::string_view real_src) { return ComplexExpr(Expr::parse(real_src)); }

    std::complex<double> eval(double t, double eps) const {
        return {re.eval(t, eps), im ? im->eval(t, eps) : 0.0};
    }

    ComplexExpr derivative(Expr::Var var) const {
        ComplexExpr out(re.derivative(var));
        if (im) out.im = im->derivative(var);
        return out;
    }

    ComplexExpr bind_eps(double eps) const {
        ComplexExpr out(re.bind_eps(eps));
        if (im) out.im = im->bind_eps(eps);
        return out;
    }

    bool uses(Expr::Var var) const {
        return re.uses(var) || (im && im->uses(var));
    }

    std::vector<std::complex<double>> jet(double t, double eps, int order) const {
        const std::vector<double> jr = re.jet(t, eps, order);
        std::vector<std::complex<double>> out(jr.size());
        if (im) {
            const std::vector<double> ji = im->jet(t, eps, order);
            for (std::size_t k = 0; k < jr.size(); ++k) out[k] = {jr[k], ji[k]};
        } else {
            for (std::size_t k = 0; k < jr.size(); ++k) out[k] = jr[k];
        }
        return out;
    }
};

} // namespace sbvp
