#pragma once
// Coefficient expression language: parse, evaluate, differentiate, print.
//
// Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | power
//   power  := atom ("^" factor)?
//   atom   := number | "t" | "pi" | "e" | func "(" expr ")" | "(" expr ")"
//
// "^" binds tighter than unary minus (-t^2 is -(t^2)) and is
// right-associative (2^3^2 is 2^(3^2)).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oscil {

class EvalFault : public std::runtime_error {
public:
    EvalFault(std::string what, double t)
        : std::runtime_error(std::move(what)), t_(t) {}
    double at() const { return t_; }

private:
    double t_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::string what, std::size_t offset)
        : std::runtime_error(std::move(what)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class NonDifferentiableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExprOp : std::uint8_t {
    Number,
    TimeVar,
    Pi,
    Euler,
    Neg,
    Sin,
    Cos,
    Tan,
    Atan,
    Exp,
    Ln,
    Abs,
    Sqrt,
    Sign,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
};

inline bool expr_op_is_unary(ExprOp op) {
    return op >= ExprOp::Neg && op <= ExprOp::Sign;
}

inline bool expr_op_is_binary(ExprOp op) { return op >= ExprOp::Add; }

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprOp op;
    double number = 0.0;
    ExprNodePtr a;
    ExprNodePtr b;
};

// Flattened postfix program for fast repeated evaluation.
class CompiledExpr {
public:
    CompiledExpr() = default;

    double eval(double t) const {
        double stack[kMaxStack];
        int sp = 0;
        for (const Instr& in : code_) {
            switch (in.op) {
            case ExprOp::Number: stack[sp++] = in.num; break;
            case ExprOp::TimeVar: stack[sp++] = t; break;
            case ExprOp::Pi: stack[sp++] = kPi; break;
            case ExprOp::Euler: stack[sp++] = kE; break;
            case ExprOp::Neg: stack[sp - 1] = -stack[sp - 1]; break;
            case ExprOp::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
            case ExprOp::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
            case ExprOp::Tan: stack[sp - 1] = std::tan(stack[sp - 1]); break;
            case ExprOp::Atan: stack[sp - 1] = std::atan(stack[sp - 1]); break;
            case ExprOp::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
            case ExprOp::Ln:
                if (stack[sp - 1] <= 0.0) fault("ln of non-positive value", t);
                stack[sp - 1] = std::log(stack[sp - 1]);
                break;
            case ExprOp::Abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
            case ExprOp::Sqrt:
                if (stack[sp - 1] < 0.0) fault("sqrt of negative value", t);
                stack[sp - 1] = std::sqrt(stack[sp - 1]);
                break;
            case ExprOp::Sign: {
                double v = stack[sp - 1];
                stack[sp - 1] = (v > 0.0) - (v < 0.0);
                break;
            }
            case ExprOp::Add: --sp; stack[sp - 1] += stack[sp]; break;
            case ExprOp::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
            case ExprOp::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
            case ExprOp::Div:
                --sp;
                if (stack[sp] == 0.0) fault("division by zero", t);
                stack[sp - 1] /= stack[sp];
                break;
            case ExprOp::Pow: {
                --sp;
                double base = stack[sp - 1], ex = stack[sp];
                if (base < 0.0 && ex != std::floor(ex))
                    fault("non-integer power of negative base", t);
                stack[sp - 1] = std::pow(base, ex);
                break;
            }
            }
        }
        double r = stack[0];
        if (!std::isfinite(r)) fault("non-finite result", t);
        return r;
    }

    bool empty() const { return code_.empty(); }

private:
    friend class Expr;
    static constexpr int kMaxStack = 128;
    static constexpr double kPi = 3.14159265358979323846;
    static constexpr double kE = 2.71828182845904523536;

    struct Instr {
        ExprOp op;
        double num;
    };
    std::vector<Instr> code_;

    [[noreturn]] static void fault(const char* what, double t) {
        throw EvalFault(std::string("domain fault: ") + what, t);
    }
};

// Immutable expression tree. Values are cheap to copy and safe to share
// across threads after construction.
class Expr {
public:
    Expr() : node_(number_node(0.0)) {}

    static Expr number(double v) { return Expr(number_node(v)); }
    static Expr time() { return Expr(make(ExprOp::TimeVar)); }
    static Expr pi() { return Expr(make(ExprOp::Pi)); }
    static Expr euler() { return Expr(make(ExprOp::Euler)); }

    static Expr unary(ExprOp op, Expr a) {
        auto n = std::make_shared<ExprNode>();
        n->op = op;
        n->a = a.node_;
        return Expr(std::move(n));
    }

    static Expr binary(ExprOp op, Expr a, Expr b) {
        auto n = std::make_shared<ExprNode>();
        n->op = op;
        n->a = a.node_;
        n->b = b.node_;
        return Expr(std::move(n));
    }

    const ExprNode& root() const { return *node_; }

    bool is_number() const { return node_->op == ExprOp::Number; }
    bool is_number(double v) const {
        return node_->op == ExprOp::Number && node_->number == v;
    }
    double number_value() const { return node_->number; }

    double eval(double t) const { return eval_node(*node_, t); }

    CompiledExpr compile() const {
        CompiledExpr prog;
        int depth = 0, maxd = 0;
        compile_node(*node_, prog.code_, depth, maxd);
        if (maxd >= CompiledExpr::kMaxStack)
            throw std::runtime_error("expression too deep to compile");
        return prog;
    }

    Expr derivative() const { return diff_node(*node_); }

    std::string str() const {
        std::string out;
        print_node(*node_, out, 0);
        return out;
    }

    bool same(const Expr& other) const { return same_node(*node_, *other.node_); }

private:
    explicit Expr(ExprNodePtr n) : node_(std::move(n)) {}

    ExprNodePtr node_;

    static ExprNodePtr make(ExprOp op) {
        auto n = std::make_shared<ExprNode>();
        n->op = op;
        return n;
    }

    static ExprNodePtr number_node(double v) {
        auto n = std::make_shared<ExprNode>();
        n->op = ExprOp::Number;
        n->number = v;
        return n;
    }

    static double eval_node(const ExprNode& n, double t) {
        switch (n.op) {
        case ExprOp::Number: return n.number;
        case ExprOp::TimeVar: return t;
        case ExprOp::Pi: return CompiledExpr::kPi;
        case ExprOp::Euler: return CompiledExpr::kE;
        default: break;
        }
        double a = eval_node(*n.a, t);
        double r;
        if (expr_op_is_unary(n.op)) {
            switch (n.op) {
            case ExprOp::Neg: r = -a; break;
            case ExprOp::Sin: r = std::sin(a); break;
            case ExprOp::Cos: r = std::cos(a); break;
            case ExprOp::Tan: r = std::tan(a); break;
            case ExprOp::Atan: r = std::atan(a); break;
            case ExprOp::Exp: r = std::exp(a); break;
            case ExprOp::Ln:
                if (a <= 0.0) CompiledExpr::fault("ln of non-positive value", t);
                r = std::log(a);
                break;
            case ExprOp::Abs: r = std::fabs(a); break;
            case ExprOp::Sqrt:
                if (a < 0.0) CompiledExpr::fault("sqrt of negative value", t);
                r = std::sqrt(a);
                break;
            default: r = (a > 0.0) - (a < 0.0); break;  // Sign
            }
        } else {
            double b = eval_node(*n.b, t);
            switch (n.op) {
            case ExprOp::Add: r = a + b; break;
            case ExprOp::Sub: r = a - b; break;
            case ExprOp::Mul: r = a * b; break;
            case ExprOp::Div:
                if (b == 0.0) CompiledExpr::fault("division by zero", t);
                r = a / b;
                break;
            default:  // Pow
                if (a < 0.0 && b != std::floor(b))
                    CompiledExpr::fault("non-integer power of negative base", t);
                r = std::pow(a, b);
                break;
            }
        }
        if (!std::isfinite(r)) CompiledExpr::fault("non-finite result", t);
        return r;
    }

    static void compile_node(const ExprNode& n, std::vector<CompiledExpr::Instr>& code,
                             int& depth, int& maxd) {
        if (n.a) compile_node(*n.a, code, depth, maxd);
        if (n.b) compile_node(*n.b, code, depth, maxd);
        if (n.a) --depth;
        if (n.b) --depth;
        code.push_back({n.op, n.number});
        ++depth;
        if (depth > maxd) maxd = depth;
    }

    static bool same_node(const ExprNode& x, const ExprNode& y) {
        if (x.op != y.op) return false;
        if (x.op == ExprOp::Number)
            return x.number == y.number || (std::isnan(x.number) && std::isnan(y.number));
        if (x.a && !same_node(*x.a, *y.a)) return false;
        if (x.b && !same_node(*x.b, *y.b)) return false;
        return true;
    }

    // --- derivative with light constant folding -------------------------

    static Expr wrap(const ExprNodePtr& n) { return Expr(n); }

    static Expr fadd(Expr a, Expr b) {
        if (a.is_number() && b.is_number()) return number(a.number_value() + b.number_value());
        if (a.is_number(0.0)) return b;
        if (b.is_number(0.0)) return a;
        return binary(ExprOp::Add, a, b);
    }
    static Expr fsub(Expr a, Expr b) {
        if (a.is_number() && b.is_number()) return number(a.number_value() - b.number_value());
        if (b.is_number(0.0)) return a;
        if (a.is_number(0.0)) return fneg(b);
        return binary(ExprOp::Sub, a, b);
    }
    static Expr fneg(Expr a) {
        if (a.is_number()) return number(-a.number_value());
        if (a.root().op == ExprOp::Neg) return wrap(a.root().a);
        return unary(ExprOp::Neg, a);
    }
    static Expr fmul(Expr a, Expr b) {
        if (a.is_number() && b.is_number()) return number(a.number_value() * b.number_value());
        if (a.is_number(0.0) || b.is_number(0.0)) return number(0.0);
        if (a.is_number(1.0)) return b;
        if (b.is_number(1.0)) return a;
        return binary(ExprOp::Mul, a, b);
    }
    static Expr fdiv(Expr a, Expr b) {
        if (a.is_number(0.0)) return number(0.0);
        if (b.is_number(1.0)) return a;
        if (a.is_number() && b.is_number() && b.number_value() != 0.0)
            return number(a.number_value() / b.number_value());
        return binary(ExprOp::Div, a, b);
    }
    static Expr fpow(Expr a, Expr b) {
        if (b.is_number(1.0)) return a;
        if (b.is_number(0.0)) return number(1.0);
        return binary(ExprOp::Pow, a, b);
    }

    static Expr diff_node(const ExprNode& n) {
        switch (n.op) {
        case ExprOp::Number:
        case ExprOp::Pi:
        case ExprOp::Euler: return number(0.0);
        case ExprOp::TimeVar: return number(1.0);
        case ExprOp::Abs:
        case ExprOp::Sign:
            throw NonDifferentiableError("abs/sign are not differentiable");
        default: break;
        }
        Expr a = wrap(n.a);
        Expr da = diff_node(*n.a);
        switch (n.op) {
        case ExprOp::Neg: return fneg(da);
        case ExprOp::Sin: return fmul(unary(ExprOp::Cos, a), da);
        case ExprOp::Cos: return fneg(fmul(unary(ExprOp::Sin, a), da));
        case ExprOp::Tan:
            return fdiv(da, fpow(unary(ExprOp::Cos, a), number(2.0)));
        case ExprOp::Atan:
            return fdiv(da, fadd(number(1.0), fpow(a, number(2.0))));
        case ExprOp::Exp: return fmul(unary(ExprOp::Exp, a), da);
        case ExprOp::Ln: return fdiv(da, a);
        case ExprOp::Sqrt:
            return fdiv(da, fmul(number(2.0), unary(ExprOp::Sqrt, a)));
        default: break;
        }
        Expr b = wrap(n.b);
        Expr db = diff_node(*n.b);
        switch (n.op) {
        case ExprOp::Add: return fadd(da, db);
        case ExprOp::Sub: return fsub(da, db);
        case ExprOp::Mul: return fadd(fmul(da, b), fmul(a, db));
        case ExprOp::Div:
            return fdiv(fsub(fmul(da, b), fmul(a, db)), fpow(b, number(2.0)));
        default:  // Pow
            if (b.is_number()) {
                double k = b.number_value();
                return fmul(fmul(number(k), fpow(a, number(k - 1.0))), da);
            }
            // f^g = f^g * (g' ln f + g f'/f); requires f > 0 at evaluation.
            return fmul(fpow(a, b),
                        fadd(fmul(db, unary(ExprOp::Ln, a)), fmul(b, fdiv(da, a))));
        }
    }

    // --- printer --------------------------------------------------------

    static int prec(const ExprNode& n) {
        switch (n.op) {
        case ExprOp::Add:
        case ExprOp::Sub: return 1;
        case ExprOp::Mul:
        case ExprOp::Div: return 2;
        case ExprOp::Neg: return 3;
        case ExprOp::Pow: return 4;
        default: return 5;
        }
    }

    static const char* func_name(ExprOp op) {
        switch (op) {
        case ExprOp::Sin: return "sin";
        case ExprOp::Cos: return "cos";
        case ExprOp::Tan: return "tan";
        case ExprOp::Atan: return "atan";
        case ExprOp::Exp: return "exp";
        case ExprOp::Ln: return "ln";
        case ExprOp::Abs: return "abs";
        case ExprOp::Sqrt: return "sqrt";
        case ExprOp::Sign: return "sign";
        default: return "?";
        }
    }

    static void print_number(double v, std::string& out) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
    }

    static void print_child(const ExprNode& c, std::string& out, bool parens) {
        if (parens) out += '(';
        print_node(c, out, 0);
        if (parens) out += ')';
    }

    static void print_node(const ExprNode& n, std::string& out, int) {
        switch (n.op) {
        case ExprOp::Number: print_number(n.number, out); return;
        case ExprOp::TimeVar: out += 't'; return;
        case ExprOp::Pi: out += "pi"; return;
        case ExprOp::Euler: out += 'e'; return;
        case ExprOp::Neg:
            out += '-';
            // Parenthesized literal keeps "-(4)" distinct from the literal -4.
            print_child(*n.a, out, prec(*n.a) <= 3 || n.a->op == ExprOp::Number);
            return;
        case ExprOp::Add:
            print_child(*n.a, out, false);
            out += '+';
            print_child(*n.b, out, prec(*n.b) <= 1);
            return;
        case ExprOp::Sub:
            print_child(*n.a, out, false);
            out += '-';
            print_child(*n.b, out, prec(*n.b) <= 1);
            return;
        case ExprOp::Mul:
            print_child(*n.a, out, prec(*n.a) < 2);
            out += '*';
            print_child(*n.b, out, prec(*n.b) <= 2);
            return;
        case ExprOp::Div:
            print_child(*n.a, out, prec(*n.a) < 2);
            out += '/';
            print_child(*n.b, out, prec(*n.b) <= 2);
            return;
        case ExprOp::Pow:
            print_child(*n.a, out, prec(*n.a) <= 4);
            out += '^';
            print_child(*n.b, out, prec(*n.b) < 3);
            return;
        default:
            out += func_name(n.op);
            out += '(';
            print_node(*n.a, out, 0);
            out += ')';
            return;
        }
    }

    friend class ExprParser;
};

// Recursive-descent parser over the grammar above.
class ExprParser {
public:
    static Expr parse(std::string_view src) {
        ExprParser p(src);
        Expr e = p.parse_sum();
        p.skip_ws();
        if (p.pos_ != src.size())
            throw ParseError("syntax error at offset " + std::to_string(p.pos_) +
                                 ": expected '+', '-', '*', '/', '^', or end of input",
                             p.pos_);
        return e;
    }

private:
    explicit ExprParser(std::string_view src) : src_(src) {}

    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t'))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void expected_atom() {
        throw ParseError("syntax error at offset " + std::to_string(pos_) +
                             ": expected number, 't', 'pi', 'e', function, '(', or '-'",
                         pos_);
    }

    Expr parse_sum() {
        Expr e = parse_term();
        for (;;) {
            if (eat('+'))
                e = Expr::binary(ExprOp::Add, e, parse_term());
            else if (eat('-'))
                e = Expr::binary(ExprOp::Sub, e, parse_term());
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            if (eat('*'))
                e = Expr::binary(ExprOp::Mul, e, parse_factor());
            else if (eat('/'))
                e = Expr::binary(ExprOp::Div, e, parse_factor());
            else
                return e;
        }
    }

    Expr parse_factor() {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '-') {
            ++pos_;
            Expr inner = parse_factor();
            // Fold a negated literal so printing -4 round-trips structurally.
            if (inner.is_number())
                return Expr::number(-inner.number_value());
            return Expr::unary(ExprOp::Neg, inner);
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (eat('^')) return Expr::binary(ExprOp::Pow, base, parse_factor());
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) expected_atom();
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            if (!eat(')'))
                throw ParseError("syntax error at offset " + std::to_string(pos_) +
                                     ": expected ')'",
                                 pos_);
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return parse_ident();
        expected_atom();
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
                while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
            } else {
                pos_ = mark;  // "e" here is the named constant, not an exponent
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        if (text == "." )
            throw ParseError("syntax error at offset " + std::to_string(start) +
                                 ": malformed number",
                             start);
        return Expr::number(std::strtod(text.c_str(), nullptr));
    }

    Expr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               ((src_[pos_] >= 'a' && src_[pos_] <= 'z') ||
                (src_[pos_] >= 'A' && src_[pos_] <= 'Z') ||
                (src_[pos_] >= '0' && src_[pos_] <= '9')))
            ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);
        if (name == "t") return Expr::time();
        if (name == "pi") return Expr::pi();
        if (name == "e") return Expr::euler();

        ExprOp op;
        if (name == "sin") op = ExprOp::Sin;
        else if (name == "cos") op = ExprOp::Cos;
        else if (name == "tan") op = ExprOp::Tan;
        else if (name == "atan") op = ExprOp::Atan;
        else if (name == "exp") op = ExprOp::Exp;
        else if (name == "ln") op = ExprOp::Ln;
        else if (name == "abs") op = ExprOp::Abs;
        else if (name == "sqrt") op = ExprOp::Sqrt;
        else if (name == "sign") op = ExprOp::Sign;
        else
            throw ParseError("unknown identifier '" + std::string(name) +
                                 "' at offset " + std::to_string(start),
                             start);

        if (!eat('('))
            throw ParseError("syntax error at offset " + std::to_string(pos_) +
                                 ": expected '(' after function name",
                             pos_);
        Expr arg = parse_sum();
        if (!eat(')'))
            throw ParseError("syntax error at offset " + std::to_string(pos_) +
                                 ": expected ')'",
                             pos_);
        return Expr::unary(op, arg);
    }
};

inline Expr parse_expr(std::string_view src) {
    if (src.empty()) throw ParseError("empty expression", 0);
    return ExprParser::parse(src);
}

}  // namespace oscil
