#pragma once
// ScalarField: an evaluable real function of t on [t0, +inf) backed by an
// expression tree.

#include <functional>
#include <string>
#include <utility>

#include "oscil/expr.hpp"

namespace oscil {

class ScalarField {
public:
    ScalarField() = default;

    ScalarField(Expr expr, double t0)
        : expr_(std::move(expr)), t0_(t0), prog_(expr_.compile()) {}

    static ScalarField parse(std::string_view source, double t0) {
        return ScalarField(parse_expr(source), t0);
    }

    static ScalarField constant(double v, double t0) {
        return ScalarField(Expr::number(v), t0);
    }

    double operator()(double t) const { return prog_.eval(t); }
    double eval(double t) const { return prog_.eval(t); }

    const Expr& expr() const { return expr_; }
    double t0() const { return t0_; }

    // Derivative as a new field; throws NonDifferentiableError for abs/sign.
    ScalarField derivative() const { return ScalarField(expr_.derivative(), t0_); }

    // Dense evaluability check; rethrows the first fault encountered.
    void check_evaluable(double from, double to, int samples = 512) const {
        for (int i = 0; i <= samples; ++i) {
            double t = from + (to - from) * i / samples;
            (void)eval(t);
        }
    }

    std::function<double(double)> fn() const {
        auto prog = prog_;
        return [prog](double t) { return prog.eval(t); };
    }

private:
    Expr expr_;
    double t0_ = 0.0;
    CompiledExpr prog_;
};

}  // namespace oscil
