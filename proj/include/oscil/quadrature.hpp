#pragma once
// Adaptive quadrature on finite intervals: Gauss-Kronrod 7/15 pair with
// recursive bisection and local error control.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace oscil {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;       // accumulated error estimate of accepted panels
    long panels = 0;          // accepted panel count
    bool budget_exhausted = false;
};

class QuadratureBudgetError : public std::runtime_error {
public:
    QuadratureBudgetError(std::string what, QuadResult partial)
        : std::runtime_error(std::move(what)), partial_(partial) {}
    const QuadResult& partial() const { return partial_; }

private:
    QuadResult partial_;
};

namespace detail {

// Kronrod-15 abscissae on [-1, 1] (non-negative half) and weights; the
// embedded Gauss-7 rule uses the odd-index nodes.
inline constexpr double kGK15Node[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGK15WtK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGK15WtG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelEstimate {
    double kronrod;
    double gauss;
    double err() const { return std::fabs(kronrod - gauss); }
};

template <typename F>
PanelEstimate gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 8; ++i) {
        double x = h * kGK15Node[i];
        double v = (i == 7) ? f(c) : f(c - x) + f(c + x);
        k += kGK15WtK[i] * v;
        if (i % 2 == 1) g += kGK15WtG[i / 2] * v;
    }
    return {k * h, g * h};
}

template <typename F>
void adapt(F& f, double a, double b, double tol_abs, double tol_rel, double span,
           int depth, long budget, QuadResult& out) {
    PanelEstimate est = gk15(f, a, b);
    double scale = std::fabs(est.kronrod);
    double local_tol =
        std::max(tol_abs * (b - a) / span, tol_rel * scale);
    if ((est.err() <= local_tol && depth >= 2) || depth >= 52) {
        out.value += est.kronrod;
        out.error += est.err();
        out.panels += 1;
        return;
    }
    if (out.panels >= budget) {
        out.value += est.kronrod;
        out.error += est.err();
        out.panels += 1;
        out.budget_exhausted = true;
        return;
    }
    double m = 0.5 * (a + b);
    adapt(f, a, m, tol_abs, tol_rel, span, depth + 1, budget, out);
    if (!out.budget_exhausted)
        adapt(f, m, b, tol_abs, tol_rel, span, depth + 1, budget, out);
    else {
        PanelEstimate rest = gk15(f, m, b);
        out.value += rest.kronrod;
        out.error += rest.err();
    }
}

}  // namespace detail

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    long budget = 1L << 20;  // max accepted panels
};

// Integrate f over [a, b]; never throws on budget exhaustion (flag is set).
template <typename F>
QuadResult integrate_adaptive(F&& f, double a, double b, QuadOptions opts = {}) {
    QuadResult out;
    if (a == b) return out;
    detail::adapt(f, a, b, opts.abs_tol, opts.rel_tol, b - a, 0, opts.budget, out);
    return out;
}

// Contractual form: |value - true integral| <= max(tol, err); throws
// QuadratureBudgetError carrying the partial value when the subdivision
// budget runs out before the tolerance is met.
inline QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                            double tol, long budget = 1L << 20) {
    if (!(a < b)) throw std::invalid_argument("integrate: requires a < b");
    QuadOptions opts;
    opts.abs_tol = tol;
    opts.rel_tol = tol;
    opts.budget = budget;
    QuadResult r = integrate_adaptive(f, a, b, opts);
    if (r.budget_exhausted)
        throw QuadratureBudgetError("quadrature budget exhausted", r);
    return r;
}

}  // namespace oscil
