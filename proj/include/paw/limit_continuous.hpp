#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "paw/errors.hpp"
#include "paw/model.hpp"

namespace paw {

/// Solution of the tail integral equation
///   G(t) = [ int_0^t G(t-s) d_s L(t,s) + H(t) + P(X>t) ]
///          / ( t/(EX+EZ) + Enu ),   G(0) = 1,
/// solved forward on a uniform grid with upper and lower Stieltjes sums
/// bracketing the kernel integral at every point.
struct ContinuousLimit {
    std::vector<double> grid;     // t_k = k h, k = 0..m
    std::vector<double> g;        // midpoint of the two bracketing solves
    std::vector<double> g_upper;  // upper Stieltjes sum solution
    std::vector<double> g_lower;  // lower Stieltjes sum solution
    double gamma = 0.0;           // (EX+EZ)/EY
    double h = 0.0;
    double t_max = 0.0;
    double max_bracket = 0.0;
};

/// L(t,s) = (s F(s) + t (1-F(s)))/(EX+EZ) - H(s), 0 <= s <= t.
/// Increasing in s: the integrator of the kernel integral.
inline double eval_kernel_L(const ModelConfig& cfg, double t, double s) {
    require_valid(cfg);
    if (cfg.mode != Mode::Continuous)
        throw ConfigError("eval_kernel_L requires a continuous-mode config");
    if (s < 0.0 || s > t) throw ConfigError("eval_kernel_L requires 0 <= s <= t");
    const Moments m = theoretical_moments(cfg);
    const double f = eval_F(cfg, s);
    return (s * f + t * (1.0 - f)) / (m.ex + m.ez) - eval_H(cfg, s);
}

/// Forward sweep over t_k = k h. For each t the cell increments
/// dL_i = L(t, ih) - L(t, (i-1)h) are exact and nonnegative; since G is
/// nonincreasing, evaluating G at the right (resp. left) end of each
/// s-cell gives an upper (resp. lower) Stieltjes sum. The lower sum's
/// first cell contains G(t) itself; that scalar is resolved by
/// fixed-point iteration (the cell increment is O(h), so the map is a
/// strong contraction). G is taken as the midpoint of the two solutions.
inline ContinuousLimit solve_G(const ModelConfig& cfg, double t_max, double h) {
    require_valid(cfg);
    if (cfg.mode != Mode::Continuous)
        throw ConfigError("solve_G requires a continuous-mode config");
    if (!(h > 0.0) || !(t_max >= h)) throw ConfigError("solve_G requires h > 0, t_max >= h");

    const Moments mom = theoretical_moments(cfg);
    const double exz = mom.ex + mom.ez;
    const auto m = static_cast<std::size_t>(std::llround(t_max / h));

    // dL_i(t) = A_i + t B_i on cell [(i-1)h, ih].
    std::vector<double> F(m + 1), H(m + 1), A(m + 1), B(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        const double s = static_cast<double>(i) * h;
        F[i] = eval_F(cfg, s);
        H[i] = eval_H(cfg, s);
    }
    for (std::size_t i = 1; i <= m; ++i) {
        const double si = static_cast<double>(i) * h;
        const double sp = si - h;
        A[i] = (si * F[i] - sp * F[i - 1]) / exz + (H[i - 1] - H[i]);
        B[i] = (F[i - 1] - F[i]) / exz;
    }

    ContinuousLimit lim;
    lim.gamma = exz / mom.ey;
    lim.h = h;
    lim.t_max = t_max;
    lim.grid.resize(m + 1);
    lim.g.assign(m + 1, 1.0);
    lim.g_upper.assign(m + 1, 1.0);
    lim.g_lower.assign(m + 1, 1.0);
    lim.grid[0] = 0.0;

    for (std::size_t k = 1; k <= m; ++k) {
        const double t = static_cast<double>(k) * h;
        lim.grid[k] = t;
        const double denom = t / exz + mom.enu;
        const double rhs_tail = H[k] + cfg.x_law.tail(t);

        double upper_sum = 0.0;   // G at right cell ends: g[k-1] .. g[0]
        double lower_tail = 0.0;  // G at left cell ends, cells 2..k
        double dl1 = 0.0;
        for (std::size_t i = 1; i <= k; ++i) {
            const double dl = std::max(A[i] + t * B[i], 0.0);
            upper_sum += lim.g[k - i] * dl;
            if (i == 1)
                dl1 = dl;
            else
                lower_tail += lim.g[k - i + 1] * dl;
        }

        const double g_up = (upper_sum + rhs_tail) / denom;

        // Lower sum: first cell uses the unknown G(t_k).
        double g_lo = lim.g[k - 1];
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            const double next = (g_lo * dl1 + lower_tail + rhs_tail) / denom;
            if (std::abs(next - g_lo) <= 1e-12) {
                g_lo = next;
                converged = true;
                break;
            }
            g_lo = next;
        }
        if (!converged) {
            std::ostringstream msg;
            msg << "fixed point did not converge at k=" << k
                << " (bracket width " << (g_up - g_lo) << ")";
            throw NumericalError(msg.str());
        }
        if (g_lo > g_up + 1e-9) {
            std::ostringstream msg;
            msg << "inverted bracket at k=" << k << ": lower=" << g_lo << " upper=" << g_up;
            throw NumericalError(msg.str());
        }

        lim.g_upper[k] = g_up;
        lim.g_lower[k] = g_lo;
        lim.g[k] = 0.5 * (g_up + g_lo);
        lim.max_bracket = std::max(lim.max_bracket, g_up - g_lo);

        if (lim.g[k] > lim.g[k - 1] + 1e-12)
            throw NumericalError("solved G is not nonincreasing: quadrature instability");
        if (lim.g[k] < -1e-12 || lim.g[k] > 1.0 + 1e-9)
            throw NumericalError("solved G left [0, 1]");
    }
    return lim;
}

/// Decomposition of the absolutely continuous kernel weights
/// w_{t,s} = f(s) + b(s)/(t+d), plus the inhomogeneity r(t).
class ContinuousCoefficients {
public:
    explicit ContinuousCoefficients(const ModelConfig& cfg)
        : cfg_(cfg), m_(theoretical_moments(cfg)) {
        require_valid(cfg);
        if (cfg.mode != Mode::Continuous)
            throw ConfigError("continuous_coefficients requires a continuous-mode config");
        d_ = (m_.ex + m_.ez) * m_.enu;
    }

    double d() const { return d_; }

    double b(double s) const {
        const double exz = m_.ex + m_.ez;
        return eval_F(cfg_, s) - (s + d_) * y_density(cfg_, s) + h_density(cfg_, s) * exz;
    }

    double r(double t) const {
        const double exz = m_.ex + m_.ez;
        return (eval_H(cfg_, t) + cfg_.x_law.tail(t)) / (t / exz + m_.enu);
    }

    /// int_0^inf b(s) ds by quadrature over smooth segments; equals
    /// -(EX+EZ) identically.
    double integral_b() const {
        return integrate([this](double s) { return b(s); });
    }

    /// int_0^inf s f(s) ds = EY by quadrature (used for the gamma ratio).
    double integral_s_density() const {
        return integrate([this](double s) { return s * y_density(cfg_, s); });
    }

private:
    template <typename Fn>
    double integrate(Fn&& fn) const {
        const double cutoff = y_tail_cutoff(cfg_, 1e-14);
        std::vector<double> knots = y_density_breakpoints(cfg_);
        knots.push_back(0.0);
        knots.push_back(cutoff);
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

        boost::math::quadrature::tanh_sinh<double> quad;
        double total = 0.0;
        for (std::size_t i = 1; i < knots.size(); ++i) {
            if (knots[i] <= knots[i - 1]) continue;
            total += quad.integrate(fn, knots[i - 1], knots[i], 1e-12);
        }
        return total;
    }

    ModelConfig cfg_;
    Moments m_;
    double d_ = 0.0;
};

inline ContinuousCoefficients continuous_coefficients(const ModelConfig& cfg) {
    return ContinuousCoefficients(cfg);
}

/// gamma = (EX+EZ)/EY, cross-checked against -int b / int s f(s) ds.
inline GammaForms gamma_continuous(const ModelConfig& cfg) {
    require_valid(cfg);
    if (cfg.mode != Mode::Continuous)
        throw ConfigError("gamma_continuous requires a continuous-mode config");
    const Moments m = theoretical_moments(cfg);
    GammaForms g;
    g.closed_form = (m.ex + m.ez) / m.ey;
    const ContinuousCoefficients coef(cfg);
    g.ratio_form = -coef.integral_b() / coef.integral_s_density();
    if (std::abs(g.ratio_form - g.closed_form) > 1e-6 * std::abs(g.closed_form)) {
        std::ostringstream msg;
        msg << "gamma forms disagree: closed=" << g.closed_form << " ratio=" << g.ratio_form;
        throw NumericalError(msg.str());
    }
    return g;
}

}  // namespace paw
