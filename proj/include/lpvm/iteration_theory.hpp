#pragma once

// The scalar majorant recurrence v_{k+1} = phi_t(v_k),
// phi_t(v) = alpha + beta t exp(t (1 + v)), that bounds sup|dF/dx| along
// the Picard iteration in the non-relativistic model: its fixed points,
// the critical time and the behaviour of the iterates.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lpvm {

struct PhiParams {
    double alpha = 1.0;  ///< offset, >= 0
    double beta = 1.0;   ///< gain, > 0

    void validate() const {
        if (!(alpha >= 0.0)) throw std::invalid_argument("PhiParams: alpha must be >= 0");
        if (!(beta > 0.0)) throw std::invalid_argument("PhiParams: beta must be > 0");
    }
};

/// alpha + beta t e^{t(1+v)}; +inf once the exponent passes 700.
inline double phi(double v, double t, const PhiParams& prm) {
    if (t < 0.0) throw std::invalid_argument("phi: t must be >= 0");
    if (t == 0.0) return prm.alpha;
    const double e = t * (1.0 + v);
    if (e > 700.0) return std::numeric_limits<double>::infinity();
    return prm.alpha + prm.beta * t * std::exp(e);
}

/// d phi / dv = beta t^2 e^{t(1+v)}.
inline double phi_derivative(double v, double t, const PhiParams& prm) {
    const double e = t * (1.0 + v);
    if (e > 700.0) return std::numeric_limits<double>::infinity();
    return prm.beta * t * t * std::exp(e);
}

namespace detail {

/// Root of an increasing g on (0, inf) with g(0) < 0, to |g| <= 1e-12.
template <class G>
double increasing_root(G&& g) {
    double lo = 0.0, hi = 1.0;
    while (g(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw std::runtime_error("increasing_root: no sign change");
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::abs(gm) <= 1e-12 || mid == lo || mid == hi) return mid;
        (gm < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Root of beta t^2 e^{alpha t^2 + 2t} = 1, the critical-time equation as
/// published. See tangency_time() for the exact tangency of phi_t.
inline double compute_T1(const PhiParams& prm) {
    prm.validate();
    return detail::increasing_root([&](double t) {
        return prm.beta * t * t * std::exp(prm.alpha * t * t + 2.0 * t) - 1.0;
    });
}

/// Time at which phi_t(v) = v and phi_t'(v) = 1 hold simultaneously.
/// Eliminating v gives v = alpha + 1/t and beta t^2 e^{(1+alpha) t + 1} = 1.
inline double tangency_time(const PhiParams& prm) {
    prm.validate();
    return detail::increasing_root([&](double t) {
        return prm.beta * t * t * std::exp((1.0 + prm.alpha) * t + 1.0) - 1.0;
    });
}

/// Abscissa where phi_t' = 1: (1/t) ln(1/(beta t^2)) - 1.
inline double x_tangent(double t, double beta) {
    if (!(t > 0.0)) throw std::invalid_argument("x_tangent: t must be > 0");
    return std::log(1.0 / (beta * t * t)) / t - 1.0;
}

enum class FixedPointKind { Two, Tangent, None, Degenerate };

struct FixedPoints {
    FixedPointKind kind = FixedPointKind::None;
    double v_low = std::numeric_limits<double>::quiet_NaN();   ///< stable point (or the unique one)
    double v_high = std::numeric_limits<double>::quiet_NaN();  ///< unstable point
    double min_gap = 0.0;       ///< min over v of phi_t(v) - v
    bool stability_ok = true;   ///< phi'(v_low) < 1 < phi'(v_high) for Two
};

/// Solves phi_t(v) = v. phi_t - id is convex with its minimum at
/// x_tangent(t), so each side of the minimiser holds at most one root.
inline FixedPoints fixed_points(double t, const PhiParams& prm, double tangent_tol = 1e-10) {
    prm.validate();
    if (t < 0.0) throw std::invalid_argument("fixed_points: t must be >= 0");
    FixedPoints fp;
    if (t == 0.0) {
        fp.kind = FixedPointKind::Degenerate;
        fp.v_low = prm.alpha;
        return fp;
    }
    const auto gap = [&](double v) { return phi(v, t, prm) - v; };
    const double vstar = x_tangent(t, prm.beta);
    fp.min_gap = gap(vstar);
    if (std::abs(fp.min_gap) <= tangent_tol) {
        fp.kind = FixedPointKind::Tangent;
        fp.v_low = fp.v_high = vstar;
        return fp;
    }
    if (fp.min_gap > 0.0) return fp;

    auto bisect = [&](double a, double b) {  // gap(a) and gap(b) of opposite sign
        const bool a_pos = gap(a) > 0.0;
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (a + b);
            if (mid == a || mid == b) break;
            ((gap(mid) > 0.0) == a_pos ? a : b) = mid;
        }
        return 0.5 * (a + b);
    };
    double step = 1.0;
    double lo = vstar - step;
    while (gap(lo) <= 0.0) lo = vstar - (step *= 2.0);
    step = 1.0;
    double hi = vstar + step;
    while (gap(hi) <= 0.0) hi = vstar + (step *= 2.0);

    fp.kind = FixedPointKind::Two;
    fp.v_low = bisect(lo, vstar);
    fp.v_high = bisect(vstar, hi);
    fp.stability_ok = phi_derivative(fp.v_low, t, prm) < 1.0 &&
                      phi_derivative(fp.v_high, t, prm) > 1.0;
    return fp;
}

enum class Verdict { Converged, Diverged, Undecided };

struct IterationOutcome {
    std::vector<double> sequence;  ///< v_0, v_1, ...
    Verdict verdict = Verdict::Undecided;
    double limit = std::numeric_limits<double>::quiet_NaN();
};

/// Runs v_{k+1} = phi_t(v_k) for at most K steps.
inline IterationOutcome iterate_v(double v0, double t, const PhiParams& prm, int K) {
    prm.validate();
    if (K < 1) throw std::invalid_argument("iterate_v: K must be >= 1");
    IterationOutcome out;
    out.sequence.push_back(v0);
    double v = v0;
    for (int k = 0; k < K; ++k) {
        const double next = phi(v, t, prm);
        out.sequence.push_back(next);
        if (!(next <= 1e9)) {
            out.verdict = Verdict::Diverged;
            return out;
        }
        if (std::abs(next - v) <= 1e-12) {
            out.verdict = Verdict::Converged;
            out.limit = next;
            return out;
        }
        v = next;
    }
    return out;
}

inline const char* to_string(FixedPointKind k) {
    switch (k) {
        case FixedPointKind::Two: return "two";
        case FixedPointKind::Tangent: return "tangent";
        case FixedPointKind::None: return "none";
        case FixedPointKind::Degenerate: return "degenerate";
    }
    return "?";
}

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Converged: return "converged";
        case Verdict::Diverged: return "diverged";
        case Verdict::Undecided: return "undecided";
    }
    return "?";
}

}  // namespace lpvm
