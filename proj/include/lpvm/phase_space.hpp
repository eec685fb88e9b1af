#pragma once

// Phase-space discretisation: the periodic x-grid, the symmetric truncated
// momentum grid, distribution slices and their velocity moments.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpvm/numerics.hpp"

namespace lpvm {

/// Momentum/velocity closure. FR is deliberately absent: it has no
/// evolution solver here.
enum class Model { NR, QR };

inline std::string to_string(Model m) { return m == Model::NR ? "nr" : "qr"; }

/// Velocity p/gamma_1 associated with momentum p.
inline double vhat(double p, Model m) {
    return m == Model::NR ? p : p / std::sqrt(1.0 + p * p);
}

/// Kinetic energy, the primitive of vhat.
inline double kappa(double p, Model m) {
    return m == Model::NR ? 0.5 * p * p : std::sqrt(1.0 + p * p);
}

class PhaseGrid {
public:
    PhaseGrid(double L, int nx, double p_max, int np)
        : L_(L), nx_(nx), p_max_(p_max), np_(np) {
        if (!(L > 0.0)) throw std::invalid_argument("PhaseGrid: L must be positive");
        if (!(p_max > 0.0)) throw std::invalid_argument("PhaseGrid: p_max must be positive");
        if (nx < 8) throw std::invalid_argument("PhaseGrid: nx must be >= 8");
        if (np < 9) throw std::invalid_argument("PhaseGrid: np must be >= 9");
        if (np % 2 == 0) throw std::invalid_argument("PhaseGrid: np must be odd");
        dx_ = L / nx;
        dp_ = 2.0 * p_max / (np - 1);
        p_.resize(np);
        const int mid = np / 2;
        for (int i = 0; i < mid; ++i) {
            p_[i] = -p_max + i * dp_;
            p_[np - 1 - i] = -p_[i];
        }
        p_[mid] = 0.0;
        p_weight_.assign(np, dp_);
        p_weight_.front() = p_weight_.back() = 0.5 * dp_;
    }

    double L() const { return L_; }
    int nx() const { return nx_; }
    double p_max() const { return p_max_; }
    int np() const { return np_; }
    double dx() const { return dx_; }
    double dp() const { return dp_; }
    double x(int j) const { return j * dx_; }
    double p(int i) const { return p_[i]; }
    std::span<const double> p_nodes() const { return p_; }
    /// Trapezoid weights of the momentum quadrature.
    std::span<const double> p_weights() const { return p_weight_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * np_; }

    bool operator==(const PhaseGrid& o) const {
        return L_ == o.L_ && nx_ == o.nx_ && p_max_ == o.p_max_ && np_ == o.np_;
    }

private:
    double L_;
    int nx_;
    double p_max_;
    int np_;
    double dx_ = 0.0;
    double dp_ = 0.0;
    std::vector<double> p_;
    std::vector<double> p_weight_;
};

/// Symmetric trapezoid sum over the p-grid of g(i): mirror pairs are added
/// first, so odd integrands vanish exactly and even ones are reproducible.
template <class Integrand>
double p_quadrature(const PhaseGrid& grid, Integrand&& g) {
    const int np = grid.np();
    const int mid = np / 2;
    const auto w = grid.p_weights();
    std::vector<double> terms(mid + 1);
    for (int i = 0; i < mid; ++i) terms[i] = w[i] * g(i) + w[np - 1 - i] * g(np - 1 - i);
    terms[mid] = w[mid] * g(mid);
    return pairwise_sum(terms);
}

/// f sampled at every (x_j, p_i); row-major with x outermost.
class DistSlice {
public:
    explicit DistSlice(PhaseGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}
    DistSlice(PhaseGrid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("DistSlice: value count does not match grid");
        for (double v : values_)
            if (!(v >= 0.0)) throw std::invalid_argument("DistSlice: values must be nonnegative");
    }

    template <class Fn>
    static DistSlice sample(const PhaseGrid& grid, Fn&& f) {
        std::vector<double> v(grid.size());
        for (int j = 0; j < grid.nx(); ++j)
            for (int i = 0; i < grid.np(); ++i) v[j * grid.np() + i] = f(grid.x(j), grid.p(i));
        return DistSlice(grid, std::move(v));
    }

    const PhaseGrid& grid() const { return grid_; }
    double operator()(int j, int i) const { return values_[j * grid_.np() + i]; }
    double& operator()(int j, int i) { return values_[j * grid_.np() + i]; }
    std::span<const double> column(int j) const {
        return std::span<const double>(values_).subspan(std::size_t(j) * grid_.np(), grid_.np());
    }
    std::span<const double> values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }

    double max_value() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, v);
        return m;
    }

    /// Largest value on the two momentum cut-off rows.
    double boundary_max() const {
        double m = 0.0;
        for (int j = 0; j < grid_.nx(); ++j)
            m = std::max({m, (*this)(j, 0), (*this)(j, grid_.np() - 1)});
        return m;
    }

    /// True when f is negligible at |p| = p_max, i.e. truncation is valid.
    bool support_ok(double tolerance = 1e-10) const { return boundary_max() <= tolerance; }

private:
    PhaseGrid grid_;
    std::vector<double> values_;
};

/// f at every time slice of a window.
using DistHistory = std::vector<DistSlice>;

enum class MomentKind { density, flux, quasi_density, abs_moment };

/// Velocity moment of f at every x-node by trapezoid quadrature in p.
inline std::vector<double> moment(const DistSlice& f, MomentKind kind, Model model, int order = 0) {
    const PhaseGrid& g = f.grid();
    std::vector<double> weight(g.np());
    for (int i = 0; i < g.np(); ++i) {
        switch (kind) {
            case MomentKind::density:
            case MomentKind::quasi_density: weight[i] = 1.0; break;
            case MomentKind::flux: weight[i] = vhat(g.p(i), model); break;
            case MomentKind::abs_moment: weight[i] = std::pow(std::abs(g.p(i)), order); break;
        }
    }
    std::vector<double> out(g.nx());
    for (int j = 0; j < g.nx(); ++j) {
        const auto col = f.column(j);
        out[j] = p_quadrature(g, [&](int i) { return weight[i] * col[i]; });
    }
    return out;
}

inline std::vector<double> density(const DistSlice& f) {
    return moment(f, MomentKind::density, Model::NR);
}

inline std::vector<double> flux(const DistSlice& f, Model m) {
    return moment(f, MomentKind::flux, m);
}

/// Total mass: trapezoid over the period and the p-grid.
inline double mass(const DistSlice& f) {
    return periodic_integral(density(f), f.grid().dx());
}

}  // namespace lpvm
