#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "lpvm/numerics.hpp"

namespace lpvm {

/// Scalar field sampled on (time slice, x-node), slices 0..nt inclusive.
class SpaceTimeArray {
public:
    SpaceTimeArray() = default;
    SpaceTimeArray(int slices, int nx, double value = 0.0)
        : slices_(slices), nx_(nx), data_(std::size_t(slices) * nx, value) {}

    /// Every slice equal to `row`.
    static SpaceTimeArray constant_in_time(int slices, std::span<const double> row) {
        SpaceTimeArray a(slices, static_cast<int>(row.size()));
        for (int s = 0; s < slices; ++s) a.set_slice(s, row);
        return a;
    }

    int slices() const { return slices_; }
    int nx() const { return nx_; }

    std::span<const double> operator[](int s) const {
        return std::span<const double>(data_).subspan(std::size_t(s) * nx_, nx_);
    }
    std::span<double> operator[](int s) {
        return std::span<double>(data_).subspan(std::size_t(s) * nx_, nx_);
    }
    double operator()(int s, int j) const { return data_[std::size_t(s) * nx_ + j]; }
    double& operator()(int s, int j) { return data_[std::size_t(s) * nx_ + j]; }

    void set_slice(int s, std::span<const double> row) {
        if (static_cast<int>(row.size()) != nx_)
            throw std::invalid_argument("SpaceTimeArray: row size mismatch");
        auto dst = (*this)[s];
        for (int j = 0; j < nx_; ++j) dst[j] = row[j];
    }

    std::span<const double> flat() const { return data_; }

    bool same_shape(const SpaceTimeArray& o) const {
        return slices_ == o.slices_ && nx_ == o.nx_;
    }

private:
    int slices_ = 0;
    int nx_ = 0;
    std::vector<double> data_;
};

/// sup over all slices and nodes of |a - b|.
inline double sup_distance(const SpaceTimeArray& a, const SpaceTimeArray& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("sup_distance: shape mismatch");
    return max_abs_diff(a.flat(), b.flat());
}

inline double sup_norm(const SpaceTimeArray& a) { return max_abs(a.flat()); }

}  // namespace lpvm
