#pragma once

#include <cmath>

#include "sbvp/errors.hpp"

namespace sbvp {

/// Uniform grid t_i = a + i*(b-a)/N, i = 0..N, on a finite interval [a, b].
class Grid {
public:
    Grid(double a, double b, int subintervals) : a_(a), b_(b), n_(subintervals) {
        if (!(a < b)) throw ShapeError("grid requires a < b");
        if (n_ < 2) throw ShapeError("grid requires at least 2 subintervals");
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    int subintervals() const noexcept { return n_; }
    int node_count() const noexcept { return n_ + 1; }
    double step() const noexcept { return (b_ - a_) / n_; }
    double node(int i) const noexcept { return a_ + i * step(); }

    /// Index of the grid node nearest to `t`.
    int nearest_node(double t) const noexcept {
        int i = static_cast<int>(std::lround((t - a_) / step()));
        if (i < 0) i = 0;
        if (i > n_) i = n_;
        return i;
    }

    /// Grid with twice as many subintervals on the same interval.
    Grid refined() const { return Grid(a_, b_, 2 * n_); }

    friend bool operator==(const Grid& x, const Grid& y) noexcept {
        return x.a_ == y.a_ && x.b_ == y.b_ && x.n_ == y.n_;
    }

private:
    double a_, b_;
    int n_;
};

} // namespace sbvp
