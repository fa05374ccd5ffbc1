#ifndef AXIOMA_LYAPUNOV_GRID_HPP
#define AXIOMA_LYAPUNOV_GRID_HPP

// Uniform grids on T^n and sampled scalar fields with an exact pointwise
// evaluator and a Fourier low-pass interpolant.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <ostream>
#include <vector>

#include "axioma/core/torus.hpp"
#include "axioma/flow/vector_field.hpp"

namespace axioma {

struct Grid {
    int dim = 2;
    int res = 64;

    std::size_t size() const { return dim == 2 ? std::size_t(res) * res : std::size_t(res); }
    Vec2 point(std::size_t idx) const {
        if (dim == 1) return Vec2(double(idx) / res, 0.0);
        return Vec2(double(idx / res) / res, double(idx % res) / res);
    }
    // Index of the nearest grid point.
    std::size_t nearest(const Vec2& x) const {
        auto cell = [&](double t) { return static_cast<std::size_t>(std::lround(wrap01(t) * res)) % res; };
        if (dim == 1) return cell(x[0]);
        return cell(x[0]) * res + cell(x[1]);
    }
    double spacing() const { return 1.0 / res; }
};

// Value of a scalar field and its derivative along V.
struct ValueAndFlowDerivative {
    double value = 0.0;
    double lie = 0.0;
};

class ScalarFieldGrid {
public:
    using Evaluator = std::function<ValueAndFlowDerivative(const Vec2&)>;

    ScalarFieldGrid() = default;
    ScalarFieldGrid(Grid g, Evaluator exact, int cutoff = 16) : grid_(g), exact_(std::move(exact)), cutoff_(cutoff) {
        values_.resize(grid_.size());
        lie_.resize(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            auto v = exact_(grid_.point(i));
            values_[i] = v.value;
            lie_[i] = v.lie;
        }
        build_interpolant();
    }
    static ScalarFieldGrid constant(Grid g, double c) {
        return ScalarFieldGrid(g, [c](const Vec2&) { return ValueAndFlowDerivative{c, 0.0}; });
    }

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    // L_V of the field at the grid points, from the exact evaluator.
    const std::vector<double>& lie_values() const { return lie_; }
    int cutoff() const { return cutoff_; }

    ValueAndFlowDerivative exact(const Vec2& x) const { return exact_(x); }
    double operator()(const Vec2& x) const { return exact_(x).value; }

    // Fourier low-pass interpolant and its spectral gradient.
    double interpolate(const Vec2& x) const {
        double v = 0.0;
        for (const auto& [k, c] : coef_) {
            double s, co;
            sincos2pi(k[0] * x[0] + k[1] * x[1], s, co);
            v += (c * std::complex<double>(co, s)).real();
        }
        return v;
    }
    Vec2 interpolant_gradient(const Vec2& x) const {
        Vec2 g = Vec2::Zero();
        for (const auto& [k, c] : coef_) {
            double s, co;
            sincos2pi(k[0] * x[0] + k[1] * x[1], s, co);
            std::complex<double> d = c * std::complex<double>(co, s) * std::complex<double>(0.0, two_pi);
            g[0] += (d * double(k[0])).real();
            g[1] += (d * double(k[1])).real();
        }
        return g;
    }
    // V . grad of the interpolant.
    double interpolant_lie(const VectorFieldSpec& spec, const Vec2& x) const {
        return evaluate_field(spec, x).v.dot(interpolant_gradient(x));
    }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    // Row-major CSV with a resolution header.
    void write_csv(std::ostream& os) const {
        os << "# dim=" << grid_.dim << " res=" << grid_.res << "\n";
        os << (grid_.dim == 2 ? "x,y,value,lie\n" : "x,value,lie\n");
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            Vec2 p = grid_.point(i);
            os << p[0] << ',';
            if (grid_.dim == 2) os << p[1] << ',';
            os << values_[i] << ',' << lie_[i] << '\n';
        }
    }

private:
    void build_interpolant() {
        coef_.clear();
        const int r = grid_.res;
        const int kc = std::min(cutoff_, r / 2 - 1);
        const int ky = grid_.dim == 2 ? kc : 0;
        for (int k0 = -kc; k0 <= kc; ++k0)
            for (int k1 = -ky; k1 <= ky; ++k1) {
                std::complex<double> c = 0.0;
                for (std::size_t i = 0; i < grid_.size(); ++i) {
                    Vec2 p = grid_.point(i);
                    double s, co;
                    sincos2pi(k0 * p[0] + k1 * p[1], s, co);
                    c += values_[i] * std::complex<double>(co, -s);
                }
                c /= double(grid_.size());
                coef_.push_back({{k0, k1}, c});
            }
    }

    Grid grid_;
    Evaluator exact_;
    int cutoff_ = 16;
    std::vector<double> values_;
    std::vector<double> lie_;
    std::vector<std::pair<std::array<int, 2>, std::complex<double>>> coef_;
};

}  // namespace axioma

#endif
