#ifndef AXIOMA_FLOW_TRIG_POLY_HPP
#define AXIOMA_FLOW_TRIG_POLY_HPP

#include <array>
#include <complex>
#include <map>
#include <vector>

#include "axioma/core/torus.hpp"

namespace axioma {

using Freq = std::array<int, 2>;
using cplx = std::complex<double>;

// Real term a*cos(2 pi k.x) + b*sin(2 pi k.x).
struct FourierTerm {
    Freq k{0, 0};
    double a = 0.0;
    double b = 0.0;
};

// Trigonometric polynomial sum_k c_k exp(2 pi i k.x) on T^2 (or T^1 with k[1] = 0).
class TrigPoly {
public:
    TrigPoly() = default;

    static TrigPoly constant(double v) {
        TrigPoly p;
        p.add({0, 0}, v);
        return p;
    }
    static TrigPoly from_terms(const std::vector<FourierTerm>& terms) {
        TrigPoly p;
        for (const auto& t : terms) p.add_term(t);
        return p;
    }

    void add(const Freq& k, cplx c) {
        coef_[k] += c;
    }
    void add_term(const FourierTerm& t) {
        if (t.k[0] == 0 && t.k[1] == 0) {
            add(t.k, t.a);
            return;
        }
        add(t.k, cplx(t.a, -t.b) * 0.5);
        add({-t.k[0], -t.k[1]}, cplx(t.a, t.b) * 0.5);
    }

    const std::map<Freq, cplx>& coefficients() const { return coef_; }

    cplx coefficient(const Freq& k) const {
        auto it = coef_.find(k);
        return it == coef_.end() ? cplx(0.0) : it->second;
    }

    TrigPoly operator+(const TrigPoly& o) const {
        TrigPoly r = *this;
        for (const auto& [k, c] : o.coef_) r.add(k, c);
        return r;
    }
    TrigPoly operator*(double s) const {
        TrigPoly r;
        for (const auto& [k, c] : coef_) r.add(k, c * s);
        return r;
    }
    TrigPoly operator*(const TrigPoly& o) const {
        TrigPoly r;
        for (const auto& [k1, c1] : coef_)
            for (const auto& [k2, c2] : o.coef_) r.add({k1[0] + k2[0], k1[1] + k2[1]}, c1 * c2);
        return r;
    }

    // Partial derivative with respect to x_j.
    TrigPoly derivative(int j) const {
        TrigPoly r;
        for (const auto& [k, c] : coef_)
            if (k[j] != 0) r.add(k, c * cplx(0.0, two_pi * k[j]));
        return r;
    }

    int max_frequency() const {
        int m = 0;
        for (const auto& [k, c] : coef_)
            if (std::abs(c) > 0.0) m = std::max(m, std::max(std::abs(k[0]), std::abs(k[1])));
        return m;
    }

    double evaluate(const Vec2& x) const {
        double v = 0.0;
        for (const auto& [k, c] : coef_) {
            double s, co;
            sincos2pi(k[0] * x[0] + k[1] * x[1], s, co);
            v += c.real() * co - c.imag() * s;
        }
        return v;
    }

    // Real cosine/sine terms over a half-plane of frequencies; drops zero terms.
    std::vector<FourierTerm> real_terms(double drop_below = 0.0) const {
        std::vector<FourierTerm> out;
        for (const auto& [k, c] : coef_) {
            bool zero = k[0] == 0 && k[1] == 0;
            bool upper = k[0] > 0 || (k[0] == 0 && k[1] > 0);
            if (zero) {
                if (std::abs(c.real()) > drop_below) out.push_back({k, c.real(), 0.0});
            } else if (upper) {
                cplx cm = coefficient({-k[0], -k[1]});
                cplx avg = 0.5 * (c + std::conj(cm));
                FourierTerm t{k, 2.0 * avg.real(), -2.0 * avg.imag()};
                if (std::abs(t.a) > drop_below || std::abs(t.b) > drop_below) out.push_back(t);
            }
        }
        return out;
    }

private:
    std::map<Freq, cplx> coef_;
};

}  // namespace axioma

#endif
