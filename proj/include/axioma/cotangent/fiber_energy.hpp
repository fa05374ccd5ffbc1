#ifndef AXIOMA_COTANGENT_FIBER_ENERGY_HPP
#define AXIOMA_COTANGENT_FIBER_ENERGY_HPP

// Energy functions on S*M for an attractor/repeller couple of Sigma-clouds:
// the flow average of the transit coordinate along the unit cotangent flow,
// with the eps-fattened clouds as the two regions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <vector>

#include "axioma/cotangent/sigma_sets.hpp"
#include "axioma/lyapunov/energy.hpp"

namespace axioma {

// (x, theta) grid on S*T^n: res^n base points times theta_res angles (two
// sheets on T^1).
struct FiberGrid {
    int dim = 2;
    int res = 48;
    int theta_res = 32;

    int angles() const { return dim == 1 ? 2 : theta_res; }
    std::size_t base_size() const { return dim == 2 ? std::size_t(res) * res : std::size_t(res); }
    std::size_t size() const { return base_size() * angles(); }
    SigmaPoint point(std::size_t i) const {
        std::size_t b = i / angles();
        int a = static_cast<int>(i % angles());
        Grid g{dim, res};
        return {g.point(b), double(a) / angles()};
    }
};

class FiberFieldGrid {
public:
    FiberFieldGrid() = default;
    FiberFieldGrid(FiberGrid g, std::vector<double> values, std::vector<double> lie)
        : grid_(g), values_(std::move(values)), lie_(std::move(lie)) {}

    const FiberGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& lie_values() const { return lie_; }
    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    void write_csv(std::ostream& os) const {
        os << "# dim=" << grid_.dim << " res=" << grid_.res << " theta_res=" << grid_.angles() << "\n";
        os << "x,y,theta,value,lie\n";
        for (std::size_t i = 0; i < values_.size(); ++i) {
            SigmaPoint p = grid_.point(i);
            os << p.x[0] << ',' << p.x[1] << ',' << p.theta << ',' << values_[i] << ',' << lie_[i] << '\n';
        }
    }

private:
    FiberGrid grid_;
    std::vector<double> values_, lie_;
};

struct FiberEnergyOptions {
    // eps-fattening radius of the clouds in the product metric.
    double fatten = 0.05;
    int grid_res = 48;
    int theta_res = 32;
    double horizon = 10.0;
    double step = 2e-3;
    // A forward run ends after staying this long in the attracting region.
    double linger = 0.25;
    double smoothing_fraction = 0.05;
    // Fixed averaging time; <= 0 selects it from the grid transits.
    double T = 0.0;
};

// Transit-coordinate energy for one couple, evaluated pointwise.
class FiberEnergy {
public:
    FiberEnergy(const VectorFieldSpec& spec, std::vector<SigmaPoint> attract, std::vector<SigmaPoint> repel,
                const FiberEnergyOptions& opt)
        : spec_(spec), opt_(opt) {
        attract_ = std::make_shared<std::vector<SigmaPoint>>(std::move(attract));
        repel_ = std::make_shared<std::vector<SigmaPoint>>(std::move(repel));
        ia_ = std::make_shared<CloudIndex>(*attract_, spec.dim, opt.fatten);
        ir_ = std::make_shared<CloudIndex>(*repel_, spec.dim, opt.fatten);
        avg_.T = opt.T > 0.0 ? opt.T : 1e-3;
    }

    const FlowAverage& average() const { return avg_; }
    void set_average(FlowAverage a) { avg_ = a; }
    const FiberEnergyOptions& options() const { return opt_; }
    const std::vector<SigmaPoint>& attracting() const { return *attract_; }
    const std::vector<SigmaPoint>& repelling() const { return *repel_; }

    bool in_attract(const SigmaPoint& p) const { return ia_->distance(p) < opt_.fatten; }
    bool in_repel(const SigmaPoint& p) const { return ir_->distance(p) < opt_.fatten; }
    double distance_to_attract(const SigmaPoint& p) const { return ia_->exact_distance(p); }
    double distance_to_repel(const SigmaPoint& p) const { return ir_->exact_distance(p); }

    Transit transit(const SigmaPoint& p) const {
        if (repel_->empty()) return {};
        State s0{p.x, covector_from_angle(p.theta)};
        if (spec_.dim == 1) s0.eta = Covector(p.theta < 0.25 || p.theta > 0.75 ? 1.0 : -1.0, 0.0);
        const double inf = std::numeric_limits<double>::infinity();
        const double h = opt_.step;
        const int cap = step_count(opt_.horizon, h);
        const int linger = std::max(1, static_cast<int>(std::ceil(opt_.linger / h)));

        // Forward run, kept with its repel and attract flags.
        std::vector<State> fwd{s0};
        std::vector<char> fr{char(in_repel(sigma(s0)))}, fa{char(in_attract(sigma(s0)))};
        int inside_for = fa[0] ? 1 : 0;
        bool horizon_hit = true;
        for (int i = 0; i < cap; ++i) {
            if (inside_for >= linger) {
                horizon_hit = false;
                break;
            }
            fwd.push_back(advance(fwd.back(), h));
            SigmaPoint q = sigma(fwd.back());
            fr.push_back(in_repel(q));
            fa.push_back(in_attract(q));
            inside_for = fa.back() ? inside_for + 1 : 0;
        }
        Transit t;
        long last_r = -1;
        for (long k = long(fwd.size()) - 1; k >= 0; --k)
            if (fr[k]) {
                last_r = k;
                break;
            }
        std::vector<State> bwd;
        std::vector<char> ba;
        long exit_k = 0;  // joined index of the last repel state
        if (last_r >= 0) {
            if (last_r == long(fwd.size()) - 1 && horizon_hit) {
                t.exit = inf;
                return t;
            }
            exit_k = last_r;
        } else {
            // Backward until the first repel state.
            State s = s0;
            bool found = false;
            for (int i = 1; i <= cap; ++i) {
                s = advance(s, -h);
                SigmaPoint q = sigma(s);
                bwd.push_back(s);
                ba.push_back(in_attract(q));
                if (in_repel(q)) {
                    found = true;
                    break;
                }
            }
            if (!found) return t;  // exit = -inf
            exit_k = -long(bwd.size());
        }
        auto state = [&](long k) -> const State& { return k >= 0 ? fwd[k] : bwd[-k - 1]; };
        auto attract_flag = [&](long k) { return k >= 0 ? fa[k] != 0 : ba[-k - 1] != 0; };
        t.exit = crossing(state(exit_k), exit_k, true, [&](const SigmaPoint& q) { return in_repel(q); });
        for (long k = exit_k + 1; k < long(fwd.size()); ++k)
            if (attract_flag(k)) {
                t.entry = std::max(t.exit, crossing(state(k - 1), k - 1, false,
                                                    [&](const SigmaPoint& q) { return in_attract(q); }));
                break;
            }
        return t;
    }

    ValueAndFlowDerivative evaluate(const SigmaPoint& p) const {
        Transit t = transit(p);
        return {avg_.value(t), avg_.flow_derivative(t)};
    }

private:
    struct State {
        Vec2 x;
        Covector eta;
    };

    SigmaPoint sigma(const State& s) const { return {wrap_point(s.x, spec_.dim), covector_angle(s.eta)}; }

    State advance(State s, double h) const {
        auto eval = [&](const Vec2& y) { return evaluate_field(spec_, y); };
        detail::lift_step(eval, s.x, s.eta, h);
        if (spec_.dim == 1) s.eta[1] = 0.0;
        s.eta.normalize();
        return s;
    }

    // Time in (k h, (k+1) h) where the predicate changes, starting from `at_k`.
    template <class Pred>
    double crossing(const State& s, long k, bool at_k, Pred&& pred) const {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 40; ++it) {
            double mid = 0.5 * (lo + hi);
            if (pred(sigma(advance(s, mid * opt_.step))) == at_k) lo = mid;
            else hi = mid;
        }
        return (double(k) + 0.5 * (lo + hi)) * opt_.step;
    }

    VectorFieldSpec spec_;
    FiberEnergyOptions opt_;
    std::shared_ptr<std::vector<SigmaPoint>> attract_, repel_;
    std::shared_ptr<CloudIndex> ia_, ir_;
    FlowAverage avg_;
};

struct FiberEnergyReport {
    double T = 0.0;
    double min_lie = 0.0;
    double eta = 0.0;              // min derivative outside both fattened clouds
    double attract_error = 0.0;    // max |E - 1| on grid points within fatten/2 of the attractor
    double repel_error = 0.0;      // max |E| on grid points within fatten/2 of the repeller
    double attract_oscillation = 0.0;  // max |E - 1| on attractor cloud samples
    double repel_oscillation = 0.0;    // max |E| on repeller cloud samples
    double separation = 0.0;
    std::size_t outside_points = 0;
};

struct FiberEnergyResult {
    FiberEnergy energy;
    FiberFieldGrid field;
    FiberEnergyReport report;
};

// E on the (x, theta) grid with its report. The fattened clouds must have
// disjoint closures.
inline FiberEnergyResult fiber_energy(const VectorFieldSpec& spec, const std::vector<SigmaPoint>& attract,
                                      const std::vector<SigmaPoint>& repel, const FiberEnergyOptions& opt = {}) {
    if (!(opt.fatten > 0.0)) throw PreconditionError("fattening radius must be positive");
    FiberEnergyReport rep;
    rep.separation = cloud_separation(attract, repel, spec.dim);
    if (!(rep.separation > 2.0 * opt.fatten))
        throw PreconditionError("fattened Sigma-clouds overlap (separation " + std::to_string(rep.separation) +
                                "); transversality too degenerate at this radius");
    FiberEnergy e(spec, attract, repel, opt);
    FiberGrid g{spec.dim, opt.grid_res, opt.theta_res};
    std::vector<Transit> tr(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) tr[i] = e.transit(g.point(i));
    FlowAverage avg{opt.T > 0.0 ? opt.T : detail::smoothing_time(tr, opt.smoothing_fraction)};
    e.set_average(avg);
    rep.T = avg.T;
    std::vector<double> val(g.size()), lie(g.size());
    rep.min_lie = std::numeric_limits<double>::infinity();
    rep.eta = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        val[i] = avg.value(tr[i]);
        lie[i] = avg.flow_derivative(tr[i]);
        rep.min_lie = std::min(rep.min_lie, lie[i]);
        SigmaPoint p = g.point(i);
        double da = e.distance_to_attract(p), dr = e.distance_to_repel(p);
        if (da >= opt.fatten && dr >= opt.fatten) {
            rep.eta = std::min(rep.eta, lie[i]);
            ++rep.outside_points;
        }
        if (da < 0.5 * opt.fatten) rep.attract_error = std::max(rep.attract_error, std::abs(val[i] - 1.0));
        if (dr < 0.5 * opt.fatten) rep.repel_error = std::max(rep.repel_error, std::abs(val[i]));
    }
    auto oscillation = [&](const std::vector<SigmaPoint>& c, double target) {
        double o = 0.0;
        std::size_t stride = std::max<std::size_t>(1, c.size() / 200);
        for (std::size_t i = 0; i < c.size(); i += stride) o = std::max(o, std::abs(e.evaluate(c[i]).value - target));
        return o;
    };
    rep.attract_oscillation = oscillation(attract, 1.0);
    rep.repel_oscillation = oscillation(repel, 0.0);
    return {e, FiberFieldGrid(g, std::move(val), std::move(lie)), rep};
}

}  // namespace axioma

#endif
