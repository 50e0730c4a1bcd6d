#include <cstdio>
#include "dstab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dstab/eval.hpp"

namespace dstab {

std::atomic<long long> g_tube_builds{0};
std::atomic<long long> g_dbg_rej{0};
std::atomic<long long> g_rej_apriori{0}, g_rej_lip{0}, g_rej_pend{0}, g_rej_budget{0}, g_steps{0};
std::atomic<long long> g_tube_us{0};

namespace {

using IVec = std::vector<Interval>;
using IMat = std::vector<std::vector<Interval>>;

Box to_box(const std::vector<std::string>& names, const IVec& v) {
    Box b;
    for (std::size_t i = 0; i < names.size(); ++i) b.set(names[i], v[i]);
    return b;
}

IVec eval_rhs(const OdeSystem& sys, const IVec& state) {
    Box b = to_box(sys.vars(), state);
    IVec out(sys.dim());
    for (std::size_t i = 0; i < sys.dim(); ++i)
        out[i] = eval_term(sys.rhs()[i], b);
    return out;
}

IMat eval_jacobian(const OdeSystem& sys, const IVec& state) {
    Box b = to_box(sys.vars(), state);
    const auto& jt = sys.jacobian();
    IMat out(sys.dim(), IVec(sys.dim()));
    for (std::size_t i = 0; i < sys.dim(); ++i)
        for (std::size_t j = 0; j < sys.dim(); ++j)
            out[i][j] = eval_term(jt[i][j], b);
    return out;
}

IVec matvec(const IMat& m, const IVec& v) {
    IVec out(m.size(), Interval::point(0.0));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j)
            out[i] = out[i] + m[i][j] * v[j];
    return out;
}

IMat matmul(const IMat& a, const IMat& b) {
    std::size_t n = a.size();
    IMat out(n, IVec(n, Interval::point(0.0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j)
                out[i][j] = out[i][j] + a[i][k] * b[k][j];
    return out;
}

double inf_norm(const IMat& m) {
    double best = 0.0;
    for (const auto& row : m) {
        double s = 0.0;
        for (const auto& e : row) s += e.mag();
        best = std::max(best, s);
    }
    return best;
}

double max_width(const IVec& v) {
    double w = 0.0;
    for (const auto& e : v) w = std::max(w, e.width());
    return w;
}

bool inside(const IVec& v, const Box& bounds, const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!bounds.at(names[i]).contains(v[i])) return false;
    return true;
}

// First-order mean-value (Lohner-style) validated integrator.  Tracks a
// near-point midpoint solution plus an interval sensitivity matrix, so the
// enclosure of the full initial box follows the true local contraction or
// rotation instead of the worst-case e^{Lt} growth.
class Integrator {
public:
    Integrator(const OdeSystem& sys, const Box& x0, double tol)
        : sys_(sys), tol_(std::max(tol, 1e-12)), n_(sys.dim()) {
        mid_.resize(n_);
        r0_.resize(n_);
        err_.assign(n_, Interval::point(0.0));
        for (std::size_t i = 0; i < n_; ++i) {
            const Interval& iv = x0.at(sys_.vars()[i]);
            double m = iv.mid();
            mid_[i] = Interval::point(m);
            r0_[i] = iv - Interval::point(m);
            r0w_ = std::max(r0w_, iv.width());
        }
        jac_ = IMat(n_, IVec(n_, Interval::point(0.0)));
        for (std::size_t i = 0; i < n_; ++i) jac_[i][i] = Interval::point(1.0);
        use_mean_value_ = sys_.has_jacobian();
        h_ = std::min(0.1, 1.0 / (4.0 * std::max(sys_.lipschitz(), 1e-6)));
        h_init_ = h_;
    }

    // Current solution set at time tau_.
    IVec current() const {
        if (!use_mean_value_) return hull_;
        IVec s = matvec(jac_, r0_);
        for (std::size_t i = 0; i < n_; ++i) s[i] = s[i] + mid_[i] + err_[i];
        if (!hull_.empty()) {
            // intersect with the direct hull enclosure; both are sound
            IVec out(n_);
            for (std::size_t i = 0; i < n_; ++i) {
                double lo = std::max(s[i].lo(), hull_[i].lo());
                double hi = std::min(s[i].hi(), hull_[i].hi());
                out[i] = lo <= hi ? Interval(lo, hi) : s[i];
            }
            return out;
        }
        return s;
    }

    double time() const { return tau_; }

    // Advances by one validated step of length at most h_cap and returns the
    // a-priori tube enclosing all solutions over the step.
    IVec step(double h_cap, double horizon) {
        IVec start = current();
        if (!inside(start, sys_.integration_bounds(), sys_.vars()))
            throw FlowEscapeError("flow enclosure escaped state bounds",
                                  Interval(tau_, tau_));
        for (int attempt = 0;; ++attempt) {
            double h = std::min(h_, h_cap);
            IVec tube;
            if (try_step(start, h, horizon, tube)) {
                tau_ += h;
                if (h >= h_ && attempt == 0) h_ = std::min(h_ * 1.25, h_init_ * 4.0);
                return tube;
            }
            h_ *= 0.5;
            if (h_ < 1e-9)
                throw FlowNonconvergenceError(
                    "validated step failed to contract at minimum step size");
        }
    }

private:
    // Picard a-priori box for all solutions from `s` over [0, h].
    bool apriori(const IVec& s, double h, IVec& box_out) {
        Interval span(0.0, h);
        IVec box = s;
        IVec fs = eval_rhs(sys_, s);
        for (std::size_t i = 0; i < n_; ++i) {
            Interval grow = span * fs[i];
            box[i] = s[i].hull(s[i] + grow);
            double pad = 0.5 * box[i].width() + 1e-12;
            box[i] = box[i].inflate(pad);
        }
        for (int iter = 0; iter < 6; ++iter) {
            IVec fb = eval_rhs(sys_, box);
            bool ok = true;
            IVec next(n_);
            for (std::size_t i = 0; i < n_; ++i) {
                next[i] = s[i].hull(s[i] + span * fb[i]);
                if (!box[i].contains(next[i])) ok = false;
            }
            if (ok) {
                box_out = box;
                return true;
            }
            for (std::size_t i = 0; i < n_; ++i)
                box[i] = box[i].hull(next[i]).inflate(0.2 * next[i].width() + 1e-12);
        }
        return false;
    }

    bool try_step(const IVec& start, double h, double horizon, IVec& tube) {
        IVec box;
        if (!apriori(start, h, box)) { g_rej_apriori.fetch_add(1); return false; }
        if (!inside(box, sys_.integration_bounds(), sys_.vars()))
            throw FlowEscapeError("flow enclosure escaped state bounds",
                                  Interval(tau_, tau_ + h));

        IVec fb = eval_rhs(sys_, box);
        Interval hh = Interval::point(h);

        if (!use_mean_value_) {
            IVec next(n_);
            for (std::size_t i = 0; i < n_; ++i) next[i] = start[i] + hh * fb[i];
            hull_ = next;
            tube = box;
            return true;
        }

        IMat jac_box = eval_jacobian(sys_, box);
        double l_local = inf_norm(jac_box);
        if (h * l_local > 0.25) { g_rej_lip.fetch_add(1); return false; }  // propagator bound needs hL small

        // propagator enclosure over the step: verified a-priori bound, then
        // one Picard application for the step-end value
        double a = 2.0 * l_local * h + 1e-12;
        IMat p_over(n_, IVec(n_));
        for (int grow = 0; grow < 8; ++grow) {
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j) {
                    double base = (i == j) ? 1.0 : 0.0;
                    p_over[i][j] = Interval(base - a, base + a);
                }
            IMat jp = matmul(jac_box, p_over);
            bool ok = true;
            Interval span(0.0, h);
            for (std::size_t i = 0; i < n_ && ok; ++i)
                for (std::size_t j = 0; j < n_ && ok; ++j) {
                    Interval v = span * jp[i][j];
                    if (i == j) v = v + Interval::point(1.0);
                    if (!p_over[i][j].contains(v)) ok = false;
                }
            if (ok) break;
            a *= 2.0;
            if (grow == 7) { g_rej_apriori.fetch_add(1); return false; }
        }
        // refine the verified propagator box by iterating its Picard operator
        for (int it = 0; it < 3; ++it) {
            IMat jp0 = matmul(jac_box, p_over);
            Interval span(0.0, h);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j) {
                    Interval v = span * jp0[i][j];
                    if (i == j) v = v + Interval::point(1.0);
                    double lo = std::max(v.lo(), p_over[i][j].lo());
                    double hi = std::min(v.hi(), p_over[i][j].hi());
                    if (lo <= hi) p_over[i][j] = Interval(lo, hi);
                }
        }
        IMat jp = matmul(jac_box, p_over);
        IMat p_end(n_, IVec(n_));
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                Interval v = hh * jp[i][j];
                if (i == j) v = v + Interval::point(1.0);
                p_end[i][j] = v;
            }
        // step control on the propagator itself: its interval widths multiply
        // into the sensitivity enclosure every step, so keep the per-step
        // relative inflation small enough over the whole horizon
        double pw = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n_; ++j) row += p_end[i][j].width();
            pw = std::max(pw, row);
        }
        if (pw > 0.25 * h / std::max(horizon, 1.0) && h > 2e-7) { g_rej_pend.fetch_add(1); return false; }

        IMat jac_next = matmul(p_end, jac_);

        // midpoint update, second-order Taylor with remainder over the
        // midpoint path's own a-priori box (a point trajectory), not the full
        // solution-set tube: the remainder is what limits the step size, and
        // it must not scale with the width of the initial box
        IVec fm = eval_rhs(sys_, mid_);
        IVec mbox;
        if (!apriori(mid_, h, mbox)) { g_rej_apriori.fetch_add(1); return false; }
        IVec rem = matvec(eval_jacobian(sys_, mbox), eval_rhs(sys_, mbox));
        Interval h2 = Interval::point(0.5 * h * h);
        IVec mid_next(n_);
        IVec err_next = matvec(p_end, err_);
        for (std::size_t i = 0; i < n_; ++i) {
            Interval m = mid_[i] + hh * fm[i] + h2 * rem[i];
            double c = m.mid();
            err_next[i] = err_next[i] + (m - Interval::point(c));
            mid_next[i] = Interval::point(c);
        }

        // reject steps whose fresh error exceeds the budget; the budget is
        // relative to the scale already present in the initial box, because
        // absolute precision far below the box width is unusable downstream
        double budget = tol_ * h / std::max(horizon, h) * (1.0 + r0w_);
        double inherited = max_width(err_) * (1.0 + 1.5 * h * l_local);
        if (max_width(err_next) > inherited + budget && h > 2e-7) {
            g_rej_budget.fetch_add(1);
            if (g_dbg_rej.fetch_add(1) < 12)
                std::fprintf(stderr,
                             "[rej] h=%.3e err=%.3e err_next=%.3e inh=%.3e bud=%.3e\n",
                             h, max_width(err_), max_width(err_next), inherited,
                             budget);
            return false;
        }

        // direct hull enclosure kept alongside for intersection
        IVec next_hull(n_);
        for (std::size_t i = 0; i < n_; ++i) next_hull[i] = start[i] + hh * fb[i];

        // affine enclosure over the whole step: for s in [0,h],
        //   x(s) in mid(s) + P(s) (J r0 + err)
        // with P(s) inside the verified propagator box p_over and mid(s) the
        // partial Taylor update of the midpoint path
        seg_jac_ = matmul(p_over, jac_);
        seg_err_ = matvec(p_over, err_);
        seg_mid_.resize(n_);
        Interval h01(0.0, h), h201(0.0, 0.5 * h * h);
        for (std::size_t i = 0; i < n_; ++i)
            seg_mid_[i] = mid_[i] + h01 * fm[i] + h201 * rem[i];
        seg_valid_ = true;

        mid_ = std::move(mid_next);
        jac_ = std::move(jac_next);
        err_ = std::move(err_next);
        hull_ = std::move(next_hull);
        tube = box;
        g_steps.fetch_add(1);
        return true;
    }

public:
    // accessors for the affine data of the step just taken
    bool seg_valid() const { return seg_valid_; }
    const IVec& seg_mid() const { return seg_mid_; }
    const IMat& seg_jac() const { return seg_jac_; }
    const IVec& seg_err() const { return seg_err_; }
    const IVec& r0() const { return r0_; }

private:
    const OdeSystem& sys_;
    double tol_;
    std::size_t n_;
    bool use_mean_value_ = true;
    double tau_ = 0.0;
    double h_ = 0.1;
    double h_init_ = 0.1;
    IVec mid_;   // point trajectory from the initial midpoint
    IMat jac_;   // sensitivity enclosure
    IVec r0_;    // centered initial offsets
    double r0w_ = 0.0;  // widest initial offset
    IVec err_;   // accumulated local error, carried by the step propagator
    IVec hull_;  // direct hull enclosure (fallback representation)
    IVec seg_mid_, seg_err_;  // affine data of the last step (see try_step)
    IMat seg_jac_;
    bool seg_valid_ = false;
};

}  // namespace

OdeSystem::OdeSystem(std::string name, std::vector<std::string> state_vars,
                     std::vector<TermPtr> rhs, Box state_bounds,
                     std::optional<double> lipschitz)
    : name_(std::move(name)),
      vars_(std::move(state_vars)),
      rhs_(std::move(rhs)),
      bounds_(std::move(state_bounds)) {
    if (vars_.empty() || vars_.size() != rhs_.size())
        throw std::invalid_argument("ODE system needs one rhs per state variable");
    for (const auto& v : vars_)
        if (!bounds_.has(v))
            throw std::invalid_argument("state bounds missing variable " + v);
    for (const auto& r : rhs_)
        for (const auto& fv : free_vars(r))
            if (std::find(vars_.begin(), vars_.end(), fv) == vars_.end())
                throw std::invalid_argument(
                    "rhs mentions non-state variable " + fv + " (system must be autonomous)");

    for (const auto& [v, iv] : bounds_.entries()) {
        double pad = 0.5 * iv.width() + 1.0;
        ext_bounds_.set(v, iv.inflate(pad));
    }

    bool smooth = true;
    try {
        for (const auto& r : rhs_) {
            std::vector<TermPtr> row;
            for (const auto& v : vars_) row.push_back(diff(r, v));
            jacobian_.push_back(std::move(row));
        }
    } catch (const std::domain_error&) {
        jacobian_.clear();
        smooth = false;
    }

    double derived = 0.0;
    if (smooth) {
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < vars_.size(); ++j)
                row += eval_term(jacobian_[i][j], bounds_).mag();
            derived = std::max(derived, row);
        }
    }
    if (lipschitz.has_value()) {
        if (*lipschitz <= 0.0)
            throw std::invalid_argument("Lipschitz constant must be positive");
        if (smooth && *lipschitz < derived * (1.0 - 1e-9))
            throw std::invalid_argument(
                "supplied Lipschitz constant is below the Jacobian bound on X");
        lipschitz_ = std::max(*lipschitz, derived);
    } else {
        if (!smooth)
            throw std::invalid_argument(
                "non-smooth right-hand side needs an explicit Lipschitz constant");
        lipschitz_ = std::max(derived, 1e-9);
    }
}

void SystemRegistry::add(std::shared_ptr<const OdeSystem> sys) {
    systems_[sys->name()] = std::move(sys);
}

std::shared_ptr<const OdeSystem> SystemRegistry::find(const std::string& name) const {
    auto it = systems_.find(name);
    return it == systems_.end() ? nullptr : it->second;
}

const OdeSystem& SystemRegistry::require(const std::string& name) const {
    auto sys = find(name);
    if (!sys) throw std::out_of_range("unregistered ODE system: " + name);
    return *sys;
}

Box flow_enclosure(const OdeSystem& sys, const Box& x0, const Interval& t,
                   double tol) {
    for (const auto& v : sys.vars())
        if (!x0.has(v))
            throw std::invalid_argument("initial box missing variable " + v);
    if (t.lo() < 0.0)
        throw std::invalid_argument("flow time must be nonnegative");

    Integrator integ(sys, x0, tol);
    bool collecting = t.lo() == 0.0;
    bool have = false;
    IVec acc;
    auto add = [&](const IVec& v) {
        if (!have) {
            acc = v;
            have = true;
        } else {
            for (std::size_t i = 0; i < v.size(); ++i) acc[i] = acc[i].hull(v[i]);
        }
    };
    if (collecting) add(integ.current());

    const int max_steps = 2'000'000;
    for (int k = 0; k < max_steps && integ.time() < t.hi(); ++k) {
        double remaining = t.hi() - integ.time();
        double cap = remaining;
        // land a step boundary exactly on t.lo so point queries stay tight
        if (!collecting && integ.time() < t.lo())
            cap = std::min(cap, t.lo() - integ.time());
        IVec tube = integ.step(cap, t.hi());
        if (!collecting && integ.time() >= t.lo()) {
            collecting = true;
            add(integ.current());
        } else if (collecting && integ.time() < t.hi()) {
            add(tube);
        }
        if (k + 1 == max_steps)
            throw FlowNonconvergenceError("step budget exhausted");
    }
    add(integ.current());
    return to_box(sys.vars(), acc);
}

FlowTube flow_tube(const OdeSystem& sys, const Box& x0, double t_max, double tol) {
    for (const auto& v : sys.vars())
        if (!x0.has(v))
            throw std::invalid_argument("initial box missing variable " + v);
    if (t_max < 0.0) throw std::invalid_argument("flow time must be nonnegative");

    FlowTube out;
    out.vars_ = sys.vars();
    Integrator integ(sys, x0, tol);
    out.times_.push_back(0.0);
    out.points_.push_back(integ.current());
    const int max_steps = 2'000'000;
    try {
        for (int k = 0; integ.time() < t_max; ++k) {
            if (k == max_steps)
                throw FlowNonconvergenceError("step budget exhausted");
            IVec tube = integ.step(t_max - integ.time(), t_max);
            out.tubes_.push_back(std::move(tube));
            out.times_.push_back(integ.time());
            out.points_.push_back(integ.current());
            if (integ.seg_valid()) {
                out.seg_mid_.push_back(integ.seg_mid());
                out.seg_jac_.push_back(integ.seg_jac());
                out.seg_err_.push_back(integ.seg_err());
            }
        }
    } catch (const FlowEscapeError& e) {
        out.escaped_ = true;
        out.escape_time_ = e.escape_time;
    } catch (const FlowNonconvergenceError&) {
        out.nonconv_ = true;
    }
    out.r0_ = integ.r0();
    if (out.seg_mid_.size() != out.tubes_.size()) {
        out.seg_mid_.clear();
        out.seg_jac_.clear();
        out.seg_err_.clear();
    }
    out.reach_ = out.times_.back();
    return out;
}

double FlowTube::deviation_lo(const std::vector<Interval>& X,
                              const Interval& t) const {
    const std::size_t n = vars_.size();
    if (X.size() != n || t.hi() > reach_ || t.lo() < 0.0) return 0.0;
    const bool affine = seg_jac_.size() == tubes_.size();
    double best = std::numeric_limits<double>::infinity();
    bool covered = false;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < tubes_.size(); ++i) {
        if (!(times_[i + 1] >= t.lo() && times_[i] <= t.hi())) continue;
        covered = true;
        // componentwise distance to the step tube box
        double s2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double d = std::max({0.0, X[j].lo() - tubes_[i][j].hi(),
                                 tubes_[i][j].lo() - X[j].hi()});
            s2 += d * d;
        }
        double bound = std::sqrt(s2) * (1.0 - 1e-12);
        if (affine) {
            // separation along the direction joining the two centres; the
            // support of the affine set mid + J r0 + err along v is computed
            // with interval arithmetic, so any rounding in v is harmless
            double vn2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                v[j] = X[j].mid() - seg_mid_[i][j].mid();
                vn2 += v[j] * v[j];
            }
            if (vn2 > 1e-24) {
                Interval xv = Interval::point(0.0), sv = Interval::point(0.0);
                Interval nv2 = Interval::point(0.0);
                for (std::size_t j = 0; j < n; ++j) {
                    Interval vj = Interval::point(v[j]);
                    xv = xv + vj * X[j];
                    sv = sv + vj * (seg_mid_[i][j] + seg_err_[i][j]);
                    nv2 = nv2 + ipow(vj, 2);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    Interval wk = Interval::point(0.0);
                    for (std::size_t j = 0; j < n; ++j)
                        wk = wk + Interval::point(v[j]) * seg_jac_[i][j][k];
                    sv = sv + wk * r0_[k];
                }
                double sep = std::max(xv.lo() - sv.hi(), sv.lo() - xv.hi());
                if (sep > 0.0) bound = std::max(bound, sep / isqrt(nv2).hi());
            }
        }
        best = std::min(best, bound);
        if (best <= 0.0) return 0.0;
    }
    if (!covered || !std::isfinite(best)) return 0.0;
    return std::max(best, 0.0);
}

Box FlowTube::query(const Interval& t) const {
    if (t.lo() < 0.0)
        throw std::invalid_argument("flow time must be nonnegative");
    if (escaped_ && t.hi() >= escape_time_.lo())
        throw FlowEscapeError("flow enclosure escaped state bounds", escape_time_);
    if (t.hi() > reach_) {
        if (nonconv_)
            throw FlowNonconvergenceError(
                "validated step failed to contract at minimum step size");
        throw std::logic_error("flow tube queried past its reach");
    }
    bool have = false;
    IVec acc;
    auto add = [&](const IVec& v) {
        if (!have) {
            acc = v;
            have = true;
        } else {
            for (std::size_t i = 0; i < v.size(); ++i) acc[i] = acc[i].hull(v[i]);
        }
    };
    // tight values at step boundaries inside the window, tubes for segments
    // that overlap its interior
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (times_[i] >= t.lo() && times_[i] <= t.hi()) add(points_[i]);
    for (std::size_t i = 0; i < tubes_.size(); ++i)
        if (times_[i + 1] > t.lo() && times_[i] < t.hi()) add(tubes_[i]);
    if (!have) {
        // window strictly inside one segment
        for (std::size_t i = 0; i < tubes_.size(); ++i)
            if (times_[i] <= t.lo() && times_[i + 1] >= t.hi()) {
                add(tubes_[i]);
                break;
            }
    }
    if (!have) throw std::logic_error("flow tube query outside stored range");
    return to_box(vars_, acc);
}

Interval flow_deviation(const OdeSystem& sys, const Box& x0, const Box& xt,
                        const Interval& t, double tol) {
    Box f = flow_enclosure(sys, x0, t, tol);
    Interval sum = Interval::point(0.0);
    for (const auto& v : sys.vars()) {
        Interval d = xt.at(v) - f.at(v);
        sum = sum + ipow(d, 2);
    }
    return isqrt(sum);
}

}  // namespace dstab
