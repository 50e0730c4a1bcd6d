#pragma once

#include <map>
#include <memory>
#include <optional>
#include <atomic>
#include <stdexcept>
#include <string>
#include <vector>

#include "dstab/interval.hpp"
#include "dstab/term.hpp"

namespace dstab {

// Validated integration failed because the enclosure left the (inflated)
// state bounds.  Carries the time window at which the escape happened.
// instrumentation: tube constructions and total construction time
extern std::atomic<long long> g_tube_builds;
extern std::atomic<long long> g_rej_apriori, g_rej_lip, g_rej_pend, g_rej_budget, g_steps;
extern std::atomic<long long> g_tube_us;

struct FlowEscapeError : std::runtime_error {
    FlowEscapeError(const std::string& msg, Interval when)
        : std::runtime_error(msg), escape_time(when) {}
    Interval escape_time;
};

// Picard step failed to contract at the minimum step size.
struct FlowNonconvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Autonomous ODE right-hand side with state bounds and a Lipschitz bound.
// The right-hand sides may use the term library minus flow values; if they
// are smooth the Jacobian is derived symbolically and used both for the
// Lipschitz check and for the mean-value form of the integrator.
class OdeSystem {
public:
    // lipschitz: user-supplied constant valid on the state bounds; pass
    // nullopt to derive one from the symbolic Jacobian.
    OdeSystem(std::string name, std::vector<std::string> state_vars,
              std::vector<TermPtr> rhs, Box state_bounds,
              std::optional<double> lipschitz = std::nullopt);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& vars() const { return vars_; }
    const std::vector<TermPtr>& rhs() const { return rhs_; }
    const Box& bounds() const { return bounds_; }
    const Box& integration_bounds() const { return ext_bounds_; }
    double lipschitz() const { return lipschitz_; }
    std::size_t dim() const { return vars_.size(); }

    bool has_jacobian() const { return !jacobian_.empty(); }
    // row i, column j: d rhs_i / d var_j
    const std::vector<std::vector<TermPtr>>& jacobian() const { return jacobian_; }

private:
    std::string name_;
    std::vector<std::string> vars_;
    std::vector<TermPtr> rhs_;
    Box bounds_;
    Box ext_bounds_;  // inflated domain used for integration and L
    double lipschitz_;
    std::vector<std::vector<TermPtr>> jacobian_;  // empty if rhs non-smooth
};

class SystemRegistry {
public:
    void add(std::shared_ptr<const OdeSystem> sys);
    std::shared_ptr<const OdeSystem> find(const std::string& name) const;
    const OdeSystem& require(const std::string& name) const;

private:
    std::map<std::string, std::shared_ptr<const OdeSystem>> systems_;
};

// Guaranteed enclosure of {x(s; x0) : x0 in x0_box, s in t} for solutions of
// the system, provided they stay inside the inflated state bounds.  The time
// interval must satisfy 0 <= t.lo() <= t.hi().
Box flow_enclosure(const OdeSystem& sys, const Box& x0, const Interval& t,
                   double tol);

// One validated integration from x0, kept as per-step tubes plus tight
// enclosures at the step boundaries, so every later time window from the
// same initial box is answered without re-integrating.
class FlowTube {
public:
    // Enclosure over the window t.  Throws FlowEscapeError if solutions may
    // leave the state bounds by t.hi, FlowNonconvergenceError if validation
    // broke down before t.hi.
    Box query(const Interval& t) const;

    // Enclosure over the window t restricted to initial points in X (a
    // sub-box of the box the tube was built for, components in variable
    // order).  The affine step enclosures are pointwise in the initial
    // condition, so substituting the sub-box offsets into mid + J r + err is
    // sound and nearly as tight as re-integrating from X; one integration
    // therefore serves every sub-box probed near it.
    Box query_sub(const std::vector<Interval>& X, const Interval& t) const;

    double reach() const { return reach_; }
    // true when a longer integration is needed to answer up to time T
    bool insufficient_for(double T) const {
        return !escaped_ && !nonconv_ && reach_ < T;
    }

    // Lower bound on the Euclidean distance between the box X (components in
    // state-variable order) and the flow set {Phi(x0, s) : s in t}.  Uses the
    // affine step enclosures when available: along a separating direction the
    // support function of the initial box is exact, so the bound does not pay
    // the corner inflation of axis-aligned hulls.  Returns 0 when nothing
    // better than "possibly touching" is known.  When x0sub is non-null it
    // restricts the initial set to that sub-box of the build box.
    double deviation_lo(const std::vector<Interval>& X, const Interval& t,
                        const std::vector<Interval>* x0sub = nullptr) const;

private:
    // offsets of a sub-box from the build-box centre, clamped to r0_
    std::vector<Interval> offsets(const std::vector<Interval>& X) const;
    friend FlowTube flow_tube(const OdeSystem& sys, const Box& x0, double t_max,
                              double tol);
    std::vector<std::string> vars_;
    std::vector<double> times_;                  // step boundaries, times_[0]=0
    std::vector<std::vector<Interval>> tubes_;   // tube over [times_[i], times_[i+1]]
    std::vector<std::vector<Interval>> points_;  // tight enclosure at times_[i]
    // affine enclosure over each step: x(s) in seg_mid + seg_jac * r0 + seg_err
    // (only populated for smooth systems; empty otherwise)
    std::vector<std::vector<Interval>> seg_mid_, seg_err_;
    std::vector<std::vector<std::vector<Interval>>> seg_jac_;
    std::vector<Interval> r0_;
    double reach_ = 0.0;
    bool escaped_ = false;
    bool nonconv_ = false;
    Interval escape_time_;
};

FlowTube flow_tube(const OdeSystem& sys, const Box& x0, double t_max, double tol);

// Enclosure of the deviation norm ||xt - Phi(x0, t)||; deviation <= delta
// certifies membership in the delta-perturbed flow relation.
Interval flow_deviation(const OdeSystem& sys, const Box& x0, const Box& xt,
                        const Interval& t, double tol);

}  // namespace dstab
