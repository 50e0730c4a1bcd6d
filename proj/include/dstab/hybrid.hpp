#pragma once

#include "dstab/formula.hpp"
#include "dstab/ode.hpp"
#include "dstab/solver.hpp"
#include "dstab/stability.hpp"

namespace dstab {

// Mode formulas (invariant, init) are written over the plain state variable
// names; jump relations additionally use primed names for the post state.
struct Mode {
    std::string name;
    std::shared_ptr<const OdeSystem> flow;
    FormulaPtr invariant;  // null = true
    FormulaPtr init;       // null = unreachable as a start mode
};

struct Jump {
    std::string from, to;
    FormulaPtr relation;
};

class HybridAutomaton {
public:
    HybridAutomaton(std::string name, std::vector<std::string> vars, Box bounds,
                    std::vector<Mode> modes, std::vector<Jump> jumps);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& vars() const { return vars_; }
    const Box& bounds() const { return bounds_; }
    const std::vector<Mode>& modes() const { return modes_; }
    const std::vector<Jump>& jumps() const { return jumps_; }

    const Mode& mode(const std::string& q) const;
    std::vector<const Jump*> jumps_from(const std::string& q) const;

    // registers every mode flow so formulas over this automaton can be solved
    void register_flows(SystemRegistry& reg) const;

private:
    std::string name_;
    std::vector<std::string> vars_;
    Box bounds_;
    std::vector<Mode> modes_;
    std::vector<Jump> jumps_;
};

// Weakens every invariant, init and jump relation.  Flow membership atoms are
// weakened where they are generated, in the reach encoding.
HybridAutomaton weaken_automaton(const HybridAutomaton& h, const Rational& delta);

// Mode selectors are [0,1]-valued reals; "selected" is b >= 1/2 and its
// negation is the strict complement, so the pair stays negation-free.
TermPtr selector_var(const std::string& mode, int step);
FormulaPtr selector_true(const std::string& mode, int step);

// asserts that the automaton is in mode q (and no other) at step i
FormulaPtr enforce_mode(const HybridAutomaton& h, const std::string& q, int step);
// asserts a discrete transition from q at step i to q2 at step i+1
FormulaPtr enforce_jump(const HybridAutomaton& h, const std::string& q,
                        const std::string& q2, int step);

struct ReachOptions {
    bool include_invariants = true;
    bool include_init = true;
    double max_dwell = 10.0;  // bound on each per-mode dwell time
};

// All jump-graph paths with at most max_jumps transitions.  With require_init
// only modes carrying an init formula can start a path.
std::vector<std::vector<std::string>> enumerate_paths(const HybridAutomaton& h,
                                                      int max_jumps,
                                                      bool require_init);

// Membership of the end state in the reach set along a fixed mode path.
// Free variables: <v>0 (start state), <v>t (end state) and the time term.
// Intermediate states and dwell times are existentially quantified.  A
// zero-jump path degenerates to the continuous flow-membership formula.
FormulaPtr reach_along_path(const HybridAutomaton& h,
                            const std::vector<std::string>& path, TermPtr time,
                            const ReachOptions& opt);

struct HybridPathVerdict {
    std::vector<std::string> path;
    bool stable;
    SolverVerdict solver;
};

struct HybridStabilityVerdict {
    bool stable;  // every path refuted the instability sentence exactly
    std::vector<HybridPathVerdict> paths;
};

// Lyapunov stability of the origin for the hybrid automaton, checked path by
// path up to max_jumps discrete transitions.
HybridStabilityVerdict check_hybrid_stability(const HybridAutomaton& h,
                                              const StabilityParams& p,
                                              const SolverConfig& cfg,
                                              SystemRegistry& systems,
                                              int max_jumps,
                                              const ReachOptions& opt);

// Nonlinear bouncing ball with air drag: modes q_d (falling, v' = g(1+b v^2))
// and q_u (bounce-back, v' = g(1-b v^2)), impact jump x=0 with restitution a,
// g = -9.8, b = 0.01, a = 0.9.
HybridAutomaton bouncing_ball();

}  // namespace dstab
