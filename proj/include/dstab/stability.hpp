#pragma once

#include <optional>

#include "dstab/formula.hpp"
#include "dstab/ode.hpp"
#include "dstab/solver.hpp"

namespace dstab {

// Numeric ranges for the bounded stability sentences.  The inner existential
// radius and the limit tolerance are quantified over ranges bounded away from
// zero so the sentences cannot be satisfied vacuously and stay robust under
// perturbation; the floors must sit strictly above the solver delta.
struct StabilityParams {
    double eps_min = 0.05, eps_max = 1.0;    // disturbance radius range
    double dl_floor = 0.02;                  // floor for the response radius
    double horizon = 5.0;                    // T: time window checked

    double conv_horizon = 5.0;               // T': convergence reference time
    double dprime_floor = 0.02, dprime_max = 0.1;  // basin radius range
    double epsp_min = 0.01, epsp_max = 0.5;  // limit tolerance range
    double dpp_min = 0.01, dpp_max = 0.5;    // width of the late-time window

    double region_r = 0.1;                   // Lyapunov exclusion radius
};

enum class StabilityKind { Lyapunov, Asymptotic, AsymptoticInLarge };

struct StabilityVerdict {
    bool stable;
    SolverVerdict solver;
    FormulaPtr encoding;
    ComplexityReport complexity;
};

// Bounded sentences expressing the stability properties of the origin.
FormulaPtr encode_lyapunov(const OdeSystem& sys, const StabilityParams& p);
FormulaPtr encode_asymptotic(const OdeSystem& sys, const StabilityParams& p);
FormulaPtr encode_asymptotic_in_large(const OdeSystem& sys, const StabilityParams& p);
FormulaPtr encode_for(StabilityKind kind, const OdeSystem& sys, const StabilityParams& p);

// Bounded limit formula: f(x) -> c as x -> a.  Quantifies the tolerance and
// window over explicit ranges; one_sided restricts the window to [a-d, a].
struct LimitParams {
    double eps_min = 0.01, eps_max = 0.5;
    double d_min = 0.01, d_max = 0.5;
};
FormulaPtr encode_limit(const TermPtr& f, const std::string& var, double a,
                        double c, const LimitParams& lp, bool one_sided = false);

// Decides the negated sentence: an exact refutation of the negation means the
// system is stable; a delta-true negation yields a concrete delta-instability
// witness.
StabilityVerdict check_stability(StabilityKind kind, const OdeSystem& sys,
                                 const StabilityParams& p, const SolverConfig& cfg,
                                 const SystemRegistry& systems);

// Lyapunov template test.  The candidate V ranges over parameter variables
// (bounds in dom) and the system state variables; grad defaults to the
// symbolic gradient of v and is cross-checked against it when supplied.
FormulaPtr encode_lyapunov_candidate(const OdeSystem& sys, const TermPtr& v,
                                     const std::vector<TermPtr>& grad,
                                     const Box& dom, const Box& region, double r,
                                     bool strict);

struct LyapunovResult {
    bool success;                          // negation exactly refuted
    std::map<std::string, double> params;  // witness from the positive re-solve
    SolverVerdict solver;                  // verdict on the negated sentence
    FormulaPtr encoding;
    ComplexityReport complexity;
};

LyapunovResult lyapunov_test(const OdeSystem& sys, const TermPtr& v,
                             std::vector<TermPtr> grad, const Box& dom,
                             double r, bool strict, const SolverConfig& cfg,
                             const SystemRegistry& systems);

// Semi-procedures for the unbounded problems: re-check with increasingly
// large time bounds, reporting the first delta-unstable hit.  Exhausting the
// schedule asserts nothing about unbounded stability.
struct DeepenStep {
    double horizon;
    std::optional<double> dprime;
    bool stable;
};
struct DeepenResult {
    bool found;  // delta-unstable at some schedule entry
    std::vector<DeepenStep> steps;
};

DeepenResult deepen_lyapunov(const OdeSystem& sys, StabilityParams p,
                             const SolverConfig& cfg, const SystemRegistry& systems,
                             const std::vector<double>& t_schedule,
                             double budget_seconds = 0.0);

DeepenResult deepen_asymptotic(const OdeSystem& sys, StabilityParams p,
                               const SolverConfig& cfg, const SystemRegistry& systems,
                               const std::vector<double>& dprime_schedule,
                               const std::vector<double>& t_schedule,
                               double budget_seconds = 0.0);

}  // namespace dstab
