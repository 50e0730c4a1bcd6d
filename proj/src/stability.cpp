#include "dstab/stability.hpp"

#include <chrono>
#include <stdexcept>

namespace dstab {

namespace {

TermPtr rc(double d) { return t_const_d(d); }

std::vector<TermPtr> state_vars(const OdeSystem& sys, const std::string& suffix) {
    std::vector<TermPtr> out;
    for (const auto& v : sys.vars()) out.push_back(t_var(v + suffix));
    return out;
}

// wraps body in one universal quantifier per state variable, over X
FormulaPtr forall_state(const OdeSystem& sys, const std::string& suffix,
                        FormulaPtr body) {
    for (auto it = sys.vars().rbegin(); it != sys.vars().rend(); ++it) {
        const Interval& b = sys.bounds().at(*it);
        body = f_forall(*it + suffix, rc(b.lo()), rc(b.hi()), std::move(body));
    }
    return body;
}

// Euclidean distance between the point (vars with `suffix`) and the flow of
// the initial point (vars with suffix "0") at time `t`.
TermPtr flow_gap(const OdeSystem& sys, const std::string& suffix, TermPtr t) {
    std::vector<TermPtr> diffs;
    auto inits = state_vars(sys, "0");
    for (std::size_t i = 0; i < sys.dim(); ++i)
        diffs.push_back(t_sub(t_var(sys.vars()[i] + suffix),
                              t_flow(sys.name(), inits, t, static_cast<int>(i))));
    return t_norm(diffs);
}

void check_params(const StabilityParams& p) {
    if (!(0 < p.dl_floor && p.dl_floor < p.eps_min && p.eps_min < p.eps_max))
        throw std::invalid_argument("need 0 < dl_floor < eps_min < eps_max");
    if (p.horizon <= 0) throw std::invalid_argument("horizon must be positive");
}

// convergence conjunct of the asymptotic sentence: the norm of the flow tends
// to 0 as t approaches T' (one-sided window), for all starts within dp
FormulaPtr convergence(const OdeSystem& sys, const StabilityParams& p,
                       bool with_basin) {
    auto x0 = state_vars(sys, "0");
    std::vector<TermPtr> flow;
    for (std::size_t i = 0; i < sys.dim(); ++i)
        flow.push_back(t_flow(sys.name(), x0, t_var("tt"), static_cast<int>(i)));
    std::vector<FormulaPtr> disj;
    if (with_basin)
        disj.push_back(f_atom(t_sub(t_norm(x0), t_var("dp")), Rel::Geq));
    disj.push_back(f_atom(t_sub(t_var("ep"), t_norm(flow)), Rel::Gt));
    FormulaPtr f = f_or(std::move(disj));
    f = f_forall("tt", t_sub(rc(p.conv_horizon), t_var("dpp")),
                 rc(p.conv_horizon), f);
    f = f_exists("dpp", rc(p.dpp_min), rc(p.dpp_max), f);
    f = f_forall("ep", rc(p.epsp_min), rc(p.epsp_max), f);
    f = forall_state(sys, "0", f);
    if (with_basin)
        f = f_exists("dp", rc(p.dprime_floor), rc(p.dprime_max), f);
    return f;
}

}  // namespace

// forall eps . exists dl . forall t, x0, xt :
//   ||x0|| >= dl  \/  xt off the flow of x0  \/  ||xt|| < eps
FormulaPtr encode_lyapunov(const OdeSystem& sys, const StabilityParams& p) {
    check_params(p);
    auto x0 = state_vars(sys, "0");
    auto xt = state_vars(sys, "t");
    FormulaPtr matrix = f_or({
        f_atom(t_sub(t_norm(x0), t_var("dl")), Rel::Geq),
        f_atom(t_sub(t_var("eps"), t_norm(xt)), Rel::Gt),
        f_atom(flow_gap(sys, "t", t_var("t")), Rel::Gt),
    });
    FormulaPtr f = forall_state(sys, "t", matrix);
    f = forall_state(sys, "0", f);
    f = f_forall("t", rc(0.0), rc(p.horizon), f);
    f = f_exists("dl", rc(p.dl_floor), t_var("eps"), f);
    return f_forall("eps", rc(p.eps_min), rc(p.eps_max), f);
}

FormulaPtr encode_limit(const TermPtr& f, const std::string& var, double a,
                        double c, const LimitParams& lp, bool one_sided) {
    if (!(0 < lp.eps_min && lp.eps_min < lp.eps_max) ||
        !(0 < lp.d_min && lp.d_min <= lp.d_max))
        throw std::invalid_argument("limit ranges must be positive and ordered");
    // |f - c| < ep as a two-atom conjunction
    FormulaPtr matrix = f_and({
        f_atom(t_sub(t_add(rc(c), t_var("ep")), f), Rel::Gt),
        f_atom(t_sub(f, t_sub(rc(c), t_var("ep"))), Rel::Gt),
    });
    TermPtr win_lo = t_sub(rc(a), t_var("dd"));
    TermPtr win_hi = one_sided ? rc(a) : t_add(rc(a), t_var("dd"));
    FormulaPtr body = f_forall(var, win_lo, win_hi, matrix);
    body = f_exists("dd", rc(lp.d_min), rc(lp.d_max), body);
    return f_forall("ep", rc(lp.eps_min), rc(lp.eps_max), body);
}

FormulaPtr encode_asymptotic(const OdeSystem& sys, const StabilityParams& p) {
    if (!(0 < p.dprime_floor && p.dprime_floor <= p.dprime_max))
        throw std::invalid_argument("need 0 < dprime_floor <= dprime_max");
    return f_and({encode_lyapunov(sys, p), convergence(sys, p, true)});
}

// in the large: convergence from every initial state in X, no basin radius
FormulaPtr encode_asymptotic_in_large(const OdeSystem& sys,
                                      const StabilityParams& p) {
    return f_and({encode_lyapunov(sys, p), convergence(sys, p, false)});
}

FormulaPtr encode_for(StabilityKind kind, const OdeSystem& sys,
                      const StabilityParams& p) {
    switch (kind) {
        case StabilityKind::Lyapunov: return encode_lyapunov(sys, p);
        case StabilityKind::Asymptotic: return encode_asymptotic(sys, p);
        case StabilityKind::AsymptoticInLarge:
            return encode_asymptotic_in_large(sys, p);
    }
    throw std::logic_error("unreachable stability kind");
}

StabilityVerdict check_stability(StabilityKind kind, const OdeSystem& sys,
                                 const StabilityParams& p, const SolverConfig& cfg,
                                 const SystemRegistry& systems) {
    if (cfg.delta >= p.dl_floor ||
        (kind != StabilityKind::Lyapunov && cfg.delta >= p.epsp_min))
        throw std::invalid_argument(
            "delta must be below the radius floors of the encoding");
    StabilityVerdict out;
    out.encoding = encode_for(kind, sys, p);
    out.complexity = classify(out.encoding);
    out.solver = decide(negate(out.encoding), cfg, &systems);
    out.stable = out.solver.result == DecideResult::ExactFalse;
    return out;
}

// exists params . V(0) = 0  /\  forall x in region :
//      (||x|| < r  \/  V > 0)
//   /\ (||x|| < r  \/  decrease along the field, strict or not)
FormulaPtr encode_lyapunov_candidate(const OdeSystem& sys, const TermPtr& v,
                                     const std::vector<TermPtr>& grad,
                                     const Box& dom, const Box& region, double r,
                                     bool strict) {
    if (grad.size() != sys.dim())
        throw std::invalid_argument("gradient needs one component per state variable");
    if (r <= 0) throw std::invalid_argument("exclusion radius must be positive");
    double reach = 0.0;
    for (const auto& sv : sys.vars()) reach = std::max(reach, region.at(sv).mag());
    if (r >= reach)
        throw std::invalid_argument("exclusion radius covers the whole region");

    std::map<std::string, TermPtr> origin;
    for (const auto& sv : sys.vars()) origin[sv] = t_const(0);
    TermPtr v_at_zero = substitute(v, origin);

    TermPtr lie = t_const(0);
    for (std::size_t i = 0; i < sys.dim(); ++i)
        lie = t_add(lie, t_mul(grad[i], sys.rhs()[i]));

    TermPtr nx = t_norm(state_vars(sys, ""));
    FormulaPtr inside = f_atom(t_sub(rc(r), nx), Rel::Gt);
    FormulaPtr decrease = strict ? f_atom(t_neg(lie), Rel::Gt)
                                 : f_atom(t_neg(lie), Rel::Geq);
    FormulaPtr conds = f_and({
        f_or({inside, f_atom(v, Rel::Gt)}),
        f_or({inside, decrease}),
    });
    FormulaPtr body = conds;
    for (auto it = sys.vars().rbegin(); it != sys.vars().rend(); ++it) {
        const Interval& b = region.at(*it);
        body = f_forall(*it, rc(b.lo()), rc(b.hi()), std::move(body));
    }
    body = f_and({f_eq(v_at_zero, t_const(0)), std::move(body)});
    for (auto it = dom.entries().rbegin(); it != dom.entries().rend(); ++it)
        body = f_exists(it->first, rc(it->second.lo()), rc(it->second.hi()),
                        std::move(body));
    return body;
}

LyapunovResult lyapunov_test(const OdeSystem& sys, const TermPtr& v,
                             std::vector<TermPtr> grad, const Box& dom,
                             double r, bool strict, const SolverConfig& cfg,
                             const SystemRegistry& systems) {
    if (grad.empty()) {
        for (const auto& sv : sys.vars()) grad.push_back(diff(v, sv));
    } else {
        // cross-check a supplied gradient against the symbolic one on samples
        for (std::size_t i = 0; i < sys.dim(); ++i) {
            TermPtr sym = diff(v, sys.vars()[i]);
            for (double s : {0.25, 0.75}) {
                Box sample;
                for (const auto& [name, b] : dom.entries())
                    sample.set(name, Interval::point(b.lo() + s * b.width()));
                for (const auto& sv : sys.vars()) {
                    const Interval& b = sys.bounds().at(sv);
                    sample.set(sv, Interval::point(b.lo() + s * b.width()));
                }
                if (!eval_term(grad[i], sample).intersects(eval_term(sym, sample)))
                    throw std::invalid_argument(
                        "supplied gradient disagrees with the template");
            }
        }
    }

    LyapunovResult out;
    out.encoding =
        encode_lyapunov_candidate(sys, v, grad, dom, sys.bounds(), r, strict);
    out.complexity = classify(out.encoding);
    out.solver = decide(negate(out.encoding), cfg, &systems);
    out.success = out.solver.result == DecideResult::ExactFalse;
    if (out.success) {
        // extract a parameter witness by re-solving the positive form
        SolverConfig cfg2 = cfg;
        cfg2.delta = cfg.delta * 0.5;
        auto pos = decide(out.encoding, cfg2, &systems);
        if (pos.result == DecideResult::DeltaTrue) {
            for (const auto& [name, b] : dom.entries()) {
                auto it = pos.witness.find(name);
                out.params[name] = it == pos.witness.end() ? b.mid() : it->second;
            }
        }
    }
    return out;
}

namespace {

DeepenResult deepen_loop(const OdeSystem& sys, StabilityParams p,
                         const SolverConfig& cfg, const SystemRegistry& systems,
                         StabilityKind kind,
                         const std::vector<std::optional<double>>& dprimes,
                         const std::vector<double>& t_schedule,
                         double budget_seconds) {
    DeepenResult out{false, {}};
    auto start = std::chrono::steady_clock::now();
    auto over_budget = [&] {
        if (budget_seconds <= 0) return false;
        std::chrono::duration<double> used = std::chrono::steady_clock::now() - start;
        return used.count() > budget_seconds;
    };
    for (const auto& dp : dprimes) {
        if (dp) {
            p.dprime_max = *dp;
            p.dprime_floor = std::min(p.dprime_floor, *dp / 2);
        }
        for (double T : t_schedule) {
            if (over_budget()) return out;
            p.horizon = T;
            p.conv_horizon = T;
            auto v = check_stability(kind, sys, p, cfg, systems);
            out.steps.push_back({T, dp, v.stable});
            if (!v.stable) {
                out.found = true;
                return out;
            }
        }
    }
    return out;
}

}  // namespace

DeepenResult deepen_lyapunov(const OdeSystem& sys, StabilityParams p,
                             const SolverConfig& cfg, const SystemRegistry& systems,
                             const std::vector<double>& t_schedule,
                             double budget_seconds) {
    return deepen_loop(sys, p, cfg, systems, StabilityKind::Lyapunov,
                       {std::nullopt}, t_schedule, budget_seconds);
}

DeepenResult deepen_asymptotic(const OdeSystem& sys, StabilityParams p,
                               const SolverConfig& cfg, const SystemRegistry& systems,
                               const std::vector<double>& dprime_schedule,
                               const std::vector<double>& t_schedule,
                               double budget_seconds) {
    std::vector<std::optional<double>> dps;
    for (double d : dprime_schedule) dps.emplace_back(d);
    if (dps.empty()) dps.emplace_back(std::nullopt);
    return deepen_loop(sys, p, cfg, systems, StabilityKind::Asymptotic, dps,
                       t_schedule, budget_seconds);
}

}  // namespace dstab
