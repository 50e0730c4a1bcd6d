#include "dstab/hybrid.hpp"

#include <stdexcept>

namespace dstab {

namespace {

TermPtr rc(double d) { return t_const_d(d); }

std::map<std::string, TermPtr> rename(const std::vector<std::string>& vars,
                                      const std::string& from_suffix,
                                      const std::string& to_suffix) {
    std::map<std::string, TermPtr> m;
    for (const auto& v : vars) m[v + from_suffix] = t_var(v + to_suffix);
    return m;
}

}  // namespace

HybridAutomaton::HybridAutomaton(std::string name, std::vector<std::string> vars,
                                 Box bounds, std::vector<Mode> modes,
                                 std::vector<Jump> jumps)
    : name_(std::move(name)),
      vars_(std::move(vars)),
      bounds_(std::move(bounds)),
      modes_(std::move(modes)),
      jumps_(std::move(jumps)) {
    if (modes_.empty()) throw std::invalid_argument("automaton needs a mode");
    for (const auto& v : vars_)
        if (!bounds_.has(v))
            throw std::invalid_argument("state bounds missing variable " + v);
    for (const auto& m : modes_) {
        if (!m.flow) throw std::invalid_argument("mode without flow: " + m.name);
        if (m.flow->vars() != vars_)
            throw std::invalid_argument("mode flow variables differ: " + m.name);
    }
    for (const auto& j : jumps_) {
        mode(j.from);
        mode(j.to);
        if (!j.relation) throw std::invalid_argument("jump without relation");
    }
}

const Mode& HybridAutomaton::mode(const std::string& q) const {
    for (const auto& m : modes_)
        if (m.name == q) return m;
    throw std::out_of_range("unknown mode: " + q);
}

std::vector<const Jump*> HybridAutomaton::jumps_from(const std::string& q) const {
    std::vector<const Jump*> out;
    for (const auto& j : jumps_)
        if (j.from == q) out.push_back(&j);
    return out;
}

void HybridAutomaton::register_flows(SystemRegistry& reg) const {
    for (const auto& m : modes_) reg.add(m.flow);
}

HybridAutomaton weaken_automaton(const HybridAutomaton& h, const Rational& delta) {
    std::vector<Mode> modes;
    for (const auto& m : h.modes())
        modes.push_back({m.name, m.flow,
                         m.invariant ? delta_weaken(m.invariant, delta) : nullptr,
                         m.init ? delta_weaken(m.init, delta) : nullptr});
    std::vector<Jump> jumps;
    for (const auto& j : h.jumps())
        jumps.push_back({j.from, j.to, delta_weaken(j.relation, delta)});
    return HybridAutomaton(h.name(), h.vars(), h.bounds(), std::move(modes),
                           std::move(jumps));
}

TermPtr selector_var(const std::string& mode, int step) {
    return t_var("b_" + mode + "_" + std::to_string(step));
}

FormulaPtr selector_true(const std::string& mode, int step) {
    return f_atom(t_sub(selector_var(mode, step), t_const(Rational(1, 2))),
                  Rel::Geq);
}

FormulaPtr enforce_mode(const HybridAutomaton& h, const std::string& q, int step) {
    h.mode(q);
    std::vector<FormulaPtr> lits;
    for (const auto& m : h.modes()) {
        FormulaPtr sel = selector_true(m.name, step);
        lits.push_back(m.name == q ? sel : negate(sel));
    }
    return f_and(std::move(lits));
}

FormulaPtr enforce_jump(const HybridAutomaton& h, const std::string& q,
                        const std::string& q2, int step) {
    return f_and({enforce_mode(h, q, step), enforce_mode(h, q2, step + 1)});
}

std::vector<std::vector<std::string>> enumerate_paths(const HybridAutomaton& h,
                                                      int max_jumps,
                                                      bool require_init) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> cur;
    auto grow = [&](auto&& self, const std::string& q, int left) -> void {
        cur.push_back(q);
        out.push_back(cur);
        if (left > 0)
            for (const Jump* j : h.jumps_from(q)) self(self, j->to, left - 1);
        cur.pop_back();
    };
    for (const auto& m : h.modes()) {
        if (require_init && !m.init) continue;
        grow(grow, m.name, max_jumps);
    }
    return out;
}

FormulaPtr reach_along_path(const HybridAutomaton& h,
                            const std::vector<std::string>& path, TermPtr time,
                            const ReachOptions& opt) {
    if (path.empty()) throw std::invalid_argument("empty mode path");
    const auto& vars = h.vars();
    int k = static_cast<int>(path.size()) - 1;

    auto entry_suffix = [&](int i) {
        return i == 0 ? std::string("0") : "_s" + std::to_string(i);
    };
    auto exit_suffix = [&](int i) {
        return i == k ? std::string("t") : "_e" + std::to_string(i);
    };

    // leftover dwell in the final mode: t - sum of the earlier dwell times
    TermPtr last_dwell = time;
    for (int i = 0; i < k; ++i)
        last_dwell = t_sub(last_dwell, t_var("t_" + std::to_string(i)));

    std::vector<FormulaPtr> conj;
    const Mode& first = h.mode(path[0]);
    if (opt.include_init && first.init)
        conj.push_back(substitute(first.init, rename(vars, "", entry_suffix(0))));

    for (int i = 0; i <= k; ++i) {
        const Mode& m = h.mode(path[i]);
        if (opt.include_invariants && m.invariant) {
            conj.push_back(
                substitute(m.invariant, rename(vars, "", entry_suffix(i))));
            conj.push_back(
                substitute(m.invariant, rename(vars, "", exit_suffix(i))));
        }
        TermPtr dwell = i < k ? t_var("t_" + std::to_string(i)) : last_dwell;
        std::vector<TermPtr> inits, gaps;
        for (const auto& v : vars) inits.push_back(t_var(v + entry_suffix(i)));
        for (std::size_t c = 0; c < vars.size(); ++c)
            gaps.push_back(t_sub(
                t_var(vars[c] + exit_suffix(i)),
                t_flow(m.flow->name(), inits, dwell, static_cast<int>(c))));
        conj.push_back(f_atom(t_neg(t_norm(gaps)), Rel::Geq));
        if (i == k && k > 0) conj.push_back(f_atom(last_dwell, Rel::Geq));
        if (i < k) {
            const Jump* jump = nullptr;
            for (const Jump* cand : h.jumps_from(path[i]))
                if (cand->to == path[i + 1]) { jump = cand; break; }
            if (!jump)
                throw std::invalid_argument("path uses a missing jump " +
                                            path[i] + " -> " + path[i + 1]);
            auto m1 = rename(vars, "", exit_suffix(i));
            auto m2 = rename(vars, "'", entry_suffix(i + 1));
            m1.insert(m2.begin(), m2.end());
            conj.push_back(substitute(jump->relation, m1));
        }
    }

    FormulaPtr body = f_and(std::move(conj));
    // existential closure of intermediate states and dwell times
    for (int i = k - 1; i >= 0; --i) {
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
            const Interval& b = h.bounds().at(*it);
            body = f_exists(*it + exit_suffix(i), rc(b.lo()), rc(b.hi()), body);
        }
        body = f_exists("t_" + std::to_string(i), rc(0.0), rc(opt.max_dwell), body);
    }
    for (int i = k; i >= 1; --i)
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
            const Interval& b = h.bounds().at(*it);
            body = f_exists(*it + entry_suffix(i), rc(b.lo()), rc(b.hi()), body);
        }
    return body;
}

HybridStabilityVerdict check_hybrid_stability(const HybridAutomaton& h,
                                              const StabilityParams& p,
                                              const SolverConfig& cfg,
                                              SystemRegistry& systems,
                                              int max_jumps,
                                              const ReachOptions& opt) {
    h.register_flows(systems);
    const auto& vars = h.vars();

    std::vector<TermPtr> x0, xt;
    for (const auto& v : vars) x0.push_back(t_var(v + "0"));
    for (const auto& v : vars) xt.push_back(t_var(v + "t"));

    HybridStabilityVerdict out;
    out.stable = true;
    for (const auto& path : enumerate_paths(h, max_jumps, opt.include_init)) {
        FormulaPtr reach = reach_along_path(h, path, t_var("t"), opt);
        FormulaPtr matrix = f_or({
            f_atom(t_sub(t_norm(x0), t_var("dl")), Rel::Geq),
            f_atom(t_sub(t_var("eps"), t_norm(xt)), Rel::Gt),
            negate(reach),
        });
        FormulaPtr f = matrix;
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
            const Interval& b = h.bounds().at(*it);
            f = f_forall(*it + "t", rc(b.lo()), rc(b.hi()), f);
        }
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
            const Interval& b = h.bounds().at(*it);
            f = f_forall(*it + "0", rc(b.lo()), rc(b.hi()), f);
        }
        f = f_forall("t", rc(0.0), rc(p.horizon), f);
        f = f_exists("dl", rc(p.dl_floor), t_var("eps"), f);
        f = f_forall("eps", rc(p.eps_min), rc(p.eps_max), f);

        HybridPathVerdict pv;
        pv.path = path;
        pv.solver = decide(negate(f), cfg, &systems);
        pv.stable = pv.solver.result == DecideResult::ExactFalse;
        out.stable = out.stable && pv.stable;
        out.paths.push_back(std::move(pv));
    }
    return out;
}

HybridAutomaton bouncing_ball() {
    std::vector<std::string> vars = {"x", "v"};
    Box bounds;
    bounds.set("x", Interval(0.0, 12.0));
    bounds.set("v", Interval(-20.0, 20.0));

    const Rational g(-49, 5);   // -9.8
    const Rational b(1, 100);   // drag coefficient
    const Rational alpha(9, 10);

    auto drag = [&](bool falling) {
        TermPtr vsq = t_mul(t_const(b), t_pow(t_var("v"), 2));
        TermPtr factor = falling ? t_add(t_const(1), vsq) : t_sub(t_const(1), vsq);
        return t_mul(t_const(g), factor);
    };
    auto flow_qd = std::make_shared<OdeSystem>(
        "ball_qd", vars, std::vector<TermPtr>{t_var("v"), drag(true)}, bounds,
        std::nullopt);
    auto flow_qu = std::make_shared<OdeSystem>(
        "ball_qu", vars, std::vector<TermPtr>{t_var("v"), drag(false)}, bounds,
        std::nullopt);

    Mode qd{"q_d", flow_qd,
            f_and({f_atom(t_var("x"), Rel::Geq), f_atom(t_var("v"), Rel::Geq)}),
            f_and({f_eq(t_var("x"), t_const(10)), f_eq(t_var("v"), t_const(0))})};
    Mode qu{"q_u", flow_qu,
            f_and({f_atom(t_var("x"), Rel::Geq),
                   f_atom(t_neg(t_var("v")), Rel::Geq)}),
            nullptr};

    Jump up_down{"q_u", "q_d",
                 f_and({f_eq(t_var("v"), t_const(0)),
                        f_eq(t_var("x'"), t_var("x")),
                        f_eq(t_var("v'"), t_var("v"))})};
    Jump down_up{"q_d", "q_u",
                 f_and({f_eq(t_var("x"), t_const(0)),
                        f_eq(t_var("v'"), t_mul(t_const(alpha), t_var("v"))),
                        f_eq(t_var("x'"), t_var("x"))})};

    return HybridAutomaton("bouncingball", vars, bounds, {qd, qu},
                           {up_down, down_up});
}

}  // namespace dstab
