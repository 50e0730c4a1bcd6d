#include <cstdio>
#include <chrono>
#include "dstab/eval.hpp"

#include <climits>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "dstab/ode.hpp"

namespace dstab {

std::shared_ptr<const FlowTube> FlowCache::lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : it->second;
}

void FlowCache::store(const std::string& key, std::shared_ptr<const FlowTube> tube) {
    std::lock_guard<std::mutex> lock(mu_);
    if (entries_.size() >= 200000) entries_.clear();  // values are pure
    entries_[key] = std::move(tube);
}

namespace {

void append_bits(std::string& key, double v) {
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof(double));
    key.append(buf, sizeof(double));
}

// Shared tube acquisition for a flow term: evaluates the initial terms and
// the time, clamps the window to [0, hi], and returns a cached (or freshly
// built) tube for the quantized horizon class.
std::shared_ptr<const FlowTube> tube_for(const Term& t, const Box& b,
                                         const EvalContext& ctx,
                                         const OdeSystem& sys, Interval& tt_out) {
    Box x0;
    std::string key = t.name;
    double w = 0.0;
    std::vector<Interval> raw(sys.dim());
    for (std::size_t i = 0; i < sys.dim(); ++i) {
        raw[i] = eval_term(t.args[i], b, ctx);
        w = std::max(w, raw[i].width());
    }
    // snap each initial interval outward onto a power-of-two grid of roughly
    // an eighth of its own width (with a floor for near-point intervals):
    // the snapped box is a superset, so its tube is sound for the original
    // query, its width grows by at most a quarter, and the many nearby boxes
    // probed around one search node share a few cached integrations
    for (std::size_t i = 0; i < sys.dim(); ++i) {
        double wi = raw[i].width();
        double g = std::ldexp(1.0, std::max(wi > 0.0 ? std::ilogb(wi) - 3 : INT_MIN,
                                            -13));
        Interval iv(std::floor(raw[i].lo() / g) * g,
                    std::ceil(raw[i].hi() / g) * g);
        x0.set(sys.vars()[i], iv);
        append_bits(key, iv.lo());
        append_bits(key, iv.hi());
    }
    (void)w;
    Interval tt = eval_term(t.time, b, ctx);
    if (tt.hi() < 0.0)
        throw EvalDomainError("flow time interval below zero");
    if (tt.lo() < 0.0) tt = Interval(0.0, tt.hi());
    append_bits(key, ctx.flow_tol);

    // build horizons are quantized to powers of two and keyed, so a cached
    // tube is a pure function of (x0, tol, horizon class): query answers do
    // not depend on cache state or on which worker built the entry
    double tcap = 1.0 / 64.0;
    while (tcap < tt.hi()) tcap *= 2.0;
    append_bits(key, tcap);

    if (ctx.flow_evals) ctx.flow_evals->fetch_add(1);
    std::shared_ptr<const FlowTube> tube =
        ctx.flow_cache ? ctx.flow_cache->lookup(key) : nullptr;
    if (!tube || tube->insufficient_for(tt.hi())) {
        auto c0 = std::chrono::steady_clock::now();
        tube = std::make_shared<const FlowTube>(
            flow_tube(sys, x0, tcap, ctx.flow_tol));
        long long nb = g_tube_builds.fetch_add(1) + 1;
        if (nb % 2000 == 0)
            std::fprintf(stderr, "[tube] builds=%lld total=%lld ms steps=%lld\n",
                         nb, g_tube_us.load() / 1000, g_steps.load());
        long long us = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::steady_clock::now() - c0)
                           .count();
        g_tube_us.fetch_add(us);
        if (us > 100000) {
            std::string msg = "[tube] slow build " + std::to_string(us / 1000) + " ms box";
            for (std::size_t i = 0; i < sys.dim(); ++i) {
                Interval iv = x0.at(sys.vars()[i]);
                msg += " [" + std::to_string(iv.lo()) + "," + std::to_string(iv.hi()) + "]";
            }
            msg += " t_hi " + std::to_string(tt.hi());
            msg += " steps " + std::to_string(g_steps.load()) +
                   " rej a=" + std::to_string(g_rej_apriori.load()) +
                   " l=" + std::to_string(g_rej_lip.load()) +
                   " p=" + std::to_string(g_rej_pend.load()) +
                   " b=" + std::to_string(g_rej_budget.load()) + "\n";
            std::fputs(msg.c_str(), stderr);
        }
        if (ctx.flow_cache) ctx.flow_cache->store(key, tube);
    }
    tt_out = tt;
    return tube;
}

Interval eval_flow(const Term& t, const Box& b, const EvalContext& ctx) {
    if (ctx.systems == nullptr)
        throw std::runtime_error("flow value without a system registry");
    const OdeSystem& sys = ctx.systems->require(t.name);
    if (t.args.size() != sys.dim())
        throw std::invalid_argument("flow initial-state arity mismatch for " + t.name);
    if (t.component < 0 || t.component >= static_cast<int>(sys.dim()))
        throw std::invalid_argument("flow component out of range for " + t.name);
    Interval tt = Interval::point(0.0);
    auto tube = tube_for(t, b, ctx, sys, tt);
    return tube->query(tt).at(sys.vars()[t.component]);
}

// Detects the flow-deviation pattern norm(x_0 - flow_0, ..., x_{n-1} -
// flow_{n-1}) where all flow values share one system, one initial-term list
// and one time term.  The generic interval norm hulls each component
// separately, which inflates a rotated initial box by up to sqrt(n) at the
// corners; the tube's affine step data yields a tight lower bound on the
// distance instead.  Returns 0 when the pattern does not apply.
double deviation_lo_if_gap(const Term& t, const Box& b, const EvalContext& ctx) {
    if (t.args.empty() || ctx.systems == nullptr) return 0.0;
    const Term* f0 = nullptr;
    for (std::size_t i = 0; i < t.args.size(); ++i) {
        const Term& s = *t.args[i];
        if (s.kind != Term::Kind::Apply || s.fn != Fn::Sub) return 0.0;
        const Term& fl = *s.args[1];
        if (fl.kind != Term::Kind::Flow || fl.component != static_cast<int>(i))
            return 0.0;
        if (i == 0) {
            f0 = &fl;
        } else {
            if (fl.name != f0->name || fl.time != f0->time ||
                fl.args.size() != f0->args.size())
                return 0.0;
            for (std::size_t j = 0; j < fl.args.size(); ++j)
                if (fl.args[j] != f0->args[j]) return 0.0;
        }
    }
    const OdeSystem* sys = ctx.systems->find(f0->name).get();
    if (sys == nullptr || t.args.size() != sys->dim() ||
        f0->args.size() != sys->dim())
        return 0.0;
    std::vector<Interval> X;
    X.reserve(sys->dim());
    for (const auto& arg : t.args) X.push_back(eval_term(arg->args[0], b, ctx));
    Interval tt = Interval::point(0.0);
    auto tube = tube_for(*f0, b, ctx, *sys, tt);
    return tube->deviation_lo(X, tt);
}

}  // namespace

Interval eval_term(const TermPtr& t, const Box& b, const EvalContext& ctx) {
    switch (t->kind) {
        case Term::Kind::Variable:
            return b.at(t->name);
        case Term::Kind::Constant:
            return t->dconst ? Interval::point(t->dvalue)
                             : Interval::from_rational(t->value);
        case Term::Kind::Flow:
            return eval_flow(*t, b, ctx);
        case Term::Kind::Apply: break;
    }
    const auto& a = t->args;
    switch (t->fn) {
        case Fn::Add: return eval_term(a[0], b, ctx) + eval_term(a[1], b, ctx);
        case Fn::Sub: return eval_term(a[0], b, ctx) - eval_term(a[1], b, ctx);
        case Fn::Neg: return -eval_term(a[0], b, ctx);
        case Fn::Mul: return eval_term(a[0], b, ctx) * eval_term(a[1], b, ctx);
        case Fn::Div: return eval_term(a[0], b, ctx) / eval_term(a[1], b, ctx);
        case Fn::Pow: return ipow(eval_term(a[0], b, ctx), t->ipow);
        case Fn::Abs: return iabs(eval_term(a[0], b, ctx));
        case Fn::Min: return imin(eval_term(a[0], b, ctx), eval_term(a[1], b, ctx));
        case Fn::Max: return imax(eval_term(a[0], b, ctx), eval_term(a[1], b, ctx));
        case Fn::Exp: return iexp(eval_term(a[0], b, ctx));
        case Fn::Sin: return isin(eval_term(a[0], b, ctx));
        case Fn::Cos: return icos(eval_term(a[0], b, ctx));
        case Fn::Sqrt: return isqrt(eval_term(a[0], b, ctx));
        case Fn::Norm: {
            Interval sum = Interval::point(0.0);
            for (const auto& arg : a) {
                Interval v = eval_term(arg, b, ctx);
                sum = sum + ipow(v, 2);
            }
            Interval out = isqrt(sum);
            double lo = deviation_lo_if_gap(*t, b, ctx);
            if (lo > out.lo()) out = Interval(std::min(lo, out.hi()), out.hi());
            return out;
        }
    }
    throw std::logic_error("unreachable eval case");
}

Interval eval_term(const TermPtr& t, const Box& b) {
    EvalContext ctx;
    return eval_term(t, b, ctx);
}

}  // namespace dstab
