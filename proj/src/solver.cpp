#include "dstab/solver.hpp"

#include <atomic>
#include <cmath>
#include <future>
#include <thread>
#include <iostream>
#include <mutex>
#include <stdexcept>

#include "dstab/ode.hpp"

namespace dstab {

namespace {

// At a quantifier node the bound terms evaluate to intervals, not points.
// True certificates for forall (and false certificates for exists) must hold
// over the outer hull [lo.lo, hi.hi]; witnesses for the dual certificates
// must lie in the inner core [lo.hi, hi.lo], which is contained in every
// realization of the bounds.
struct QuantRange {
    Interval hull;
    bool core_nonempty;
    Interval core;
};

class Search {
public:
    Search(const SolverConfig& cfg, const SystemRegistry* systems,
           FlowCache* cache)
        : cfg_(cfg), ctx_{systems, cache, cfg.flow_tol, &flow_evals} {
        static std::atomic<bool> claimed{false};
        if (const char* e = std::getenv("DSTAB_DBG")) {
            bool expect = false;
            if (claimed.compare_exchange_strong(expect, true))
                dbg_left_ = std::atoll(e);
        }
    }

    Truth3 run(const FormulaPtr& f, const Box& env, int floor,
               std::map<std::string, double>* witness) {
        floor_ = floor;
        witness_ = witness;
        Blame blame;
        Truth3 r = eval(f, env, blame);
        if (cfg_.trace && nodes.load() > 50000) {
            std::cerr << "[trace] piece nodes " << nodes.load() << " splits:";
            for (auto& [v, c] : var_splits) std::cerr << " " << v << "=" << c;
            std::cerr << " tubes " << g_tube_builds.load() << " ("
                      << g_tube_us.load() / 1000 << " ms)\n";
        }
        return r;
    }

    std::atomic<long long> nodes{0};
    std::atomic<long long> atom_evals{0};
    std::atomic<long long> splits{0};
    std::atomic<long long> flow_evals{0};

private:
    // Quantified variables whose current piece is still splittable and whose
    // width blocks a decision.  "useful" variables decide some atom outright
    // when collapsed to a point; "weak" ones merely contribute width.  An
    // Unknown carrying an empty blame can only be resolved by a deeper round.
    struct Blame {
        std::set<std::string> useful;
        std::set<std::string> weak;
        void merge(const Blame& o) {
            useful.insert(o.useful.begin(), o.useful.end());
            weak.insert(o.weak.begin(), o.weak.end());
        }
        void erase(const std::string& v) {
            useful.erase(v);
            weak.erase(v);
        }
        bool contains(const std::string& v) const {
            return useful.count(v) || weak.count(v);
        }
    };

    bool splittable(const std::string& var, const Box& env) const {
        auto it = wfloor_.find(var);
        if (it == wfloor_.end() || !env.has(var)) return false;
        return env.at(var).width() > it->second;
    }

    Truth3 eval(const FormulaPtr& f, const Box& env, Blame& blame) {
        long long n = nodes.fetch_add(1);
        if (n >= cfg_.node_budget)
            throw std::runtime_error("solver node budget exhausted");
        if (cfg_.trace && (n & ((1 << 20) - 1)) == (1 << 20) - 1) {
            std::cerr << "[trace] live nodes " << n << " blk " << blk_nodes
                      << " probe " << blk_probe << " T " << blk_true << " F "
                      << blk_false << " defer " << blk_defer << " floor "
                      << blk_floor << " splits:";
            for (auto& [v, c] : var_splits) std::cerr << " " << v << "=" << c;
            std::cerr << "\n";
        }
        switch (f->kind) {
            case Formula::Kind::Atom:
                return atom(f, env, blame);
            case Formula::Kind::And:
                return junction(f, env, blame, /*conj=*/true);
            case Formula::Kind::Or:
                return junction(f, env, blame, /*conj=*/false);
            case Formula::Kind::Forall:
                return quantifier(f, env, blame, /*universal=*/true);
            case Formula::Kind::Exists:
                return quantifier(f, env, blame, /*universal=*/false);
        }
        throw std::logic_error("unreachable formula kind");
    }

    const std::set<std::string>& atom_vars(const FormulaPtr& f) {
        auto it = avars_.find(f.get());
        if (it != avars_.end()) return it->second;
        return avars_.emplace(f.get(), free_vars(f->atom)).first->second;
    }

    void blame_wide(const std::set<std::string>& vars, const Box& env,
                    Blame& blame) {
        for (const auto& v : vars)
            if (splittable(v, env)) blame.weak.insert(v);
    }

    bool decided(const Interval& v, Rel rel) const {
        if (rel == Rel::Gt) return v.lo() > -cfg_.delta || v.hi() <= 0.0;
        return v.lo() >= -cfg_.delta || v.hi() < 0.0;
    }

    // Blame only variables whose refinement can actually decide the atom:
    // collapse each candidate to its midpoint and re-evaluate.  If no single
    // collapse decides, refinement must be joint, so blame every candidate.
    void blame_atom(const FormulaPtr& f, const Box& env, Blame& blame) {
        std::vector<std::string> cand;
        for (const auto& v : atom_vars(f))
            if (splittable(v, env)) cand.push_back(v);
        bool any_useful = false;
        for (const auto& v : cand) {
            Box env2 = env;
            env2.set(v, Interval::point(env.at(v).mid()));
            bool u;
            try {
                u = decided(eval_term(f->atom, env2, ctx_), f->rel);
            } catch (const std::runtime_error&) {
                u = true;
            }
            if (u) {
                blame.useful.insert(v);
                any_useful = true;
            }
        }
        if (!any_useful)
            blame.weak.insert(cand.begin(), cand.end());
    }

    Truth3 atom(const FormulaPtr& f, const Box& env, Blame& blame) {
        atom_evals.fetch_add(1);
        Interval v;
        try {
            v = eval_term(f->atom, env, ctx_);
        } catch (const EvalDomainError&) {
            blame_wide(atom_vars(f), env, blame);
            return Truth3::Unknown;
        } catch (const FlowEscapeError&) {
            blame_wide(atom_vars(f), env, blame);
            return Truth3::Unknown;
        } catch (const FlowNonconvergenceError&) {
            blame_wide(atom_vars(f), env, blame);
            return Truth3::Unknown;
        }
        if (f->rel == Rel::Gt) {
            if (v.lo() > -cfg_.delta) return Truth3::True_delta;
            if (v.hi() <= 0.0) return Truth3::False_exact;
        } else {
            if (v.lo() >= -cfg_.delta) return Truth3::True_delta;
            if (v.hi() < 0.0) return Truth3::False_exact;
        }
        blame_atom(f, env, blame);
        return Truth3::Unknown;
    }

    Truth3 junction(const FormulaPtr& f, const Box& env, Blame& blame, bool conj) {
        bool unknown = false;
        Truth3 kill = conj ? Truth3::False_exact : Truth3::True_delta;
        Truth3 pass = conj ? Truth3::True_delta : Truth3::False_exact;
        for (const auto& c : f->children) {
            Truth3 r = eval(c, env, blame);
            if (r == kill) return kill;
            if (r == Truth3::Unknown) unknown = true;
        }
        return unknown ? Truth3::Unknown : pass;
    }

    std::optional<QuantRange> range(const Formula* f, const Box& env) {
        Interval lo, hi;
        try {
            lo = eval_term(f->lo, env, ctx_);
            hi = eval_term(f->hi, env, ctx_);
        } catch (const EvalDomainError&) {
            return std::nullopt;
        }
        if (hi.hi() < lo.lo()) return std::nullopt;  // domain certainly empty
        QuantRange q;
        q.hull = Interval(lo.lo(), hi.hi());
        q.core_nonempty = lo.hi() <= hi.lo();
        if (q.core_nonempty) q.core = Interval(lo.hi(), hi.lo());
        return q;
    }

    // Blames the variables the quantifier bounds depend on: when hull and
    // core disagree, only narrowing those frees the certificate.
    void blame_bounds(const Formula* f, const Box& env, Blame& blame) {
        blame_wide(free_vars(f->lo), env, blame);
        blame_wide(free_vars(f->hi), env, blame);
    }

    // Maximal run of same-kind quantifiers, evaluated as one joint box so
    // the split order across the block adapts to where indecision lives
    // (same-kind quantifiers commute).
    Truth3 quantifier(const FormulaPtr& f, const Box& env, Blame& blame,
                      bool universal) {
        std::vector<const Formula*> chain;
        FormulaPtr body = f;
        while (body->kind == f->kind) {
            chain.push_back(body.get());
            body = body->body;
        }
        std::size_t n = chain.size();

        // initial ranges outer to inner; inner bounds see outer hulls
        Box benv = env;
        std::vector<Interval> pieces(n);
        std::vector<bool> fresh(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            auto q = range(chain[i], benv);
            if (!q) {
                for (std::size_t j = 0; j < i; ++j)
                    if (fresh[j]) wfloor_.erase(chain[j]->var);
                return universal ? Truth3::True_delta : Truth3::False_exact;
            }
            pieces[i] = q->hull;
            benv.set(chain[i]->var, q->hull);
            if (!wfloor_.count(chain[i]->var)) {
                fresh[i] = true;
                wfloor_[chain[i]->var] =
                    std::max(q->hull.width() * std::ldexp(1.0, -floor_), 1e-12);
            }
        }
        Truth3 r = explore_block(chain, body, env, pieces, universal, blame, -1);
        if (!universal && r == Truth3::True_delta && witness_) {
            for (std::size_t i = 0; i < n; ++i)
                if (!witness_->count(chain[i]->var))
                    (*witness_)[chain[i]->var] = pieces[i].mid();
        }
        for (std::size_t i = 0; i < n; ++i)
            if (fresh[i]) wfloor_.erase(chain[i]->var);
        return r;
    }

    Truth3 explore_block(const std::vector<const Formula*>& chain,
                         const FormulaPtr& matrix, const Box& env,
                         std::vector<Interval> pieces, bool universal,
                         Blame& blame, int shave_var) {
        std::size_t n = chain.size();
        blk_nodes++;
        Box env2 = env;
        for (std::size_t i = 0; i < n; ++i) env2.set(chain[i]->var, pieces[i]);

        // clip each piece to its range under the current box; a certainly
        // empty intersection means the region holds no domain points
        std::vector<QuantRange> qr(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto q = range(chain[i], env2);
            if (!q) return universal ? Truth3::True_delta : Truth3::False_exact;
            double lo = std::max(pieces[i].lo(), q->hull.lo());
            double hi = std::min(pieces[i].hi(), q->hull.hi());
            if (lo > hi) return universal ? Truth3::True_delta : Truth3::False_exact;
            pieces[i] = Interval(lo, hi);
            env2.set(chain[i]->var, pieces[i]);
            qr[i] = *q;
        }

        // contraction: shave outer slabs of each variable's piece on which
        // the matrix is already certainly on the discard side (False under an
        // existential block, True under a universal one).  Removed slabs
        // cannot hold a witness / counterexample and already carry the
        // coverage verdict, so both certificates survive; a single slab
        // evaluation here replaces an exponential bisection subtree.  Probes
        // must be cheap, so only blocks whose matrix is quantifier-free
        // shave: under a quantified matrix every probe would recurse into a
        // full sub-search.
        // a slab dropped with the other pieces at their current values stays
        // droppable for any sub-box; children of a split re-shave the split
        // variable and everything after it in the chain, whose earlier shaves
        // may have gone stale against the narrowed outer piece
        Truth3 drop = universal ? Truth3::True_delta : Truth3::False_exact;
        if (is_quantifier_free(matrix)) {
            for (std::size_t i = 0; i < n; ++i) {
                if (shave_var >= 0 && static_cast<int>(i) < shave_var) continue;
                for (int side = 0; side < 2; ++side) {
                    // drop the outer fraction of the piece while it stays on
                    // the discard side; on failure shrink the fraction, so a
                    // droppable outer sliver is still found when the full
                    // half straddles
                    double frac = 0.5;
                    int shrinks = 0, probes = 0;
                    while (shrinks < 6 && probes < 16) {
                        double w = pieces[i].width();
                        if (w <= wfloor_.at(chain[i]->var)) break;
                        double cut = frac * w;
                        Interval slab =
                            side == 0
                                ? Interval(pieces[i].lo(), pieces[i].lo() + cut)
                                : Interval(pieces[i].hi() - cut, pieces[i].hi());
                        env2.set(chain[i]->var, slab);
                        Blame tmp;
                        blk_probe++;
                        probes++;
                        if (eval(matrix, env2, tmp) == drop) {
                            pieces[i] = side == 0
                                            ? Interval(pieces[i].lo() + cut,
                                                       pieces[i].hi())
                                            : Interval(pieces[i].lo(),
                                                       pieces[i].hi() - cut);
                        } else {
                            frac *= 0.5;
                            shrinks++;
                        }
                    }
                    env2.set(chain[i]->var, pieces[i]);
                }
            }
        }

        Blame b;
        Truth3 r = eval(matrix, env2, b);

        if (dbg_left_ > 0) {
            --dbg_left_;
            std::cerr << "[blk]";
            for (std::size_t i = 0; i < n; ++i)
                std::cerr << " " << chain[i]->var << "=[" << pieces[i].lo() << ","
                          << pieces[i].hi() << "]";
            std::cerr << " -> " << truth3_name(r) << " useful{";
            for (auto& v : b.useful) std::cerr << v << " ";
            std::cerr << "} weak{";
            for (auto& v : b.weak) std::cerr << v << " ";
            std::cerr << "}";
            if (env.has("dl"))
                std::cerr << " dl=[" << env.at("dl").lo() << "," << env.at("dl").hi() << "]";
            if (env.has("eps"))
                std::cerr << " eps=[" << env.at("eps").lo() << "," << env.at("eps").hi() << "]";
            std::cerr << "\n";
        }

        bool in_core = true;
        for (std::size_t i = 0; i < n; ++i)
            in_core = in_core && qr[i].core_nonempty &&
                      qr[i].core.intersects(pieces[i]);
        if (universal) {
            if (r == Truth3::True_delta) { blk_true++; return Truth3::True_delta; }
            if (r == Truth3::False_exact && in_core) { blk_false++; return Truth3::False_exact; }
        } else {
            if (r == Truth3::False_exact) {
                blk_false++;
                if (cfg_.trace && blk_false % 50000 == 0) {
                    std::cerr << "[leaf F]";
                    for (std::size_t i = 0; i < n; ++i)
                        std::cerr << " " << chain[i]->var << "=[" << pieces[i].lo()
                                  << "," << pieces[i].hi() << "]";
                    if (env.has("dl"))
                        std::cerr << " dl=[" << env.at("dl").lo() << ","
                                  << env.at("dl").hi() << "]";
                    if (env.has("eps"))
                        std::cerr << " eps=[" << env.at("eps").lo() << ","
                                  << env.at("eps").hi() << "]";
                    std::cerr << "\n";
                }
                return Truth3::False_exact;
            }
            if (r == Truth3::True_delta && in_core) {
                if (witness_)
                    for (std::size_t i = 0; i < n; ++i) {
                        Interval w = pieces[i].intersect(qr[i].core);
                        (*witness_)[chain[i]->var] = w.mid();
                    }
                return Truth3::True_delta;
            }
        }
        if (r != Truth3::Unknown) {
            // definite answer that only covers points outside the core: no
            // subdivision of this block changes it, only tighter bounds do
            for (std::size_t i = 0; i < n; ++i) blame_bounds(chain[i], env, blame);
            return Truth3::Unknown;
        }

        // split preference: a chain variable whose refinement decides some
        // atom outright (widest piece relative to its floor first), then any
        // blamed chain variable; defer to the enclosing blocks only when
        // nothing local is splittable
        auto pick = [&](const std::set<std::string>& set) {
            int sel = -1;
            double best_ratio = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!set.count(chain[i]->var)) continue;
                double ratio = pieces[i].width() / wfloor_.at(chain[i]->var);
                if (ratio > best_ratio) {
                    best_ratio = ratio;
                    sel = static_cast<int>(i);
                }
            }
            return sel;
        };
        int best = pick(b.useful);
        if (best < 0) best = pick(b.weak);
        if (best < 0) {
            bool outer = false;
            auto scan = [&](const std::set<std::string>& set) {
                for (const auto& v : set) {
                    bool own = false;
                    for (std::size_t i = 0; i < n; ++i)
                        if (chain[i]->var == v) { own = true; break; }
                    if (!own && splittable(v, env2)) outer = true;
                }
            };
            scan(b.useful);
            scan(b.weak);
            (outer ? blk_defer : blk_floor)++;
            for (std::size_t i = 0; i < n; ++i) b.erase(chain[i]->var);
            blame.merge(b);
            for (std::size_t i = 0; i < n; ++i)
                blame_bounds(chain[i], env, blame);
            return Truth3::Unknown;
        }

        splits.fetch_add(1);
        if (cfg_.trace) var_splits[chain[best]->var]++;
        auto [left, right] = pieces[best].bisect();
        Truth3 kill = universal ? Truth3::False_exact : Truth3::True_delta;
        std::vector<Interval> sub = pieces;
        sub[best] = left;
        Truth3 a = explore_block(chain, matrix, env, sub, universal, blame, best);
        if (a == kill) return kill;
        if (a == Truth3::Unknown) return Truth3::Unknown;
        sub[best] = right;
        Truth3 c = explore_block(chain, matrix, env, sub, universal, blame, best);
        if (c == kill) return kill;
        if (c == Truth3::Unknown) return Truth3::Unknown;
        return universal ? Truth3::True_delta : Truth3::False_exact;
    }

    SolverConfig cfg_;
    EvalContext ctx_;
    int floor_ = 0;
    std::map<std::string, double> wfloor_;  // per-variable width floors
    std::map<const Formula*, std::set<std::string>> avars_;
    std::map<std::string, long long> var_splits;
    long long blk_nodes = 0, blk_probe = 0, blk_true = 0, blk_false = 0,
              blk_defer = 0, blk_floor = 0, blk_vac = 0;
    std::map<std::string, double>* witness_ = nullptr;
    long long dbg_left_ = 0;
};

struct RoundOutcome {
    Truth3 truth;
    std::map<std::string, double> witness;
};

// One deepening round.  Under deterministic mode the root quantifier is split
// into a fixed number of pieces, every piece is fully evaluated, and the
// results are combined in canonical order, so the verdict and statistics do
// not depend on the worker count.
RoundOutcome run_round(const FormulaPtr& f, const SolverConfig& cfg,
                       const SystemRegistry* systems, int floor,
                       SolverStats& stats, FlowCache& cache) {
    bool quantified_root =
        f->kind == Formula::Kind::Forall || f->kind == Formula::Kind::Exists;
    if (!cfg.deterministic || !quantified_root || cfg.top_pieces <= 1) {
        Search s(cfg, systems, &cache);
        RoundOutcome out;
        out.truth = s.run(f, Box{}, floor, &out.witness);
        stats.nodes += s.nodes;
        stats.atom_evals += s.atom_evals;
        stats.splits += s.splits;
        stats.flow_evals += s.flow_evals;
        return out;
    }

    bool universal = f->kind == Formula::Kind::Forall;
    int k = cfg.top_pieces;
    std::vector<FormulaPtr> pieces;
    {
        // split the root variable's bound; requires ground bounds, which is
        // always the case for the outermost quantifier of a sentence
        Interval lo = eval_term(f->lo, Box{});
        Interval hi = eval_term(f->hi, Box{});
        double a = lo.lo(), b = hi.hi();
        for (int i = 0; i < k; ++i) {
            double pl = a + (b - a) * i / k;
            double ph = (i + 1 == k) ? b : a + (b - a) * (i + 1) / k;
            auto mk = universal ? f_forall : f_exists;
            // clamp the piece to the original bound terms so core/hull
            // certificates stay anchored to the real domain
            TermPtr plo = t_apply(Fn::Max, {f->lo, t_const_d(pl)});
            TermPtr phi = t_apply(Fn::Min, {f->hi, t_const_d(ph)});
            pieces.push_back(mk(f->var, plo, phi, f->body));
        }
    }

    int workers = std::max(1, cfg.workers);
    std::vector<RoundOutcome> results(k);
    std::vector<SolverStats> piece_stats(k);
    std::vector<char> done(k, 0);
    std::atomic<int> next{0};
    std::atomic<int> needed{k};  // canonical scan may finish early
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= k || i >= needed.load()) return;
            Search s(cfg, systems, &cache);
            results[i].truth = s.run(pieces[i], Box{}, floor, &results[i].witness);
            piece_stats[i].nodes = s.nodes;
            piece_stats[i].atom_evals = s.atom_evals;
            piece_stats[i].splits = s.splits;
            piece_stats[i].flow_evals = s.flow_evals;
            done[i] = 1;
        }
    };

    // Evaluate pieces in canonical order and stop at the first certificate.
    // Results and statistics cover exactly the pieces 0..j scanned, so the
    // verdict and the report do not depend on the worker count; extra workers
    // only evaluate later pieces speculatively, and that work is discarded.
    std::vector<std::future<void>> pool;
    for (int w = 1; w < workers; ++w)
        pool.push_back(std::async(std::launch::async, worker));

    Truth3 cert = universal ? Truth3::False_exact : Truth3::True_delta;
    RoundOutcome out;
    out.truth = universal ? Truth3::True_delta : Truth3::False_exact;
    int scanned = 0;
    for (int i = 0; i < k; ++i) {
        while (!done[i]) {
            // help with the work instead of waiting
            int j = next.fetch_add(1);
            if (j < k && j < needed.load()) {
                Search s(cfg, systems, &cache);
                results[j].truth = s.run(pieces[j], Box{}, floor, &results[j].witness);
                piece_stats[j].nodes = s.nodes;
                piece_stats[j].atom_evals = s.atom_evals;
                piece_stats[j].splits = s.splits;
                piece_stats[j].flow_evals = s.flow_evals;
                done[j] = 1;
            } else {
                std::this_thread::yield();
            }
        }
        scanned = i + 1;
        if (results[i].truth == cert) {
            out.truth = cert;
            out.witness = results[i].witness;
            needed.store(i + 1);
            break;
        }
        if (results[i].truth == Truth3::Unknown) out.truth = Truth3::Unknown;
    }
    for (auto& fut : pool) fut.get();
    for (int i = 0; i < scanned; ++i) {
        stats.nodes += piece_stats[i].nodes;
        stats.atom_evals += piece_stats[i].atom_evals;
        stats.splits += piece_stats[i].splits;
        stats.flow_evals += piece_stats[i].flow_evals;
    }
    return out;
}


}  // namespace

SolverVerdict decide(const FormulaPtr& phi, const SolverConfig& cfg,
                     const SystemRegistry* systems) {
    if (!phi) throw std::invalid_argument("null formula");
    if (!free_vars(phi).empty())
        throw std::invalid_argument("decide() needs a sentence (no free variables)");
    if (cfg.delta <= 0.0 && !is_quantifier_free(phi))
        throw std::invalid_argument("delta must be positive");

    SolverVerdict v;
    FlowCache cache;  // shared across rounds and pieces; stores pure values
    for (int floor = cfg.start_floor;; floor += cfg.floor_step) {
        floor = std::min(floor, cfg.max_floor);
        v.stats.rounds += 1;
        v.stats.deepest_floor = floor;
        RoundOutcome out = run_round(phi, cfg, systems, floor, v.stats, cache);
        if (cfg.trace)
            std::cerr << "[trace] round " << v.stats.rounds << " depth floor "
                      << floor << " -> " << truth3_name(out.truth) << " nodes "
                      << v.stats.nodes << " atoms " << v.stats.atom_evals
                      << " flows " << v.stats.flow_evals << "\n";
        if (out.truth == Truth3::True_delta) {
            v.result = DecideResult::DeltaTrue;
            v.witness = std::move(out.witness);
            return v;
        }
        if (out.truth == Truth3::False_exact) {
            v.result = DecideResult::ExactFalse;
            return v;
        }
        if (floor >= cfg.max_floor)
            throw std::runtime_error(
                "undecided at maximum resolution; lower delta or raise limits");
    }
}

Truth3 decide_on_box(const FormulaPtr& phi, const Box& env, double delta,
                     const SystemRegistry* systems, double flow_tol) {
    SolverConfig cfg;
    cfg.delta = delta;
    cfg.flow_tol = flow_tol;
    FlowCache cache;
    Search s(cfg, systems, &cache);
    return s.run(phi, env, 0, nullptr);
}

std::string truth3_name(Truth3 t) {
    switch (t) {
        case Truth3::True_delta: return "delta-true";
        case Truth3::False_exact: return "false";
        case Truth3::Unknown: return "unknown";
    }
    return "?";
}

std::string result_name(DecideResult r) {
    return r == DecideResult::DeltaTrue ? "delta-true" : "false";
}

}  // namespace dstab
