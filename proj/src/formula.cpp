#include "dstab/formula.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dstab {

FormulaPtr f_atom(TermPtr t, Rel rel) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Atom;
    f->atom = std::move(t);
    f->rel = rel;
    return f;
}

namespace {

FormulaPtr f_nary(Formula::Kind kind, std::vector<FormulaPtr> children) {
    std::vector<FormulaPtr> flat;
    for (auto& c : children) {
        if (c->kind == kind) {
            flat.insert(flat.end(), c->children.begin(), c->children.end());
        } else {
            flat.push_back(std::move(c));
        }
    }
    if (flat.size() == 1) return flat[0];
    if (flat.empty()) throw std::invalid_argument("empty connective");
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->children = std::move(flat);
    return f;
}

FormulaPtr f_quant(Formula::Kind kind, const std::string& var, TermPtr lo,
                   TermPtr hi, FormulaPtr body) {
    auto lv = free_vars(lo), hv = free_vars(hi);
    if (lv.count(var) || hv.count(var))
        throw std::invalid_argument("quantifier bound mentions bound variable " + var);
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->var = var;
    f->lo = std::move(lo);
    f->hi = std::move(hi);
    f->body = std::move(body);
    return f;
}

}  // namespace

FormulaPtr f_and(std::vector<FormulaPtr> children) {
    return f_nary(Formula::Kind::And, std::move(children));
}

FormulaPtr f_or(std::vector<FormulaPtr> children) {
    return f_nary(Formula::Kind::Or, std::move(children));
}

FormulaPtr f_exists(const std::string& var, TermPtr lo, TermPtr hi, FormulaPtr body) {
    return f_quant(Formula::Kind::Exists, var, std::move(lo), std::move(hi),
                   std::move(body));
}

FormulaPtr f_forall(const std::string& var, TermPtr lo, TermPtr hi, FormulaPtr body) {
    return f_quant(Formula::Kind::Forall, var, std::move(lo), std::move(hi),
                   std::move(body));
}

FormulaPtr f_eq(TermPtr a, TermPtr b) {
    return f_and({f_atom(t_sub(a, b), Rel::Geq), f_atom(t_sub(b, a), Rel::Geq)});
}

FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
    return f_or({negate(a), std::move(b)});
}

FormulaPtr negate(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            return f_atom(t_neg(f->atom),
                          f->rel == Rel::Gt ? Rel::Geq : Rel::Gt);
        case Formula::Kind::And: {
            std::vector<FormulaPtr> cs;
            cs.reserve(f->children.size());
            for (const auto& c : f->children) cs.push_back(negate(c));
            return f_or(std::move(cs));
        }
        case Formula::Kind::Or: {
            std::vector<FormulaPtr> cs;
            cs.reserve(f->children.size());
            for (const auto& c : f->children) cs.push_back(negate(c));
            return f_and(std::move(cs));
        }
        case Formula::Kind::Exists:
            return f_forall(f->var, f->lo, f->hi, negate(f->body));
        case Formula::Kind::Forall:
            return f_exists(f->var, f->lo, f->hi, negate(f->body));
    }
    throw std::logic_error("unreachable");
}

FormulaPtr delta_weaken(const FormulaPtr& f, const Rational& delta) {
    if (delta.is_negative())
        throw std::invalid_argument("negative delta in delta_weaken");
    if (delta.is_zero()) return f;
    switch (f->kind) {
        case Formula::Kind::Atom:
            return f_atom(t_add(f->atom, t_const(delta)), f->rel);
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            std::vector<FormulaPtr> cs;
            cs.reserve(f->children.size());
            for (const auto& c : f->children) cs.push_back(delta_weaken(c, delta));
            return f_nary(f->kind, std::move(cs));
        }
        case Formula::Kind::Exists:
            return f_exists(f->var, f->lo, f->hi, delta_weaken(f->body, delta));
        case Formula::Kind::Forall:
            return f_forall(f->var, f->lo, f->hi, delta_weaken(f->body, delta));
    }
    throw std::logic_error("unreachable");
}

FormulaPtr substitute(const FormulaPtr& f,
                      const std::map<std::string, TermPtr>& sub) {
    if (sub.empty()) return f;
    switch (f->kind) {
        case Formula::Kind::Atom:
            return f_atom(substitute(f->atom, sub), f->rel);
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            std::vector<FormulaPtr> kids;
            for (const auto& c : f->children) kids.push_back(substitute(c, sub));
            return f->kind == Formula::Kind::And ? f_and(std::move(kids))
                                                 : f_or(std::move(kids));
        }
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            auto inner = sub;
            inner.erase(f->var);  // bound occurrences shadow
            auto body = substitute(f->body, inner);
            auto lo = substitute(f->lo, sub);
            auto hi = substitute(f->hi, sub);
            return f->kind == Formula::Kind::Exists
                       ? f_exists(f->var, lo, hi, body)
                       : f_forall(f->var, lo, hi, body);
        }
    }
    throw std::logic_error("unreachable formula kind");
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Formula::Kind::Atom:
            return a->rel == b->rel && equal(a->atom, b->atom);
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            if (a->children.size() != b->children.size()) return false;
            for (std::size_t i = 0; i < a->children.size(); ++i)
                if (!equal(a->children[i], b->children[i])) return false;
            return true;
        }
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            return a->var == b->var && equal(a->lo, b->lo) &&
                   equal(a->hi, b->hi) && equal(a->body, b->body);
    }
    return false;
}

namespace {

void collect_free(const FormulaPtr& f, std::set<std::string>& bound,
                  std::set<std::string>& out) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            for (const auto& v : free_vars(f->atom))
                if (!bound.count(v)) out.insert(v);
            return;
        }
        case Formula::Kind::And:
        case Formula::Kind::Or:
            for (const auto& c : f->children) collect_free(c, bound, out);
            return;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            for (const auto& v : free_vars(f->lo))
                if (!bound.count(v)) out.insert(v);
            for (const auto& v : free_vars(f->hi))
                if (!bound.count(v)) out.insert(v);
            bool added = bound.insert(f->var).second;
            collect_free(f->body, bound, out);
            if (added) bound.erase(f->var);
            return;
        }
    }
}

}  // namespace

std::set<std::string> free_vars(const FormulaPtr& f) {
    std::set<std::string> bound, out;
    collect_free(f, bound, out);
    return out;
}

bool is_quantifier_free(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Atom: return true;
        case Formula::Kind::And:
        case Formula::Kind::Or:
            for (const auto& c : f->children)
                if (!is_quantifier_free(c)) return false;
            return true;
        default: return false;
    }
}

// ---------------------------------------------------------------------------
// Prenexing.  Each subformula yields a quantifier prefix plus a
// quantifier-free matrix; sibling prefixes are interleaved (their relative
// orders preserved) so that the number of quantifier-block alternations in
// the merged prefix is minimal.  Interleaving is sound because bound
// variables are renamed apart first.
// ---------------------------------------------------------------------------

namespace {

struct QEntry {
    bool forall;
    std::string var;
    TermPtr lo, hi;
};

struct PrenexForm {
    std::vector<QEntry> prefix;
    FormulaPtr matrix;
};

FormulaPtr rename_formula(const FormulaPtr& f,
                          const std::map<std::string, TermPtr>& sub) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            return f_atom(substitute(f->atom, sub), f->rel);
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            std::vector<FormulaPtr> cs;
            for (const auto& c : f->children) cs.push_back(rename_formula(c, sub));
            return f_nary(f->kind, std::move(cs));
        }
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            auto inner = sub;
            inner.erase(f->var);
            return f_quant(f->kind, f->var, substitute(f->lo, sub),
                           substitute(f->hi, sub), rename_formula(f->body, inner));
        }
    }
    throw std::logic_error("unreachable");
}

std::string fresh_name(const std::string& base, std::set<std::string>& used) {
    if (!used.count(base)) {
        used.insert(base);
        return base;
    }
    for (int k = 1;; ++k) {
        std::string cand = base + "_" + std::to_string(k);
        if (!used.count(cand)) {
            used.insert(cand);
            return cand;
        }
    }
}

// Minimal-alternation interleaving of two prefixes (DP over positions and
// the polarity of the last emitted block).
std::vector<QEntry> merge_prefixes(const std::vector<QEntry>& a,
                                   const std::vector<QEntry>& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0) return b;
    if (m == 0) return a;
    constexpr int kInf = 1 << 20;
    // last: 0 = none, 1 = forall, 2 = exists
    std::vector<int> cost((n + 1) * (m + 1) * 3, -1);
    auto idx = [&](std::size_t i, std::size_t j, int last) {
        return (i * (m + 1) + j) * 3 + last;
    };
    auto block_cost = [](int last, bool forall) {
        int pol = forall ? 1 : 2;
        return last == pol ? 0 : 1;
    };
    // cost(i,j,last): min new blocks to emit a[i..] and b[j..]
    auto solve = [&](auto&& self, std::size_t i, std::size_t j, int last) -> int {
        int& c = cost[idx(i, j, last)];
        if (c >= 0) return c;
        if (i == n && j == m) return c = 0;
        int best = kInf;
        if (i < n) {
            int pol = a[i].forall ? 1 : 2;
            best = std::min(best, block_cost(last, a[i].forall) +
                                      self(self, i + 1, j, pol));
        }
        if (j < m) {
            int pol = b[j].forall ? 1 : 2;
            best = std::min(best, block_cost(last, b[j].forall) +
                                      self(self, i, j + 1, pol));
        }
        return c = best;
    };
    solve(solve, 0, 0, 0);
    // reconstruct; ties prefer taking from the first prefix
    std::vector<QEntry> out;
    std::size_t i = 0, j = 0;
    int last = 0;
    while (i < n || j < m) {
        int take_a = kInf, take_b = kInf;
        if (i < n)
            take_a = block_cost(last, a[i].forall) +
                     solve(solve, i + 1, j, a[i].forall ? 1 : 2);
        if (j < m)
            take_b = block_cost(last, b[j].forall) +
                     solve(solve, i, j + 1, b[j].forall ? 1 : 2);
        if (take_a <= take_b) {
            last = a[i].forall ? 1 : 2;
            out.push_back(a[i++]);
        } else {
            last = b[j].forall ? 1 : 2;
            out.push_back(b[j++]);
        }
    }
    return out;
}

PrenexForm prenex_rec(const FormulaPtr& f, std::set<std::string>& used) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            return {{}, f};
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            std::string name = fresh_name(f->var, used);
            FormulaPtr body = f->body;
            TermPtr lo = f->lo, hi = f->hi;
            if (name != f->var) {
                std::map<std::string, TermPtr> sub{{f->var, t_var(name)}};
                body = rename_formula(body, sub);
            }
            PrenexForm inner = prenex_rec(body, used);
            std::vector<QEntry> prefix;
            prefix.push_back({f->kind == Formula::Kind::Forall, name, lo, hi});
            prefix.insert(prefix.end(), inner.prefix.begin(), inner.prefix.end());
            return {std::move(prefix), inner.matrix};
        }
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            std::vector<QEntry> prefix;
            std::vector<FormulaPtr> matrices;
            for (const auto& c : f->children) {
                PrenexForm p = prenex_rec(c, used);
                prefix = merge_prefixes(prefix, p.prefix);
                matrices.push_back(p.matrix);
            }
            return {std::move(prefix), f_nary(f->kind, std::move(matrices))};
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

FormulaPtr prenex(const FormulaPtr& f) {
    std::set<std::string> used = free_vars(f);
    PrenexForm p = prenex_rec(f, used);
    FormulaPtr out = p.matrix;
    for (auto it = p.prefix.rbegin(); it != p.prefix.rend(); ++it) {
        out = it->forall ? f_forall(it->var, it->lo, it->hi, out)
                         : f_exists(it->var, it->lo, it->hi, out);
    }
    return out;
}

std::string ComplexityReport::str() const {
    return (sigma ? "Sigma" : "Pi") + std::to_string(n);
}

ComplexityReport classify(const FormulaPtr& sentence) {
    if (!free_vars(sentence).empty())
        throw std::invalid_argument("classify expects a sentence");
    FormulaPtr p = prenex(sentence);
    ComplexityReport rep;
    rep.oracle_note = "C";
    const Formula* cur = p.get();
    int last = 0;  // 0 none, 1 forall, 2 exists
    while (cur->kind == Formula::Kind::Exists ||
           cur->kind == Formula::Kind::Forall) {
        int pol = cur->kind == Formula::Kind::Forall ? 1 : 2;
        if (pol != last) {
            if (rep.n == 0) rep.sigma = (pol == 2);
            rep.n += 1;
            rep.block_sizes.push_back(0);
            last = pol;
        }
        rep.block_sizes.back() += 1;
        cur = cur->body.get();
    }
    return rep;
}

namespace {

void render_formula(const FormulaPtr& f, std::ostream& os) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            os << to_string(f->atom) << (f->rel == Rel::Gt ? " > 0" : " >= 0");
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            const char* op = f->kind == Formula::Kind::And ? " /\\ " : " \\/ ";
            os << "(";
            for (std::size_t i = 0; i < f->children.size(); ++i) {
                if (i) os << op;
                render_formula(f->children[i], os);
            }
            os << ")";
            return;
        }
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            os << (f->kind == Formula::Kind::Exists ? "exists " : "forall ")
               << f->var << " in [" << to_string(f->lo) << ", "
               << to_string(f->hi) << "]. ";
            render_formula(f->body, os);
            return;
    }
}

}  // namespace

std::string to_string(const FormulaPtr& f) {
    std::ostringstream os;
    render_formula(f, os);
    return os.str();
}

}  // namespace dstab
