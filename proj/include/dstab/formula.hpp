#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dstab/term.hpp"

namespace dstab {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class Rel { Gt, Geq };  // atom: term > 0 / term >= 0

// Negation-free normal form.  Quantifiers are bounded and primitive:
// negation dualizes them directly instead of expanding the bound.
struct Formula {
    enum class Kind { Atom, And, Or, Exists, Forall };

    Kind kind;
    TermPtr atom;                       // Atom
    Rel rel = Rel::Geq;                 // Atom
    std::vector<FormulaPtr> children;   // And / Or
    std::string var;                    // quantifiers
    TermPtr lo, hi;                     // quantifier bounds (terms)
    FormulaPtr body;                    // quantifier body
};

FormulaPtr f_atom(TermPtr t, Rel rel);
FormulaPtr f_and(std::vector<FormulaPtr> children);   // flattens nested And
FormulaPtr f_or(std::vector<FormulaPtr> children);    // flattens nested Or
FormulaPtr f_exists(const std::string& var, TermPtr lo, TermPtr hi, FormulaPtr body);
FormulaPtr f_forall(const std::string& var, TermPtr lo, TermPtr hi, FormulaPtr body);
// a = b stored as (a-b >= 0) /\ (b-a >= 0)
FormulaPtr f_eq(TermPtr a, TermPtr b);
// a -> b stored as negate(a) \/ b
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);

// Dual transform: t>0 -> -t>=0, t>=0 -> -t>0, And<->Or, Exists<->Forall
// with identical bounds.
FormulaPtr negate(const FormulaPtr& f);

// delta-weakening: every atom t>0 becomes t+delta>0, t>=0 becomes
// t+delta>=0.  Quantifier structure untouched.  delta = 0 returns the
// formula itself.  Negative delta is rejected.
FormulaPtr delta_weaken(const FormulaPtr& f, const Rational& delta);

// Equivalent prenex form, minimizing quantifier-block alternations when
// merging sibling prefixes.  Bound variables are renamed on collision.
FormulaPtr prenex(const FormulaPtr& f);

struct ComplexityReport {
    bool sigma = true;                 // Sigma_n vs Pi_n; meaningless at n=0
    int n = 0;                         // number of quantifier blocks
    std::vector<int> block_sizes;      // per-block quantifier counts
    std::string oracle_note;           // symbolic tag for the term class C

    std::string str() const;           // "Sigma2", "Pi3", "Sigma0"
};

// Alternation class of the prenexed sentence.
ComplexityReport classify(const FormulaPtr& sentence);

// Substitution of free variables by terms (bound variables shadow; callers
// must avoid capture by using fresh names).
FormulaPtr substitute(const FormulaPtr& f,
                      const std::map<std::string, TermPtr>& sub);

bool equal(const FormulaPtr& a, const FormulaPtr& b);
std::set<std::string> free_vars(const FormulaPtr& f);
bool is_quantifier_free(const FormulaPtr& f);

// Canonical rendering in the DSL grammar (re-parsable).
std::string to_string(const FormulaPtr& f);

}  // namespace dstab
