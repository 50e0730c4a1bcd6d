#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dstab/rational.hpp"

namespace dstab {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Fixed function library.  Pow is integer power with the exponent stored on
// the node; Norm is the n-ary Euclidean norm.
enum class Fn {
    Add, Sub, Neg, Mul, Div, Pow, Abs, Min, Max, Exp, Sin, Cos, Sqrt, Norm
};

const char* fn_name(Fn f);
int fn_arity(Fn f);  // -1 for variadic (Norm)

// L_RF term: variable, exact rational constant, function application, or the
// value of an ODE solution component at a given time (the only place an ODE
// solution enters a formula).
struct Term {
    enum class Kind { Variable, Constant, Apply, Flow };

    Kind kind;
    std::string name;            // Variable name; Flow: registered system id
    Rational value;              // Constant
    bool dconst = false;         // Constant holds dvalue instead of value
    double dvalue = 0.0;         // exact binary constant (solver-made bounds)
    Fn fn = Fn::Add;
    int ipow = 0;                // Pow exponent
    std::vector<TermPtr> args;   // Apply arguments; Flow initial-state terms
    TermPtr time;                // Flow time term
    int component = 0;           // Flow state component index
};

TermPtr t_var(const std::string& name);
TermPtr t_const(const Rational& r);
TermPtr t_const(std::int64_t n);
TermPtr t_const_d(double d);  // exact binary constant
TermPtr t_apply(Fn f, std::vector<TermPtr> args);
TermPtr t_add(TermPtr a, TermPtr b);
TermPtr t_sub(TermPtr a, TermPtr b);
TermPtr t_neg(TermPtr a);
TermPtr t_mul(TermPtr a, TermPtr b);
TermPtr t_div(TermPtr a, TermPtr b);
TermPtr t_pow(TermPtr a, int n);
TermPtr t_norm(std::vector<TermPtr> args);
TermPtr t_flow(const std::string& system, std::vector<TermPtr> init,
               TermPtr time, int component);

void collect_free_vars(const TermPtr& t, std::set<std::string>& out);
std::set<std::string> free_vars(const TermPtr& t);

bool equal(const TermPtr& a, const TermPtr& b);

// Infix rendering in the DSL expression grammar.
std::string to_string(const TermPtr& t);

// Capture-free substitution of variables by terms.
TermPtr substitute(const TermPtr& t, const std::map<std::string, TermPtr>& sub);

// Symbolic partial derivative.  Throws std::domain_error for non-smooth
// library symbols (abs, min, max, norm) and for Flow nodes.
TermPtr diff(const TermPtr& t, const std::string& var);

// Light constant folding: folds Neg of constants and drops +0/*1 noise.
// Used so negate(negate(phi)) is structurally equal to phi.
TermPtr simplify_signs(const TermPtr& t);

}  // namespace dstab
