#include "dstab/term.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace dstab {

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Add: return "+";
        case Fn::Sub: return "-";
        case Fn::Neg: return "neg";
        case Fn::Mul: return "*";
        case Fn::Div: return "/";
        case Fn::Pow: return "^";
        case Fn::Abs: return "abs";
        case Fn::Min: return "min";
        case Fn::Max: return "max";
        case Fn::Exp: return "exp";
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Sqrt: return "sqrt";
        case Fn::Norm: return "norm";
    }
    return "?";
}

int fn_arity(Fn f) {
    switch (f) {
        case Fn::Add: case Fn::Sub: case Fn::Mul: case Fn::Div:
        case Fn::Min: case Fn::Max: return 2;
        case Fn::Neg: case Fn::Abs: case Fn::Exp: case Fn::Sin:
        case Fn::Cos: case Fn::Sqrt: case Fn::Pow: return 1;
        case Fn::Norm: return -1;
    }
    return 0;
}

TermPtr t_var(const std::string& name) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Variable;
    t->name = name;
    return t;
}

TermPtr t_const(const Rational& r) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Constant;
    t->value = r;
    return t;
}

TermPtr t_const(std::int64_t n) { return t_const(Rational(n)); }

TermPtr t_const_d(double d) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Constant;
    t->dconst = true;
    t->dvalue = d;
    return t;
}

TermPtr t_apply(Fn f, std::vector<TermPtr> args) {
    int ar = fn_arity(f);
    if (ar >= 0 && static_cast<int>(args.size()) != ar)
        throw std::invalid_argument(std::string("arity mismatch for ") + fn_name(f));
    if (f == Fn::Norm && args.empty())
        throw std::invalid_argument("norm needs at least one argument");
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Apply;
    t->fn = f;
    t->args = std::move(args);
    return t;
}

TermPtr t_add(TermPtr a, TermPtr b) { return t_apply(Fn::Add, {std::move(a), std::move(b)}); }
TermPtr t_sub(TermPtr a, TermPtr b) { return t_apply(Fn::Sub, {std::move(a), std::move(b)}); }
TermPtr t_mul(TermPtr a, TermPtr b) { return t_apply(Fn::Mul, {std::move(a), std::move(b)}); }
TermPtr t_div(TermPtr a, TermPtr b) { return t_apply(Fn::Div, {std::move(a), std::move(b)}); }

TermPtr t_neg(TermPtr a) {
    // normalize Neg(Neg(x)) -> x and Neg(c) -> -c so negation is an involution
    if (a->kind == Term::Kind::Apply && a->fn == Fn::Neg) return a->args[0];
    if (a->kind == Term::Kind::Constant)
        return a->dconst ? t_const_d(-a->dvalue) : t_const(-a->value);
    return t_apply(Fn::Neg, {std::move(a)});
}

TermPtr t_pow(TermPtr a, int n) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Apply;
    t->fn = Fn::Pow;
    t->ipow = n;
    t->args = {std::move(a)};
    return t;
}

TermPtr t_norm(std::vector<TermPtr> args) { return t_apply(Fn::Norm, std::move(args)); }

TermPtr t_flow(const std::string& system, std::vector<TermPtr> init,
               TermPtr time, int component) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Flow;
    t->name = system;
    t->args = std::move(init);
    t->time = std::move(time);
    t->component = component;
    return t;
}

void collect_free_vars(const TermPtr& t, std::set<std::string>& out) {
    switch (t->kind) {
        case Term::Kind::Variable: out.insert(t->name); break;
        case Term::Kind::Constant: break;
        case Term::Kind::Apply:
            for (const auto& a : t->args) collect_free_vars(a, out);
            break;
        case Term::Kind::Flow:
            for (const auto& a : t->args) collect_free_vars(a, out);
            collect_free_vars(t->time, out);
            break;
    }
}

std::set<std::string> free_vars(const TermPtr& t) {
    std::set<std::string> out;
    collect_free_vars(t, out);
    return out;
}

bool equal(const TermPtr& a, const TermPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Term::Kind::Variable: return a->name == b->name;
        case Term::Kind::Constant:
            if (a->dconst != b->dconst) return false;
            return a->dconst ? a->dvalue == b->dvalue : a->value == b->value;
        case Term::Kind::Apply: {
            if (a->fn != b->fn || a->ipow != b->ipow) return false;
            if (a->args.size() != b->args.size()) return false;
            for (std::size_t i = 0; i < a->args.size(); ++i)
                if (!equal(a->args[i], b->args[i])) return false;
            return true;
        }
        case Term::Kind::Flow: {
            if (a->name != b->name || a->component != b->component) return false;
            if (a->args.size() != b->args.size()) return false;
            for (std::size_t i = 0; i < a->args.size(); ++i)
                if (!equal(a->args[i], b->args[i])) return false;
            return equal(a->time, b->time);
        }
    }
    return false;
}

namespace {

int precedence(const Term& t) {
    if (t.kind != Term::Kind::Apply) return 100;
    switch (t.fn) {
        case Fn::Add: case Fn::Sub: return 1;
        case Fn::Mul: case Fn::Div: return 2;
        case Fn::Neg: return 3;
        case Fn::Pow: return 4;
        default: return 100;
    }
}

void render(const TermPtr& t, std::ostream& os, int parent_prec) {
    int prec = precedence(*t);
    bool paren = prec < parent_prec;
    switch (t->kind) {
        case Term::Kind::Variable: os << t->name; return;
        case Term::Kind::Constant: {
            std::string text;
            if (t->dconst) {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", t->dvalue);
                text = buf;
            } else {
                text = t->value.str();
            }
            bool neg = t->dconst ? t->dvalue < 0 : t->value.is_negative();
            if (neg && parent_prec > 1) {
                os << "(" << text << ")";
            } else {
                os << text;
            }
            return;
        }
        case Term::Kind::Apply:
            switch (t->fn) {
                case Fn::Add: case Fn::Sub: case Fn::Mul: case Fn::Div: {
                    if (paren) os << "(";
                    render(t->args[0], os, prec);
                    os << " " << fn_name(t->fn) << " ";
                    render(t->args[1], os, prec + 1);
                    if (paren) os << ")";
                    return;
                }
                case Fn::Neg:
                    if (paren) os << "(";
                    os << "-";
                    render(t->args[0], os, prec + 1);
                    if (paren) os << ")";
                    return;
                case Fn::Pow:
                    if (paren) os << "(";
                    render(t->args[0], os, prec + 1);
                    os << "^" << t->ipow;
                    if (paren) os << ")";
                    return;
                default: {
                    os << fn_name(t->fn) << "(";
                    for (std::size_t i = 0; i < t->args.size(); ++i) {
                        if (i) os << ", ";
                        render(t->args[i], os, 0);
                    }
                    os << ")";
                    return;
                }
            }
        case Term::Kind::Flow: {
            os << "flow[" << t->name << "." << t->component << "](";
            for (std::size_t i = 0; i < t->args.size(); ++i) {
                if (i) os << ", ";
                render(t->args[i], os, 0);
            }
            os << "; ";
            render(t->time, os, 0);
            os << ")";
            return;
        }
    }
}

}  // namespace

std::string to_string(const TermPtr& t) {
    std::ostringstream os;
    render(t, os, 0);
    return os.str();
}

TermPtr substitute(const TermPtr& t, const std::map<std::string, TermPtr>& sub) {
    switch (t->kind) {
        case Term::Kind::Variable: {
            auto it = sub.find(t->name);
            return it == sub.end() ? t : it->second;
        }
        case Term::Kind::Constant: return t;
        case Term::Kind::Apply: {
            std::vector<TermPtr> args;
            args.reserve(t->args.size());
            for (const auto& a : t->args) args.push_back(substitute(a, sub));
            if (t->fn == Fn::Pow) return t_pow(args[0], t->ipow);
            return t_apply(t->fn, std::move(args));
        }
        case Term::Kind::Flow: {
            std::vector<TermPtr> init;
            init.reserve(t->args.size());
            for (const auto& a : t->args) init.push_back(substitute(a, sub));
            return t_flow(t->name, std::move(init), substitute(t->time, sub),
                          t->component);
        }
    }
    return t;
}

TermPtr diff(const TermPtr& t, const std::string& var) {
    switch (t->kind) {
        case Term::Kind::Variable:
            return t_const(t->name == var ? 1 : 0);
        case Term::Kind::Constant:
            return t_const(0);
        case Term::Kind::Flow:
            throw std::domain_error("cannot differentiate a flow value symbolically");
        case Term::Kind::Apply: break;
    }
    const auto& a = t->args;
    switch (t->fn) {
        case Fn::Add: return t_add(diff(a[0], var), diff(a[1], var));
        case Fn::Sub: return t_sub(diff(a[0], var), diff(a[1], var));
        case Fn::Neg: return t_neg(diff(a[0], var));
        case Fn::Mul:
            return t_add(t_mul(diff(a[0], var), a[1]), t_mul(a[0], diff(a[1], var)));
        case Fn::Div:
            return t_div(t_sub(t_mul(diff(a[0], var), a[1]),
                               t_mul(a[0], diff(a[1], var))),
                         t_pow(a[1], 2));
        case Fn::Pow:
            if (t->ipow == 0) return t_const(0);
            return t_mul(t_mul(t_const(t->ipow), t_pow(a[0], t->ipow - 1)),
                         diff(a[0], var));
        case Fn::Exp: return t_mul(t, diff(a[0], var));
        case Fn::Sin: return t_mul(t_apply(Fn::Cos, {a[0]}), diff(a[0], var));
        case Fn::Cos: return t_neg(t_mul(t_apply(Fn::Sin, {a[0]}), diff(a[0], var)));
        case Fn::Sqrt:
            return t_div(diff(a[0], var), t_mul(t_const(2), t));
        case Fn::Abs: case Fn::Min: case Fn::Max: case Fn::Norm:
            throw std::domain_error(std::string("cannot differentiate ") + fn_name(t->fn));
    }
    throw std::domain_error("unreachable diff case");
}

TermPtr simplify_signs(const TermPtr& t) {
    if (t->kind != Term::Kind::Apply) return t;
    std::vector<TermPtr> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) args.push_back(simplify_signs(a));
    if (t->fn == Fn::Neg) return t_neg(args[0]);
    if (t->fn == Fn::Pow) return t_pow(args[0], t->ipow);
    return t_apply(t->fn, std::move(args));
}

}  // namespace dstab
