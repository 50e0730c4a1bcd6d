#include "dstab/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace dstab {

namespace {

enum class Tok {
    Ident, Number, LBrace, RBrace, LBracket, RBracket, LParen, RParen,
    Comma, Semi, Dot, Arrow, Assign, Plus, Minus, Star, Slash, Caret,
    Gt, Geq, Lt, Leq, Eq, AndOp, OrOp, Implies, End
};

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(&src) { next(); }

    const Token& peek() const { return cur_; }
    Token take() {
        Token t = cur_;
        next();
        return t;
    }

private:
    void next() {
        while (pos_ < src_->size()) {
            char c = (*src_)[pos_];
            if (c == '#') {
                while (pos_ < src_->size() && (*src_)[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++line_, col_ = 1, ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++col_, ++pos_;
            } else {
                break;
            }
        }
        cur_ = {Tok::End, "", line_, col_};
        if (pos_ >= src_->size()) return;
        int line = line_, col = col_;
        auto emit = [&](Tok k, std::size_t n) {
            cur_ = {k, src_->substr(pos_, n), line, col};
            pos_ += n;
            col_ += static_cast<int>(n);
        };
        char c = (*src_)[pos_];
        auto two = [&](char a, char b) {
            return c == a && pos_ + 1 < src_->size() && (*src_)[pos_ + 1] == b;
        };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t n = 0;
            while (pos_ + n < src_->size() &&
                   (std::isalnum(static_cast<unsigned char>((*src_)[pos_ + n])) ||
                    (*src_)[pos_ + n] == '_'))
                ++n;
            while (pos_ + n < src_->size() && (*src_)[pos_ + n] == '\'') ++n;
            emit(Tok::Ident, n);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t n = 0;
            while (pos_ + n < src_->size() &&
                   std::isdigit(static_cast<unsigned char>((*src_)[pos_ + n])))
                ++n;
            if (pos_ + n + 1 < src_->size() && (*src_)[pos_ + n] == '.' &&
                std::isdigit(static_cast<unsigned char>((*src_)[pos_ + n + 1]))) {
                ++n;
                while (pos_ + n < src_->size() &&
                       std::isdigit(static_cast<unsigned char>((*src_)[pos_ + n])))
                    ++n;
            }
            emit(Tok::Number, n);
            return;
        }
        if (two('-', '>')) return emit(Tok::Arrow, 2);
        if (two(':', '=')) return emit(Tok::Assign, 2);
        if (two('>', '=')) return emit(Tok::Geq, 2);
        if (two('<', '=')) return emit(Tok::Leq, 2);
        if (two('/', '\\')) return emit(Tok::AndOp, 2);
        if (two('\\', '/')) return emit(Tok::OrOp, 2);
        switch (c) {
            case '{': return emit(Tok::LBrace, 1);
            case '}': return emit(Tok::RBrace, 1);
            case '[': return emit(Tok::LBracket, 1);
            case ']': return emit(Tok::RBracket, 1);
            case '(': return emit(Tok::LParen, 1);
            case ')': return emit(Tok::RParen, 1);
            case ',': return emit(Tok::Comma, 1);
            case ';': return emit(Tok::Semi, 1);
            case '.': return emit(Tok::Dot, 1);
            case '+': return emit(Tok::Plus, 1);
            case '-': return emit(Tok::Minus, 1);
            case '*': return emit(Tok::Star, 1);
            case '/': return emit(Tok::Slash, 1);
            case '^': return emit(Tok::Caret, 1);
            case '>': return emit(Tok::Gt, 1);
            case '<': return emit(Tok::Lt, 1);
            case '=': return emit(Tok::Eq, 1);
            default: break;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }

    const std::string* src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token cur_{};
};

const std::map<std::string, Fn> kFunctions = {
    {"abs", Fn::Abs}, {"min", Fn::Min},   {"max", Fn::Max},
    {"exp", Fn::Exp}, {"sin", Fn::Sin},   {"cos", Fn::Cos},
    {"sqrt", Fn::Sqrt}, {"norm", Fn::Norm},
};

class Parser {
public:
    explicit Parser(const std::string& src) : lx_(src) {}

    Token expect(Tok k, const std::string& what) {
        if (lx_.peek().kind != k)
            throw ParseError("expected " + what + ", found '" + lx_.peek().text + "'",
                             lx_.peek().line, lx_.peek().col);
        return lx_.take();
    }

    bool accept(Tok k) {
        if (lx_.peek().kind != k) return false;
        lx_.take();
        return true;
    }

    bool at_keyword(const std::string& kw) const {
        return lx_.peek().kind == Tok::Ident && lx_.peek().text == kw;
    }

    std::string expect_keyword() { return expect(Tok::Ident, "identifier").text; }

    void expect_end() {
        if (lx_.peek().kind != Tok::End)
            throw ParseError("trailing input '" + lx_.peek().text + "'",
                             lx_.peek().line, lx_.peek().col);
    }

    // ---- terms -------------------------------------------------------

    TermPtr term() { return add(); }

    TermPtr add() {
        TermPtr t = mul();
        for (;;) {
            if (accept(Tok::Plus)) t = t_add(t, mul());
            else if (accept(Tok::Minus)) t = t_sub(t, mul());
            else return t;
        }
    }

    TermPtr mul() {
        TermPtr t = unary();
        for (;;) {
            if (accept(Tok::Star)) t = t_mul(t, unary());
            else if (accept(Tok::Slash)) t = t_div(t, unary());
            else return t;
        }
    }

    TermPtr unary() {
        if (accept(Tok::Minus)) return t_neg(unary());
        return power();
    }

    TermPtr power() {
        TermPtr t = primary();
        if (accept(Tok::Caret)) {
            Token n = expect(Tok::Number, "integer exponent");
            Rational r = Rational::parse(n.text);
            if (!r.is_integer() || r.num() < 1)
                throw ParseError("exponent must be a positive integer", n.line, n.col);
            t = t_pow(t, static_cast<int>(r.num()));
        }
        return t;
    }

    TermPtr primary() {
        const Token& p = lx_.peek();
        if (p.kind == Tok::Number) return t_const(Rational::parse(lx_.take().text));
        if (p.kind == Tok::LParen) {
            lx_.take();
            TermPtr t = term();
            expect(Tok::RParen, "')'");
            return t;
        }
        if (p.kind == Tok::Ident) {
            Token id = lx_.take();
            auto fn = kFunctions.find(id.text);
            if (fn != kFunctions.end()) {
                expect(Tok::LParen, "'(' after function name");
                std::vector<TermPtr> args{term()};
                while (accept(Tok::Comma)) args.push_back(term());
                expect(Tok::RParen, "')'");
                try {
                    return t_apply(fn->second, std::move(args));
                } catch (const std::invalid_argument& e) {
                    throw ParseError(e.what(), id.line, id.col);
                }
            }
            if (lx_.peek().kind == Tok::LParen)
                throw ParseError("unknown function '" + id.text + "'", id.line,
                                 id.col);
            return t_var(id.text);
        }
        throw ParseError("expected a term, found '" + p.text + "'", p.line, p.col);
    }

    // ---- formulas ----------------------------------------------------

    FormulaPtr formula() { return implies(); }

    FormulaPtr implies() {
        FormulaPtr a = disj();
        if (accept(Tok::Arrow)) return f_implies(a, implies());
        return a;
    }

    FormulaPtr disj() {
        FormulaPtr a = conj();
        while (accept(Tok::OrOp)) a = f_or({a, conj()});
        return a;
    }

    FormulaPtr conj() {
        FormulaPtr a = unit();
        while (accept(Tok::AndOp)) a = f_and({a, unit()});
        return a;
    }

    FormulaPtr unit() {
        if (at_keyword("not")) {
            lx_.take();
            return negate(unit());
        }
        if (at_keyword("forall") || at_keyword("exists")) {
            bool uni = lx_.take().text == "forall";
            std::string var = expect(Tok::Ident, "quantified variable").text;
            if (!at_keyword("in"))
                throw ParseError("expected 'in' after quantified variable",
                                 lx_.peek().line, lx_.peek().col);
            lx_.take();
            expect(Tok::LBracket, "'['");
            TermPtr lo = term();
            expect(Tok::Comma, "','");
            TermPtr hi = term();
            expect(Tok::RBracket, "']'");
            expect(Tok::Dot, "'.' before quantifier body");
            FormulaPtr body = formula();
            try {
                return uni ? f_forall(var, lo, hi, body)
                           : f_exists(var, lo, hi, body);
            } catch (const std::invalid_argument& e) {
                throw ParseError(e.what(), lx_.peek().line, lx_.peek().col);
            }
        }
        if (lx_.peek().kind == Tok::LParen) {
            // '(' may open a parenthesized formula or a parenthesized term;
            // decide by what follows the closing parenthesis
            Lexer save = lx_;
            lx_.take();
            try {
                FormulaPtr f = formula();
                expect(Tok::RParen, "')'");
                switch (lx_.peek().kind) {
                    case Tok::Gt: case Tok::Geq: case Tok::Lt:
                    case Tok::Leq: case Tok::Eq:
                    case Tok::Plus: case Tok::Minus: case Tok::Star:
                    case Tok::Slash: case Tok::Caret:
                        break;  // it was a term after all
                    default:
                        return f;
                }
            } catch (const ParseError&) {
            }
            lx_ = save;
        }
        return relation();
    }

    FormulaPtr relation() {
        TermPtr a = term();
        const Token& op = lx_.peek();
        auto is_zero = [](const TermPtr& t) {
            return t->kind == Term::Kind::Constant && !t->dconst && t->value.is_zero();
        };
        auto atom = [&](TermPtr lhs, TermPtr rhs, Rel rel) {
            if (is_zero(rhs)) return f_atom(lhs, rel);
            if (is_zero(lhs)) return f_atom(t_neg(rhs), rel);
            return f_atom(t_sub(lhs, rhs), rel);
        };
        switch (op.kind) {
            case Tok::Gt: lx_.take(); return atom(a, term(), Rel::Gt);
            case Tok::Geq: lx_.take(); return atom(a, term(), Rel::Geq);
            case Tok::Lt: { lx_.take(); TermPtr b = term(); return atom(b, a, Rel::Gt); }
            case Tok::Leq: { lx_.take(); TermPtr b = term(); return atom(b, a, Rel::Geq); }
            case Tok::Eq: lx_.take(); return f_eq(a, term());
            default:
                throw ParseError("expected a relation, found '" + op.text + "'",
                                 op.line, op.col);
        }
    }

    // ---- file blocks -------------------------------------------------

    ParsedFile file() {
        ParsedFile out;
        if (!at_keyword("system") && !at_keyword("automaton") &&
            !at_keyword("sentence")) {
            out.sentences.push_back(formula());
            expect_end();
            return out;
        }
        while (lx_.peek().kind != Tok::End) {
            if (at_keyword("system")) {
                lx_.take();
                out.systems.push_back(system_block());
            } else if (at_keyword("automaton")) {
                lx_.take();
                out.automata.push_back(automaton_block());
            } else if (at_keyword("sentence")) {
                lx_.take();
                expect(Tok::LBrace, "'{'");
                out.sentences.push_back(formula());
                expect(Tok::RBrace, "'}'");
            } else {
                throw ParseError("expected 'system', 'automaton' or 'sentence'",
                                 lx_.peek().line, lx_.peek().col);
            }
        }
        return out;
    }

    void vars_decl(std::vector<std::string>& vars, Box& bounds) {
        do {
            Token v = expect(Tok::Ident, "variable name");
            if (!at_keyword("in"))
                throw ParseError("expected 'in' after variable name",
                                 lx_.peek().line, lx_.peek().col);
            lx_.take();
            expect(Tok::LBracket, "'['");
            double lo = signed_number();
            expect(Tok::Comma, "','");
            double hi = signed_number();
            expect(Tok::RBracket, "']'");
            if (hi < lo)
                throw ParseError("empty range for variable " + v.text, v.line, v.col);
            vars.push_back(v.text);
            bounds.set(v.text, Interval(lo, hi));
        } while (accept(Tok::Comma));
        expect(Tok::Semi, "';'");
    }

    double signed_number() {
        bool neg = accept(Tok::Minus);
        Token n = expect(Tok::Number, "number");
        double d = Rational::parse(n.text).to_double();
        return neg ? -d : d;
    }

    Box box_spec() {
        Box out;
        do {
            Token v = expect(Tok::Ident, "variable name");
            if (!at_keyword("in"))
                throw ParseError("expected 'in' after variable name",
                                 lx_.peek().line, lx_.peek().col);
            lx_.take();
            expect(Tok::LBracket, "'['");
            double lo = signed_number();
            expect(Tok::Comma, "','");
            double hi = signed_number();
            expect(Tok::RBracket, "']'");
            if (hi < lo)
                throw ParseError("empty range for variable " + v.text, v.line, v.col);
            out.set(v.text, Interval(lo, hi));
        } while (accept(Tok::Comma));
        expect_end();
        return out;
    }

    // `dyn x' = <term>;`  The primed name names the differentiated variable.
    std::pair<std::string, TermPtr> dyn_decl(const std::vector<std::string>& vars) {
        Token v = expect(Tok::Ident, "primed variable");
        if (v.text.empty() || v.text.back() != '\'')
            throw ParseError("dyn needs a primed variable (x')", v.line, v.col);
        std::string base = v.text.substr(0, v.text.size() - 1);
        if (std::find(vars.begin(), vars.end(), base) == vars.end())
            throw ParseError("dyn for undeclared variable " + base, v.line, v.col);
        expect(Tok::Eq, "'='");
        TermPtr rhs = term();
        expect(Tok::Semi, "';'");
        return {base, rhs};
    }

    std::shared_ptr<const OdeSystem> system_block() {
        Token name = expect(Tok::Ident, "system name");
        expect(Tok::LBrace, "'{'");
        std::vector<std::string> vars;
        Box bounds;
        std::map<std::string, TermPtr> rhs;
        std::optional<double> lipschitz;
        while (!accept(Tok::RBrace)) {
            if (at_keyword("vars")) {
                lx_.take();
                vars_decl(vars, bounds);
            } else if (at_keyword("dyn")) {
                lx_.take();
                auto [v, t] = dyn_decl(vars);
                rhs[v] = t;
            } else if (at_keyword("lipschitz")) {
                Token kw = lx_.take();
                lipschitz = signed_number();
                expect(Tok::Semi, "';'");
                if (*lipschitz <= 0)
                    throw ParseError("lipschitz must be positive", kw.line, kw.col);
            } else {
                throw ParseError("expected 'vars', 'dyn' or 'lipschitz'",
                                 lx_.peek().line, lx_.peek().col);
            }
        }
        std::vector<TermPtr> ordered;
        for (const auto& v : vars) {
            auto it = rhs.find(v);
            if (it == rhs.end())
                throw ParseError("missing dyn for variable " + v, name.line, name.col);
            ordered.push_back(it->second);
        }
        try {
            return std::make_shared<OdeSystem>(name.text, vars, ordered, bounds,
                                               lipschitz);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), name.line, name.col);
        }
    }

    std::shared_ptr<const HybridAutomaton> automaton_block() {
        Token name = expect(Tok::Ident, "automaton name");
        expect(Tok::LBrace, "'{'");
        std::vector<std::string> vars;
        Box bounds;
        std::vector<Mode> modes;
        std::vector<Jump> jumps;
        while (!accept(Tok::RBrace)) {
            if (at_keyword("vars")) {
                lx_.take();
                vars_decl(vars, bounds);
            } else if (at_keyword("mode")) {
                lx_.take();
                modes.push_back(mode_block(name.text, vars, bounds));
            } else if (at_keyword("jump")) {
                lx_.take();
                jumps.push_back(jump_block(vars));
            } else {
                throw ParseError("expected 'vars', 'mode' or 'jump'",
                                 lx_.peek().line, lx_.peek().col);
            }
        }
        try {
            return std::make_shared<HybridAutomaton>(name.text, vars, bounds,
                                                     modes, jumps);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), name.line, name.col);
        }
    }

    Mode mode_block(const std::string& owner, const std::vector<std::string>& vars,
                    const Box& bounds) {
        Token name = expect(Tok::Ident, "mode name");
        expect(Tok::LBrace, "'{'");
        std::map<std::string, TermPtr> rhs;
        FormulaPtr inv, init;
        while (!accept(Tok::RBrace)) {
            if (at_keyword("dyn")) {
                lx_.take();
                auto [v, t] = dyn_decl(vars);
                rhs[v] = t;
            } else if (at_keyword("inv")) {
                lx_.take();
                inv = formula();
                expect(Tok::Semi, "';'");
            } else if (at_keyword("init")) {
                lx_.take();
                init = formula();
                expect(Tok::Semi, "';'");
            } else {
                throw ParseError("expected 'dyn', 'inv' or 'init'",
                                 lx_.peek().line, lx_.peek().col);
            }
        }
        std::vector<TermPtr> ordered;
        for (const auto& v : vars) {
            auto it = rhs.find(v);
            if (it == rhs.end())
                throw ParseError("mode " + name.text + " missing dyn for " + v,
                                 name.line, name.col);
            ordered.push_back(it->second);
        }
        std::shared_ptr<const OdeSystem> flow;
        try {
            flow = std::make_shared<OdeSystem>(owner + "_" + name.text, vars,
                                               ordered, bounds, std::nullopt);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), name.line, name.col);
        }
        return Mode{name.text, flow, inv, init};
    }

    Jump jump_block(const std::vector<std::string>& vars) {
        Token from = expect(Tok::Ident, "source mode");
        expect(Tok::Arrow, "'->'");
        Token to = expect(Tok::Ident, "target mode");
        expect(Tok::LBrace, "'{'");
        FormulaPtr guard;
        std::map<std::string, TermPtr> resets;
        while (!accept(Tok::RBrace)) {
            if (at_keyword("guard")) {
                lx_.take();
                guard = formula();
                expect(Tok::Semi, "';'");
            } else if (at_keyword("reset")) {
                lx_.take();
                do {
                    Token v = expect(Tok::Ident, "primed variable");
                    if (v.text.empty() || v.text.back() != '\'')
                        throw ParseError("reset targets a primed variable (x')",
                                         v.line, v.col);
                    std::string base = v.text.substr(0, v.text.size() - 1);
                    if (std::find(vars.begin(), vars.end(), base) == vars.end())
                        throw ParseError("reset of undeclared variable " + base,
                                         v.line, v.col);
                    expect(Tok::Assign, "':='");
                    resets[base] = term();
                } while (accept(Tok::Comma));
                expect(Tok::Semi, "';'");
            } else {
                throw ParseError("expected 'guard' or 'reset'", lx_.peek().line,
                                 lx_.peek().col);
            }
        }
        // relation = guard /\ one equation per variable (identity if no reset)
        std::vector<FormulaPtr> conj;
        if (guard) conj.push_back(guard);
        for (const auto& v : vars) {
            auto it = resets.find(v);
            TermPtr target = it == resets.end() ? t_var(v) : it->second;
            conj.push_back(f_eq(t_var(v + "'"), target));
        }
        return Jump{from.text, to.text, f_and(std::move(conj))};
    }

private:
    Lexer lx_;
};

}  // namespace

TermPtr parse_term(const std::string& text) {
    Parser p(text);
    TermPtr t = p.term();
    p.expect_end();
    return t;
}

FormulaPtr parse_formula(const std::string& text) {
    Parser p(text);
    FormulaPtr f = p.formula();
    p.expect_end();
    return f;
}

Box parse_box(const std::string& text) {
    Parser p(text);
    return p.box_spec();
}

ParsedFile parse_file(const std::string& text) {
    Parser p(text);
    return p.file();
}

}  // namespace dstab
