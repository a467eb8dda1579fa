#pragma once

#include <cctype>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <utility>

#include "fujimi/errors.hpp"

namespace fujimi {

enum class Comparison { Leq, Lt, Geq, Gt, Query };

inline const char* comparison_text(Comparison c) {
    switch (c) {
        case Comparison::Leq: return "<=";
        case Comparison::Lt: return "<";
        case Comparison::Geq: return ">=";
        case Comparison::Gt: return ">";
        case Comparison::Query: return "=?";
    }
    return "?";
}

struct PathFormula;

// State formulas: true | a | !f | f & f | P~p[psi] | S~p[f] | AG f.
// `|` and `=>` exist only in the concrete syntax; the parser desugars them,
// so the AST stays minimal.
struct StateFormula {
    enum class Kind { True, Atom, Not, And, Prob, Steady, ForAllGlobally };

    Kind kind;
    std::string atom;                       // Atom
    std::shared_ptr<StateFormula> left;     // Not, And, Steady, ForAllGlobally
    std::shared_ptr<StateFormula> right;    // And
    std::shared_ptr<PathFormula> path;      // Prob
    Comparison comparison = Comparison::Query;
    double bound = 0.0;
};

using StateFormulaPtr = std::shared_ptr<StateFormula>;

// Path formulas: X f | f U f | f U<=t f | F f | G f | F G f.
struct PathFormula {
    enum class Kind { Next, Until, BoundedUntil, Eventually, Globally, EventuallyGlobally };

    Kind kind;
    StateFormulaPtr left;
    StateFormulaPtr right;      // Until / BoundedUntil
    std::uint64_t step_bound = 0;
};

using PathFormulaPtr = std::shared_ptr<PathFormula>;

namespace ast {

inline StateFormulaPtr ftrue() {
    auto f = std::make_shared<StateFormula>();
    f->kind = StateFormula::Kind::True;
    return f;
}
inline StateFormulaPtr atom(std::string name) {
    auto f = std::make_shared<StateFormula>();
    f->kind = StateFormula::Kind::Atom;
    f->atom = std::move(name);
    return f;
}
inline StateFormulaPtr fnot(StateFormulaPtr inner) {
    auto f = std::make_shared<StateFormula>();
    f->kind = StateFormula::Kind::Not;
    f->left = std::move(inner);
    return f;
}
inline StateFormulaPtr fand(StateFormulaPtr a, StateFormulaPtr b) {
    auto f = std::make_shared<StateFormula>();
    f->kind = StateFormula::Kind::And;
    f->left = std::move(a);
    f->right = std::move(b);
    return f;
}
// a | b  ==  !(!a & !b)
inline StateFormulaPtr for_(StateFormulaPtr a, StateFormulaPtr b) {
    return fnot(fand(fnot(std::move(a)), fnot(std::move(b))));
}
// a => b  ==  !(a & !b)
inline StateFormulaPtr implies(StateFormulaPtr a, StateFormulaPtr b) {
    return fnot(fand(std::move(a), fnot(std::move(b))));
}
inline StateFormulaPtr prob(Comparison cmp, double bound, PathFormulaPtr psi) {
    auto f = std::make_shared<StateFormula>();
    f->kind = StateFormula::Kind::Prob;
    f->comparison = cmp;
    f->bound = bound;
    f->path = std::move(psi);
    return f;
}
inline StateFormulaPtr steady(Comparison cmp, double bound, StateFormulaPtr inner) {
    auto f = std::make_shared<StateFormula>();
    f->kind = StateFormula::Kind::Steady;
    f->comparison = cmp;
    f->bound = bound;
    f->left = std::move(inner);
    return f;
}
inline StateFormulaPtr ag(StateFormulaPtr inner) {
    auto f = std::make_shared<StateFormula>();
    f->kind = StateFormula::Kind::ForAllGlobally;
    f->left = std::move(inner);
    return f;
}

inline PathFormulaPtr next(StateFormulaPtr f) {
    auto p = std::make_shared<PathFormula>();
    p->kind = PathFormula::Kind::Next;
    p->left = std::move(f);
    return p;
}
inline PathFormulaPtr until(StateFormulaPtr a, StateFormulaPtr b) {
    auto p = std::make_shared<PathFormula>();
    p->kind = PathFormula::Kind::Until;
    p->left = std::move(a);
    p->right = std::move(b);
    return p;
}
inline PathFormulaPtr bounded_until(StateFormulaPtr a, StateFormulaPtr b, std::uint64_t t) {
    auto p = std::make_shared<PathFormula>();
    p->kind = PathFormula::Kind::BoundedUntil;
    p->left = std::move(a);
    p->right = std::move(b);
    p->step_bound = t;
    return p;
}
inline PathFormulaPtr eventually(StateFormulaPtr f) {
    auto p = std::make_shared<PathFormula>();
    p->kind = PathFormula::Kind::Eventually;
    p->left = std::move(f);
    return p;
}
inline PathFormulaPtr globally(StateFormulaPtr f) {
    auto p = std::make_shared<PathFormula>();
    p->kind = PathFormula::Kind::Globally;
    p->left = std::move(f);
    return p;
}
inline PathFormulaPtr eventually_globally(StateFormulaPtr f) {
    auto p = std::make_shared<PathFormula>();
    p->kind = PathFormula::Kind::EventuallyGlobally;
    p->left = std::move(f);
    return p;
}

}  // namespace ast

inline bool ast_equal(const StateFormula& a, const StateFormula& b);

inline bool ast_equal(const PathFormula& a, const PathFormula& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == PathFormula::Kind::BoundedUntil && a.step_bound != b.step_bound) return false;
    if (bool(a.left) != bool(b.left) || bool(a.right) != bool(b.right)) return false;
    if (a.left && !ast_equal(*a.left, *b.left)) return false;
    if (a.right && !ast_equal(*a.right, *b.right)) return false;
    return true;
}

inline bool ast_equal(const StateFormula& a, const StateFormula& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case StateFormula::Kind::True: return true;
        case StateFormula::Kind::Atom: return a.atom == b.atom;
        case StateFormula::Kind::Not:
        case StateFormula::Kind::ForAllGlobally: return ast_equal(*a.left, *b.left);
        case StateFormula::Kind::And:
            return ast_equal(*a.left, *b.left) && ast_equal(*a.right, *b.right);
        case StateFormula::Kind::Prob:
            return a.comparison == b.comparison && a.bound == b.bound &&
                   ast_equal(*a.path, *b.path);
        case StateFormula::Kind::Steady:
            return a.comparison == b.comparison && a.bound == b.bound &&
                   ast_equal(*a.left, *b.left);
    }
    return false;
}

// --- pretty printer (canonical core syntax; reparses to an identical AST) ---

inline std::string to_string(const StateFormula& f);

inline std::string to_string(const PathFormula& p) {
    switch (p.kind) {
        case PathFormula::Kind::Next: return "X " + to_string(*p.left);
        case PathFormula::Kind::Until:
            return to_string(*p.left) + " U " + to_string(*p.right);
        case PathFormula::Kind::BoundedUntil:
            return to_string(*p.left) + " U<=" + std::to_string(p.step_bound) + " " +
                   to_string(*p.right);
        case PathFormula::Kind::Eventually: return "F " + to_string(*p.left);
        case PathFormula::Kind::Globally: return "G " + to_string(*p.left);
        case PathFormula::Kind::EventuallyGlobally: return "F G " + to_string(*p.left);
    }
    return "?";
}

inline std::string to_string(const StateFormula& f) {
    auto bound_text = [&]() -> std::string {
        if (f.comparison == Comparison::Query) return "=?";
        std::ostringstream os;
        os << comparison_text(f.comparison) << f.bound;
        return os.str();
    };
    switch (f.kind) {
        case StateFormula::Kind::True: return "true";
        case StateFormula::Kind::Atom: return f.atom;
        case StateFormula::Kind::Not: return "!(" + to_string(*f.left) + ")";
        case StateFormula::Kind::And:
            return "(" + to_string(*f.left) + " & " + to_string(*f.right) + ")";
        case StateFormula::Kind::Prob:
            return "P" + bound_text() + " [ " + to_string(*f.path) + " ]";
        case StateFormula::Kind::Steady:
            return "S" + bound_text() + " [ " + to_string(*f.left) + " ]";
        case StateFormula::Kind::ForAllGlobally: return "AG (" + to_string(*f.left) + ")";
    }
    return "?";
}

// --- recursive-descent parser ---
//
// state   := impl
// impl    := or ('=>' impl)?
// or      := and ('|' and)*
// and     := unary ('&' unary)*
// unary   := '!' unary | '(' state ')' | 'true' | 'P' bound '[' path ']'
//          | 'S' bound '[' state ']' | 'AG' unary | identifier
// bound   := '=?' | ('<=' | '<' | '>=' | '>') number
// path    := 'X' state | 'F' 'G' state | 'F' state | 'G' state
//          | state 'U' ('<=' integer)? state
class FormulaParser {
public:
    explicit FormulaParser(std::string text) : text_(std::move(text)) {}

    StateFormulaPtr parse() {
        StateFormulaPtr f = parse_state();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError(pos_, "end of input");
        return f;
    }

private:
    std::string text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool eat(const std::string& tok) {
        skip_ws();
        if (text_.compare(pos_, tok.size(), tok) == 0) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }
    void expect(const std::string& tok) {
        if (!eat(tok)) throw ParseError(pos_, "'" + tok + "'");
    }
    bool peek_ident(std::string& out) {
        skip_ws();
        std::size_t p = pos_;
        if (p >= text_.size()) return false;
        unsigned char c = static_cast<unsigned char>(text_[p]);
        if (!std::isalpha(c) && c != '_') return false;
        std::size_t end = p;
        while (end < text_.size()) {
            unsigned char e = static_cast<unsigned char>(text_[end]);
            if (!std::isalnum(e) && e != '_') break;
            ++end;
        }
        out = text_.substr(p, end - p);
        return true;
    }
    std::string take_ident() {
        std::string id;
        if (!peek_ident(id)) throw ParseError(pos_, "identifier");
        pos_ += id.size();
        return id;
    }
    double take_number() {
        skip_ws();
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
                text_[end] == 'e' || text_[end] == 'E' ||
                ((text_[end] == '+' || text_[end] == '-') && end > pos_ &&
                 (text_[end - 1] == 'e' || text_[end - 1] == 'E'))))
            ++end;
        if (end == pos_) throw ParseError(pos_, "number");
        double v = std::stod(text_.substr(pos_, end - pos_));
        pos_ = end;
        return v;
    }

    StateFormulaPtr parse_state() { return parse_impl(); }

    StateFormulaPtr parse_impl() {
        StateFormulaPtr lhs = parse_or();
        if (eat("=>")) return ast::implies(std::move(lhs), parse_impl());
        return lhs;
    }

    StateFormulaPtr parse_or() {
        StateFormulaPtr lhs = parse_and();
        while (true) {
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == '|') {
                ++pos_;
                lhs = ast::for_(std::move(lhs), parse_and());
            } else {
                return lhs;
            }
        }
    }

    StateFormulaPtr parse_and() {
        StateFormulaPtr lhs = parse_unary();
        while (eat("&")) lhs = ast::fand(std::move(lhs), parse_unary());
        return lhs;
    }

    std::pair<Comparison, double> parse_bound() {
        if (eat("=?")) return {Comparison::Query, 0.0};
        Comparison cmp;
        if (eat("<="))
            cmp = Comparison::Leq;
        else if (eat(">="))
            cmp = Comparison::Geq;
        else if (eat("<"))
            cmp = Comparison::Lt;
        else if (eat(">"))
            cmp = Comparison::Gt;
        else
            throw ParseError(pos_, "'=?', '<=', '<', '>=' or '>'");
        double p = take_number();
        if (p < 0.0 || p > 1.0) throw ParseError(pos_, "probability bound in [0, 1]");
        return {cmp, p};
    }

    StateFormulaPtr parse_unary() {
        skip_ws();
        if (eat("!")) return ast::fnot(parse_unary());
        if (eat("(")) {
            StateFormulaPtr f = parse_state();
            expect(")");
            return f;
        }
        std::string id;
        if (!peek_ident(id)) throw ParseError(pos_, "formula");
        if (id == "true") {
            pos_ += id.size();
            return ast::ftrue();
        }
        if (id == "AG") {
            pos_ += id.size();
            return ast::ag(parse_unary());
        }
        if (id == "P") {
            pos_ += id.size();
            auto [cmp, bound] = parse_bound();
            expect("[");
            PathFormulaPtr path = parse_path();
            expect("]");
            return ast::prob(cmp, bound, std::move(path));
        }
        if (id == "S") {
            pos_ += id.size();
            auto [cmp, bound] = parse_bound();
            expect("[");
            StateFormulaPtr inner = parse_state();
            expect("]");
            return ast::steady(cmp, bound, std::move(inner));
        }
        pos_ += id.size();
        return ast::atom(id);
    }

    PathFormulaPtr parse_path() {
        std::string id;
        if (peek_ident(id)) {
            if (id == "X") {
                pos_ += id.size();
                return ast::next(parse_state());
            }
            if (id == "F") {
                pos_ += id.size();
                std::string id2;
                if (peek_ident(id2) && id2 == "G") {
                    pos_ += id2.size();
                    return ast::eventually_globally(parse_state());
                }
                return ast::eventually(parse_state());
            }
            if (id == "G") {
                pos_ += id.size();
                return ast::globally(parse_state());
            }
        }
        StateFormulaPtr lhs = parse_state();
        expect("U");
        if (eat("<=")) {
            skip_ws();
            std::size_t end = pos_;
            while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
            if (end == pos_) throw ParseError(pos_, "step bound");
            std::uint64_t t = std::stoull(text_.substr(pos_, end - pos_));
            pos_ = end;
            return ast::bounded_until(std::move(lhs), parse_state(), t);
        }
        return ast::until(std::move(lhs), parse_state());
    }
};

inline StateFormulaPtr parse_formula(const std::string& text) {
    return FormulaParser(text).parse();
}

}  // namespace fujimi
