#pragma once

// Declarative condition/action rule language over LocalViews.
//
// One rule per line:
//   rule   := NAME ":" [guard "&"] atom ("&" atom)* "->" "(" move "," recolor ")"
//   guard  := "myC=" ("A"|"B")
//   atom   := "#" ["!"] region ("|" region)* cmp        ; "!" = complement-of-union
//           | "lookcs=" ("0"|"1") | "at_goal" | "!at_goal"
//   region := "(" xcons "," ycons "," color ")"
//   xcons  := "x" ("="|"<="|">=") term | "x:any" | "x in [" term "," term "]"
//   term   := integer, optionally with the symbol m: "m", "-m+1", "m-2", ...
//   color  := "A" | "B" | "*"
//   cmp    := "=" INT | "<=" INT | ">=" INT | "in [" INT "," INT "]"
//   move   := "x+" | "x-" | "y+" | "y-" | "_"
//   recolor:= "A" | "B" | "_"
// "//" starts a comment; blank lines are skipped.
//
// Evaluation is first-match-wins over the ordered rule list. A negated atom
// counts robots of the atom's color lying in the complement of the union of
// its regions. The symbol m resolves from the EvalContext; an unresolvable m
// makes the atom (and hence the rule) fail.

#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gridvis/geometry.hpp"

namespace gridvis {

// Integer term of the form mCoeff*m + constant, with mCoeff in {-1,0,1}.
struct LinTerm {
    int mCoeff = 0;
    std::int64_t constant = 0;
    friend bool operator==(const LinTerm&, const LinTerm&) = default;
};

struct EvalContext {
    std::optional<std::int64_t> mHat;    // smallest prime >= counted n (no frame)
    bool lookCS = false;
    std::optional<std::int64_t> frameM;  // prime from frame geometry (k+1)
    std::optional<Point> myLocation;     // observer position in the reference frame
    std::optional<std::int64_t> upsilon; // myLocation.y
};

// Thrown when a symbolic bound cannot be resolved; callers treat the
// enclosing rule as not matching.
struct EvalUnresolved : std::runtime_error {
    EvalUnresolved() : std::runtime_error("unresolved symbol m") {}
};

inline std::int64_t resolve(const LinTerm& t, const EvalContext& ctx) {
    if (t.mCoeff == 0) return t.constant;
    std::optional<std::int64_t> m = ctx.lookCS ? ctx.frameM : ctx.mHat;
    if (!m) throw EvalUnresolved{};
    return t.mCoeff * *m + t.constant;
}

struct AxisConstraint {
    enum class Kind { Any, Eq, Leq, Geq, Between } kind = Kind::Any;
    LinTerm lo, hi;  // Eq/Leq/Geq use lo; Between uses both

    friend bool operator==(const AxisConstraint&, const AxisConstraint&) = default;

    bool matches(std::int64_t v, const EvalContext& ctx) const {
        switch (kind) {
            case Kind::Any: return true;
            case Kind::Eq: return v == resolve(lo, ctx);
            case Kind::Leq: return v <= resolve(lo, ctx);
            case Kind::Geq: return v >= resolve(lo, ctx);
            case Kind::Between: {
                std::int64_t a = resolve(lo, ctx), b = resolve(hi, ctx);
                if (a > b) throw EvalUnresolved{};
                return a <= v && v <= b;
            }
        }
        return false;
    }
};

enum class ColorSel : std::uint8_t { A, B, Any };

inline bool color_matches(ColorSel sel, Color c) {
    return sel == ColorSel::Any || (sel == ColorSel::A ? c == Color::A : c == Color::B);
}

struct RegionTriplet {
    AxisConstraint xc, yc;
    ColorSel color = ColorSel::Any;

    friend bool operator==(const RegionTriplet&, const RegionTriplet&) = default;

    bool contains(Point p, const EvalContext& ctx) const {
        return xc.matches(p.x, ctx) && yc.matches(p.y, ctx);
    }
};

enum class Cmp : std::uint8_t { Eq, Leq, Geq, Between };

struct CountAtom {
    std::vector<RegionTriplet> regions;  // nonempty; all share one color selector
    bool negated = false;
    Cmp comparator = Cmp::Eq;
    std::int64_t bound = 0;
    std::int64_t boundHi = 0;  // only for Between

    friend bool operator==(const CountAtom&, const CountAtom&) = default;

    bool holds(std::int64_t count) const {
        switch (comparator) {
            case Cmp::Eq: return count == bound;
            case Cmp::Leq: return count <= bound;
            case Cmp::Geq: return count >= bound;
            case Cmp::Between: return bound <= count && count <= boundHi;
        }
        return false;
    }
};

// Phase-3 guards backed by the EvalContext rather than region counts.
struct CtxAtom {
    enum class Kind { LookCS, AtGoal } kind = Kind::LookCS;
    bool expected = true;  // lookcs=1 / at_goal vs lookcs=0 / !at_goal

    friend bool operator==(const CtxAtom&, const CtxAtom&) = default;
};

enum class MoveDir : std::uint8_t { XPlus, XMinus, YPlus, YMinus, None };

struct Action {
    MoveDir move = MoveDir::None;
    std::optional<Color> recolor;

    Point delta() const {
        switch (move) {
            case MoveDir::XPlus: return {1, 0};
            case MoveDir::XMinus: return {-1, 0};
            case MoveDir::YPlus: return {0, 1};
            case MoveDir::YMinus: return {0, -1};
            case MoveDir::None: return {0, 0};
        }
        return {0, 0};
    }
    friend bool operator==(const Action&, const Action&) = default;
};

struct Rule {
    std::string name;
    std::optional<Color> myColorGuard;
    std::vector<CountAtom> atoms;
    std::vector<CtxAtom> ctxAtoms;
    Action action;

    friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleSet {
    std::vector<Rule> rules;  // order is priority; first match wins

    friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

// Number of view entries matched by an atom. Negated atoms count entries of
// the atom's color outside the union of its regions.
inline std::int64_t count_matching(const LocalView& view, const CountAtom& atom,
                                   const EvalContext& ctx) {
    ColorSel sel = atom.regions.empty() ? ColorSel::Any : atom.regions.front().color;
    std::int64_t n = 0;
    for (const auto& e : view.entries) {
        if (!color_matches(sel, e.color)) continue;
        bool inside = false;
        for (const auto& r : atom.regions)
            if (r.contains(e.pos, ctx)) {
                inside = true;
                break;
            }
        if (inside != atom.negated) ++n;
    }
    return n;
}

inline bool ctx_atom_holds(const CtxAtom& a, const EvalContext& ctx) {
    switch (a.kind) {
        case CtxAtom::Kind::LookCS:
            return ctx.lookCS == a.expected;
        case CtxAtom::Kind::AtGoal: {
            if (!ctx.lookCS || !ctx.frameM || !ctx.myLocation || !ctx.upsilon)
                return !a.expected && ctx.lookCS;  // without a frame, neither holds
            std::int64_t m = *ctx.frameM, u = *ctx.upsilon;
            if (u < 0 || u >= m) return !a.expected;
            Point goal{((u * u) % m + m) % m, u};
            return (*ctx.myLocation == goal) == a.expected;
        }
    }
    return false;
}

inline std::optional<Action> eval_rule(const LocalView& view, const Rule& rule,
                                       const EvalContext& ctx) {
    if (rule.myColorGuard && *rule.myColorGuard != view.myColor) return std::nullopt;
    try {
        for (const auto& a : rule.ctxAtoms)
            if (!ctx_atom_holds(a, ctx)) return std::nullopt;
        for (const auto& a : rule.atoms)
            if (!a.holds(count_matching(view, a, ctx))) return std::nullopt;
    } catch (const EvalUnresolved&) {
        return std::nullopt;
    }
    return rule.action;
}

struct Selection {
    std::string ruleName;
    Action action;
};

// A rule whose move destination is visibly occupied is disabled, and lower
// priority rules get their turn. The destination is an adjacent cell, which
// an occupying robot can never be occluded on, so the snapshot is authoritative
// up to staleness; the Move operation still re-checks ground truth.
inline bool move_destination_free(const LocalView& view, const Action& act) {
    if (act.move == MoveDir::None) return true;
    Point d = act.delta();
    for (const auto& e : view.entries)
        if (e.pos == d) return false;
    return true;
}

inline std::optional<Selection> select_action(const LocalView& view, const RuleSet& rs,
                                              const EvalContext& ctx) {
    for (const auto& rule : rs.rules)
        if (auto act = eval_rule(view, rule, ctx))
            if (move_destination_free(view, *act)) return Selection{rule.name, *act};
    return std::nullopt;
}

// ---------------------------------------------------------------- parsing

struct ParseError : std::runtime_error {
    int line, column;
    ParseError(int ln, int col, const std::string& what)
        : std::runtime_error("parse error at " + std::to_string(ln) + ":" +
                             std::to_string(col) + ": " + what),
          line(ln), column(col) {}
};

namespace detail {

class RuleLexer {
public:
    RuleLexer(std::string_view text, int lineNo) : text_(text), line_(lineNo) {}

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool try_eat(std::string_view tok) {
        skip_ws();
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }
    void expect(std::string_view tok) {
        if (!try_eat(tok)) fail(std::string("expected '") + std::string(tok) + "'");
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected identifier");
        return std::string(text_.substr(start, pos_ - start));
    }
    std::int64_t integer() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start || (pos_ == start + 1 && !std::isdigit(static_cast<unsigned char>(text_[start]))))
            fail("expected integer");
        return std::stoll(std::string(text_.substr(start, pos_ - start)));
    }
    // INT | [-]m[(+|-)INT] | INT(+|-)m  -> coeff*m + constant
    LinTerm term() {
        skip_ws();
        LinTerm t;
        bool neg = false;
        if (peek() == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'm') {
            ++pos_;
            neg = true;
        }
        if (peek() == 'm') {
            ++pos_;
            t.mCoeff = neg ? -1 : 1;
            if (peek() == '+' || peek() == '-') t.constant = integer();
            return t;
        }
        t.constant = integer();
        if (try_eat("+m"))
            t.mCoeff = 1;
        else if (try_eat("-m"))
            t.mCoeff = -1;
        return t;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw ParseError(line_, static_cast<int>(pos_) + 1, what);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_;
};

inline AxisConstraint parse_axis(RuleLexer& lx, char axis) {
    AxisConstraint c;
    lx.expect(std::string_view(&axis, 1));
    if (lx.try_eat(":any")) {
        c.kind = AxisConstraint::Kind::Any;
    } else if (lx.try_eat("in")) {
        lx.expect("[");
        c.kind = AxisConstraint::Kind::Between;
        c.lo = lx.term();
        lx.expect(",");
        c.hi = lx.term();
        lx.expect("]");
    } else if (lx.try_eat("<=")) {
        c.kind = AxisConstraint::Kind::Leq;
        c.lo = lx.term();
    } else if (lx.try_eat(">=")) {
        c.kind = AxisConstraint::Kind::Geq;
        c.lo = lx.term();
    } else if (lx.try_eat("=")) {
        c.kind = AxisConstraint::Kind::Eq;
        c.lo = lx.term();
    } else {
        lx.fail("expected axis constraint");
    }
    return c;
}

inline RegionTriplet parse_region(RuleLexer& lx) {
    RegionTriplet r;
    lx.expect("(");
    r.xc = parse_axis(lx, 'x');
    lx.expect(",");
    r.yc = parse_axis(lx, 'y');
    lx.expect(",");
    if (lx.try_eat("*"))
        r.color = ColorSel::Any;
    else if (lx.try_eat("A"))
        r.color = ColorSel::A;
    else if (lx.try_eat("B"))
        r.color = ColorSel::B;
    else
        lx.fail("expected color A, B or *");
    lx.expect(")");
    return r;
}

inline CountAtom parse_count_atom(RuleLexer& lx) {
    CountAtom atom;
    lx.expect("#");
    atom.negated = lx.try_eat("!");
    atom.regions.push_back(parse_region(lx));
    while (lx.try_eat("|")) atom.regions.push_back(parse_region(lx));
    for (const auto& r : atom.regions)
        if (r.color != atom.regions.front().color)
            lx.fail("regions of one atom must share a color selector");
    if (lx.try_eat("in")) {
        lx.expect("[");
        atom.comparator = Cmp::Between;
        atom.bound = lx.integer();
        lx.expect(",");
        atom.boundHi = lx.integer();
        lx.expect("]");
        if (atom.bound > atom.boundHi) lx.fail("descending count bounds");
    } else if (lx.try_eat("<=")) {
        atom.comparator = Cmp::Leq;
        atom.bound = lx.integer();
    } else if (lx.try_eat(">=")) {
        atom.comparator = Cmp::Geq;
        atom.bound = lx.integer();
    } else if (lx.try_eat("=")) {
        atom.comparator = Cmp::Eq;
        atom.bound = lx.integer();
    } else {
        lx.fail("expected count comparison");
    }
    if (atom.bound < 0 || (atom.comparator == Cmp::Between && atom.boundHi < 0))
        lx.fail("negative count bound");
    return atom;
}

}  // namespace detail

inline Rule parse_rule_line(std::string_view lineText, int lineNo) {
    detail::RuleLexer lx(lineText, lineNo);
    Rule rule;
    rule.name = lx.ident();
    lx.expect(":");
    bool first = true;
    while (!lx.try_eat("->")) {
        if (!first) lx.expect("&");
        first = false;
        if (lx.try_eat("myC=")) {
            if (rule.myColorGuard) lx.fail("duplicate myC guard");
            if (lx.try_eat("A"))
                rule.myColorGuard = Color::A;
            else if (lx.try_eat("B"))
                rule.myColorGuard = Color::B;
            else
                lx.fail("expected A or B after myC=");
        } else if (lx.try_eat("lookcs=")) {
            CtxAtom a{CtxAtom::Kind::LookCS, true};
            if (lx.try_eat("1"))
                a.expected = true;
            else if (lx.try_eat("0"))
                a.expected = false;
            else
                lx.fail("expected lookcs=0 or lookcs=1");
            rule.ctxAtoms.push_back(a);
        } else if (lx.try_eat("!at_goal")) {
            rule.ctxAtoms.push_back({CtxAtom::Kind::AtGoal, false});
        } else if (lx.try_eat("at_goal")) {
            rule.ctxAtoms.push_back({CtxAtom::Kind::AtGoal, true});
        } else if (lx.peek() == '#') {
            rule.atoms.push_back(detail::parse_count_atom(lx));
        } else {
            lx.fail("expected atom");
        }
    }
    if (!rule.myColorGuard && rule.atoms.empty() && rule.ctxAtoms.empty())
        lx.fail("rule needs at least one condition");
    lx.expect("(");
    if (lx.try_eat("x+"))
        rule.action.move = MoveDir::XPlus;
    else if (lx.try_eat("x-"))
        rule.action.move = MoveDir::XMinus;
    else if (lx.try_eat("y+"))
        rule.action.move = MoveDir::YPlus;
    else if (lx.try_eat("y-"))
        rule.action.move = MoveDir::YMinus;
    else if (lx.try_eat("_"))
        rule.action.move = MoveDir::None;
    else
        lx.fail("expected move");
    lx.expect(",");
    if (lx.try_eat("A"))
        rule.action.recolor = Color::A;
    else if (lx.try_eat("B"))
        rule.action.recolor = Color::B;
    else if (lx.try_eat("_"))
        rule.action.recolor = std::nullopt;
    else
        lx.fail("expected recolor");
    lx.expect(")");
    if (!lx.at_end()) lx.fail("trailing input after rule");
    if (rule.action.move == MoveDir::None && !rule.action.recolor)
        lx.fail("rule action must move or recolor");
    return rule;
}

inline RuleSet parse_ruleset(std::string_view text) {
    RuleSet rs;
    int lineNo = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : end - start);
        ++lineNo;
        std::size_t comment = line.find("//");
        if (comment != std::string_view::npos) line = line.substr(0, comment);
        bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
        if (!blank) rs.rules.push_back(parse_rule_line(line, lineNo));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return rs;
}

// -------------------------------------------------------------- printing

namespace detail {

inline std::string format_term(const LinTerm& t) {
    std::string s;
    if (t.mCoeff == 1)
        s = "m";
    else if (t.mCoeff == -1)
        s = "-m";
    if (t.mCoeff == 0) return std::to_string(t.constant);
    if (t.constant > 0) s += "+" + std::to_string(t.constant);
    if (t.constant < 0) s += std::to_string(t.constant);
    return s;
}

inline std::string format_axis(const AxisConstraint& c, char axis) {
    std::string a(1, axis);
    switch (c.kind) {
        case AxisConstraint::Kind::Any: return a + ":any";
        case AxisConstraint::Kind::Eq: return a + "=" + format_term(c.lo);
        case AxisConstraint::Kind::Leq: return a + "<=" + format_term(c.lo);
        case AxisConstraint::Kind::Geq: return a + ">=" + format_term(c.lo);
        case AxisConstraint::Kind::Between:
            return a + " in [" + format_term(c.lo) + "," + format_term(c.hi) + "]";
    }
    return a;
}

inline char color_sel_char(ColorSel c) {
    return c == ColorSel::Any ? '*' : (c == ColorSel::A ? 'A' : 'B');
}

}  // namespace detail

inline std::string format_rule(const Rule& rule) {
    std::ostringstream out;
    out << rule.name << ":";
    bool first = true;
    auto sep = [&]() -> std::ostream& {
        out << (first ? " " : " & ");
        first = false;
        return out;
    };
    if (rule.myColorGuard) sep() << "myC=" << color_char(*rule.myColorGuard);
    for (const auto& a : rule.atoms) {
        sep() << "#" << (a.negated ? "!" : "");
        for (std::size_t i = 0; i < a.regions.size(); ++i) {
            const auto& r = a.regions[i];
            if (i) out << "|";
            out << "(" << detail::format_axis(r.xc, 'x') << "," << detail::format_axis(r.yc, 'y')
                << "," << detail::color_sel_char(r.color) << ")";
        }
        switch (a.comparator) {
            case Cmp::Eq: out << "=" << a.bound; break;
            case Cmp::Leq: out << "<=" << a.bound; break;
            case Cmp::Geq: out << ">=" << a.bound; break;
            case Cmp::Between: out << " in [" << a.bound << "," << a.boundHi << "]"; break;
        }
    }
    for (const auto& a : rule.ctxAtoms) {
        if (a.kind == CtxAtom::Kind::LookCS)
            sep() << "lookcs=" << (a.expected ? "1" : "0");
        else
            sep() << (a.expected ? "at_goal" : "!at_goal");
    }
    out << " -> (";
    switch (rule.action.move) {
        case MoveDir::XPlus: out << "x+"; break;
        case MoveDir::XMinus: out << "x-"; break;
        case MoveDir::YPlus: out << "y+"; break;
        case MoveDir::YMinus: out << "y-"; break;
        case MoveDir::None: out << "_"; break;
    }
    out << "," << (rule.action.recolor ? std::string(1, color_char(*rule.action.recolor)) : "_")
        << ")";
    return out.str();
}

inline std::string format_ruleset(const RuleSet& rs) {
    std::string out;
    for (const auto& r : rs.rules) {
        out += format_rule(r);
        out += '\n';
    }
    return out;
}

}  // namespace gridvis
