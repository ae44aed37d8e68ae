#pragma once

// Rule representation shared by the compiler, the rule layer and the engine,
// plus its concrete syntax:
//
//   pred(T1,T2) :- p1(...), p2(...).     % comment
//   fact("a","b").
//
// Variables start with an uppercase letter. Constants are double-quoted with
// backslash escapes; bare lowercase identifiers and numbers are accepted as
// constants on input and always rendered quoted.

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "text.hpp"

namespace bioquery {

struct Term {
    enum class Kind { variable, constant };
    Kind kind = Kind::constant;
    std::string text;

    static Term variable(std::string name) { return {Kind::variable, std::move(name)}; }
    static Term constant(std::string value) { return {Kind::constant, std::move(value)}; }
    bool is_variable() const noexcept { return kind == Kind::variable; }

    bool operator==(const Term&) const = default;
    auto operator<=>(const Term&) const = default;
};

struct Atom {
    std::string predicate;
    std::vector<Term> args;

    std::size_t arity() const noexcept { return args.size(); }
    bool operator==(const Atom&) const = default;
    auto operator<=>(const Atom&) const = default;
};

struct Rule {
    Atom head;
    std::vector<Atom> body;

    bool is_fact() const noexcept { return body.empty(); }
    bool operator==(const Rule&) const = default;
};

struct Program {
    std::vector<Rule> rules;
    bool operator==(const Program&) const = default;
};

inline std::string quote(std::string_view value) {
    std::string out = "\"";
    for (char c : value) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string render(const Term& t) { return t.is_variable() ? t.text : quote(t.text); }

inline std::string render(const Atom& a) {
    std::string out = a.predicate;
    if (a.args.empty()) return out;
    out += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ',';
        out += render(a.args[i]);
    }
    out += ')';
    return out;
}

inline std::string render(const Rule& r) {
    std::string out = render(r.head);
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        out += i ? ", " : " :- ";
        out += render(r.body[i]);
    }
    out += '.';
    return out;
}

inline std::string render(const Program& p) {
    std::string out;
    for (const auto& r : p.rules) {
        out += render(r);
        out += '\n';
    }
    return out;
}

/// Variables of a rule's head that do not occur in its body.
inline std::vector<std::string> unbound_head_variables(const Rule& r) {
    std::set<std::string> bound;
    for (const auto& a : r.body)
        for (const auto& t : a.args)
            if (t.is_variable()) bound.insert(t.text);
    std::vector<std::string> out;
    for (const auto& t : r.head.args)
        if (t.is_variable() && !bound.count(t.text) &&
            std::find(out.begin(), out.end(), t.text) == out.end())
            out.push_back(t.text);
    return out;
}

inline void check_safety(const Rule& r) {
    auto unbound = unbound_head_variables(r);
    if (!unbound.empty()) throw SafetyError(unbound.front(), render(r));
}

namespace detail {

class ProgramReader {
public:
    explicit ProgramReader(std::string_view src) : src_(src) {}

    Program read() {
        Program p;
        skip_blank();
        while (pos_ < src_.size()) {
            p.rules.push_back(read_rule());
            skip_blank();
        }
        return p;
    }

private:
    [[noreturn]] void error(const std::string& message) const { error_at(pos_, message); }

    [[noreturn]] void error_at(std::size_t at, const std::string& message) const {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
            if (src_[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ProgramSyntaxError(line, column, message);
    }

    void skip_blank() {
        while (pos_ < src_.size()) {
            if (text::is_space(src_[pos_])) {
                ++pos_;
            } else if (src_[pos_] == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    bool accept(std::string_view lit) {
        skip_blank();
        if (src_.substr(pos_, lit.size()) == lit) {
            pos_ += lit.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view lit) {
        if (!accept(lit)) error("expected '" + std::string(lit) + "'");
    }

    std::string identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (text::is_alnum(src_[pos_]) || src_[pos_] == '_')) ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    Term read_term() {
        skip_blank();
        if (pos_ >= src_.size()) error("unexpected end of input, expected a term");
        char c = src_[pos_];
        if (c == '"') {
            std::string value;
            std::size_t start = pos_++;
            while (pos_ < src_.size() && src_[pos_] != '"') {
                if (src_[pos_] == '\\') {
                    if (++pos_ >= src_.size()) break;
                }
                value += src_[pos_++];
            }
            if (pos_ >= src_.size()) error_at(start, "unterminated string");
            ++pos_;
            return Term::constant(std::move(value));
        }
        if (text::is_upper(c)) return Term::variable(identifier());
        if (text::is_lower(c) || text::is_digit(c)) return Term::constant(identifier());
        if (c == '_') error("anonymous variables are not supported");
        error(std::string("unexpected character '") + c + "'");
    }

    Atom read_atom() {
        skip_blank();
        const std::size_t start = pos_;
        if (pos_ >= src_.size() || !text::is_lower(src_[pos_])) error("expected a predicate name");
        Atom a;
        a.predicate = identifier();
        if (a.predicate == "not") error_at(start, "negation is not supported");
        for (char c : a.predicate)
            if (text::is_upper(c)) error_at(start, "predicate names are lowercase: " + a.predicate);
        if (accept("(")) {
            do a.args.push_back(read_term());
            while (accept(","));
            expect(")");
        }
        return a;
    }

    Rule read_rule() {
        Rule r;
        r.head = read_atom();
        if (accept(":-")) {
            do r.body.push_back(read_atom());
            while (accept(","));
        }
        skip_blank();
        if (pos_ < src_.size() && (src_[pos_] == '|' || src_[pos_] == ';')) error("disjunction is not supported");
        expect(".");
        return r;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Syntax only; safety and arity checks live with the rule layer.
inline Program parse_program(std::string_view text) { return detail::ProgramReader(text).read(); }

} // namespace bioquery
