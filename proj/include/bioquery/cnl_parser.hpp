#pragma once

// Tokenizer and parser for the biomedical query language:
//
//   Query    := ("What" "are" "the" TypePlural | "Which" TypePlural) RelChain "?"
//   RelChain := "that" VP { "and" "that" VP }
//   VP       := ActiveVerb NPObj | ("is"|"are") PassiveParticiple "by" NPObj
//   NPObj    := "the" TypeSingular ProperName | "the" TypePlural RelChain
//
// The parser is a small nondeterministic automaton over tokens. A
// configuration holds the stack of open relative clauses, so the same
// machinery answers "what may come next" for autocomplete. "and that" is
// ambiguous under nesting; the innermost clause that accepts the following
// verb phrase wins.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "error.hpp"
#include "lexicon.hpp"
#include "text.hpp"

namespace bioquery {

enum class TokenKind { keyword, type_singular, type_plural, verb, name, question_mark };

struct Token {
    TokenKind kind = TokenKind::keyword;
    std::string surface;      // as typed; quotes stripped from quoted names
    std::size_t begin = 0;    // byte span in the input
    std::size_t end = 0;
    std::string type_id;      // type nouns only
    std::string description;  // what autocomplete would have offered for this token

    bool operator==(const Token&) const = default;
};

inline constexpr std::string_view name_class = "<name>";
inline constexpr std::string_view end_of_query = "<end>";

struct VariableRef {
    int id = 0;
    bool operator==(const VariableRef&) const = default;
};

struct Constant {
    std::string value;
    std::string type;
    bool operator==(const Constant&) const = default;
};

using QueryArg = std::variant<VariableRef, Constant>;

struct QueryAtom {
    std::string predicate;
    QueryArg first;
    QueryArg second;
    bool operator==(const QueryAtom&) const = default;
};

struct QueryIR {
    int answer_var = 0;
    std::map<int, std::string> vars;  // variable id -> entity type
    std::vector<QueryAtom> atoms;

    const std::string& answer_type() const { return vars.at(answer_var); }
    bool operator==(const QueryIR&) const = default;
};

namespace detail {

inline const std::set<std::string>& grammar_keywords() {
    static const std::set<std::string> kw{"what", "which", "are", "is", "the", "that", "and", "by"};
    return kw;
}

inline std::string keyword_description(const std::string& lower) {
    if (lower == "what") return "What";
    if (lower == "which") return "Which";
    return lower;
}

struct RawWord {
    std::string text;
    std::size_t begin;
    std::size_t end;
    bool quoted = false;
    bool question = false;
};

// Splits on whitespace; '?' and quoted strings are words of their own.
// Returns false (with `stop` set) on an unterminated quote.
inline bool scan_words(std::string_view input, std::vector<RawWord>& out, std::size_t& stop) {
    std::size_t i = 0;
    while (i < input.size()) {
        char c = input[i];
        if (text::is_space(c)) {
            ++i;
        } else if (c == '?') {
            out.push_back({"?", i, i + 1, false, true});
            ++i;
        } else if (c == '"') {
            auto close = input.find('"', i + 1);
            if (close == std::string_view::npos) {
                stop = i;
                return false;
            }
            out.push_back({std::string(input.substr(i + 1, close - i - 1)), i, close + 1, true, false});
            i = close + 1;
        } else {
            std::size_t j = i;
            while (j < input.size() && !text::is_space(input[j]) && input[j] != '?' && input[j] != '"') ++j;
            out.push_back({std::string(input.substr(i, j - i)), i, j, false, false});
            i = j;
        }
    }
    return true;
}

inline bool name_like(const RawWord& w) {
    return !w.quoted && !w.question && !w.text.empty() &&
           (text::is_upper(w.text.front()) || text::is_digit(w.text.front())) && text::to_lower(w.text) != "and";
}

} // namespace detail

struct TokenizeResult {
    std::vector<Token> tokens;
    bool complete = true;        // false when tokenization stopped early
    std::size_t stop = 0;        // byte offset where it stopped (input size when complete)
    std::size_t stop_end = 0;    // end of the offending word
};

/// Tokenizes as far as possible without throwing. Used directly by
/// autocomplete, which tolerates a trailing fragment.
inline TokenizeResult tokenize_prefix(std::string_view input, const Lexicon& lex) {
    TokenizeResult result;
    std::vector<detail::RawWord> raw;
    std::size_t quote_stop = input.size();
    const bool scanned = detail::scan_words(input, raw, quote_stop);

    std::set<std::string> verb_heads;
    std::set<std::string> phrase_tails;
    auto add_phrase = [&](const std::string& phrase) {
        auto ws = text::words(phrase);
        for (std::size_t i = 0; i < ws.size(); ++i) (i == 0 ? verb_heads : phrase_tails).insert(ws[i]);
    };
    for (const auto& f : lex.frames) {
        add_phrase(f.active);
        add_phrase(f.third_person);
        if (!f.passive.empty()) add_phrase(f.passive);
    }

    auto fail = [&](const detail::RawWord& w) {
        result.complete = false;
        result.stop = w.begin;
        result.stop_end = w.end;
    };

    bool name_position = false;
    std::size_t k = 0;
    while (k < raw.size()) {
        const auto& w = raw[k];
        Token tok;
        tok.begin = w.begin;
        tok.end = w.end;
        if (w.question) {
            tok.kind = TokenKind::question_mark;
            tok.surface = "?";
            tok.description = "?";
            ++k;
        } else if (w.quoted) {
            tok.kind = TokenKind::name;
            tok.surface = w.text;
            tok.description = std::string(name_class);
            ++k;
        } else if (name_position && detail::name_like(w)) {
            std::size_t j = k;
            std::vector<std::string> parts;
            while (j < raw.size() && detail::name_like(raw[j])) parts.push_back(raw[j++].text);
            tok.kind = TokenKind::name;
            tok.surface = text::join(parts, " ");
            tok.end = raw[j - 1].end;
            tok.description = std::string(name_class);
            k = j;
        } else {
            // Longest multi-word type noun starting here.
            std::size_t best_len = 0;
            const EntityType* best_type = nullptr;
            bool best_plural = false;
            for (const auto& t : lex.types) {
                for (bool plural : {false, true}) {
                    auto ws = text::words(plural ? t.plural : t.singular);
                    if (ws.size() <= best_len || k + ws.size() > raw.size()) continue;
                    bool match = true;
                    for (std::size_t i = 0; i < ws.size() && match; ++i) {
                        const auto& rw = raw[k + i];
                        match = !rw.quoted && !rw.question && text::to_lower(rw.text) == ws[i];
                    }
                    if (match) {
                        best_len = ws.size();
                        best_type = &t;
                        best_plural = plural;
                    }
                }
            }
            const auto lower = text::to_lower(w.text);
            if (best_type) {
                tok.kind = best_plural ? TokenKind::type_plural : TokenKind::type_singular;
                tok.end = raw[k + best_len - 1].end;
                tok.surface = std::string(input.substr(tok.begin, tok.end - tok.begin));
                tok.type_id = best_type->id;
                tok.description = best_plural ? best_type->plural : best_type->singular;
                k += best_len;
            } else if (detail::grammar_keywords().count(lower)) {
                tok.kind = TokenKind::keyword;
                tok.surface = w.text;
                tok.description = detail::keyword_description(lower);
                ++k;
            } else if (verb_heads.count(lower)) {
                tok.kind = TokenKind::verb;
                tok.surface = w.text;
                tok.description = lower;
                ++k;
            } else if (phrase_tails.count(lower)) {
                tok.kind = TokenKind::keyword;
                tok.surface = w.text;
                tok.description = lower;
                ++k;
            } else {
                fail(w);
                return result;
            }
        }
        name_position = tok.kind == TokenKind::type_singular;
        result.tokens.push_back(std::move(tok));
    }
    if (!scanned) {
        result.complete = false;
        result.stop = quote_stop;
        result.stop_end = input.size();
        return result;
    }
    result.stop = input.size();
    result.stop_end = input.size();
    return result;
}

inline std::vector<Token> tokenize(std::string_view input, const Lexicon& lex) {
    if (text::trim(input).empty()) throw EmptyInput();
    auto r = tokenize_prefix(input, lex);
    if (!r.complete)
        throw UnknownWord(std::string(input.substr(r.stop, r.stop_end - r.stop)), r.stop, r.stop_end);
    return std::move(r.tokens);
}

namespace detail {

struct VerbPath {
    std::vector<std::string> words;
    std::size_t frame = 0;
    bool passive = false;
    std::string head_type;    // type of the noun the clause attaches to
    std::string object_type;  // type of the noun phrase after the verb
};

struct Clause {
    int var = 0;
    std::string type;
};

enum class Phase {
    start,
    after_what,
    after_are,
    head_noun,
    after_head,
    verb,
    after_verb,
    np_noun,
    np_name,
    np_that,
    chain_end,
    after_and,
    done
};

struct Config {
    Phase phase = Phase::start;
    std::vector<Clause> clauses;
    std::vector<std::size_t> paths;  // live verb paths while in Phase::verb
    std::size_t offset = 0;          // words of those paths matched so far
    std::size_t verb_start = 0;      // token index where the verb began
    std::size_t verb = 0;            // completed path, from after_verb on
    Clause pending;                  // plural noun waiting for its "that"
    bool which = false;              // "Which" form: the first "that" may be left out
    QueryIR ir;
    int next_var = 1;
};

} // namespace detail

class Parser {
public:
    explicit Parser(const Lexicon& lex) : lex_(lex) {
        for (std::size_t i = 0; i < lex.frames.size(); ++i) {
            const auto& f = lex.frames[i];
            add_path(text::words(f.active), i, false, f.subject_type, f.object_type);
            if (f.third_person != f.active)
                add_path(text::words(f.third_person), i, false, f.subject_type, f.object_type);
            if (!f.passive.empty()) {
                for (const char* aux : {"is", "are"}) {
                    std::vector<std::string> ws{aux};
                    for (auto& w : text::words(f.passive)) ws.push_back(w);
                    ws.push_back("by");
                    add_path(std::move(ws), i, true, f.object_type, f.subject_type);
                }
            }
        }
    }

    QueryIR parse(const std::vector<Token>& tokens) const {
        std::vector<detail::Config> live{detail::Config{}};
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            std::vector<detail::Config> next;
            for (const auto& c : live) step(c, tokens[i], i, next);
            if (next.empty()) fail(live, tokens, i);
            live = std::move(next);
        }
        for (auto& c : live)
            if (c.phase == detail::Phase::done) return std::move(c.ir);
        std::set<std::string> expected;
        for (const auto& c : live) expectations(c, expected);
        const std::size_t pos = tokens.empty() ? 0 : tokens.back().end;
        throw GrammarError(pos, tokens.size(), std::move(expected));
    }

    /// Descriptions of every token that extends `prefix` towards a complete
    /// query; `end_of_query` once the query is complete, empty when `prefix`
    /// cannot be extended at all.
    std::set<std::string> expected_next(const std::vector<Token>& prefix) const {
        std::vector<detail::Config> live{detail::Config{}};
        for (std::size_t i = 0; i < prefix.size() && !live.empty(); ++i) {
            std::vector<detail::Config> next;
            for (const auto& c : live) step(c, prefix[i], i, next);
            live = std::move(next);
        }
        std::set<std::string> out;
        for (const auto& c : live) expectations(c, out);
        return out;
    }

private:
    using Phase = detail::Phase;

    void add_path(std::vector<std::string> words, std::size_t frame, bool passive, std::string head,
                  std::string object) {
        paths_.push_back({std::move(words), frame, passive, std::move(head), std::move(object)});
    }

    std::vector<std::size_t> paths_for(const std::string& head_type) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < paths_.size(); ++i)
            if (paths_[i].head_type == head_type) out.push_back(i);
        return out;
    }

    static bool is_word(const Token& t) { return t.kind == TokenKind::keyword || t.kind == TokenKind::verb; }
    static bool is_literal(const Token& t, std::string_view lower) {
        return is_word(t) && text::to_lower(t.surface) == lower;
    }

    void expectations(const detail::Config& c, std::set<std::string>& out) const {
        switch (c.phase) {
        case Phase::start: out.insert("What"); out.insert("Which"); break;
        case Phase::after_what: out.insert("are"); break;
        case Phase::after_are: out.insert("the"); break;
        case Phase::head_noun:
            for (const auto& t : lex_.types)
                if (lex_.can_head_clause(t.id)) out.insert(t.plural);
            break;
        case Phase::after_head:
            out.insert("that");
            if (c.which)
                for (auto p : paths_for(c.pending.type)) out.insert(paths_[p].words.front());
            break;
        case Phase::np_that:
        case Phase::after_and: out.insert("that"); break;
        case Phase::verb:
            for (auto p : c.paths) out.insert(paths_[p].words[c.offset]);
            break;
        case Phase::after_verb: out.insert("the"); break;
        case Phase::np_noun: {
            const auto& type = lex_.type(paths_[c.verb].object_type);
            out.insert(type.singular);
            if (lex_.can_head_clause(type.id)) out.insert(type.plural);
            break;
        }
        case Phase::np_name: out.insert(std::string(name_class)); break;
        case Phase::chain_end: out.insert("and"); out.insert("?"); break;
        case Phase::done: out.insert(std::string(end_of_query)); break;
        }
    }

    void add_atom(detail::Config& c, QueryArg noun_phrase) const {
        const auto& path = paths_[c.verb];
        const auto& frame = lex_.frames[path.frame];
        QueryArg head = VariableRef{c.clauses.back().var};
        QueryArg subject = path.passive ? noun_phrase : head;
        QueryArg object = path.passive ? head : noun_phrase;
        if (frame.object_first) std::swap(subject, object);
        c.ir.atoms.push_back({frame.predicate, std::move(subject), std::move(object)});
    }

    void enter_verb(detail::Config& c, std::size_t next_index) const {
        c.phase = Phase::verb;
        c.paths = paths_for(c.clauses.back().type);
        c.offset = 0;
        c.verb_start = next_index;
    }

    void step(const detail::Config& c, const Token& t, std::size_t index, std::vector<detail::Config>& out) const {
        auto advance = [&](Phase p) {
            auto n = c;
            n.phase = p;
            out.push_back(std::move(n));
        };
        switch (c.phase) {
        case Phase::start:
            if (is_literal(t, "what")) advance(Phase::after_what);
            else if (is_literal(t, "which")) {
                auto n = c;
                n.which = true;
                n.phase = Phase::head_noun;
                out.push_back(std::move(n));
            }
            break;
        case Phase::after_what:
            if (is_literal(t, "are")) advance(Phase::after_are);
            break;
        case Phase::after_are:
            if (is_literal(t, "the")) advance(Phase::head_noun);
            break;
        case Phase::head_noun:
            if (t.kind == TokenKind::type_plural && lex_.can_head_clause(t.type_id)) {
                auto n = c;
                n.ir.answer_var = n.next_var++;
                n.ir.vars[n.ir.answer_var] = t.type_id;
                n.pending = {n.ir.answer_var, t.type_id};
                n.phase = Phase::after_head;
                out.push_back(std::move(n));
            }
            break;
        case Phase::after_head:
        case Phase::np_that:
            if (is_literal(t, "that")) {
                auto n = c;
                n.clauses.push_back(n.pending);
                enter_verb(n, index + 1);
                out.push_back(std::move(n));
            } else if (c.phase == Phase::after_head && c.which) {
                // "Which drugs treat ...": the verb starts right away.
                auto n = c;
                n.clauses.push_back(n.pending);
                enter_verb(n, index);
                step(n, t, index, out);
            }
            break;
        case Phase::verb: {
            if (!is_word(t)) break;
            const auto lower = text::to_lower(t.surface);
            std::vector<std::size_t> continuing;
            for (auto p : c.paths) {
                const auto& ws = paths_[p].words;
                if (ws[c.offset] != lower) continue;
                if (c.offset + 1 == ws.size()) {
                    auto n = c;
                    n.phase = Phase::after_verb;
                    n.verb = p;
                    n.paths.clear();
                    out.push_back(std::move(n));
                } else {
                    continuing.push_back(p);
                }
            }
            if (!continuing.empty()) {
                auto n = c;
                n.paths = std::move(continuing);
                ++n.offset;
                out.push_back(std::move(n));
            }
            break;
        }
        case Phase::after_verb:
            if (is_literal(t, "the")) advance(Phase::np_noun);
            break;
        case Phase::np_noun: {
            const auto& type = paths_[c.verb].object_type;
            if (t.type_id != type) break;
            if (t.kind == TokenKind::type_singular) {
                advance(Phase::np_name);
            } else if (t.kind == TokenKind::type_plural && lex_.can_head_clause(type)) {
                auto n = c;
                const int v = n.next_var++;
                n.ir.vars[v] = type;
                add_atom(n, VariableRef{v});
                n.pending = {v, type};
                n.phase = Phase::np_that;
                out.push_back(std::move(n));
            }
            break;
        }
        case Phase::np_name:
            if (t.kind == TokenKind::name) {
                auto n = c;
                add_atom(n, Constant{t.surface, paths_[c.verb].object_type});
                n.phase = Phase::chain_end;
                out.push_back(std::move(n));
            }
            break;
        case Phase::chain_end:
            if (is_literal(t, "and")) advance(Phase::after_and);
            else if (t.kind == TokenKind::question_mark) advance(Phase::done);
            break;
        case Phase::after_and:
            if (is_literal(t, "that")) {
                // Innermost attachment first; parse() keeps the first survivor.
                for (std::size_t depth = c.clauses.size(); depth-- > 0;) {
                    auto n = c;
                    n.clauses.resize(depth + 1);
                    enter_verb(n, index + 1);
                    out.push_back(std::move(n));
                }
            }
            break;
        case Phase::done: break;
        }
    }

    [[noreturn]] void fail(const std::vector<detail::Config>& live, const std::vector<Token>& tokens,
                           std::size_t index) const {
        const Token& t = tokens[index];
        for (const auto& c : live) {
            const bool verb_here = c.phase == Phase::verb || (c.phase == Phase::after_head && c.which);
            if (verb_here && is_word(t)) {
                const auto start = c.phase == Phase::verb ? c.verb_start : index;
                const auto& clause_type = c.phase == Phase::verb ? c.clauses.back().type : c.pending.type;
                // Words of the verb so far, including this one.
                std::vector<std::string> seen;
                for (std::size_t i = start; i <= index; ++i) seen.push_back(text::to_lower(tokens[i].surface));
                for (const auto& p : paths_) {
                    if (p.words.size() < seen.size() || !std::equal(seen.begin(), seen.end(), p.words.begin()))
                        continue;
                    const auto& frame = lex_.frames[p.frame];
                    throw TypeMismatch(frame.active, p.head_type, clause_type, tokens[start].begin);
                }
            }
            if (c.phase == Phase::np_noun &&
                (t.kind == TokenKind::type_singular || t.kind == TokenKind::type_plural)) {
                const auto& path = paths_[c.verb];
                throw TypeMismatch(lex_.frames[path.frame].active, path.object_type, t.type_id, t.begin);
            }
        }
        std::set<std::string> expected;
        for (const auto& c : live) expectations(c, expected);
        throw GrammarError(t.begin, index, std::move(expected));
    }

    const Lexicon& lex_;
    std::vector<detail::VerbPath> paths_;
};

inline QueryIR parse(const std::vector<Token>& tokens, const Lexicon& lex) { return Parser(lex).parse(tokens); }

inline std::set<std::string> expected_next(const std::vector<Token>& prefix, const Lexicon& lex) {
    return Parser(lex).expected_next(prefix);
}

} // namespace bioquery
