#pragma once

#include <map>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "text.hpp"

namespace bioquery {

struct EntityType {
    std::string id;  // same as the singular noun
    std::string singular;
    std::string plural;
};

/// A verb usable in a relative clause. Phrases are stored lowercased with
/// single spaces; `passive` is the participle without the trailing "by" and
/// empty when the frame has no passive form.
struct VerbFrame {
    std::string active;
    std::string third_person;
    std::string passive;
    std::string subject_type;
    std::string object_type;
    std::string predicate;
    bool object_first = false;  // predicate(object, subject) instead of predicate(subject, object)
};

class Lexicon {
public:
    std::vector<EntityType> types;
    std::vector<VerbFrame> frames;
    std::map<std::string, std::set<std::string>> known_names;  // type id -> names

    const EntityType* find_type(std::string_view id) const {
        for (const auto& t : types)
            if (t.id == id) return &t;
        return nullptr;
    }

    const EntityType& type(std::string_view id) const {
        if (const auto* t = find_type(id)) return *t;
        throw Error("unknown_type", "unknown entity type " + std::string(id));
    }

    /// True when a relative clause can be attached to a noun of this type,
    /// i.e. some frame accepts it as active subject or passive object.
    bool can_head_clause(std::string_view type_id) const {
        for (const auto& f : frames) {
            if (f.subject_type == type_id) return true;
            if (f.object_type == type_id && !f.passive.empty()) return true;
        }
        return false;
    }
};

namespace detail {

inline std::string normalize_phrase(std::string_view s) { return text::join(text::words(s), " "); }

inline bool is_predicate_name(const std::string& s) {
    static const std::regex re("[a-z][a-z0-9_]*");
    return std::regex_match(s, re);
}

} // namespace detail

/// Parses the line-oriented lexicon format:
///
///   type <TAB> singular <TAB> plural
///   verb <TAB> active <TAB> third_person <TAB> passive_phrase <TAB> subject <TAB> object <TAB> predicate [<TAB> so|os]
///
/// `passive_phrase` is "-" (or empty) when the verb has no passive form; a
/// trailing "by" is optional. The optional last column selects argument
/// order; "os" emits predicate(object, subject).
inline Lexicon load_lexicon(std::string_view contents) {
    Lexicon lex;
    struct PendingFrame {
        std::size_t line;
        VerbFrame frame;
    };
    std::vector<PendingFrame> pending;

    text::for_each_line(contents, [&](std::size_t line, std::string_view raw) {
        auto trimmed = text::trim(raw);
        if (trimmed.empty() || trimmed.front() == '#') return;
        auto cols = text::split(raw, '\t');
        for (auto& c : cols) c = std::string(text::trim(c));
        const auto kind = text::to_lower(cols[0]);
        if (kind == "type") {
            if (cols.size() != 3) throw LexiconError(line, "type entries need 3 columns");
            EntityType t{detail::normalize_phrase(cols[1]), detail::normalize_phrase(cols[1]),
                         detail::normalize_phrase(cols[2])};
            if (t.singular.empty() || t.plural.empty()) throw LexiconError(line, "empty noun");
            for (const auto& other : lex.types) {
                if (other.singular == t.singular || other.plural == t.plural || other.singular == t.plural ||
                    other.plural == t.singular)
                    throw LexiconError(line, "duplicate type noun '" + t.singular + "'");
            }
            lex.types.push_back(std::move(t));
        } else if (kind == "verb") {
            if (cols.size() != 7 && cols.size() != 8) throw LexiconError(line, "verb entries need 7 or 8 columns");
            VerbFrame f;
            f.active = detail::normalize_phrase(cols[1]);
            f.third_person = detail::normalize_phrase(cols[2]);
            auto passive = text::words(cols[3]);
            if (passive.size() == 1 && passive[0] == "-") passive.clear();
            if (!passive.empty() && passive.back() == "by") passive.pop_back();
            f.passive = text::join(passive, " ");
            f.subject_type = detail::normalize_phrase(cols[4]);
            f.object_type = detail::normalize_phrase(cols[5]);
            f.predicate = cols[6];
            if (cols.size() == 8) {
                const auto order = text::to_lower(cols[7]);
                if (order == "os") f.object_first = true;
                else if (order != "so") throw LexiconError(line, "argument order must be 'so' or 'os'");
            }
            if (f.active.empty() || f.third_person.empty()) throw LexiconError(line, "empty verb form");
            if (!detail::is_predicate_name(f.predicate))
                throw LexiconError(line, "invalid predicate name '" + f.predicate + "'");
            pending.push_back({line, std::move(f)});
        } else {
            throw LexiconError(line, "unknown entry kind '" + cols[0] + "'");
        }
    });

    for (auto& [line, f] : pending) {
        if (!lex.find_type(f.subject_type)) throw LexiconError(line, "unknown type '" + f.subject_type + "'");
        if (!lex.find_type(f.object_type)) throw LexiconError(line, "unknown type '" + f.object_type + "'");
        for (const auto& other : lex.frames) {
            if (other.active == f.active && other.subject_type == f.subject_type)
                throw LexiconError(line, "duplicate frame '" + f.active + "' for subject " + f.subject_type);
        }
        lex.frames.push_back(std::move(f));
    }
    return lex;
}

} // namespace bioquery
