#pragma once

#include <map>
#include <set>
#include <string>

#include "cnl_parser.hpp"
#include "program.hpp"
#include "text.hpp"

namespace bioquery {

/// Two-letter variable prefix per entity type. The default types have fixed
/// prefixes; anything else uses its first two letters, uppercased.
inline std::string variable_prefix(const std::string& type) {
    static const std::map<std::string, std::string> fixed{
        {"drug", "DR"}, {"gene", "GN"}, {"disease", "DS"}, {"category", "CT"}, {"side effect", "SE"}};
    if (auto it = fixed.find(type); it != fixed.end()) return it->second;
    std::string out;
    for (char c : type) {
        if (text::is_alnum(c) && out.size() < 2) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    if (out.empty() || !text::is_upper(out.front())) out.insert(out.begin(), 'V');
    return out;
}

/// Name of the answer relation, e.g. what_be_genes or what_be_side_effects.
inline std::string answer_predicate(const std::string& plural) {
    std::string out = "what_be_";
    for (char c : plural) out += c == ' ' ? '_' : c;
    return out;
}

/// Compiles a parsed query into a single rule. Variables are named
/// prefix + counter per type, counted in order of first occurrence with the
/// answer variable first; body atoms keep the query's atom order.
inline Rule compile(const QueryIR& ir, const Lexicon& lex) {
    // Types sharing a prefix would otherwise share variable names.
    std::map<std::string, std::string> prefix_of;
    std::map<std::string, std::string> owner;
    for (const auto& [id, type] : ir.vars) {
        if (prefix_of.count(type)) continue;
        std::string prefix = variable_prefix(type);
        while (owner.count(prefix) && owner[prefix] != type) prefix += 'X';
        owner[prefix] = type;
        prefix_of[type] = prefix;
    }

    std::map<int, std::string> names;
    std::map<std::string, int> counters;
    auto name_of = [&](int var) -> const std::string& {
        auto it = names.find(var);
        if (it != names.end()) return it->second;
        const auto& type = ir.vars.at(var);
        return names[var] = prefix_of.at(type) + std::to_string(++counters[type]);
    };
    auto term_of = [&](const QueryArg& arg) {
        if (const auto* v = std::get_if<VariableRef>(&arg)) return Term::variable(name_of(v->id));
        return Term::constant(std::get<Constant>(arg).value);
    };

    Rule rule;
    rule.head.predicate = answer_predicate(lex.type(ir.answer_type()).plural);
    rule.head.args.push_back(Term::variable(name_of(ir.answer_var)));
    for (const auto& atom : ir.atoms) rule.body.push_back({atom.predicate, {term_of(atom.first), term_of(atom.second)}});
    return rule;
}

} // namespace bioquery
