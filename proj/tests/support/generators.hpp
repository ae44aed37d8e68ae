#pragma once

// Seeded random instances for the property tests and the acceptance suite.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bioquery/bioquery.hpp"

namespace bqtest {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
    std::size_t between(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_);
    }
    bool chance(double p) { return std::bernoulli_distribution(p)(gen_); }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

private:
    std::mt19937_64 gen_;
};

struct ProgramShape {
    std::size_t max_edb = 3;     // source predicates, arity 2
    std::size_t max_idb = 3;     // derived predicates, arity 1 or 2
    std::size_t max_rules = 8;
    std::size_t max_facts = 40;
    std::size_t constants = 6;
    std::size_t max_body = 3;
    double edb_head = 0.0;       // chance that a rule defines a source predicate too
    double constant_arg = 0.1;   // chance of a constant in a rule argument
};

struct RandomProgram {
    std::vector<bioquery::LayerRule> rules;
    std::shared_ptr<bioquery::FactStore> facts = std::make_shared<bioquery::FactStore>();
    std::vector<std::string> idb;
    std::vector<std::string> edb;
};

namespace detail {

struct Pred {
    std::string name;
    std::size_t arity;
};

inline bioquery::Atom random_atom(Rng& rng, const Pred& p, const std::vector<std::string>& vars,
                                  const std::vector<std::string>& consts, double constant_arg) {
    bioquery::Atom a{p.name, {}};
    for (std::size_t i = 0; i < p.arity; ++i) {
        if (rng.chance(constant_arg)) a.args.push_back(bioquery::Term::constant(rng.pick(consts)));
        else a.args.push_back(bioquery::Term::variable(rng.pick(vars)));
    }
    return a;
}

} // namespace detail

/// Positive, possibly recursive programs over a handful of constants. Every
/// rule is safe: head variables are drawn from those bound in the body.
inline RandomProgram random_program(Rng& rng, const ProgramShape& shape = {}) {
    RandomProgram out;
    std::vector<std::string> consts;
    for (std::size_t i = 0; i < shape.constants; ++i) consts.push_back("c" + std::to_string(i));
    const std::vector<std::string> vars{"X", "Y", "Z", "W"};
    const std::vector<std::string> sources{"S1", "S2"};

    std::vector<detail::Pred> edb, idb;
    const auto n_edb = rng.between(1, shape.max_edb);
    const auto n_idb = rng.between(1, shape.max_idb);
    for (std::size_t i = 0; i < n_edb; ++i) edb.push_back({"e" + std::to_string(i), 2});
    for (std::size_t i = 0; i < n_idb; ++i) idb.push_back({"p" + std::to_string(i), rng.between(1, 2)});
    for (const auto& p : edb) out.edb.push_back(p.name);
    for (const auto& p : idb) out.idb.push_back(p.name);
    std::vector<detail::Pred> all = edb;
    all.insert(all.end(), idb.begin(), idb.end());

    const auto n_facts = rng.between(0, shape.max_facts);
    for (std::size_t i = 0; i < n_facts; ++i)
        out.facts->add(rng.pick(edb).name, rng.pick(consts), rng.pick(consts), rng.pick(sources));

    const auto n_rules = rng.between(1, shape.max_rules);
    for (std::size_t r = 0; r < n_rules; ++r) {
        const auto& head_pred = rng.chance(shape.edb_head) ? rng.pick(edb) : rng.pick(idb);
        bioquery::Rule rule;
        const auto body_len = rng.between(1, shape.max_body);
        std::vector<std::string> bound;
        for (std::size_t i = 0; i < body_len; ++i) {
            rule.body.push_back(detail::random_atom(rng, rng.pick(all), vars, consts, shape.constant_arg));
            for (const auto& t : rule.body.back().args)
                if (t.is_variable()) bound.push_back(t.text);
        }
        rule.head.predicate = head_pred.name;
        for (std::size_t i = 0; i < head_pred.arity; ++i) {
            if (bound.empty() || rng.chance(shape.constant_arg))
                rule.head.args.push_back(bioquery::Term::constant(rng.pick(consts)));
            else rule.head.args.push_back(bioquery::Term::variable(rng.pick(bound)));
        }
        out.rules.push_back({static_cast<int>(r + 1), std::move(rule)});
    }
    return out;
}

/// A rule layer, its facts, and a query rule whose head is fresh.
struct SliceInstance {
    bioquery::RuleLayer layer;
    bioquery::Rule query;
    std::shared_ptr<bioquery::FactStore> facts;
};

inline SliceInstance random_slice_instance(Rng& rng) {
    ProgramShape shape;
    shape.max_edb = 4;
    shape.max_idb = 5;
    shape.max_rules = 10;
    shape.max_body = 2;
    auto p = random_program(rng, shape);
    bioquery::Program program;
    for (auto& r : p.rules) program.rules.push_back(r.rule);

    std::vector<std::string> preds = p.idb;
    preds.insert(preds.end(), p.edb.begin(), p.edb.end());
    SliceInstance out{bioquery::RuleLayer::from_program(program), {}, p.facts};
    const auto arities = out.layer.arities();
    out.query.head = {"q", {bioquery::Term::variable("X")}};
    const auto n = rng.between(1, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& name = rng.pick(preds);
        auto it = arities.find(name);
        const auto arity = it == arities.end() ? 2 : it->second;
        bioquery::Atom a{name, {bioquery::Term::variable(i == 0 ? "X" : "Y")}};
        if (arity == 2) a.args.push_back(bioquery::Term::variable(i == 0 ? "Y" : "X"));
        out.query.body.push_back(std::move(a));
    }
    return out;
}

/// Sentences of the query language, generated from the lexicon. `depth`
/// bounds the nesting of relative clauses.
class SentenceGenerator {
public:
    SentenceGenerator(const bioquery::Lexicon& lex, std::uint64_t seed) : lex_(lex), rng_(seed) {}

    std::string next(std::size_t depth = 4) {
        std::vector<const bioquery::EntityType*> heads;
        for (const auto& t : lex_.types)
            if (lex_.can_head_clause(t.id)) heads.push_back(&t);
        const auto* t = rng_.pick(heads);
        if (rng_.chance(0.5)) return "What are the " + t->plural + rel_chain(t->id, depth) + "?";
        // "Which" queries may leave out the first "that".
        return "Which " + t->plural + rel_chain(t->id, depth, rng_.chance(0.5)) + "?";
    }

private:
    std::string rel_chain(const std::string& type, std::size_t depth, bool bare = false) {
        std::string s = (bare ? "" : " that") + verb_phrase(type, depth);
        while (rng_.chance(0.3)) s += " and that" + verb_phrase(type, depth);
        return s;
    }

    std::string verb_phrase(const std::string& type, std::size_t depth) {
        struct Option {
            const bioquery::VerbFrame* frame;
            bool passive;
        };
        std::vector<Option> options;
        for (const auto& f : lex_.frames) {
            if (f.subject_type == type) options.push_back({&f, false});
            if (f.object_type == type && !f.passive.empty()) options.push_back({&f, true});
        }
        const auto& o = rng_.pick(options);
        std::string s;
        std::string np_type;
        if (o.passive) {
            s = std::string(rng_.chance(0.5) ? " are " : " is ") + o.frame->passive + " by";
            np_type = o.frame->subject_type;
        } else {
            s = " " + (rng_.chance(0.5) ? o.frame->active : o.frame->third_person);
            np_type = o.frame->object_type;
        }
        return s + noun_phrase(np_type, depth);
    }

    std::string noun_phrase(const std::string& type, std::size_t depth) {
        const auto& t = lex_.type(type);
        if (depth > 1 && lex_.can_head_clause(type) && rng_.chance(0.35))
            return " the " + t.plural + rel_chain(type, depth - 1);
        static const std::vector<std::string> names{"DLG4", "Epinephrine", "ADRB1", "Asthma", "\"beta blocker\"",
                                                    "5HT", "Nausea Type 2", "\"type 2 diabetes\""};
        return " the " + t.singular + " " + rng_.pick(names);
    }

    const bioquery::Lexicon& lex_;
    Rng rng_;
};

} // namespace bqtest
