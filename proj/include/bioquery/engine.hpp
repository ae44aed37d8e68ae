#pragma once

// Bottom-up evaluation of positive Datalog over a FactStore.
//
// Semi-naive: in each round, rule i's body position k reads the previous
// round's delta while positions before k read only older facts and positions
// after k read everything up to the current delta. Every rule instance is
// therefore enumerated exactly once, in the round its newest premise
// appeared, and its derivation is recorded against the head fact.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "error.hpp"
#include "fact_store.hpp"
#include "program.hpp"
#include "rule_layer.hpp"

namespace bioquery {

struct FactRef {
    std::uint32_t relation = 0;
    std::uint32_t row = 0;
    auto operator<=>(const FactRef&) const = default;
};

struct Derivation {
    int rule_id = 0;
    std::vector<FactRef> premises;  // one per body atom, in body order
    bool operator==(const Derivation&) const = default;
};

namespace detail {

struct SymbolsHash {
    std::size_t operator()(const std::vector<Symbol>& v) const noexcept {
        std::size_t h = v.size();
        for (auto s : v) h = h * 1000003u ^ (s + 0x9e3779b9u + (h << 6) + (h >> 2));
        return h;
    }
};

class Evaluator;

} // namespace detail

/// All facts visible to one evaluation: the relevant ingested facts plus
/// everything derived, each with its source labels and recorded derivations.
class DerivedStore {
public:
    struct Relation {
        std::string name;
        std::size_t arity = 0;
        std::vector<Symbol> data;  // rows, flattened
        std::unordered_map<std::vector<Symbol>, std::uint32_t, detail::SymbolsHash> lookup;
        std::vector<std::unordered_map<Symbol, std::vector<std::uint32_t>>> index;  // per argument position
        std::vector<std::vector<std::uint32_t>> sources;                              // per row
        std::vector<std::vector<Derivation>> derivations;                             // per row

        std::size_t size() const noexcept { return sources.size(); }
        std::span<const Symbol> row(std::uint32_t r) const {
            return {data.data() + static_cast<std::size_t>(r) * arity, arity};
        }
    };

    std::size_t relation_count() const noexcept { return relations_.size(); }
    const Relation& relation(std::uint32_t id) const { return relations_.at(id); }

    std::optional<std::uint32_t> find_relation(std::string_view name) const {
        auto it = relation_ids_.find(std::string(name));
        if (it == relation_ids_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<Symbol> find_symbol(std::string_view s) const {
        if (auto id = facts_->symbols().find(s)) return id;
        if (auto it = local_ids_.find(std::string(s)); it != local_ids_.end()) return it->second;
        return std::nullopt;
    }

    const std::string& symbol_text(Symbol s) const {
        const auto base = facts_->symbols().size();
        return s < base ? facts_->symbols().resolve(s) : local_symbols_.at(s - base);
    }

    std::optional<FactRef> find(std::string_view predicate, const std::vector<std::string>& args) const {
        auto rel = find_relation(predicate);
        if (!rel) return std::nullopt;
        std::vector<Symbol> key;
        for (const auto& a : args) {
            auto s = find_symbol(a);
            if (!s) return std::nullopt;
            key.push_back(*s);
        }
        const auto& r = relations_[*rel];
        auto it = r.lookup.find(key);
        if (it == r.lookup.end()) return std::nullopt;
        return FactRef{*rel, it->second};
    }

    std::span<const Symbol> tuple(FactRef f) const { return relations_.at(f.relation).row(f.row); }

    std::vector<std::string> args(FactRef f) const {
        std::vector<std::string> out;
        for (auto s : tuple(f)) out.push_back(symbol_text(s));
        return out;
    }

    const std::string& predicate(FactRef f) const { return relations_.at(f.relation).name; }

    /// `pred("a","b")`, the same form the program renderer uses.
    std::string fact_text(FactRef f) const {
        Atom a{predicate(f), {}};
        for (auto& s : args(f)) a.args.push_back(Term::constant(std::move(s)));
        return render(a);
    }

    const std::vector<std::uint32_t>& sources(FactRef f) const { return relations_.at(f.relation).sources.at(f.row); }
    const std::string& source_label(std::uint32_t id) const { return facts_->sources().at(id); }
    const std::vector<Derivation>& derivations(FactRef f) const {
        return relations_.at(f.relation).derivations.at(f.row);
    }

    const Rule* rule(int id) const {
        auto it = rules_.find(id);
        return it == rules_.end() ? nullptr : &it->second;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& r : relations_) n += r.size();
        return n;
    }

    /// Every fact as (predicate, args); for comparisons in tests and tools.
    std::set<std::pair<std::string, std::vector<std::string>>> contents() const {
        std::set<std::pair<std::string, std::vector<std::string>>> out;
        for (std::uint32_t r = 0; r < relations_.size(); ++r)
            for (std::uint32_t i = 0; i < relations_[r].size(); ++i) out.emplace(relations_[r].name, args({r, i}));
        return out;
    }

    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    friend class detail::Evaluator;

    std::shared_ptr<const FactStore> facts_;
    std::vector<Relation> relations_;
    std::map<std::string, std::uint32_t> relation_ids_;
    std::vector<std::string> local_symbols_;
    std::unordered_map<std::string, Symbol> local_ids_;
    std::map<int, Rule> rules_;
    std::vector<std::string> warnings_;
};

namespace detail {

class Evaluator {
public:
    Evaluator(std::span<const LayerRule> rules, std::shared_ptr<const FactStore> facts) {
        out_.facts_ = std::move(facts);
        prepare(rules);
    }

    DerivedStore run() {
        // Rules without a body fire once, before any joins.
        for (const auto& r : compiled_)
            if (r.body.empty()) pending_.push_back({r.head.relation, instantiate(r.head, {}), r.id, {}});
        flush();

        std::vector<std::size_t> old_end(out_.relations_.size(), 0);
        std::vector<std::size_t> delta_end(out_.relations_.size());
        for (std::size_t i = 0; i < delta_end.size(); ++i) delta_end[i] = out_.relations_[i].size();

        for (;;) {
            bool any_delta = false;
            for (std::size_t i = 0; i < delta_end.size(); ++i) any_delta |= delta_end[i] > old_end[i];
            if (!any_delta) break;
            for (const auto& r : compiled_) {
                for (std::size_t k = 0; k < r.body.size(); ++k) {
                    const auto rel = r.body[k].relation;
                    if (delta_end[rel] == old_end[rel]) continue;
                    join(r, k, old_end, delta_end);
                    flush();
                }
            }
            for (std::size_t i = 0; i < delta_end.size(); ++i) {
                old_end[i] = delta_end[i];
                delta_end[i] = out_.relations_[i].size();
            }
        }
        return std::move(out_);
    }

private:
    struct Arg {
        bool variable = false;
        std::uint32_t value = 0;  // slot for variables, symbol for constants
    };
    struct CAtom {
        std::uint32_t relation = 0;
        std::vector<Arg> args;
    };
    struct CRule {
        int id = 0;
        CAtom head;
        std::vector<CAtom> body;
        std::size_t slots = 0;
    };
    struct Pending {
        std::uint32_t relation;
        std::vector<Symbol> tuple;
        int rule_id;
        std::vector<FactRef> premises;
    };
    struct Range {
        std::size_t lo;
        std::size_t hi;
    };

    Symbol symbol(const std::string& s) {
        if (auto id = out_.find_symbol(s)) return *id;
        const auto id = static_cast<Symbol>(out_.facts_->symbols().size() + out_.local_symbols_.size());
        out_.local_symbols_.push_back(s);
        out_.local_ids_.emplace(s, id);
        return id;
    }

    std::uint32_t relation(const std::string& name, std::size_t arity) {
        auto it = out_.relation_ids_.find(name);
        if (it != out_.relation_ids_.end()) {
            const auto& rel = out_.relations_[it->second];
            if (rel.arity != arity) throw ArityConflict(name, rel.arity, arity);
            return it->second;
        }
        const auto id = static_cast<std::uint32_t>(out_.relations_.size());
        DerivedStore::Relation rel;
        rel.name = name;
        rel.arity = arity;
        rel.index.resize(arity);
        out_.relations_.push_back(std::move(rel));
        out_.relation_ids_.emplace(name, id);
        return id;
    }

    void prepare(std::span<const LayerRule> rules) {
        std::set<std::string> heads;
        for (const auto& r : rules) {
            check_safety(r.rule);
            if (!out_.rules_.emplace(r.id, r.rule).second)
                throw Error("duplicate_rule_id", "rule id " + std::to_string(r.id) + " used twice");
            heads.insert(r.rule.head.predicate);
        }
        for (const auto& r : rules) {
            std::map<std::string, std::uint32_t> slots;
            auto compile_atom = [&](const Atom& a) {
                CAtom c;
                c.relation = relation(a.predicate, a.arity());
                for (const auto& t : a.args) {
                    if (t.is_variable()) {
                        auto [it, inserted] = slots.emplace(t.text, static_cast<std::uint32_t>(slots.size()));
                        c.args.push_back({true, it->second});
                    } else {
                        c.args.push_back({false, symbol(t.text)});
                    }
                }
                return c;
            };
            CRule c;
            c.id = r.id;
            for (const auto& b : r.rule.body) c.body.push_back(compile_atom(b));
            c.head = compile_atom(r.rule.head);
            c.slots = slots.size();
            compiled_.push_back(std::move(c));
        }

        // Ingested facts for every predicate the program mentions.
        const auto& facts = *out_.facts_;
        for (std::uint32_t id = 0; id < out_.relations_.size(); ++id) {
            const auto name = out_.relations_[id].name;
            const auto* table = facts.table(name);
            if (!table) {
                if (!heads.count(name)) out_.warnings_.push_back("no facts or rules for predicate " + name);
                continue;
            }
            if (out_.relations_[id].arity != 2) throw ArityConflict(name, 2, out_.relations_[id].arity);
            for (const auto& f : table->rows) {
                auto [row, inserted] = insert(id, {f.first, f.second});
                out_.relations_[id].sources[row].push_back(f.source);
            }
        }
    }

    std::pair<std::uint32_t, bool> insert(std::uint32_t id, std::vector<Symbol> tuple) {
        auto& rel = out_.relations_[id];
        auto it = rel.lookup.find(tuple);
        if (it != rel.lookup.end()) return {it->second, false};
        const auto row = static_cast<std::uint32_t>(rel.size());
        for (std::size_t p = 0; p < tuple.size(); ++p) rel.index[p][tuple[p]].push_back(row);
        rel.data.insert(rel.data.end(), tuple.begin(), tuple.end());
        rel.sources.emplace_back();
        rel.derivations.emplace_back();
        rel.lookup.emplace(std::move(tuple), row);
        return {row, true};
    }

    std::vector<Symbol> instantiate(const CAtom& a, const std::vector<Symbol>& binding) const {
        std::vector<Symbol> t;
        t.reserve(a.args.size());
        for (const auto& arg : a.args) t.push_back(arg.variable ? binding[arg.value] : arg.value);
        return t;
    }

    void flush() {
        for (auto& p : pending_) {
            auto [row, inserted] = insert(p.relation, std::move(p.tuple));
            auto& ds = out_.relations_[p.relation].derivations[row];
            Derivation d{p.rule_id, std::move(p.premises)};
            if (std::find(ds.begin(), ds.end(), d) == ds.end()) ds.push_back(std::move(d));
        }
        pending_.clear();
    }

    // Body atoms in join order: most bound arguments first, then the
    // smaller range, then body position.
    std::vector<std::size_t> join_order(const CRule& r, const std::vector<Range>& ranges) const {
        std::vector<std::size_t> order;
        std::vector<char> used(r.body.size(), 0);
        std::vector<char> bound(r.slots, 0);
        for (std::size_t step = 0; step < r.body.size(); ++step) {
            std::size_t best = r.body.size();
            std::size_t best_bound = 0, best_size = 0;
            for (std::size_t j = 0; j < r.body.size(); ++j) {
                if (used[j]) continue;
                std::size_t nb = 0;
                for (const auto& a : r.body[j].args) nb += !a.variable || bound[a.value];
                const std::size_t size = ranges[j].hi - ranges[j].lo;
                if (best == r.body.size() || nb > best_bound || (nb == best_bound && size < best_size)) {
                    best = j;
                    best_bound = nb;
                    best_size = size;
                }
            }
            used[best] = 1;
            order.push_back(best);
            for (const auto& a : r.body[best].args)
                if (a.variable) bound[a.value] = 1;
        }
        return order;
    }

    void join(const CRule& r, std::size_t delta_pos, const std::vector<std::size_t>& old_end,
              const std::vector<std::size_t>& delta_end) {
        std::vector<Range> ranges(r.body.size());
        for (std::size_t j = 0; j < r.body.size(); ++j) {
            const auto rel = r.body[j].relation;
            if (j < delta_pos) ranges[j] = {0, old_end[rel]};
            else if (j == delta_pos) ranges[j] = {old_end[rel], delta_end[rel]};
            else ranges[j] = {0, delta_end[rel]};
            if (ranges[j].lo == ranges[j].hi) return;
        }
        const auto order = join_order(r, ranges);
        std::vector<Symbol> binding(r.slots, 0);
        std::vector<char> bound(r.slots, 0);
        std::vector<FactRef> premises(r.body.size());
        match(r, order, 0, ranges, binding, bound, premises);
    }

    void match(const CRule& r, const std::vector<std::size_t>& order, std::size_t depth,
               const std::vector<Range>& ranges, std::vector<Symbol>& binding, std::vector<char>& bound,
               std::vector<FactRef>& premises) {
        if (depth == order.size()) {
            pending_.push_back({r.head.relation, instantiate(r.head, binding), r.id, premises});
            return;
        }
        const auto j = order[depth];
        const auto& atom = r.body[j];
        const auto& rel = out_.relations_[atom.relation];
        const auto [lo, hi] = ranges[j];

        auto try_row = [&](std::uint32_t row) {
            const auto t = rel.row(row);
            std::vector<std::uint32_t> newly;
            bool ok = true;
            for (std::size_t p = 0; p < atom.args.size() && ok; ++p) {
                const auto& a = atom.args[p];
                if (!a.variable) {
                    ok = t[p] == a.value;
                } else if (bound[a.value]) {
                    ok = binding[a.value] == t[p];
                } else {
                    binding[a.value] = t[p];
                    bound[a.value] = 1;
                    newly.push_back(a.value);
                }
            }
            if (ok) {
                premises[j] = {atom.relation, row};
                match(r, order, depth + 1, ranges, binding, bound, premises);
            }
            for (auto s : newly) bound[s] = 0;
        };

        // Narrowest index bucket among the bound positions.
        const std::vector<std::uint32_t>* bucket = nullptr;
        bool indexed = false;
        for (std::size_t p = 0; p < atom.args.size(); ++p) {
            const auto& a = atom.args[p];
            if (a.variable && !bound[a.value]) continue;
            const Symbol v = a.variable ? binding[a.value] : a.value;
            indexed = true;
            auto it = rel.index[p].find(v);
            if (it == rel.index[p].end()) return;
            if (!bucket || it->second.size() < bucket->size()) bucket = &it->second;
        }
        if (indexed) {
            auto first = std::lower_bound(bucket->begin(), bucket->end(), static_cast<std::uint32_t>(lo));
            for (auto it = first; it != bucket->end() && *it < hi; ++it) try_row(*it);
        } else {
            for (std::size_t row = lo; row < hi; ++row) try_row(static_cast<std::uint32_t>(row));
        }
    }

    DerivedStore out_;
    std::vector<CRule> compiled_;
    std::vector<Pending> pending_;
};

} // namespace detail

/// Least fixpoint of `rules` over `facts`, with every derivation recorded.
inline DerivedStore evaluate(std::span<const LayerRule> rules, std::shared_ptr<const FactStore> facts) {
    return detail::Evaluator(rules, std::move(facts)).run();
}

/// Evaluates a (sliced) rule layer together with a query rule. The query
/// rule takes id `layer.next_id()`; its head predicate must be new.
inline DerivedStore evaluate(const RuleLayer& layer, const Rule& query, std::shared_ptr<const FactStore> facts) {
    for (const auto& r : layer.rules()) {
        const auto& p = query.head.predicate;
        bool clash = r.rule.head.predicate == p;
        for (const auto& b : r.rule.body) clash |= b.predicate == p;
        if (clash) throw Error("invalid_query", "query head predicate " + p + " occurs in the rule layer");
    }
    std::vector<LayerRule> rules(layer.rules().begin(), layer.rules().end());
    rules.push_back({layer.next_id(), query});
    return evaluate(rules, std::move(facts));
}

/// Non-owning convenience: `facts` must outlive the returned store.
inline DerivedStore evaluate(std::span<const LayerRule> rules, const FactStore& facts) {
    return evaluate(rules, std::shared_ptr<const FactStore>(&facts, [](const FactStore*) {}));
}

/// Tuples of `predicate`, resolved to strings and sorted.
inline std::vector<std::vector<std::string>> answers(const DerivedStore& store, std::string_view predicate) {
    std::vector<std::vector<std::string>> out;
    auto rel = store.find_relation(predicate);
    if (!rel) return out;
    for (std::uint32_t row = 0; row < store.relation(*rel).size(); ++row) out.push_back(store.args({*rel, row}));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace bioquery
