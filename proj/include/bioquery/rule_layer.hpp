#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "program.hpp"

namespace bioquery {

struct LayerRule {
    int id = 0;
    Rule rule;
    bool operator==(const LayerRule&) const = default;
};

/// The program defining integrated predicates over source predicates.
/// Rule ids are 1-based file positions and survive slicing.
class RuleLayer {
public:
    RuleLayer() = default;

    static RuleLayer from_program(const Program& program) {
        RuleLayer layer;
        for (const auto& r : program.rules) layer.rules_.push_back({layer.next_id_++, r});
        layer.validate();
        return layer;
    }

    const std::vector<LayerRule>& rules() const noexcept { return rules_; }
    std::size_t size() const noexcept { return rules_.size(); }
    bool empty() const noexcept { return rules_.empty(); }

    /// First id not used by the layer it was parsed from; slices keep it.
    int next_id() const noexcept { return next_id_; }

    const LayerRule* find(int id) const {
        for (const auto& r : rules_)
            if (r.id == id) return &r;
        return nullptr;
    }

    std::set<std::string> head_predicates() const {
        std::set<std::string> out;
        for (const auto& r : rules_) out.insert(r.rule.head.predicate);
        return out;
    }

    Program program() const {
        Program p;
        for (const auto& r : rules_) p.rules.push_back(r.rule);
        return p;
    }

    /// Predicate name -> arity over every atom in the layer.
    std::map<std::string, std::size_t> arities() const {
        std::map<std::string, std::size_t> out;
        auto note = [&](const Atom& a) {
            auto [it, inserted] = out.emplace(a.predicate, a.arity());
            if (!inserted && it->second != a.arity()) throw ArityConflict(a.predicate, it->second, a.arity());
        };
        for (const auto& r : rules_) {
            note(r.rule.head);
            for (const auto& b : r.rule.body) note(b);
        }
        return out;
    }

    bool operator==(const RuleLayer&) const = default;

private:
    friend struct SliceAccess;

    void validate() const {
        for (const auto& r : rules_) check_safety(r.rule);
        arities();
    }

    std::vector<LayerRule> rules_;
    int next_id_ = 1;
};

inline RuleLayer parse_rules(std::string_view text) { return RuleLayer::from_program(parse_program(text)); }

struct PredicateGraph {
    std::set<std::string> nodes;
    std::map<std::string, std::set<std::string>> edges;  // head -> body predicates

    bool has_edge(const std::string& from, const std::string& to) const {
        auto it = edges.find(from);
        return it != edges.end() && it->second.count(to);
    }
    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& [from, tos] : edges) n += tos.size();
        return n;
    }
};

inline PredicateGraph dependency_graph(const RuleLayer& layer) {
    PredicateGraph g;
    for (const auto& r : layer.rules()) {
        const auto& head = r.rule.head.predicate;
        g.nodes.insert(head);
        for (const auto& b : r.rule.body) {
            g.nodes.insert(b.predicate);
            g.edges[head].insert(b.predicate);
        }
    }
    return g;
}

struct Slice {
    RuleLayer layer;
    std::vector<std::string> warnings;
};

struct SliceAccess {
    static RuleLayer select(const RuleLayer& from, const std::set<std::string>& heads) {
        RuleLayer out;
        out.next_id_ = from.next_id_;
        for (const auto& r : from.rules_)
            if (heads.count(r.rule.head.predicate)) out.rules_.push_back(r);
        return out;
    }
};

/// Rules whose head predicate is reachable from `goals` in the dependency
/// graph, goals included. Goals unknown to the layer produce warnings.
inline Slice slice(const RuleLayer& layer, const std::set<std::string>& goals) {
    const auto graph = dependency_graph(layer);
    Slice out;
    std::set<std::string> reached;
    std::vector<std::string> stack;
    for (const auto& g : goals) {
        if (!graph.nodes.count(g)) {
            out.warnings.push_back("predicate " + g + " does not occur in the rule layer");
            continue;
        }
        if (reached.insert(g).second) stack.push_back(g);
    }
    while (!stack.empty()) {
        auto p = std::move(stack.back());
        stack.pop_back();
        auto it = graph.edges.find(p);
        if (it == graph.edges.end()) continue;
        for (const auto& q : it->second)
            if (reached.insert(q).second) stack.push_back(q);
    }
    out.layer = SliceAccess::select(layer, reached);
    return out;
}

} // namespace bioquery
