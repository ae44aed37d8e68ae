#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "engine.hpp"
#include "error.hpp"
#include "text.hpp"

namespace bioquery {

/// A proof tree. Leaves are ingested facts cited with their source; steps
/// are rule applications whose children follow the rule body. `cost` is the
/// number of leaves, counted with multiplicity.
struct Justification {
    std::string predicate;
    std::vector<std::string> args;
    std::string source;  // leaves only
    int rule_id = 0;     // steps only
    std::vector<Justification> children;
    std::size_t cost = 0;
    bool leaf = false;

    bool is_leaf() const noexcept { return leaf; }

    std::string fact_text() const {
        Atom a{predicate, {}};
        for (const auto& s : args) a.args.push_back(Term::constant(s));
        return render(a);
    }

    bool operator==(const Justification&) const = default;
};

namespace detail {

// Best-first extraction over the derivation hypergraph (Knuth's
// generalization of Dijkstra). Facts are finalized in nondecreasing cost; a
// derivation becomes a candidate once all of its premises are final, so
// cyclic support can never be chosen.
class ProofSearch {
public:
    ProofSearch(const DerivedStore& store, FactRef target) : store_(store) {
        collect(target);
        run();
    }

    Justification build(FactRef f) const {
        const auto& node = nodes_[local_.at(f)];
        Justification j;
        j.predicate = store_.predicate(f);
        j.args = store_.args(f);
        j.cost = *node.cost;
        if (node.choice < 0) {
            j.leaf = true;
            std::vector<std::string> labels;
            for (auto s : store_.sources(f)) labels.push_back(store_.source_label(s));
            std::sort(labels.begin(), labels.end());
            j.source = text::join(labels, ", ");
        } else {
            const auto& d = store_.derivations(f)[static_cast<std::size_t>(node.choice)];
            j.rule_id = d.rule_id;
            for (const auto& p : d.premises) j.children.push_back(build(p));
        }
        return j;
    }

private:
    struct Node {
        FactRef fact;
        std::optional<std::size_t> cost;  // set once final
        int choice = -1;                  // derivation index, -1 for a leaf
    };
    struct Edge {
        std::size_t head;       // local node
        int derivation;         // index into the head fact's derivations
        std::size_t waiting;    // distinct premises not yet final
    };
    struct Candidate {
        std::size_t cost;
        int rule_id;  // -1 for a leaf, so leaves win ties
        std::size_t node;
        int derivation;
    };

    void collect(FactRef target) {
        std::vector<FactRef> stack{target};
        add_node(target);
        while (!stack.empty()) {
            auto f = stack.back();
            stack.pop_back();
            for (const auto& d : store_.derivations(f))
                for (const auto& p : d.premises)
                    if (add_node(p)) stack.push_back(p);
        }
    }

    bool add_node(FactRef f) {
        if (local_.count(f)) return false;
        local_.emplace(f, nodes_.size());
        nodes_.push_back({f, std::nullopt, -1});
        return true;
    }

    // Premise facts rendered once, for the lexicographic tie-break.
    const std::string& text_of(FactRef f) {
        auto it = text_cache_.find(f);
        if (it == text_cache_.end()) it = text_cache_.emplace(f, store_.fact_text(f)).first;
        return it->second;
    }

    bool worse(const Candidate& a, const Candidate& b) {
        if (a.cost != b.cost) return a.cost > b.cost;
        if (a.rule_id != b.rule_id) return a.rule_id > b.rule_id;
        if (a.node != b.node) return a.node > b.node;
        if (a.derivation < 0 || b.derivation < 0) return a.derivation > b.derivation;
        const auto& f = nodes_[a.node].fact;
        const auto& pa = store_.derivations(f)[static_cast<std::size_t>(a.derivation)].premises;
        const auto& pb = store_.derivations(f)[static_cast<std::size_t>(b.derivation)].premises;
        const std::size_t n = std::min(pa.size(), pb.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto& ta = text_of(pa[i]);
            const auto& tb = text_of(pb[i]);
            if (ta != tb) return ta > tb;
        }
        return pa.size() > pb.size();
    }

    void run() {
        auto cmp = [this](const Candidate& a, const Candidate& b) { return worse(a, b); };
        std::priority_queue<Candidate, std::vector<Candidate>, decltype(cmp)> heap(cmp);

        std::vector<Edge> edges;
        std::vector<std::vector<std::size_t>> uses(nodes_.size());  // node -> edges it is a premise of
        for (std::size_t n = 0; n < nodes_.size(); ++n) {
            const auto f = nodes_[n].fact;
            if (!store_.sources(f).empty()) heap.push({1, -1, n, -1});
            const auto& ds = store_.derivations(f);
            for (std::size_t d = 0; d < ds.size(); ++d) {
                std::vector<std::size_t> distinct;
                for (const auto& p : ds[d].premises) {
                    const auto local = local_.at(p);
                    if (std::find(distinct.begin(), distinct.end(), local) == distinct.end()) distinct.push_back(local);
                }
                const auto e = edges.size();
                edges.push_back({n, static_cast<int>(d), distinct.size()});
                for (auto p : distinct) uses[p].push_back(e);
                if (distinct.empty()) heap.push({0, ds[d].rule_id, n, static_cast<int>(d)});
            }
        }

        while (!heap.empty()) {
            const auto c = heap.top();
            heap.pop();
            auto& node = nodes_[c.node];
            if (node.cost) continue;
            node.cost = c.cost;
            node.choice = c.derivation;
            for (auto e : uses[c.node]) {
                auto& edge = edges[e];
                if (--edge.waiting != 0 || nodes_[edge.head].cost) continue;
                const auto& d = store_.derivations(nodes_[edge.head].fact)[static_cast<std::size_t>(edge.derivation)];
                std::size_t cost = 0;
                for (const auto& p : d.premises) cost += *nodes_[local_.at(p)].cost;
                heap.push({cost, d.rule_id, edge.head, edge.derivation});
            }
        }
    }

    const DerivedStore& store_;
    std::map<FactRef, std::size_t> local_;
    std::vector<Node> nodes_;
    std::map<FactRef, std::string> text_cache_;
};

} // namespace detail

/// Minimum-cost proof of `fact`. Ties prefer a leaf, then the smaller rule
/// id, then the lexicographically smaller premise list.
inline Justification min_proof(const DerivedStore& store, FactRef fact) {
    return detail::ProofSearch(store, fact).build(fact);
}

inline Justification min_proof(const DerivedStore& store, std::string_view predicate,
                               const std::vector<std::string>& args) {
    auto f = store.find(predicate, args);
    if (!f) {
        Atom a{std::string(predicate), {}};
        for (const auto& s : args) a.args.push_back(Term::constant(s));
        throw FactNotFound(render(a));
    }
    return min_proof(store, *f);
}

using TemplateTable = std::map<std::string, std::string>;

/// `predicate TAB template` per line; `#` starts a comment line.
inline TemplateTable load_templates(std::string_view contents) {
    TemplateTable out;
    text::for_each_line(contents, [&](std::size_t line, std::string_view raw) {
        if (text::trim(raw).empty() || text::trim(raw).front() == '#') return;
        const auto tab = raw.find('\t');
        if (tab == std::string_view::npos)
            throw Error("template_error", "template line " + std::to_string(line) + ": expected predicate TAB template");
        out[std::string(text::trim(raw.substr(0, tab)))] = std::string(text::trim(raw.substr(tab + 1)));
    });
    return out;
}

namespace detail {

inline void collect_leaves(const Justification& j, std::vector<const Justification*>& out) {
    if (j.is_leaf()) {
        out.push_back(&j);
        return;
    }
    for (const auto& c : j.children) collect_leaves(c, out);
}

inline std::string fill(std::string_view tmpl, const Justification& leaf) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                const auto key = tmpl.substr(i + 1, close - i - 1);
                std::optional<std::string> value;
                if (key == "source") value = leaf.source;
                else if (key.size() > 3 && key.substr(0, 3) == "arg") {
                    const auto n = static_cast<std::size_t>(std::atoi(std::string(key.substr(3)).c_str()));
                    if (n >= 1 && n <= leaf.args.size()) value = leaf.args[n - 1];
                }
                if (value) {
                    out += *value;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

} // namespace detail

/// Cited evidence, left to right, one clause per leaf joined by " and ".
inline std::string verbalize(const Justification& j, const TemplateTable& templates) {
    std::vector<const Justification*> leaves;
    detail::collect_leaves(j, leaves);
    std::vector<std::string> clauses;
    for (const auto* leaf : leaves) {
        auto it = templates.find(leaf->predicate);
        if (it == templates.end()) throw MissingTemplate(leaf->predicate);
        clauses.push_back(detail::fill(it->second, *leaf));
    }
    return text::join(clauses, " and ");
}

/// Nested document mirroring the proof: every node has `fact`, `cost` and
/// `children`; leaves add `source`, steps add `rule`.
inline nlohmann::json render_tree(const Justification& j) {
    nlohmann::json node;
    node["fact"] = j.fact_text();
    node["predicate"] = j.predicate;
    node["args"] = j.args;
    node["cost"] = j.cost;
    if (j.is_leaf()) node["source"] = j.source;
    else node["rule"] = j.rule_id;
    node["children"] = nlohmann::json::array();
    for (const auto& c : j.children) node["children"].push_back(render_tree(c));
    return node;
}

} // namespace bioquery
