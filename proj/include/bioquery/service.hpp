#pragma once

// The whole pipeline behind one object: parse, compile, slice, evaluate,
// explain. Shared by the CLI and the HTTP server.

#include <algorithm>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cnl_parser.hpp"
#include "compiler.hpp"
#include "engine.hpp"
#include "error.hpp"
#include "explainer.hpp"
#include "fact_store.hpp"
#include "lexicon.hpp"
#include "rule_layer.hpp"

namespace bioquery {

struct KnowledgeBase {
    Lexicon lexicon;
    RuleLayer layer;
    TemplateTable templates;
    std::shared_ptr<const FactStore> facts = std::make_shared<FactStore>();
};

struct KnowledgeBasePaths {
    std::filesystem::path lexicon;
    std::filesystem::path rules;
    std::filesystem::path templates;
    std::filesystem::path manifest;  // empty: start with no facts
};

inline KnowledgeBase load_knowledge_base(const KnowledgeBasePaths& paths, ManifestReport* report = nullptr) {
    KnowledgeBase kb;
    kb.lexicon = load_lexicon(read_file(paths.lexicon));
    kb.layer = parse_rules(read_file(paths.rules));
    kb.templates = load_templates(read_file(paths.templates));
    if (!paths.manifest.empty()) kb.facts = std::make_shared<FactStore>(load_manifest(paths.manifest, report));
    return kb;
}

/// Thread-safe string-keyed cache with least-recently-used eviction.
template <typename Value>
class LruCache {
public:
    explicit LruCache(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

    void put(const std::string& key, Value value) {
        std::lock_guard lock(mutex_);
        if (auto it = index_.find(key); it != index_.end()) {
            order_.erase(it->second);
            index_.erase(it);
        }
        order_.emplace_front(key, std::move(value));
        index_[key] = order_.begin();
        while (order_.size() > capacity_) {
            index_.erase(order_.back().first);
            order_.pop_back();
        }
    }

    std::optional<Value> get(const std::string& key) {
        std::lock_guard lock(mutex_);
        auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        order_.splice(order_.begin(), order_, it->second);
        return it->second->second;
    }

    bool contains(const std::string& key) const {
        std::lock_guard lock(mutex_);
        return index_.count(key) != 0;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return order_.size();
    }

    std::size_t capacity() const noexcept { return capacity_; }

private:
    using Entry = std::pair<std::string, Value>;
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::list<Entry> order_;
    std::unordered_map<std::string, typename std::list<Entry>::iterator> index_;
};

struct QueryResult {
    std::string query_id;
    std::vector<std::vector<std::string>> answers;
    std::string program;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const {
        return {{"query_id", query_id}, {"answers", answers}, {"program", program}, {"warnings", warnings}};
    }
};

struct Explanation {
    std::string text;
    nlohmann::json tree;

    nlohmann::json to_json() const { return {{"text", text}, {"tree", tree}}; }
};

class Service {
public:
    static constexpr std::size_t default_capacity = 256;

    explicit Service(KnowledgeBase kb, std::size_t cache_capacity = default_capacity)
        : lexicon_(std::move(kb.lexicon)),
          layer_(std::move(kb.layer)),
          templates_(std::move(kb.templates)),
          parser_(lexicon_),
          facts_(std::move(kb.facts)),
          cache_(cache_capacity) {}

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    QueryResult handle_query(std::string_view text) {
        const auto tokens = tokenize(text, lexicon_);
        const auto ir = parser_.parse(tokens);
        auto rule = compile(ir, lexicon_);

        std::set<std::string> goals;
        for (const auto& b : rule.body) goals.insert(b.predicate);
        auto relevant = slice(layer_, goals);
        auto derived = std::make_shared<const DerivedStore>(evaluate(relevant.layer, rule, facts()));

        QueryResult result;
        result.answers = answers(*derived, rule.head.predicate);
        result.program = render(Program{{rule}});
        result.warnings = std::move(relevant.warnings);
        for (const auto& w : derived->warnings()) result.warnings.push_back(w);
        result.query_id = fresh_id();
        cache_.put(result.query_id, Cached{std::move(rule), std::move(derived), result.answers});
        return result;
    }

    Explanation handle_explain(const std::string& query_id, const std::vector<std::string>& answer) {
        auto cached = cache_.get(query_id);
        if (!cached) throw UnknownQueryId(query_id);
        if (std::find(cached->answers.begin(), cached->answers.end(), answer) == cached->answers.end())
            throw AnswerNotFound(text::join(answer, ", "));
        const auto proof = min_proof(*cached->derived, cached->rule.head.predicate, answer);
        return {verbalize(proof, templates_), render_tree(proof)};
    }

    /// Suggestions for the next token. A trailing word without following
    /// whitespace is treated as a fragment and filters the suggestions.
    std::vector<std::string> handle_complete(std::string_view prefix) const {
        std::string_view committed = prefix;
        std::string fragment;
        if (!prefix.empty() && !text::is_space(prefix.back()) && prefix.back() != '?' &&
            !(prefix.back() == '"' && std::count(prefix.begin(), prefix.end(), '"') % 2 == 0)) {
            std::size_t start = prefix.size();
            while (start > 0 && !text::is_space(prefix[start - 1]) && prefix[start - 1] != '?') --start;
            committed = prefix.substr(0, start);
            fragment = std::string(prefix.substr(start));
        }
        auto tokenized = tokenize_prefix(committed, lexicon_);
        if (!tokenized.complete) fragment = std::string(prefix.substr(tokenized.stop));

        std::vector<std::string> out;
        const auto lowered = text::to_lower(fragment);
        for (const auto& e : parser_.expected_next(tokenized.tokens)) {
            if (fragment.empty()) {
                out.push_back(e);
            } else if (e == name_class) {
                const char c = fragment.front();
                if (text::is_upper(c) || text::is_digit(c) || c == '"') out.push_back(e);
            } else if (e != end_of_query && text::to_lower(e).rfind(lowered, 0) == 0) {
                out.push_back(e);
            }
        }
        return out;
    }

    nlohmann::json vocabulary() const {
        nlohmann::json types = nlohmann::json::array();
        for (const auto& t : lexicon_.types)
            types.push_back({{"id", t.id}, {"singular", t.singular}, {"plural", t.plural}});
        nlohmann::json verbs = nlohmann::json::array();
        for (const auto& f : lexicon_.frames)
            verbs.push_back({{"active", f.active},
                             {"third_person", f.third_person},
                             {"passive", f.passive.empty() ? "" : f.passive + " by"},
                             {"subject", f.subject_type},
                             {"object", f.object_type},
                             {"predicate", f.predicate}});
        return {{"types", types}, {"verbs", verbs}};
    }

    nlohmann::json stats_json() const {
        const auto s = stats(*facts());
        return {{"total", s.total}, {"per_predicate", s.per_predicate}, {"per_source", s.per_source}};
    }

    /// Swaps in a new fact snapshot; queries already running keep the old one.
    void replace_facts(std::shared_ptr<const FactStore> facts) {
        std::lock_guard lock(facts_mutex_);
        facts_ = std::move(facts);
    }

    std::shared_ptr<const FactStore> facts() const {
        std::lock_guard lock(facts_mutex_);
        return facts_;
    }

    const Lexicon& lexicon() const noexcept { return lexicon_; }
    const RuleLayer& layer() const noexcept { return layer_; }
    const TemplateTable& templates() const noexcept { return templates_; }
    bool has_query(const std::string& id) const { return cache_.contains(id); }

private:
    struct Cached {
        Rule rule;
        std::shared_ptr<const DerivedStore> derived;
        std::vector<std::vector<std::string>> answers;
    };

    std::string fresh_id() {
        static constexpr char digits[] = "0123456789abcdef";
        std::lock_guard lock(rng_mutex_);
        for (;;) {
            std::string id;
            auto bits = rng_();
            for (int i = 0; i < 16; ++i, bits >>= 4) id += digits[bits & 0xf];
            if (!cache_.contains(id)) return id;
        }
    }

    Lexicon lexicon_;
    RuleLayer layer_;
    TemplateTable templates_;
    Parser parser_;

    mutable std::mutex facts_mutex_;
    std::shared_ptr<const FactStore> facts_;

    LruCache<Cached> cache_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_{std::random_device{}()};
};

} // namespace bioquery
