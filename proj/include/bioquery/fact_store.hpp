#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "error.hpp"
#include "text.hpp"

namespace bioquery {

using Symbol = std::uint32_t;

/// Bijection between strings and dense symbol ids.
class Interner {
public:
    Symbol intern(std::string_view s) {
        if (auto it = ids_.find(std::string(s)); it != ids_.end()) return it->second;
        const auto id = static_cast<Symbol>(strings_.size());
        strings_.emplace_back(s);
        ids_.emplace(strings_.back(), id);
        return id;
    }

    std::optional<Symbol> find(std::string_view s) const {
        if (auto it = ids_.find(std::string(s)); it != ids_.end()) return it->second;
        return std::nullopt;
    }

    const std::string& resolve(Symbol id) const { return strings_.at(id); }
    std::size_t size() const noexcept { return strings_.size(); }

private:
    std::vector<std::string> strings_;
    std::unordered_map<std::string, Symbol> ids_;
};

struct SourceFact {
    Symbol first = 0;
    Symbol second = 0;
    std::uint32_t source = 0;  // index into FactStore::sources()
};

/// Source-tagged binary facts, grouped by predicate. A fact is identified by
/// (predicate, args, source); the same args from two sources are two facts.
class FactStore {
public:
    struct Table {
        std::vector<SourceFact> rows;
    };

    /// Returns false when the fact was already present.
    bool add(std::string_view predicate, std::string_view first, std::string_view second, std::string_view source) {
        const Symbol a = symbols_.intern(first);
        const Symbol b = symbols_.intern(second);
        const auto s = source_id(source);
        auto& table = tables_[std::string(predicate)];
        auto& keys = keys_[std::string(predicate)];
        const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) ^ b;
        auto& by_source = keys[key];
        for (auto existing : by_source)
            if (existing == s) return false;
        by_source.push_back(s);
        table.rows.push_back({a, b, s});
        ++size_;
        return true;
    }

    const Interner& symbols() const noexcept { return symbols_; }
    const std::vector<std::string>& sources() const noexcept { return sources_; }
    const std::map<std::string, Table>& tables() const noexcept { return tables_; }

    const Table* table(std::string_view predicate) const {
        auto it = tables_.find(std::string(predicate));
        return it == tables_.end() ? nullptr : &it->second;
    }

    std::size_t size() const noexcept { return size_; }

    /// Interner-independent view, for comparing stores built in different orders.
    std::set<std::tuple<std::string, std::string, std::string, std::string>> contents() const {
        std::set<std::tuple<std::string, std::string, std::string, std::string>> out;
        for (const auto& [pred, table] : tables_)
            for (const auto& r : table.rows)
                out.emplace(pred, symbols_.resolve(r.first), symbols_.resolve(r.second), sources_[r.source]);
        return out;
    }

private:
    std::uint32_t source_id(std::string_view label) {
        for (std::uint32_t i = 0; i < sources_.size(); ++i)
            if (sources_[i] == label) return i;
        sources_.emplace_back(label);
        return static_cast<std::uint32_t>(sources_.size() - 1);
    }

    Interner symbols_;
    std::vector<std::string> sources_;
    std::map<std::string, Table> tables_;
    std::map<std::string, std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> keys_;
    std::size_t size_ = 0;
};

struct RowError {
    std::size_t line = 0;
    std::string reason;
    bool operator==(const RowError&) const = default;
};

struct IngestReport {
    std::size_t rows_added = 0;
    std::size_t duplicates = 0;
    std::vector<RowError> errors;
};

struct IngestOptions {
    std::string source_label;      // when set, rows must carry this label
    std::string predicate_prefix;  // when set, predicates must start with it
};

/// Adds every well-formed row of a fact TSV (`predicate TAB arg1 TAB arg2 TAB
/// source`). Malformed rows are reported and skipped.
inline IngestReport ingest(FactStore& store, std::string_view contents, const IngestOptions& options = {}) {
    IngestReport report;
    text::for_each_line(contents, [&](std::size_t line, std::string_view raw) {
        if (text::trim(raw).empty() || raw.front() == '#') return;
        const auto cols = text::split(raw, '\t');
        if (cols.size() != 4) {
            report.errors.push_back({line, "wrong column count: expected 4, found " + std::to_string(cols.size())});
            return;
        }
        for (const auto& c : cols) {
            if (text::trim(c).empty()) {
                report.errors.push_back({line, "empty field"});
                return;
            }
        }
        if (!options.source_label.empty() && cols[3] != options.source_label) {
            report.errors.push_back({line, "source label " + cols[3] + " does not match " + options.source_label});
            return;
        }
        if (!options.predicate_prefix.empty() && cols[0].rfind(options.predicate_prefix, 0) != 0) {
            report.errors.push_back({line, "predicate " + cols[0] + " lacks prefix " + options.predicate_prefix});
            return;
        }
        if (store.add(cols[0], cols[1], cols[2], cols[3])) ++report.rows_added;
        else ++report.duplicates;
    });
    return report;
}

struct StoreStats {
    std::map<std::string, std::size_t> per_predicate;
    std::map<std::string, std::size_t> per_source;
    std::size_t total = 0;
};

inline StoreStats stats(const FactStore& store) {
    StoreStats s;
    for (const auto& [pred, table] : store.tables()) {
        s.per_predicate[pred] = table.rows.size();
        for (const auto& r : table.rows) ++s.per_source[store.sources()[r.source]];
        s.total += table.rows.size();
    }
    return s;
}

struct ManifestEntry {
    std::filesystem::path path;
    std::string source_label;
    std::string predicate_prefix;
};

/// `path TAB source_label [TAB predicate_prefix]` per line; relative paths are
/// resolved against `base`.
inline std::vector<ManifestEntry> parse_manifest(std::string_view contents, const std::filesystem::path& base) {
    std::vector<ManifestEntry> out;
    text::for_each_line(contents, [&](std::size_t line, std::string_view raw) {
        if (text::trim(raw).empty() || text::trim(raw).front() == '#') return;
        auto cols = text::split(raw, '\t');
        for (auto& c : cols) c = std::string(text::trim(c));
        if (cols.size() < 2 || cols.size() > 3 || cols[0].empty() || cols[1].empty())
            throw Error("manifest_error", "manifest line " + std::to_string(line) + ": expected path and source label");
        ManifestEntry e;
        e.path = std::filesystem::path(cols[0]);
        if (e.path.is_relative()) e.path = base / e.path;
        e.source_label = cols[1];
        if (cols.size() == 3) e.predicate_prefix = cols[2];
        for (const auto& prev : out)
            if (prev.path == e.path)
                throw Error("manifest_error", "manifest line " + std::to_string(line) + ": duplicate file");
        out.push_back(std::move(e));
    });
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io_error", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ManifestReport {
    std::vector<std::pair<std::filesystem::path, IngestReport>> files;
};

inline FactStore load_manifest(const std::filesystem::path& manifest, ManifestReport* report = nullptr) {
    FactStore store;
    for (const auto& e : parse_manifest(read_file(manifest), manifest.parent_path())) {
        auto r = ingest(store, read_file(e.path), {e.source_label, e.predicate_prefix});
        if (report) report->files.emplace_back(e.path, std::move(r));
    }
    return store;
}

} // namespace bioquery
