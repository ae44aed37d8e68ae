#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "bioquery/bioquery.hpp"

namespace bqtest {

inline std::filesystem::path data_dir() { return BIOQUERY_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return BIOQUERY_FIXTURE_DIR; }

inline const bioquery::Lexicon& default_lexicon() {
    static const auto lex = bioquery::load_lexicon(bioquery::read_file(data_dir() / "lexicon.tsv"));
    return lex;
}

inline const bioquery::RuleLayer& default_layer() {
    static const auto layer = bioquery::parse_rules(bioquery::read_file(data_dir() / "rules.lp"));
    return layer;
}

inline const bioquery::TemplateTable& default_templates() {
    static const auto t = bioquery::load_templates(bioquery::read_file(data_dir() / "templates.tsv"));
    return t;
}

inline bioquery::KnowledgeBasePaths default_paths() {
    return {data_dir() / "lexicon.tsv", data_dir() / "rules.lp", data_dir() / "templates.tsv",
            data_dir() / "manifest.tsv"};
}

inline std::shared_ptr<const bioquery::FactStore> default_facts() {
    static const auto facts = std::make_shared<const bioquery::FactStore>(
        bioquery::load_manifest(data_dir() / "manifest.tsv"));
    return facts;
}

inline const char* const example_query =
    "What are the genes that are targeted by the drug Epinephrine and that interact with the gene DLG4?";

inline const char* const example_explanation =
    "the drug \"Epinephrine\" targets the gene \"ADRB1\" according to CTD and the gene \"ADRB1\" interacts with "
    "the gene \"DLG4\" according to BioGrid";

} // namespace bqtest
