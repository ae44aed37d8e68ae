#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

namespace bioquery {

/// Base of every error raised by the library. `code()` is a stable,
/// machine-readable identifier used by the HTTP layer and the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

    /// Extra structured fields for API responses.
    virtual nlohmann::json details() const { return nlohmann::json::object(); }

private:
    std::string code_;
};

class LexiconError : public Error {
public:
    LexiconError(std::size_t line, const std::string& message)
        : Error("lexicon_error", "line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    nlohmann::json details() const override { return {{"line", line_}}; }

private:
    std::size_t line_;
};

// Query-language errors. `position` is a byte offset into the query text.

class EmptyInput : public Error {
public:
    EmptyInput() : Error("empty_input", "query is empty") {}
};

class UnknownWord : public Error {
public:
    UnknownWord(std::string surface, std::size_t begin, std::size_t end)
        : Error("unknown_word", "unknown word '" + surface + "'"),
          surface_(std::move(surface)), begin_(begin), end_(end) {}
    const std::string& surface() const noexcept { return surface_; }
    std::size_t begin() const noexcept { return begin_; }
    std::size_t end() const noexcept { return end_; }
    nlohmann::json details() const override {
        return {{"surface", surface_}, {"position", begin_}, {"end", end_}};
    }

private:
    std::string surface_;
    std::size_t begin_;
    std::size_t end_;
};

class GrammarError : public Error {
public:
    GrammarError(std::size_t position, std::size_t token_index, std::set<std::string> expected)
        : Error("grammar_error", describe(position, expected)),
          position_(position), token_index_(token_index), expected_(std::move(expected)) {}
    std::size_t position() const noexcept { return position_; }
    std::size_t token_index() const noexcept { return token_index_; }
    const std::set<std::string>& expected() const noexcept { return expected_; }
    nlohmann::json details() const override {
        return {{"position", position_}, {"token_index", token_index_}, {"expected", expected_}};
    }

private:
    static std::string describe(std::size_t position, const std::set<std::string>& expected) {
        std::string msg = "unexpected input at offset " + std::to_string(position) + "; expected one of:";
        for (const auto& e : expected) msg += " " + e;
        return msg;
    }

    std::size_t position_;
    std::size_t token_index_;
    std::set<std::string> expected_;
};

class TypeMismatch : public Error {
public:
    TypeMismatch(std::string verb, std::string expected, std::string found, std::size_t position)
        : Error("type_mismatch", "'" + verb + "' expects " + expected + " but found " + found),
          verb_(std::move(verb)), expected_(std::move(expected)), found_(std::move(found)),
          position_(position) {}
    const std::string& verb() const noexcept { return verb_; }
    const std::string& expected() const noexcept { return expected_; }
    const std::string& found() const noexcept { return found_; }
    std::size_t position() const noexcept { return position_; }
    nlohmann::json details() const override {
        return {{"verb", verb_}, {"expected_type", expected_}, {"found_type", found_}, {"position", position_}};
    }

private:
    std::string verb_;
    std::string expected_;
    std::string found_;
    std::size_t position_;
};

// Logic-program errors.

class ProgramSyntaxError : public Error {
public:
    ProgramSyntaxError(std::size_t line, std::size_t column, const std::string& message)
        : Error("syntax_error", std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    nlohmann::json details() const override { return {{"line", line_}, {"column", column_}}; }

private:
    std::size_t line_;
    std::size_t column_;
};

class SafetyError : public Error {
public:
    SafetyError(std::string variable, const std::string& rule_text)
        : Error("unsafe_rule", "variable " + variable + " in the head does not occur in the body of: " + rule_text),
          variable_(std::move(variable)) {}
    const std::string& variable() const noexcept { return variable_; }
    nlohmann::json details() const override { return {{"variable", variable_}}; }

private:
    std::string variable_;
};

class ArityConflict : public Error {
public:
    ArityConflict(std::string predicate, std::size_t first, std::size_t second)
        : Error("arity_conflict", "predicate " + predicate + " used with arity " + std::to_string(first) +
                                      " and " + std::to_string(second)),
          predicate_(std::move(predicate)) {}
    const std::string& predicate() const noexcept { return predicate_; }
    nlohmann::json details() const override { return {{"predicate", predicate_}}; }

private:
    std::string predicate_;
};

// Lookup failures.

class FactNotFound : public Error {
public:
    explicit FactNotFound(const std::string& fact) : Error("fact_not_found", "no such fact: " + fact) {}
};

class MissingTemplate : public Error {
public:
    explicit MissingTemplate(std::string predicate)
        : Error("missing_template", "no explanation template for predicate " + predicate),
          predicate_(std::move(predicate)) {}
    const std::string& predicate() const noexcept { return predicate_; }

private:
    std::string predicate_;
};

class UnknownQueryId : public Error {
public:
    explicit UnknownQueryId(const std::string& id)
        : Error("unknown_query_id", "unknown or expired query id: " + id) {}
};

class AnswerNotFound : public Error {
public:
    explicit AnswerNotFound(const std::string& answer)
        : Error("answer_not_found", "not an answer of this query: " + answer) {}
};

} // namespace bioquery
