#include <gtest/gtest.h>

#include <functional>

#include "generators.hpp"
#include "paths.hpp"

using namespace bioquery;

namespace {

const Lexicon& lex() { return bqtest::default_lexicon(); }

QueryIR parse_text(std::string_view s) { return parse(tokenize(s, lex()), lex()); }

std::set<std::string> expected_after(std::string_view prefix) {
    return expected_next(tokenize_prefix(prefix, lex()).tokens, lex());
}

Constant constant(std::string value, std::string type) { return {std::move(value), std::move(type)}; }

// Checks every structural property a parsed query must have; returns the
// first violation.
std::string check_ir(const QueryIR& ir) {
    std::set<int> in_atoms;
    std::map<int, std::set<int>> adjacent;
    for (const auto& a : ir.atoms) {
        const VerbFrame* frame = nullptr;
        for (const auto& f : lex().frames)
            if (f.predicate == a.predicate) frame = &f;
        if (!frame) return "unknown predicate " + a.predicate;
        const auto& t1 = frame->object_first ? frame->object_type : frame->subject_type;
        const auto& t2 = frame->object_first ? frame->subject_type : frame->object_type;
        std::vector<int> vs;
        for (auto [arg, type] : {std::pair{&a.first, &t1}, std::pair{&a.second, &t2}}) {
            if (auto* v = std::get_if<VariableRef>(arg)) {
                auto it = ir.vars.find(v->id);
                if (it == ir.vars.end()) return "variable missing from vars";
                if (it->second != *type) return "variable type differs from frame in " + a.predicate;
                in_atoms.insert(v->id);
                vs.push_back(v->id);
            } else if (std::get<Constant>(*arg).type != *type) {
                return "constant type differs from frame in " + a.predicate;
            }
        }
        if (vs.size() == 2) {
            adjacent[vs[0]].insert(vs[1]);
            adjacent[vs[1]].insert(vs[0]);
        }
    }
    if (!in_atoms.count(ir.answer_var)) return "answer variable unused";
    if (!ir.vars.count(ir.answer_var)) return "answer variable untyped";
    std::set<int> seen{ir.answer_var};
    std::vector<int> stack{ir.answer_var};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adjacent[v])
            if (seen.insert(w).second) stack.push_back(w);
    }
    if (seen != in_atoms) return "variable graph not connected";
    return {};
}

} // namespace

TEST(Parser, ExampleQuery) {
    const auto ir = parse_text(bqtest::example_query);
    EXPECT_EQ(ir.answer_type(), "gene");
    const VariableRef v{ir.answer_var};
    const std::vector<QueryAtom> expected{{"drug_gene", constant("Epinephrine", "drug"), v},
                                          {"gene_gene", v, constant("DLG4", "gene")}};
    EXPECT_EQ(ir.atoms, expected);
    EXPECT_EQ(ir.vars.size(), 1u);
    EXPECT_EQ(check_ir(ir), "");
}

TEST(Parser, WhichQuery) {
    const auto ir = parse_text("Which drugs treat the disease Asthma?");
    EXPECT_EQ(ir.answer_type(), "drug");
    ASSERT_EQ(ir.atoms.size(), 1u);
    EXPECT_EQ(ir.atoms[0], (QueryAtom{"drug_disease", VariableRef{ir.answer_var}, constant("Asthma", "disease")}));
}

TEST(Parser, WhichAndWhatAreAgree) {
    EXPECT_EQ(parse_text("Which drugs treat the disease Asthma?"),
              parse_text("What are the drugs that treat the disease Asthma?"));
}

TEST(Parser, ActiveAndThirdPersonFormsAgree) {
    EXPECT_EQ(parse_text("Which genes interact with the gene DLG4?"),
              parse_text("Which genes interacts with the gene DLG4?"));
    EXPECT_EQ(parse_text("Which genes are targeted by the drug Epinephrine?"),
              parse_text("Which genes is targeted by the drug Epinephrine?"));
}

TEST(Parser, NestedPluralObjectIntroducesVariable) {
    const auto ir = parse_text("What are the drugs that target the genes that interact with the gene DLG4?");
    ASSERT_EQ(ir.vars.size(), 2u);
    ASSERT_EQ(ir.atoms.size(), 2u);
    EXPECT_EQ(ir.answer_type(), "drug");
    const auto& inner = std::get<VariableRef>(ir.atoms[0].second);
    EXPECT_NE(inner.id, ir.answer_var);
    EXPECT_EQ(ir.vars.at(inner.id), "gene");
    EXPECT_EQ(check_ir(ir), "");
}

TEST(Parser, PassiveSwapsRoles) {
    const auto ir = parse_text("Which diseases are treated by the drug Salbutamol?");
    ASSERT_EQ(ir.atoms.size(), 1u);
    EXPECT_EQ(ir.atoms[0], (QueryAtom{"drug_disease", constant("Salbutamol", "drug"), VariableRef{ir.answer_var}}));
}

TEST(Parser, MultiWordVerbsAndNouns) {
    EXPECT_EQ(parse_text("Which drugs have the side effect Nausea?").atoms[0].predicate, "drug_sideeffect");
    EXPECT_EQ(parse_text("Which drugs belong to the category Beta Blockers?").atoms[0].predicate, "drug_category");
    EXPECT_EQ(parse_text("Which genes are related to the disease Asthma?").atoms[0].predicate, "gene_disease");
    EXPECT_EQ(parse_text("Which genes is related to the disease Asthma?").atoms[0].predicate, "gene_disease");
}

TEST(Parser, AndThatAttachesToInnermostClause) {
    const auto ir = parse_text(
        "Which drugs target the genes that interact with the gene DLG4 and that are related to the disease Asthma?");
    ASSERT_EQ(ir.atoms.size(), 3u);
    const auto gene = std::get<VariableRef>(ir.atoms[0].second).id;
    EXPECT_EQ(std::get<VariableRef>(ir.atoms[2].first).id, gene);
    EXPECT_EQ(ir.atoms[2].predicate, "gene_disease");
}

TEST(Parser, AndThatFallsBackToOuterClause) {
    // "treat" cannot follow a gene clause, so the conjunct attaches to drugs.
    const auto ir = parse_text(
        "Which drugs target the genes that interact with the gene DLG4 and that treat the disease Asthma?");
    ASSERT_EQ(ir.atoms.size(), 3u);
    EXPECT_EQ(ir.atoms[2], (QueryAtom{"drug_disease", VariableRef{ir.answer_var}, constant("Asthma", "disease")}));
}

TEST(Parser, TypeMismatchOnVerb) {
    try {
        parse_text("What are the drugs that interact with the gene DLG4?");
        FAIL() << "expected TypeMismatch";
    } catch (const TypeMismatch& e) {
        EXPECT_EQ(e.verb(), "interact with");
        EXPECT_EQ(e.expected(), "gene");
        EXPECT_EQ(e.found(), "drug");
        EXPECT_EQ(e.position(), 24u);
    }
}

TEST(Parser, TypeMismatchOnObjectNoun) {
    try {
        parse_text("Which drugs target the disease Asthma?");
        FAIL() << "expected TypeMismatch";
    } catch (const TypeMismatch& e) {
        EXPECT_EQ(e.expected(), "gene");
        EXPECT_EQ(e.found(), "disease");
    }
}

TEST(Parser, GrammarErrorCarriesExpectations) {
    try {
        parse_text("What are the genes that?");
        FAIL() << "expected GrammarError";
    } catch (const GrammarError& e) {
        EXPECT_EQ(e.position(), 23u);
        EXPECT_EQ(e.token_index(), 5u);
        EXPECT_TRUE(e.expected().count("interact"));
        EXPECT_TRUE(e.expected().count("are"));
        EXPECT_FALSE(e.expected().count("treat"));
    }
}

TEST(Parser, IncompleteInputIsGrammarError) {
    EXPECT_THROW(parse_text("What are the genes"), GrammarError);
    EXPECT_THROW(parse_text("Which genes interact with the gene DLG4"), GrammarError);
    EXPECT_THROW(parse_text("Which genes interact with the gene DLG4? ?"), GrammarError);
    EXPECT_THROW(parse_text("Which category belong?"), GrammarError);
}

TEST(Parser, CategoriesCannotHeadAQuery) {
    EXPECT_THROW(parse_text("Which categories that treat the disease Asthma?"), Error);
}

TEST(ExpectedNext, StartSymbols) {
    EXPECT_EQ(expected_next({}, lex()), (std::set<std::string>{"What", "Which"}));
}

TEST(ExpectedNext, AfterWhatAreThe) {
    // Plural nouns that can carry a relative clause.
    EXPECT_EQ(expected_after("What are the"), (std::set<std::string>{"drugs", "genes", "diseases"}));
}

TEST(ExpectedNext, CompleteQuery) {
    EXPECT_EQ(expected_after(bqtest::example_query), (std::set<std::string>{std::string(end_of_query)}));
}

TEST(ExpectedNext, AfterSingularNounComesAName) {
    EXPECT_EQ(expected_after("Which drugs treat the disease"), (std::set<std::string>{std::string(name_class)}));
}

TEST(ExpectedNext, AfterNameComesAndOrQuestionMark) {
    EXPECT_EQ(expected_after("Which drugs treat the disease Asthma"), (std::set<std::string>{"and", "?"}));
}

TEST(ExpectedNext, UnparseablePrefixIsEmpty) {
    EXPECT_TRUE(expected_after("What What").empty());
    EXPECT_TRUE(expected_after("Which genes treat").empty());
}

TEST(ExpectedNext, ObjectNounsFollowTheVerb) {
    EXPECT_EQ(expected_after("Which drugs target the"), (std::set<std::string>{"gene", "genes"}));
    EXPECT_EQ(expected_after("Which drugs have the"), (std::set<std::string>{"side effect"}));
}

// Every expectation offered must be continuable to a full sentence: extend
// greedily with a shortest completion and check it parses.
TEST(ExpectedNext, EveryOfferIsViable) {
    const std::vector<std::string> prefixes{"", "What are the", "Which genes that", "Which drugs target the genes that",
                                            "Which genes are", "Which genes are targeted by the"};
    for (const auto& p : prefixes) {
        for (const auto& e : expected_after(p)) {
            std::string s = p.empty() ? e : p + " " + e;
            if (e == name_class) s = p + " X1";
            if (e == end_of_query) continue;
            // Complete with a breadth-limited search over expectations.
            std::function<bool(const std::string&, int)> complete = [&](const std::string& cur, int budget) {
                const auto next = expected_after(cur);
                if (next.count(std::string(end_of_query))) return true;
                if (budget == 0) return false;
                for (const auto& n : next) {
                    if (n == "and") continue;
                    const auto ext = n == name_class ? cur + " X1" : cur + " " + n;
                    if (complete(ext, budget - 1)) return true;
                }
                return false;
            };
            EXPECT_TRUE(complete(s, 10)) << "dead end after '" << s << "'";
        }
    }
}

TEST(ParserProperties, FuzzedSentencesParseWithValidIR) {
    bqtest::SentenceGenerator gen(lex(), 2024);
    for (int i = 0; i < 500; ++i) {
        const auto s = gen.next(4);
        QueryIR ir;
        ASSERT_NO_THROW(ir = parse_text(s)) << s;
        EXPECT_EQ(check_ir(ir), "") << s;
    }
}

TEST(ParserProperties, AutocompleteContainsTheActualNextToken) {
    bqtest::SentenceGenerator gen(lex(), 99);
    Parser parser(lex());
    for (int i = 0; i < 300; ++i) {
        const auto s = gen.next(4);
        const auto tokens = tokenize(s, lex());
        for (std::size_t k = 0; k < tokens.size(); ++k) {
            const std::vector<Token> prefix(tokens.begin(), tokens.begin() + k);
            ASSERT_TRUE(parser.expected_next(prefix).count(tokens[k].description))
                << s << " at token " << k << " (" << tokens[k].description << ")";
        }
        EXPECT_EQ(parser.expected_next(tokens), (std::set<std::string>{std::string(end_of_query)})) << s;
    }
}

TEST(ParserProperties, Deterministic) {
    bqtest::SentenceGenerator gen(lex(), 5);
    for (int i = 0; i < 100; ++i) {
        const auto s = gen.next();
        EXPECT_EQ(parse_text(s), parse_text(s));
        EXPECT_EQ(parse_text(s), Parser(lex()).parse(tokenize(s, lex())));
    }
}
