#include <doctest.h>

#include "colab/errors.hpp"
#include "colab/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

using namespace colab;
using harness::DatasetSchema;
using harness::Question;

namespace {

const std::string kFixtures = COLAB_FIXTURE_DIR;

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / ("colab_harness_" + name);
    std::ofstream out(path, std::ios::trunc);
    out << content;
    return path;
}

} // namespace

TEST_CASE("bundled fixture dataset loads with expected shape") {
    auto ds = harness::load_dataset(kFixtures + "/dataset_20.jsonl", DatasetSchema::Choices4);
    CHECK(ds.size() == 20);
    std::map<std::string, int> per_discipline;
    for (const auto& q : ds) per_discipline[q.discipline]++;
    CHECK(per_discipline.size() == 4);
    for (const auto& [name, count] : per_discipline) CHECK(count == 5);
    // The multi-answer item parses as a set.
    auto it = std::find_if(ds.begin(), ds.end(), [](const auto& q) { return q.id == "pharm-02"; });
    REQUIRE(it != ds.end());
    CHECK(it->gold == std::set<char>{'A', 'C'});
    CHECK(it->max_letter() == 'D');
}

TEST_CASE("ten-option fixture loads under choices10") {
    auto ds = harness::load_dataset(kFixtures + "/dataset_j10.jsonl", DatasetSchema::Choices10);
    CHECK(ds.size() == 5);
    CHECK(ds[0].options.size() == 10);
    CHECK(ds[0].max_letter() == 'J');
    // The same file fails the choices4 schema.
    CHECK_THROWS_AS(harness::load_dataset(kFixtures + "/dataset_j10.jsonl",
                                          DatasetSchema::Choices4),
                    ParseError);
}

TEST_CASE("dataset validation errors carry line numbers") {
    SUBCASE("missing answer field") {
        auto p = write_temp("missing_answer.jsonl",
                            R"({"id": "q1", "question": "ok?", "options": {"A": "x", "B": "y"}, "answer": "A", "discipline": "d"})"
                            "\n"
                            R"({"id": "q2", "question": "bad?", "options": {"A": "x", "B": "y"}, "discipline": "d"})"
                            "\n");
        try {
            harness::load_dataset(p.string(), DatasetSchema::Choices4);
            FAIL("expected parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("answer") != std::string::npos);
        }
    }
    SUBCASE("gold letter outside the option range") {
        auto p = write_temp("bad_gold.jsonl",
                            R"({"id": "q1", "question": "ok?", "options": {"A": "x", "B": "y"}, "answer": "C", "discipline": "d"})"
                            "\n");
        CHECK_THROWS_AS(harness::load_dataset(p.string(), DatasetSchema::Choices4), ParseError);
    }
    SUBCASE("non-contiguous options") {
        auto p = write_temp("gap.jsonl",
                            R"({"id": "q1", "question": "ok?", "options": {"A": "x", "C": "y"}, "answer": "A", "discipline": "d"})"
                            "\n");
        CHECK_THROWS_AS(harness::load_dataset(p.string(), DatasetSchema::Choices4), ParseError);
    }
    SUBCASE("malformed JSON line") {
        auto p = write_temp("broken.jsonl", "{not json}\n");
        try {
            harness::load_dataset(p.string(), DatasetSchema::Choices4);
            FAIL("expected parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 1);
        }
    }
    SUBCASE("duplicate ids") {
        auto p = write_temp("dup.jsonl",
                            R"({"id": "q1", "question": "a?", "options": {"A": "x", "B": "y"}, "answer": "A", "discipline": "d"})"
                            "\n"
                            R"({"id": "q1", "question": "b?", "options": {"A": "x", "B": "y"}, "answer": "B", "discipline": "d"})"
                            "\n");
        CHECK_THROWS_AS(harness::load_dataset(p.string(), DatasetSchema::Choices4), ParseError);
    }
}

TEST_CASE("answer extraction cascade") {
    using set = std::set<char>;
    struct Case {
        const char* text;
        char max_letter;
        set expected;
    };
    // Hand-labeled extraction fixtures covering every cascade rule.
    const Case cases[] = {
        {"...long reasoning... The answer is C.", 'D', {'C'}},
        {"Answer: B", 'D', {'B'}},
        {"answer is d", 'D', {'D'}},
        {"The answer is A. Wait, no. The answer is B.", 'D', {'B'}},
        {"The answers are A and C.", 'D', {'A', 'C'}},
        {"Answers: A, C, and D", 'D', {'A', 'C', 'D'}},
        {"**Answer:** B", 'D', {'B'}},
        {"The answer is (C)", 'D', {'C'}},
        {"I think (B)\n", 'D', {'B'}},
        {"Option analysis...\nB.", 'D', {'B'}},
        {"Given the findings, C fits best overall", 'D', {'C'}},
        {"A then B then C\nFinal line mentions D", 'D', {'D'}},
        {"no idea", 'D', {}},
        {"The answer is unclear to me.", 'D', {}},
        {"I cannot commit to a single option without more information.", 'D', {}},
        // Lowercase standalone letters stay words, not answers.
        {"i think a dog is nice", 'D', {}},
        // Rule 1 beats anything later in the cascade.
        {"The answer is B.\nC", 'D', {'B'}},
        // The article hazard: bare lowercase "a" after the cue is not a letter.
        {"The answer is a close call between the options.", 'D', {}},
        {"The answer is: D", 'D', {'D'}},
        {"ANSWER IS b", 'D', {'B'}},
        // Letters outside the allowed range never come back.
        {"The answer is J.", 'D', {}},
        {"The answer is J.", 'J', {'J'}},
        // In an A-J exam, trailing "I" is a valid option letter (pronoun risk
        // accepted for uppercase, by the documented rule).
        {"So the final pick would be H", 'J', {'H'}},
    };
    for (const auto& c : cases) {
        CAPTURE(c.text);
        CHECK(harness::extract_answer(c.text, c.max_letter) == c.expected);
    }
}

namespace {

Question make_q(const std::string& id, const std::string& discipline, char gold) {
    Question q;
    q.id = id;
    q.stem = "stem " + id;
    q.options = {"w", "x", "y", "z"};
    q.gold = {gold};
    q.discipline = discipline;
    return q;
}

} // namespace

TEST_CASE("evaluate scores, thresholds and merges") {
    std::vector<Question> ds;
    std::map<std::string, std::string> texts;
    // Discipline "Alpha": 2/3 correct (66.7%, passes at 0.65).
    ds.push_back(make_q("a1", "Alpha", 'A'));
    texts["a1"] = "The answer is A.";
    ds.push_back(make_q("a2", "Alpha", 'B'));
    texts["a2"] = "The answer is B.";
    ds.push_back(make_q("a3", "Alpha", 'C'));
    texts["a3"] = "The answer is D.";
    // Discipline "Beta": 1/2 correct (50%, fails), one abstention.
    ds.push_back(make_q("b1", "Beta", 'A'));
    texts["b1"] = "The answer is A.";
    ds.push_back(make_q("b2", "Beta", 'D'));
    texts["b2"] = "hard to say";

    auto report = harness::evaluate(ds, texts, 0.65);
    CHECK(report.total_questions == 5);
    CHECK(report.per_discipline.at("Alpha").pass);
    CHECK_FALSE(report.per_discipline.at("Beta").pass);
    CHECK(report.per_discipline.at("Beta").tally.abstain_count() == 1);
    CHECK_FALSE(report.all_pass());
    CHECK(report.overall.acc == doctest::Approx(3.0 / 5.0));
    // Overall tally equals the merged discipline tallies.
    CHECK(report.overall_tally.total() ==
          report.per_discipline.at("Alpha").tally.total() +
              report.per_discipline.at("Beta").tally.total());

    SUBCASE("missing answers raise with the ids listed") {
        texts.erase("a2");
        texts.erase("b1");
        try {
            harness::evaluate(ds, texts, 0.65);
            FAIL("expected evaluation error");
        } catch (const EvaluationError& e) {
            CHECK(e.missing_ids() == std::vector<std::string>{"a2", "b1"});
        }
    }
}

TEST_CASE("evaluate is order-invariant") {
    std::vector<Question> ds;
    std::map<std::string, std::string> texts;
    std::mt19937 rng(5);
    for (int i = 0; i < 30; ++i) {
        char gold = static_cast<char>('A' + rng() % 4);
        auto q = make_q("q" + std::to_string(i), i % 2 ? "X" : "Y", gold);
        ds.push_back(q);
        char predicted = static_cast<char>('A' + rng() % 4);
        texts[q.id] = std::string("The answer is ") + predicted + ".";
    }
    auto r1 = harness::evaluate(ds, texts, 0.65);
    std::shuffle(ds.begin(), ds.end(), rng);
    auto r2 = harness::evaluate(ds, texts, 0.65);
    CHECK(harness::report_to_json(r1) == harness::report_to_json(r2));
}

TEST_CASE("threshold boundary: 64.9 percent fails, 65.0 percent passes") {
    auto run = [](int correct, int total) {
        std::vector<Question> ds;
        std::map<std::string, std::string> texts;
        for (int i = 0; i < total; ++i) {
            auto q = make_q("q" + std::to_string(i), "Boundary", 'A');
            ds.push_back(q);
            texts[q.id] = i < correct ? "The answer is A." : "The answer is B.";
        }
        return harness::evaluate(ds, texts, 0.65);
    };
    auto below = run(649, 1000);
    CHECK(below.per_discipline.at("Boundary").metric_values.acc == doctest::Approx(0.649));
    CHECK_FALSE(below.per_discipline.at("Boundary").pass);
    auto at = run(650, 1000);
    CHECK(at.per_discipline.at("Boundary").metric_values.acc == doctest::Approx(0.650));
    CHECK(at.per_discipline.at("Boundary").pass);
}

TEST_CASE("multi-answer items score by exact set equality") {
    Question q;
    q.id = "m1";
    q.stem = "pick two";
    q.options = {"w", "x", "y", "z"};
    q.gold = {'A', 'C'};
    q.discipline = "Multi";

    auto score = [&](const std::string& text) {
        auto r = harness::evaluate({q}, {{"m1", text}}, 0.65);
        return r.overall.acc;
    };
    CHECK(score("The answers are A and C.") == 1.0);
    CHECK(score("The answers are C and A.") == 1.0);
    CHECK(score("The answer is A.") == 0.0);          // subset is not enough
    CHECK(score("The answers are A, B and C.") == 0.0); // superset is wrong too
}

TEST_CASE("report json round-trips and the table is stable") {
    std::vector<Question> ds = {make_q("r1", "Solo", 'A')};
    auto report = harness::evaluate(ds, {{"r1", "The answer is A."}}, 0.65);
    report.config_digest = "cafe";
    report.mode = "replay";
    report.generated_at = "2026-01-01T00:00:00Z";
    report.models.emplace_back("m1", "provider/m1");

    auto j = harness::report_to_json(report);
    auto back = harness::report_from_json(j);
    CHECK(harness::report_to_json(back) == j);

    auto table = harness::report_to_table(report);
    CHECK(table.find("Solo") != std::string::npos);
    CHECK(table.find("100.00") != std::string::npos);
    CHECK(table.find("Overall") != std::string::npos);
}
