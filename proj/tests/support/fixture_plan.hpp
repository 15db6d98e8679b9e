#pragma once

// The scripted scenario behind the bundled fixtures: which pseudo-model says
// what, and how each of the 20 fixture questions resolves. The fixture
// generator records this scenario into fixture_store.jsonl; tests replay it.

#include "colab/harness.hpp"
#include "support/scripted_backend.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace testsupport {

// Probe word-salad knobs; spread out so the SD ranking is unambiguous.
inline std::map<std::string, ScriptedModel> fixture_models() {
    return {
        {"phi4-14b", {0.30}},      {"qwen2.5-14b", {0.15}}, {"qwen2.5-32b", {0.45}},
        {"qwq-32b", {0.90}},       {"openthinker-32b", {0.60}},
        {"deepseek-r1-32b", {0.75}},
    };
}

// Final-layer synthesis per question id. Unlisted ids answer their gold
// letter. Cardiology ends 4/5, Neurology 3/5 (one abstention), Pharmacology
// 5/5, Pediatrics 2/5, so the report exercises both pass and fail flags.
struct FinalOutcome {
    std::string text;
};

inline std::map<std::string, FinalOutcome> fixture_final_overrides() {
    auto wrong = [](char letter) {
        return FinalOutcome{std::string("After weighing the candidate responses, the "
                                        "strongest option is ") +
                            letter + ". The answer is " + letter + "."};
    };
    return {
        // Rule-2 extraction shape: bare parenthesized letter on the last line.
        {"card-03", {"The synthesis favors the glycoside toxicity picture over the "
                     "alternatives.\n(D)"}},
        {"card-04", wrong('A')},
        {"neur-04", wrong('B')},
        {"neur-05", {"The candidate responses disagree and the stem leaves the timing "
                     "ambiguous; none of the options can be defended conclusively."}},
        {"pharm-02", {"Both monitoring requirements stand. The answers are A and C."}},
        {"peds-02", wrong('C')},
        {"peds-03", wrong('D')},
        {"peds-05", wrong('A')},
    };
}

inline std::vector<ScriptedQuestion> fixture_scripted_questions(
    const std::vector<colab::harness::Question>& dataset) {
    auto overrides = fixture_final_overrides();
    std::vector<ScriptedQuestion> out;
    for (const auto& q : dataset) {
        ScriptedQuestion sq;
        sq.question = q;
        sq.convergence_letter = colab::harness::canonical_label(q.gold);
        if (auto it = overrides.find(q.id); it != overrides.end()) {
            sq.final_text = it->second.text;
        } else {
            char letter = *q.gold.begin();
            sq.final_text = std::string("After weighing the candidate responses, the "
                                        "strongest option is ") +
                            letter + ". The answer is " + letter + ".";
        }
        out.push_back(std::move(sq));
    }
    return out;
}

inline std::shared_ptr<ScriptedBackend> make_fixture_backend(const std::string& fixtures_dir) {
    auto probes = colab::harness::load_dataset(fixtures_dir + "/probes.jsonl",
                                               colab::harness::DatasetSchema::Choices4);
    auto dataset = colab::harness::load_dataset(fixtures_dir + "/dataset_20.jsonl",
                                                colab::harness::DatasetSchema::Choices4);
    return std::make_shared<ScriptedBackend>(probes, fixture_scripted_questions(dataset),
                                             fixture_models());
}

// The committed replay configuration document. The generator writes this to
// replay_config.json; tests and the acceptance suite load that file so the
// config digest embedded in artifacts stays in sync.
inline nlohmann::json fixture_config_doc() {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& [id, knob] : fixture_models())
        models.push_back(nlohmann::json{{"id", id}, {"kind", "replay"}});
    return nlohmann::json{
        {"models", models},
        {"probe", {{"questions", "probes.jsonl"}, {"k", 10}, {"temperature", 0.7}}},
        {"cluster", {{"size", 6}}},
        {"schedule",
         {{"layers", 4}, {"masks_after_layer", {2, 2, 1}}, {"polarity", "as_written"}}},
        {"eval",
         {{"dataset", "dataset_20.jsonl"}, {"schema", "choices4"}, {"threshold", 0.65}}},
        {"io",
         {{"output_dir", "out"}, {"fixtures", "fixture_store.jsonl"}, {"mode", "replay"}}},
        {"limits", {{"parallelism", 2}, {"context_chars", 60000}}}};
}

} // namespace testsupport
