#pragma once

#include "colab/metrics.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace colab::harness {

/// Option-count families: exam-style A-D files and the expanded A-J files.
enum class DatasetSchema { Choices4, Choices10 };

char max_letter_for(DatasetSchema schema);
DatasetSchema schema_from_string(const std::string& name);
std::string schema_to_string(DatasetSchema schema);

/// One multiple-choice item. Options are contiguous letters starting at 'A';
/// options[i] is the text of letter 'A' + i.
struct Question {
    std::string id;
    std::string stem;
    std::vector<std::string> options;
    std::set<char> gold;
    std::string discipline;

    char max_letter() const { return static_cast<char>('A' + options.size() - 1); }
};

/// Canonical label for an answer set: letters in ascending order ("AC").
std::string canonical_label(const std::set<char>& letters);

/// Loads a JSON Lines dataset with fields {id, question, options, answer,
/// discipline}. `answer` may be a string of letters or an array of letters.
/// Raises ParseError (with line number) on malformed lines and on invariant
/// violations (gold outside options, non-contiguous options, duplicate ids).
std::vector<Question> load_dataset(const std::string& path, DatasetSchema schema);

/// Pulls the chosen option letters out of a free-text model answer.
///
/// Cascade, first hit wins:
///  1. "answer is <L>" / "Answer: <L>" (case-insensitive cue); the last such
///     statement wins and may name several letters ("answers are A and C"),
///     which form a multi-answer set.
///  2. The last standalone letter on the final non-empty line, optionally
///     wrapped in punctuation ("(B)").
///  3. The last standalone letter anywhere.
///
/// Standalone letters for rules 2-3 must be uppercase; lowercase "a" and "i"
/// are ordinary English words far too often. Returns the empty set when
/// nothing matches: an abstention, not an error. Letters outside
/// 'A'..max_letter are never returned.
std::set<char> extract_answer(std::string_view text, char max_letter);

struct DisciplineResult {
    metrics::ConfusionTally tally;
    metrics::MetricSet metric_values;
    long long question_count = 0;
    bool pass = false;
};

/// Per-discipline and overall tallies plus the seven derived metrics.
/// Manifest fields are filled by the caller that owns the run context.
struct EvalReport {
    std::map<std::string, DisciplineResult> per_discipline;
    metrics::ConfusionTally overall_tally;
    metrics::MetricSet overall;
    long long total_questions = 0;
    double threshold = 0.65;

    // Run manifest. `generated_at` is the only volatile field and is excluded
    // from golden comparisons.
    std::string config_digest;
    std::string mode;
    std::vector<std::pair<std::string, std::string>> models; // (id, provider name)
    std::string generated_at;

    bool all_pass() const;
};

/// Scores extracted answers against the dataset. Multi-answer items score by
/// exact set equality; abstentions count as wrong. `answer_texts` maps
/// question id to the raw final text of the run; missing ids raise
/// EvaluationError listing every missing id.
EvalReport evaluate(const std::vector<Question>& dataset,
                    const std::map<std::string, std::string>& answer_texts,
                    double threshold);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// Fixed-width table with 2-decimal percentages, one row per discipline plus
/// an overall row.
std::string report_to_table(const EvalReport& report);

} // namespace colab::harness
