#pragma once

#include "colab/harness.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace colab::prompts {

/// Prompt templates for the two request shapes: the bare question sent at the
/// first layer (and during self-diversity probing) and the aggregation prompt
/// that embeds the previous layer's surviving outputs.
///
/// Placeholders: the question template sees {stem} and {options}; the
/// aggregation template sees {question} (the rendered question prompt) and
/// {responses} (the numbered response block). Both templates can be replaced
/// from files.
struct PromptTemplates {
    std::string question_template;
    std::string aggregation_template;

    static PromptTemplates defaults();
};

/// Fills {stem} and {options} for one question. Options render one per line
/// as "A. text".
std::string render_question_prompt(const harness::Question& q, const PromptTemplates& t);

struct RenderedPrompt {
    std::string text;
    bool truncated = false;
};

/// Renders the aggregation prompt for layers >= 2: the original question plus
/// the prior layer's surviving outputs as numbered responses, in the given
/// order. With an empty prior list this degenerates to the bare question
/// prompt (layer 1).
///
/// `response_char_budget` caps the total size of the embedded responses in
/// code points; 0 means unlimited. When the combined responses exceed the
/// budget, each response is cut tail-first to an equal share and the result
/// is flagged as truncated.
RenderedPrompt render_aggregation_prompt(
    const harness::Question& q,
    const std::vector<std::pair<std::string, std::string>>& prior_outputs,
    const PromptTemplates& t, std::size_t response_char_budget = 0);

} // namespace colab::prompts
