#include "colab/prompts.hpp"

#include "colab/fuzzy.hpp"

#include <sstream>

namespace colab::prompts {

namespace {

constexpr const char* kDefaultQuestionTemplate =
    "Answer the following multiple-choice question. Reason step by step if "
    "helpful, then finish with a line of the form \"The answer is <letter>\".\n"
    "\n"
    "Question: {stem}\n"
    "\n"
    "Options:\n"
    "{options}";

constexpr const char* kDefaultAggregationTemplate =
    "You are given candidate responses from several models to the same "
    "multiple-choice question. Weigh them critically - some may be wrong - and "
    "produce a single, refined answer of your own rather than a copy of any one "
    "response. Finish with a line of the form \"The answer is <letter>\".\n"
    "\n"
    "{question}\n"
    "\n"
    "Responses from other models:\n"
    "{responses}";

std::string replace_all(std::string text, const std::string& needle,
                        const std::string& value) {
    std::size_t at = 0;
    while ((at = text.find(needle, at)) != std::string::npos) {
        text.replace(at, needle.size(), value);
        at += value.size();
    }
    return text;
}

// Keeps the first `max_points` code points of a UTF-8 string, never splitting
// a multi-byte sequence.
std::string take_prefix_points(const std::string& text, std::size_t max_points) {
    std::size_t points = 0;
    std::size_t i = 0;
    while (i < text.size() && points < max_points) {
        unsigned char lead = static_cast<unsigned char>(text[i]);
        std::size_t step = 1;
        if ((lead & 0xE0) == 0xC0) step = 2;
        else if ((lead & 0xF0) == 0xE0) step = 3;
        else if ((lead & 0xF8) == 0xF0) step = 4;
        i = std::min(text.size(), i + step);
        ++points;
    }
    return text.substr(0, i);
}

std::size_t count_points(const std::string& text) {
    return fuzzy::decode_utf8(text).size();
}

} // namespace

PromptTemplates PromptTemplates::defaults() {
    return PromptTemplates{kDefaultQuestionTemplate, kDefaultAggregationTemplate};
}

std::string render_question_prompt(const harness::Question& q, const PromptTemplates& t) {
    std::ostringstream options;
    for (std::size_t i = 0; i < q.options.size(); ++i) {
        if (i) options << '\n';
        options << static_cast<char>('A' + i) << ". " << q.options[i];
    }
    std::string out = replace_all(t.question_template, "{stem}", q.stem);
    return replace_all(out, "{options}", options.str());
}

RenderedPrompt render_aggregation_prompt(
    const harness::Question& q,
    const std::vector<std::pair<std::string, std::string>>& prior_outputs,
    const PromptTemplates& t, std::size_t response_char_budget) {
    RenderedPrompt out;
    if (prior_outputs.empty()) {
        out.text = render_question_prompt(q, t);
        return out;
    }

    std::vector<std::string> texts;
    texts.reserve(prior_outputs.size());
    std::size_t total_points = 0;
    for (const auto& [id, text] : prior_outputs) {
        texts.push_back(text);
        total_points += count_points(text);
    }
    if (response_char_budget > 0 && total_points > response_char_budget) {
        std::size_t share = response_char_budget / texts.size();
        for (auto& text : texts) {
            if (count_points(text) > share) {
                text = take_prefix_points(text, share);
                out.truncated = true;
            }
        }
    }

    std::ostringstream responses;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (i) responses << "\n\n";
        responses << "Response " << (i + 1) << ":\n" << texts[i];
    }
    std::string rendered =
        replace_all(t.aggregation_template, "{question}", render_question_prompt(q, t));
    out.text = replace_all(rendered, "{responses}", responses.str());
    return out;
}

} // namespace colab::prompts
