#pragma once

#include "colab/backend.hpp"
#include "colab/errors.hpp"
#include "colab/harness.hpp"
#include "colab/prompts.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace colab::diversity {

/// Pairwise diversity values over one question's k samples, plus their mean.
struct QuestionDiversity {
    std::string question_id;
    std::vector<double> pair_values; // k*(k-1)/2 entries, (i,j) pairs with i<j
    double mean = 0.0;
    std::vector<std::string> samples; // raw texts, kept for audit
};

/// Per-model self-diversity profile: one QuestionDiversity per probe question
/// and their mean as the model's SD value.
struct SdProfile {
    std::string model_id;
    double sd_value = 0.0; // mean of per-question means, in [0, 100]
    int sample_count = 0;  // k
    std::vector<QuestionDiversity> per_question;
};

/// Ordered cluster: members sorted by descending SD value, ties broken by
/// model id; the anchor is the front member.
struct ClusterPlan {
    std::vector<std::string> members;
    std::string anchor_id;
};

/// Diversity of every unordered sample pair (i < j, lexicographic order) and
/// the arithmetic mean. Requires at least 2 samples.
std::pair<std::vector<double>, double> self_diversity(
    const std::vector<std::string>& samples);

struct ProfileOptions {
    int parallelism = 4;
    bool strip_whitespace = false; // trim samples before pairing
    int max_requests = 0;          // 0 = unlimited; else k * |probes| must fit
    prompts::PromptTemplates templates = prompts::PromptTemplates::defaults();
};

/// Raised when a generation request fails mid-profile. Carries the profile
/// over the probe questions that did complete.
class ProfilingError : public Error {
public:
    ProfilingError(const std::string& msg, SdProfile partial)
        : Error(msg), partial_(std::move(partial)) {}
    const SdProfile& partial() const { return partial_; }

private:
    SdProfile partial_;
};

/// Samples each probe question k times from the model (ordinals 0..k-1) and
/// aggregates per-question diversity means into the model's SD value.
SdProfile profile_model(const ModelSpec& spec,
                        const std::vector<harness::Question>& probes, int k,
                        GenerationBackend& backend, const ProfileOptions& opts = {});

/// Picks the m highest-SD models. Deterministic: descending SD, ties by
/// ascending model id. `anchor_override`, when non-empty, promotes that
/// member to the anchor position.
ClusterPlan select_cluster(const std::vector<SdProfile>& profiles, int m,
                           const std::string& anchor_override = {});

nlohmann::json profile_to_json(const SdProfile& profile);
SdProfile profile_from_json(const nlohmann::json& j);

} // namespace colab::diversity
