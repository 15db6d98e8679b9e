#pragma once

#include "colab/backend.hpp"
#include "colab/diversity.hpp"
#include "colab/errors.hpp"
#include "colab/harness.hpp"
#include "colab/prompts.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace colab::orchestrator {

/// Which models to mask given their cross-consistency (diversity against the
/// anchor output). AsWritten removes the lowest values, the literal argmin
/// form; Inverse removes the highest. Both ship because the source material
/// states the two readings in different places; AsWritten is the default.
enum class MaskPolarity { AsWritten, Inverse };

MaskPolarity polarity_from_string(const std::string& name);
std::string polarity_to_string(MaskPolarity p);

/// How many models are removed after each layer.
struct MaskSchedule {
    int total_layers = 1;
    std::vector<int> masks_after_layer; // total_layers - 1 entries
    MaskPolarity polarity = MaskPolarity::AsWritten;

    /// Default deployment shape: mask two models per layer until one remains
    /// (cluster of six: 6 -> 4 -> 2 -> 1 over four layers).
    static MaskSchedule paper_default(int cluster_size);

    /// Checks shape and that every intermediate active count stays >= 1.
    void validate(int cluster_size) const;
};

struct MaskedEntry {
    std::string model_id;
    int layer = 0;            // layer after which the model was removed
    std::optional<double> cc; // absent when the removal was failure-forced
    bool forced = false;
};

/// Snapshot of one completed layer. All active models receive the same
/// rendered prompt; outputs hold one entry per active model except those
/// force-masked by backend failure.
struct LayerState {
    int layer_index = 0;
    std::vector<std::string> active_ids;
    std::map<std::string, ModelOutput> outputs;
    std::map<std::string, double> cc; // non-anchor actives vs the anchor output
    std::vector<MaskedEntry> masked_so_far; // cumulative across the run
    std::string anchor_id;
    std::string prompt;
    bool truncated = false;

    /// Active models minus those masked at this layer; the generators of the
    /// next layer and the owners of the outputs it aggregates.
    std::vector<std::string> survivors() const;
    std::vector<MaskedEntry> masked_here() const;
};

struct CollaborationTrace {
    std::string question_id;
    std::vector<LayerState> layers;
    std::string final_text;
    std::optional<std::string> final_answer; // canonical letters; nullopt = abstain
    std::string config_digest;
};

/// Raised when a run cannot finish (the anchor failed after retries). Carries
/// the layers completed so far.
class CollaborationError : public Error {
public:
    CollaborationError(const std::string& msg, CollaborationTrace partial)
        : Error(msg), partial_(std::make_shared<CollaborationTrace>(std::move(partial))) {}
    const CollaborationTrace& partial() const { return *partial_; }

private:
    std::shared_ptr<CollaborationTrace> partial_;
};

struct OrchestratorOptions {
    prompts::PromptTemplates templates = prompts::PromptTemplates::defaults();
    std::size_t response_char_budget = 60000; // code points; 0 = unlimited
    int parallelism = 4;
};

/// Renders the prompt a layer sends: the bare question when prior_outputs is
/// empty (layer 1), otherwise the aggregation template over the surviving
/// outputs in the given order.
std::string build_aggregation_prompt(
    const harness::Question& q,
    const std::vector<std::pair<std::string, std::string>>& prior_outputs,
    const prompts::PromptTemplates& templates = prompts::PromptTemplates::defaults(),
    std::size_t response_char_budget = 0);

/// Cross-consistency of each entry against the anchor output: the diversity
/// value of (anchor text, other text). The anchor must not appear in others.
std::map<std::string, double> compute_cc(const std::string& anchor_output,
                                         const std::map<std::string, std::string>& others);

/// Picks `count` models to mask from the cc map. AsWritten takes the
/// smallest values (iterated argmin), Inverse the largest; ties break by
/// ascending model id. count must not exceed the map size.
std::vector<std::string> mask_lowest_cc(const std::map<std::string, double>& cc, int count,
                                        MaskPolarity polarity = MaskPolarity::AsWritten);

/// Resolves cluster member ids to their specs for the duration of a run.
using ModelRegistry = std::map<std::string, ModelSpec>;

ModelRegistry make_registry(const std::vector<ModelSpec>& specs);

/// Seed state before layer 1: the cluster members, no outputs.
LayerState initial_state(const diversity::ClusterPlan& plan);

/// Executes one layer: renders the prompt from prev's survivors, fans out
/// generation to them, computes cc against the anchor and applies the
/// schedule's mask count for the new layer. Models whose requests fail after
/// retries are force-masked; a failed anchor aborts via CollaborationError
/// (thrown by run_collaboration, which owns the trace).
LayerState run_layer(const harness::Question& q, const LayerState& prev,
                     const ModelRegistry& models, GenerationBackend& backend,
                     const MaskSchedule& schedule, const OrchestratorOptions& opts = {});

/// Runs all layers of the collaboration for one question and extracts the
/// final answer from the anchor's last-layer output.
CollaborationTrace run_collaboration(const harness::Question& q,
                                     const diversity::ClusterPlan& plan,
                                     const MaskSchedule& schedule,
                                     const ModelRegistry& models,
                                     GenerationBackend& backend,
                                     const OrchestratorOptions& opts = {});

nlohmann::json trace_to_json(const CollaborationTrace& trace);
CollaborationTrace trace_from_json(const nlohmann::json& j);

} // namespace colab::orchestrator
