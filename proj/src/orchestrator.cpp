#include "colab/orchestrator.hpp"

#include "colab/fuzzy.hpp"
#include "colab/parallel.hpp"

#include <algorithm>
#include <mutex>

using nlohmann::json;

namespace colab::orchestrator {

MaskPolarity polarity_from_string(const std::string& name) {
    if (name == "as_written") return MaskPolarity::AsWritten;
    if (name == "inverse") return MaskPolarity::Inverse;
    throw ConfigError("unknown mask polarity: " + name + " (expected as_written or inverse)");
}

std::string polarity_to_string(MaskPolarity p) {
    return p == MaskPolarity::AsWritten ? "as_written" : "inverse";
}

MaskSchedule MaskSchedule::paper_default(int cluster_size) {
    if (cluster_size < 1) throw InvalidInputError("mask schedule: cluster size must be >= 1");
    MaskSchedule s;
    int active = cluster_size;
    while (active > 1) {
        int drop = std::min(2, active - 1);
        s.masks_after_layer.push_back(drop);
        active -= drop;
    }
    s.total_layers = static_cast<int>(s.masks_after_layer.size()) + 1;
    return s;
}

void MaskSchedule::validate(int cluster_size) const {
    if (total_layers < 1) throw ConfigError("mask schedule: layers must be >= 1");
    if (static_cast<int>(masks_after_layer.size()) != total_layers - 1)
        throw ConfigError("mask schedule: expected " + std::to_string(total_layers - 1) +
                          " mask counts for " + std::to_string(total_layers) +
                          " layers, got " + std::to_string(masks_after_layer.size()));
    int active = cluster_size;
    for (int drop : masks_after_layer) {
        if (drop < 0) throw ConfigError("mask schedule: negative mask count");
        active -= drop;
        if (active < 1)
            throw ConfigError("mask schedule: active count drops below 1 for cluster of " +
                              std::to_string(cluster_size));
    }
}

std::vector<std::string> LayerState::survivors() const {
    std::vector<std::string> out;
    for (const auto& id : active_ids) {
        bool masked = std::any_of(masked_so_far.begin(), masked_so_far.end(),
                                  [&](const MaskedEntry& e) {
                                      return e.layer == layer_index && e.model_id == id;
                                  });
        if (!masked) out.push_back(id);
    }
    return out;
}

std::vector<MaskedEntry> LayerState::masked_here() const {
    std::vector<MaskedEntry> out;
    for (const auto& e : masked_so_far)
        if (e.layer == layer_index) out.push_back(e);
    return out;
}

std::string build_aggregation_prompt(
    const harness::Question& q,
    const std::vector<std::pair<std::string, std::string>>& prior_outputs,
    const prompts::PromptTemplates& templates, std::size_t response_char_budget) {
    return prompts::render_aggregation_prompt(q, prior_outputs, templates, response_char_budget)
        .text;
}

std::map<std::string, double> compute_cc(const std::string& anchor_output,
                                         const std::map<std::string, std::string>& others) {
    std::map<std::string, double> cc;
    for (const auto& [id, text] : others) cc[id] = fuzzy::diversity(anchor_output, text);
    return cc;
}

std::vector<std::string> mask_lowest_cc(const std::map<std::string, double>& cc, int count,
                                        MaskPolarity polarity) {
    if (count < 0) throw InvalidInputError("mask_lowest_cc: negative count");
    if (static_cast<std::size_t>(count) > cc.size())
        throw InvalidInputError("mask_lowest_cc: count " + std::to_string(count) +
                                " exceeds the " + std::to_string(cc.size()) +
                                " maskable models");
    // Iterated argmin over a fixed cc map is the same as taking the sorted
    // bottom `count`; ties break by model id so decisions are reproducible.
    std::vector<std::pair<std::string, double>> order(cc.begin(), cc.end());
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second)
            return polarity == MaskPolarity::AsWritten ? a.second < b.second
                                                       : a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> masked;
    for (int i = 0; i < count; ++i) masked.push_back(order[static_cast<std::size_t>(i)].first);
    return masked;
}

LayerState initial_state(const diversity::ClusterPlan& plan) {
    if (plan.members.empty()) throw InvalidInputError("collaboration: empty cluster plan");
    LayerState seed;
    seed.layer_index = 0;
    seed.active_ids = plan.members;
    seed.anchor_id = plan.anchor_id;
    return seed;
}

namespace {

struct GenerationFailure {
    std::string model_id;
    std::string reason;
};

} // namespace

ModelRegistry make_registry(const std::vector<ModelSpec>& specs) {
    ModelRegistry registry;
    for (const auto& spec : specs) {
        if (!registry.emplace(spec.model_id, spec).second)
            throw ConfigError("duplicate model id: " + spec.model_id);
    }
    return registry;
}

LayerState run_layer(const harness::Question& q, const LayerState& prev,
                     const ModelRegistry& models, GenerationBackend& backend,
                     const MaskSchedule& schedule, const OrchestratorOptions& opts) {
    LayerState next;
    next.layer_index = prev.layer_index + 1;
    next.anchor_id = prev.anchor_id;
    next.active_ids = prev.survivors();
    next.masked_so_far = prev.masked_so_far;
    for (const auto& id : next.active_ids)
        if (!models.count(id))
            throw InvalidInputError("run_layer: no spec registered for model " + id);

    // The prompt embeds the previous layer's surviving outputs, in active
    // order; layer 1 sees the bare question.
    std::vector<std::pair<std::string, std::string>> prior;
    if (prev.layer_index >= 1) {
        for (const auto& id : prev.survivors())
            prior.emplace_back(id, prev.outputs.at(id).text);
    }
    auto rendered = prompts::render_aggregation_prompt(q, prior, opts.templates,
                                                       opts.response_char_budget);
    next.prompt = rendered.text;
    next.truncated = rendered.truncated;

    // Fan out one request per active model; the layer is a barrier.
    std::vector<std::optional<ModelOutput>> results(next.active_ids.size());
    std::vector<std::optional<GenerationFailure>> failures(next.active_ids.size());
    parallel_for(next.active_ids.size(), opts.parallelism, [&](std::size_t i) {
        const std::string& id = next.active_ids[i];
        try {
            results[i] = backend.generate(models.at(id), next.prompt, 0);
        } catch (const BackendError& e) {
            failures[i] = GenerationFailure{id, e.what()};
        } catch (const FixtureMissingError& e) {
            failures[i] = GenerationFailure{id, e.what()};
        }
    });

    for (std::size_t i = 0; i < next.active_ids.size(); ++i) {
        if (results[i]) next.outputs.emplace(next.active_ids[i], std::move(*results[i]));
    }

    // Failure handling: non-anchor failures become forced masks with no cc;
    // an anchor failure is unrecoverable for this question.
    for (std::size_t i = 0; i < next.active_ids.size(); ++i) {
        if (!failures[i]) continue;
        if (failures[i]->model_id == next.anchor_id)
            throw BackendError("anchor model " + next.anchor_id +
                                   " failed at layer " + std::to_string(next.layer_index) +
                                   ": " + failures[i]->reason,
                               false);
        next.masked_so_far.push_back(
            MaskedEntry{failures[i]->model_id, next.layer_index, std::nullopt, true});
    }

    std::map<std::string, std::string> others;
    for (const auto& [id, out] : next.outputs)
        if (id != next.anchor_id) others.emplace(id, out.text);
    if (auto it = next.outputs.find(next.anchor_id); it != next.outputs.end())
        next.cc = compute_cc(it->second.text, others);

    // Scheduled masking for this layer boundary; forced masks already shrank
    // the candidate set, so clamp rather than over-mask past the anchor.
    int scheduled = 0;
    if (next.layer_index < schedule.total_layers)
        scheduled = schedule.masks_after_layer[static_cast<std::size_t>(next.layer_index - 1)];
    int count = std::min<int>(scheduled, static_cast<int>(next.cc.size()));
    for (const auto& id : mask_lowest_cc(next.cc, count, schedule.polarity))
        next.masked_so_far.push_back(
            MaskedEntry{id, next.layer_index, next.cc.at(id), false});

    return next;
}

CollaborationTrace run_collaboration(const harness::Question& q,
                                     const diversity::ClusterPlan& plan,
                                     const MaskSchedule& schedule,
                                     const ModelRegistry& models,
                                     GenerationBackend& backend,
                                     const OrchestratorOptions& opts) {
    schedule.validate(static_cast<int>(plan.members.size()));

    CollaborationTrace trace;
    trace.question_id = q.id;
    LayerState state = initial_state(plan);
    for (int layer = 1; layer <= schedule.total_layers; ++layer) {
        try {
            state = run_layer(q, state, models, backend, schedule, opts);
        } catch (const BackendError& e) {
            throw CollaborationError("collaboration on " + q.id + " aborted: " + e.what(),
                                     trace);
        }
        trace.layers.push_back(state);
    }

    trace.final_text = state.outputs.at(state.anchor_id).text;
    auto letters = harness::extract_answer(trace.final_text, q.max_letter());
    if (!letters.empty()) trace.final_answer = harness::canonical_label(letters);
    return trace;
}

json trace_to_json(const CollaborationTrace& trace) {
    json layers = json::array();
    for (const auto& layer : trace.layers) {
        json outputs = json::object();
        for (const auto& [id, out] : layer.outputs) outputs[id] = out.text;
        json cc = json::object();
        for (const auto& [id, v] : layer.cc) cc[id] = v;
        json masked = json::array();
        for (const auto& e : layer.masked_here()) {
            json entry{{"model_id", e.model_id}, {"forced", e.forced}};
            if (e.cc) entry["cc"] = *e.cc; else entry["cc"] = nullptr;
            masked.push_back(entry);
        }
        layers.push_back(json{{"layer_index", layer.layer_index},
                              {"prompt", layer.prompt},
                              {"active", layer.active_ids},
                              {"outputs", outputs},
                              {"cc", cc},
                              {"masked", masked},
                              {"truncated", layer.truncated}});
    }
    json j{{"question_id", trace.question_id},
           {"anchor_id", trace.layers.empty() ? std::string{} : trace.layers.front().anchor_id},
           {"layers", layers},
           {"final_text", trace.final_text},
           {"config_digest", trace.config_digest}};
    j["final_answer"] = trace.final_answer ? json(*trace.final_answer) : json(nullptr);
    return j;
}

CollaborationTrace trace_from_json(const json& j) {
    CollaborationTrace trace;
    trace.question_id = j.at("question_id");
    trace.final_text = j.at("final_text");
    trace.config_digest = j.value("config_digest", std::string{});
    if (j.contains("final_answer") && !j["final_answer"].is_null())
        trace.final_answer = j["final_answer"].get<std::string>();

    const std::string anchor = j.value("anchor_id", std::string{});
    std::vector<MaskedEntry> cumulative;
    for (const auto& lj : j.at("layers")) {
        LayerState layer;
        layer.layer_index = lj.at("layer_index");
        layer.anchor_id = anchor;
        layer.prompt = lj.value("prompt", std::string{});
        layer.active_ids = lj.at("active").get<std::vector<std::string>>();
        layer.truncated = lj.value("truncated", false);
        for (const auto& [id, text] : lj.at("outputs").items()) {
            ModelOutput out;
            out.model_id = id;
            out.text = text.get<std::string>();
            layer.outputs.emplace(id, std::move(out));
        }
        for (const auto& [id, v] : lj.at("cc").items()) layer.cc[id] = v.get<double>();
        for (const auto& mj : lj.at("masked")) {
            MaskedEntry e;
            e.model_id = mj.at("model_id");
            e.layer = layer.layer_index;
            e.forced = mj.value("forced", false);
            if (mj.contains("cc") && !mj["cc"].is_null()) e.cc = mj["cc"].get<double>();
            cumulative.push_back(e);
        }
        layer.masked_so_far = cumulative;
        trace.layers.push_back(std::move(layer));
    }
    return trace;
}

} // namespace colab::orchestrator
