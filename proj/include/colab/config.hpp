#pragma once

#include "colab/backend.hpp"
#include "colab/harness.hpp"
#include "colab/orchestrator.hpp"
#include "colab/prompts.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace colab::config {

enum class RunMode { Live, Record, Replay };

RunMode mode_from_string(const std::string& name);
std::string mode_to_string(RunMode mode);

struct ProbeConfig {
    std::string questions_path;
    int k = 10;
    double temperature = 0.7;
    int max_requests = 0; // 0 = unlimited
};

struct ClusterConfig {
    int size = 0; // 0 = all configured models
    std::string anchor; // optional override
};

struct EvalConfig {
    std::string dataset_path;
    harness::DatasetSchema schema = harness::DatasetSchema::Choices4;
    double threshold = 0.65;
};

struct IoConfig {
    std::string output_dir = "out";
    std::string fixtures_path;
    RunMode mode = RunMode::Replay;
};

struct LimitsConfig {
    int parallelism = 4;
    std::size_t context_chars = 60000;
};

struct PromptPaths {
    std::string question_template_path;
    std::string aggregation_template_path;
};

/// Everything a run needs, loaded from one JSON document. Relative paths
/// resolve against the config file's directory; the digest is the SHA-256 of
/// the canonicalized document and is stamped into every output artifact.
struct RunConfig {
    std::vector<ModelSpec> models;
    ProbeConfig probe;
    ClusterConfig cluster;
    orchestrator::MaskSchedule schedule;
    bool schedule_from_file = false;
    EvalConfig eval;
    IoConfig io;
    LimitsConfig limits;
    PromptPaths prompt_paths;
    bool strip_whitespace = false;

    std::string digest;
    std::string base_dir;

    std::string resolve(const std::string& path) const;
    int effective_cluster_size() const;
    orchestrator::MaskSchedule effective_schedule() const;
    prompts::PromptTemplates load_templates() const;
};

RunConfig config_from_json(const nlohmann::json& doc, const std::string& base_dir);
RunConfig load_config(const std::string& path);

/// Cross-field checks: unique model ids, k >= 2, schedule coherent with the
/// cluster size, fixture path present for replay/record modes, and so on.
void validate(const RunConfig& cfg);

} // namespace colab::config
