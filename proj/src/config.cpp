#include "colab/config.hpp"

#include "colab/digest.hpp"
#include "colab/errors.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace colab::config {

RunMode mode_from_string(const std::string& name) {
    if (name == "live") return RunMode::Live;
    if (name == "record") return RunMode::Record;
    if (name == "replay") return RunMode::Replay;
    throw ConfigError("unknown mode: " + name + " (expected live, record or replay)");
}

std::string mode_to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Live: return "live";
        case RunMode::Record: return "record";
        case RunMode::Replay: return "replay";
    }
    return "replay";
}

namespace {

BackendKind kind_from_string(const std::string& name) {
    if (name == "openai_compatible") return BackendKind::OpenAiCompatible;
    if (name == "local_runtime") return BackendKind::LocalRuntime;
    if (name == "replay") return BackendKind::Replay;
    throw ConfigError("unknown backend kind: " + name);
}

ModelSpec model_from_json(const json& m) {
    if (!m.contains("id")) throw ConfigError("model entry missing \"id\"");
    ModelSpec spec;
    spec.model_id = m["id"].get<std::string>();
    spec.kind = kind_from_string(m.value("kind", std::string("replay")));
    spec.endpoint = m.value("endpoint", std::string{});
    spec.model_name = m.value("model_name", spec.model_id);
    spec.fixture_path = m.value("fixtures", std::string{});
    if (m.contains("sampling")) {
        const json& s = m["sampling"];
        spec.sampling.temperature = s.value("temperature", spec.sampling.temperature);
        spec.sampling.top_p = s.value("top_p", spec.sampling.top_p);
        spec.sampling.max_tokens = s.value("max_tokens", spec.sampling.max_tokens);
        if (s.contains("seed") && !s["seed"].is_null())
            spec.sampling.seed = s["seed"].get<std::int64_t>();
    }
    spec.timeout_ms = m.value("timeout_ms", spec.timeout_ms);
    if (m.contains("retry")) {
        const json& r = m["retry"];
        spec.retry.max_attempts = r.value("max_attempts", spec.retry.max_attempts);
        if (r.contains("backoff_ms"))
            spec.retry.backoff_ms = r["backoff_ms"].get<std::vector<int>>();
    }
    if ((spec.kind == BackendKind::OpenAiCompatible || spec.kind == BackendKind::LocalRuntime) &&
        spec.endpoint.empty())
        throw ConfigError("model " + spec.model_id + ": remote kind requires an endpoint");
    return spec;
}

} // namespace

std::string RunConfig::resolve(const std::string& path) const {
    if (path.empty() || base_dir.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).string();
}

int RunConfig::effective_cluster_size() const {
    if (cluster.size > 0) return cluster.size;
    return static_cast<int>(models.size());
}

orchestrator::MaskSchedule RunConfig::effective_schedule() const {
    if (schedule_from_file) return schedule;
    auto s = orchestrator::MaskSchedule::paper_default(effective_cluster_size());
    s.polarity = schedule.polarity;
    return s;
}

prompts::PromptTemplates RunConfig::load_templates() const {
    auto templates = prompts::PromptTemplates::defaults();
    auto read_file = [this](const std::string& path) {
        std::ifstream in(resolve(path));
        if (!in) throw ConfigError("cannot open prompt template: " + resolve(path));
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    if (!prompt_paths.question_template_path.empty())
        templates.question_template = read_file(prompt_paths.question_template_path);
    if (!prompt_paths.aggregation_template_path.empty())
        templates.aggregation_template = read_file(prompt_paths.aggregation_template_path);
    return templates;
}

RunConfig config_from_json(const json& doc, const std::string& base_dir) {
    RunConfig cfg;
    cfg.base_dir = base_dir;
    cfg.digest = sha256_hex(doc.dump());

    if (!doc.contains("models") || !doc["models"].is_array() || doc["models"].empty())
        throw ConfigError("config: \"models\" must be a non-empty array");
    for (const auto& m : doc["models"]) cfg.models.push_back(model_from_json(m));

    if (doc.contains("probe")) {
        const json& p = doc["probe"];
        cfg.probe.questions_path = p.value("questions", std::string{});
        cfg.probe.k = p.value("k", cfg.probe.k);
        cfg.probe.temperature = p.value("temperature", cfg.probe.temperature);
        cfg.probe.max_requests = p.value("max_requests", cfg.probe.max_requests);
    }
    if (doc.contains("cluster")) {
        const json& c = doc["cluster"];
        cfg.cluster.size = c.value("size", cfg.cluster.size);
        cfg.cluster.anchor = c.value("anchor", std::string{});
    }
    if (doc.contains("schedule")) {
        const json& s = doc["schedule"];
        if (s.contains("masks_after_layer")) {
            cfg.schedule.masks_after_layer = s["masks_after_layer"].get<std::vector<int>>();
            cfg.schedule.total_layers =
                s.value("layers", static_cast<int>(cfg.schedule.masks_after_layer.size()) + 1);
            cfg.schedule_from_file = true;
        } else if (s.contains("layers")) {
            throw ConfigError("config: schedule.layers requires schedule.masks_after_layer");
        }
        cfg.schedule.polarity =
            orchestrator::polarity_from_string(s.value("polarity", std::string("as_written")));
    }
    if (doc.contains("eval")) {
        const json& e = doc["eval"];
        cfg.eval.dataset_path = e.value("dataset", std::string{});
        cfg.eval.schema =
            harness::schema_from_string(e.value("schema", std::string("choices4")));
        cfg.eval.threshold = e.value("threshold", cfg.eval.threshold);
    }
    if (doc.contains("io")) {
        const json& io = doc["io"];
        cfg.io.output_dir = io.value("output_dir", cfg.io.output_dir);
        cfg.io.fixtures_path = io.value("fixtures", std::string{});
        cfg.io.mode = mode_from_string(io.value("mode", std::string("replay")));
    }
    if (doc.contains("limits")) {
        const json& l = doc["limits"];
        cfg.limits.parallelism = l.value("parallelism", cfg.limits.parallelism);
        cfg.limits.context_chars = l.value("context_chars", cfg.limits.context_chars);
    }
    if (doc.contains("prompts")) {
        const json& p = doc["prompts"];
        cfg.prompt_paths.question_template_path = p.value("question_template", std::string{});
        cfg.prompt_paths.aggregation_template_path =
            p.value("aggregation_template", std::string{});
    }
    if (doc.contains("normalize"))
        cfg.strip_whitespace = doc["normalize"].value("strip_whitespace", false);

    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return config_from_json(doc, fs::path(path).parent_path().string());
}

void validate(const RunConfig& cfg) {
    std::set<std::string> ids;
    for (const auto& m : cfg.models) {
        if (m.model_id.empty()) throw ConfigError("config: model with empty id");
        if (!ids.insert(m.model_id).second)
            throw ConfigError("config: duplicate model id " + m.model_id);
    }
    if (cfg.probe.k < 2)
        throw ConfigError("config: probe.k must be >= 2 (self-diversity needs pairs), got " +
                          std::to_string(cfg.probe.k));
    if (cfg.cluster.size < 0 ||
        cfg.cluster.size > static_cast<int>(cfg.models.size()))
        throw ConfigError("config: cluster.size must be between 1 and " +
                          std::to_string(cfg.models.size()));
    if (!cfg.cluster.anchor.empty() && !ids.count(cfg.cluster.anchor))
        throw ConfigError("config: cluster.anchor names unknown model " + cfg.cluster.anchor);
    if (cfg.eval.threshold < 0.0 || cfg.eval.threshold > 1.0)
        throw ConfigError("config: eval.threshold must lie in [0, 1]");
    if (cfg.limits.parallelism < 1)
        throw ConfigError("config: limits.parallelism must be >= 1");
    if ((cfg.io.mode == RunMode::Replay || cfg.io.mode == RunMode::Record) &&
        cfg.io.fixtures_path.empty())
        throw ConfigError("config: io.fixtures is required in replay and record modes");
    cfg.effective_schedule().validate(cfg.effective_cluster_size());
}

} // namespace colab::config
