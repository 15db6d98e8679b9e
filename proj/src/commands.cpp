#include "colab/commands.hpp"

#include "colab/diversity.hpp"
#include "colab/errors.hpp"
#include "colab/harness.hpp"
#include "colab/orchestrator.hpp"
#include "colab/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace colab::commands {

namespace {

std::ostream& stream(const CommandContext& ctx) { return ctx.out ? *ctx.out : std::cout; }

std::string iso_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageError("cannot write " + path.string());
    out << content;
    if (!out) throw StorageError("write failed for " + path.string());
}

void write_json_file(const fs::path& path, const json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open " + path.string());
    return json::parse(in);
}

std::vector<harness::Question> load_probes(const config::RunConfig& cfg) {
    if (cfg.probe.questions_path.empty())
        throw ConfigError("config: probe.questions is required for profiling");
    return harness::load_dataset(cfg.resolve(cfg.probe.questions_path), cfg.eval.schema);
}

std::vector<harness::Question> load_eval_dataset(const config::RunConfig& cfg) {
    if (cfg.eval.dataset_path.empty())
        throw ConfigError("config: eval.dataset is required");
    return harness::load_dataset(cfg.resolve(cfg.eval.dataset_path), cfg.eval.schema);
}

fs::path profiles_dir(const config::RunConfig& cfg) {
    return fs::path(cfg.resolve(cfg.io.output_dir)) / "profiles";
}

fs::path traces_dir(const config::RunConfig& cfg) {
    return fs::path(cfg.resolve(cfg.io.output_dir)) / "traces";
}

} // namespace

void BackendBundle::flush(const std::string& path) const {
    if (store && !path.empty()) store->save(path);
}

BackendBundle make_backend(const config::RunConfig& cfg,
                           std::shared_ptr<GenerationBackend> live_override) {
    BackendBundle bundle;
    const std::string fixtures = cfg.resolve(cfg.io.fixtures_path);
    switch (cfg.io.mode) {
        case config::RunMode::Replay:
            bundle.store = std::make_shared<ReplayStore>(ReplayStore::load(fixtures));
            bundle.backend = std::make_shared<ReplayBackend>(bundle.store);
            break;
        case config::RunMode::Record: {
            bundle.store = std::make_shared<ReplayStore>();
            if (fs::exists(fixtures))
                *bundle.store = ReplayStore::load(fixtures);
            auto live = live_override ? live_override : std::make_shared<HttpBackend>();
            bundle.backend = std::make_shared<RecordingBackend>(bundle.store, live);
            break;
        }
        case config::RunMode::Live:
            bundle.backend = live_override ? live_override : std::make_shared<HttpBackend>();
            break;
    }
    return bundle;
}

int cmd_profile(const CommandContext& ctx) {
    const auto& cfg = ctx.cfg;
    auto probes = load_probes(cfg);
    auto bundle = make_backend(cfg, ctx.live_override);

    diversity::ProfileOptions opts;
    opts.parallelism = cfg.limits.parallelism;
    opts.strip_whitespace = cfg.strip_whitespace;
    opts.max_requests = cfg.probe.max_requests;
    opts.templates = cfg.load_templates();

    std::vector<diversity::SdProfile> profiles;
    std::vector<std::pair<std::string, std::string>> failures;
    for (const auto& spec : cfg.models) {
        ModelSpec probing = spec;
        probing.sampling.temperature = cfg.probe.temperature;
        try {
            profiles.push_back(
                diversity::profile_model(probing, probes, cfg.probe.k, *bundle.backend, opts));
        } catch (const std::exception& e) {
            failures.emplace_back(spec.model_id, e.what());
        }
    }

    for (const auto& profile : profiles)
        write_json_file(profiles_dir(cfg) / (profile.model_id + ".json"),
                        diversity::profile_to_json(profile));
    if (cfg.io.mode == config::RunMode::Record)
        bundle.flush(cfg.resolve(cfg.io.fixtures_path));

    std::sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) {
        if (a.sd_value != b.sd_value) return a.sd_value > b.sd_value;
        return a.model_id < b.model_id;
    });
    auto& out = stream(ctx);
    out << "Model                           SD\n";
    out << "------------------------------------\n";
    for (const auto& p : profiles) {
        char sd[16];
        std::snprintf(sd, sizeof sd, "%8.2f", p.sd_value);
        out << p.model_id;
        for (std::size_t pad = p.model_id.size(); pad < 28; ++pad) out << ' ';
        out << sd << '\n';
    }
    for (const auto& [id, reason] : failures)
        out << "FAILED " << id << ": " << reason << '\n';
    return failures.empty() ? 0 : 1;
}

namespace {

std::vector<diversity::SdProfile> load_profiles(const config::RunConfig& cfg) {
    std::vector<diversity::SdProfile> profiles;
    for (const auto& spec : cfg.models) {
        fs::path path = profiles_dir(cfg) / (spec.model_id + ".json");
        if (fs::exists(path))
            profiles.push_back(diversity::profile_from_json(read_json_file(path)));
    }
    return profiles;
}

} // namespace

int cmd_run(const CommandContext& ctx, const std::string& question_id) {
    const auto& cfg = ctx.cfg;
    auto dataset = load_eval_dataset(cfg);
    if (!question_id.empty()) {
        auto it = std::find_if(dataset.begin(), dataset.end(),
                               [&](const auto& q) { return q.id == question_id; });
        if (it == dataset.end())
            throw InvalidInputError("run: question id not in dataset: " + question_id);
        dataset = {*it};
    }

    auto profiles = load_profiles(cfg);
    const int m = cfg.effective_cluster_size();
    if (static_cast<int>(profiles.size()) < m)
        throw ConfigError("run: found " + std::to_string(profiles.size()) + " profiles but the "
                          "cluster needs " + std::to_string(m) + "; run `profile` first");
    auto plan = diversity::select_cluster(profiles, m, cfg.cluster.anchor);
    auto schedule = cfg.effective_schedule();
    auto registry = orchestrator::make_registry(cfg.models);
    auto bundle = make_backend(cfg, ctx.live_override);

    orchestrator::OrchestratorOptions opts;
    opts.templates = cfg.load_templates();
    opts.response_char_budget = cfg.limits.context_chars;
    opts.parallelism = cfg.limits.parallelism;

    const fs::path dir = traces_dir(cfg);
    fs::create_directories(dir);

    std::mutex log_mutex;
    std::vector<std::pair<std::string, std::string>> failures;
    std::size_t skipped = 0, completed = 0;
    parallel_for(dataset.size(), cfg.limits.parallelism, [&](std::size_t i) {
        const auto& q = dataset[i];
        fs::path path = dir / (q.id + ".json");
        if (fs::exists(path)) {
            std::lock_guard<std::mutex> lock(log_mutex);
            ++skipped;
            return;
        }
        try {
            auto trace =
                orchestrator::run_collaboration(q, plan, schedule, registry, *bundle.backend, opts);
            trace.config_digest = cfg.digest;
            write_json_file(path, orchestrator::trace_to_json(trace));
            std::lock_guard<std::mutex> lock(log_mutex);
            ++completed;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(log_mutex);
            failures.emplace_back(q.id, e.what());
        }
    });

    if (cfg.io.mode == config::RunMode::Record)
        bundle.flush(cfg.resolve(cfg.io.fixtures_path));

    auto& out = stream(ctx);
    out << "traces: " << completed << " written, " << skipped << " already present, "
        << failures.size() << " failed\n";
    for (const auto& [id, reason] : failures) out << "FAILED " << id << ": " << reason << '\n';
    return failures.empty() ? 0 : 1;
}

int cmd_eval(const CommandContext& ctx, bool enforce_pass) {
    const auto& cfg = ctx.cfg;
    auto dataset = load_eval_dataset(cfg);

    std::map<std::string, std::string> answer_texts;
    const fs::path dir = traces_dir(cfg);
    for (const auto& q : dataset) {
        fs::path path = dir / (q.id + ".json");
        if (!fs::exists(path)) continue; // evaluate() reports the gap
        auto trace = orchestrator::trace_from_json(read_json_file(path));
        answer_texts[q.id] = trace.final_text;
    }

    auto report = harness::evaluate(dataset, answer_texts, cfg.eval.threshold);
    report.config_digest = cfg.digest;
    report.mode = config::mode_to_string(cfg.io.mode);
    for (const auto& spec : cfg.models)
        report.models.emplace_back(spec.model_id, spec.model_name);
    report.generated_at = iso_utc_now();

    const fs::path out_dir = cfg.resolve(cfg.io.output_dir);
    write_json_file(out_dir / "report.json", harness::report_to_json(report));
    const std::string table = harness::report_to_table(report);
    write_text_file(out_dir / "report.txt", table);
    stream(ctx) << table;

    if (enforce_pass && !report.all_pass()) return 2;
    return 0;
}

int cmd_report(const CommandContext& ctx, const std::string& report_path) {
    const auto& cfg = ctx.cfg;
    fs::path path = report_path.empty()
                        ? fs::path(cfg.resolve(cfg.io.output_dir)) / "report.json"
                        : fs::path(cfg.resolve(report_path));
    auto report = harness::report_from_json(read_json_file(path));
    stream(ctx) << harness::report_to_table(report);
    return 0;
}

int cmd_record_fixtures(const CommandContext& ctx) {
    CommandContext recording = ctx;
    recording.cfg.io.mode = config::RunMode::Record;
    int rc = cmd_profile(recording);
    int rc_run = cmd_run(recording);
    return rc != 0 ? rc : rc_run;
}

} // namespace colab::commands
