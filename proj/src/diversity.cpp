#include "colab/diversity.hpp"

#include "colab/errors.hpp"
#include "colab/fuzzy.hpp"
#include "colab/parallel.hpp"

#include <algorithm>
#include <cctype>

using nlohmann::json;

namespace colab::diversity {

std::pair<std::vector<double>, double> self_diversity(
    const std::vector<std::string>& samples) {
    if (samples.size() < 2)
        throw InvalidInputError("self_diversity: need at least 2 samples, got " +
                                std::to_string(samples.size()));
    std::vector<double> pairs;
    pairs.reserve(samples.size() * (samples.size() - 1) / 2);
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j)
            pairs.push_back(fuzzy::diversity(samples[i], samples[j]));
    double sum = 0;
    for (double v : pairs) sum += v;
    return {std::move(pairs), sum / static_cast<double>(pairs.size())};
}

namespace {

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

SdProfile profile_model(const ModelSpec& spec,
                        const std::vector<harness::Question>& probes, int k,
                        GenerationBackend& backend, const ProfileOptions& opts) {
    if (k < 2) throw InvalidInputError("profile_model: k must be >= 2, got " + std::to_string(k));
    if (probes.empty()) throw InvalidInputError("profile_model: empty probe set");
    const long long requests = static_cast<long long>(k) * static_cast<long long>(probes.size());
    if (opts.max_requests > 0 && requests > opts.max_requests)
        throw BudgetError("profile_model: " + std::to_string(requests) +
                          " requests exceed the budget of " + std::to_string(opts.max_requests));

    SdProfile profile;
    profile.model_id = spec.model_id;
    profile.sample_count = k;

    for (const auto& probe : probes) {
        const std::string prompt = prompts::render_question_prompt(probe, opts.templates);

        // Fan out the k draws; samples are placed by ordinal so the pairing
        // below is independent of completion order.
        std::vector<std::string> samples(static_cast<std::size_t>(k));
        try {
            parallel_for(static_cast<std::size_t>(k), opts.parallelism, [&](std::size_t ordinal) {
                samples[ordinal] =
                    backend.generate(spec, prompt, static_cast<int>(ordinal)).text;
            });
        } catch (const BackendError& e) {
            throw ProfilingError("profile_model: " + spec.model_id + " failed on probe " +
                                     probe.id + ": " + e.what(),
                                 profile);
        } catch (const FixtureMissingError& e) {
            throw ProfilingError("profile_model: " + spec.model_id + " failed on probe " +
                                     probe.id + ": " + e.what(),
                                 profile);
        }
        if (opts.strip_whitespace)
            for (auto& s : samples) s = strip(s);

        QuestionDiversity qd;
        qd.question_id = probe.id;
        qd.samples = samples;
        std::tie(qd.pair_values, qd.mean) = self_diversity(samples);
        profile.per_question.push_back(std::move(qd));
    }

    double sum = 0;
    for (const auto& qd : profile.per_question) sum += qd.mean;
    profile.sd_value = sum / static_cast<double>(profile.per_question.size());
    return profile;
}

ClusterPlan select_cluster(const std::vector<SdProfile>& profiles, int m,
                           const std::string& anchor_override) {
    if (m < 1) throw InvalidInputError("select_cluster: m must be >= 1");
    if (static_cast<std::size_t>(m) > profiles.size())
        throw InvalidInputError("select_cluster: m = " + std::to_string(m) +
                                " exceeds the " + std::to_string(profiles.size()) +
                                " available profiles");

    std::vector<const SdProfile*> sorted;
    sorted.reserve(profiles.size());
    for (const auto& p : profiles) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](const SdProfile* a, const SdProfile* b) {
        if (a->sd_value != b->sd_value) return a->sd_value > b->sd_value;
        return a->model_id < b->model_id;
    });

    ClusterPlan plan;
    for (int i = 0; i < m; ++i) plan.members.push_back(sorted[i]->model_id);
    if (!anchor_override.empty()) {
        auto it = std::find(plan.members.begin(), plan.members.end(), anchor_override);
        if (it == plan.members.end())
            throw InvalidInputError("select_cluster: anchor override \"" + anchor_override +
                                    "\" is not among the selected members");
        std::rotate(plan.members.begin(), it, it + 1);
    }
    plan.anchor_id = plan.members.front();
    return plan;
}

json profile_to_json(const SdProfile& profile) {
    json per = json::array();
    for (const auto& qd : profile.per_question) {
        per.push_back(json{{"question_id", qd.question_id},
                           {"mean", qd.mean},
                           {"pair_values", qd.pair_values},
                           {"samples", qd.samples}});
    }
    return json{{"model_id", profile.model_id},
                {"sd_value", profile.sd_value},
                {"sample_count", profile.sample_count},
                {"per_question", per}};
}

SdProfile profile_from_json(const json& j) {
    SdProfile profile;
    profile.model_id = j.at("model_id");
    profile.sd_value = j.at("sd_value");
    profile.sample_count = j.at("sample_count");
    for (const auto& q : j.at("per_question")) {
        QuestionDiversity qd;
        qd.question_id = q.at("question_id");
        qd.mean = q.at("mean");
        qd.pair_values = q.at("pair_values").get<std::vector<double>>();
        qd.samples = q.at("samples").get<std::vector<std::string>>();
        profile.per_question.push_back(std::move(qd));
    }
    return profile;
}

} // namespace colab::diversity
