#include "colab/harness.hpp"

#include "colab/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

using nlohmann::json;

namespace colab::harness {

char max_letter_for(DatasetSchema schema) {
    return schema == DatasetSchema::Choices4 ? 'D' : 'J';
}

DatasetSchema schema_from_string(const std::string& name) {
    if (name == "choices4") return DatasetSchema::Choices4;
    if (name == "choices10") return DatasetSchema::Choices10;
    throw ConfigError("unknown dataset schema: " + name + " (expected choices4 or choices10)");
}

std::string schema_to_string(DatasetSchema schema) {
    return schema == DatasetSchema::Choices4 ? "choices4" : "choices10";
}

std::string canonical_label(const std::set<char>& letters) {
    return {letters.begin(), letters.end()}; // std::set iterates in order
}

namespace {

std::set<char> parse_answer_field(const json& answer, const std::string& path,
                                  std::size_t lineno) {
    std::vector<std::string> parts;
    if (answer.is_string()) {
        for (char c : answer.get<std::string>())
            if (!std::isspace(static_cast<unsigned char>(c)) && c != ',')
                parts.push_back(std::string(1, c));
    } else if (answer.is_array()) {
        for (const auto& a : answer) {
            if (!a.is_string())
                throw ParseError("dataset: answer array must hold letters at " + path + ":" +
                                     std::to_string(lineno),
                                 path, lineno);
            parts.push_back(a.get<std::string>());
        }
    } else {
        throw ParseError("dataset: answer must be a string or array at " + path + ":" +
                             std::to_string(lineno),
                         path, lineno);
    }
    std::set<char> gold;
    for (const auto& p : parts) {
        if (p.size() != 1 || p[0] < 'A' || p[0] > 'Z')
            throw ParseError("dataset: bad answer letter '" + p + "' at " + path + ":" +
                                 std::to_string(lineno),
                             path, lineno);
        gold.insert(p[0]);
    }
    if (gold.empty())
        throw ParseError("dataset: empty answer at " + path + ":" + std::to_string(lineno),
                         path, lineno);
    return gold;
}

} // namespace

std::vector<Question> load_dataset(const std::string& path, DatasetSchema schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("dataset: cannot open " + path, path, 0);

    const char schema_max = max_letter_for(schema);
    std::vector<Question> out;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("dataset: bad JSON at " + path + ":" + std::to_string(lineno) +
                                 ": " + e.what(),
                             path, lineno);
        }
        for (const char* field : {"id", "question", "options", "answer", "discipline"}) {
            if (!rec.contains(field))
                throw ParseError("dataset: missing field \"" + std::string(field) + "\" at " +
                                     path + ":" + std::to_string(lineno),
                                 path, lineno);
        }

        Question q;
        q.id = rec["id"].get<std::string>();
        q.stem = rec["question"].get<std::string>();
        q.discipline = rec["discipline"].get<std::string>();
        if (q.id.empty() || q.discipline.empty())
            throw ParseError("dataset: empty id or discipline at " + path + ":" +
                                 std::to_string(lineno),
                             path, lineno);
        if (!seen_ids.insert(q.id).second)
            throw ParseError("dataset: duplicate id \"" + q.id + "\" at " + path + ":" +
                                 std::to_string(lineno),
                             path, lineno);

        const json& options = rec["options"];
        if (!options.is_object() || options.size() < 2)
            throw ParseError("dataset: options must be an object with at least 2 entries at " +
                                 path + ":" + std::to_string(lineno),
                             path, lineno);
        // Options must form a contiguous letter range starting at A.
        for (std::size_t i = 0; i < options.size(); ++i) {
            std::string letter(1, static_cast<char>('A' + i));
            if (!options.contains(letter))
                throw ParseError("dataset: options not contiguous from A (missing " + letter +
                                     ") at " + path + ":" + std::to_string(lineno),
                                 path, lineno);
            q.options.push_back(options[letter].get<std::string>());
        }
        if (q.max_letter() > schema_max)
            throw ParseError("dataset: option range exceeds schema " +
                                 schema_to_string(schema) + " at " + path + ":" +
                                 std::to_string(lineno),
                             path, lineno);

        q.gold = parse_answer_field(rec["answer"], path, lineno);
        for (char g : q.gold) {
            if (g > q.max_letter())
                throw ParseError("dataset: gold letter " + std::string(1, g) +
                                     " outside options at " + path + ":" +
                                     std::to_string(lineno),
                                 path, lineno);
        }
        out.push_back(std::move(q));
    }
    return out;
}

namespace {

constexpr std::string_view kWrapPunct = "()[]{}<>.,:;!?*_`\"'";

std::string_view strip_punct(std::string_view tok) {
    while (!tok.empty() && kWrapPunct.find(tok.front()) != std::string_view::npos)
        tok.remove_prefix(1);
    while (!tok.empty() && kWrapPunct.find(tok.back()) != std::string_view::npos)
        tok.remove_suffix(1);
    return tok;
}

std::vector<std::string_view> split_tokens(std::string_view text) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) toks.push_back(text.substr(start, i - start));
    }
    return toks;
}

bool is_connector(std::string_view core) {
    return core == "and" || core == "or" || core == "&" || core == "+";
}

std::optional<char> uppercase_letter(std::string_view tok, char max_letter) {
    auto core = strip_punct(tok);
    if (core.size() == 1 && core[0] >= 'A' && core[0] <= max_letter) return core[0];
    return std::nullopt;
}

std::optional<char> any_case_letter(std::string_view tok, char max_letter) {
    auto core = strip_punct(tok);
    if (core.size() != 1) return std::nullopt;
    char up = static_cast<char>(std::toupper(static_cast<unsigned char>(core[0])));
    if (up >= 'A' && up <= max_letter) return up;
    return std::nullopt;
}

// Collects the letter list immediately after a cue match: letters joined by
// commas/and/or form a multi-answer set; anything else ends the statement, so
// "The answer is B.\nC" stays {B}. Bare lowercase "a" and "i" are skipped as
// option letters — they are almost always the article or pronoun ("the answer
// is a close call") — but punctuated or uppercase forms ("a.", "(a)", "A")
// still count.
std::set<char> letters_after_cue(std::string_view tail, char max_letter) {
    std::set<char> letters;
    enum class State { Seeking, AfterLetter, ExpectLetter };
    State state = State::Seeking;
    for (std::string_view tok : split_tokens(tail)) {
        auto core = strip_punct(tok);
        if (core.empty()) continue; // pure punctuation such as "**"
        const bool connector = is_connector(core);
        const bool word_hazard = tok.size() == 1 && (tok[0] == 'a' || tok[0] == 'i');
        std::optional<char> letter;
        if (!word_hazard) letter = any_case_letter(tok, max_letter);
        const bool list_comma = tok.back() == ',';

        if (state == State::AfterLetter) {
            if (!connector) break;
            state = State::ExpectLetter;
            continue;
        }
        // Seeking and ExpectLetter both accept a letter or skip a connector.
        if (letter) {
            letters.insert(*letter);
            state = list_comma ? State::ExpectLetter : State::AfterLetter;
            continue;
        }
        if (connector) continue;
        break;
    }
    return letters;
}

} // namespace

std::set<char> extract_answer(std::string_view text, char max_letter) {
    if (max_letter < 'A') throw InvalidInputError("extract_answer: empty letter range");

    // Rule 1: explicit "answer is/are/:" statements, last one with letters wins.
    static const std::regex cue(R"(\banswers?\s*(?:is|are|:))", std::regex::icase);
    std::set<char> rule1;
    std::string owned(text);
    for (auto it = std::sregex_iterator(owned.begin(), owned.end(), cue);
         it != std::sregex_iterator(); ++it) {
        std::size_t tail_at = static_cast<std::size_t>(it->position()) + it->length();
        auto letters = letters_after_cue(std::string_view(owned).substr(tail_at), max_letter);
        if (!letters.empty()) rule1 = letters;
    }
    if (!rule1.empty()) return rule1;

    // Rule 2: last standalone letter on the final non-empty line.
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            lines.push_back(text.substr(start, end - start));
            start = end + 1;
            if (end == text.size()) break;
        }
    }
    for (auto line = lines.rbegin(); line != lines.rend(); ++line) {
        auto toks = split_tokens(*line);
        if (toks.empty()) continue;
        std::optional<char> found;
        for (auto tok : toks)
            if (auto l = uppercase_letter(tok, max_letter)) found = *l;
        if (found) return {*found};
        break; // only the final non-empty line participates in rule 2
    }

    // Rule 3: last standalone letter anywhere.
    std::optional<char> last;
    for (auto tok : split_tokens(text))
        if (auto l = uppercase_letter(tok, max_letter)) last = *l;
    if (last) return {*last};

    return {};
}

bool EvalReport::all_pass() const {
    return std::all_of(per_discipline.begin(), per_discipline.end(),
                       [](const auto& kv) { return kv.second.pass; });
}

EvalReport evaluate(const std::vector<Question>& dataset,
                    const std::map<std::string, std::string>& answer_texts,
                    double threshold) {
    std::vector<std::string> missing;
    for (const auto& q : dataset)
        if (!answer_texts.count(q.id)) missing.push_back(q.id);
    if (!missing.empty()) {
        std::string msg = "evaluation: missing answers for " +
                          std::to_string(missing.size()) + " question(s):";
        for (const auto& id : missing) msg += " " + id;
        throw EvaluationError(msg, std::move(missing));
    }

    EvalReport report;
    report.threshold = threshold;
    std::map<std::string, metrics::ConfusionTally> tallies;
    for (const auto& q : dataset) {
        auto extracted = extract_answer(answer_texts.at(q.id), q.max_letter());
        std::optional<std::string> predicted;
        if (!extracted.empty()) predicted = canonical_label(extracted);
        tallies[q.discipline].add(canonical_label(q.gold), predicted);
    }

    metrics::ConfusionTally overall;
    for (auto& [discipline, tally] : tallies) {
        DisciplineResult r;
        r.tally = tally;
        r.metric_values = metrics::compute_all(tally);
        r.question_count = tally.total();
        r.pass = r.metric_values.acc >= threshold;
        overall = metrics::ConfusionTally::merge(overall, tally);
        report.per_discipline.emplace(discipline, std::move(r));
    }
    report.overall_tally = overall;
    report.overall = metrics::compute_all(overall);
    report.total_questions = overall.total();
    return report;
}

namespace {

json metric_set_to_json(const metrics::MetricSet& m) {
    return json{{"acc", m.acc}, {"f1", m.f1},   {"pre", m.pre}, {"sen", m.sen},
                {"spe", m.spe}, {"mcc", m.mcc}, {"ck", m.ck}};
}

metrics::MetricSet metric_set_from_json(const json& j) {
    metrics::MetricSet m;
    m.acc = j.at("acc");
    m.f1 = j.at("f1");
    m.pre = j.at("pre");
    m.sen = j.at("sen");
    m.spe = j.at("spe");
    m.mcc = j.at("mcc");
    m.ck = j.at("ck");
    return m;
}

json tally_to_json(const metrics::ConfusionTally& t) {
    return json{{"classes", t.classes()},
                {"counts", t.counts()},
                {"abstains", t.abstains()}};
}

metrics::ConfusionTally tally_from_json(const json& j) {
    return metrics::ConfusionTally::from_matrix(
        j.at("classes").get<std::vector<std::string>>(),
        j.at("counts").get<std::vector<std::vector<long long>>>(),
        j.at("abstains").get<std::vector<long long>>());
}

} // namespace

json report_to_json(const EvalReport& report) {
    json models = json::array();
    for (const auto& [id, name] : report.models)
        models.push_back(json{{"id", id}, {"model_name", name}});
    json per = json::object();
    for (const auto& [discipline, r] : report.per_discipline) {
        per[discipline] = json{{"metrics", metric_set_to_json(r.metric_values)},
                               {"tally", tally_to_json(r.tally)},
                               {"questions", r.question_count},
                               {"pass", r.pass}};
    }
    return json{{"manifest", json{{"config_digest", report.config_digest},
                                  {"mode", report.mode},
                                  {"models", models},
                                  {"generated_at", report.generated_at}}},
                {"threshold", report.threshold},
                {"overall", json{{"metrics", metric_set_to_json(report.overall)},
                                 {"tally", tally_to_json(report.overall_tally)},
                                 {"questions", report.total_questions}}},
                {"per_discipline", per}};
}

EvalReport report_from_json(const json& j) {
    EvalReport report;
    report.threshold = j.at("threshold");
    const json& manifest = j.at("manifest");
    report.config_digest = manifest.value("config_digest", std::string{});
    report.mode = manifest.value("mode", std::string{});
    report.generated_at = manifest.value("generated_at", std::string{});
    for (const auto& m : manifest.value("models", json::array()))
        report.models.emplace_back(m.value("id", std::string{}),
                                   m.value("model_name", std::string{}));
    for (const auto& [discipline, r] : j.at("per_discipline").items()) {
        DisciplineResult d;
        d.metric_values = metric_set_from_json(r.at("metrics"));
        d.tally = tally_from_json(r.at("tally"));
        d.question_count = r.at("questions");
        d.pass = r.at("pass");
        report.per_discipline.emplace(discipline, std::move(d));
    }
    report.overall = metric_set_from_json(j.at("overall").at("metrics"));
    report.overall_tally = tally_from_json(j.at("overall").at("tally"));
    report.total_questions = j.at("overall").at("questions");
    return report;
}

namespace {

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
    return buf;
}

void table_row(std::ostringstream& out, const std::string& name, long long n,
               const metrics::MetricSet& m, const char* pass) {
    out << std::left;
    out.width(28);
    out << (name.size() > 28 ? name.substr(0, 28) : name);
    out << std::right;
    out.width(5);
    out << n;
    for (double v : {m.acc, m.f1, m.pre, m.sen, m.spe, m.mcc, m.ck}) {
        out.width(8);
        out << pct(v);
    }
    out.width(7);
    out << pass;
    out << '\n';
}

} // namespace

std::string report_to_table(const EvalReport& report) {
    std::ostringstream out;
    out << std::left;
    out.width(28);
    out << "Discipline";
    out << std::right;
    out.width(5);
    out << "N";
    for (const char* h : {"ACC", "F1", "PRE", "SEN", "SPE", "MCC", "CK"}) {
        out.width(8);
        out << h;
    }
    out.width(7);
    out << "Pass";
    out << '\n' << std::string(96, '-') << '\n';
    for (const auto& [discipline, r] : report.per_discipline)
        table_row(out, discipline, r.question_count, r.metric_values, r.pass ? "yes" : "NO");
    out << std::string(96, '-') << '\n';
    table_row(out, "Overall", report.total_questions, report.overall,
              report.all_pass() ? "yes" : "NO");
    return out.str();
}

} // namespace colab::harness
