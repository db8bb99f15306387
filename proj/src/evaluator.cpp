#include "ceeh/evaluator.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

namespace ceeh {

double pass_at_k(int n, int c, int k) {
    if (n < 1) throw std::invalid_argument("pass_at_k: n must be >= 1");
    if (c < 0 || c > n) throw std::invalid_argument("pass_at_k: c must be in [0, n]");
    if (k < 1 || k > n) throw std::invalid_argument("pass_at_k: k must be in [1, n]");
    if (n - c < k) return 1.0;
    // C(n-c, k)/C(n, k) as a running product keeps everything in [0, 1]
    double miss = 1.0;
    for (int i = 0; i < k; ++i) {
        miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    }
    return 1.0 - miss;
}

double avg_at_k(const std::map<int, QuestionTally>& per_question, bool allow_ragged) {
    if (per_question.empty()) throw std::invalid_argument("avg_at_k: no questions");
    int common_n = -1;
    double acc_sum = 0.0;
    for (const auto& [id, tally] : per_question) {
        if (tally.n < 1)
            throw std::invalid_argument("avg_at_k: question " + std::to_string(id) +
                                        " has no rollouts");
        if (common_n < 0) common_n = tally.n;
        if (tally.n != common_n && !allow_ragged)
            throw std::invalid_argument(
                "avg_at_k: rollout counts differ across questions (use the ragged override "
                "to accept)");
        acc_sum += static_cast<double>(tally.c) / tally.n;
    }
    return 100.0 * acc_sum / static_cast<double>(per_question.size());
}

std::optional<double> nag(double acc, double len, double base_acc, double base_len,
                          NagForm form) {
    if (base_acc <= 0.0 || base_len <= 0.0)
        throw std::invalid_argument("nag: base accuracy and length must be positive");
    if (len >= base_len) return std::nullopt;  // no length saved: undefined
    const double acc_drop = (1.0 - acc / base_acc) * 100.0;
    const double len_saved = std::sqrt(1.0 - len / base_len);
    if (form == NagForm::product) return acc_drop * len_saved;
    return acc_drop / len_saved;
}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
    std::string msg = "log parse failed:";
    for (const std::string& e : errors) msg += "\n  " + e;
    return msg;
}

}  // namespace

LogParseError::LogParseError(std::vector<std::string> errors_)
    : std::runtime_error(join_errors(errors_)), errors(std::move(errors_)) {}

long ParsedLog::total_rollouts() const {
    long total = 0;
    for (const auto& [id, tally] : per_question) total += tally.n;
    return total;
}

ParsedLog ingest_log(std::istream& in, const std::string& origin) {
    ParsedLog parsed;
    std::vector<std::string> errors;
    std::set<std::pair<int, long>> seen;  // (question, step * big + rollout_index)
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            errors.push_back(where + ": not valid JSON: " + e.what());
            continue;
        }
        try {
            const int qid = j.at("question_id").get<int>();
            const bool correct = j.at("correct").get<bool>();
            const int length = j.at("length").get<int>();
            if (length < 1) {
                errors.push_back(where + ": length must be >= 1");
                continue;
            }
            if (j.contains("rollout_index")) {
                const long step = j.contains("step") ? j.at("step").get<long>() : 0;
                const long key = step * 1000000L + j.at("rollout_index").get<int>();
                if (!seen.insert({qid, key}).second) {
                    errors.push_back(where + ": duplicate rollout " +
                                     std::to_string(j.at("rollout_index").get<int>()) +
                                     " for question " + std::to_string(qid));
                    continue;
                }
            }
            QuestionTally& tally = parsed.per_question[qid];
            tally.n += 1;
            tally.c += correct ? 1 : 0;
            tally.total_length += length;
        } catch (const std::exception& e) {
            errors.push_back(where + ": " + e.what());
        }
    }
    if (!errors.empty()) throw LogParseError(std::move(errors));
    if (parsed.per_question.empty())
        parsed.warnings.push_back(origin + ": no rollouts found; summary is empty");
    return parsed;
}

ParsedLog ingest_log_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LogParseError({"cannot open log file " + path.string()});
    return ingest_log(in, path.string());
}

EvalSummary summarize(const ParsedLog& log, const std::vector<int>& ks, bool allow_ragged) {
    EvalSummary summary;
    summary.questions = static_cast<int>(log.per_question.size());
    summary.rollouts = log.total_rollouts();
    if (log.per_question.empty()) return summary;

    summary.avg_acc_percent = avg_at_k(log.per_question, allow_ragged);
    double length_sum = 0.0;
    for (const auto& [id, tally] : log.per_question) length_sum += tally.mean_length();
    summary.mean_length = length_sum / summary.questions;

    for (int k : ks) {
        double sum = 0.0;
        for (const auto& [id, tally] : log.per_question) sum += pass_at_k(tally.n, tally.c, k);
        summary.pass_at[k] = sum / summary.questions;
    }
    return summary;
}

}  // namespace ceeh
