#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ceeh {

// Unbiased estimator 1 - C(n-c, k)/C(n, k): probability that a draw of k
// rollouts from the n recorded ones contains a correct answer.
double pass_at_k(int n, int c, int k);

// Mean per-question accuracy as a percentage.
struct QuestionTally {
    int n = 0;
    int c = 0;
    double total_length = 0.0;

    double mean_length() const { return n > 0 ? total_length / n : 0.0; }
};

double avg_at_k(const std::map<int, QuestionTally>& per_question, bool allow_ragged);

enum class NagForm { product, quotient };

// Accuracy loss per unit of length saved, nullopt when no length was saved.
// Both base values must be positive; accuracies are percentages.
std::optional<double> nag(double acc, double len, double base_acc, double base_len,
                          NagForm form);

struct LogParseError : std::runtime_error {
    explicit LogParseError(std::vector<std::string> errors_);
    std::vector<std::string> errors;
};

// Reads either full run-log lines or the minimal {question_id, correct,
// length} schema. Malformed lines are collected with their line numbers and
// raised together; duplicate (question_id, rollout_index) pairs are errors.
struct ParsedLog {
    std::map<int, QuestionTally> per_question;
    std::vector<std::string> warnings;

    long total_rollouts() const;
};

ParsedLog ingest_log(std::istream& in, const std::string& origin = "<log>");
ParsedLog ingest_log_file(const std::filesystem::path& path);

struct EvalSummary {
    int questions = 0;
    long rollouts = 0;
    double avg_acc_percent = 0.0;  // avg@n over whatever n the log holds
    double mean_length = 0.0;      // mean over questions of per-question mean
    std::map<int, double> pass_at;
};

EvalSummary summarize(const ParsedLog& log, const std::vector<int>& ks, bool allow_ragged);

}  // namespace ceeh
