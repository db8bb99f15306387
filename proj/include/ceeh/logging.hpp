#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ceeh/types.hpp"

namespace ceeh {

// One rollout as it appears in the run log (JSON object per line).
// acc_hist and optimal_length are the values the step actually used, i.e. the
// snapshot from before the update; null until the question has history.
struct RolloutLogLine {
    int step = 0;
    int question_id = 0;
    int rollout_index = 0;
    std::vector<int> tokens;
    int length = 0;
    bool correct = false;
    double correctness_reward = 0.0;
    double length_penalty = 0.0;
    double total_reward = 0.0;
    double raw_advantage = 0.0;
    double entropy_bonus = 0.0;
    double shaped_advantage = 0.0;
    double seq_entropy_estimate = 0.0;
    bool hard_flag = false;
    std::optional<double> acc_hist;
    std::optional<int> optimal_length;
};

std::string to_json_line(const RolloutLogLine& line);
RolloutLogLine rollout_line_from_json(const std::string& text);

struct MetricsRow {
    int step = 0;
    double train_acc = 0.0;
    double mean_length = 0.0;
    double hard_fraction = 0.0;
    double mean_entropy_all = 0.0;
    double mean_entropy_hard = 0.0;
    double mean_entropy_easy = 0.0;
    double mean_entropy_bonus = 0.0;
    double lambda_easy = 0.0;
    double lambda_hard = 0.0;
    double mean_total_reward = 0.0;
    double mean_correctness_reward = 0.0;
    double mean_length_penalty = 0.0;
    double mean_kl = 0.0;
    double loss = 0.0;
};

std::string metrics_header();
std::string to_csv_row(const MetricsRow& row);

}  // namespace ceeh
