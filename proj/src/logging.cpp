#include "ceeh/logging.hpp"

#include "json.hpp"

#include "ceeh/numerics.hpp"

namespace ceeh {

std::string to_json_line(const RolloutLogLine& line) {
    nlohmann::json j;
    j["step"] = line.step;
    j["question_id"] = line.question_id;
    j["rollout_index"] = line.rollout_index;
    j["tokens"] = line.tokens;
    j["length"] = line.length;
    j["correct"] = line.correct;
    j["correctness_reward"] = line.correctness_reward;
    j["length_penalty"] = line.length_penalty;
    j["total_reward"] = line.total_reward;
    j["raw_advantage"] = line.raw_advantage;
    j["entropy_bonus"] = line.entropy_bonus;
    j["shaped_advantage"] = line.shaped_advantage;
    j["seq_entropy_estimate"] = line.seq_entropy_estimate;
    j["hard_flag"] = line.hard_flag;
    if (line.acc_hist)
        j["acc_hist"] = *line.acc_hist;
    else
        j["acc_hist"] = nullptr;
    if (line.optimal_length)
        j["optimal_length"] = *line.optimal_length;
    else
        j["optimal_length"] = nullptr;
    return j.dump();
}

RolloutLogLine rollout_line_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    RolloutLogLine line;
    line.step = j.at("step").get<int>();
    line.question_id = j.at("question_id").get<int>();
    line.rollout_index = j.at("rollout_index").get<int>();
    line.tokens = j.at("tokens").get<std::vector<int>>();
    line.length = j.at("length").get<int>();
    line.correct = j.at("correct").get<bool>();
    line.correctness_reward = j.at("correctness_reward").get<double>();
    line.length_penalty = j.at("length_penalty").get<double>();
    line.total_reward = j.at("total_reward").get<double>();
    line.raw_advantage = j.at("raw_advantage").get<double>();
    line.entropy_bonus = j.at("entropy_bonus").get<double>();
    line.shaped_advantage = j.at("shaped_advantage").get<double>();
    line.seq_entropy_estimate = j.at("seq_entropy_estimate").get<double>();
    line.hard_flag = j.at("hard_flag").get<bool>();
    if (!j.at("acc_hist").is_null()) line.acc_hist = j.at("acc_hist").get<double>();
    if (!j.at("optimal_length").is_null())
        line.optimal_length = j.at("optimal_length").get<int>();
    return line;
}

std::string metrics_header() {
    return "step,train_acc,mean_length,hard_fraction,mean_entropy_all,mean_entropy_hard,"
           "mean_entropy_easy,mean_entropy_bonus,lambda_easy,lambda_hard,mean_total_reward,"
           "mean_correctness_reward,mean_length_penalty,mean_kl,loss";
}

std::string to_csv_row(const MetricsRow& r) {
    std::string out = std::to_string(r.step);
    for (double v : {r.train_acc, r.mean_length, r.hard_fraction, r.mean_entropy_all,
                     r.mean_entropy_hard, r.mean_entropy_easy, r.mean_entropy_bonus,
                     r.lambda_easy, r.lambda_hard, r.mean_total_reward,
                     r.mean_correctness_reward, r.mean_length_penalty, r.mean_kl, r.loss}) {
        out += ',';
        out += format_double(v);
    }
    return out;
}

}  // namespace ceeh
