#include <algorithm>
#include <string>

#include "doctest.h"

#include "ceeh/logging.hpp"
#include "ceeh/numerics.hpp"

using namespace ceeh;

namespace {

RolloutLogLine sample_line() {
    RolloutLogLine line;
    line.step = 17;
    line.question_id = 3;
    line.rollout_index = 5;
    line.tokens = {2, 7, -1};
    line.length = 3;
    line.correct = true;
    line.correctness_reward = 1.0;
    line.length_penalty = -0.25;
    line.total_reward = 1.025;
    line.raw_advantage = 0.41666666666666663;
    line.entropy_bonus = 0.1;
    line.shaped_advantage = 0.5166666666666666;
    line.seq_entropy_estimate = 1.0397207708399179;
    line.hard_flag = true;
    line.acc_hist = 0.3375;
    line.optimal_length = 3;
    return line;
}

}  // namespace

TEST_CASE("rollout lines survive a json round trip exactly") {
    const RolloutLogLine line = sample_line();
    const RolloutLogLine back = rollout_line_from_json(to_json_line(line));
    CHECK(back.step == line.step);
    CHECK(back.question_id == line.question_id);
    CHECK(back.rollout_index == line.rollout_index);
    CHECK(back.tokens == line.tokens);
    CHECK(back.length == line.length);
    CHECK(back.correct == line.correct);
    CHECK(back.correctness_reward == line.correctness_reward);
    CHECK(back.length_penalty == line.length_penalty);
    CHECK(back.total_reward == line.total_reward);
    CHECK(back.raw_advantage == line.raw_advantage);
    CHECK(back.entropy_bonus == line.entropy_bonus);
    CHECK(back.shaped_advantage == line.shaped_advantage);
    CHECK(back.seq_entropy_estimate == line.seq_entropy_estimate);
    CHECK(back.hard_flag == line.hard_flag);
    CHECK(back.acc_hist == line.acc_hist);
    CHECK(back.optimal_length == line.optimal_length);
}

TEST_CASE("optional fields serialize as null before any history exists") {
    RolloutLogLine line = sample_line();
    line.acc_hist.reset();
    line.optimal_length.reset();
    const std::string json = to_json_line(line);
    CHECK(json.find("\"acc_hist\":null") != std::string::npos);
    CHECK(json.find("\"optimal_length\":null") != std::string::npos);
    const RolloutLogLine back = rollout_line_from_json(json);
    CHECK_FALSE(back.acc_hist.has_value());
    CHECK_FALSE(back.optimal_length.has_value());
}

TEST_CASE("serialization is stable across calls") {
    const RolloutLogLine line = sample_line();
    CHECK(to_json_line(line) == to_json_line(line));
}

TEST_CASE("the metrics header names every column in order") {
    CHECK(metrics_header() ==
          "step,train_acc,mean_length,hard_fraction,mean_entropy_all,mean_entropy_hard,"
          "mean_entropy_easy,mean_entropy_bonus,lambda_easy,lambda_hard,mean_total_reward,"
          "mean_correctness_reward,mean_length_penalty,mean_kl,loss");
}

TEST_CASE("metrics rows use shortest round-trip number formatting") {
    MetricsRow row;
    row.step = 2;
    row.train_acc = 0.1;
    row.mean_length = 4.5;
    row.loss = -0.0014411681972400796;
    const std::string csv = to_csv_row(row);
    CHECK(csv.substr(0, 10) == "2,0.1,4.5,");
    CHECK(csv.find("-0.0014411681972400796") != std::string::npos);
    const size_t columns = static_cast<size_t>(std::count(csv.begin(), csv.end(), ',')) + 1;
    CHECK(columns == 15);
}

TEST_CASE("format_double round-trips doubles through text") {
    for (double v : {0.1, 1.0 / 3.0, -0.95, 1e-17, 123456.789, 0.0}) {
        const std::string text = format_double(v);
        CHECK(std::stod(text) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
}
