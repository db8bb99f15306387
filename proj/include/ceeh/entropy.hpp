#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ceeh/types.hpp"
#include "ceeh/world.hpp"

namespace ceeh {

// Cosine-annealed entropy coefficient; hard questions get hard_multiplier
// times the base. With floor_at_zero the coefficient stays nonnegative, so it
// vanishes from the half-horizon on instead of turning into an entropy tax.
struct EntropySchedule {
    double base_coeff = 0.001;
    double hard_multiplier = 5.0;
    int total_steps = 1;
    bool floor_at_zero = true;
};

inline double entropy_coefficient(int step, const EntropySchedule& schedule, bool is_hard) {
    if (schedule.total_steps < 1)
        throw std::invalid_argument("entropy_coefficient: schedule needs total_steps >= 1");
    if (step < 0) throw std::invalid_argument("entropy_coefficient: negative step");
    constexpr double pi = 3.14159265358979323846;
    const double progress =
        static_cast<double>(std::min(step, schedule.total_steps)) / schedule.total_steps;
    double value = std::cos(pi * progress);
    if (schedule.floor_at_zero) value = std::max(0.0, value);
    const double scale = is_hard ? schedule.hard_multiplier : 1.0;
    return scale * schedule.base_coeff * value;
}

// Mean sampled-token negative log-probability of one response.
inline double sequence_entropy_estimate(const RolloutRecord& r) {
    if (r.token_logprobs.empty())
        throw std::invalid_argument("sequence_entropy_estimate: empty rollout");
    double sum = 0.0;
    for (double lp : r.token_logprobs) sum += lp;
    return -sum / static_cast<double>(r.token_logprobs.size());
}

// Expectation of sequence_entropy_estimate under the full policy distribution.
inline double exact_policy_entropy(const QuestionSpec& q, const TabularPolicy& policy,
                                   long state_limit = kOracleStateLimit) {
    return exact_episode_stats(q, policy, state_limit).expected_seq_nll;
}

// Advantage bonus for hard questions: min(alpha * H, |A| / kappa). The kappa
// cap keeps the bonus from flipping the advantage sign.
inline double entropy_bonus(double seq_entropy, double advantage, double alpha, double kappa,
                            bool is_hard) {
    if (alpha <= 0.0) throw std::invalid_argument("entropy_bonus: alpha must be positive");
    if (kappa <= 1.0) throw std::invalid_argument("entropy_bonus: kappa must exceed 1");
    if (!is_hard) return 0.0;
    return std::min(alpha * seq_entropy, std::abs(advantage) / kappa);
}

inline double shaped_advantage(double advantage, double bonus) { return advantage + bonus; }

}  // namespace ceeh
