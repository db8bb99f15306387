#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Core>

#include "ceeh/difficulty.hpp"
#include "ceeh/types.hpp"

namespace ceeh {

inline constexpr double kPenaltyClipLow = -0.9;
inline constexpr double kPenaltyClipHigh = 1.0;

struct LengthPenaltyOutput {
    double raw = 0.0;      // (L - L_x) / L_x, zero for incorrect rollouts
    double clipped = 0.0;  // raw clamped to [-0.9, 1.0]
    bool applied = false;  // gate outcome; false means it contributes nothing
};

// Anchor update: shortest correct length observed so far, never increasing.
inline QuestionState update_optimal_length(QuestionState state, const RolloutGroup& group) {
    for (const RolloutRecord& r : group.rollouts) {
        if (!r.correct) continue;
        if (!state.optimal_length || r.length < *state.optimal_length)
            state.optimal_length = r.length;
    }
    return state;
}

// Penalize only when the question currently beats its historical accuracy.
inline bool gate(double acc_now, double acc_hist) { return acc_now > acc_hist; }

// Relative excess over the anchor. Requires the anchor to be set.
inline LengthPenaltyOutput length_penalty(int length, int optimal_length, bool correct,
                                          bool gate_on) {
    if (optimal_length <= 0)
        throw std::invalid_argument("length_penalty: anchor must be positive");
    LengthPenaltyOutput out;
    out.applied = gate_on;
    if (correct) {
        out.raw = (static_cast<double>(length) - optimal_length) /
                  static_cast<double>(optimal_length);
        out.clipped = std::clamp(out.raw, kPenaltyClipLow, kPenaltyClipHigh);
    }
    return out;
}

// Unset anchor means the penalty is undefined and must not apply.
inline LengthPenaltyOutput gated_length_penalty(int length, std::optional<int> optimal_length,
                                                bool correct, bool gate_on) {
    if (!optimal_length) return LengthPenaltyOutput{};
    return length_penalty(length, *optimal_length, correct, gate_on);
}

inline double total_reward(double correctness, const LengthPenaltyOutput& penalty,
                           double length_coeff) {
    return correctness - length_coeff * (penalty.applied ? penalty.clipped : 0.0);
}

// Baseline length shaping: z-score of length among the group's correct
// rollouts, clamped to the same band as the anchored penalty. Incorrect
// rollouts and groups with fewer than two correct rollouts get zero.
inline Eigen::ArrayXd group_normalized_length_penalties(const RolloutGroup& group,
                                                        double epsilon) {
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(group.group_size());
    int n_correct = 0;
    double sum = 0.0;
    for (const RolloutRecord& r : group.rollouts) {
        if (r.correct) {
            ++n_correct;
            sum += r.length;
        }
    }
    if (n_correct < 2) return out;
    const double mean = sum / n_correct;
    double var = 0.0;
    for (const RolloutRecord& r : group.rollouts) {
        if (r.correct) var += (r.length - mean) * (r.length - mean);
    }
    const double std_dev = std::sqrt(var / n_correct);
    for (int i = 0; i < group.group_size(); ++i) {
        const RolloutRecord& r = group.rollouts[i];
        if (!r.correct) continue;
        const double z = (r.length - mean) / (std_dev + epsilon);
        out[i] = std::clamp(z, kPenaltyClipLow, kPenaltyClipHigh);
    }
    return out;
}

}  // namespace ceeh
