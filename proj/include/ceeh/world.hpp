#pragma once

#include <cstdint>
#include <optional>

#include "ceeh/policy.hpp"
#include "ceeh/types.hpp"

namespace ceeh {

inline constexpr long kOracleStateLimit = 1'000'000;

// K autoregressive samples from the policy; draws come from a generator
// seeded only by `seed`, so groups replay exactly regardless of history.
RolloutGroup sample_group(const QuestionSpec& q, const TabularPolicy& policy, int k,
                          std::uint64_t seed);

// Fewest tokens (terminator included) of any correct response, by breadth-first
// search over residues. nullopt when the target is unreachable in budget.
std::optional<int> shortest_correct_length(const QuestionSpec& q);

// Closed-form episode statistics under the full policy distribution, by a
// forward pass over (residue, step) states. expected_seq_nll is the
// expectation of the per-sequence mean token negative log-probability.
struct EpisodeStats {
    double success_probability = 0.0;
    double expected_length = 0.0;
    double expected_seq_nll = 0.0;
};

EpisodeStats exact_episode_stats(const QuestionSpec& q, const TabularPolicy& policy,
                                 long state_limit = kOracleStateLimit);

inline double exact_success_probability(const QuestionSpec& q, const TabularPolicy& policy,
                                        long state_limit = kOracleStateLimit) {
    return exact_episode_stats(q, policy, state_limit).success_probability;
}

inline double exact_expected_length(const QuestionSpec& q, const TabularPolicy& policy,
                                    long state_limit = kOracleStateLimit) {
    return exact_episode_stats(q, policy, state_limit).expected_length;
}

}  // namespace ceeh
