#include "ceeh/world.hpp"

#include <cmath>
#include <deque>
#include <vector>

#include "ceeh/rng.hpp"

namespace ceeh {

RolloutGroup sample_group(const QuestionSpec& q, const TabularPolicy& policy, int k,
                          std::uint64_t seed) {
    q.validate();
    if (k < 1) throw std::invalid_argument("sample_group: k must be >= 1");
    if (!policy.covers(q.id))
        throw std::invalid_argument("sample_group: policy does not cover question " +
                                    std::to_string(q.id));
    Rng rng(seed);
    RolloutGroup group;
    group.question_id = q.id;
    group.rollouts.reserve(k);
    const int eos_index = static_cast<int>(q.allowed_digits.size());
    for (int i = 0; i < k; ++i) {
        RolloutRecord rec;
        rec.question_id = q.id;
        int residue = 0;
        for (int t = 0; t < q.max_len; ++t) {
            const Eigen::ArrayXd log_probs = policy.token_log_probs(q, residue, t);
            const Eigen::ArrayXd probs = log_probs.exp();
            const int idx = rng.categorical(probs);
            rec.token_logprobs.push_back(log_probs[idx]);
            rec.token_entropies.push_back(entropy_of(probs));
            if (idx == eos_index) {
                rec.tokens.push_back(kEndToken);
                break;
            }
            const int digit = q.allowed_digits[idx];
            rec.tokens.push_back(digit);
            residue = (residue + digit) % q.modulus;
        }
        rec.length = static_cast<int>(rec.tokens.size());
        rec.correct = verify(q, rec.tokens);
        double logprob_sum = 0.0;
        for (double lp : rec.token_logprobs) logprob_sum += lp;
        rec.seq_entropy_estimate = -logprob_sum / rec.length;
        group.rollouts.push_back(std::move(rec));
    }
    return group;
}

std::optional<int> shortest_correct_length(const QuestionSpec& q) {
    q.validate();
    std::vector<int> dist(q.modulus, -1);
    dist[0] = 0;
    std::deque<int> frontier{0};
    while (!frontier.empty()) {
        const int r = frontier.front();
        frontier.pop_front();
        for (int d : q.allowed_digits) {
            const int next = (r + d) % q.modulus;
            if (dist[next] < 0) {
                dist[next] = dist[r] + 1;
                frontier.push_back(next);
            }
        }
    }
    // digits + terminator must fit in the budget
    if (dist[q.target] >= 0 && dist[q.target] + 1 <= q.max_len) return dist[q.target] + 1;
    return std::nullopt;
}

EpisodeStats exact_episode_stats(const QuestionSpec& q, const TabularPolicy& policy,
                                 long state_limit) {
    q.validate();
    if (static_cast<long>(q.modulus) * q.max_len > state_limit)
        throw std::domain_error("exact_episode_stats: state space " +
                                std::to_string(static_cast<long>(q.modulus) * q.max_len) +
                                " exceeds limit " + std::to_string(state_limit));
    if (!policy.covers(q.id))
        throw std::invalid_argument("exact_episode_stats: policy does not cover question " +
                                    std::to_string(q.id));

    const int eos_index = static_cast<int>(q.allowed_digits.size());
    // mass[r]: probability of being mid-episode at the current step with residue r;
    // nll_mass[r]: same mass weighted by accumulated token NLL.
    Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(q.modulus);
    Eigen::ArrayXd nll_mass = Eigen::ArrayXd::Zero(q.modulus);
    mass[0] = 1.0;

    EpisodeStats stats;
    for (int t = 0; t < q.max_len; ++t) {
        Eigen::ArrayXd next_mass = Eigen::ArrayXd::Zero(q.modulus);
        Eigen::ArrayXd next_nll = Eigen::ArrayXd::Zero(q.modulus);
        const bool last = t + 1 == q.max_len;
        for (int r = 0; r < q.modulus; ++r) {
            if (mass[r] == 0.0 && nll_mass[r] == 0.0) continue;
            const Eigen::ArrayXd log_probs = policy.token_log_probs(q, r, t);
            const Eigen::ArrayXd probs = log_probs.exp();

            const double p_end = probs[eos_index];
            const double end_mass = mass[r] * p_end;
            const double end_nll = p_end * nll_mass[r] - log_probs[eos_index] * end_mass;
            if (r == q.target) stats.success_probability += end_mass;
            stats.expected_length += end_mass * (t + 1);
            stats.expected_seq_nll += end_nll / (t + 1);

            for (int di = 0; di < eos_index; ++di) {
                const double p_d = probs[di];
                const double step_mass = mass[r] * p_d;
                const double step_nll = p_d * nll_mass[r] - log_probs[di] * step_mass;
                if (last) {
                    // budget exhausted mid-sequence: episode ends, incorrect
                    stats.expected_length += step_mass * q.max_len;
                    stats.expected_seq_nll += step_nll / q.max_len;
                } else {
                    const int next_r = (r + q.allowed_digits[di]) % q.modulus;
                    next_mass[next_r] += step_mass;
                    next_nll[next_r] += step_nll;
                }
            }
        }
        mass.swap(next_mass);
        nll_mass.swap(next_nll);
    }
    return stats;
}

}  // namespace ceeh
