#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ceeh {

// Terminator token id. Digits are their own ids (>= 0).
inline constexpr int kEndToken = -1;

// Thrown when training state stops being finite; the CLI maps it to exit 2.
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& what, int question_id_, int step_)
        : std::runtime_error(what), question_id(question_id_), step(step_) {}
    int question_id = -1;
    int step = -1;
};

// A digit-sum question: emit digits from allowed_digits, then the terminator.
// Correct iff the digit sum is congruent to target mod modulus and the
// terminator appears within the max_len token budget.
struct QuestionSpec {
    int id = 0;
    int target = 0;
    int modulus = 2;
    std::vector<int> allowed_digits;  // sorted, unique, each in [0, modulus)
    int max_len = 2;                  // budget including the terminator

    int vocab_size() const { return static_cast<int>(allowed_digits.size()) + 1; }
    void validate() const;
};

struct RolloutRecord {
    int question_id = 0;
    std::vector<int> tokens;
    int length = 0;  // tokens.size(), terminator included when present
    bool correct = false;
    std::vector<double> token_logprobs;   // sampling-time log pi(y_t | s_t)
    std::vector<double> token_entropies;  // full-distribution entropy at each visited state
    double seq_entropy_estimate = 0.0;    // -(1/length) * sum(token_logprobs)
};

struct RolloutGroup {
    int question_id = 0;
    std::vector<RolloutRecord> rollouts;

    int group_size() const { return static_cast<int>(rollouts.size()); }
};

// Per-rollout reward accounting, logged field-by-field.
// total_reward == correctness_reward - length_coeff * length_penalty, where
// length_penalty already carries the clip and the gate (0 when not applied).
struct RewardBreakdown {
    double correctness_reward = 0.0;
    double length_penalty = 0.0;
    double total_reward = 0.0;
    double raw_advantage = 0.0;
    double entropy_bonus = 0.0;
    double shaped_advantage = 0.0;
};

enum class AdvantageMode { mean_baseline, std_normalized };
enum class EntropySurrogate { state_entropy, sampled_nll };

const char* to_string(AdvantageMode mode);
const char* to_string(EntropySurrogate s);

// Every tunable of a run. Parsed from a flat key=value file; see config.hpp.
struct RunConfig {
    int rollouts_per_question = 12;
    double temperature = 0.6;
    double learning_rate = 10.0;
    int total_steps = 200;
    std::uint64_t seed = 1;

    double clip_low = 0.2;
    double clip_high = 0.28;
    double kl_coeff = 0.001;
    AdvantageMode advantage_mode = AdvantageMode::mean_baseline;
    double advantage_epsilon = 1e-4;

    double length_coeff = 0.1;

    double base_entropy_coeff = 0.001;
    double hard_multiplier = 5.0;
    bool floor_at_zero = true;
    EntropySurrogate me_surrogate = EntropySurrogate::state_entropy;
    double ea_alpha = 0.4;
    double ea_kappa = 2.0;
    bool combine_me_ea = false;

    double ema_up = 0.2;
    double ema_down = 0.05;
    int classify_every = 1;

    int batch_size = 0;  // 0 = full dataset every step
    int ppo_epochs = 1;
    int snapshot_every = 0;  // 0 = only at end
    int eval_rollouts = 16;

    std::string dataset;  // path; may be overridden on the command line
};

// True iff the digit sum before the first terminator hits the target residue
// and that terminator sits within the token budget. Unknown ids throw.
bool verify(const QuestionSpec& q, std::span<const int> tokens);

inline double correctness_reward(const RolloutRecord& r) { return r.correct ? 1.0 : 0.0; }

}  // namespace ceeh
