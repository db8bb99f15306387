#pragma once

#include <span>

#include <Eigen/Core>

#include "ceeh/policy.hpp"
#include "ceeh/types.hpp"

namespace ceeh {

// Group-relative advantages. mean_baseline subtracts the group mean;
// std_normalized additionally divides by (population std + epsilon).
Eigen::ArrayXd group_advantages(const Eigen::ArrayXd& rewards, AdvantageMode mode,
                                double epsilon);

// min(rho * adv, clip(rho, 1 - clip_low, 1 + clip_high) * adv). The upper
// width may exceed the lower one (clip-higher).
double clipped_surrogate(double rho, double advantage, double clip_low, double clip_high);

// Nonnegative per-token KL estimate: exp(d) - d - 1 with d = logp_ref - logp_current.
double kl_penalty(double logp_current, double logp_ref);

// Per-token diagnostic bundle; the loss loop computes these inline, tests use
// this to cross-check a single token.
struct SurrogateTerms {
    double ratio = 1.0;
    double advantage = 0.0;
    double clipped_value = 0.0;
    double kl_estimate = 0.0;
};

SurrogateTerms surrogate_terms(double logp_current, double logp_behavior, double logp_ref,
                               double advantage, double clip_low, double clip_high);

// One question's contribution to a batch loss.
struct BatchItem {
    const QuestionSpec* question = nullptr;
    const RolloutGroup* group = nullptr;
    Eigen::ArrayXd shaped_advantages;  // one per rollout
    double entropy_coeff = 0.0;        // lambda for this question at this step
};

struct LossBreakdown {
    double total = 0.0;
    double policy = 0.0;   // -mean clipped surrogate
    double kl = 0.0;       // kl_coeff * mean kl estimate
    double entropy = 0.0;  // -mean over questions of lambda * entropy surrogate
    double mean_kl = 0.0;  // mean kl estimate, before the coefficient
};

// Loss over a batch, reduced token -> rollout -> question -> batch, plus the
// analytic gradient with respect to the current policy's logits when `grad`
// is non-null. Ratios use the stored sampling-time log-probs as the behavior
// term; advantages and the entropy-bonus inputs are treated as constants.
LossBreakdown assemble_loss(std::span<const BatchItem> batch, const TabularPolicy& current,
                            const TabularPolicy& reference, double kl_coeff, double clip_low,
                            double clip_high, EntropySurrogate surrogate,
                            GradTable* grad = nullptr);

}  // namespace ceeh
