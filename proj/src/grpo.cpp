#include "ceeh/grpo.hpp"

#include <algorithm>
#include <cmath>

namespace ceeh {

Eigen::ArrayXd group_advantages(const Eigen::ArrayXd& rewards, AdvantageMode mode,
                                double epsilon) {
    if (rewards.size() < 2)
        throw std::invalid_argument("group_advantages: need at least 2 rollouts");
    const double mean = rewards.mean();
    Eigen::ArrayXd centered = rewards - mean;
    if (mode == AdvantageMode::mean_baseline) return centered;
    if (epsilon <= 0.0)
        throw std::invalid_argument("group_advantages: epsilon must be positive");
    const double std_dev = std::sqrt(centered.square().mean());
    return centered / (std_dev + epsilon);
}

double clipped_surrogate(double rho, double advantage, double clip_low, double clip_high) {
    const double clipped_rho = std::clamp(rho, 1.0 - clip_low, 1.0 + clip_high);
    return std::min(rho * advantage, clipped_rho * advantage);
}

double kl_penalty(double logp_current, double logp_ref) {
    const double d = logp_ref - logp_current;
    return std::max(0.0, std::exp(d) - d - 1.0);
}

SurrogateTerms surrogate_terms(double logp_current, double logp_behavior, double logp_ref,
                               double advantage, double clip_low, double clip_high) {
    SurrogateTerms t;
    t.ratio = std::exp(logp_current - logp_behavior);
    t.advantage = advantage;
    t.clipped_value = clipped_surrogate(t.ratio, advantage, clip_low, clip_high);
    t.kl_estimate = kl_penalty(logp_current, logp_ref);
    return t;
}

LossBreakdown assemble_loss(std::span<const BatchItem> batch, const TabularPolicy& current,
                            const TabularPolicy& reference, double kl_coeff, double clip_low,
                            double clip_high, EntropySurrogate surrogate, GradTable* grad) {
    if (batch.empty()) throw std::invalid_argument("assemble_loss: empty batch");

    LossBreakdown out;
    const double inv_q = 1.0 / static_cast<double>(batch.size());
    const double temp = current.temperature;

    for (const BatchItem& item : batch) {
        const QuestionSpec& q = *item.question;
        const RolloutGroup& group = *item.group;
        if (group.group_size() == 0)
            throw std::invalid_argument("assemble_loss: empty group for question " +
                                        std::to_string(q.id));
        if (item.shaped_advantages.size() != group.group_size())
            throw std::invalid_argument("assemble_loss: advantage/rollout count mismatch");

        Eigen::MatrixXd* gtab = nullptr;
        if (grad) {
            auto [it, inserted] = grad->try_emplace(
                q.id, Eigen::MatrixXd::Zero(q.modulus * q.max_len, q.vocab_size()));
            (void)inserted;
            gtab = &it->second;
        }

        const double inv_k = 1.0 / group.group_size();
        double question_surr = 0.0;
        double question_kl = 0.0;
        double question_ent = 0.0;

        for (int i = 0; i < group.group_size(); ++i) {
            const RolloutRecord& rec = group.rollouts[i];
            const double adv = item.shaped_advantages[i];
            const double inv_t = 1.0 / rec.length;
            double rollout_surr = 0.0;
            double rollout_kl = 0.0;
            double rollout_ent = 0.0;

            int residue = 0;
            for (int t = 0; t < rec.length; ++t) {
                const int token = rec.tokens[t];
                const int a = TabularPolicy::token_index(q, token);
                const int row = TabularPolicy::state_index(q, residue, t);

                const Eigen::ArrayXd log_probs = current.token_log_probs(q, residue, t);
                const Eigen::ArrayXd probs = log_probs.exp();
                const double lp_cur = log_probs[a];
                const double lp_beh = rec.token_logprobs[t];
                const double lp_ref = reference.token_log_probs(q, residue, t)[a];

                const double rho = std::exp(lp_cur - lp_beh);
                const double unclipped = rho * adv;
                const double clipped =
                    std::clamp(rho, 1.0 - clip_low, 1.0 + clip_high) * adv;
                rollout_surr += std::min(unclipped, clipped);

                const double d = lp_ref - lp_cur;
                const double kl = std::max(0.0, std::exp(d) - d - 1.0);
                rollout_kl += kl;

                double state_h = 0.0;
                if (item.entropy_coeff != 0.0) {
                    if (surrogate == EntropySurrogate::state_entropy) {
                        state_h = entropy_of(probs);
                        rollout_ent += state_h;
                    } else {
                        rollout_ent += -lp_cur;
                    }
                }

                if (gtab) {
                    // d logpi(a)/d z_b = (1[a==b] - pi_b)/temp, shared by all terms
                    const double w_pg =
                        (unclipped <= clipped) ? -inv_q * inv_k * inv_t * adv * rho : 0.0;
                    const double w_kl =
                        kl > 0.0 ? kl_coeff * inv_q * inv_k * inv_t * (1.0 - std::exp(d)) : 0.0;
                    double w_nll = 0.0;
                    if (item.entropy_coeff != 0.0 &&
                        surrogate == EntropySurrogate::sampled_nll) {
                        // loss term is -lambda * mean(-logpi): gradient pushes
                        // sampled tokens down
                        w_nll = item.entropy_coeff * inv_q * inv_k * inv_t;
                    }
                    const double w_score = w_pg + w_kl + w_nll;
                    if (w_score != 0.0) {
                        const double scale = w_score / temp;
                        gtab->row(row).array() -= scale * probs;
                        (*gtab)(row, a) += scale;
                    }
                    if (item.entropy_coeff != 0.0 &&
                        surrogate == EntropySurrogate::state_entropy) {
                        // d H/d z_b = -pi_b (ln pi_b + H)/temp; loss carries -lambda H
                        const double c = item.entropy_coeff * inv_q * inv_k * inv_t / temp;
                        gtab->row(row).array() += c * probs * (log_probs + state_h);
                    }
                }

                if (token == kEndToken) break;
                residue = (residue + token) % q.modulus;
            }

            question_surr += rollout_surr * inv_t;
            question_kl += rollout_kl * inv_t;
            question_ent += rollout_ent * inv_t;
        }

        out.policy += -inv_q * inv_k * question_surr;
        out.mean_kl += inv_q * inv_k * question_kl;
        out.entropy += -inv_q * item.entropy_coeff * inv_k * question_ent;
    }

    out.kl = kl_coeff * out.mean_kl;
    out.total = out.policy + out.kl + out.entropy;
    return out;
}

}  // namespace ceeh
