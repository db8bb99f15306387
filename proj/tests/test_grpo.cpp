#include <cmath>
#include <vector>

#include "doctest.h"

#include <Eigen/Core>

#include "ceeh/grpo.hpp"
#include "ceeh/rng.hpp"
#include "ceeh/world.hpp"

using namespace ceeh;

namespace {

Eigen::ArrayXd rewards_of(std::initializer_list<double> values) {
    Eigen::ArrayXd out(static_cast<int>(values.size()));
    int i = 0;
    for (double v : values) out[i++] = v;
    return out;
}

}  // namespace

TEST_CASE("mean-baseline advantages subtract the group mean") {
    const Eigen::ArrayXd adv =
        group_advantages(rewards_of({1, 0, 0, 1}), AdvantageMode::mean_baseline, 1e-4);
    CHECK(adv[0] == 0.5);
    CHECK(adv[1] == -0.5);
    CHECK(adv[2] == -0.5);
    CHECK(adv[3] == 0.5);
}

TEST_CASE("equal rewards give zero advantages in both modes") {
    for (AdvantageMode mode : {AdvantageMode::mean_baseline, AdvantageMode::std_normalized}) {
        const Eigen::ArrayXd exact = group_advantages(rewards_of({1, 1, 1}), mode, 1e-4);
        for (int i = 0; i < exact.size(); ++i) CHECK(exact[i] == 0.0);
        // 0.7 is not representable, so the group mean rounds one ulp away
        const Eigen::ArrayXd adv = group_advantages(rewards_of({0.7, 0.7, 0.7}), mode, 1e-4);
        for (int i = 0; i < adv.size(); ++i) CHECK(std::abs(adv[i]) < 1e-9);
    }
}

TEST_CASE("std-normalized advantages divide by population std plus epsilon") {
    const Eigen::ArrayXd adv =
        group_advantages(rewards_of({1, 0}), AdvantageMode::std_normalized, 1e-4);
    // mean 0.5, population std 0.5
    CHECK(adv[0] == doctest::Approx(0.5 / 0.5001).epsilon(1e-12));
    CHECK(adv[1] == doctest::Approx(-0.5 / 0.5001).epsilon(1e-12));
    CHECK(adv[0] == doctest::Approx(0.99980).epsilon(1e-4));
}

TEST_CASE("groups need at least two rollouts") {
    CHECK_THROWS_AS(group_advantages(rewards_of({1}), AdvantageMode::mean_baseline, 1e-4),
                    std::invalid_argument);
}

TEST_CASE("clipped surrogate applies the asymmetric trust region") {
    CHECK(clipped_surrogate(1.5, 2.0, 0.2, 0.28) == doctest::Approx(2.56).epsilon(1e-12));
    CHECK(clipped_surrogate(1.0, 3.25, 0.2, 0.28) == 3.25);
    CHECK(clipped_surrogate(1.0, -3.25, 0.2, 0.28) == -3.25);
    CHECK(clipped_surrogate(0.5, -1.0, 0.2, 0.28) == doctest::Approx(-0.8).epsilon(1e-12));
}

TEST_CASE("clipped surrogate never exceeds the unclipped value") {
    Rng rng(31);
    for (int i = 0; i < 10000; ++i) {
        const double rho = std::exp(rng.normal());
        const double adv = 3.0 * rng.normal();
        CHECK(clipped_surrogate(rho, adv, 0.2, 0.28) <= rho * adv + 1e-15);
    }
}

TEST_CASE("kl estimator is zero at equality and matches the closed form") {
    CHECK(kl_penalty(-1.3, -1.3) == 0.0);
    const double expected = 2.0 - std::log(2.0) - 1.0;
    CHECK(kl_penalty(-std::log(2.0) - 0.7, -0.7) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.30685).epsilon(1e-4));
    // nonnegative for either direction of divergence
    CHECK(kl_penalty(-0.2, -1.5) >= 0.0);
    CHECK(kl_penalty(-1.5, -0.2) >= 0.0);
}

TEST_CASE("surrogate terms bundle matches the standalone pieces") {
    const SurrogateTerms t = surrogate_terms(-0.5, -1.0, -0.8, 1.5, 0.2, 0.28);
    CHECK(t.ratio == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
    CHECK(t.advantage == 1.5);
    CHECK(t.clipped_value ==
          doctest::Approx(clipped_surrogate(std::exp(0.5), 1.5, 0.2, 0.28)).epsilon(1e-12));
    CHECK(t.kl_estimate == doctest::Approx(kl_penalty(-0.5, -0.8)).epsilon(1e-12));
}

namespace {

QuestionSpec bandit_question() {
    QuestionSpec q;
    q.id = 0;
    q.modulus = 2;
    q.target = 0;
    q.allowed_digits = {1};
    q.max_len = 2;
    q.validate();
    return q;
}

RolloutRecord make_rollout(const QuestionSpec& q, const TabularPolicy& policy,
                           std::vector<int> tokens) {
    RolloutRecord r;
    r.question_id = q.id;
    r.tokens = std::move(tokens);
    r.length = static_cast<int>(r.tokens.size());
    int residue = 0;
    double lp_sum = 0.0;
    for (int t = 0; t < r.length; ++t) {
        const Eigen::ArrayXd lps = policy.token_log_probs(q, residue, t);
        const double lp = lps[TabularPolicy::token_index(q, r.tokens[t])];
        r.token_logprobs.push_back(lp);
        r.token_entropies.push_back(entropy_of(lps.exp()));
        lp_sum += lp;
        if (r.tokens[t] != kEndToken) residue = (residue + r.tokens[t]) % q.modulus;
    }
    r.correct = verify(q, r.tokens);
    r.seq_entropy_estimate = -lp_sum / r.length;
    return r;
}

}  // namespace

TEST_CASE("loss with unit ratios and no kl reduces to minus the mean advantage") {
    const QuestionSpec q = bandit_question();
    TabularPolicy policy;
    policy.temperature = 1.0;
    policy.add_question(q);

    RolloutGroup group;
    group.question_id = q.id;
    group.rollouts.push_back(make_rollout(q, policy, {kEndToken}));
    group.rollouts.push_back(make_rollout(q, policy, {1, kEndToken}));
    group.rollouts.push_back(make_rollout(q, policy, {1, 1}));

    Eigen::ArrayXd shaped(3);
    shaped << 0.6, -0.1, -0.5;
    std::vector<BatchItem> batch{{&q, &group, shaped, 0.0}};

    const LossBreakdown loss = assemble_loss(batch, policy, policy, 0.0, 0.2, 0.28,
                                             EntropySurrogate::state_entropy);
    // each rollout's token-mean surrogate is its advantage when rho == 1
    const double expected = -(0.6 - 0.1 - 0.5) / 3.0;
    CHECK(loss.total == doctest::Approx(expected).epsilon(1e-12));
    CHECK(loss.kl == 0.0);
    CHECK(loss.mean_kl == 0.0);
    CHECK(loss.entropy == 0.0);
}

TEST_CASE("loss with zero advantages isolates the kl term") {
    const QuestionSpec q = bandit_question();
    TabularPolicy policy;
    policy.temperature = 1.0;
    policy.add_question(q);
    TabularPolicy reference = policy;
    // a uniform shift would cancel in the softmax, so skew one entry instead
    reference.logits(q.id)(0, 0) = 1.1;

    RolloutGroup group;
    group.question_id = q.id;
    group.rollouts.push_back(make_rollout(q, policy, {kEndToken}));
    group.rollouts.push_back(make_rollout(q, policy, {1, kEndToken}));

    const Eigen::ArrayXd shaped = Eigen::ArrayXd::Zero(2);
    std::vector<BatchItem> batch{{&q, &group, shaped, 0.0}};

    const double kl_coeff = 0.7;
    const LossBreakdown loss = assemble_loss(batch, policy, reference, kl_coeff, 0.2, 0.28,
                                             EntropySurrogate::state_entropy);
    CHECK(loss.policy == 0.0);
    CHECK(loss.mean_kl > 0.0);
    CHECK(loss.kl == doctest::Approx(kl_coeff * loss.mean_kl).epsilon(1e-12));
    CHECK(loss.total == doctest::Approx(loss.kl).epsilon(1e-12));
}

TEST_CASE("hand-valued loss with a stale behavior policy") {
    const QuestionSpec q = bandit_question();
    TabularPolicy policy;
    policy.temperature = 1.0;
    policy.add_question(q);  // uniform: p = 0.5 per token

    RolloutGroup group;
    group.question_id = q.id;
    // Correct single-terminator rollout recorded under an older policy that
    // gave the terminator probability 0.25, so rho = 0.5/0.25 = 2 (clips to 1.28).
    RolloutRecord stale = make_rollout(q, policy, {kEndToken});
    stale.token_logprobs[0] = std::log(0.25);
    stale.seq_entropy_estimate = std::log(4.0);
    group.rollouts.push_back(stale);
    group.rollouts.push_back(make_rollout(q, policy, {1, kEndToken}));

    Eigen::ArrayXd shaped(2);
    shaped << 0.5, -0.5;
    std::vector<BatchItem> batch{{&q, &group, shaped, 0.0}};

    const LossBreakdown loss = assemble_loss(batch, policy, policy, 0.0, 0.2, 0.28,
                                             EntropySurrogate::state_entropy);
    // rollout 0: min(2*0.5, 1.28*0.5) = 0.64; rollout 1: two tokens at -0.5 each -> -0.5
    const double expected = -(0.64 - 0.5) / 2.0;
    CHECK(loss.total == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("empty batches are rejected") {
    TabularPolicy policy;
    CHECK_THROWS_AS(assemble_loss({}, policy, policy, 0.0, 0.2, 0.28,
                                  EntropySurrogate::state_entropy),
                    std::invalid_argument);
}

namespace {

// Central finite difference of the total loss with respect to every logit.
double loss_at(const QuestionSpec& q, const TabularPolicy& policy,
               const TabularPolicy& reference, const RolloutGroup& group,
               const Eigen::ArrayXd& shaped, double lambda, double kl_coeff,
               EntropySurrogate surrogate) {
    std::vector<BatchItem> batch{{&q, &group, shaped, lambda}};
    return assemble_loss(batch, policy, reference, kl_coeff, 0.2, 0.28, surrogate).total;
}

}  // namespace

TEST_CASE("analytic gradient matches finite differences on a small group") {
    QuestionSpec q;
    q.id = 3;
    q.modulus = 3;
    q.target = 2;
    q.allowed_digits = {0, 1, 2};
    q.max_len = 4;
    q.validate();

    TabularPolicy policy;
    policy.temperature = 0.6;
    policy.add_question(q);
    Rng init(77);
    Eigen::MatrixXd& logits = policy.logits(q.id);
    for (int r = 0; r < logits.rows(); ++r)
        for (int c = 0; c < logits.cols(); ++c) logits(r, c) = 0.4 * init.normal();
    TabularPolicy reference = policy;
    Eigen::MatrixXd& ref_logits = reference.logits(q.id);
    for (int r = 0; r < ref_logits.rows(); ++r)
        for (int c = 0; c < ref_logits.cols(); ++c) ref_logits(r, c) += 0.1 * init.normal();

    const RolloutGroup group = sample_group(q, policy, 6, 2024);
    Eigen::ArrayXd rewards(6);
    for (int i = 0; i < 6; ++i) rewards[i] = group.rollouts[i].correct ? 1.0 : 0.0;
    const Eigen::ArrayXd shaped =
        group_advantages(rewards, AdvantageMode::mean_baseline, 1e-4);

    const double lambda = 0.05;
    const double kl_coeff = 0.02;
    for (EntropySurrogate surrogate :
         {EntropySurrogate::state_entropy, EntropySurrogate::sampled_nll}) {
        CAPTURE(to_string(surrogate));
        std::vector<BatchItem> batch{{&q, &group, shaped, lambda}};
        GradTable grad;
        assemble_loss(batch, policy, reference, kl_coeff, 0.2, 0.28, surrogate, &grad);

        const double h = 1e-5;
        double worst = 0.0;
        for (int r = 0; r < logits.rows(); ++r) {
            for (int c = 0; c < logits.cols(); ++c) {
                TabularPolicy plus = policy, minus = policy;
                plus.logits(q.id)(r, c) += h;
                minus.logits(q.id)(r, c) -= h;
                const double fd = (loss_at(q, plus, reference, group, shaped, lambda,
                                           kl_coeff, surrogate) -
                                   loss_at(q, minus, reference, group, shaped, lambda,
                                           kl_coeff, surrogate)) /
                                  (2.0 * h);
                const double an = grad.at(q.id)(r, c);
                const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
                worst = std::max(worst, std::abs(fd - an) / scale);
            }
        }
        CHECK(worst < 1e-4);
    }
}
