#pragma once

#include <map>

#include <Eigen/Core>

#include "ceeh/numerics.hpp"
#include "ceeh/types.hpp"

namespace ceeh {

// Tabular softmax policy over (question, residue, step) states. Token axis is
// [allowed_digits..., terminator]. Rows are step * modulus + residue so the
// table covers every state the sampler can reach; unreachable rows stay at
// their init and cost nothing.
class TabularPolicy {
  public:
    double temperature = 0.6;

    void add_question(const QuestionSpec& q);
    bool covers(int question_id) const { return logits_.count(question_id) > 0; }

    Eigen::MatrixXd& logits(int question_id) { return logits_.at(question_id); }
    const Eigen::MatrixXd& logits(int question_id) const { return logits_.at(question_id); }
    const std::map<int, Eigen::MatrixXd>& tables() const { return logits_; }
    std::map<int, Eigen::MatrixXd>& tables() { return logits_; }

    static int state_index(const QuestionSpec& q, int residue, int step) {
        return step * q.modulus + residue;
    }

    // Index of a token id on the question's token axis; throws on unknown ids.
    static int token_index(const QuestionSpec& q, int token_id);

    Eigen::ArrayXd token_log_probs(const QuestionSpec& q, int residue, int step) const {
        const Eigen::MatrixXd& table = logits_.at(q.id);
        return log_softmax(table.row(state_index(q, residue, step)).transpose().array(),
                           temperature);
    }

    Eigen::ArrayXd token_probs(const QuestionSpec& q, int residue, int step) const {
        return token_log_probs(q, residue, step).exp();
    }

  private:
    std::map<int, Eigen::MatrixXd> logits_;
};

using GradTable = std::map<int, Eigen::MatrixXd>;

// Plain gradient descent: logits <- logits - learning_rate * grad.
// Throws NumericalError if the gradient or the updated table is not finite.
TabularPolicy apply_gradient_update(TabularPolicy policy, const GradTable& grad,
                                    double learning_rate, int step_hint = -1);

}  // namespace ceeh
