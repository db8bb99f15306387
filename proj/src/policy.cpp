#include "ceeh/policy.hpp"

#include <algorithm>

namespace ceeh {

void TabularPolicy::add_question(const QuestionSpec& q) {
    q.validate();
    const int n_states = q.modulus * q.max_len;
    logits_[q.id] = Eigen::MatrixXd::Zero(n_states, q.vocab_size());
}

int TabularPolicy::token_index(const QuestionSpec& q, int token_id) {
    if (token_id == kEndToken) return static_cast<int>(q.allowed_digits.size());
    auto it = std::lower_bound(q.allowed_digits.begin(), q.allowed_digits.end(), token_id);
    if (it == q.allowed_digits.end() || *it != token_id)
        throw std::invalid_argument("token id " + std::to_string(token_id) +
                                    " not legal for question " + std::to_string(q.id));
    return static_cast<int>(it - q.allowed_digits.begin());
}

TabularPolicy apply_gradient_update(TabularPolicy policy, const GradTable& grad,
                                    double learning_rate, int step_hint) {
    for (const auto& [qid, g] : grad) {
        auto it = policy.tables().find(qid);
        if (it == policy.tables().end())
            throw std::invalid_argument("gradient for unknown question " + std::to_string(qid));
        if (!g.allFinite())
            throw NumericalError("non-finite gradient for question " + std::to_string(qid), qid,
                                 step_hint);
        it->second.noalias() -= learning_rate * g;
        if (!it->second.allFinite())
            throw NumericalError("non-finite logits for question " + std::to_string(qid), qid,
                                 step_hint);
    }
    return policy;
}

}  // namespace ceeh
