#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>

#include "ceeh/types.hpp"

namespace ceeh {

struct QuestionState {
    int question_id = 0;
    double acc_hist = 0.0;                // asymmetric EMA of instant accuracy
    std::optional<int> optimal_length;    // shortest correct length seen so far
    double last_instant_acc = 0.0;
};

inline double instant_accuracy(const RolloutGroup& group) {
    if (group.rollouts.empty())
        throw std::invalid_argument("instant_accuracy: empty group");
    int correct = 0;
    for (const RolloutRecord& r : group.rollouts) correct += r.correct ? 1 : 0;
    return static_cast<double>(correct) / group.group_size();
}

// Faster to absorb improvements than regressions.
inline double ema_update(double acc_hist, double acc_now, double eta_up, double eta_down) {
    const double eta = acc_hist < acc_now ? eta_up : eta_down;
    return (1.0 - eta) * acc_hist + eta * acc_now;
}

inline QuestionState init_state(int question_id, double first_acc) {
    QuestionState s;
    s.question_id = question_id;
    s.acc_hist = first_acc;  // EMA seeded with the first measurement
    s.last_instant_acc = first_acc;
    return s;
}

// Strictly below the mean acc_hist over every tracked question; ties are easy.
inline std::set<int> classify_hard(const std::map<int, QuestionState>& states) {
    std::set<int> hard;
    if (states.empty()) return hard;
    double mean = 0.0;
    for (const auto& [id, s] : states) mean += s.acc_hist;
    mean /= static_cast<double>(states.size());
    for (const auto& [id, s] : states) {
        if (s.acc_hist < mean) hard.insert(id);
    }
    return hard;
}

class DifficultyTracker {
  public:
    DifficultyTracker(double eta_up, double eta_down) : eta_up_(eta_up), eta_down_(eta_down) {}

    bool has(int question_id) const { return states_.count(question_id) > 0; }

    const QuestionState& at(int question_id) const {
        auto it = states_.find(question_id);
        if (it == states_.end())
            throw std::out_of_range("difficulty tracker: question " +
                                    std::to_string(question_id) + " never observed");
        return it->second;
    }

    QuestionState& at(int question_id) {
        return const_cast<QuestionState&>(
            static_cast<const DifficultyTracker&>(*this).at(question_id));
    }

    const std::map<int, QuestionState>& states() const { return states_; }
    std::map<int, QuestionState>& states() { return states_; }

    void observe(int question_id, double acc_now) {
        auto it = states_.find(question_id);
        if (it == states_.end()) {
            states_.emplace(question_id, init_state(question_id, acc_now));
            return;
        }
        it->second.acc_hist = ema_update(it->second.acc_hist, acc_now, eta_up_, eta_down_);
        it->second.last_instant_acc = acc_now;
    }

    std::set<int> hard_set() const { return classify_hard(states_); }

  private:
    double eta_up_;
    double eta_down_;
    std::map<int, QuestionState> states_;
};

}  // namespace ceeh
