#include <stdexcept>

#include "doctest.h"

#include "ceeh/difficulty.hpp"

using namespace ceeh;

namespace {

RolloutGroup group_with(int correct, int total) {
    RolloutGroup g;
    g.rollouts.resize(total);
    for (int i = 0; i < correct; ++i) g.rollouts[i].correct = true;
    return g;
}

}  // namespace

TEST_CASE("instant accuracy is the correct fraction") {
    CHECK(instant_accuracy(group_with(9, 12)) == 0.75);
    CHECK(instant_accuracy(group_with(0, 12)) == 0.0);
    CHECK(instant_accuracy(group_with(12, 12)) == 1.0);
    CHECK_THROWS_AS(instant_accuracy(RolloutGroup{}), std::invalid_argument);
}

TEST_CASE("ema absorbs improvements faster than regressions") {
    CHECK(ema_update(0.5, 1.0, 0.2, 0.05) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(ema_update(0.5, 0.0, 0.2, 0.05) == doctest::Approx(0.475).epsilon(1e-12));
    CHECK(ema_update(0.3, 0.3, 0.2, 0.05) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("equal accuracies take the slow rate") {
    // ties count as "did not improve", so the down rate applies (a fixed point anyway)
    const double v = ema_update(0.42, 0.42, 0.9, 0.1);
    CHECK(v == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("first observation seeds the history") {
    const QuestionState s = init_state(7, 0.5);
    CHECK(s.question_id == 7);
    CHECK(s.acc_hist == 0.5);
    CHECK(s.last_instant_acc == 0.5);
    CHECK_FALSE(s.optimal_length.has_value());
}

TEST_CASE("hard classification takes strictly-below-mean questions") {
    std::map<int, QuestionState> states;
    states[0] = init_state(0, 0.2);
    states[1] = init_state(1, 0.8);
    states[2] = init_state(2, 0.9);
    const std::set<int> hard = classify_hard(states);
    CHECK(hard == std::set<int>{0});
}

TEST_CASE("uniform accuracy leaves the hard set empty") {
    std::map<int, QuestionState> states;
    for (int i = 0; i < 5; ++i) states[i] = init_state(i, 0.6);
    CHECK(classify_hard(states).empty());
    CHECK(classify_hard({}).empty());
}

TEST_CASE("two-question split puts the weaker one in the hard set") {
    std::map<int, QuestionState> states;
    states[3] = init_state(3, 0.0);
    states[9] = init_state(9, 1.0);
    CHECK(classify_hard(states) == std::set<int>{3});
}

TEST_CASE("classification is invariant to a common shift") {
    std::map<int, QuestionState> a, b;
    for (int i = 0; i < 4; ++i) {
        const double acc = 0.1 * i;
        a[i] = init_state(i, acc);
        b[i] = init_state(i, acc + 0.3);
    }
    CHECK(classify_hard(a) == classify_hard(b));
}

TEST_CASE("tracker composes initialization and the asymmetric update") {
    DifficultyTracker tracker(0.2, 0.05);
    CHECK_FALSE(tracker.has(0));
    CHECK_THROWS_AS(tracker.at(0), std::out_of_range);

    tracker.observe(0, 0.5);  // 6 of 12 correct on the first step
    CHECK(tracker.at(0).acc_hist == 0.5);

    tracker.observe(0, 1.0);
    CHECK(tracker.at(0).acc_hist == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(tracker.at(0).last_instant_acc == 1.0);

    tracker.observe(0, 0.0);
    CHECK(tracker.at(0).acc_hist == doctest::Approx(0.57).epsilon(1e-12));
}

TEST_CASE("tracker hard set matches the free-function classification") {
    DifficultyTracker tracker(0.2, 0.05);
    tracker.observe(0, 0.1);
    tracker.observe(1, 0.9);
    tracker.observe(2, 0.5);
    CHECK(tracker.hard_set() == classify_hard(tracker.states()));
    CHECK(tracker.hard_set() == std::set<int>{0});
}
