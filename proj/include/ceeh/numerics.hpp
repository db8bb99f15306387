#pragma once

#include <charconv>
#include <cmath>
#include <string>

#include <Eigen/Core>

namespace ceeh {

// Tempered log-softmax, shift-stabilized. temperature > 0.
template <typename Derived>
Eigen::ArrayXd log_softmax(const Eigen::ArrayBase<Derived>& logits, double temperature) {
    Eigen::ArrayXd scaled = logits.template cast<double>() / temperature;
    const double shift = scaled.maxCoeff();
    Eigen::ArrayXd centered = scaled - shift;
    const double lse = std::log(centered.exp().sum());
    return centered - lse;
}

template <typename Derived>
Eigen::ArrayXd softmax(const Eigen::ArrayBase<Derived>& logits, double temperature) {
    return log_softmax(logits, temperature).exp();
}

// -sum p ln p with the 0 ln 0 = 0 convention.
inline double entropy_of(const Eigen::ArrayXd& probs) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
    }
    return h;
}

// Shortest decimal that round-trips; keeps text artifacts byte-reproducible.
inline std::string format_double(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace ceeh
