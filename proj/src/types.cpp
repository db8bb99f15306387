#include "ceeh/types.hpp"

#include <algorithm>

namespace ceeh {

void QuestionSpec::validate() const {
    if (modulus < 2) throw std::invalid_argument("question " + std::to_string(id) + ": modulus must be >= 2");
    if (target < 0 || target >= modulus)
        throw std::invalid_argument("question " + std::to_string(id) + ": target outside [0, modulus)");
    if (allowed_digits.empty())
        throw std::invalid_argument("question " + std::to_string(id) + ": allowed_digits must be nonempty");
    if (!std::is_sorted(allowed_digits.begin(), allowed_digits.end()))
        throw std::invalid_argument("question " + std::to_string(id) + ": allowed_digits must be sorted");
    for (std::size_t i = 0; i < allowed_digits.size(); ++i) {
        const int d = allowed_digits[i];
        if (d < 0 || d >= modulus)
            throw std::invalid_argument("question " + std::to_string(id) + ": digit outside [0, modulus)");
        if (i > 0 && allowed_digits[i - 1] == d)
            throw std::invalid_argument("question " + std::to_string(id) + ": duplicate digit");
    }
    if (max_len < 2)
        throw std::invalid_argument("question " + std::to_string(id) + ": max_len must be >= 2");
}

bool verify(const QuestionSpec& q, std::span<const int> tokens) {
    if (tokens.empty()) throw std::invalid_argument("verify: empty token sequence");
    long long sum = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const int tok = tokens[i];
        if (tok == kEndToken) {
            // Terminator must appear within the budget; anything after it is ignored.
            return static_cast<int>(i) < q.max_len && sum % q.modulus == q.target;
        }
        if (!std::binary_search(q.allowed_digits.begin(), q.allowed_digits.end(), tok))
            throw std::invalid_argument("verify: unknown token id " + std::to_string(tok));
        sum = (sum + tok) % q.modulus;
    }
    return false;  // ran out of tokens without a terminator
}

const char* to_string(AdvantageMode mode) {
    return mode == AdvantageMode::mean_baseline ? "mean_baseline" : "std_normalized";
}

const char* to_string(EntropySurrogate s) {
    return s == EntropySurrogate::state_entropy ? "state_entropy" : "sampled_nll";
}

}  // namespace ceeh
