#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ceeh/types.hpp"

namespace ceeh {

struct TaggedQuestion {
    QuestionSpec spec;
    std::optional<std::string> difficulty;  // advisory tag, not used by training
};

struct Dataset {
    std::vector<TaggedQuestion> items;

    std::size_t size() const { return items.size(); }
    void validate() const;  // unique ids, each spec well-formed
    std::string fingerprint() const;
};

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Reproducible synthetic datasets. Easy questions carry dense digit sets and
// targets reachable within two digits; hard questions carry one- or two-digit
// sets whose shortest solutions need at least five digits, so uniform
// sampling rarely stumbles onto them.
struct DatasetProfile {
    int n_easy = 20;
    int n_hard = 20;
    int easy_modulus = 12;
    int easy_digits = 6;
    int easy_min_distance = 1;  // 2 restricts easy targets to two-digit solutions
    // Force digit 0 into every easy set. Padding with 0 keeps a correct prefix
    // correct, so each easy question admits correct answers at many lengths.
    bool easy_filler_digit = false;
    int easy_max_len = 12;
    int hard_max_len = 14;
};

Dataset generate_dataset(std::uint64_t seed, const DatasetProfile& profile);

}  // namespace ceeh
