#include "ceeh/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ceeh/rng.hpp"
#include "ceeh/world.hpp"

namespace ceeh {

namespace {

nlohmann::json question_to_json(const TaggedQuestion& tq) {
    nlohmann::json j;
    j["id"] = tq.spec.id;
    j["modulus"] = tq.spec.modulus;
    j["target"] = tq.spec.target;
    j["allowed_digits"] = tq.spec.allowed_digits;
    j["max_len"] = tq.spec.max_len;
    if (tq.difficulty) j["difficulty"] = *tq.difficulty;
    return j;
}

TaggedQuestion question_from_json(const nlohmann::json& j) {
    TaggedQuestion tq;
    tq.spec.id = j.at("id").get<int>();
    tq.spec.modulus = j.at("modulus").get<int>();
    tq.spec.target = j.at("target").get<int>();
    tq.spec.allowed_digits = j.at("allowed_digits").get<std::vector<int>>();
    tq.spec.max_len = j.at("max_len").get<int>();
    if (j.contains("difficulty")) tq.difficulty = j.at("difficulty").get<std::string>();
    tq.spec.validate();
    return tq;
}

// FNV-1a 64 over the canonical serialization.
std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

void Dataset::validate() const {
    std::set<int> ids;
    for (const TaggedQuestion& tq : items) {
        tq.spec.validate();
        if (!ids.insert(tq.spec.id).second)
            throw std::invalid_argument("dataset: duplicate question id " +
                                        std::to_string(tq.spec.id));
    }
}

std::string Dataset::fingerprint() const {
    std::string canonical;
    for (const TaggedQuestion& tq : items) {
        canonical += question_to_json(tq).dump();
        canonical += '\n';
    }
    std::ostringstream out;
    out << std::hex << fnv1a(canonical);
    return out.str();
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file " + path.string());
    Dataset ds;
    std::string line;
    int line_no = 0;
    std::vector<std::string> errors;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            ds.items.push_back(question_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            errors.push_back(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!errors.empty()) {
        std::string msg = "dataset parse failed:";
        for (const std::string& e : errors) msg += "\n  " + e;
        throw std::runtime_error(msg);
    }
    ds.validate();
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file " + path.string());
    for (const TaggedQuestion& tq : dataset.items) out << question_to_json(tq).dump() << "\n";
}

namespace {

// Digits-only distance from residue 0 to each residue, unbounded budget.
std::vector<int> residue_distances(int modulus, const std::vector<int>& digits) {
    std::vector<int> dist(modulus, -1);
    dist[0] = 0;
    std::vector<int> frontier{0};
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int r : frontier) {
            for (int d : digits) {
                const int n = (r + d) % modulus;
                if (dist[n] < 0) {
                    dist[n] = dist[r] + 1;
                    next.push_back(n);
                }
            }
        }
        frontier = std::move(next);
    }
    return dist;
}

std::vector<int> sample_distinct(Rng& rng, int lo, int hi, int count) {
    std::vector<int> pool;
    for (int v = lo; v < hi; ++v) pool.push_back(v);
    // Fisher-Yates prefix
    for (int i = 0; i < count; ++i) {
        const int j = i + rng.uniform_int(static_cast<int>(pool.size()) - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

Dataset generate_dataset(std::uint64_t seed, const DatasetProfile& profile) {
    Dataset ds;
    int next_id = 0;

    if (profile.easy_min_distance < 1 || profile.easy_min_distance > 2)
        throw std::invalid_argument("easy_min_distance must be 1 or 2");

    Rng easy_rng(derive_seed(seed, kDatasetStream, 1));
    for (int n = 0; n < profile.n_easy; ++n) {
        for (;;) {
            QuestionSpec q;
            q.id = next_id;
            q.modulus = profile.easy_modulus;
            q.max_len = profile.easy_max_len;
            if (profile.easy_filler_digit) {
                q.allowed_digits = sample_distinct(easy_rng, 1, q.modulus, profile.easy_digits - 1);
                q.allowed_digits.insert(q.allowed_digits.begin(), 0);
            } else {
                q.allowed_digits = sample_distinct(easy_rng, 0, q.modulus, profile.easy_digits);
            }
            const std::vector<int> dist = residue_distances(q.modulus, q.allowed_digits);
            std::vector<int> close;
            for (int r = 0; r < q.modulus; ++r) {
                if (dist[r] >= profile.easy_min_distance && dist[r] <= 2) close.push_back(r);
            }
            if (close.empty()) continue;
            q.target = close[easy_rng.uniform_int(static_cast<int>(close.size()))];
            ds.items.push_back({q, "easy"});
            ++next_id;
            break;
        }
    }

    Rng hard_rng(derive_seed(seed, kDatasetStream, 2));
    for (int n = 0; n < profile.n_hard; ++n) {
        for (;;) {
            QuestionSpec q;
            q.id = next_id;
            q.modulus = 18 + hard_rng.uniform_int(8);  // 18..25
            q.max_len = profile.hard_max_len;
            const int n_digits = 1 + hard_rng.uniform_int(2);
            q.allowed_digits = sample_distinct(hard_rng, 1, q.modulus, n_digits);
            const std::vector<int> dist = residue_distances(q.modulus, q.allowed_digits);
            std::vector<int> far;
            for (int r = 0; r < q.modulus; ++r) {
                if (dist[r] >= 5 && dist[r] <= 8 && dist[r] + 1 <= q.max_len) far.push_back(r);
            }
            if (far.empty()) continue;
            q.target = far[hard_rng.uniform_int(static_cast<int>(far.size()))];
            ds.items.push_back({q, "hard"});
            ++next_id;
            break;
        }
    }

    ds.validate();
    return ds;
}

}  // namespace ceeh
