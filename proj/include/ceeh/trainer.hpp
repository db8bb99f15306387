#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ceeh/dataset.hpp"
#include "ceeh/difficulty.hpp"
#include "ceeh/logging.hpp"
#include "ceeh/policy.hpp"
#include "ceeh/types.hpp"

namespace ceeh {

enum class TrainMode { plain, length_only, ceeh_me, ceeh_ea };

const char* to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& text);

// Which shaping machinery a mode activates. The anchored length penalty is
// computed (and logged) in every non-baseline mode; `plain` keeps the same
// pipeline with its coefficients forced to zero so its logs stay comparable.
struct ModeFlags {
    bool me_active = false;
    bool ea_active = false;
    bool group_norm_penalty = false;
};

ModeFlags mode_flags(TrainMode mode, bool combine_me_ea);

// `plain` ignores the shaping coefficients; zeroing them here makes that an
// identity on logs rather than a separate code path.
RunConfig effective_config(RunConfig cfg, TrainMode mode);

struct TrainerSnapshot {
    int step = 0;
    double temperature = 0.0;
    std::vector<QuestionState> states;
    std::set<int> hard_set;
    std::map<int, Eigen::MatrixXd> logits;
};

void save_snapshot(const TrainerSnapshot& snap, const std::filesystem::path& path);
TrainerSnapshot load_snapshot(const std::filesystem::path& path);

struct StepResult {
    std::vector<RolloutLogLine> lines;
    MetricsRow metrics;
};

class Trainer {
  public:
    Trainer(const RunConfig& cfg, TrainMode mode, const Dataset& dataset);

    StepResult step();

    int current_step() const { return step_; }
    const TabularPolicy& policy() const { return policy_; }
    const TabularPolicy& reference() const { return reference_; }
    const DifficultyTracker& tracker() const { return tracker_; }
    const std::set<int>& hard_set() const { return hard_set_; }
    const RunConfig& config() const { return cfg_; }

    TrainerSnapshot snapshot() const;
    void restore(const TrainerSnapshot& snap);

  private:
    std::vector<int> select_batch() const;

    RunConfig cfg_;
    TrainMode mode_;
    ModeFlags flags_;
    std::vector<TaggedQuestion> questions_;  // ascending id
    std::map<int, int> index_by_id_;
    TabularPolicy policy_;
    TabularPolicy reference_;
    DifficultyTracker tracker_;
    std::set<int> hard_set_;
    int step_ = 0;
};

struct RunManifest {
    std::string mode;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string dataset_fingerprint;
    int start_step = 0;
    int end_step = 0;
    std::map<std::string, std::string> artifacts;  // name -> path relative to the run dir
};

void save_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

// Full run: trains, logs every rollout, writes metrics, snapshots, the final
// policy, and a fresh evaluation of the final policy. Artifacts land in
// out_dir; see the returned manifest for their names.
RunManifest run_training(const RunConfig& cfg, TrainMode mode, const Dataset& dataset,
                         const std::filesystem::path& out_dir,
                         const std::optional<std::filesystem::path>& resume_from = {});

}  // namespace ceeh
