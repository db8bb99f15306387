#include "ceeh/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "ceeh/config.hpp"
#include "ceeh/entropy.hpp"
#include "ceeh/grpo.hpp"
#include "ceeh/length_control.hpp"
#include "ceeh/rng.hpp"
#include "ceeh/world.hpp"

namespace ceeh {

const char* to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::plain: return "plain";
        case TrainMode::length_only: return "length_only";
        case TrainMode::ceeh_me: return "ceeh_me";
        case TrainMode::ceeh_ea: return "ceeh_ea";
    }
    return "plain";
}

TrainMode train_mode_from_string(const std::string& text) {
    if (text == "plain") return TrainMode::plain;
    if (text == "length_only") return TrainMode::length_only;
    if (text == "ceeh_me") return TrainMode::ceeh_me;
    if (text == "ceeh_ea") return TrainMode::ceeh_ea;
    throw std::invalid_argument("unknown mode `" + text +
                                "` (expected plain|length_only|ceeh_me|ceeh_ea)");
}

ModeFlags mode_flags(TrainMode mode, bool combine_me_ea) {
    ModeFlags f;
    switch (mode) {
        case TrainMode::plain: break;
        case TrainMode::length_only: f.group_norm_penalty = true; break;
        case TrainMode::ceeh_me:
            f.me_active = true;
            f.ea_active = combine_me_ea;
            break;
        case TrainMode::ceeh_ea:
            f.ea_active = true;
            f.me_active = combine_me_ea;
            break;
    }
    return f;
}

RunConfig effective_config(RunConfig cfg, TrainMode mode) {
    if (mode == TrainMode::plain) {
        cfg.length_coeff = 0.0;
        cfg.base_entropy_coeff = 0.0;
    }
    return cfg;
}

Trainer::Trainer(const RunConfig& cfg, TrainMode mode, const Dataset& dataset)
    : cfg_(effective_config(cfg, mode)),
      mode_(mode),
      flags_(mode_flags(mode, cfg.combine_me_ea)),
      tracker_(cfg.ema_up, cfg.ema_down) {
    dataset.validate();
    if (dataset.items.empty()) throw std::invalid_argument("trainer: empty dataset");
    questions_ = dataset.items;
    std::sort(questions_.begin(), questions_.end(),
              [](const TaggedQuestion& a, const TaggedQuestion& b) {
                  return a.spec.id < b.spec.id;
              });
    policy_.temperature = cfg_.temperature;
    for (std::size_t i = 0; i < questions_.size(); ++i) {
        index_by_id_[questions_[i].spec.id] = static_cast<int>(i);
        policy_.add_question(questions_[i].spec);
    }
    reference_ = policy_;  // frozen at init
}

std::vector<int> Trainer::select_batch() const {
    std::vector<int> indices(questions_.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
    if (cfg_.batch_size <= 0 || cfg_.batch_size >= static_cast<int>(questions_.size()))
        return indices;
    Rng rng(derive_seed(cfg_.seed, kBatchStream, static_cast<std::uint64_t>(step_)));
    for (int i = 0; i < cfg_.batch_size; ++i) {
        const int j = i + rng.uniform_int(static_cast<int>(indices.size()) - i);
        std::swap(indices[i], indices[j]);
    }
    indices.resize(cfg_.batch_size);
    std::sort(indices.begin(), indices.end());
    return indices;
}

StepResult Trainer::step() {
    const int t = step_;
    const std::vector<int> batch_indices = select_batch();
    const EntropySchedule schedule{cfg_.base_entropy_coeff, cfg_.hard_multiplier,
                                   std::max(1, cfg_.total_steps), cfg_.floor_at_zero};

    struct QuestionWork {
        const QuestionSpec* q = nullptr;
        RolloutGroup group;
        std::vector<LengthPenaltyOutput> penalties;
        Eigen::ArrayXd totals;
        Eigen::ArrayXd advantages;
        Eigen::ArrayXd bonuses;
        Eigen::ArrayXd shaped;
        double lambda = 0.0;
        double acc_now = 0.0;
        bool hard = false;
        std::optional<double> pre_acc_hist;
        std::optional<int> pre_optimal_length;
    };

    std::vector<QuestionWork> work;
    work.reserve(batch_indices.size());

    for (int idx : batch_indices) {
        const QuestionSpec& q = questions_[idx].spec;
        QuestionWork w;
        w.q = &q;
        w.group = sample_group(q, policy_, cfg_.rollouts_per_question,
                               derive_seed(cfg_.seed, kRolloutStream,
                                           static_cast<std::uint64_t>(t),
                                           static_cast<std::uint64_t>(q.id)));
        w.hard = hard_set_.count(q.id) > 0;
        w.acc_now = instant_accuracy(w.group);
        if (tracker_.has(q.id)) {
            const QuestionState& s = tracker_.at(q.id);
            w.pre_acc_hist = s.acc_hist;
            w.pre_optimal_length = s.optimal_length;
        }

        const int k = w.group.group_size();
        w.penalties.resize(k);
        w.totals = Eigen::ArrayXd::Zero(k);
        if (flags_.group_norm_penalty) {
            const Eigen::ArrayXd z =
                group_normalized_length_penalties(w.group, cfg_.advantage_epsilon);
            for (int i = 0; i < k; ++i) {
                w.penalties[i] = LengthPenaltyOutput{z[i], z[i], true};
            }
        } else {
            const bool gate_on =
                w.pre_acc_hist.has_value() && gate(w.acc_now, *w.pre_acc_hist);
            for (int i = 0; i < k; ++i) {
                const RolloutRecord& rec = w.group.rollouts[i];
                w.penalties[i] = gated_length_penalty(rec.length, w.pre_optimal_length,
                                                      rec.correct, gate_on);
            }
        }
        for (int i = 0; i < k; ++i) {
            w.totals[i] = total_reward(correctness_reward(w.group.rollouts[i]),
                                       w.penalties[i], cfg_.length_coeff);
        }

        w.advantages = group_advantages(w.totals, cfg_.advantage_mode, cfg_.advantage_epsilon);
        w.bonuses = Eigen::ArrayXd::Zero(k);
        if (flags_.ea_active && w.hard) {
            for (int i = 0; i < k; ++i) {
                w.bonuses[i] =
                    entropy_bonus(w.group.rollouts[i].seq_entropy_estimate, w.advantages[i],
                                  cfg_.ea_alpha, cfg_.ea_kappa, true);
            }
        }
        w.shaped = w.advantages + w.bonuses;
        w.lambda = flags_.me_active ? entropy_coefficient(t, schedule, w.hard) : 0.0;
        work.push_back(std::move(w));
    }

    std::vector<BatchItem> items;
    items.reserve(work.size());
    for (const QuestionWork& w : work) {
        items.push_back(BatchItem{w.q, &w.group, w.shaped, w.lambda});
    }

    LossBreakdown loss;
    for (int epoch = 0; epoch < cfg_.ppo_epochs; ++epoch) {
        GradTable grad;
        const LossBreakdown lb =
            assemble_loss(items, policy_, reference_, cfg_.kl_coeff, cfg_.clip_low,
                          cfg_.clip_high, cfg_.me_surrogate, &grad);
        if (epoch == 0) loss = lb;
        if (!std::isfinite(lb.total))
            throw NumericalError("non-finite loss at step " + std::to_string(t), -1, t);
        policy_ = apply_gradient_update(std::move(policy_), grad, cfg_.learning_rate, t);
    }

    // Book-keeping happens strictly after the update so that this step's
    // classification, gate, and anchor all used the pre-step snapshot.
    for (QuestionWork& w : work) {
        tracker_.observe(w.q->id, w.acc_now);
        QuestionState& s = tracker_.at(w.q->id);
        s = update_optimal_length(s, w.group);
    }
    if ((t + 1) % cfg_.classify_every == 0) hard_set_ = tracker_.hard_set();

    StepResult result;
    result.metrics.step = t;
    long n_rollouts = 0;
    long n_hard_rollouts = 0;
    double sum_len = 0.0, sum_ent = 0.0, sum_ent_hard = 0.0, sum_ent_easy = 0.0;
    double sum_bonus = 0.0, sum_total = 0.0, sum_correct = 0.0, sum_penalty = 0.0;
    double sum_acc = 0.0;
    int n_hard_questions = 0;

    for (const QuestionWork& w : work) {
        sum_acc += w.acc_now;
        n_hard_questions += w.hard ? 1 : 0;
        for (int i = 0; i < w.group.group_size(); ++i) {
            const RolloutRecord& rec = w.group.rollouts[i];
            const double penalty_value =
                w.penalties[i].applied ? w.penalties[i].clipped : 0.0;
            RolloutLogLine line;
            line.step = t;
            line.question_id = w.q->id;
            line.rollout_index = i;
            line.tokens = rec.tokens;
            line.length = rec.length;
            line.correct = rec.correct;
            line.correctness_reward = correctness_reward(rec);
            line.length_penalty = penalty_value;
            line.total_reward = w.totals[i];
            line.raw_advantage = w.advantages[i];
            line.entropy_bonus = w.bonuses[i];
            line.shaped_advantage = w.shaped[i];
            line.seq_entropy_estimate = rec.seq_entropy_estimate;
            line.hard_flag = w.hard;
            line.acc_hist = w.pre_acc_hist;
            line.optimal_length = w.pre_optimal_length;
            result.lines.push_back(std::move(line));

            ++n_rollouts;
            sum_len += rec.length;
            sum_ent += rec.seq_entropy_estimate;
            if (w.hard) {
                sum_ent_hard += rec.seq_entropy_estimate;
                ++n_hard_rollouts;
            } else {
                sum_ent_easy += rec.seq_entropy_estimate;
            }
            sum_bonus += w.bonuses[i];
            sum_total += w.totals[i];
            sum_correct += line.correctness_reward;
            sum_penalty += penalty_value;
        }
    }

    const double nq = static_cast<double>(work.size());
    const double nr = static_cast<double>(n_rollouts);
    result.metrics.train_acc = sum_acc / nq;
    result.metrics.mean_length = sum_len / nr;
    result.metrics.hard_fraction = n_hard_questions / nq;
    result.metrics.mean_entropy_all = sum_ent / nr;
    result.metrics.mean_entropy_hard =
        n_hard_rollouts > 0 ? sum_ent_hard / n_hard_rollouts : 0.0;
    result.metrics.mean_entropy_easy =
        n_rollouts - n_hard_rollouts > 0 ? sum_ent_easy / (n_rollouts - n_hard_rollouts) : 0.0;
    result.metrics.mean_entropy_bonus = sum_bonus / nr;
    result.metrics.lambda_easy =
        flags_.me_active ? entropy_coefficient(t, schedule, false) : 0.0;
    result.metrics.lambda_hard =
        flags_.me_active ? entropy_coefficient(t, schedule, true) : 0.0;
    result.metrics.mean_total_reward = sum_total / nr;
    result.metrics.mean_correctness_reward = sum_correct / nr;
    result.metrics.mean_length_penalty = sum_penalty / nr;
    result.metrics.mean_kl = loss.mean_kl;
    result.metrics.loss = loss.total;

    ++step_;
    return result;
}

TrainerSnapshot Trainer::snapshot() const {
    TrainerSnapshot snap;
    snap.step = step_;
    snap.temperature = policy_.temperature;
    for (const auto& [id, state] : tracker_.states()) snap.states.push_back(state);
    snap.hard_set = hard_set_;
    snap.logits = policy_.tables();
    return snap;
}

void Trainer::restore(const TrainerSnapshot& snap) {
    if (snap.temperature != cfg_.temperature)
        throw std::invalid_argument("snapshot temperature does not match the configuration");
    step_ = snap.step;
    tracker_.states().clear();
    for (const QuestionState& s : snap.states) {
        if (!index_by_id_.count(s.question_id))
            throw std::invalid_argument("snapshot references unknown question " +
                                        std::to_string(s.question_id));
        tracker_.states().emplace(s.question_id, s);
    }
    hard_set_ = snap.hard_set;
    for (const auto& [qid, table] : snap.logits) {
        if (!policy_.covers(qid))
            throw std::invalid_argument("snapshot logits reference unknown question " +
                                        std::to_string(qid));
        Eigen::MatrixXd& dst = policy_.logits(qid);
        if (dst.rows() != table.rows() || dst.cols() != table.cols())
            throw std::invalid_argument("snapshot logits shape mismatch for question " +
                                        std::to_string(qid));
        dst = table;
    }
}

void save_snapshot(const TrainerSnapshot& snap, const std::filesystem::path& path) {
    nlohmann::json j;
    j["step"] = snap.step;
    nlohmann::json questions = nlohmann::json::array();
    for (const QuestionState& s : snap.states) {
        nlohmann::json qs;
        qs["id"] = s.question_id;
        qs["acc_hist"] = s.acc_hist;
        if (s.optimal_length)
            qs["optimal_length"] = *s.optimal_length;
        else
            qs["optimal_length"] = nullptr;
        questions.push_back(qs);
    }
    j["questions"] = questions;
    j["hard_set"] = snap.hard_set;
    nlohmann::json logits;
    for (const auto& [qid, table] : snap.logits) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < table.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < table.cols(); ++c) row.push_back(table(r, c));
            rows.push_back(std::move(row));
        }
        logits[std::to_string(qid)] = std::move(rows);
    }
    j["policy"] = {{"temperature", snap.temperature}, {"logits", std::move(logits)}};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
    out << j.dump() << "\n";
}

TrainerSnapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot " + path.string());
    nlohmann::json j;
    in >> j;

    TrainerSnapshot snap;
    snap.step = j.at("step").get<int>();
    for (const nlohmann::json& qs : j.at("questions")) {
        QuestionState s;
        s.question_id = qs.at("id").get<int>();
        s.acc_hist = qs.at("acc_hist").get<double>();
        if (!qs.at("optimal_length").is_null())
            s.optimal_length = qs.at("optimal_length").get<int>();
        s.last_instant_acc = s.acc_hist;
        snap.states.push_back(s);
    }
    for (const nlohmann::json& id : j.at("hard_set")) snap.hard_set.insert(id.get<int>());
    const nlohmann::json& policy = j.at("policy");
    snap.temperature = policy.at("temperature").get<double>();
    for (const auto& [key, rows] : policy.at("logits").items()) {
        const int qid = std::stoi(key);
        const std::size_t n_rows = rows.size();
        const std::size_t n_cols = n_rows > 0 ? rows.at(0).size() : 0;
        Eigen::MatrixXd table(n_rows, n_cols);
        for (std::size_t r = 0; r < n_rows; ++r) {
            const nlohmann::json& row = rows.at(r);
            if (row.size() != n_cols)
                throw std::runtime_error("snapshot " + path.string() + ": ragged logits for " +
                                         key);
            for (std::size_t c = 0; c < n_cols; ++c)
                table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    row.at(c).get<double>();
        }
        snap.logits[qid] = std::move(table);
    }
    return snap;
}

void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
    nlohmann::json j;
    j["mode"] = m.mode;
    j["seed"] = m.seed;
    j["config_hash"] = m.config_hash;
    j["dataset_fingerprint"] = m.dataset_fingerprint;
    j["start_step"] = m.start_step;
    j["end_step"] = m.end_step;
    j["artifacts"] = m.artifacts;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
    out << j.dump(2) << "\n";
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path.string());
    nlohmann::json j;
    in >> j;
    RunManifest m;
    m.mode = j.at("mode").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    m.start_step = j.at("start_step").get<int>();
    m.end_step = j.at("end_step").get<int>();
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    return m;
}

RunManifest run_training(const RunConfig& cfg, TrainMode mode, const Dataset& dataset,
                         const std::filesystem::path& out_dir,
                         const std::optional<std::filesystem::path>& resume_from) {
    validate_config(cfg);
    dataset.validate();
    std::filesystem::create_directories(out_dir);
    std::filesystem::create_directories(out_dir / "snapshots");

    Trainer trainer(cfg, mode, dataset);
    if (resume_from) trainer.restore(load_snapshot(*resume_from));

    {
        std::ofstream cfg_out(out_dir / "config_used.cfg");
        cfg_out << canonical_config_text(cfg);
    }

    std::ofstream log_out(out_dir / "rollout_log.jsonl");
    std::ofstream metrics_out(out_dir / "metrics.csv");
    if (!log_out || !metrics_out)
        throw std::runtime_error("cannot write run artifacts under " + out_dir.string());
    metrics_out << metrics_header() << "\n";

    RunManifest manifest;
    manifest.mode = to_string(mode);
    manifest.seed = cfg.seed;
    manifest.config_hash = config_hash(cfg);
    manifest.dataset_fingerprint = dataset.fingerprint();
    manifest.start_step = trainer.current_step();

    while (trainer.current_step() < cfg.total_steps) {
        const StepResult result = trainer.step();
        for (const RolloutLogLine& line : result.lines) log_out << to_json_line(line) << "\n";
        metrics_out << to_csv_row(result.metrics) << "\n";
        if (cfg.snapshot_every > 0 && trainer.current_step() % cfg.snapshot_every == 0 &&
            trainer.current_step() < cfg.total_steps) {
            char name[32];
            std::snprintf(name, sizeof(name), "step_%06d.json", trainer.current_step());
            save_snapshot(trainer.snapshot(), out_dir / "snapshots" / name);
        }
    }
    manifest.end_step = trainer.current_step();

    save_snapshot(trainer.snapshot(), out_dir / "snapshots" / "final.json");

    // fresh rollouts from the trained policy, minimal schema for the evaluator
    {
        std::ofstream eval_out(out_dir / "final_eval.jsonl");
        for (const TaggedQuestion& tq : dataset.items) {
            const RolloutGroup group =
                sample_group(tq.spec, trainer.policy(), cfg.eval_rollouts,
                             derive_seed(cfg.seed, kEvalStream,
                                         static_cast<std::uint64_t>(tq.spec.id)));
            for (int i = 0; i < group.group_size(); ++i) {
                nlohmann::json j;
                j["question_id"] = tq.spec.id;
                j["rollout_index"] = i;
                j["correct"] = group.rollouts[i].correct;
                j["length"] = group.rollouts[i].length;
                eval_out << j.dump() << "\n";
            }
        }
    }

    manifest.artifacts = {
        {"rollout_log", "rollout_log.jsonl"},   {"metrics", "metrics.csv"},
        {"final_snapshot", "snapshots/final.json"}, {"final_eval", "final_eval.jsonl"},
        {"config", "config_used.cfg"},
    };
    save_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

}  // namespace ceeh
