#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ceeh/config.hpp"
#include "ceeh/dataset.hpp"
#include "ceeh/evaluator.hpp"
#include "ceeh/numerics.hpp"
#include "ceeh/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct GenDatasetArgs {
    std::uint64_t seed = 1;
    int n_easy = 20;
    int n_hard = 20;
    int easy_modulus = 12;
    int easy_digits = 6;
    int easy_min_distance = 1;
    bool easy_filler = false;
    int easy_max_len = 12;
    int hard_max_len = 14;
    std::string out;
};

int run_gen_dataset(const GenDatasetArgs& args) {
    ceeh::DatasetProfile profile;
    profile.n_easy = args.n_easy;
    profile.n_hard = args.n_hard;
    profile.easy_modulus = args.easy_modulus;
    profile.easy_digits = args.easy_digits;
    profile.easy_min_distance = args.easy_min_distance;
    profile.easy_filler_digit = args.easy_filler;
    profile.easy_max_len = args.easy_max_len;
    profile.hard_max_len = args.hard_max_len;
    const ceeh::Dataset ds = ceeh::generate_dataset(args.seed, profile);
    ceeh::save_dataset(ds, args.out);
    std::cout << "wrote " << ds.size() << " questions to " << args.out
              << " (fingerprint " << ds.fingerprint() << ")\n";
    return kExitOk;
}

struct TrainArgs {
    std::string config;
    std::string dataset;
    std::string mode = "plain";
    std::string out;
    std::string resume;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    bool print_schema = false;
};

int run_train(const TrainArgs& args) {
    if (args.print_schema) {
        std::cout << ceeh::config_schema();
        return kExitOk;
    }
    if (args.config.empty()) {
        std::cerr << "train: --config is required\n";
        return kExitUsage;
    }
    if (args.out.empty()) {
        std::cerr << "train: --out is required\n";
        return kExitUsage;
    }
    ceeh::RunConfig cfg = ceeh::parse_config_file(args.config);
    if (!args.dataset.empty()) cfg.dataset = args.dataset;
    if (args.seed) cfg.seed = *args.seed;
    if (args.steps) cfg.total_steps = *args.steps;
    ceeh::validate_config(cfg);
    if (cfg.dataset.empty()) {
        std::cerr << "train: no dataset given (config key `dataset` or --dataset)\n";
        return kExitUsage;
    }
    const ceeh::TrainMode mode = ceeh::train_mode_from_string(args.mode);
    const ceeh::Dataset dataset = ceeh::load_dataset(cfg.dataset);
    std::optional<fs::path> resume;
    if (!args.resume.empty()) resume = fs::path(args.resume);

    const ceeh::RunManifest manifest =
        ceeh::run_training(cfg, mode, dataset, args.out, resume);
    std::cout << "mode " << manifest.mode << ", steps " << manifest.start_step << ".."
              << manifest.end_step << ", artifacts in " << args.out << "\n";

    std::ifstream metrics(fs::path(args.out) / "metrics.csv");
    std::string line, last;
    std::getline(metrics, line);  // header
    while (std::getline(metrics, line)) {
        if (!line.empty()) last = line;
    }
    if (!last.empty()) std::cout << "last metrics row: " << last << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string log;
    std::string base_log;
    std::optional<double> base_acc;
    std::optional<double> base_len;
    std::vector<int> ks{1, 8, 16};
    std::string nag_form = "product";
    std::string out;
    bool ragged = false;
};

int run_eval(const EvalArgs& args) {
    const ceeh::ParsedLog parsed = ceeh::ingest_log_file(args.log);
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
    const ceeh::EvalSummary summary = ceeh::summarize(parsed, args.ks, args.ragged);

    const ceeh::NagForm form = args.nag_form == "quotient" ? ceeh::NagForm::quotient
                                                           : ceeh::NagForm::product;
    std::optional<double> nag_value;
    bool nag_requested = false;
    if (!args.base_log.empty()) {
        nag_requested = true;
        const ceeh::EvalSummary base =
            ceeh::summarize(ceeh::ingest_log_file(args.base_log), {}, args.ragged);
        if (base.questions == 0) throw std::runtime_error("base log holds no rollouts");
        nag_value = ceeh::nag(summary.avg_acc_percent, summary.mean_length,
                              base.avg_acc_percent, base.mean_length, form);
    } else if (args.base_acc && args.base_len) {
        nag_requested = true;
        nag_value = ceeh::nag(summary.avg_acc_percent, summary.mean_length, *args.base_acc,
                              *args.base_len, form);
    }

    std::ostringstream csv;
    csv << "metric,value,k\n";
    csv << "questions," << summary.questions << ",\n";
    csv << "rollouts," << summary.rollouts << ",\n";
    csv << "avg_acc_percent," << ceeh::format_double(summary.avg_acc_percent) << ",\n";
    csv << "mean_length," << ceeh::format_double(summary.mean_length) << ",\n";
    for (const auto& [k, v] : summary.pass_at)
        csv << "pass_at_k," << ceeh::format_double(v) << "," << k << "\n";
    if (nag_requested)
        csv << "nag," << (nag_value ? ceeh::format_double(*nag_value) : "undefined") << ",\n";

    std::cout << csv.str();
    if (!args.out.empty()) {
        std::ofstream out(args.out);
        if (!out) throw std::runtime_error("cannot write " + args.out);
        out << csv.str();
    }
    return kExitOk;
}

struct ReportArgs {
    std::vector<std::string> runs;
    std::string base;
    std::string nag_form = "product";
    std::string out_table;
    std::string out_series;
};

int run_report(const ReportArgs& args) {
    struct RunInfo {
        std::string dir;
        ceeh::RunManifest manifest;
        ceeh::EvalSummary summary;
    };
    std::vector<RunInfo> runs;
    for (const std::string& dir : args.runs) {
        RunInfo info;
        info.dir = dir;
        info.manifest = ceeh::load_manifest(fs::path(dir) / "manifest.json");
        info.summary = ceeh::summarize(
            ceeh::ingest_log_file(fs::path(dir) / info.manifest.artifacts.at("final_eval")),
            {}, false);
        runs.push_back(std::move(info));
    }

    std::optional<RunInfo> base;
    if (!args.base.empty()) {
        RunInfo info;
        info.dir = args.base;
        info.manifest = ceeh::load_manifest(fs::path(args.base) / "manifest.json");
        info.summary = ceeh::summarize(
            ceeh::ingest_log_file(fs::path(args.base) /
                                  info.manifest.artifacts.at("final_eval")),
            {}, false);
        base = std::move(info);
    }
    const ceeh::NagForm form = args.nag_form == "quotient" ? ceeh::NagForm::quotient
                                                           : ceeh::NagForm::product;

    std::ostringstream table;
    table << "run,mode,seed,steps,acc,len,nag\n";
    for (const RunInfo& run : runs) {
        std::string nag_text = "n/a";
        if (base) {
            if (base->manifest.dataset_fingerprint != run.manifest.dataset_fingerprint) {
                std::cerr << "warning: " << run.dir << " and " << base->dir
                          << " trained on different datasets; skipping its NAG\n";
            } else {
                const auto v =
                    ceeh::nag(run.summary.avg_acc_percent, run.summary.mean_length,
                              base->summary.avg_acc_percent, base->summary.mean_length, form);
                nag_text = v ? ceeh::format_double(*v) : "undefined";
            }
        }
        table << fs::path(run.dir).filename().string() << "," << run.manifest.mode << ","
              << run.manifest.seed << "," << run.manifest.end_step << ","
              << ceeh::format_double(run.summary.avg_acc_percent) << ","
              << ceeh::format_double(run.summary.mean_length) << "," << nag_text << "\n";
    }
    std::cout << table.str();
    if (!args.out_table.empty()) {
        std::ofstream out(args.out_table);
        if (!out) throw std::runtime_error("cannot write " + args.out_table);
        out << table.str();
    }

    if (!args.out_series.empty()) {
        std::ofstream out(args.out_series);
        if (!out) throw std::runtime_error("cannot write " + args.out_series);
        out << "run,mode,seed,step,train_acc,mean_length,hard_fraction,mean_entropy_all\n";
        for (const RunInfo& run : runs) {
            std::ifstream metrics(fs::path(run.dir) /
                                  run.manifest.artifacts.at("metrics"));
            if (!metrics)
                throw std::runtime_error("cannot open metrics for run " + run.dir);
            std::string line;
            std::getline(metrics, line);  // header
            while (std::getline(metrics, line)) {
                if (line.empty()) continue;
                std::vector<std::string> cells;
                std::stringstream ss(line);
                std::string cell;
                while (std::getline(ss, cell, ',')) cells.push_back(cell);
                if (cells.size() < 5) continue;
                out << fs::path(run.dir).filename().string() << "," << run.manifest.mode
                    << "," << run.manifest.seed << "," << cells[0] << "," << cells[1] << ","
                    << cells[2] << "," << cells[3] << "," << cells[4] << "\n";
            }
        }
    }
    return kExitOk;
}

int run_snapshot_inspect(const std::string& path) {
    const ceeh::TrainerSnapshot snap = ceeh::load_snapshot(path);
    std::cout << "step: " << snap.step << "\n";
    std::cout << "temperature: " << ceeh::format_double(snap.temperature) << "\n";
    std::cout << "questions: " << snap.states.size() << "\n";
    std::cout << "hard set (" << snap.hard_set.size() << "):";
    for (int id : snap.hard_set) std::cout << " " << id;
    std::cout << "\n";
    std::cout << "id,acc_hist,optimal_length\n";
    for (const ceeh::QuestionState& s : snap.states) {
        std::cout << s.question_id << "," << ceeh::format_double(s.acc_hist) << ",";
        if (s.optimal_length)
            std::cout << *s.optimal_length;
        else
            std::cout << "unset";
        std::cout << "\n";
    }
    std::cout << "policy tables: " << snap.logits.size() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"difficulty-aware entropy and length shaping for group-relative policy "
                 "optimization, on an exactly solvable digit-sum task"};
    app.require_subcommand(1);

    GenDatasetArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen-dataset", "generate a reproducible question set");
    gen->add_option("--seed", gen_args.seed, "generator seed");
    gen->add_option("--easy", gen_args.n_easy, "number of easy questions");
    gen->add_option("--hard", gen_args.n_hard, "number of hard questions");
    gen->add_option("--easy-modulus", gen_args.easy_modulus, "modulus for easy questions");
    gen->add_option("--easy-digits", gen_args.easy_digits, "digit count for easy questions");
    gen->add_option("--easy-min-distance", gen_args.easy_min_distance,
                    "minimum digits to an easy target (1 or 2)");
    gen->add_flag("--easy-filler", gen_args.easy_filler,
                  "force digit 0 into every easy set");
    gen->add_option("--easy-max-len", gen_args.easy_max_len, "token budget, easy");
    gen->add_option("--hard-max-len", gen_args.hard_max_len, "token budget, hard");
    gen->add_option("--out", gen_args.out, "output path")->required();

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "run a training loop");
    train->add_option("--config", train_args.config, "configuration file");
    train->add_option("--dataset", train_args.dataset, "dataset path (overrides the config)");
    train->add_option("--mode", train_args.mode,
                      "plain | length_only | ceeh_me | ceeh_ea");
    train->add_option("--out", train_args.out, "output directory");
    train->add_option("--resume", train_args.resume, "snapshot to continue from");
    train->add_option("--seed", train_args.seed, "seed override");
    train->add_option("--steps", train_args.steps, "total_steps override");
    train->add_flag("--print-config-schema", train_args.print_schema,
                    "print the configuration schema and exit");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "score a rollout log");
    eval->add_option("--log", eval_args.log, "rollout log (full or minimal schema)")
        ->required();
    eval->add_option("--base-log", eval_args.base_log, "baseline log for the NAG comparison");
    eval->add_option("--base-acc", eval_args.base_acc, "baseline accuracy (percent)");
    eval->add_option("--base-len", eval_args.base_len, "baseline mean length");
    eval->add_option("--k", eval_args.ks, "pass@k cutoffs")->delimiter(',');
    eval->add_option("--nag-form", eval_args.nag_form, "product | quotient")
        ->check(CLI::IsMember({"product", "quotient"}));
    eval->add_option("--out", eval_args.out, "also write the summary CSV here");
    eval->add_flag("--ragged", eval_args.ragged,
                   "accept logs whose questions have differing rollout counts");

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "compare finished runs");
    report->add_option("runs", report_args.runs, "run directories")->required();
    report->add_option("--base", report_args.base, "baseline run directory for NAG");
    report->add_option("--nag-form", report_args.nag_form, "product | quotient")
        ->check(CLI::IsMember({"product", "quotient"}));
    report->add_option("--out-table", report_args.out_table, "write the comparison CSV here");
    report->add_option("--out-series", report_args.out_series,
                       "write per-step series of all runs here");

    std::string snapshot_path;
    CLI::App* inspect = app.add_subcommand("snapshot-inspect", "print a snapshot's contents");
    inspect->add_option("--snapshot", snapshot_path, "snapshot file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return run_gen_dataset(gen_args);
        if (train->parsed()) return run_train(train_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (report->parsed()) return run_report(report_args);
        if (inspect->parsed()) return run_snapshot_inspect(snapshot_path);
    } catch (const ceeh::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}
