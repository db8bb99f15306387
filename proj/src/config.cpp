#include "ceeh/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ceeh/numerics.hpp"

namespace ceeh {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::string msg = "invalid configuration:";
    for (const std::string& i : issues) msg += "\n  " + i;
    return msg;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

struct Field {
    std::string doc;
    std::function<bool(const std::string&, RunConfig&)> set;  // false = bad value
    std::function<std::string(const RunConfig&)> get;
};

bool parse_double(const std::string& v, double& out) {
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [p, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && p == last;
}

bool parse_int(const std::string& v, int& out) {
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [p, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && p == last;
}

bool parse_u64(const std::string& v, std::uint64_t& out) {
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [p, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && p == last;
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1") {
        out = true;
        return true;
    }
    if (v == "false" || v == "0") {
        out = false;
        return true;
    }
    return false;
}

#define DOUBLE_FIELD(name, docstr)                                              \
    {#name,                                                                     \
     Field{docstr,                                                              \
           [](const std::string& v, RunConfig& c) { return parse_double(v, c.name); }, \
           [](const RunConfig& c) { return format_double(c.name); }}}

#define INT_FIELD(name, docstr)                                                 \
    {#name,                                                                     \
     Field{docstr,                                                              \
           [](const std::string& v, RunConfig& c) { return parse_int(v, c.name); },    \
           [](const RunConfig& c) { return std::to_string(c.name); }}}

#define BOOL_FIELD(name, docstr)                                                \
    {#name,                                                                     \
     Field{docstr,                                                              \
           [](const std::string& v, RunConfig& c) { return parse_bool(v, c.name); },   \
           [](const RunConfig& c) { return c.name ? "true" : "false"; }}}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
        INT_FIELD(rollouts_per_question, "rollouts sampled per question per step (>= 2)"),
        DOUBLE_FIELD(temperature, "softmax temperature for sampling and log-probs (> 0)"),
        DOUBLE_FIELD(learning_rate, "gradient descent step size (> 0)"),
        INT_FIELD(total_steps, "training steps and schedule horizon (>= 0)"),
        {"seed",
         Field{"base seed; per-step generators derive from (seed, step, question)",
               [](const std::string& v, RunConfig& c) { return parse_u64(v, c.seed); },
               [](const RunConfig& c) { return std::to_string(c.seed); }}},
        DOUBLE_FIELD(clip_low, "lower ratio clip width, interval is [1-clip_low, 1+clip_high]"),
        DOUBLE_FIELD(clip_high, "upper ratio clip width (>= clip_low)"),
        DOUBLE_FIELD(kl_coeff, "weight of the per-token KL estimate against the frozen reference"),
        {"advantage_mode",
         Field{"mean_baseline | std_normalized",
               [](const std::string& v, RunConfig& c) {
                   if (v == "mean_baseline")
                       c.advantage_mode = AdvantageMode::mean_baseline;
                   else if (v == "std_normalized")
                       c.advantage_mode = AdvantageMode::std_normalized;
                   else
                       return false;
                   return true;
               },
               [](const RunConfig& c) { return std::string(to_string(c.advantage_mode)); }}},
        DOUBLE_FIELD(advantage_epsilon, "stabilizer added to the std in std_normalized mode (> 0)"),
        DOUBLE_FIELD(length_coeff, "weight of the length penalty in the total reward (>= 0)"),
        DOUBLE_FIELD(base_entropy_coeff, "entropy coefficient at step 0 for easy questions (>= 0)"),
        DOUBLE_FIELD(hard_multiplier, "entropy coefficient multiplier on hard questions (> 0)"),
        BOOL_FIELD(floor_at_zero, "clamp the annealed entropy coefficient at zero"),
        {"me_surrogate",
         Field{"state_entropy | sampled_nll; differentiable stand-in for the entropy term",
               [](const std::string& v, RunConfig& c) {
                   if (v == "state_entropy")
                       c.me_surrogate = EntropySurrogate::state_entropy;
                   else if (v == "sampled_nll")
                       c.me_surrogate = EntropySurrogate::sampled_nll;
                   else
                       return false;
                   return true;
               },
               [](const RunConfig& c) { return std::string(to_string(c.me_surrogate)); }}},
        DOUBLE_FIELD(ea_alpha, "entropy-bonus scale on hard questions (> 0)"),
        DOUBLE_FIELD(ea_kappa, "advantage-fraction cap on the entropy bonus (> 1)"),
        BOOL_FIELD(combine_me_ea, "allow the entropy loss term and the advantage bonus together"),
        DOUBLE_FIELD(ema_up, "EMA rate when accuracy improves (0, 1]"),
        DOUBLE_FIELD(ema_down, "EMA rate when accuracy regresses (0, 1]"),
        INT_FIELD(classify_every, "steps between hard-set refreshes (>= 1)"),
        INT_FIELD(batch_size, "questions per step; 0 trains on the full dataset"),
        INT_FIELD(ppo_epochs, "gradient updates per sampling round (>= 1)"),
        INT_FIELD(snapshot_every, "snapshot cadence in steps; 0 snapshots only at the end"),
        INT_FIELD(eval_rollouts, "rollouts per question for the end-of-run evaluation (>= 1)"),
        {"dataset",
         Field{"path to the question file (JSON lines)",
               [](const std::string& v, RunConfig& c) {
                   c.dataset = v;
                   return true;
               },
               [](const RunConfig& c) { return c.dataset; }}},
    };
    return table;
}

#undef DOUBLE_FIELD
#undef INT_FIELD
#undef BOOL_FIELD

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues_)
    : std::runtime_error(join_issues(issues_)), issues(std::move(issues_)) {}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::vector<std::string> issues;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            issues.push_back(origin + ":" + std::to_string(line_no) +
                             ": expected `key = value`");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = fields().find(key);
        if (it == fields().end()) {
            issues.push_back(origin + ":" + std::to_string(line_no) + ": unknown key `" + key +
                             "`");
            continue;
        }
        if (!it->second.set(value, cfg)) {
            issues.push_back(origin + ":" + std::to_string(line_no) + ": bad value `" + value +
                             "` for `" + key + "`");
        }
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file " + path.string()});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

void validate_config(const RunConfig& cfg) {
    std::vector<std::string> issues;
    auto require = [&](bool ok, const std::string& msg) {
        if (!ok) issues.push_back(msg);
    };
    require(cfg.rollouts_per_question >= 2, "rollouts_per_question must be >= 2");
    require(cfg.temperature > 0.0, "temperature must be positive");
    require(cfg.learning_rate > 0.0, "learning_rate must be positive");
    require(cfg.total_steps >= 0, "total_steps must be >= 0");
    require(cfg.clip_low > 0.0 && cfg.clip_low < 1.0, "clip_low must be in (0, 1)");
    require(cfg.clip_high > 0.0, "clip_high must be positive");
    require(cfg.clip_high >= cfg.clip_low, "clip_high must be >= clip_low");
    require(cfg.kl_coeff >= 0.0, "kl_coeff must be >= 0");
    require(cfg.advantage_epsilon > 0.0, "advantage_epsilon must be positive");
    require(cfg.length_coeff >= 0.0, "length_coeff must be >= 0");
    require(cfg.base_entropy_coeff >= 0.0, "base_entropy_coeff must be >= 0");
    require(cfg.hard_multiplier > 0.0, "hard_multiplier must be positive");
    require(cfg.ea_alpha > 0.0, "ea_alpha must be positive");
    require(cfg.ea_kappa > 1.0, "ea_kappa must exceed 1");
    require(cfg.ema_up > 0.0 && cfg.ema_up <= 1.0, "ema_up must be in (0, 1]");
    require(cfg.ema_down > 0.0 && cfg.ema_down <= 1.0, "ema_down must be in (0, 1]");
    require(cfg.classify_every >= 1, "classify_every must be >= 1");
    require(cfg.batch_size >= 0, "batch_size must be >= 0");
    require(cfg.ppo_epochs >= 1, "ppo_epochs must be >= 1");
    require(cfg.snapshot_every >= 0, "snapshot_every must be >= 0");
    require(cfg.eval_rollouts >= 1, "eval_rollouts must be >= 1");
    if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::string canonical_config_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& [key, field] : fields()) {
        out += key;
        out += " = ";
        out += field.get(cfg);
        out += "\n";
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = canonical_config_text(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

std::string config_schema() {
    std::string out = "configuration keys (flat `key = value`, `#` comments):\n";
    for (const auto& [key, field] : fields()) {
        out += "  " + key + "\n      " + field.doc + "\n";
    }
    return out;
}

}  // namespace ceeh
