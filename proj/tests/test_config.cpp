#include <string>

#include "doctest.h"

#include "ceeh/config.hpp"

using namespace ceeh;

TEST_CASE("a flat key-value file parses with comments and blanks") {
    const std::string text = R"(# training setup
rollouts_per_question = 8

temperature = 0.9   # inline comment
learning_rate = 2.5
total_steps = 50
seed = 12345
mode_note_free_text_is_not_a_key = x
)";
    // the last line is junk on purpose
    CHECK_THROWS_AS(parse_config_text(text, "demo.cfg"), ConfigError);

    const std::string good = R"(rollouts_per_question = 8
temperature = 0.9
learning_rate = 2.5
total_steps = 50
seed = 12345
advantage_mode = std_normalized
me_surrogate = sampled_nll
combine_me_ea = true
dataset = data/questions.jsonl
)";
    const RunConfig cfg = parse_config_text(good);
    CHECK(cfg.rollouts_per_question == 8);
    CHECK(cfg.temperature == 0.9);
    CHECK(cfg.learning_rate == 2.5);
    CHECK(cfg.total_steps == 50);
    CHECK(cfg.seed == 12345);
    CHECK(cfg.advantage_mode == AdvantageMode::std_normalized);
    CHECK(cfg.me_surrogate == EntropySurrogate::sampled_nll);
    CHECK(cfg.combine_me_ea);
    CHECK(cfg.dataset == "data/questions.jsonl");
    // untouched keys keep their defaults
    CHECK(cfg.clip_high == 0.28);
    CHECK(cfg.kl_coeff == 0.001);
}

TEST_CASE("unknown keys and bad values are itemized with line numbers") {
    const std::string text = R"(rollouts_per_question = 8
not_a_key = 3
temperature = warm
another_bad_key = 1
)";
    try {
        parse_config_text(text, "broken.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.issues.size() == 3);
        CHECK(e.issues[0].find("broken.cfg:2") != std::string::npos);
        CHECK(e.issues[0].find("not_a_key") != std::string::npos);
        CHECK(e.issues[1].find("broken.cfg:3") != std::string::npos);
        CHECK(e.issues[2].find("broken.cfg:4") != std::string::npos);
    }
}

TEST_CASE("validation itemizes out-of-range settings") {
    RunConfig cfg;
    cfg.rollouts_per_question = 1;
    cfg.temperature = 0.0;
    cfg.clip_low = 1.5;
    cfg.ea_kappa = 1.0;
    cfg.ema_up = 0.0;
    try {
        validate_config(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.issues.size() >= 5);
    }

    RunConfig ok;
    CHECK_NOTHROW(validate_config(ok));
}

TEST_CASE("clip bounds keep the trust region sane") {
    RunConfig cfg;
    cfg.clip_low = 0.2;
    cfg.clip_high = 0.2;  // symmetric region is allowed ...
    CHECK_NOTHROW(validate_config(cfg));
    cfg.clip_high = 0.1;  // ... shrinking only the upper width is not
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg.clip_high = 0.28;
    cfg.clip_low = 1.0;  // ratio floor would hit zero
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("canonical text is stable and reparses to the same config") {
    RunConfig cfg;
    cfg.learning_rate = 3.25;
    cfg.seed = 99;
    cfg.dataset = "d.jsonl";
    const std::string canon = canonical_config_text(cfg);
    const RunConfig reparsed = parse_config_text(canon);
    CHECK(canonical_config_text(reparsed) == canon);
    CHECK(config_hash(reparsed) == config_hash(cfg));
}

TEST_CASE("the hash reacts to any field change") {
    RunConfig a;
    RunConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    b.kl_coeff = 0.002;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.me_surrogate = EntropySurrogate::sampled_nll;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("the schema lists every accepted key") {
    const std::string schema = config_schema();
    for (const char* key :
         {"rollouts_per_question", "temperature", "learning_rate", "total_steps", "seed",
          "clip_low", "clip_high", "kl_coeff", "advantage_mode", "advantage_epsilon",
          "length_coeff", "base_entropy_coeff", "hard_multiplier", "floor_at_zero",
          "me_surrogate", "ea_alpha", "ea_kappa", "combine_me_ea", "ema_up", "ema_down",
          "classify_every", "batch_size", "ppo_epochs", "snapshot_every", "eval_rollouts",
          "dataset"}) {
        CAPTURE(key);
        CHECK(schema.find(key) != std::string::npos);
    }
}

TEST_CASE("missing config files raise a usable error") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), ConfigError);
}
