#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eventum/cli.hpp"
#include "eventum/io.hpp"

using namespace eventum;

TEST_CASE("generic model files load with one-based labels", "[io]") {
    const Json j = Json::parse(R"({
      "m": 2,
      "dims": [2, 2],
      "hamiltonians": ["zero", [[[0,0],[1,0]],[[1,0],[0,0]]]],
      "couplings": [
        {"from": 1, "to": 2, "builtin": "identity", "scale": 0.5}
      ]
    })");
    const HybridModel model = load_model_json(j);
    REQUIRE(model.num_states() == 2);
    REQUIRE(model.has_coupling(1, 0));  // file (1 -> 2) is internal (1 <- 0)
    REQUIRE_FALSE(model.has_coupling(0, 1));
    REQUIRE(max_abs(model.coupling(1, 0, 0.0) -
                    0.5 * Matrix::Identity(2, 2)) < 1e-15);
    const Matrix h1 = model.hamiltonian(1, 0.0);
    REQUIRE(h1(0, 1) == Complex(1.0, 0.0));
    REQUIRE_FALSE(model.time_dependent());
    // Lambda follows from the scaled coupling: 0.25 I.
    REQUIRE(max_abs(model.lambda_op(0, 0.0) - 0.25 * Matrix::Identity(2, 2)) <
            1e-15);
}

TEST_CASE("unknown keys in model files are rejected", "[io]") {
    const Json j = Json::parse(R"({"m": 1, "dims": [2], "frobs": 3})");
    REQUIRE_THROWS_AS(load_model_json(j), UsageError);

    const Json j2 = Json::parse(R"({
      "m": 2, "dims": [2, 2],
      "couplings": [{"from": 1, "to": 2, "builtin": "identity", "turbo": true}]
    })");
    REQUIRE_THROWS_AS(load_model_json(j2), UsageError);
}

TEST_CASE("malformed matrices are rejected", "[io]") {
    const Json ragged = Json::parse(R"({
      "m": 1, "dims": [2],
      "hamiltonians": [[[[0,0],[0,0]], [[0,0]]]]
    })");
    REQUIRE_THROWS_AS(load_model_json(ragged), UsageError);

    const Json noim = Json::parse(R"({
      "m": 1, "dims": [2],
      "hamiltonians": [[[1, 0],[0, 1]]]
    })");
    REQUIRE_THROWS_AS(load_model_json(noim), UsageError);
}

TEST_CASE("sinusoidal time scales make couplings time dependent", "[io]") {
    const Json j = Json::parse(R"({
      "m": 2, "dims": [1, 1],
      "couplings": [{
        "from": 1, "to": 2, "builtin": "identity",
        "time_dependence": {"kind": "sqrt_sinusoidal", "offset": 0.8,
                        "amplitude": 0.8, "omega": 1.0}
      }],
      "validation_times": [0.0, 1.0, 2.0]
    })");
    const HybridModel model = load_model_json(j);
    REQUIRE(model.time_dependent());
    const double t = 0.7;
    const double expected = std::sqrt(0.8 * (1.0 + std::sin(t)));
    REQUIRE(std::abs(model.coupling(1, 0, t)(0, 0).real() - expected) < 1e-14);
    // The event rate then follows the sinusoid itself.
    Vector one = Vector::Ones(1);
    REQUIRE(model.jump_rate(0, one, t) ==
            Catch::Approx(0.8 * (1.0 + std::sin(t))).margin(1e-12));
}

TEST_CASE("event logs and summaries have a fixed, stable layout", "[io]") {
    TrajectoryRecord rec;
    rec.master_seed = 42;
    rec.stream_index = 3;
    rec.t_start = 0.0;
    rec.t_end = 2.0;
    EventRecord ev;
    ev.time = 0.5;
    ev.from_state = 0;
    ev.to_state = 1;
    ev.pre_jump_norm_sq = 0.25;
    rec.events.push_back(ev);
    rec.final_state = PureHybridState{1, Vector(), true};
    rec.final_survival_norm_sq = 0.75;
    rec.terminated_without_event = true;

    std::ostringstream events;
    write_events_jsonl(events, {rec});
    REQUIRE(events.str() ==
            "{\"trajectory\":3,\"seed\":42,\"t\":0.5,\"from\":1,\"to\":2,"
            "\"norm_sq_at_jump\":0.25}\n");

    std::ostringstream summary;
    write_summary_csv(summary, {rec});
    REQUIRE(summary.str() ==
            "trajectory,n_events,final_alpha,survival_norm_sq\n"
            "3,1,2,0.75\n");
}

TEST_CASE("time series carry traces and purities per block", "[io]") {
    DensityFamily fam;
    fam.t = 0.25;
    fam.blocks = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
    fam.blocks[0](0, 0) = 0.5;
    fam.blocks[1](0, 0) = 0.25;
    fam.blocks[1](1, 1) = 0.25;

    std::ostringstream out;
    write_timeseries_csv(out, {fam});
    REQUIRE(out.str() ==
            "t,tr_1,tr_2,purity_1,purity_2\n"
            "0.25,0.5,0.5,0.25,0.125\n");
}

TEST_CASE("flag precedence: flag beats env beats config file", "[io][cli]") {
    const auto dir = std::filesystem::temp_directory_path() / "eventum_cfg_test";
    std::filesystem::create_directories(dir);
    const auto cfg_path = (dir / "run.json").string();
    write_text_file(cfg_path, R"({"model": "clock", "seed": 7, "t_end": 4.0})");

    const std::vector<std::string> base = {"simulate", "--config", cfg_path};
    const std::map<std::string, std::string> no_env;
    const std::map<std::string, std::string> env = {{"EVENTUM_SEED", "42"}};

    REQUIRE(parse_and_validate(base, no_env).master_seed == 7);
    REQUIRE(parse_and_validate(base, no_env).t_end == 4.0);
    REQUIRE(parse_and_validate(base, env).master_seed == 42);

    std::vector<std::string> flag = base;
    flag.push_back("--seed");
    flag.push_back("9");
    REQUIRE(parse_and_validate(flag, env).master_seed == 9);
}

TEST_CASE("usage errors: missing model, unknown keys, bad lists",
          "[io][cli]") {
    const std::map<std::string, std::string> no_env;
    REQUIRE_THROWS_AS(parse_and_validate({"simulate"}, no_env), UsageError);
    REQUIRE_THROWS_AS(
        parse_and_validate({"simulate", "--model", "clock", "--n", "10,x"},
                           no_env),
        UsageError);
    REQUIRE_THROWS_AS(parse_and_validate({"demo", "spoon"}, no_env), UsageError);

    const auto dir = std::filesystem::temp_directory_path() / "eventum_cfg_test";
    std::filesystem::create_directories(dir);
    const auto bad_path = (dir / "bad.json").string();
    write_text_file(bad_path, R"({"model": "clock", "warp_factor": 9})");
    REQUIRE_THROWS_AS(
        parse_and_validate({"simulate", "--config", bad_path}, no_env),
        UsageError);
}

TEST_CASE("verify accepts a comma list of sample counts", "[io][cli]") {
    const std::map<std::string, std::string> no_env;
    const RunConfig cfg = parse_and_validate(
        {"verify", "--model", "testpair", "--n", "100,1000,10000"}, no_env);
    REQUIRE(cfg.n_list == std::vector<int>{100, 1000, 10000});
    REQUIRE(cfg.command == "verify");
    // A single n is required elsewhere.
    REQUIRE_THROWS_AS(cfg.n(), UsageError);
}

TEST_CASE("builtin resolution honors overrides", "[io][cli]") {
    RunConfig cfg;
    cfg.command = "simulate";
    cfg.model = "clock";
    cfg.t_end = 4.0;
    cfg.model_params["kappa"] = 2.0;
    cfg.model_params["i_max"] = 15;
    const ResolvedModel rm = resolve_model(cfg);
    REQUIRE(rm.model.num_states() == 16);
    Vector psi = Vector::Zero(2);
    psi(0) = 1.0;
    REQUIRE(rm.model.jump_rate(0, psi, 0.0) == Catch::Approx(2.0).margin(1e-12));

    cfg.model = "no_such_model";
    REQUIRE_THROWS_AS(resolve_model(cfg), UsageError);
}
