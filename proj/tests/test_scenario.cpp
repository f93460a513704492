#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "trigsim/csvio.hpp"
#include "trigsim/errors.hpp"
#include "trigsim/scenario.hpp"
#include "trigsim/version.hpp"

using namespace trigsim;
namespace fs = std::filesystem;

namespace {

std::string bundled(const char* name) {
    return std::string(TRIGSIM_SOURCE_DIR) + "/scenarios/" + name;
}

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "trigsim_scenario_tests";
    fs::create_directories(dir);
    return dir;
}

nlohmann::json chile_json() {
    std::ifstream in(bundled("chile.scenario"));
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("the bundled chile scenario loads with the published headline numbers") {
    const Scenario s = load_scenario(bundled("chile.scenario"));

    CHECK(s.id == "chile");
    CHECK(s.model_id == "chile8");
    CHECK(s.population == 7112808.0);
    CHECK(s.horizon_days == 1826);
    CHECK(s.policy.tau == 14);
    CHECK(s.policy.Delta == 14);
    CHECK(s.policy.u_ref == 0.8);
    CHECK(s.policy.delta_hat == 0.2);
    CHECK(s.policy.alignment == Alignment::identity);
    CHECK(format_date(s.start()) == "2020-09-21");
    CHECK_FALSE(s.params_external_required);
    CHECK(s.params.at("gamma_E") == 0.39);
    CHECK(s.params.at("beta_I") == 0.2);

    REQUIRE(s.x0.size() == 8);
    CHECK(s.x0 == State{6671557.0, 1697.0, 1723.0, 2540.0, 421948.0, 1157.0, 433.0,
                        11753.0});

    REQUIRE(s.indicators.size() == 4);
    CHECK(s.indicators[0].id == "mean_icu");
    CHECK(s.indicators[1].id == "diff_icu");
    CHECK(s.indicators[2].id == "mean_active");
    CHECK(s.indicators[3].id == "diff_active");

    const ModelSpec m = s.make_model();
    CHECK(m.id == "chile8");
    CHECK(m.N == s.population);
    CHECK(m.delta_hat == 0.2);
}

TEST_CASE("the bundled china scenario carries exact initial conditions but no rates") {
    const Scenario s = parse_scenario(bundled("china.scenario"));

    CHECK(s.model_id == "china9");
    CHECK(s.population == 1389999552.0);
    CHECK(s.params_external_required);
    CHECK(s.params_source.find("Ivorra") != std::string::npos);
    REQUIRE(s.x0.size() == 9);
    CHECK(s.x0 == State{1389828000.0, 14.0, 2.0, 1555.0, 2035.0, 270.0, 73622.0,
                        90346.0, 3708.0});

    try {
        load_scenario(bundled("china.scenario"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("external source") != std::string::npos);
        CHECK(msg.find("Ivorra") != std::string::npos);
    }
}

TEST_CASE("a dwell period shorter than the window fails validation") {
    Scenario s = load_scenario(bundled("chile.scenario"));
    s.policy.Delta = 7;
    try {
        validate_scenario(s);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("Δ ≥ τ") != std::string::npos);
    }
}

TEST_CASE("serialization round-trips both bundled scenarios") {
    SUBCASE("chile") {
        const Scenario s = load_scenario(bundled("chile.scenario"));
        const nlohmann::json j1 = serialize(s);
        const Scenario s2 = parse_scenario_json(j1, "roundtrip");
        CHECK_NOTHROW(validate_scenario(s2));
        CHECK(serialize(s2) == j1);
        CHECK(config_hash(s2) == config_hash(s));
    }
    SUBCASE("china keeps its external-required marker") {
        const Scenario s = parse_scenario(bundled("china.scenario"));
        const nlohmann::json j1 = serialize(s);
        const Scenario s2 = parse_scenario_json(j1, "roundtrip");
        CHECK(s2.params_external_required);
        CHECK(serialize(s2) == j1);
    }
}

TEST_CASE("config hashes are stable, well formed, and sensitive") {
    const Scenario s = load_scenario(bundled("chile.scenario"));
    const std::string h = config_hash(s);
    REQUIRE(h.size() == 16);
    for (char ch : h) CHECK(std::isxdigit(static_cast<unsigned char>(ch)));
    CHECK(config_hash(s) == h);

    Scenario tweaked = s;
    tweaked.params["gamma_E"] = 0.4;
    CHECK(config_hash(tweaked) != h);

    Scenario renamed = s;
    renamed.id = "chile-variant";
    CHECK(config_hash(renamed) != h);
}

TEST_CASE("json parse failures report the file position") {
    const fs::path path = temp_dir() / "broken.scenario";
    std::ofstream(path) << "{\n  \"id\": \"x\",\n  oops\n}\n";
    try {
        parse_scenario(path.string());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(path.string()) != std::string::npos);
        CHECK(msg.find(":3:") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario((temp_dir() / "missing.scenario").string()),
                    ConfigError);
}

TEST_CASE("structural problems are collected into a single report") {
    try {
        parse_scenario_json(nlohmann::json::object(), "empty");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("id: missing") != std::string::npos);
        CHECK(msg.find("model: missing") != std::string::npos);
        CHECK(msg.find("; ") != std::string::npos);
    }
}

TEST_CASE("parameter block problems are reported by key") {
    SUBCASE("missing and unknown keys") {
        nlohmann::json j = chile_json();
        j["params"].erase("gamma_E");
        j["params"]["gamma_Z"] = 1.0;
        const Scenario s = parse_scenario_json(j, "test");
        try {
            validate_scenario(s);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("params.gamma_E: missing") != std::string::npos);
            CHECK(msg.find("params.gamma_Z: unknown parameter") != std::string::npos);
        }
    }
    SUBCASE("non-numeric entry") {
        nlohmann::json j = chile_json();
        j["params"]["gamma_E"] = "fast";
        CHECK_THROWS_AS(parse_scenario_json(j, "test"), ConfigError);
    }
}

TEST_CASE("initial-condition problems are reported by compartment") {
    SUBCASE("unknown compartment") {
        nlohmann::json j = chile_json();
        j["initial"]["X"] = 5.0;
        try {
            parse_scenario_json(j, "test");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("not a compartment") != std::string::npos);
        }
    }
    SUBCASE("sum off the population") {
        nlohmann::json j = chile_json();
        j["initial"]["S"] = 6671557.0 + 500.0;
        const Scenario s = parse_scenario_json(j, "test");
        try {
            validate_scenario(s);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("sum to the population") !=
                  std::string::npos);
        }
    }
}

TEST_CASE("indicator blocks are validated individually") {
    SUBCASE("duplicate ids") {
        nlohmann::json j = chile_json();
        j["indicators"][1]["id"] = "mean_icu";
        const Scenario s = parse_scenario_json(j, "test");
        try {
            validate_scenario(s);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("duplicate indicator id") !=
                  std::string::npos);
        }
    }
    SUBCASE("unknown observation tag") {
        nlohmann::json j = chile_json();
        j["indicators"][0]["observation"] = "icu_beds";
        const Scenario s = parse_scenario_json(j, "test");
        CHECK_THROWS_AS(validate_scenario(s), ConfigError);
    }
    SUBCASE("observation from the wrong model family") {
        nlohmann::json j = chile_json();
        j["indicators"][0]["observation"] = "china_detected";
        const Scenario s = parse_scenario_json(j, "test");
        try {
            validate_scenario(s);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("does not fit model") != std::string::npos);
        }
    }
    SUBCASE("bad domain kind") {
        nlohmann::json j = chile_json();
        j["indicators"][0]["domain"]["kind"] = "cubic";
        const Scenario s = parse_scenario_json(j, "test");
        try {
            validate_scenario(s);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("domain.kind: expected log or linear") !=
                  std::string::npos);
        }
    }
    SUBCASE("log domain needs a positive lower edge") {
        nlohmann::json j = chile_json();
        j["indicators"][0]["domain"]["lo"] = 0.0;
        const Scenario s = parse_scenario_json(j, "test");
        CHECK_THROWS_AS(validate_scenario(s), ConfigError);
    }
}

TEST_CASE("several violations surface in one validation error") {
    nlohmann::json j = chile_json();
    j["policy"]["Delta"] = 7;
    j["initial"]["S"] = 1.0;
    j["indicators"][1]["id"] = "mean_icu";
    const Scenario s = parse_scenario_json(j, "test");
    try {
        validate_scenario(s);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("Δ ≥ τ") != std::string::npos);
        CHECK(msg.find("sum to the population") != std::string::npos);
        CHECK(msg.find("duplicate indicator id") != std::string::npos);
    }
}

TEST_CASE("iso dates parse, format, and reject nonsense") {
    CHECK(format_date(parse_date("2020-09-21")) == "2020-09-21");
    CHECK(format_date(parse_date("2020-02-29")) == "2020-02-29");  // leap day
    CHECK_THROWS_AS(parse_date("2021-02-29"), ConfigError);
    CHECK_THROWS_AS(parse_date("2021-13-01"), ConfigError);
    CHECK_THROWS_AS(parse_date("not-a-date"), ConfigError);
    CHECK_THROWS_AS(parse_date("2020-09-21T00:00"), ConfigError);

    const auto start = parse_date("2020-09-21");
    CHECK(format_date(start + std::chrono::days(27)) == "2020-10-18");
    CHECK(format_date(start + std::chrono::days(1826)) == "2025-09-21");
}

TEST_CASE("indicator lookup names the available ids on a miss") {
    const Scenario s = load_scenario(bundled("chile.scenario"));
    CHECK(s.indicator("mean_icu").observation.tag == "chile_icu");
    try {
        s.indicator("median_icu");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("has no indicator 'median_icu'") != std::string::npos);
        CHECK(msg.find("mean_active") != std::string::npos);
    }
}

TEST_CASE("scenario wiring produces a ready-to-run policy") {
    const Scenario s = load_scenario(bundled("chile.scenario"));
    const IndicatorConfig& ind = s.indicator("mean_icu");

    const TriggerPolicy pol = s.make_policy(ind, 253.0);
    CHECK_NOTHROW(pol.validate());
    CHECK(pol.hist == 14);
    CHECK(pol.Delta == 14);
    CHECK(pol.theta == 253.0);
    CHECK(pol.u_ref == 0.8);
    CHECK(pol.ramps.Delta == 14);
    CHECK(pol.ramps.delta_hat == 0.2);
    CHECK(pol.indicator.observation.tag == "chile_icu");
    CHECK(pol.indicator.aggregator == Aggregator::mean);

    const PolicyRun run = s.make_run(ind);
    CHECK(run.t0 == 0);
    CHECK(run.horizon == 1826);
    CHECK(run.x0 == s.x0);
    CHECK(run.model.id == "chile8");
    CHECK(run.peak_observation.tag == "chile_icu");
    CHECK(run.outcome_labels == std::vector<std::string>{"peak_icu", "lockdown_pct"});
}

TEST_CASE("domain configs materialize their generator") {
    DomainConfig d{"log", 1.0, 100.0, 5};
    const ThresholdDomain five = d.materialize();
    CHECK(five.values.size() == 5);
    CHECK(five.values.front() == 1.0);
    CHECK(five.values.back() == 100.0);

    const ThresholdDomain nine = d.materialize(9);
    CHECK(nine.values.size() == 9);
    CHECK(nine.values.back() == 100.0);

    DomainConfig lin{"linear", -20.0, 20.0, 3};
    const ThresholdDomain three = lin.materialize();
    CHECK(three.values == std::vector<double>{-20.0, 0.0, 20.0});

    DomainConfig bad{"cubic", 1.0, 2.0, 4};
    CHECK_THROWS_AS(bad.materialize(), ConfigError);
}

TEST_CASE("compartment name tables") {
    CHECK(compartment_names("chile8") ==
          std::vector<std::string>{"S", "E", "Im", "I", "R", "H", "Hc", "D"});
    CHECK(compartment_names("china9") ==
          std::vector<std::string>{"S", "E", "I", "Iu", "HR", "HD", "Rd", "Ru", "D"});
    CHECK_THROWS_AS(compartment_names("norway3"), ConfigError);
}

TEST_CASE("doubles format to the shortest exact decimal text") {
    CHECK(fmt_double(253.0) == "253.0");
    CHECK(fmt_double(0.0) == "0.0");
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(-20.0) == "-20.0");

    for (double v : {1.4786418400876231, 7722272.681340601, 3.3572476202479775e-05})
        CHECK(std::stod(fmt_double(v)) == v);

    CHECK(fmt_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(fmt_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(fmt_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("curve CSVs round-trip including failed points") {
    TradeOffCurve curve;
    curve.scenario_id = "chile";
    curve.indicator_id = "mean_icu";
    curve.tau = 14;
    curve.Delta = 14;

    CurvePoint ok;
    ok.theta = 253.0;
    ok.outcomes.labels = {"peak_icu", "lockdown_pct"};
    ok.outcomes.values = {433.0, 1.4786418400876231};
    ok.ok = true;
    curve.points.push_back(ok);

    CurvePoint bad;
    bad.theta = 300.0;
    bad.ok = false;
    bad.error = "division by zero, with \"quotes\" and, commas";
    curve.points.push_back(bad);

    const fs::path path = temp_dir() / "roundtrip_curve.csv";
    const std::string text = curve_csv(curve);
    write_file_atomic(path.string(), text);
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));

    const std::string header = split(text, '\n')[4];
    CHECK(header == "theta,peak_icu,lockdown_pct,status");

    const TradeOffCurve back = read_curve_csv(path.string());
    CHECK(back.scenario_id == "chile");
    CHECK(back.indicator_id == "mean_icu");
    CHECK(back.tau == 14);
    CHECK(back.Delta == 14);
    REQUIRE(back.points.size() == 2);
    CHECK(back.points[0].ok);
    CHECK(back.points[0].theta == 253.0);
    CHECK(back.points[0].outcomes.values == std::vector<double>{433.0,
                                                                1.4786418400876231});
    CHECK_FALSE(back.points[1].ok);
    CHECK(back.points[1].theta == 300.0);
    CHECK(back.points[1].error == bad.error);
}

TEST_CASE("reading a curve with a mangled header fails with the line number") {
    const fs::path path = temp_dir() / "mangled.csv";
    write_file_atomic(path.string(),
                      "# scenario: x\n# indicator: y\n# tau: 1\n# Delta: 2\n"
                      "theta,peak,status\nnot-a-number,1,ok\n");
    CHECK_THROWS_AS(read_curve_csv(path.string()), ConfigError);
}

TEST_CASE("trajectory CSVs carry one row per day plus the terminal state") {
    const Scenario s = load_scenario(bundled("chile.scenario"));
    const ModelSpec m = s.make_model();
    const TriggerPolicy pol =
        s.make_policy(s.indicator("mean_icu"), std::numeric_limits<double>::infinity());
    const ClosedLoopResult res = simulate_closed_loop(m, s.x0, pol, 0, 20);

    const std::string text = trajectory_csv(res, m, s.start());
    const std::vector<std::string> lines = split(text, '\n');
    REQUIRE(lines.size() >= 23);  // header + 22 state rows (+ trailing blank)
    CHECK(lines[0] == "t,date,S,E,Im,I,R,H,Hc,D,u,indicator,regime");

    const std::vector<std::string> first = split(lines[1], ',');
    REQUIRE(first.size() == 13);
    CHECK(first[0] == "0");
    CHECK(first[1] == "2020-09-21");
    CHECK(first[10] == "0.0");
    CHECK(first[12] == "released");

    const std::vector<std::string> last = split(lines[22], ',');
    REQUIRE(last.size() == 13);
    CHECK(last[0] == "21");
    CHECK(last[10].empty());  // no control on the terminal state
    CHECK(last[12].empty());
}

TEST_CASE("switch CSVs list one row per trigger with its calendar date") {
    SwitchLog log;
    log.trigger_times = {0, 27};
    log.initial_applied = true;

    const std::string text = switches_csv(log, parse_date("2020-09-21"));
    const std::vector<std::string> lines = split(text, '\n');
    REQUIRE(lines.size() >= 3);
    CHECK(lines[0] == "k,t,date,regime");
    CHECK(lines[1] == "0,0,2020-09-21,applied");
    CHECK(lines[2] == "1,27,2020-10-18,released");
}

TEST_CASE("run manifests record the hash, version, timestamp, and outputs") {
    const RunManifest m = make_manifest("0123456789abcdef", {"a.csv", "b.csv"});
    CHECK(m.config_hash == "0123456789abcdef");
    CHECK(m.engine_version == kEngineVersion);
    REQUIRE(m.timestamp.size() == 20);
    CHECK(m.timestamp[4] == '-');
    CHECK(m.timestamp[10] == 'T');
    CHECK(m.timestamp.back() == 'Z');
    CHECK(m.outputs == std::vector<std::string>{"a.csv", "b.csv"});

    const fs::path path = temp_dir() / "manifest.json";
    write_manifest(path.string(), m);
    std::ifstream in(path);
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j.at("config_hash") == "0123456789abcdef");
    CHECK(j.at("engine_version") == kEngineVersion);
    CHECK(j.at("outputs").size() == 2);
}

TEST_CASE("trade-off charts are self-contained svg documents") {
    TradeOffCurve curve;
    curve.scenario_id = "chile";
    curve.indicator_id = "mean_icu";
    curve.tau = 14;
    curve.Delta = 14;
    for (int i = 1; i <= 4; ++i) {
        CurvePoint pt;
        pt.theta = i;
        pt.outcomes.labels = {"peak_icu", "lockdown_pct"};
        pt.outcomes.values = {100.0 * i, 50.0 - i};
        pt.ok = true;
        curve.points.push_back(pt);
    }
    const std::string svg = curve_chart_svg({curve});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);
    CHECK(svg.find("mean_icu") != std::string::npos);
    CHECK(svg.find("<script") == std::string::npos);
    CHECK(svg.find("href=") == std::string::npos);  // no external references
}
