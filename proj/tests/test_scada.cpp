#include "doctest.h"

#include "fixtures.h"
#include "pipenet/scada.h"

#include <cmath>
#include <random>

using namespace pipenet;

namespace {

const std::vector<double> kInjected{0.2, -12.6, 3.0, 0.9, 3.5};

TimeTable single(std::vector<double> times, std::vector<double> values, Unit unit = Unit::Metres)
{
    return TimeTable(std::move(times), {Series{"x", unit, std::move(values)}});
}

}  // namespace

TEST_CASE("2 s samples averaged onto a 60 s grid")
{
    std::vector<double> t;
    std::vector<double> v;
    for (int i = 0; i < 300; ++i) {
        t.push_back(2.0 * i);
        v.push_back(i % 7 + 0.25 * i);
    }
    const TimeTable out = resample(single(t, v), 60.0, ResampleMethod::DownsampleMean);
    REQUIRE(out.size() == 10);  // 0, 60, ..., 540; the record ends at 598 s
    CHECK(*out.step() == 60.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double sum = 0.0;
        for (std::size_t i = 30 * k; i < 30 * k + 30; ++i) {
            sum += v[i];
        }
        CHECK(out.values("x")[k] == doctest::Approx(sum / 30.0));
    }
}

TEST_CASE("deadband flow holds the last recorded value")
{
    const TimeTable raw = single({0.0, 400.0, 480.0}, {10.0, 12.0, 12.0}, Unit::LitresPerSecond);
    const TimeTable out = resample(raw, 60.0, ResampleMethod::HoldLast);
    REQUIRE(out.size() == 9);
    for (std::size_t k = 0; k <= 6; ++k) {
        CHECK(out.values("x")[k] == 10.0);
    }
    CHECK(out.values("x")[7] == 12.0);  // t = 420
    CHECK(out.values("x")[8] == 12.0);
    CHECK(out.column("x").unit == Unit::LitresPerSecond);
}

TEST_CASE("15-minute samples interpolated to 1 minute")
{
    const TimeTable raw = single({0.0, 900.0, 1800.0}, {40.0, 43.0, 41.0});
    const TimeTable out = resample(raw, 60.0, ResampleMethod::InterpolateLinear);
    REQUIRE(out.size() == 31);
    CHECK(out.values("x")[0] == 40.0);
    CHECK(out.values("x")[15] == 43.0);
    CHECK(out.values("x")[30] == 41.0);
    CHECK(out.values("x")[7] == doctest::Approx(40.0 + 3.0 * 7.0 / 15.0));
    // Midpoint of 900 s and 1800 s is not on the grid; 1320 and 1380 straddle it.
    const TimeTable half = resample(raw, 450.0, ResampleMethod::InterpolateLinear);
    CHECK(half.values("x")[3] == doctest::Approx((43.0 + 41.0) / 2.0));
}

TEST_CASE("resampling a constant series keeps its value")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> jitter(0.5, 4.0);
    std::vector<double> t{13.0};
    while (t.back() < 3600.0) {
        t.push_back(t.back() + jitter(rng));
    }
    const std::vector<double> v(t.size(), 87.125);
    for (ResampleMethod m : {ResampleMethod::InterpolateLinear, ResampleMethod::DownsampleMean,
                             ResampleMethod::HoldLast}) {
        const TimeTable out = resample(single(t, v), 60.0, m);
        CHECK(out.start() == 60.0);
        for (double x : out.values("x")) {
            CHECK(x == 87.125);
        }
    }
}

TEST_CASE("resample does not extrapolate and respects gaps")
{
    const double nan = std::nan("");
    const TimeTable raw = single({30.0, 90.0, 150.0, 210.0}, {1.0, nan, 3.0, 4.0});
    const TimeTable out = resample(raw, 60.0, ResampleMethod::InterpolateLinear);
    REQUIRE(out.size() == 3);  // 60, 120, 180
    CHECK(std::isnan(out.values("x")[0]));
    CHECK(std::isnan(out.values("x")[1]));
    CHECK(out.values("x")[2] == doctest::Approx(3.5));

    CHECK_THROWS_AS(resample(single({10.0, 20.0}, {1.0, 2.0}), 60.0, ResampleMethod::HoldLast),
                    std::invalid_argument);
    CHECK_THROWS_AS(resample(single({0.0, 60.0}, {nan, nan}), 60.0, ResampleMethod::HoldLast),
                    std::invalid_argument);
    CHECK_THROWS_AS(resample(single({0.0, 60.0}, {1.0, 2.0}), 0.0, ResampleMethod::HoldLast),
                    std::invalid_argument);
    CHECK(parse_resample_method("hold") == ResampleMethod::HoldLast);
    CHECK_FALSE(parse_resample_method("cubic"));
}

TEST_CASE("short interior gaps are filled, long ones are not")
{
    const double nan = std::nan("");
    TimeTable t = TimeTable::uniform(0.0, 60.0, 14);
    t.add_column({"x", Unit::Metres,
                  {nan, 1.0, nan, nan, 4.0, 5.0, nan, nan, nan, nan, nan, 11.0, 12.0, nan}});
    const TimeTable filled = fill_gaps(t, 4);
    const auto& v = filled.values("x");
    CHECK(std::isnan(v[0]));
    CHECK(v[2] == doctest::Approx(2.0));
    CHECK(v[3] == doctest::Approx(3.0));
    for (std::size_t k = 6; k <= 10; ++k) {
        CHECK(std::isnan(v[k]));
    }
    CHECK(std::isnan(v[13]));
    CHECK(fill_gaps(t, 5).values("x")[8] == doctest::Approx(8.0));
}

TEST_CASE("static window detection")
{
    const auto flow_table = [](std::vector<double> v) {
        TimeTable t = TimeTable::uniform(0.0, 60.0, v.size());
        t.add_column({"q", Unit::LitresPerSecond, std::move(v)});
        return t;
    };
    SUBCASE("zero flow throughout is one window")
    {
        const auto w = detect_static_windows(flow_table(std::vector<double>(120, 0.0)), "q");
        REQUIRE(w.size() == 1);
        CHECK(w[0] == StaticWindow{0.0, 119 * 60.0});
    }
    SUBCASE("steady high flow has none")
    {
        CHECK(detect_static_windows(flow_table(std::vector<double>(120, 2500.0)), "q").empty());
    }
    SUBCASE("only the long quiet period qualifies")
    {
        // 1-minute samples over four hours; quiet 00:00-01:00 and 03:00-03:10.
        std::vector<double> v(240, 1800.0);
        for (std::size_t k = 0; k <= 60; ++k) {
            v[k] = 0.0;
        }
        for (std::size_t k = 180; k <= 190; ++k) {
            v[k] = 0.0;
        }
        const auto w = detect_static_windows(flow_table(v), "q", 5.0, 1800.0);
        REQUIRE(w.size() == 1);
        CHECK(w[0] == StaticWindow{0.0, 3600.0});
    }
    SUBCASE("missing samples split windows")
    {
        std::vector<double> v(60, 1.0);
        v[30] = std::nan("");
        CHECK(detect_static_windows(flow_table(v), "q", 10.0, 1800.0).size() == 1);
        CHECK(detect_static_windows(flow_table(v), "q", 10.0, 1860.0).empty());
    }
    SUBCASE("flows in cubic metres per second are converted")
    {
        TimeTable t = TimeTable::uniform(0.0, 60.0, 30);
        t.add_column({"q", Unit::CubicMetresPerSecond, std::vector<double>(30, 0.008)});
        CHECK(detect_static_windows(t, "q", 10.0, 900.0).size() == 1);
        CHECK(detect_static_windows(t, "q", 5.0, 900.0).empty());
    }
}

TEST_CASE("sensor metadata")
{
    const auto sensors = parse_sensors("# id node z kind\nSysPres PS 50 pressure\nRTU1 RTU1 52 pressure\n"
                                       "Sys_Flow PS 50 flow\n");
    REQUIRE(sensors.size() == 3);
    CHECK(sensors[2].kind == SensorKind::Flow);
    CHECK_THROWS_AS(parse_sensors("A B 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sensors("A B x pressure\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sensors("A B 1 temp\n"), std::invalid_argument);

    const Network net = parse_network(fixtures::calibration_text());
    CHECK(check_sensors(net, sensors).empty());
    CHECK(check_sensors(net, parse_sensors("RTU1 RTU1 52.5 pressure\n")).size() == 1);
    CHECK_THROWS_AS(check_sensors(net, parse_sensors("X NOPE 1 pressure\n")), std::invalid_argument);
}

TEST_CASE("detected windows match the constructed static periods")
{
    const auto sc = fixtures::static_scenario(kInjected, 0.0, 1);
    CHECK(detect_static_windows(sc.flow, "Sys_Flow") == sc.true_windows);
}

TEST_CASE("injected offsets are recovered")
{
    SUBCASE("noiseless")
    {
        const auto sc = fixtures::static_scenario(kInjected, 0.0, 1);
        const auto windows = detect_static_windows(sc.flow, "Sys_Flow");
        const OffsetReport r = estimate_offsets(sc.pressures, sc.sensors, "SysPres", windows);
        REQUIRE(r.sensors.size() == 6);
        CHECK(r.find("SysPres")->offset == 0.0);
        for (std::size_t k = 0; k < kInjected.size(); ++k) {
            const SensorOffset& o = r.sensors[k + 1];
            CHECK(std::abs(o.offset - kInjected[k]) <= 0.01);
            CHECK(o.windows == 4);
            CHECK(o.confidence == OffsetConfidence::Ok);
        }

        // Corrected HGLs agree exactly under static conditions.
        const TimeTable fixed = apply_corrections(sc.pressures, r);
        const auto& t = fixed.times();
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] < windows[0].start || t[i] > windows[0].end) {
                continue;
            }
            const double ref = fixed.values("SysPres")[i] + sc.sensors[0].elevation;
            for (std::size_t k = 1; k <= 5; ++k) {
                CHECK(std::abs(fixed.values(sc.sensors[k].id)[i] + sc.sensors[k].elevation - ref) <= 1e-9);
            }
        }

        // Second pass finds nothing left to correct.
        const OffsetReport again = estimate_offsets(fixed, sc.sensors, "SysPres", windows);
        for (const SensorOffset& o : again.sensors) {
            CHECK(std::abs(o.offset) <= 0.01);
        }
    }
    SUBCASE("with 0.05 m sensor noise")
    {
        const auto sc = fixtures::static_scenario(kInjected, 0.05, 7);
        const auto windows = detect_static_windows(sc.flow, "Sys_Flow");
        const OffsetReport r = estimate_offsets(sc.pressures, sc.sensors, "SysPres", windows);
        for (std::size_t k = 0; k < kInjected.size(); ++k) {
            CHECK(std::abs(r.sensors[k + 1].offset - kInjected[k]) <= 0.1);
            CHECK(r.sensors[k + 1].confidence == OffsetConfidence::Ok);
        }
    }
    SUBCASE("exact sensors give zero offsets")
    {
        const auto sc = fixtures::static_scenario(std::vector<double>(5, 0.0), 0.0, 1);
        const OffsetReport r = estimate_offsets(sc.pressures, sc.sensors, "SysPres", sc.true_windows);
        for (const SensorOffset& o : r.sensors) {
            CHECK(std::abs(o.offset) <= 1e-12);
        }
        CHECK(apply_corrections(sc.pressures, r).values("RTU3") == sc.pressures.values("RTU3"));
    }
    SUBCASE("one noisy window is never trusted")
    {
        const auto sc = fixtures::static_scenario(kInjected, 0.5, 3);
        const OffsetReport r =
            estimate_offsets(sc.pressures, sc.sensors, "SysPres", {sc.true_windows[0]});
        for (std::size_t k = 1; k < r.sensors.size(); ++k) {
            CHECK(r.sensors[k].confidence != OffsetConfidence::Ok);
        }
        const OffsetReport spread = estimate_offsets(sc.pressures, sc.sensors, "SysPres", sc.true_windows);
        CHECK(spread.sensors[2].confidence == OffsetConfidence::Inconsistent);
    }
    SUBCASE("no windows")
    {
        const auto sc = fixtures::static_scenario(kInjected, 0.0, 1);
        const OffsetReport r = estimate_offsets(sc.pressures, sc.sensors, "SysPres", {});
        for (const SensorOffset& o : r.sensors) {
            CHECK(o.confidence == OffsetConfidence::LowData);
        }
        std::vector<std::string> warnings;
        apply_corrections(sc.pressures, r, &warnings);
        CHECK(warnings.size() == 5);
    }
}

TEST_CASE("correction subtracts the offset")
{
    TimeTable t = TimeTable::uniform(0.0, 60.0, 3);
    t.add_column({"RTU2", Unit::Metres, {100.0, 100.0, 100.0}});
    OffsetReport r{"SysPres", {{"RTU2", -12.6, 4, 0.01, OffsetConfidence::Ok}}};
    const TimeTable fixed = apply_corrections(t, r);
    for (double v : fixed.values("RTU2")) {
        CHECK(v == doctest::Approx(112.6));
    }
    r.sensors[0].offset = 0.0;
    CHECK(apply_corrections(t, r).values("RTU2") == t.values("RTU2"));
    CHECK(format_offset_report(r).find("[offsets.RTU2]") != std::string::npos);
}

TEST_CASE("estimate_offsets input errors")
{
    const auto sc = fixtures::static_scenario(kInjected, 0.0, 1);
    CHECK_THROWS_AS(estimate_offsets(sc.pressures, sc.sensors, "nobody", sc.true_windows),
                    std::invalid_argument);
    auto sensors = sc.sensors;
    sensors.push_back({"RTU9", "RTU1", 52, SensorKind::Pressure});
    CHECK_THROWS_AS(estimate_offsets(sc.pressures, sensors, "SysPres", sc.true_windows),
                    std::invalid_argument);
}
