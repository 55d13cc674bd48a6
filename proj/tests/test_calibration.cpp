#include "doctest.h"

#include "fixtures.h"
#include "pipenet/calibration.h"

#include <cmath>
#include <random>

using namespace pipenet;

namespace {

const std::vector<std::string> kSmallSites{"T10", "B3_3", "B9_3"};

struct Setup {
    Network net;
    CalibrationData data;
};

Setup small_setup(std::size_t steps, double noise, std::uint64_t seed = 4)
{
    Network net = parse_network(fixtures::small_calibration_text());
    const TimeTable demands = fixtures::diurnal_demands(net, steps, 900, seed, 50.0);
    const TimeTable obs = fixtures::synthetic_observations(net, demands, kSmallSites, noise, seed + 1);
    CalibrationData data = make_calibration_data(net, demands, obs, kSmallSites, std::string("SysPres"));
    return {std::move(net), std::move(data)};
}

RoughnessGroups groups_of(std::vector<std::pair<std::string, double>> values)
{
    std::vector<RoughnessGroup> g;
    for (auto& [m, v] : values) {
        g.push_back({m, v, 0.001, 50.0});
    }
    return RoughnessGroups(std::move(g));
}

}  // namespace

TEST_CASE("roughness groups")
{
    const Network net = parse_network(fixtures::calibration_text());
    const RoughnessGroups g = RoughnessGroups::from_network(net);
    REQUIRE(g.size() == 4);
    CHECK(g.roughness("MSCL") == 10.6);
    CHECK(g.roughness("mPVC") == 0.01);
    CHECK(g.per_pipe(net) == [&] {
        std::vector<double> v;
        for (const Pipe& p : net.pipes()) {
            v.push_back(p.roughness_mm);
        }
        return v;
    }());

    const RoughnessGroups parsed = parse_groups("# groups\nMSCL 5\nDICL 0.5 0.01 2\nGRP 1\nmpvc 0.02\n");
    CHECK(parsed.groups()[1].max_mm == 2.0);
    CHECK(parsed.find("mPVC"));
    CHECK(parse_groups(write_groups(parsed)).groups().size() == 4);
    CHECK_THROWS_AS(parse_groups("MSCL 5\nMSCL 6\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_groups("MSCL 60\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_groups("MSCL 1 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_groups("DICL 1\n").per_pipe(net), std::invalid_argument);
}

TEST_CASE("objective arithmetic")
{
    Schedule obs(2, 1);
    Schedule sim(2, 1);
    obs.at(0, 0) = 10.0;
    obs.at(1, 0) = 20.0;
    sim.at(0, 0) = 9.0;
    sim.at(1, 0) = 23.0;
    CHECK(objective_value(obs, sim) == doctest::Approx(5.0));
    CHECK(objective_value(obs, obs) == 0.0);

    // Missing observations shrink T for that site only.
    Schedule obs2(3, 2, 0.0);
    Schedule sim2(3, 2, 0.0);
    obs2.at(0, 0) = 2.0;
    obs2.at(1, 0) = std::nan("");
    obs2.at(2, 0) = 4.0;
    obs2.at(0, 1) = 3.0;
    CHECK(objective_value(obs2, sim2) == doctest::Approx((4.0 + 16.0) / 2.0 + 9.0 / 3.0));
    CHECK_THROWS_AS(objective_value(obs2, sim), std::invalid_argument);
}

TEST_CASE("objective ignores site and step order")
{
    Schedule obs(4, 3);
    Schedule sim(4, 3);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(30, 60);
    for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t j = 0; j < 3; ++j) {
            obs.at(t, j) = u(rng);
            sim.at(t, j) = u(rng);
        }
    }
    Schedule obs_p(4, 3);
    Schedule sim_p(4, 3);
    const std::size_t site_perm[] = {2, 0, 1};
    const std::size_t step_perm[] = {3, 1, 0, 2};
    for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t j = 0; j < 3; ++j) {
            obs_p.at(t, j) = obs.at(step_perm[t], site_perm[j]);
            sim_p.at(t, j) = sim.at(step_perm[t], site_perm[j]);
        }
    }
    CHECK(objective_value(obs_p, sim_p) == doctest::Approx(objective_value(obs, sim)).epsilon(1e-14));
}

TEST_CASE("fit metrics")
{
    const std::vector<double> a{10.0, 20.0};
    const FitMetrics same = fit_metrics("s", a, a);
    CHECK(same.rmse == 0.0);
    CHECK(same.mae == 0.0);
    CHECK(same.pct_diff == 0.0);

    const FitMetrics shifted = fit_metrics("s", a, std::vector<double>{8.0, 18.0});
    CHECK(shifted.rmse == doctest::Approx(2.0));
    CHECK(shifted.mae == doctest::Approx(2.0));

    const FitMetrics mixed = fit_metrics("s", a, std::vector<double>{9.0, 23.0});
    CHECK(mixed.rmse == doctest::Approx(std::sqrt(5.0)));
    CHECK(mixed.mae == doctest::Approx(2.0));
    CHECK(mixed.rmse >= mixed.mae);
    CHECK(mixed.avg_observed == 15.0);
    CHECK(mixed.avg_simulated == 16.0);
    CHECK(mixed.pct_diff == doctest::Approx((15.0 - 16.0) / 15.0 * 100.0));

    const FitMetrics rtu1 = fit_metrics("RTU1", std::vector<double>{141.4}, std::vector<double>{141.5});
    CHECK(rtu1.pct_diff < 0.0);
    CHECK_THROWS_AS(fit_metrics("s", a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("objective is zero at the generating roughness")
{
    const Setup s = small_setup(24, 0.0);
    const RoughnessGroups truth = groups_of({{"DICL", 1.0}, {"mPVC", 0.05}});
    CHECK(objective(s.net, s.data, truth) <= 1e-12);
    CHECK(objective(s.net, s.data, groups_of({{"DICL", 2.0}, {"mPVC", 0.05}})) > 1e-3);
}

TEST_CASE("static demand makes the objective independent of roughness")
{
    Network net = parse_network(fixtures::small_calibration_text());
    const TimeTable zero = fixtures::constant_demands(net, 4, 900, 0.0);
    const TimeTable obs = fixtures::synthetic_observations(net, zero, kSmallSites, 0.0, 1);
    const CalibrationData data = make_calibration_data(net, zero, obs, kSmallSites);
    const double a = objective(net, data, groups_of({{"DICL", 0.01}, {"mPVC", 0.01}}));
    const double b = objective(net, data, groups_of({{"DICL", 40.0}, {"mPVC", 5.0}}));
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK(a <= 1e-12);
}

TEST_CASE("finite-difference gradient agrees with a finer central difference")
{
    const Setup s = small_setup(8, 0.0);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 5; ++k) {
        const RoughnessGroups at = groups_of({{"DICL", std::exp(u(rng))}, {"mPVC", 0.05 * std::exp(u(rng))}});
        const auto grad = objective_gradient(s.net, s.data, at);
        for (std::size_t g = 0; g < at.size(); ++g) {
            const double e = at.groups()[g].roughness_mm;
            const double h = 1e-5 * e;
            RoughnessGroups up = at;
            RoughnessGroups down = at;
            up.set_roughness(g, e + h);
            down.set_roughness(g, e - h);
            const double oracle = (objective(s.net, s.data, up) - objective(s.net, s.data, down)) / (2 * h);
            CHECK(grad[g] == doctest::Approx(oracle).epsilon(1e-3));
        }
    }
}

TEST_CASE("calibration recovers a two-material truth")
{
    const Setup s = small_setup(24, 0.0);
    const RoughnessGroups init = groups_of({{"DICL", 5.0}, {"mPVC", 0.5}});
    const CalibrationResult r = calibrate(s.net, s.data, init);
    CHECK(r.converged);
    CHECK(r.groups.roughness("DICL") == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r.groups.roughness("mPVC") == doctest::Approx(0.05).epsilon(0.05));
    CHECK(r.objective <= r.initial_objective);
    CHECK(r.sites.size() == 3);
    for (const FitMetrics& m : r.sites) {
        CHECK(m.rmse >= m.mae);
    }
}

TEST_CASE("starting at the truth converges immediately")
{
    const Setup s = small_setup(24, 0.0);
    const CalibrationResult r = calibrate(s.net, s.data, groups_of({{"DICL", 1.0}, {"mPVC", 0.05}}));
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.objective <= 1e-12);
}

TEST_CASE("calibration is deterministic and execution-independent")
{
    const Setup s = small_setup(12, 0.1);
    const RoughnessGroups init = groups_of({{"DICL", 0.2}, {"mPVC", 1.0}});
    CalibrationOptions opts;
    opts.multistart = 2;
    const CalibrationResult a = calibrate(s.net, s.data, init, opts);
    opts.execution = kernels::Execution::Parallel;
    const CalibrationResult b = calibrate(s.net, s.data, init, opts);
    CHECK(a.objective == b.objective);
    CHECK(a.groups.roughness("DICL") == b.groups.roughness("DICL"));
    CHECK(a.groups.roughness("mPVC") == b.groups.roughness("mPVC"));
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("bounds are respected")
{
    const Setup s = small_setup(12, 0.0);
    std::vector<RoughnessGroup> g{{"DICL", 0.1, 0.01, 0.4}, {"mPVC", 0.05, 0.001, 50}};
    const CalibrationResult r = calibrate(s.net, s.data, RoughnessGroups(g));
    CHECK(r.groups.roughness("DICL") == doctest::Approx(0.4));
    CHECK(r.objective <= r.initial_objective);
}

TEST_CASE("validation")
{
    const Setup s = small_setup(24, 0.05);
    const RoughnessGroups truth = groups_of({{"DICL", 1.0}, {"mPVC", 0.05}});
    const CalibrationResult cal = calibrate(s.net, s.data, groups_of({{"DICL", 3.0}, {"mPVC", 0.2}}));

    // Same period reproduces the calibration metrics.
    const ValidationResult same = validate(s.net, s.data, cal.groups);
    CHECK(same.objective == cal.objective);
    for (std::size_t j = 0; j < same.sites.size(); ++j) {
        CHECK(same.sites[j].rmse == cal.sites[j].rmse);
    }

    // A held-out day from the same truth fits about as well.
    const Setup held = small_setup(24, 0.05, 40);
    const ValidationResult v = validate(held.net, held.data, cal.groups);
    for (std::size_t j = 0; j < v.sites.size(); ++j) {
        CHECK(v.sites[j].rmse <= 2.0 * std::max(cal.sites[j].rmse, 0.05));
    }

    // Swapped group values fit worse than the truth.
    const ValidationResult wrong = validate(held.net, held.data, groups_of({{"DICL", 0.05}, {"mPVC", 1.0}}));
    const ValidationResult right = validate(held.net, held.data, truth);
    CHECK(wrong.sum_rmse > right.sum_rmse);
}

TEST_CASE("system flow metrics when a flow series is given")
{
    Network net = parse_network(fixtures::small_calibration_text());
    const TimeTable demands = fixtures::diurnal_demands(net, 6, 900, 2, 50.0);
    const TimeTable obs = fixtures::synthetic_observations(net, demands, kSmallSites, 0.0, 1);
    TimeTable flows(demands.times(), {});
    std::vector<double> total(6, 0.0);
    for (const Series& c : demands.columns()) {
        for (std::size_t t = 0; t < 6; ++t) {
            total[t] += c.values[t];
        }
    }
    flows.add_column({"Sys_Flow", Unit::LitresPerSecond, total});
    const CalibrationData data =
        make_calibration_data(net, demands, obs, kSmallSites, std::nullopt, &flows, std::string("Sys_Flow"));
    const ValidationResult v = validate(net, data, RoughnessGroups::from_network(net));
    REQUIRE(v.system_flow);
    CHECK(v.system_flow->rmse < 1e-6);
    CHECK(v.objective <= 1e-12);
}
