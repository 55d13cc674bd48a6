#include "fixtures.h"

#include "pipenet/hydraulics.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace pipenet::fixtures {

namespace {

std::string id(const std::string& prefix, int a)
{
    return prefix + std::to_string(a);
}

std::string id(const std::string& prefix, int a, int b)
{
    return prefix + std::to_string(a) + "_" + std::to_string(b);
}

struct Writer {
    std::ostringstream nodes;
    std::ostringstream pipes;
    std::ostringstream sources;
    int pipe_count = 0;

    void junction(const std::string& name, double z, bool demand = false, bool outlet = false)
    {
        nodes << name << ' ' << z << " junction " << (demand ? name : "-") << ' '
              << (outlet ? "DN150" : "-") << '\n';
    }
    void fixed(const std::string& name, double z, double head, const char* role)
    {
        nodes << name << ' ' << z << " fixed\n";
        sources << name << ' ' << head << ' ' << role << '\n';
    }
    void pipe(const std::string& from, const std::string& to, double length, double diameter_mm,
              const char* material, double roughness)
    {
        pipes << "P" << ++pipe_count << ' ' << from << ' ' << to << ' ' << length << ' '
              << diameter_mm << ' ' << material << ' ' << roughness << '\n';
    }
    std::string str() const
    {
        return "[NODES]\n" + nodes.str() + "\n[PIPES]\n" + pipes.str() + "\n[SOURCES]\n" +
               sources.str();
    }
};

}  // namespace

std::string two_node_text()
{
    return "# smallest network\n"
           "[NODES]\n"
           "R1 100 fixed\n"
           "J1 50 junction J1\n"
           "[PIPES]\n"
           "P1 J1 R1 1000 300 DICL 0.26\n"
           "[SOURCES]\n"
           "R1 100 reservoir\n";
}

std::string single_pipe_text(double head, double length_m, double diameter_mm,
                             double roughness_mm, const std::string& material)
{
    std::ostringstream out;
    out.precision(17);
    out << "[NODES]\nR 100 fixed\nJ1 50 junction J1\n[PIPES]\nP1 R J1 " << length_m << ' '
        << diameter_mm << ' ' << material << ' ' << roughness_mm << "\n[SOURCES]\nR " << head
        << " reservoir\n";
    return out.str();
}

std::string triangle_text()
{
    return "[NODES]\n"
           "R 80 fixed\n"
           "A 50 junction A\n"
           "B 51 junction B\n"
           "C 52 junction C\n"
           "[PIPES]\n"
           "S R A 100 400 DICL 0.44\n"
           "AB A B 300 300 DICL 0.44\n"
           "BC B C 300 300 DICL 0.44\n"
           "CA C A 300 300 DICL 0.44\n";
}

std::string forest_433_text()
{
    Writer w;
    w.fixed("PS1", 50, 140, "pump");
    w.fixed("PS2", 50, 140, "pump");

    const auto tree = [&](const std::string& root, const std::string& tag, int trunk, int lateral) {
        for (int k = 0; k < trunk; ++k) {
            const std::string t = id(tag, k);
            w.junction(t, 47 + (k * 7) % 29);
            if (k == 0) {
                w.pipe(root, t, 350, 1200, "MSCL", 10.6);
            } else {
                w.pipe(id(tag, k - 1), t, 300 + 37 * (k % 11), k < trunk / 2 ? 1400 : 1000, "GRP",
                       2.91);
            }
            std::string prev = t;
            for (int j = 1; j <= lateral; ++j) {
                const std::string n = id(tag, k, j);
                const bool end = j == lateral;
                w.junction(n, 47 + (k * 5 + j * 3) % 29, end, end);
                const bool pvc = j > lateral - 2;
                w.pipe(prev, n, 0.7 + 60.0 * j + 13.0 * (k % 7), pvc ? (j == lateral ? 225 : 300)
                                                                       : 750 - 75 * j,
                       pvc ? "mPVC" : "DICL", pvc ? 0.01 : 0.44);
                prev = n;
            }
        }
    };
    tree("PS1", "A", 31, 6);
    tree("PS2", "B", 24, 8);
    return w.str();
}

std::string grid_text(int rows, int cols)
{
    Writer w;
    w.fixed("R", 60, 130, "pump");
    const char* materials[] = {"DICL", "mPVC", "GRP", "DICL"};
    const double eps[] = {0.44, 0.01, 2.91, 0.44};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            w.junction(id("N", r, c), 47 + (r * 3 + c * 2) % 28, true, false);
        }
    }
    w.pipe("R", id("N", 0, 0), 200, 1000, "MSCL", 10.6);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int m = (r + c) % 4;
            const double d = 300 + 75 * ((rows - r + cols - c) / 6);
            if (c + 1 < cols) {
                w.pipe(id("N", r, c), id("N", r, c + 1), 150 + 10 * (r % 5), d, materials[m], eps[m]);
            }
            if (r + 1 < rows) {
                w.pipe(id("N", r, c), id("N", r + 1, c), 180 + 7 * (c % 4), d, materials[m], eps[m]);
            }
        }
    }
    return w.str();
}

std::string calibration_text(const MaterialTruth& truth)
{
    Writer w;
    w.fixed("PS", 50, 145, "pump");
    w.junction("RTU1", 52);
    w.pipe("PS", "RTU1", 1500, 1200, "MSCL", truth.mscl);

    const double trunk_d[] = {1400, 1400, 1200, 1200, 1200, 1000, 1000, 1000, 1000, 1000};
    std::string prev = "RTU1";
    for (int k = 1; k <= 10; ++k) {
        const std::string g = k == 10 ? "RTU2" : id("G", k);
        w.junction(g, 52 + k * 0.8);
        w.pipe(prev, g, 500, trunk_d[k - 1], "GRP", truth.grp);
        prev = g;
    }

    const double branch_d[] = {500, 450, 375, 375};
    for (int k = 1; k <= 10; ++k) {
        std::string up = k == 10 ? "RTU2" : id("G", k);
        for (int j = 1; j <= 4; ++j) {
            const std::string d = (k == 10 && j == 4) ? "RTU3" : id("D", k, j);
            w.junction(d, 55 + (k + j) % 6);
            w.pipe(up, d, 500, branch_d[j - 1], "DICL", truth.dicl);

            const bool long_lateral = k == 10 && j == 4;
            const std::string o = long_lateral ? "RTU4" : id("O", k, j);
            w.junction(o, 56 + (k * j) % 7, true, true);
            w.pipe(d, o, long_lateral ? 1500 : 600, long_lateral ? 250 : 300, "mPVC", truth.mpvc);
            if (j == 4 && k <= 9) {
                const std::string e = k == 9 ? "RTU5" : id("E", k);
                w.junction(e, 57 + k % 4, true, true);
                w.pipe(o, e, k == 9 ? 1500 : 400, k == 9 ? 250 : 300, "mPVC", truth.mpvc);
            }
            up = d;
        }
    }
    return w.str();
}

TimeTable diurnal_demands(const Network& net, std::size_t steps, double step_s, std::uint64_t seed,
                          double scale)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    TimeTable table = TimeTable::uniform(kEpoch, step_s, steps);
    for (const Node& n : net.nodes()) {
        if (!n.demand_ref) {
            continue;
        }
        const double base = scale * (0.5 + unit(rng));
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        std::vector<double> v(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            const double day = static_cast<double>(t) * step_s / 86400.0;
            const double mult = 0.8 + 0.5 * std::sin(2.0 * std::numbers::pi * day + phase);
            v[t] = base * mult * (0.9 + 0.2 * unit(rng));
        }
        table.add_column({*n.demand_ref, Unit::LitresPerSecond, std::move(v)});
    }
    return table;
}

TimeTable calibration_demands(const Network& net, std::size_t steps, double step_s,
                              std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    TimeTable table = TimeTable::uniform(kEpoch, step_s, steps);
    for (const Node& n : net.nodes()) {
        if (!n.demand_ref) {
            continue;
        }
        const bool heavy = n.id == "RTU4" || n.id == "RTU5";
        const double base = heavy ? 80.0 + 40.0 * unit(rng) : 20.0 + 30.0 * unit(rng);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        std::vector<double> v(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            const double day = static_cast<double>(t) * step_s / 86400.0;
            v[t] = base * (0.75 + 0.25 * std::sin(2.0 * std::numbers::pi * day + phase)) *
                   (0.9 + 0.2 * unit(rng));
        }
        table.add_column({*n.demand_ref, Unit::LitresPerSecond, std::move(v)});
    }
    return table;
}

std::string setpoint_text(bool balancing_tank, double outlet_elevation_offset)
{
    Writer w;
    w.fixed("PS", 50, 140, "pump");
    constexpr int kMains = 8;
    std::string prev = "PS";
    for (int k = 1; k <= kMains; ++k) {
        const std::string m = id("M", k);
        w.junction(m, 50 + k);
        w.pipe(prev, m, 900, k <= 3 ? 1400 : (k <= 6 ? 1200 : 1000), "GRP", 2.91);
        prev = m;
        for (int b = 1; b <= 2; ++b) {
            const std::string l = id("L", k, b);
            w.junction(l, 52 + k);
            w.pipe(m, l, 500, 600, "DICL", 0.44);
            for (int o = 1; o <= 3; ++o) {
                const std::string out = id("O", k, b) + "_" + std::to_string(o);
                w.junction(out, 54 + k + o + outlet_elevation_offset, true, true);
                w.pipe(l, out, 150 + 50 * o, 300, "mPVC", 0.01);
            }
        }
    }
    if (balancing_tank) {
        w.fixed("T", 80, 130, "reservoir");
        w.pipe(prev, "T", 3000, 500, "DICL", 0.44);
    }
    return w.str();
}

std::string district_text(int mains, int outlets_per_lateral, double outlet_base_elevation)
{
    Writer w;
    w.fixed("PS", 50, 140, "pump");
    w.junction("S0", 50);
    w.pipe("PS", "S0", 300, 1600, "MSCL", 10.6);
    std::string prev = "S0";
    for (int k = 1; k <= mains; ++k) {
        const std::string m = id("M", k);
        w.junction(m, 50 + k % 4);
        w.pipe(prev, m, 800, k <= mains / 3 ? 1600 : (k <= 2 * mains / 3 ? 1400 : 1200), "GRP", 2.91);
        prev = m;
        for (int b = 1; b <= 2; ++b) {
            const std::string l = id("L", k, b);
            w.junction(l, 52 + k % 5);
            w.pipe(m, l, 400, 750, "DICL", 0.44);
            std::string up = l;
            for (int o = 1; o <= outlets_per_lateral; ++o) {
                const std::string out = id("O", k, b) + "_" + std::to_string(o);
                w.junction(out, outlet_base_elevation + (k * 3 + b + o) % 7, true, true);
                w.pipe(up, out, 120 + 30 * o, o <= outlets_per_lateral / 2 ? 450 : 375, "mPVC", 0.01);
                up = out;
            }
        }
    }
    return w.str();
}

TimeTable order_demands(const Network& net, std::size_t steps, double step_s, std::uint64_t seed,
                        double peak_lps)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto steps_per_hour = static_cast<std::size_t>(std::lround(3600.0 / step_s));
    TimeTable table = TimeTable::uniform(kEpoch, step_s, steps);
    for (const Node& n : net.nodes()) {
        if (!n.demand_ref) {
            continue;
        }
        std::vector<double> v(steps, 0.0);
        std::size_t t = 0;
        while (t < steps) {
            const double hour = std::fmod(static_cast<double>(t) * step_s / 3600.0, 24.0);
            // Afternoon crop-cooling demand raises the chance of an order.
            const double p_on = hour >= 12.0 && hour < 18.0 ? 0.75 : 0.45;
            const std::size_t hours = 1 + static_cast<std::size_t>(unit(rng) * 4.0);
            const std::size_t len = hours * steps_per_hour;
            const double flow = unit(rng) < p_on ? peak_lps * (0.5 + 0.5 * unit(rng)) : 0.0;
            for (std::size_t k = t; k < std::min(steps, t + len); ++k) {
                v[k] = flow;
            }
            t += len;
        }
        table.add_column({*n.demand_ref, Unit::LitresPerSecond, std::move(v)});
    }
    return table;
}

TimeTable constant_demands(const Network& net, std::size_t steps, double step_s, double lps)
{
    TimeTable table = TimeTable::uniform(kEpoch, step_s, steps);
    for (const Node& n : net.nodes()) {
        if (n.demand_ref) {
            table.add_column({*n.demand_ref, Unit::LitresPerSecond, std::vector<double>(steps, lps)});
        }
    }
    return table;
}

StaticScenario static_scenario(const std::vector<double>& offsets, double noise_sd,
                               std::uint64_t seed)
{
    const Network net = parse_network(calibration_text());
    StaticScenario sc;
    sc.sensors.push_back({"SysPres", "PS", net.nodes()[net.node_index("PS")].elevation, SensorKind::Pressure});
    for (const std::string& site : kCalibrationSites) {
        sc.sensors.push_back({site, site, net.nodes()[net.node_index(site)].elevation, SensorKind::Pressure});
    }
    sc.sensors.push_back({"Sys_Flow", "PS", 50.0, SensorKind::Flow});

    constexpr double step = 60.0;
    constexpr std::size_t steps = 2 * 24 * 60;
    // Start minute and length of each static period.
    const std::pair<std::size_t, std::size_t> quiet[] = {
        {2 * 60, 60}, {14 * 60, 40}, {(24 + 3) * 60, 45}, {(24 + 20) * 60, 30}};
    const auto static_index = [&](std::size_t t) -> int {
        for (int w = 0; w < 4; ++w) {
            if (t >= quiet[w].first && t < quiet[w].first + quiet[w].second) {
                return w;
            }
        }
        return -1;
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    TimeTable p = TimeTable::uniform(kEpoch, step, steps);
    TimeTable f = TimeTable::uniform(kEpoch, step, steps);
    std::vector<std::vector<double>> cols(sc.sensors.size() - 1, std::vector<double>(steps));
    std::vector<double> flow(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const int w = static_index(t);
        const double day = static_cast<double>(t) * step / 86400.0;
        const double q = w >= 0 ? 2.0 : 1500.0 + 600.0 * std::sin(2.0 * std::numbers::pi * day);
        flow[t] = q;
        const double level = w >= 0 ? 118.0 + 0.7 * w : 140.0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            // Friction drop grows with distance from the station and flow.
            const double drop = w >= 0 ? 0.0 : 2e-6 * q * q * static_cast<double>(k);
            double v = level - drop - sc.sensors[k].elevation;
            if (k > 0) {
                v += offsets.at(k - 1);
                v += noise_sd * noise(rng);
            }
            cols[k][t] = v;
        }
    }
    for (std::size_t k = 0; k < cols.size(); ++k) {
        p.add_column({sc.sensors[k].id, Unit::Metres, std::move(cols[k])});
    }
    f.add_column({"Sys_Flow", Unit::LitresPerSecond, std::move(flow)});
    for (const auto& [first, len] : quiet) {
        sc.true_windows.push_back({kEpoch + step * static_cast<double>(first),
                                   kEpoch + step * static_cast<double>(first + len - 1)});
    }
    sc.pressures = std::move(p);
    sc.flow = std::move(f);
    return sc;
}

TimeTable synthetic_observations(const Network& net, const TimeTable& demands,
                                 const std::vector<std::string>& sites, double noise_sd,
                                 std::uint64_t seed)
{
    const Schedule d = demand_schedule(net, demands);
    const Schedule b = constant_boundary(net, demands.size());
    const auto states = simulate_period(net, d, b);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    TimeTable out(demands.times(), {});
    const std::size_t station = net.fixed_nodes()[station_columns(net).front()];
    std::vector<double> sys(demands.size(), b.at(0, net.fixed_column(station)) - net.nodes()[station].elevation);
    out.add_column({"SysPres", Unit::Metres, std::move(sys)});
    for (const std::string& site : sites) {
        const std::size_t n = net.node_index(site);
        std::vector<double> v(demands.size());
        for (std::size_t t = 0; t < v.size(); ++t) {
            const auto h = node_heads(net, states[t], b.row(t));
            v[t] = h[n] - net.nodes()[n].elevation + noise_sd * noise(rng);
        }
        out.add_column({site, Unit::Metres, std::move(v)});
    }
    return out;
}

std::string small_calibration_text(double dicl_mm, double mpvc_mm)
{
    Writer w;
    w.fixed("R", 40, 120, "reservoir");
    std::string prev = "R";
    for (int k = 1; k <= 10; ++k) {
        const std::string t = id("T", k);
        w.junction(t, 40 + k % 3, k == 10);
        w.pipe(prev, t, 400, k <= 5 ? 600 : 450, "DICL", dicl_mm);
        prev = t;
    }
    for (int k : {3, 6, 9}) {
        std::string up = id("T", k);
        for (int j = 1; j <= 3; ++j) {
            const std::string b = id("B", k, j);
            w.junction(b, 42, j == 3, j == 3);
            w.pipe(up, b, 300, 250, "mPVC", mpvc_mm);
            up = b;
        }
    }
    w.junction("E", 43, true, true);
    w.pipe("T10", "E", 500, 250, "mPVC", mpvc_mm);
    return w.str();
}

}  // namespace pipenet::fixtures
