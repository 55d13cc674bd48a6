#include "pipenet/setpoint.h"

#include "pipenet/io.h"
#include "pipenet/units.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pipenet {

OutletLossModel OutletLossModel::for_class(std::string_view diameter_class)
{
    OutletLossModel m;
    if (diameter_class == "DN150") {
        return m;
    }
    double dn = 0.0;
    if (diameter_class.size() > 2 && diameter_class.substr(0, 2) == "DN") {
        const auto digits = diameter_class.substr(2);
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dn);
        if (ec != std::errc() || ptr != digits.data() + digits.size()) {
            dn = 0.0;
        }
    }
    if (!(dn > 0.0)) {
        throw std::invalid_argument("outlet class '" + std::string(diameter_class) +
                                    "' has no DN size; give coefficients in [OUTLETS]");
    }
    const double s = std::pow(150.0 / dn, 4);
    m.a0 *= s;
    m.a1 *= s;
    m.a2 *= s;
    m.diameter_class = std::string(diameter_class);
    return m;
}

double outlet_headloss(const OutletLossModel& model, double q_lps, bool* extrapolated)
{
    if (q_lps < 0.0 || std::isnan(q_lps)) {
        throw std::invalid_argument("outlet_headloss: flow must be non-negative");
    }
    if (extrapolated) {
        *extrapolated = q_lps > model.q_max_lps;
    }
    return (model.a2 * q_lps + model.a1) * q_lps + model.a0;
}

DownstreamPressure downstream_pressure(double upstream_head, double q_lps, const OutletLossModel& model)
{
    const double head = upstream_head - outlet_headloss(model, q_lps);
    return {head, head < 0.0};
}

std::vector<Outlet> network_outlets(const Network& net)
{
    std::vector<Outlet> out;
    for (std::size_t n = 0; n < net.node_count(); ++n) {
        const Node& node = net.nodes()[n];
        if (!node.is_outlet) {
            continue;
        }
        Outlet o{node.id, n, net.junction_column(n), {}};
        const std::string cls = node.outlet_class.value_or("DN150");
        const auto it = net.outlet_coefficients().find(node.id);
        if (it != net.outlet_coefficients().end()) {
            o.model.a0 = it->second.a0;
            o.model.a1 = it->second.a1;
            o.model.a2 = it->second.a2;
            if (it->second.q_max_lps) {
                o.model.q_max_lps = *it->second.q_max_lps;
            }
            o.model.diameter_class = cls;
        } else {
            o.model = OutletLossModel::for_class(cls);
        }
        out.push_back(std::move(o));
    }
    std::sort(out.begin(), out.end(), [](const Outlet& a, const Outlet& b) { return a.id < b.id; });
    return out;
}

std::optional<CriticalOutlet> critical_pressure(const Network& net, const std::vector<Outlet>& outlets,
                                                const HydraulicState& state, std::span<const double> demands)
{
    std::optional<CriticalOutlet> best;
    for (const Outlet& o : outlets) {
        const double d = demands[o.junction];
        if (!(d > 0.0)) {
            continue;
        }
        const double p = state.heads[o.junction] - net.nodes()[o.node].elevation;
        const double pd = downstream_pressure(p, units::m3s_to_lps(d), o.model).head;
        // Outlets are in id order, so strict < keeps the smaller id on ties.
        if (!best || pd < best->downstream_head) {
            best = CriticalOutlet{o.id, pd};
        }
    }
    return best;
}

SetpointCurve::SetpointCurve(std::vector<std::pair<double, double>> points) : points_(std::move(points))
{
    if (points_.empty()) {
        throw std::invalid_argument("setpoint curve: no points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i].first) || !std::isfinite(points_[i].second)) {
            throw std::invalid_argument("setpoint curve: values must be finite");
        }
        if (i > 0 && (points_[i].first <= points_[i - 1].first || points_[i].second < points_[i - 1].second)) {
            throw std::invalid_argument("setpoint curve: flows must increase and setpoints must not decrease");
        }
    }
}

SetpointCurve SetpointCurve::linear_default()
{
    return SetpointCurve({{0.0, 81.9}, {3500.0, 102.3}});
}

double SetpointCurve::at(double flow_lps) const
{
    if (flow_lps <= points_.front().first) {
        return points_.front().second;
    }
    if (flow_lps >= points_.back().first) {
        return points_.back().second;
    }
    const auto hi = std::upper_bound(points_.begin(), points_.end(), flow_lps,
                                     [](double q, const auto& p) { return q < p.first; });
    const auto lo = hi - 1;
    if (flow_lps == lo->first) {
        return lo->second;
    }
    const double w = (flow_lps - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

SetpointCurve parse_curve(std::string_view text)
{
    std::vector<std::pair<double, double>> points;
    std::istringstream in{std::string(text)};
    std::size_t line_no = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const auto f = split_whitespace(trim(line));
        if (f.empty()) {
            continue;
        }
        std::pair<double, double> p;
        if (f.size() != 2 || !parse_double(f[0], p.first) || !parse_double(f[1], p.second)) {
            throw std::invalid_argument("setpoint curve line " + std::to_string(line_no) +
                                        ": expected 'flow_lps setpoint_m'");
        }
        points.push_back(p);
    }
    return SetpointCurve(std::move(points));
}

std::vector<double> baseline_setpoints(const SetpointCurve& curve, std::span<const double> system_flow_lps)
{
    std::vector<double> out;
    out.reserve(system_flow_lps.size());
    for (double q : system_flow_lps) {
        out.push_back(curve.at(q));
    }
    return out;
}

std::vector<double> system_flow(const Network& net, const TimeTable& demands)
{
    const Schedule d = demand_schedule(net, demands);
    std::vector<double> out(d.steps(), 0.0);
    for (std::size_t t = 0; t < d.steps(); ++t) {
        for (double v : d.row(t)) {
            out[t] += units::m3s_to_lps(v);
        }
    }
    return out;
}

void SetpointConfig::validate() const
{
    if (!(min_setpoint <= max_setpoint) || !std::isfinite(min_setpoint) || !std::isfinite(max_setpoint)) {
        throw std::invalid_argument("setpoint bounds must satisfy min <= max");
    }
    if (!(relaxation > 0.0 && relaxation <= 1.0)) {
        throw std::invalid_argument("setpoint relaxation must be in (0, 1]");
    }
    if (!std::isfinite(service_head)) {
        throw std::invalid_argument("service head must be finite");
    }
}

std::size_t SetpointRun::infeasible_steps() const
{
    return static_cast<std::size_t>(
        std::count_if(steps.begin(), steps.end(), [](const SetpointStep& s) { return s.infeasible; }));
}

double SetpointRun::average_setpoint() const
{
    if (steps.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const SetpointStep& s : steps) {
        sum += s.setpoint;
    }
    return sum / static_cast<double>(steps.size());
}

std::vector<double> SetpointRun::setpoints() const
{
    std::vector<double> out;
    for (const SetpointStep& s : steps) {
        out.push_back(s.setpoint);
    }
    return out;
}

std::vector<double> SetpointRun::min_downstream() const
{
    std::vector<double> out;
    for (const SetpointStep& s : steps) {
        out.push_back(s.min_downstream);
    }
    return out;
}

namespace {

// Shared loop. With `fixed` the setpoint trace is given; otherwise it
// follows the correction rule from r0.
SetpointRun run_setpoints(const Network& net, const TimeTable& demands, std::span<const double> fixed,
                          double r0, const SetpointConfig& cfg)
{
    cfg.validate();
    if (!demands.step()) {
        throw std::invalid_argument("setpoint run: demand table must be on a uniform grid");
    }
    const Schedule d = demand_schedule(net, demands);
    const auto outlets = network_outlets(net);
    const auto stations = station_columns(net);

    SetpointRun run;
    run.step = *demands.step();
    for (std::size_t c : stations) {
        const Node& node = net.nodes()[net.fixed_nodes()[c]];
        run.stations.push_back(node.id);
        run.station_elevation.push_back(node.elevation);
    }

    HydraulicSolver solver(net, cfg.solver);
    std::vector<double> boundary = net.default_boundary_heads();
    HydraulicState prev;
    double r = r0;
    for (std::size_t t = 0; t < d.steps(); ++t) {
        if (!fixed.empty()) {
            r = fixed[t];
        }
        for (std::size_t k = 0; k < stations.size(); ++k) {
            boundary[stations[k]] = run.station_elevation[k] + r;
        }
        HydraulicState state;
        try {
            state = solver.solve(d.row(t), boundary, {}, t == 0 ? nullptr : &prev);
        } catch (const SolverError& e) {
            throw e.at_step(t);
        }

        SetpointStep step;
        step.time = demands.times()[t];
        step.setpoint = r;
        const auto crit = critical_pressure(net, outlets, state, d.row(t));
        step.min_downstream = crit ? crit->downstream_head : std::numeric_limits<double>::quiet_NaN();
        if (crit) {
            step.critical_outlet = crit->id;
        }
        const auto out = source_outflows(net, state);
        for (std::size_t c : stations) {
            step.station_flow.push_back(out[c]);
            step.system_flow += units::m3s_to_lps(out[c]);
        }
        step.infeasible = crit && r >= cfg.max_setpoint && crit->downstream_head < cfg.service_head;
        run.steps.push_back(std::move(step));

        if (fixed.empty() && crit) {
            r = std::clamp(r + cfg.relaxation * (cfg.service_head - crit->downstream_head), cfg.min_setpoint,
                           cfg.max_setpoint);
        }
        prev = std::move(state);
    }
    return run;
}

}  // namespace

SetpointRun select_setpoints(const Network& net, const TimeTable& demands, double r0, const SetpointConfig& cfg)
{
    if (!(r0 >= cfg.min_setpoint && r0 <= cfg.max_setpoint)) {
        throw std::invalid_argument("select_setpoints: initial setpoint outside its bounds");
    }
    return run_setpoints(net, demands, {}, r0, cfg);
}

SetpointRun evaluate_setpoints(const Network& net, const TimeTable& demands, std::span<const double> setpoints,
                               const SetpointConfig& cfg)
{
    if (setpoints.size() != demands.size()) {
        throw std::invalid_argument("evaluate_setpoints: setpoint trace and demand table differ in length");
    }
    if (setpoints.empty()) {
        return run_setpoints(net, demands, {}, 0.0, cfg);
    }
    return run_setpoints(net, demands, setpoints, 0.0, cfg);
}

}  // namespace pipenet
