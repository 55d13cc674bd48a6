#include "pipenet/hydraulics.h"

#include "pipenet/timetable.h"
#include "pipenet/units.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pipenet {

void SolverConfig::validate() const
{
    if (max_iterations <= 0 || !(flow_tolerance > 0.0) || !(head_tolerance > 0.0) ||
        !(viscosity > 0.0) || !(gravity > 0.0) || !(laminar_reynolds > 0.0) ||
        !(turbulent_reynolds >= laminar_reynolds) || !(min_flow > 0.0)) {
        throw std::invalid_argument("SolverConfig: all settings must be positive");
    }
}

double reynolds(double flow, double diameter, double viscosity)
{
    return 4.0 * std::abs(flow) / (std::numbers::pi * diameter * viscosity);
}

double friction_factor(double roughness_mm, double diameter, double re)
{
    const double rel = units::mm_to_m(roughness_mm) / (3.7 * diameter);
    const double lg = std::log10(rel + 5.74 / std::pow(re, 0.9));
    return 0.25 / (lg * lg);
}

double darcy_friction(double roughness_mm, double diameter, double re, const SolverConfig& cfg)
{
    if (re < cfg.laminar_reynolds) {
        return 64.0 / re;
    }
    if (re >= cfg.turbulent_reynolds) {
        return friction_factor(roughness_mm, diameter, re);
    }
    const double f_lam = 64.0 / cfg.laminar_reynolds;
    const double f_turb = friction_factor(roughness_mm, diameter, cfg.turbulent_reynolds);
    const double w = (re - cfg.laminar_reynolds) / (cfg.turbulent_reynolds - cfg.laminar_reynolds);
    return f_lam + w * (f_turb - f_lam);
}

double resistance_from_friction(double f, double length, double diameter, double gravity)
{
    const double area = units::circle_area(diameter);
    return f * length / (2.0 * gravity * diameter * area * area);
}

double resistance(const Pipe& pipe, double roughness_mm, double flow, const SolverConfig& cfg)
{
    const double q = std::max(std::abs(flow), cfg.min_flow);
    const double re = reynolds(q, pipe.diameter, cfg.viscosity);
    const double f = darcy_friction(roughness_mm, pipe.diameter, re, cfg);
    return resistance_from_friction(f, pipe.length, pipe.diameter, cfg.gravity);
}

double resistance(const Pipe& pipe, double flow, const SolverConfig& cfg)
{
    return resistance(pipe, pipe.roughness_mm, flow, cfg);
}

double head_loss(const Pipe& pipe, double roughness_mm, double flow, const SolverConfig& cfg)
{
    const double q = std::max(std::abs(flow), cfg.min_flow);
    return resistance(pipe, roughness_mm, flow, cfg) * q * flow;
}

namespace {

// Re * (df/dRe) / f for the regime-aware friction factor.
double friction_elasticity(double roughness_mm, double diameter, double re, const SolverConfig& cfg)
{
    if (re < cfg.laminar_reynolds) {
        return -1.0;
    }
    if (re >= cfg.turbulent_reynolds) {
        const double a = units::mm_to_m(roughness_mm) / (3.7 * diameter);
        const double b = 5.74 * std::pow(re, -0.9);
        const double lg = std::log10(a + b);
        return 1.8 * b / (std::numbers::ln10 * lg * (a + b));
    }
    const double f_lam = 64.0 / cfg.laminar_reynolds;
    const double f_turb = friction_factor(roughness_mm, diameter, cfg.turbulent_reynolds);
    const double slope = (f_turb - f_lam) / (cfg.turbulent_reynolds - cfg.laminar_reynolds);
    return re * slope / darcy_friction(roughness_mm, diameter, re, cfg);
}

}  // namespace

double head_loss_slope(const Pipe& pipe, double roughness_mm, double flow, const SolverConfig& cfg)
{
    const double q = std::max(std::abs(flow), cfg.min_flow);
    const double g_diag = resistance(pipe, roughness_mm, flow, cfg) * q;
    if (std::abs(flow) < cfg.min_flow) {
        return g_diag;  // linear below the floor
    }
    const double re = reynolds(q, pipe.diameter, cfg.viscosity);
    return g_diag * (2.0 + friction_elasticity(roughness_mm, pipe.diameter, re, cfg));
}

SolverError::SolverError(Kind kind, const std::string& message, int iterations, double residual,
                         std::optional<std::size_t> step)
    : std::runtime_error(step ? "step " + std::to_string(*step) + ": " + message : message),
      kind_(kind),
      iterations_(iterations),
      residual_(residual),
      step_(step)
{
}

SolverError SolverError::at_step(std::size_t step) const
{
    std::string msg = what();
    if (step_) {
        msg = msg.substr(msg.find(": ") + 2);
    }
    return SolverError(kind_, msg, iterations_, residual_, step);
}

HydraulicSolver::HydraulicSolver(const Network& net, SolverConfig cfg) : net_(net), cfg_(cfg)
{
    cfg_.validate();
    const auto n = static_cast<int>(net_.junction_count());

    std::vector<Eigen::Triplet<double>> pattern;
    for (int j = 0; j < n; ++j) {
        pattern.emplace_back(j, j, 1.0);
    }
    for (const Pipe& p : net_.pipes()) {
        const std::size_t a = net_.junction_column(p.from);
        const std::size_t b = net_.junction_column(p.to);
        if (a != Network::npos && b != Network::npos) {
            pattern.emplace_back(static_cast<int>(a), static_cast<int>(b), 1.0);
            pattern.emplace_back(static_cast<int>(b), static_cast<int>(a), 1.0);
        }
    }
    schur_.resize(n, n);
    schur_.setFromTriplets(pattern.begin(), pattern.end());
    schur_.makeCompressed();

    const auto slot = [&](std::size_t row, std::size_t col) -> std::ptrdiff_t {
        const int c = static_cast<int>(col);
        const int* inner = schur_.innerIndexPtr();
        const int begin = schur_.outerIndexPtr()[c];
        const int end = schur_.outerIndexPtr()[c + 1];
        const int* hit = std::lower_bound(inner + begin, inner + end, static_cast<int>(row));
        return hit - inner;
    };
    slots_.resize(net_.pipe_count());
    for (std::size_t i = 0; i < net_.pipe_count(); ++i) {
        const Pipe& p = net_.pipes()[i];
        const std::size_t a = net_.junction_column(p.from);
        const std::size_t b = net_.junction_column(p.to);
        if (a != Network::npos) {
            slots_[i].from_diag = slot(a, a);
        }
        if (b != Network::npos) {
            slots_[i].to_diag = slot(b, b);
        }
        if (a != Network::npos && b != Network::npos) {
            slots_[i].from_to = slot(a, b);
            slots_[i].to_from = slot(b, a);
        }
    }
    if (n > 0) {
        ldlt_.analyzePattern(schur_);
    }
}

HydraulicState HydraulicSolver::solve(std::span<const double> demands,
                                      std::span<const double> boundary_heads,
                                      std::span<const double> roughness_mm,
                                      const HydraulicState* warm_start)
{
    const std::size_t n_pipes = net_.pipe_count();
    const std::size_t n_junctions = net_.junction_count();
    if (demands.size() != n_junctions || boundary_heads.size() != net_.fixed_count()) {
        throw std::invalid_argument("HydraulicSolver::solve: input sizes do not match the network");
    }
    if (!roughness_mm.empty() && roughness_mm.size() != n_pipes) {
        throw std::invalid_argument("HydraulicSolver::solve: roughness must have one entry per pipe");
    }
    const auto eps = [&](std::size_t i) {
        return roughness_mm.empty() ? net_.pipes()[i].roughness_mm : roughness_mm[i];
    };

    HydraulicState state;
    if (warm_start && warm_start->flows.size() == n_pipes && warm_start->heads.size() == n_junctions) {
        state.flows = warm_start->flows;
        state.heads = warm_start->heads;
    } else {
        const double mean_head =
            boundary_heads.empty()
                ? 0.0
                : std::accumulate(boundary_heads.begin(), boundary_heads.end(), 0.0) /
                      static_cast<double>(boundary_heads.size());
        state.flows.assign(n_pipes, 0.001);
        state.heads.assign(n_junctions, mean_head);
    }

    // Head at either end of a pipe.
    const auto end_head = [&](std::size_t node, const std::vector<double>& h) {
        const std::size_t j = net_.junction_column(node);
        return j != Network::npos ? h[j] : boundary_heads[net_.fixed_column(node)];
    };

    std::vector<double> slope(n_pipes);   // d(head loss)/dq
    std::vector<double> energy(n_pipes);  // head-loss residual per pipe
    std::vector<double> mass(n_junctions);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n_junctions));

    const auto evaluate = [&](const HydraulicState& s) {
        std::fill(mass.begin(), mass.end(), 0.0);
        for (std::size_t j = 0; j < n_junctions; ++j) {
            mass[j] = -demands[j];
        }
        Residuals res;
        for (std::size_t i = 0; i < n_pipes; ++i) {
            const Pipe& p = net_.pipes()[i];
            const double q = s.flows[i];
            slope[i] = head_loss_slope(p, eps(i), q, cfg_);
            energy[i] = head_loss(p, eps(i), q, cfg_) + end_head(p.to, s.heads) -
                        end_head(p.from, s.heads);
            res.head = std::max(res.head, std::abs(energy[i]));
            if (const std::size_t b = net_.junction_column(p.to); b != Network::npos) {
                mass[b] += q;
            }
            if (const std::size_t a = net_.junction_column(p.from); a != Network::npos) {
                mass[a] -= q;
            }
        }
        for (double m : mass) {
            res.flow = std::max(res.flow, std::abs(m));
        }
        return res;
    };

    Residuals res = evaluate(state);
    if (n_junctions == 0) {
        // Every pipe joins two fixed heads: flows follow from head loss alone.
        for (std::size_t i = 0; i < n_pipes; ++i) {
            for (int it = 0; it < cfg_.max_iterations && std::abs(energy[i]) > cfg_.head_tolerance;
                 ++it) {
                state.flows[i] -= energy[i] / slope[i];
                res = evaluate(state);
            }
        }
        state.head_residual = res.head;
        state.flow_residual = res.flow;
        state.iterations = 1;
        if (res.head > cfg_.head_tolerance) {
            throw SolverError(SolverError::Kind::NonConvergence, "no convergence", 1, res.head);
        }
        return state;
    }

    double* values = schur_.valuePtr();
    for (int it = 1; it <= cfg_.max_iterations; ++it) {
        std::fill(values, values + schur_.nonZeros(), 0.0);
        for (Eigen::Index j = 0; j < rhs.size(); ++j) {
            rhs[j] = mass[static_cast<std::size_t>(j)];
        }
        for (std::size_t i = 0; i < n_pipes; ++i) {
            const double w = 1.0 / slope[i];
            const double y = energy[i] * w;
            const PipeSlots& s = slots_[i];
            if (s.from_diag >= 0) {
                values[s.from_diag] += w;
                rhs[static_cast<Eigen::Index>(net_.junction_column(net_.pipes()[i].from))] += y;
            }
            if (s.to_diag >= 0) {
                values[s.to_diag] += w;
                rhs[static_cast<Eigen::Index>(net_.junction_column(net_.pipes()[i].to))] -= y;
            }
            if (s.from_to >= 0) {
                values[s.from_to] -= w;
                values[s.to_from] -= w;
            }
        }

        ldlt_.factorize(schur_);
        if (ldlt_.info() != Eigen::Success) {
            throw SolverError(SolverError::Kind::Singular,
                              "singular head system (degenerate or disconnected network)", it,
                              res.head);
        }
        const Eigen::VectorXd dh = ldlt_.solve(rhs);
        if (ldlt_.info() != Eigen::Success || !dh.allFinite()) {
            throw SolverError(SolverError::Kind::Singular, "head update failed", it, res.head);
        }

        double max_dh = 0.0;
        for (std::size_t j = 0; j < n_junctions; ++j) {
            const double d = dh[static_cast<Eigen::Index>(j)];
            state.heads[j] += d;
            max_dh = std::max(max_dh, std::abs(d));
        }
        double max_dq = 0.0;
        for (std::size_t i = 0; i < n_pipes; ++i) {
            const Pipe& p = net_.pipes()[i];
            const std::size_t a = net_.junction_column(p.from);
            const std::size_t b = net_.junction_column(p.to);
            const double ddh = (b != Network::npos ? dh[static_cast<Eigen::Index>(b)] : 0.0) -
                               (a != Network::npos ? dh[static_cast<Eigen::Index>(a)] : 0.0);
            const double dq = -(energy[i] + ddh) / slope[i];
            state.flows[i] += dq;
            max_dq = std::max(max_dq, std::abs(dq));
        }

        res = evaluate(state);
        if (!std::isfinite(res.head) || !std::isfinite(res.flow)) {
            throw SolverError(SolverError::Kind::NonConvergence, "iteration diverged", it, res.head);
        }
        state.iterations = it;
        state.head_residual = res.head;
        state.flow_residual = res.flow;
        if (max_dq <= cfg_.flow_tolerance && max_dh <= cfg_.head_tolerance &&
            res.head <= cfg_.head_tolerance && res.flow <= cfg_.flow_tolerance) {
            return state;
        }
    }
    throw SolverError(SolverError::Kind::NonConvergence,
                      "no convergence after " + std::to_string(cfg_.max_iterations) +
                          " iterations (head residual " + std::to_string(res.head) + " m)",
                      cfg_.max_iterations, res.head);
}

HydraulicState solve_snapshot(const Network& net, std::span<const double> demands,
                              std::span<const double> boundary_heads,
                              std::span<const double> roughness_mm, const SolverConfig& cfg)
{
    HydraulicSolver solver(net, cfg);
    return solver.solve(demands, boundary_heads, roughness_mm);
}

std::vector<double> node_heads(const Network& net, const HydraulicState& state,
                               std::span<const double> boundary_heads)
{
    std::vector<double> heads(net.node_count());
    for (std::size_t n = 0; n < net.node_count(); ++n) {
        const std::size_t j = net.junction_column(n);
        heads[n] = j != Network::npos ? state.heads[j] : boundary_heads[net.fixed_column(n)];
    }
    return heads;
}

std::vector<double> source_outflows(const Network& net, const HydraulicState& state)
{
    std::vector<double> out(net.fixed_count(), 0.0);
    for (std::size_t i = 0; i < net.pipe_count(); ++i) {
        const Pipe& p = net.pipes()[i];
        if (const std::size_t c = net.fixed_column(p.from); c != Network::npos) {
            out[c] += state.flows[i];
        }
        if (const std::size_t c = net.fixed_column(p.to); c != Network::npos) {
            out[c] -= state.flows[i];
        }
    }
    return out;
}

Residuals check_state(const Network& net, const HydraulicState& state,
                      std::span<const double> demands, std::span<const double> boundary_heads,
                      std::span<const double> roughness_mm, const SolverConfig& cfg)
{
    const auto heads = node_heads(net, state, boundary_heads);
    std::vector<double> mass(net.junction_count());
    for (std::size_t j = 0; j < mass.size(); ++j) {
        mass[j] = -demands[j];
    }
    Residuals res;
    for (std::size_t i = 0; i < net.pipe_count(); ++i) {
        const Pipe& p = net.pipes()[i];
        const double eps = roughness_mm.empty() ? p.roughness_mm : roughness_mm[i];
        const double drop = heads[p.from] - heads[p.to];
        res.head = std::max(res.head, std::abs(drop - head_loss(p, eps, state.flows[i], cfg)));
        if (const std::size_t b = net.junction_column(p.to); b != Network::npos) {
            mass[b] += state.flows[i];
        }
        if (const std::size_t a = net.junction_column(p.from); a != Network::npos) {
            mass[a] -= state.flows[i];
        }
    }
    for (double m : mass) {
        res.flow = std::max(res.flow, std::abs(m));
    }
    return res;
}

Schedule demand_schedule(const Network& net, const TimeTable& demands)
{
    Schedule out(demands.size(), net.junction_count());
    for (std::size_t j = 0; j < net.junction_count(); ++j) {
        const Node& node = net.nodes()[net.junctions()[j]];
        if (!node.demand_ref) {
            continue;
        }
        if (!demands.has(*node.demand_ref)) {
            throw std::invalid_argument("demand table has no column '" + *node.demand_ref +
                                        "' for node '" + node.id + "'");
        }
        const Series& s = demands.column(*node.demand_ref);
        double scale = 1.0;
        switch (s.unit) {
        case Unit::LitresPerSecond:
            scale = 1.0 / units::kLitresPerCubicMetre;
            break;
        case Unit::CubicMetresPerSecond:
            break;
        case Unit::Metres:
            throw std::invalid_argument("demand column '" + s.key + "' is not a flow");
        }
        for (std::size_t t = 0; t < demands.size(); ++t) {
            if (std::isnan(s.values[t])) {
                throw std::invalid_argument("demand column '" + s.key + "' has a missing value at row " +
                                            std::to_string(t + 1));
            }
            out.at(t, j) = s.values[t] * scale;
        }
    }
    return out;
}

Schedule constant_boundary(const Network& net, std::size_t steps)
{
    const auto heads = net.default_boundary_heads();
    Schedule out(steps, net.fixed_count());
    for (std::size_t t = 0; t < steps; ++t) {
        std::copy(heads.begin(), heads.end(), out.row(t).begin());
    }
    return out;
}

std::vector<std::size_t> station_columns(const Network& net)
{
    auto cols = net.pump_columns();
    if (cols.empty() && net.fixed_count() == 1) {
        cols.push_back(0);
    }
    if (cols.empty()) {
        throw std::invalid_argument("network has no pump station source");
    }
    return cols;
}

Schedule station_boundary(const Network& net, std::span<const double> station_pressure)
{
    Schedule out = constant_boundary(net, station_pressure.size());
    const auto cols = station_columns(net);
    for (std::size_t t = 0; t < station_pressure.size(); ++t) {
        for (std::size_t c : cols) {
            out.at(t, c) = net.nodes()[net.fixed_nodes()[c]].elevation + station_pressure[t];
        }
    }
    return out;
}

std::vector<HydraulicState> simulate_period(const Network& net, const Schedule& demands,
                                            const Schedule& boundary,
                                            std::span<const double> roughness_mm,
                                            const SolverConfig& cfg)
{
    if (demands.steps() != boundary.steps()) {
        throw std::invalid_argument("simulate_period: demand and boundary schedules differ in length");
    }
    HydraulicSolver solver(net, cfg);
    std::vector<HydraulicState> states;
    states.reserve(demands.steps());
    for (std::size_t t = 0; t < demands.steps(); ++t) {
        try {
            states.push_back(solver.solve(demands.row(t), boundary.row(t), roughness_mm,
                                          states.empty() ? nullptr : &states.back()));
        } catch (const SolverError& e) {
            throw e.at_step(t);
        }
    }
    return states;
}

}  // namespace pipenet
