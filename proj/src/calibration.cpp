#include "pipenet/calibration.h"

#include "pipenet/io.h"
#include "pipenet/units.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pipenet {

// ---------------------------------------------------------------------------
// Roughness groups

RoughnessGroups::RoughnessGroups(std::vector<RoughnessGroup> groups) : groups_(std::move(groups))
{
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        const RoughnessGroup& g = groups_[i];
        if (!(g.min_mm > 0.0) || !(g.max_mm >= g.min_mm) || !std::isfinite(g.max_mm)) {
            throw std::invalid_argument("roughness group '" + g.material + "': bounds must satisfy 0 < min <= max");
        }
        if (!(g.roughness_mm >= g.min_mm && g.roughness_mm <= g.max_mm)) {
            throw std::invalid_argument("roughness group '" + g.material + "': value outside its bounds");
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (groups_[k].material == g.material) {
                throw std::invalid_argument("roughness group '" + g.material + "' listed twice");
            }
        }
    }
}

RoughnessGroups RoughnessGroups::from_network(const Network& net, double min_mm, double max_mm)
{
    std::vector<RoughnessGroup> groups;
    for (const std::string& m : net.materials()) {
        for (const Pipe& p : net.pipes()) {
            if (p.material.name() == m) {
                groups.push_back({m, std::clamp(p.roughness_mm, min_mm, max_mm), min_mm, max_mm});
                break;
            }
        }
    }
    return RoughnessGroups(std::move(groups));
}

std::optional<std::size_t> RoughnessGroups::find(std::string_view material) const
{
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        if (groups_[i].material == material) {
            return i;
        }
    }
    return std::nullopt;
}

double RoughnessGroups::roughness(std::string_view material) const
{
    const auto i = find(material);
    if (!i) {
        throw std::out_of_range("no roughness group for material '" + std::string(material) + "'");
    }
    return groups_[*i].roughness_mm;
}

void RoughnessGroups::set_roughness(std::size_t group, double roughness_mm)
{
    RoughnessGroup& g = groups_.at(group);
    g.roughness_mm = std::clamp(roughness_mm, g.min_mm, g.max_mm);
}

std::vector<double> RoughnessGroups::per_pipe(const Network& net) const
{
    std::vector<double> out;
    out.reserve(net.pipe_count());
    for (const Pipe& p : net.pipes()) {
        const auto i = find(p.material.name());
        if (!i) {
            throw std::invalid_argument("no roughness group for material '" + p.material.name() +
                                        "' (pipe '" + p.id + "')");
        }
        out.push_back(groups_[*i].roughness_mm);
    }
    return out;
}

RoughnessGroups parse_groups(std::string_view text)
{
    std::vector<RoughnessGroup> groups;
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
        const std::string where = "groups line " + std::to_string(line_no) + ": ";
        if (f.size() != 2 && f.size() != 4) {
            throw std::invalid_argument(where + "expected 'material roughness_mm [min max]'");
        }
        RoughnessGroup g;
        g.material = Material(f[0]).name();
        if (!parse_double(f[1], g.roughness_mm) ||
            (f.size() == 4 && (!parse_double(f[2], g.min_mm) || !parse_double(f[3], g.max_mm)))) {
            throw std::invalid_argument(where + "expected numbers");
        }
        groups.push_back(g);
    }
    try {
        return RoughnessGroups(std::move(groups));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("groups: ") + e.what());
    }
}

RoughnessGroups load_groups(const std::string& path)
{
    try {
        return parse_groups(read_text_file(path));
    } catch (const std::invalid_argument& e) {
        throw IoError(path, e.what());
    }
}

std::string write_groups(const RoughnessGroups& groups)
{
    std::ostringstream out;
    out << "# material roughness_mm min_mm max_mm\n";
    for (const RoughnessGroup& g : groups.groups()) {
        out << g.material << ' ' << format_number(g.roughness_mm) << ' ' << format_number(g.min_mm)
            << ' ' << format_number(g.max_mm) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Data and simulation

CalibrationData make_calibration_data(const Network& net, const TimeTable& demands,
                                      const TimeTable& observed, const std::vector<std::string>& sites,
                                      const std::optional<std::string>& station_column,
                                      const TimeTable* flows, const std::optional<std::string>& flow_column)
{
    if (demands.times() != observed.times()) {
        throw std::invalid_argument("demand and observation tables are on different time grids");
    }
    if (sites.empty()) {
        throw std::invalid_argument("no observation sites");
    }
    CalibrationData data;
    data.demands = demand_schedule(net, demands);
    const std::size_t steps = demands.size();
    if (station_column) {
        const Series& s = observed.column(*station_column);
        if (s.unit != Unit::Metres) {
            throw std::invalid_argument("station column '" + s.key + "' is not a pressure head");
        }
        for (std::size_t t = 0; t < steps; ++t) {
            if (std::isnan(s.values[t])) {
                throw std::invalid_argument("station column '" + s.key + "' is missing row " +
                                            std::to_string(t + 1));
            }
        }
        data.boundary = station_boundary(net, s.values);
    } else {
        data.boundary = constant_boundary(net, steps);
    }
    data.sites = sites;
    data.observed = Schedule(steps, sites.size());
    for (std::size_t j = 0; j < sites.size(); ++j) {
        if (!net.find_node(sites[j])) {
            throw std::invalid_argument("observation site '" + sites[j] + "' is not a network node");
        }
        const Series& s = observed.column(sites[j]);
        if (s.unit != Unit::Metres) {
            throw std::invalid_argument("observation column '" + s.key + "' is not a pressure head");
        }
        for (std::size_t t = 0; t < steps; ++t) {
            data.observed.at(t, j) = s.values[t];
        }
    }
    if (flows && flow_column) {
        if (flows->times() != demands.times()) {
            throw std::invalid_argument("flow table is on a different time grid");
        }
        const Series& s = flows->column(*flow_column);
        const double scale = s.unit == Unit::CubicMetresPerSecond ? 1000.0 : 1.0;
        if (s.unit == Unit::Metres) {
            throw std::invalid_argument("flow column '" + s.key + "' is not a flow");
        }
        for (double v : s.values) {
            data.observed_system_flow.push_back(v * scale);
        }
    }
    return data;
}

SimulatedSites simulate_sites(const Network& net, const CalibrationData& data,
                              std::span<const double> roughness_per_pipe, const SolverConfig& cfg,
                              kernels::Execution exec)
{
    const auto states = kernels::solve_steps(net, data.demands, data.boundary, roughness_per_pipe, cfg, exec);
    std::vector<std::size_t> nodes;
    for (const std::string& s : data.sites) {
        nodes.push_back(net.node_index(s));
    }
    SimulatedSites out{Schedule(states.size(), nodes.size()), std::vector<double>(states.size(), 0.0)};
    for (std::size_t t = 0; t < states.size(); ++t) {
        const auto bnd = data.boundary.row(t);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const std::size_t n = nodes[j];
            const std::size_t jc = net.junction_column(n);
            const double h = jc != Network::npos ? states[t].heads[jc] : bnd[net.fixed_column(n)];
            out.pressure.at(t, j) = h - net.nodes()[n].elevation;
        }
        for (double q : source_outflows(net, states[t])) {
            out.system_flow[t] += units::m3s_to_lps(q);
        }
    }
    return out;
}

double objective_value(const Schedule& observed, const Schedule& simulated)
{
    if (observed.steps() != simulated.steps() || observed.width() != simulated.width()) {
        throw std::invalid_argument("objective: observed and simulated shapes differ");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < observed.width(); ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < observed.steps(); ++t) {
            const double o = observed.at(t, j);
            if (std::isnan(o)) {
                continue;
            }
            const double e = o - simulated.at(t, j);
            sum += e * e;
            ++count;
        }
        if (count > 0) {
            total += sum / static_cast<double>(count);
        }
    }
    return total;
}

double objective(const Network& net, const CalibrationData& data, const RoughnessGroups& groups,
                 const SolverConfig& cfg, kernels::Execution exec)
{
    return objective_value(data.observed, simulate_sites(net, data, groups.per_pipe(net), cfg, exec).pressure);
}

FitMetrics fit_metrics(std::string site, std::span<const double> observed, std::span<const double> simulated)
{
    if (observed.size() != simulated.size()) {
        throw std::invalid_argument("fit_metrics: series lengths differ for '" + site + "'");
    }
    FitMetrics m;
    m.site = std::move(site);
    double se = 0.0;
    double ae = 0.0;
    for (std::size_t t = 0; t < observed.size(); ++t) {
        if (std::isnan(observed[t]) || std::isnan(simulated[t])) {
            continue;
        }
        const double e = observed[t] - simulated[t];
        m.avg_observed += observed[t];
        m.avg_simulated += simulated[t];
        se += e * e;
        ae += std::abs(e);
        ++m.samples;
    }
    if (m.samples == 0) {
        return m;
    }
    const auto n = static_cast<double>(m.samples);
    m.avg_observed /= n;
    m.avg_simulated /= n;
    m.rmse = std::sqrt(se / n);
    m.mae = ae / n;
    m.pct_diff = m.avg_observed != 0.0 ? (m.avg_observed - m.avg_simulated) / m.avg_observed * 100.0 : 0.0;
    return m;
}

std::vector<FitMetrics> fit_metrics(const std::vector<std::string>& sites, const Schedule& observed,
                                    const Schedule& simulated)
{
    if (observed.steps() != simulated.steps() || observed.width() != simulated.width() ||
        observed.width() != sites.size()) {
        throw std::invalid_argument("fit_metrics: observed and simulated shapes differ");
    }
    std::vector<FitMetrics> out;
    std::vector<double> o(observed.steps());
    std::vector<double> s(observed.steps());
    for (std::size_t j = 0; j < sites.size(); ++j) {
        for (std::size_t t = 0; t < observed.steps(); ++t) {
            o[t] = observed.at(t, j);
            s[t] = simulated.at(t, j);
        }
        out.push_back(fit_metrics(sites[j], o, s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Optimiser

namespace {

class Problem {
public:
    Problem(const Network& net, const CalibrationData& data, const RoughnessGroups& proto,
            const CalibrationOptions& opts)
        : net_(net), data_(data), proto_(proto), opts_(opts)
    {
        for (const Pipe& p : net.pipes()) {
            const auto g = proto.find(p.material.name());
            if (!g) {
                throw std::invalid_argument("no roughness group for material '" + p.material.name() + "'");
            }
            pipe_group_.push_back(*g);
        }
        for (std::size_t j = 0; j < data.sites.size(); ++j) {
            std::size_t count = 0;
            for (std::size_t t = 0; t < data.observed.steps(); ++t) {
                count += !std::isnan(data.observed.at(t, j));
            }
            weights_.push_back(count > 0 ? 1.0 / std::sqrt(static_cast<double>(count)) : 0.0);
        }
    }

    std::size_t groups() const { return proto_.size(); }

    // Simulated pressures flattened over observed entries; nullopt when a
    // snapshot fails.
    std::optional<Eigen::VectorXd> simulate(const std::vector<double>& eps)
    {
        std::vector<double> per_pipe(pipe_group_.size());
        for (std::size_t i = 0; i < per_pipe.size(); ++i) {
            per_pipe[i] = eps[pipe_group_[i]];
        }
        ++evaluations;
        try {
            const Schedule sim = simulate_sites(net_, data_, per_pipe, opts_.solver, opts_.execution).pressure;
            Eigen::VectorXd out(static_cast<Eigen::Index>(entries()));
            Eigen::Index k = 0;
            for (std::size_t t = 0; t < sim.steps(); ++t) {
                for (std::size_t j = 0; j < sim.width(); ++j) {
                    if (!std::isnan(data_.observed.at(t, j))) {
                        out[k++] = sim.at(t, j);
                    }
                }
            }
            return out;
        } catch (const SolverError&) {
            ++failed;
            return std::nullopt;
        }
    }

    // Weighted residuals w_j (obs - sim); F = |r|^2.
    Eigen::VectorXd residuals(const Eigen::VectorXd& sim) const
    {
        Eigen::VectorXd r(sim.size());
        Eigen::Index k = 0;
        for (std::size_t t = 0; t < data_.observed.steps(); ++t) {
            for (std::size_t j = 0; j < data_.observed.width(); ++j) {
                const double o = data_.observed.at(t, j);
                if (!std::isnan(o)) {
                    r[k] = weights_[j] * (o - sim[k]);
                    ++k;
                }
            }
        }
        return r;
    }

    // d r / d eps by central differences, one column per group.
    std::optional<Eigen::MatrixXd> jacobian(const std::vector<double>& eps)
    {
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(entries()), static_cast<Eigen::Index>(groups()));
        for (std::size_t g = 0; g < groups(); ++g) {
            const double h = opts_.fd_step * eps[g];
            std::vector<double> up = eps;
            std::vector<double> down = eps;
            up[g] += h;
            down[g] -= h;
            const auto su = simulate(up);
            const auto sd = simulate(down);
            if (!su || !sd) {
                return std::nullopt;
            }
            jac.col(static_cast<Eigen::Index>(g)) = residuals(*su) - residuals(*sd);
            jac.col(static_cast<Eigen::Index>(g)) /= 2.0 * h;
        }
        return jac;
    }

    std::size_t entries() const
    {
        std::size_t n = 0;
        for (std::size_t t = 0; t < data_.observed.steps(); ++t) {
            for (std::size_t j = 0; j < data_.observed.width(); ++j) {
                n += !std::isnan(data_.observed.at(t, j));
            }
        }
        return n;
    }

    int evaluations = 0;
    int failed = 0;

private:
    const Network& net_;
    const CalibrationData& data_;
    const RoughnessGroups& proto_;
    const CalibrationOptions& opts_;
    std::vector<std::size_t> pipe_group_;
    std::vector<double> weights_;
};

// Minimises |J d + r|^2 + mu |D d|^2 subject to lo <= x + d <= hi by
// repeatedly pinning violated variables at their bound.
Eigen::VectorXd bounded_step(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& lo, const Eigen::VectorXd& hi)
{
    const Eigen::Index n = x.size();
    std::vector<int> pinned(static_cast<std::size_t>(n), 0);  // -1 lower, +1 upper
    for (Eigen::Index i = 0; i < n; ++i) {
        if (x[i] <= lo[i] && b[i] < 0.0) {
            pinned[static_cast<std::size_t>(i)] = -1;
        } else if (x[i] >= hi[i] && b[i] > 0.0) {
            pinned[static_cast<std::size_t>(i)] = 1;
        }
    }
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (Eigen::Index round = 0; round <= n; ++round) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int p = pinned[static_cast<std::size_t>(i)];
            d[i] = p < 0 ? lo[i] - x[i] : (p > 0 ? hi[i] - x[i] : 0.0);
            if (p == 0) {
                free.push_back(i);
            }
        }
        if (free.empty()) {
            return d;
        }
        const auto m = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd af(m, m);
        Eigen::VectorXd bf(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            bf[r] = b[free[static_cast<std::size_t>(r)]] - a.row(free[static_cast<std::size_t>(r)]).dot(d);
            for (Eigen::Index c = 0; c < m; ++c) {
                af(r, c) = a(free[static_cast<std::size_t>(r)], free[static_cast<std::size_t>(c)]);
            }
        }
        const Eigen::VectorXd df = af.ldlt().solve(bf);
        bool violated = false;
        for (Eigen::Index r = 0; r < m; ++r) {
            const Eigen::Index i = free[static_cast<std::size_t>(r)];
            d[i] = df[r];
            if (x[i] + d[i] < lo[i]) {
                pinned[static_cast<std::size_t>(i)] = -1;
                violated = true;
            } else if (x[i] + d[i] > hi[i]) {
                pinned[static_cast<std::size_t>(i)] = 1;
                violated = true;
            }
        }
        if (!violated) {
            return d;
        }
    }
    return (x + d).cwiseMax(lo).cwiseMin(hi) - x;
}

struct RunOutcome {
    std::vector<double> eps;
    double objective = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::string message;
};

RunOutcome levenberg_marquardt(Problem& problem, const RoughnessGroups& proto, std::vector<double> eps,
                               const CalibrationOptions& opts)
{
    const auto n = static_cast<Eigen::Index>(proto.size());
    Eigen::VectorXd lo(n);
    Eigen::VectorXd hi(n);
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const RoughnessGroup& g = proto.groups()[static_cast<std::size_t>(i)];
        lo[i] = std::log(g.min_mm);
        hi[i] = std::log(g.max_mm);
        x[i] = std::clamp(std::log(eps[static_cast<std::size_t>(i)]), lo[i], hi[i]);
    }
    const auto to_eps = [&](const Eigen::VectorXd& v) {
        std::vector<double> e(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            e[static_cast<std::size_t>(i)] = std::exp(v[i]);
        }
        return e;
    };

    RunOutcome out;
    out.eps = to_eps(x);
    auto sim = problem.simulate(out.eps);
    if (!sim) {
        out.message = "hydraulic solve failed at the starting point";
        return out;
    }
    Eigen::VectorXd r = problem.residuals(*sim);
    out.objective = r.squaredNorm();

    double mu = 1e-3;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        out.iterations = it;
        if (out.objective <= opts.absolute_tolerance) {
            out.converged = true;
            out.message = "exact fit";
            return out;
        }
        const auto jac_eps = problem.jacobian(out.eps);
        if (!jac_eps) {
            out.message = "hydraulic solve failed while differencing";
            return out;
        }
        // Chain rule to log roughness.
        Eigen::MatrixXd jac = *jac_eps;
        for (Eigen::Index i = 0; i < n; ++i) {
            jac.col(i) *= out.eps[static_cast<std::size_t>(i)];
        }
        const Eigen::MatrixXd a = jac.transpose() * jac;
        const Eigen::VectorXd b = -jac.transpose() * r;

        double projected = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool blocked = (x[i] <= lo[i] && b[i] < 0.0) || (x[i] >= hi[i] && b[i] > 0.0);
            if (!blocked) {
                projected = std::max(projected, std::abs(b[i]));
            }
        }
        if (projected <= opts.gradient_tolerance * std::max(1.0, out.objective)) {
            out.converged = true;
            out.message = "projected gradient below tolerance";
            return out;
        }

        bool accepted = false;
        double improvement = 0.0;
        double step_size = 0.0;
        for (int attempt = 0; attempt < opts.patience; ++attempt) {
            Eigen::MatrixXd damped = a;
            for (Eigen::Index i = 0; i < n; ++i) {
                damped(i, i) += mu * std::max(a(i, i), 1e-12);
            }
            const Eigen::VectorXd d = bounded_step(damped, b, x, lo, hi);
            const Eigen::VectorXd x_new = (x + d).cwiseMax(lo).cwiseMin(hi);
            const std::vector<double> eps_new = to_eps(x_new);
            const auto sim_new = problem.simulate(eps_new);
            if (sim_new) {
                const Eigen::VectorXd r_new = problem.residuals(*sim_new);
                const double f_new = r_new.squaredNorm();
                if (f_new < out.objective) {
                    improvement = (out.objective - f_new) / out.objective;
                    step_size = (x_new - x).cwiseAbs().maxCoeff();
                    x = x_new;
                    r = r_new;
                    out.eps = eps_new;
                    out.objective = f_new;
                    mu = std::max(mu / 3.0, 1e-12);
                    accepted = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        if (!accepted) {
            out.message = "no improving step within the patience window";
            return out;
        }
        if (improvement < opts.relative_tolerance || step_size < 1e-9) {
            out.converged = true;
            out.message = "relative improvement below tolerance";
            return out;
        }
    }
    out.message = "iteration limit reached";
    return out;
}

}  // namespace

std::vector<double> objective_gradient(const Network& net, const CalibrationData& data,
                                       const RoughnessGroups& groups, const CalibrationOptions& opts)
{
    Problem problem(net, data, groups, opts);
    std::vector<double> eps;
    for (const RoughnessGroup& g : groups.groups()) {
        eps.push_back(g.roughness_mm);
    }
    const auto sim = problem.simulate(eps);
    const auto jac = problem.jacobian(eps);
    if (!sim || !jac) {
        throw SolverError(SolverError::Kind::NonConvergence, "objective_gradient: hydraulic solve failed", 0, 0.0);
    }
    const Eigen::VectorXd g = 2.0 * jac->transpose() * problem.residuals(*sim);
    return {g.data(), g.data() + g.size()};
}

CalibrationResult calibrate(const Network& net, const CalibrationData& data, const RoughnessGroups& init,
                            const CalibrationOptions& opts)
{
    Problem problem(net, data, init, opts);
    CalibrationResult result;
    if (data.sites.size() < 2) {
        result.warnings.push_back("only one observation site; roughness groups may be poorly determined");
    }

    std::vector<double> start;
    for (const RoughnessGroup& g : init.groups()) {
        start.push_back(g.roughness_mm);
    }
    std::vector<std::vector<double>> starts{start};
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < opts.multistart; ++k) {
        std::vector<double> s;
        for (const RoughnessGroup& g : init.groups()) {
            const double lo = std::log(g.min_mm);
            const double hi = std::log(g.max_mm);
            s.push_back(std::exp(lo + unit(rng) * (hi - lo)));
        }
        starts.push_back(std::move(s));
    }

    try {
        result.initial_objective = objective(net, data, init, opts.solver, opts.execution);
    } catch (const SolverError&) {
        result.initial_objective = std::numeric_limits<double>::infinity();
    }

    RunOutcome best;
    for (const auto& s : starts) {
        RunOutcome run = levenberg_marquardt(problem, init, s, opts);
        result.iterations += run.iterations;
        if (run.objective < best.objective) {
            best = std::move(run);
        }
    }
    result.evaluations = problem.evaluations;
    result.failed_evaluations = problem.failed;
    if (!std::isfinite(best.objective)) {
        throw SolverError(SolverError::Kind::NonConvergence,
                          "calibration: hydraulic solve failed at every starting point", 0, 0.0);
    }

    result.groups = init;
    for (std::size_t g = 0; g < best.eps.size(); ++g) {
        result.groups.set_roughness(g, best.eps[g]);
    }
    result.converged = best.converged;
    result.message = best.message;

    const ValidationResult v = validate(net, data, result.groups, opts.solver, opts.execution);
    result.objective = v.objective;
    result.sum_rmse = v.sum_rmse;
    result.sites = v.sites;
    result.system_flow = v.system_flow;
    return result;
}

ValidationResult validate(const Network& net, const CalibrationData& data, const RoughnessGroups& groups,
                          const SolverConfig& cfg, kernels::Execution exec)
{
    ValidationResult v;
    v.simulated = simulate_sites(net, data, groups.per_pipe(net), cfg, exec);
    v.objective = objective_value(data.observed, v.simulated.pressure);
    v.sites = fit_metrics(data.sites, data.observed, v.simulated.pressure);
    for (const FitMetrics& m : v.sites) {
        v.sum_rmse += m.rmse;
    }
    if (!data.observed_system_flow.empty()) {
        v.system_flow = fit_metrics("system_flow", data.observed_system_flow, v.simulated.system_flow);
    }
    return v;
}

}  // namespace pipenet
