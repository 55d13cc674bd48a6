#include "pipenet/cli.h"

#include "pipenet/calibration.h"
#include "pipenet/config.h"
#include "pipenet/energy.h"
#include "pipenet/hydraulics.h"
#include "pipenet/io.h"
#include "pipenet/report.h"
#include "pipenet/scada.h"
#include "pipenet/setpoint.h"
#include "pipenet/units.h"

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

namespace pipenet {

namespace {

// Bad or unreadable input; the message names the file.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Calibration that never produced a finite objective.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class F>
auto with_path(const std::string& path, F&& load)
{
    try {
        return load();
    } catch (const IoError&) {
        throw;
    } catch (const NetworkError& e) {
        throw DataError(path + ":" + std::to_string(e.line()) + ": " + e.what());
    } catch (const TimeTableError& e) {
        std::string where = path;
        if (e.row()) {
            where += ": row " + std::to_string(e.row());
        }
        if (e.column()) {
            where += ", column " + std::to_string(e.column());
        }
        throw DataError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    } catch (const std::out_of_range& e) {
        throw DataError(path + ": " + e.what());
    }
}

Network read_network(const std::string& path, std::ostream& err)
{
    std::vector<ParseWarning> warnings;
    Network net = with_path(path, [&] { return load_network(path, &warnings); });
    for (const ParseWarning& w : warnings) {
        err << "warning: " << path << ":" << w.line << ": " << w.message << '\n';
    }
    return net;
}

std::optional<Unit> unit_flag(const std::string& label)
{
    if (label.empty()) {
        return std::nullopt;
    }
    const auto u = parse_unit(label);
    if (!u) {
        throw CLI::ValidationError("unit", "unknown unit '" + label + "' (use L/s, m3/s or m)");
    }
    return u;
}

TimeTable read_table(const std::string& path, const std::string& unit = {})
{
    const auto u = unit_flag(unit);
    return with_path(path, [&] { return load_timetable(path, u); });
}

void emit(const std::string& path, const std::string& content, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << content;
    } else {
        write_text_file(path, content);
    }
}

std::string render(const Report& r, const std::string& format)
{
    return format == "table" ? render_table(r) : write_report(r);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        const auto t = trim(cur);
        if (!t.empty()) {
            out.emplace_back(t);
        }
    }
    return out;
}

struct Common {
    std::string config;
    std::vector<std::string> overrides;

    void attach(CLI::App* app)
    {
        app->add_option("--config", config, "INI configuration file");
        app->add_option("--set", overrides, "Override a config key, e.g. --set energy.efficiency=0.75")
            ->type_name("SECTION.KEY=VALUE");
    }

    Config load() const
    {
        return config.empty() ? parse_config("", overrides) : load_config(config, overrides);
    }
};

// ---- preprocess ---------------------------------------------------------

struct PreprocessArgs {
    Common common;
    std::string pressures, pressures_unit;
    std::string flow, flow_unit;
    std::string sensors, network;
    std::string out, report;
    std::optional<double> step;
    std::optional<std::string> method, reference, flow_column;
};

int run_preprocess(const PreprocessArgs& a, std::ostream& out, std::ostream& err)
{
    Config cfg = a.common.load();
    PreprocessConfig& p = cfg.preprocess;
    if (a.step) {
        p.step = *a.step;
    }
    if (a.method) {
        const auto m = parse_resample_method(*a.method);
        if (!m) {
            throw CLI::ValidationError("--method", "unknown resample method '" + *a.method + "'");
        }
        p.method = *m;
    }
    if (a.reference) {
        p.reference = *a.reference;
    }
    if (a.flow_column) {
        p.flow_column = *a.flow_column;
    }
    cfg.validate();

    const TimeTable pressures = read_table(a.pressures, a.pressures_unit.empty() ? "m" : a.pressures_unit);
    const TimeTable flow = read_table(a.flow, a.flow_unit);
    const auto sensors = with_path(a.sensors, [&] { return load_sensors(a.sensors); });
    std::vector<std::string> warnings;
    if (!a.network.empty()) {
        const Network net = read_network(a.network, err);
        const auto w = with_path(a.sensors, [&] { return check_sensors(net, sensors); });
        warnings.insert(warnings.end(), w.begin(), w.end());
    }

    // Static windows on the flow log, resampled if it is irregular.
    const TimeTable grid_flow =
        flow.step() ? flow : with_path(a.flow, [&] { return resample(flow, p.step, p.method); });
    const auto windows = with_path(a.flow, [&] {
        return detect_static_windows(grid_flow, p.flow_column, p.static_threshold, p.static_min_duration);
    });
    const OffsetReport offsets = with_path(
        a.pressures, [&] { return estimate_offsets(pressures, sensors, p.reference, windows, p.rules); });
    const TimeTable corrected = apply_corrections(pressures, offsets, &warnings);
    const TimeTable gridded =
        with_path(a.pressures, [&] { return fill_gaps(resample(corrected, p.step, p.method), p.max_gap); });
    emit(a.out, write_timetable(gridded), out);

    std::ostringstream rep;
    rep << "[preprocess]\n"
        << "step_s = " << format_number(p.step) << '\n'
        << "method = " << resample_method_name(p.method) << '\n'
        << "rows = " << gridded.size() << '\n'
        << "static_windows = " << windows.size() << '\n';
    for (std::size_t i = 0; i < windows.size(); ++i) {
        rep << "\n[windows.w" << i + 1 << "]\n"
            << "start = " << format_timestamp(windows[i].start) << '\n'
            << "end = " << format_timestamp(windows[i].end) << '\n';
    }
    const auto gaps = find_gaps(gridded);
    for (const Gap& g : gaps) {
        warnings.push_back("column " + g.key + " has " + std::to_string(g.length) + " missing samples from " +
                           format_timestamp(gridded.times()[g.first]));
    }
    rep << '\n' << format_offset_report(offsets);
    if (!warnings.empty()) {
        rep << "\n[warnings]\n";
        for (std::size_t i = 0; i < warnings.size(); ++i) {
            rep << 'w' << i + 1 << " = " << warnings[i] << '\n';
        }
    }
    if (!a.report.empty()) {
        write_text_file(a.report, rep.str());
    }
    for (const std::string& w : warnings) {
        err << "warning: " << w << '\n';
    }
    return kExitOk;
}

// ---- simulate -----------------------------------------------------------

struct SimulateArgs {
    Common common;
    std::string network, demands, demands_unit;
    std::string station, station_column = "SysPres";
    std::string groups;
    std::string out, heads;
};

int run_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err)
{
    const Config cfg = a.common.load();
    const Network net = read_network(a.network, err);
    const TimeTable demands = read_table(a.demands, a.demands_unit);
    const Schedule d = with_path(a.demands, [&] { return demand_schedule(net, demands); });
    Schedule boundary = constant_boundary(net, d.steps());
    if (!a.station.empty()) {
        const TimeTable st = read_table(a.station, "m");
        if (st.times() != demands.times()) {
            throw DataError(a.station + ": time grid differs from " + a.demands);
        }
        boundary = with_path(a.station, [&] { return station_boundary(net, st.values(a.station_column)); });
    }
    std::vector<double> roughness;
    if (!a.groups.empty()) {
        const auto g = with_path(a.groups, [&] { return load_groups(a.groups); });
        roughness = with_path(a.groups, [&] { return g.per_pipe(net); });
    }
    const auto states = simulate_period(net, d, boundary, roughness, cfg.solver);

    std::vector<Series> flows;
    for (std::size_t i = 0; i < net.pipe_count(); ++i) {
        Series s{net.pipes()[i].id, Unit::LitresPerSecond, {}};
        for (const HydraulicState& st : states) {
            s.values.push_back(units::m3s_to_lps(st.flows[i]));
        }
        flows.push_back(std::move(s));
    }
    emit(a.out, write_timetable(TimeTable(demands.times(), std::move(flows))), out);

    if (!a.heads.empty()) {
        std::vector<Series> heads;
        for (const Node& n : net.nodes()) {
            heads.push_back({n.id, Unit::Metres, {}});
        }
        for (std::size_t t = 0; t < states.size(); ++t) {
            const auto h = node_heads(net, states[t], boundary.row(t));
            for (std::size_t n = 0; n < h.size(); ++n) {
                heads[n].values.push_back(h[n]);
            }
        }
        write_text_file(a.heads, write_timetable(TimeTable(demands.times(), std::move(heads))));
    }
    int worst = 0;
    for (const HydraulicState& s : states) {
        worst = std::max(worst, s.iterations);
    }
    err << "simulated " << states.size() << " steps, at most " << worst << " iterations per step\n";
    return kExitOk;
}

// ---- calibrate / validate ------------------------------------------------

struct FitArgs {
    Common common;
    std::string network, demands, demands_unit;
    std::string observed;
    std::string sites;
    std::string station_column;
    std::string flow, flow_column = "Sys_Flow";
    std::string groups;
    std::string out, groups_out, trace;
    std::string format = "kv";
    std::optional<int> multistart;
    bool parallel = false;
};

struct FitInputs {
    Network net;
    CalibrationData data;
};

FitInputs load_fit(const FitArgs& a, std::ostream& err)
{
    Network net = read_network(a.network, err);
    const TimeTable demands = read_table(a.demands, a.demands_unit);
    const TimeTable observed = read_table(a.observed, "m");
    std::vector<std::string> sites = split_list(a.sites);
    if (sites.empty()) {
        for (const Series& s : observed.columns()) {
            if (s.key != a.station_column && net.find_node(s.key)) {
                sites.push_back(s.key);
            }
        }
        if (sites.empty()) {
            throw DataError(a.observed + ": no column matches a network node id");
        }
    }
    std::optional<std::string> station;
    if (!a.station_column.empty()) {
        station = a.station_column;
    }
    std::optional<TimeTable> flows;
    if (!a.flow.empty()) {
        flows = read_table(a.flow, "L/s");
    }
    CalibrationData data = with_path(a.observed, [&] {
        return make_calibration_data(net, demands, observed, sites, station, flows ? &*flows : nullptr,
                                     flows ? std::optional<std::string>(a.flow_column) : std::nullopt);
    });
    return {std::move(net), std::move(data)};
}

int run_calibrate(const FitArgs& a, std::ostream& out, std::ostream& err)
{
    Config cfg = a.common.load();
    CalibrationOptions opts = cfg.calibration.options;
    if (a.multistart) {
        opts.multistart = *a.multistart;
    }
    if (a.parallel) {
        opts.execution = kernels::Execution::Parallel;
    }
    const FitInputs in = load_fit(a, err);
    RoughnessGroups init =
        a.groups.empty()
            ? RoughnessGroups::from_network(in.net, cfg.calibration.min_roughness, cfg.calibration.max_roughness)
            : with_path(a.groups, [&] { return load_groups(a.groups); });
    with_path(a.groups.empty() ? a.network : a.groups, [&] { return init.per_pipe(in.net); });

    const CalibrationResult result = calibrate(in.net, in.data, init, opts);
    if (!std::isfinite(result.objective)) {
        throw ConvergenceError("calibration: the solver failed at every trial point (" +
                               std::to_string(result.failed_evaluations) + " evaluations); " + result.message);
    }
    emit(a.out, render(calibration_report(result), a.format), out);
    if (!a.groups_out.empty()) {
        write_text_file(a.groups_out, write_groups(result.groups));
    }
    for (const std::string& w : result.warnings) {
        err << "warning: " << w << '\n';
    }
    err << "calibration " << (result.converged ? "converged" : "stopped") << ": " << result.message
        << "; objective " << format_number(result.objective) << '\n';
    return kExitOk;
}

int run_validate(const FitArgs& a, std::ostream& out, std::ostream& err)
{
    const Config cfg = a.common.load();
    const FitInputs in = load_fit(a, err);
    const auto groups = with_path(a.groups, [&] { return load_groups(a.groups); });
    with_path(a.groups, [&] { return groups.per_pipe(in.net); });
    const auto result = validate(in.net, in.data, groups, cfg.solver,
                                 a.parallel ? kernels::Execution::Parallel : kernels::Execution::Serial);
    emit(a.out, render(validation_report(result), a.format), out);
    if (!a.trace.empty()) {
        const TimeTable obs = read_table(a.observed, "m");
        std::vector<Series> cols;
        for (std::size_t j = 0; j < in.data.sites.size(); ++j) {
            Series s{in.data.sites[j], Unit::Metres, {}};
            for (std::size_t t = 0; t < result.simulated.pressure.steps(); ++t) {
                s.values.push_back(result.simulated.pressure.at(t, j));
            }
            cols.push_back(std::move(s));
        }
        write_text_file(a.trace, write_timetable(TimeTable(obs.times(), std::move(cols))));
    }
    return kExitOk;
}

// ---- setpoint-run / setpoint-compare -------------------------------------

struct SetpointArgs {
    Common common;
    std::string network, demands, demands_unit;
    std::string curve;
    std::string mode = "closed";
    std::optional<double> r0;
    std::string out, summary, old_trace, new_trace;
    std::string format = "kv";
};

struct SetpointInputs {
    Network net;
    TimeTable demands;
    std::vector<double> baseline;
};

SetpointInputs load_setpoint(const SetpointArgs& a, std::ostream& err)
{
    Network net = read_network(a.network, err);
    TimeTable demands = read_table(a.demands, a.demands_unit);
    const SetpointCurve curve = a.curve.empty() ? SetpointCurve::linear_default()
                                                : with_path(a.curve, [&] { return parse_curve(read_text_file(a.curve)); });
    const auto q = with_path(a.demands, [&] { return system_flow(net, demands); });
    auto base = baseline_setpoints(curve, q);
    return {std::move(net), std::move(demands), std::move(base)};
}

SetpointRun closed_loop(const SetpointInputs& in, const SetpointArgs& a, const Config& cfg)
{
    if (in.baseline.empty()) {
        throw DataError(a.demands + ": no demand rows");
    }
    const double r0 = a.r0 ? *a.r0 : std::clamp(in.baseline.front(), cfg.setpoint.min_setpoint,
                                                   cfg.setpoint.max_setpoint);
    return with_path(a.demands, [&] { return select_setpoints(in.net, in.demands, r0, cfg.setpoint); });
}

int run_setpoint(const SetpointArgs& a, std::ostream& out, std::ostream& err)
{
    const Config cfg = a.common.load();
    if (a.mode != "closed" && a.mode != "curve") {
        throw CLI::ValidationError("--mode", "must be 'closed' or 'curve'");
    }
    const SetpointInputs in = load_setpoint(a, err);
    const SetpointRun run =
        a.mode == "closed"
            ? closed_loop(in, a, cfg)
            : with_path(a.demands, [&] { return evaluate_setpoints(in.net, in.demands, in.baseline, cfg.setpoint); });
    emit(a.out, write_trace(run), out);
    const RunSummary s = summarize(run, cfg.energy, cfg.setpoint.service_head);
    if (!a.summary.empty()) {
        write_text_file(a.summary, render(run_report(s, a.mode), a.format));
    }
    if (s.infeasible_steps) {
        err << "warning: " << s.infeasible_steps << " steps short of the service head at the upper setpoint bound\n";
    }
    return kExitOk;
}

int run_compare(const SetpointArgs& a, std::ostream& out, std::ostream& err)
{
    const Config cfg = a.common.load();
    const SetpointInputs in = load_setpoint(a, err);
    const SetpointRun old_run =
        with_path(a.demands, [&] { return evaluate_setpoints(in.net, in.demands, in.baseline, cfg.setpoint); });
    const SetpointRun new_run = closed_loop(in, a, cfg);
    const RunComparison c = compare_runs(old_run, new_run, cfg.energy, cfg.setpoint.service_head);
    emit(a.out, render(comparison_report(c), a.format), out);
    if (!a.old_trace.empty()) {
        write_text_file(a.old_trace, write_trace(old_run));
    }
    if (!a.new_trace.empty()) {
        write_text_file(a.new_trace, write_trace(new_run));
    }
    return kExitOk;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out;
    std::string format = "table";
};

int run_report_cmd(const ReportArgs& a, std::ostream& out, std::ostream&)
{
    Report merged;
    for (const std::string& path : a.inputs) {
        const std::string text = read_text_file(path);
        const Report r = with_path(path, [&] { return parse_report(text); });
        merged.sections.insert(merged.sections.end(), r.sections.begin(), r.sections.end());
    }
    emit(a.out, render(merged, a.format), out);
    return kExitOk;
}

void add_format(CLI::App* app, std::string& format)
{
    app->add_option("--format", format, "Report layout: kv (key = value) or table")
        ->check(CLI::IsMember({"kv", "table"}));
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Pressurised irrigation network analysis", "pipenet"};
    app.require_subcommand(1);

    PreprocessArgs pre;
    auto* cmd = app.add_subcommand("preprocess", "Correct sensor offsets and resample SCADA logs");
    pre.common.attach(cmd);
    cmd->add_option("--pressures", pre.pressures, "Raw pressure CSV keyed by sensor id")->required();
    cmd->add_option("--pressures-unit", pre.pressures_unit, "Unit if the file has no '# unit:' line");
    cmd->add_option("--flow", pre.flow, "Raw system flow CSV")->required();
    cmd->add_option("--flow-unit", pre.flow_unit, "Unit if the file has no '# unit:' line");
    cmd->add_option("--sensors", pre.sensors, "Sensor metadata: id node elevation kind")->required();
    cmd->add_option("--network", pre.network, "Network file to check sensor nodes against");
    cmd->add_option("--out", pre.out, "Corrected, gridded pressure CSV (default stdout)");
    cmd->add_option("--report", pre.report, "Offset report (key = value)");
    cmd->add_option("--step", pre.step, "Output grid step, s");
    cmd->add_option("--method", pre.method, "interpolate, mean or hold");
    cmd->add_option("--reference", pre.reference, "Reference pressure sensor");
    cmd->add_option("--flow-column", pre.flow_column, "System flow column");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Extended-period simulation; writes pipe flows in L/s");
    sim.common.attach(sim_cmd);
    sim_cmd->add_option("--network", sim.network, "Network file")->required();
    sim_cmd->add_option("--demands", sim.demands, "Demand CSV keyed by demand column")->required();
    sim_cmd->add_option("--demands-unit", sim.demands_unit, "Unit if the file has no '# unit:' line");
    sim_cmd->add_option("--station", sim.station, "Station pressure CSV driving the pump boundary");
    sim_cmd->add_option("--station-column", sim.station_column, "Column in --station");
    sim_cmd->add_option("--groups", sim.groups, "Roughness per material");
    sim_cmd->add_option("--out", sim.out, "Pipe flow CSV, L/s (default stdout)");
    sim_cmd->add_option("--heads", sim.heads, "Node HGL CSV, m");

    FitArgs cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "Fit pipe roughness per material to observed pressures");
    FitArgs val;
    auto* val_cmd = app.add_subcommand("validate", "Score a roughness set against observed pressures");
    for (auto [c, f] : {std::pair{cal_cmd, &cal}, std::pair{val_cmd, &val}}) {
        f->common.attach(c);
        c->add_option("--network", f->network, "Network file")->required();
        c->add_option("--demands", f->demands, "Demand CSV")->required();
        c->add_option("--demands-unit", f->demands_unit, "Unit if the file has no '# unit:' line");
        c->add_option("--observed", f->observed, "Observed pressure head CSV keyed by node id")->required();
        c->add_option("--sites", f->sites, "Comma-separated site ids (default: every node column)");
        c->add_option("--station-column", f->station_column, "Observed station pressure driving the boundary");
        c->add_option("--flow", f->flow, "Observed system flow CSV, L/s");
        c->add_option("--flow-column", f->flow_column, "Column in --flow");
        c->add_option("--out", f->out, "Report (default stdout)");
        c->add_flag("--parallel", f->parallel, "Solve time steps on OpenMP threads");
        add_format(c, f->format);
    }
    cal_cmd->add_option("--groups", cal.groups, "Initial roughness and bounds per material");
    cal_cmd->add_option("--groups-out", cal.groups_out, "Write the fitted roughness groups");
    cal_cmd->add_option("--multistart", cal.multistart, "Extra random starts");
    val_cmd->add_option("--groups", val.groups, "Roughness per material")->required();
    val_cmd->add_option("--trace", val.trace, "Simulated site pressures CSV");

    SetpointArgs run;
    auto* run_cmd = app.add_subcommand("setpoint-run", "Run the pump setpoint rule or the baseline curve");
    SetpointArgs cmp;
    auto* cmp_cmd = app.add_subcommand("setpoint-compare", "Compare the baseline curve with the setpoint rule");
    for (auto [c, s] : {std::pair{run_cmd, &run}, std::pair{cmp_cmd, &cmp}}) {
        s->common.attach(c);
        c->add_option("--network", s->network, "Network file")->required();
        c->add_option("--demands", s->demands, "Outlet demand CSV on a uniform grid")->required();
        c->add_option("--demands-unit", s->demands_unit, "Unit if the file has no '# unit:' line");
        c->add_option("--curve", s->curve, "Baseline curve: 'flow_lps setpoint_m' per line");
        c->add_option("--r0", s->r0, "Initial setpoint, m (default: baseline at the first step)");
        add_format(c, s->format);
    }
    run_cmd->add_option("--mode", run.mode, "closed (setpoint rule) or curve (baseline)");
    run_cmd->add_option("--out", run.out, "Per-step trace CSV (default stdout)");
    run_cmd->add_option("--summary", run.summary, "Energy and service summary");
    cmp_cmd->add_option("--out", cmp.out, "Comparison report (default stdout)");
    cmp_cmd->add_option("--old-trace", cmp.old_trace, "Baseline trace CSV");
    cmp_cmd->add_option("--new-trace", cmp.new_trace, "Setpoint-rule trace CSV");

    ReportArgs rep;
    auto* rep_cmd = app.add_subcommand("report", "Render key = value reports as tables");
    rep_cmd->add_option("inputs", rep.inputs, "Report files")->required();
    rep_cmd->add_option("--out", rep.out, "Output (default stdout)");
    add_format(rep_cmd, rep.format);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);  // --help
            return kExitOk;
        }
        err << "error: " << e.what() << "\n(run with --help for usage)\n";
        return kExitUsage;
    }

    try {
        if (cmd->parsed()) {
            return run_preprocess(pre, out, err);
        }
        if (sim_cmd->parsed()) {
            return run_simulate(sim, out, err);
        }
        if (cal_cmd->parsed()) {
            return run_calibrate(cal, out, err);
        }
        if (val_cmd->parsed()) {
            return run_validate(val, out, err);
        }
        if (run_cmd->parsed()) {
            return run_setpoint(run, out, err);
        }
        if (cmp_cmd->parsed()) {
            return run_compare(cmp, out, err);
        }
        return run_report_cmd(rep, out, err);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << " (iterations " << e.iterations() << ", last residual "
            << format_number(e.residual()) << ")\n";
        return kExitConvergence;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const ConfigError& e) {
        err << "error: config: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

}  // namespace pipenet
