#pragma once

// Steady-state pipe network hydraulics: Darcy-Weisbach resistance with the
// Swamee-Jain friction factor, solved with Todini's global gradient method.
//
// Unknowns per snapshot are pipe flows q (m^3/s, positive from -> to) and
// junction heads h (m). With the incidence convention of network.h the
// system is
//
//   G(q) q + A1 h + A2 e = 0     (head loss along every pipe)
//   A1^T q - d           = 0     (continuity, d = withdrawal at junctions)
//
// where G = diag(r_i |q_i|) and e are the fixed-node heads.

#include "pipenet/network.h"

#include <Eigen/SparseCholesky>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pipenet {

struct SolverConfig {
    int max_iterations = 100;
    double flow_tolerance = 1e-6;    // m^3/s
    double head_tolerance = 1e-6;    // m
    double viscosity = 1.004e-6;     // m^2/s, water at 20 C
    double gravity = 9.81;           // m/s^2
    double laminar_reynolds = 2000;  // f = 64/Re below this
    double turbulent_reynolds = 4000;  // Swamee-Jain above this
    double min_flow = 1e-6;          // m^3/s floor on |q| inside G

    void validate() const;  // throws std::invalid_argument
};

double reynolds(double flow, double diameter, double viscosity);

// Swamee-Jain explicit approximation of Colebrook-White. Roughness in mm,
// diameter in m.
double friction_factor(double roughness_mm, double diameter, double re);

// Friction factor over all flow regimes: 64/Re when laminar, Swamee-Jain
// when turbulent, linear in Re across the transition so that head loss
// stays continuous.
double darcy_friction(double roughness_mm, double diameter, double re, const SolverConfig& cfg);

// r = f L / (2 g D A^2), s^2/m^5.
double resistance_from_friction(double f, double length, double diameter, double gravity);

// Resistance at flow q with |q| floored at cfg.min_flow.
double resistance(const Pipe& pipe, double flow, const SolverConfig& cfg);
double resistance(const Pipe& pipe, double roughness_mm, double flow, const SolverConfig& cfg);

// Head loss r(q) q |q| in m, positive in the flow direction.
double head_loss(const Pipe& pipe, double roughness_mm, double flow, const SolverConfig& cfg);

// d(head_loss)/dq including the dependence of f on Re.
double head_loss_slope(const Pipe& pipe, double roughness_mm, double flow, const SolverConfig& cfg);

struct HydraulicState {
    std::vector<double> flows;  // per pipe, m^3/s
    std::vector<double> heads;  // per junction (junction column order), m
    int iterations = 0;
    double head_residual = 0.0;  // max |head loss imbalance| over pipes, m
    double flow_residual = 0.0;  // max |mass imbalance| over junctions, m^3/s
};

class SolverError : public std::runtime_error {
public:
    enum class Kind { NonConvergence, Singular };

    SolverError(Kind kind, const std::string& message, int iterations, double residual,
                std::optional<std::size_t> step = std::nullopt);

    Kind kind() const { return kind_; }
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }
    std::optional<std::size_t> step() const { return step_; }

    SolverError at_step(std::size_t step) const;

private:
    Kind kind_;
    int iterations_;
    double residual_;
    std::optional<std::size_t> step_;
};

// Reusable solver for one network. Holds the sparsity analysis of the
// reduced head system, so one instance per thread.
class HydraulicSolver {
public:
    HydraulicSolver(const Network& net, SolverConfig cfg = {});

    // demands: per junction, m^3/s. boundary_heads: per fixed node, m.
    // roughness_mm: per pipe, or empty to use the network values.
    HydraulicState solve(std::span<const double> demands, std::span<const double> boundary_heads,
                         std::span<const double> roughness_mm = {},
                         const HydraulicState* warm_start = nullptr);

    const Network& network() const { return net_; }
    const SolverConfig& config() const { return cfg_; }

private:
    struct PipeSlots {
        std::ptrdiff_t from_diag = -1;
        std::ptrdiff_t to_diag = -1;
        std::ptrdiff_t from_to = -1;
        std::ptrdiff_t to_from = -1;
    };

    const Network& net_;
    SolverConfig cfg_;
    Eigen::SparseMatrix<double> schur_;
    std::vector<PipeSlots> slots_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

HydraulicState solve_snapshot(const Network& net, std::span<const double> demands,
                              std::span<const double> boundary_heads,
                              std::span<const double> roughness_mm = {},
                              const SolverConfig& cfg = {});

// Head at every node (network node order) given a solved state.
std::vector<double> node_heads(const Network& net, const HydraulicState& state,
                               std::span<const double> boundary_heads);

// Flow leaving each fixed-head node into the network, m^3/s.
std::vector<double> source_outflows(const Network& net, const HydraulicState& state);

// Residuals of a state against the governing equations.
struct Residuals {
    double head = 0.0;
    double flow = 0.0;
};
Residuals check_state(const Network& net, const HydraulicState& state,
                      std::span<const double> demands, std::span<const double> boundary_heads,
                      std::span<const double> roughness_mm, const SolverConfig& cfg);

// Dense row-major (steps x width) matrix of per-step inputs.
class Schedule {
public:
    Schedule() = default;
    Schedule(std::size_t steps, std::size_t width, double fill = 0.0)
        : steps_(steps), width_(width), data_(steps * width, fill)
    {
    }

    std::size_t steps() const { return steps_; }
    std::size_t width() const { return width_; }
    std::span<const double> row(std::size_t t) const { return {data_.data() + t * width_, width_}; }
    std::span<double> row(std::size_t t) { return {data_.data() + t * width_, width_}; }
    double& at(std::size_t t, std::size_t c) { return data_[t * width_ + c]; }
    double at(std::size_t t, std::size_t c) const { return data_[t * width_ + c]; }

private:
    std::size_t steps_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

class TimeTable;

// Junction demands (m^3/s) from a demand table keyed by Node::demand_ref.
// Junctions without a demand reference draw nothing.
Schedule demand_schedule(const Network& net, const TimeTable& demands);

// Fixed heads held at the network's source settings for every step.
Schedule constant_boundary(const Network& net, std::size_t steps);

// Fixed-head columns that represent the pump station: every pump-role
// source, or the only fixed node if no source is marked as a pump.
std::vector<std::size_t> station_columns(const Network& net);

// Station HGL = station node elevation + value(t) (pressure head or
// setpoint); other fixed nodes keep their source settings.
Schedule station_boundary(const Network& net, std::span<const double> station_pressure);

// Sequence of snapshots with warm starts. Failures carry the step index.
std::vector<HydraulicState> simulate_period(const Network& net, const Schedule& demands,
                                            const Schedule& boundary,
                                            std::span<const double> roughness_mm = {},
                                            const SolverConfig& cfg = {});

}  // namespace pipenet
