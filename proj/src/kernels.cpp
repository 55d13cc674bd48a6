#include "pipenet/kernels.h"

#include <exception>
#include <optional>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pipenet::kernels {

namespace {

void check_shapes(const Schedule& demands, const Schedule& boundary)
{
    if (demands.steps() != boundary.steps()) {
        throw std::invalid_argument("solve_steps: demand and boundary schedules differ in length");
    }
}

}  // namespace

std::vector<HydraulicState> solve_steps_serial(const Network& net, const Schedule& demands,
                                               const Schedule& boundary,
                                               std::span<const double> roughness_mm,
                                               const SolverConfig& cfg)
{
    check_shapes(demands, boundary);
    HydraulicSolver solver(net, cfg);
    std::vector<HydraulicState> out(demands.steps());
    for (std::size_t t = 0; t < demands.steps(); ++t) {
        try {
            out[t] = solver.solve(demands.row(t), boundary.row(t), roughness_mm);
        } catch (const SolverError& e) {
            throw e.at_step(t);
        }
    }
    return out;
}

std::vector<HydraulicState> solve_steps_parallel(const Network& net, const Schedule& demands,
                                                 const Schedule& boundary,
                                                 std::span<const double> roughness_mm,
                                                 const SolverConfig& cfg)
{
    check_shapes(demands, boundary);
    const auto steps = static_cast<std::ptrdiff_t>(demands.steps());
    std::vector<HydraulicState> out(demands.steps());
    std::vector<std::exception_ptr> failures(demands.steps());

#pragma omp parallel
    {
        // One solver per thread: the factorization workspace is mutable.
        std::optional<HydraulicSolver> solver;
        try {
            solver.emplace(net, cfg);
        } catch (...) {
        }
#pragma omp for schedule(dynamic, 4)
        for (std::ptrdiff_t t = 0; t < steps; ++t) {
            const auto step = static_cast<std::size_t>(t);
            try {
                if (!solver) {
                    HydraulicSolver fresh(net, cfg);  // rethrows the construction error
                }
                out[step] = solver->solve(demands.row(step), boundary.row(step), roughness_mm);
            } catch (...) {
                failures[step] = std::current_exception();
            }
        }
    }

    for (std::size_t t = 0; t < failures.size(); ++t) {
        if (!failures[t]) {
            continue;
        }
        try {
            std::rethrow_exception(failures[t]);
        } catch (const SolverError& e) {
            throw e.at_step(t);
        }
    }
    return out;
}

int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace pipenet::kernels
