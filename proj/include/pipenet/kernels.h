#pragma once

// Batch snapshot kernels. Each step is solved from a cold start, so steps
// are independent and the OpenMP variant must match the serial reference
// bit for bit.

#include "pipenet/hydraulics.h"

#include <span>
#include <vector>

namespace pipenet::kernels {

enum class Execution { Serial, Parallel };

std::vector<HydraulicState> solve_steps_serial(const Network& net, const Schedule& demands,
                                               const Schedule& boundary,
                                               std::span<const double> roughness_mm,
                                               const SolverConfig& cfg);

std::vector<HydraulicState> solve_steps_parallel(const Network& net, const Schedule& demands,
                                                 const Schedule& boundary,
                                                 std::span<const double> roughness_mm,
                                                 const SolverConfig& cfg);

inline std::vector<HydraulicState> solve_steps(const Network& net, const Schedule& demands,
                                               const Schedule& boundary,
                                               std::span<const double> roughness_mm,
                                               const SolverConfig& cfg, Execution exec)
{
    return exec == Execution::Parallel
               ? solve_steps_parallel(net, demands, boundary, roughness_mm, cfg)
               : solve_steps_serial(net, demands, boundary, roughness_mm, cfg);
}

int max_threads();

}  // namespace pipenet::kernels
