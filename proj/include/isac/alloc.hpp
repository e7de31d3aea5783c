#pragma once

#include <vector>

#include "isac/kpi.hpp"

namespace isac::alloc {

/// Rate-optimal power allocation p_n = max(0, mu - 1/g_n) with the water level
/// found by bisection so that sum(p) equals `p_total` to 1e-9 relative.
/// Throws std::invalid_argument if every gain is zero, any gain is negative,
/// or p_total <= 0.
std::vector<double> waterfilling(const std::vector<double>& gains, double p_total);

/// Trade rate against RMS bandwidth: maximize
///   (1-lambda_w) * sum log2(1 + g_n p_n) + lambda_w * kappa * sum p_n s_n
/// over the simplex {p >= 0, sum p = p_total}, where s_n = (n-(N-1)/2)^2 and
/// kappa scales the spectral term to the rate at uniform power. Solved by
/// projected gradient ascent with Armijo backtracking, then a KKT water-level
/// polish when the rate term is active. lambda_w=0 reduces to waterfilling;
/// lambda_w=1 puts p_total/2 on each edge subcarrier.
std::vector<double> crb_aware_allocation(int n, double p_total, double lambda_w,
                                         const std::vector<double>& gains);

/// Joint power/assignment instance: per-subcarrier sensing and comm gains
/// (linear SINR per watt), a shared power budget, a comm rate floor in bits,
/// and an optional per-subcarrier cap on sensing power (empty = uncapped).
struct AllocationProblem {
    std::vector<double> gains_sensing;
    std::vector<double> gains_comm;
    double p_total = 1.0;
    double rate_floor = 0.0;
    std::vector<double> interference_cap;

    void validate() const;
};

struct AllocationResult {
    std::vector<double> powers;
    std::vector<kpi::Assign> assignment;
    double mi_sensing = 0;
    double mi_comm = 0;
    bool feasible = true;
};

/// Single-step greedy solver: give comm the smallest prefix of subcarriers
/// (sorted by descending comm gain, ties to the lowest index) and the least
/// power that meets the rate floor, waterfill the sensing remainder subject to
/// the interference caps. An unreachable floor is flagged infeasible and the
/// whole budget goes to comm as a best effort.
AllocationResult greedy_mi_allocation(const AllocationProblem& problem);

struct ParetoPoint {
    double weight = 0;
    double mi_sensing = 0;
    double mi_comm = 0;
};

/// Linear scalarization w*M_s + (1-w)*M_u maximized per weight by sweeping the
/// greedy engine's rate floor. Output is sorted by sensing MI with dominated
/// points removed.
std::vector<ParetoPoint> scalarized_pareto(const AllocationProblem& problem,
                                           const std::vector<double>& weights);

} // namespace isac::alloc
