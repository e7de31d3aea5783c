#include "isac/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace isac::alloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wf_sum(const std::vector<double>& g, double mu)
{
    double s = 0.0;
    for (double v : g)
        if (v > 0)
            s += std::max(0.0, mu - 1.0 / v);
    return s;
}

/// Rate of waterfilling `budget` over `g` without materializing the powers.
double wf_rate(const std::vector<double>& g, double budget)
{
    if (budget <= 0)
        return 0.0;
    bool any = false;
    for (double v : g)
        any = any || v > 0;
    if (!any)
        return 0.0;
    double lo = 0.0, hi = 1.0;
    while (wf_sum(g, hi) < budget)
        hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (wf_sum(g, mid) < budget ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    double rate = 0.0;
    for (double v : g)
        if (v > 0)
            rate += std::log2(1.0 + v * std::max(0.0, mu - 1.0 / v));
    return rate;
}

/// Waterfilling with per-entry upper bounds: clip violators at their cap and
/// refill the remainder until no cap binds. caps empty means uncapped.
std::vector<double> capped_waterfilling(const std::vector<double>& g, double budget,
                                        const std::vector<double>& caps)
{
    const std::size_t n = g.size();
    std::vector<double> p(n, 0.0);
    if (budget <= 0 || n == 0)
        return p;
    std::vector<char> fixed(n, 0);
    double remaining = budget;
    for (std::size_t round = 0; round <= n; ++round) {
        std::vector<std::size_t> act;
        for (std::size_t i = 0; i < n; ++i)
            if (!fixed[i] && g[i] > 0)
                act.push_back(i);
        if (act.empty() || remaining <= 0)
            break;
        auto total = [&](double mu) {
            double s = 0.0;
            for (std::size_t i : act)
                s += std::max(0.0, mu - 1.0 / g[i]);
            return s;
        };
        double lo = 0.0, hi = 1.0;
        while (total(hi) < remaining)
            hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (total(mid) < remaining ? lo : hi) = mid;
        }
        const double mu = 0.5 * (lo + hi);
        bool clipped = false;
        for (std::size_t i : act) {
            const double want = std::max(0.0, mu - 1.0 / g[i]);
            const double cap = caps.empty() ? kInf : caps[i];
            if (want >= cap) {
                p[i] = cap;
                fixed[i] = 1;
                remaining -= cap;
                clipped = true;
            }
        }
        if (!clipped) {
            double s = 0.0;
            for (std::size_t i : act) {
                p[i] = std::max(0.0, mu - 1.0 / g[i]);
                s += p[i];
            }
            if (s > 0)
                for (std::size_t i : act)
                    p[i] *= remaining / s;
            break;
        }
    }
    return p;
}

/// Euclidean projection onto {x >= 0, sum x = total}.
void project_simplex(std::vector<double>& x, double total)
{
    std::vector<double> u = x;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        const double t = (css - total) / double(i + 1);
        if (u[i] - t > 0) {
            theta = t;
            k = i + 1;
        }
    }
    (void)k;
    for (double& v : x)
        v = std::max(0.0, v - theta);
}

} // namespace

std::vector<double> waterfilling(const std::vector<double>& gains, double p_total)
{
    if (gains.empty())
        throw std::invalid_argument("waterfilling: empty gain vector");
    if (!(p_total > 0))
        throw std::invalid_argument("waterfilling: p_total must be > 0");
    bool any = false;
    for (double v : gains) {
        if (v < 0 || !std::isfinite(v))
            throw std::invalid_argument("waterfilling: gains must be finite and >= 0");
        any = any || v > 0;
    }
    if (!any)
        throw std::invalid_argument("waterfilling: all gains are zero");

    double lo = 0.0, hi = 1.0;
    while (wf_sum(gains, hi) < p_total)
        hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (wf_sum(gains, mid) < p_total ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    std::vector<double> p(gains.size(), 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        if (gains[i] > 0)
            p[i] = std::max(0.0, mu - 1.0 / gains[i]);
        s += p[i];
    }
    if (s > 0)
        for (double& v : p)
            v *= p_total / s;
    return p;
}

std::vector<double> crb_aware_allocation(int n, double p_total, double lambda_w,
                                         const std::vector<double>& gains)
{
    if (n < 1)
        throw std::invalid_argument("crb_aware_allocation: n must be >= 1");
    if (!(p_total > 0))
        throw std::invalid_argument("crb_aware_allocation: p_total must be > 0");
    if (!(lambda_w >= 0 && lambda_w <= 1))
        throw std::invalid_argument("crb_aware_allocation: lambda_w must be in [0,1]");
    if (gains.size() != std::size_t(n))
        throw std::invalid_argument("crb_aware_allocation: gains length mismatch");
    for (double v : gains)
        if (v < 0 || !std::isfinite(v))
            throw std::invalid_argument("crb_aware_allocation: gains must be finite "
                                        "and >= 0");
    if (n == 1)
        return {p_total};

    const double center = 0.5 * double(n - 1);
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i)
        s[i] = (i - center) * (i - center);
    const double s_max = center * center;

    // kappa matches the spectral term's scale at the all-edge allocation to
    // the rate at uniform power, so lambda_w sweeps a sensible trade-off.
    double r_unif = 0.0;
    for (double v : gains)
        r_unif += std::log2(1.0 + v * p_total / n);
    const double kappa = (r_unif > 0 ? r_unif : 1.0) / (p_total * s_max);

    const double ln2 = std::log(2.0);
    auto objective = [&](const std::vector<double>& p) {
        double f = 0.0;
        for (int i = 0; i < n; ++i) {
            if (lambda_w < 1)
                f += (1.0 - lambda_w) * std::log2(1.0 + gains[i] * p[i]);
            f += lambda_w * kappa * p[i] * s[i];
        }
        return f;
    };
    auto gradient = [&](const std::vector<double>& p, std::vector<double>& g) {
        for (int i = 0; i < n; ++i)
            g[i] = (1.0 - lambda_w) * gains[i] / ((1.0 + gains[i] * p[i]) * ln2) +
                   lambda_w * kappa * s[i];
    };

    std::vector<double> p(n, p_total / n), grad(n), trial(n);
    double f = objective(p);
    double gnorm0 = 0.0;
    gradient(p, grad);
    for (double v : grad)
        gnorm0 += v * v;
    double step = 16.0 * p_total / (std::sqrt(gnorm0) + 1e-300);
    for (int it = 0; it < 5000; ++it) {
        gradient(p, grad);
        bool accepted = false;
        double t = step;
        for (int bt = 0; bt < 60; ++bt) {
            for (int i = 0; i < n; ++i)
                trial[i] = p[i] + t * grad[i];
            project_simplex(trial, p_total);
            const double ft = objective(trial);
            if (ft > f + 1e-15 * std::fabs(f)) {
                double move = 0.0;
                for (int i = 0; i < n; ++i)
                    move = std::max(move, std::fabs(trial[i] - p[i]));
                p = trial;
                f = ft;
                step = 2.0 * t;
                accepted = true;
                if (move < 1e-14 * p_total)
                    it = 5000;
                break;
            }
            t *= 0.5;
        }
        if (!accepted)
            break;
    }

    // KKT water-level polish (active-set refinement). Skipped for the pure
    // spectral objective, whose optimum the gradient steps reach exactly.
    if (lambda_w < 1) {
        std::vector<char> active(n, 0);
        for (int i = 0; i < n; ++i)
            active[i] = p[i] > 1e-12 * p_total;
        bool usable = true;
        for (int pass = 0; pass < 2 * n && usable; ++pass) {
            double off_max = 0.0;
            bool any_active = false;
            for (int i = 0; i < n; ++i)
                if (active[i]) {
                    any_active = true;
                    if (gains[i] <= 0) {
                        usable = false;
                        break;
                    }
                    off_max = std::max(off_max, lambda_w * kappa * s[i]);
                }
            if (!usable || !any_active) {
                usable = false;
                break;
            }
            auto p_of_mu = [&](double mu, int i) {
                return (1.0 - lambda_w) / (ln2 * (mu - lambda_w * kappa * s[i])) -
                       1.0 / gains[i];
            };
            auto sum_of_mu = [&](double mu) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    if (active[i])
                        acc += p_of_mu(mu, i);
                return acc;
            };
            double lo = off_max * (1.0 + 1e-15) + 1e-300, hi = lo + 1.0;
            if (sum_of_mu(lo) < p_total) {
                usable = false;
                break;
            }
            while (sum_of_mu(hi) > p_total)
                hi = off_max + (hi - off_max) * 2.0;
            for (int it2 = 0; it2 < 200; ++it2) {
                const double mid = 0.5 * (lo + hi);
                (sum_of_mu(mid) > p_total ? lo : hi) = mid;
            }
            const double mu = 0.5 * (lo + hi);
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                if (active[i] && p_of_mu(mu, i) < 0) {
                    active[i] = 0;
                    changed = true;
                } else if (!active[i] &&
                           (1.0 - lambda_w) * gains[i] / ln2 + lambda_w * kappa * s[i] >
                               mu * (1.0 + 1e-12)) {
                    active[i] = 1;
                    changed = true;
                }
            }
            if (changed)
                continue;
            std::vector<double> polished(n, 0.0);
            double tot = 0.0;
            for (int i = 0; i < n; ++i)
                if (active[i]) {
                    polished[i] = std::max(0.0, p_of_mu(mu, i));
                    tot += polished[i];
                }
            if (tot > 0)
                for (double& v : polished)
                    v *= p_total / tot;
            if (objective(polished) >= f - 1e-12 * (std::fabs(f) + 1.0))
                p = polished;
            break;
        }
    }
    return p;
}

void AllocationProblem::validate() const
{
    const std::size_t n = gains_comm.size();
    if (n == 0)
        throw std::invalid_argument("alloc.gains_comm: must be non-empty");
    if (gains_sensing.size() != n)
        throw std::invalid_argument("alloc.gains_sensing: length differs from "
                                    "gains_comm");
    if (!interference_cap.empty() && interference_cap.size() != n)
        throw std::invalid_argument("alloc.interference_cap: length differs from "
                                    "gains_comm");
    for (double v : gains_comm)
        if (v < 0 || !std::isfinite(v))
            throw std::invalid_argument("alloc.gains_comm: entries must be finite "
                                        "and >= 0");
    for (double v : gains_sensing)
        if (v < 0 || !std::isfinite(v))
            throw std::invalid_argument("alloc.gains_sensing: entries must be finite "
                                        "and >= 0");
    for (double v : interference_cap)
        if (v < 0 || std::isnan(v))
            throw std::invalid_argument("alloc.interference_cap: entries must be >= 0");
    if (!(p_total > 0))
        throw std::invalid_argument("alloc.p_total: must be > 0");
    if (rate_floor < 0 || !std::isfinite(rate_floor))
        throw std::invalid_argument("alloc.rate_floor: must be finite and >= 0");
}

AllocationResult greedy_mi_allocation(const AllocationProblem& problem)
{
    problem.validate();
    const std::size_t n = problem.gains_comm.size();
    const auto& gu = problem.gains_comm;
    const auto& gs = problem.gains_sensing;

    AllocationResult res;
    res.powers.assign(n, 0.0);
    res.assignment.assign(n, kpi::Assign::sensing);

    const double mu_max = wf_rate(gu, problem.p_total);
    if (problem.rate_floor > mu_max * (1.0 + 1e-12) + 1e-15) {
        // Best effort: everything to comm, flag the miss.
        res.feasible = false;
        res.assignment.assign(n, kpi::Assign::comm);
        bool any = false;
        for (double v : gu)
            any = any || v > 0;
        if (any)
            res.powers = waterfilling(gu, problem.p_total);
        const auto mi = kpi::mi_reward(res.assignment, res.powers, gs, gu);
        res.mi_sensing = mi.sensing;
        res.mi_comm = mi.comm;
        return res;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return gu[a] > gu[b]; });

    std::vector<std::size_t> comm_idx;
    double p_comm = 0.0;
    if (problem.rate_floor > 0) {
        std::vector<double> prefix_gains;
        for (std::size_t j = 0; j < n; ++j) {
            comm_idx.push_back(order[j]);
            prefix_gains.push_back(gu[order[j]]);
            if (wf_rate(prefix_gains, problem.p_total) >=
                problem.rate_floor * (1.0 - 1e-12))
                break;
        }
        // Least comm budget whose waterfilled rate still clears the floor.
        double lo = 0.0, hi = problem.p_total;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (wf_rate(prefix_gains, mid) >= problem.rate_floor * (1.0 - 1e-12) ? hi
                                                                              : lo) =
                mid;
        }
        p_comm = hi;
        const auto pc = waterfilling(prefix_gains, p_comm);
        for (std::size_t j = 0; j < comm_idx.size(); ++j) {
            res.assignment[comm_idx[j]] = kpi::Assign::comm;
            res.powers[comm_idx[j]] = pc[j];
        }
    }

    std::vector<std::size_t> sense_idx;
    std::vector<double> sense_gains, sense_caps;
    for (std::size_t i = 0; i < n; ++i) {
        if (res.assignment[i] == kpi::Assign::comm)
            continue;
        sense_idx.push_back(i);
        sense_gains.push_back(gs[i]);
        if (!problem.interference_cap.empty())
            sense_caps.push_back(problem.interference_cap[i]);
    }
    const auto ps = capped_waterfilling(sense_gains, problem.p_total - p_comm,
                                        sense_caps);
    for (std::size_t j = 0; j < sense_idx.size(); ++j)
        res.powers[sense_idx[j]] = ps[j];

    const auto mi = kpi::mi_reward(res.assignment, res.powers, gs, gu);
    res.mi_sensing = mi.sensing;
    res.mi_comm = mi.comm;
    return res;
}

std::vector<ParetoPoint> scalarized_pareto(const AllocationProblem& problem,
                                           const std::vector<double>& weights)
{
    problem.validate();
    for (double w : weights)
        if (!(w >= 0 && w <= 1))
            throw std::invalid_argument("scalarized_pareto: weights must lie in [0,1]");

    const double mu_max = wf_rate(problem.gains_comm, problem.p_total);

    // Each weight trades the comm objective for the sensing one by lowering
    // the rate floor handed to the greedy engine: w = 1 drops the floor
    // entirely, w = 0 demands everything the channel can carry. A plain
    // weighted-sum argmax would only ever return the frontier's endpoints
    // when the trade-off curve is nearly linear.
    std::vector<ParetoPoint> pts(weights.size());
#pragma omp parallel for schedule(dynamic)
    for (long wi = 0; wi < long(weights.size()); ++wi) {
        const double w = weights[wi];
        AllocationProblem sub = problem;
        sub.rate_floor = (1.0 - w) * mu_max;
        AllocationResult r = greedy_mi_allocation(sub);
        if (!r.feasible) {
            // Floors sit at or below the all-comm optimum, but guard against
            // the boundary case rounding infeasible.
            sub.rate_floor = std::nextafter(sub.rate_floor, 0.0);
            r = greedy_mi_allocation(sub);
        }
        pts[wi] = ParetoPoint{w, r.feasible ? r.mi_sensing : 0.0,
                              r.feasible ? r.mi_comm : 0.0};
    }

    std::sort(pts.begin(), pts.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        return a.mi_sensing < b.mi_sensing ||
               (a.mi_sensing == b.mi_sensing && a.mi_comm > b.mi_comm);
    });
    std::vector<ParetoPoint> frontier;
    for (const auto& pt : pts) {
        bool dominated = false;
        for (const auto& other : pts)
            if ((other.mi_sensing > pt.mi_sensing && other.mi_comm >= pt.mi_comm) ||
                (other.mi_sensing >= pt.mi_sensing && other.mi_comm > pt.mi_comm))
                dominated = true;
        if (!dominated &&
            (frontier.empty() || frontier.back().mi_sensing != pt.mi_sensing ||
             frontier.back().mi_comm != pt.mi_comm))
            frontier.push_back(pt);
    }
    return frontier;
}

} // namespace isac::alloc
