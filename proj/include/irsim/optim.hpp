// SPDX-License-Identifier: Apache-2.0
//
// irsim - IRS-assisted wireless link simulation and beamforming optimization
// Copyright (C) 2026 the irsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef IRSIM_OPTIM_HPP
#define IRSIM_OPTIM_HPP

#include "irsim/common.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace irsim::optim
{

/// One mode index per tile (duplicated from codebook to keep this module
/// free-standing; the types are structurally identical).
using ModeSelection = std::vector<int>;

struct SolveReport
{
    std::vector<double> objective_trace;
    double final_objective = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    bool feasible = true;
    double max_violation = 0.0;
    bool contract_violation = false;
    long long nodes = 0;
    ModeSelection selection;
};

// ---------------------------------------------------------------------------
// Manifolds. Gradients follow the convention f(x + d) ~ f(x) + Re(g^H d)
// for complex points and f(X + D) ~ f(X) + <G, D>_F for real matrices.
// ---------------------------------------------------------------------------

/// Product of unit circles: each coordinate keeps unit modulus.
struct CircleManifold
{
    using Point = Eigen::VectorXcd;
    using Tangent = Eigen::VectorXcd;

    static Tangent project(const Point &x, const Tangent &g)
    {
        Tangent t(g.size());
        for (Eigen::Index l = 0; l < g.size(); ++l)
            t(l) = g(l) - std::real(g(l) * std::conj(x(l))) * x(l);
        return t;
    }

    static bool retract(const Point &x, const Tangent &v, Point &out)
    {
        out.resize(x.size());
        for (Eigen::Index l = 0; l < x.size(); ++l)
        {
            const cdouble moved = x(l) + v(l);
            const double mag = std::abs(moved);
            if (mag == 0.0)
                return false;
            out(l) = moved / mag;
        }
        return true;
    }

    static double norm(const Tangent &v)
    {
        return v.norm();
    }
};

/// Unconstrained complex vectors.
struct ComplexEuclidean
{
    using Point = Eigen::VectorXcd;
    using Tangent = Eigen::VectorXcd;

    static Tangent project(const Point &, const Tangent &g)
    {
        return g;
    }

    static bool retract(const Point &x, const Tangent &v, Point &out)
    {
        out = x + v;
        return true;
    }

    static double norm(const Tangent &v)
    {
        return v.norm();
    }
};

/// Unconstrained real vectors.
struct RealEuclidean
{
    using Point = Eigen::VectorXd;
    using Tangent = Eigen::VectorXd;

    static Tangent project(const Point &, const Tangent &g)
    {
        return g;
    }

    static bool retract(const Point &x, const Tangent &v, Point &out)
    {
        out = x + v;
        return true;
    }

    static double norm(const Tangent &v)
    {
        return v.norm();
    }
};

/// Real symmetric matrices restricted to a fixed sparsity mask (diagonal,
/// block diagonal, or full). Retraction re-symmetrizes exactly so iterates
/// never drift off the constraint set.
struct SymmetricMatrices
{
    using Point = Eigen::MatrixXd;
    using Tangent = Eigen::MatrixXd;

    Eigen::MatrixXd mask; // 1 where entries are tunable, 0 elsewhere

    static SymmetricMatrices full(Eigen::Index n)
    {
        return SymmetricMatrices{Eigen::MatrixXd::Ones(n, n)};
    }

    static SymmetricMatrices diagonal(Eigen::Index n)
    {
        return SymmetricMatrices{Eigen::MatrixXd::Identity(n, n)};
    }

    static SymmetricMatrices block_diagonal(const std::vector<int> &group_sizes)
    {
        Eigen::Index n = 0;
        for (int g : group_sizes)
            n += g;
        Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(n, n);
        Eigen::Index off = 0;
        for (int g : group_sizes)
        {
            mask.block(off, off, g, g).setOnes();
            off += g;
        }
        return SymmetricMatrices{std::move(mask)};
    }

    Tangent project(const Point &, const Tangent &g) const
    {
        return (0.5 * (g + g.transpose())).cwiseProduct(mask);
    }

    bool retract(const Point &x, const Tangent &v, Point &out) const
    {
        const Eigen::MatrixXd moved = x + v;
        out = 0.5 * (moved + moved.transpose());
        return true;
    }

    static double norm(const Tangent &v)
    {
        return v.norm();
    }
};

namespace detail
{

template <typename Manifold>
auto project(const Manifold &m, const typename Manifold::Point &x,
             const typename Manifold::Tangent &g)
{
    return m.project(x, g);
}

template <typename Manifold>
bool retract(const Manifold &m, const typename Manifold::Point &x,
             const typename Manifold::Tangent &v, typename Manifold::Point &out)
{
    return m.retract(x, v, out);
}

} // namespace detail

/// (x + v) normalized back to the unit circles. Exact cancellation of a
/// coordinate has no well-defined direction and is rejected.
inline Eigen::VectorXcd retract_circle(const Eigen::VectorXcd &x, const Eigen::VectorXcd &v)
{
    require(x.size() == v.size(), "retract_circle: size mismatch");
    Eigen::VectorXcd out;
    if (!CircleManifold::retract(x, v, out))
        throw domain_error("retract_circle: step cancels a coordinate exactly");
    return out;
}

template <typename Manifold>
struct SmoothProblem
{
    Manifold manifold;
    std::function<double(const typename Manifold::Point &)> objective;
    std::function<typename Manifold::Point(const typename Manifold::Point &)> gradient;
};

struct AscendOptions
{
    int max_iterations = 200;
    double gradient_tol = 1e-6;
    double backtrack_factor = 0.5; // beta
    double armijo_c = 1e-4;
    double initial_step = 1.0;
    int max_backtracks = 40;
};

namespace detail
{

template <typename Point>
bool all_finite(const Point &p)
{
    return p.allFinite();
}

} // namespace detail

/// Riemannian gradient ascent with Armijo backtracking. Every accepted step
/// increases the objective, so the reported trace is non-decreasing.
template <typename Manifold>
SolveReport ascend(const SmoothProblem<Manifold> &problem, typename Manifold::Point &x,
                   const AscendOptions &opts = {})
{
    using Point = typename Manifold::Point;

    double f = problem.objective(x);
    if (!std::isfinite(f))
        throw solver_error("ascend: objective not finite at the initial point");

    SolveReport report;
    report.objective_trace.push_back(f);
    double step_hint = opts.initial_step;

    for (int iter = 0; iter < opts.max_iterations; ++iter)
    {
        const Point euclidean = problem.gradient(x);
        if (!detail::all_finite(euclidean))
            throw solver_error("ascend: gradient not finite at iteration " +
                               std::to_string(iter));
        const auto direction = detail::project(problem.manifold, x, euclidean);
        const double dnorm = Manifold::norm(direction);
        if (dnorm < opts.gradient_tol)
        {
            report.converged = true;
            break;
        }

        double step = step_hint;
        bool accepted = false;
        Point candidate;
        for (int bt = 0; bt < opts.max_backtracks; ++bt)
        {
            if (detail::retract(problem.manifold, x, (step * direction).eval(), candidate))
            {
                const double f_new = problem.objective(candidate);
                if (std::isfinite(f_new) && f_new >= f + opts.armijo_c * step * dnorm * dnorm)
                {
                    accepted = true;
                    break;
                }
            }
            step *= opts.backtrack_factor;
        }

        if (!accepted)
        {
            // No ascent direction survives the line search; numerically
            // stationary.
            report.converged = true;
            break;
        }

        x = candidate;
        f = problem.objective(x);
        report.objective_trace.push_back(f);
        ++report.iterations;
        step_hint = std::min(opts.initial_step, step * 2.0 / opts.backtrack_factor);
        step_hint = std::max(step_hint, step);
    }

    report.final_objective = f;
    return report;
}

// ---------------------------------------------------------------------------
// Alternating optimization.
// ---------------------------------------------------------------------------

struct AlternatingOptions
{
    int max_sweeps = 50;
    double relative_tol = 1e-6;
};

/// Cycles through block updates, each of which must not decrease the joint
/// objective. A block update that loses more than 1e-9 is rolled back and
/// flagged in the report rather than propagated.
template <typename State>
SolveReport alternating_optimize(const std::vector<std::function<void(State &)>> &blocks,
                                 const std::function<double(const State &)> &joint_objective,
                                 State &state, const AlternatingOptions &opts = {})
{
    require(blocks.size() >= 2, "alternating_optimize: at least two blocks required");

    SolveReport report;
    double f = joint_objective(state);
    if (!std::isfinite(f))
        throw solver_error("alternating_optimize: objective not finite at the initial state");
    report.objective_trace.push_back(f);

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep)
    {
        const double f_sweep_start = f;
        for (const auto &block : blocks)
        {
            State backup = state;
            block(state);
            const double f_new = joint_objective(state);
            if (!std::isfinite(f_new) || f_new < f - 1e-9)
            {
                state = std::move(backup);
                report.contract_violation = true;
                continue;
            }
            f = std::max(f, f_new);
        }
        report.objective_trace.push_back(f);
        ++report.iterations;

        const double improvement = f - f_sweep_start;
        const double scale = std::max(1.0, std::abs(f_sweep_start));
        if (improvement <= opts.relative_tol * scale)
        {
            report.converged = true;
            break;
        }
    }

    report.final_objective = f;
    return report;
}

// ---------------------------------------------------------------------------
// Quadratic-penalty constrained minimization.
// ---------------------------------------------------------------------------

/// Inequality constraint g(x) <= 0 with its gradient; `scale` sets the
/// denominator of the relative violation measure.
template <typename Manifold>
struct Constraint
{
    std::function<double(const typename Manifold::Point &)> value;
    std::function<typename Manifold::Point(const typename Manifold::Point &)> gradient;
    double scale = 1.0;
};

struct PenaltySchedule
{
    double mu0 = 1.0;
    double growth = 10.0;
    int rounds = 5;
    double tol_feas = 1e-4;
};

template <typename Manifold>
double max_relative_violation(const std::vector<Constraint<Manifold>> &constraints,
                              const typename Manifold::Point &x)
{
    double worst = 0.0;
    for (const auto &constraint : constraints)
    {
        const double g = constraint.value(x);
        worst = std::max(worst, std::max(0.0, g) / std::max(constraint.scale, 1e-300));
    }
    return worst;
}

/// Minimizes `problem.objective` subject to g_i(x) <= 0 by ascending the
/// negated quadratic-penalty objective with a growing penalty weight.
/// Infeasibility after the final round is reported, not thrown.
template <typename Manifold>
SolveReport penalty_solve(const SmoothProblem<Manifold> &problem,
                          const std::vector<Constraint<Manifold>> &constraints,
                          typename Manifold::Point &x, const PenaltySchedule &schedule = {},
                          const AscendOptions &ascend_opts = {})
{
    using Point = typename Manifold::Point;

    SolveReport report;
    const int rounds = constraints.empty() ? 1 : schedule.rounds;
    double mu = schedule.mu0;

    for (int round = 0; round < rounds; ++round)
    {
        SmoothProblem<Manifold> penalized;
        penalized.manifold = problem.manifold;
        penalized.objective = [&problem, &constraints, mu](const Point &p) {
            double value = -problem.objective(p);
            for (const auto &constraint : constraints)
            {
                const double g = constraint.value(p);
                if (g > 0.0)
                    value -= mu * g * g;
            }
            return value;
        };
        penalized.gradient = [&problem, &constraints, mu](const Point &p) {
            Point g = -problem.gradient(p);
            for (const auto &constraint : constraints)
            {
                const double violation = constraint.value(p);
                if (violation > 0.0)
                    g -= (2.0 * mu * violation) * constraint.gradient(p);
            }
            return g;
        };

        const SolveReport inner = ascend(penalized, x, ascend_opts);
        report.iterations += inner.iterations;
        report.objective_trace.push_back(problem.objective(x));
        mu *= schedule.growth;

        if (constraints.empty())
            break;
        if (max_relative_violation(constraints, x) <= schedule.tol_feas && inner.converged &&
            round >= 1)
            break;
    }

    report.final_objective = problem.objective(x);
    report.max_violation = max_relative_violation(constraints, x);
    report.feasible = report.max_violation <= schedule.tol_feas;
    report.converged = true;
    return report;
}

// ---------------------------------------------------------------------------
// Discrete mode selection.
// ---------------------------------------------------------------------------

struct InnerResult
{
    double objective = std::numeric_limits<double>::infinity();
    bool feasible = false;
};

/// Minimization over one mode index per tile; the inner solver evaluates a
/// complete selection and must be deterministic for a given selection.
struct SelectionProblem
{
    int tile_count = 0;
    int mode_count = 0;
    std::function<InnerResult(const ModeSelection &)> inner_solve;
    long long enumeration_cap = 100000;
};

namespace detail
{

inline void check_selection_problem(const SelectionProblem &problem)
{
    require(problem.tile_count >= 1, "selection: tile count must be positive");
    require(problem.mode_count >= 1, "selection: mode count must be positive");
    require(static_cast<bool>(problem.inner_solve), "selection: inner solver required");
    const double total =
        std::pow(static_cast<double>(problem.mode_count), static_cast<double>(problem.tile_count));
    require(total <= static_cast<double>(problem.enumeration_cap),
            "selection: search space exceeds the enumeration cap");
}

/// Strict improvement, then lexicographic tie-break.
inline bool improves(double objective, const ModeSelection &candidate, double best,
                     const ModeSelection &incumbent)
{
    if (objective < best)
        return true;
    if (objective == best && !incumbent.empty() &&
        std::lexicographical_compare(candidate.begin(), candidate.end(), incumbent.begin(),
                                     incumbent.end()))
        return true;
    return false;
}

} // namespace detail

/// Ground-truth enumeration in lexicographic order.
inline std::pair<ModeSelection, SolveReport> exhaustive_select(const SelectionProblem &problem)
{
    detail::check_selection_problem(problem);

    ModeSelection current(problem.tile_count, 0);
    ModeSelection best_selection;
    ModeSelection best_infeasible;
    double best = std::numeric_limits<double>::infinity();
    double best_infeasible_obj = std::numeric_limits<double>::infinity();

    SolveReport report;
    bool done = false;
    while (!done)
    {
        const InnerResult result = problem.inner_solve(current);
        ++report.iterations;
        if (result.feasible)
        {
            if (detail::improves(result.objective, current, best, best_selection))
            {
                best = result.objective;
                best_selection = current;
                report.objective_trace.push_back(best);
            }
        }
        else if (result.objective < best_infeasible_obj)
        {
            best_infeasible_obj = result.objective;
            best_infeasible = current;
        }

        // Lexicographic increment: last tile varies fastest.
        int digit = problem.tile_count - 1;
        while (digit >= 0)
        {
            if (++current[static_cast<std::size_t>(digit)] < problem.mode_count)
                break;
            current[static_cast<std::size_t>(digit)] = 0;
            --digit;
        }
        done = digit < 0;
    }

    report.converged = true;
    report.feasible = !best_selection.empty();
    if (report.feasible)
    {
        report.selection = best_selection;
        report.final_objective = best;
    }
    else
    {
        report.selection = best_infeasible.empty() ? ModeSelection(problem.tile_count, 0)
                                                   : best_infeasible;
        report.final_objective = best_infeasible_obj;
    }
    return {report.selection, report};
}

struct BranchAndBoundOptions
{
    long long max_nodes = std::numeric_limits<long long>::max();
};

/// Depth-first search over tiles with children ordered by their bound, so
/// the first dive is a greedy incumbent. A subtree is pruned when its bound
/// cannot beat the incumbent. Optimality rests on the bound being a true
/// lower bound; with a heuristic bound the result is best-effort.
inline std::pair<ModeSelection, SolveReport> branch_and_bound(
    const SelectionProblem &problem,
    const std::function<double(const ModeSelection &)> &bound_fn,
    const BranchAndBoundOptions &opts = {})
{
    detail::check_selection_problem(problem);
    require(static_cast<bool>(bound_fn), "branch_and_bound: bound function required");

    SolveReport report;
    ModeSelection best_selection;
    ModeSelection best_infeasible;
    double best = std::numeric_limits<double>::infinity();
    double best_infeasible_obj = std::numeric_limits<double>::infinity();

    struct Child
    {
        int mode;
        double bound;
    };

    std::function<void(ModeSelection &)> visit = [&](ModeSelection &partial) {
        ++report.nodes;
        if (report.nodes > opts.max_nodes)
            throw solver_error("branch_and_bound: node budget exceeded");

        if (static_cast<int>(partial.size()) == problem.tile_count)
        {
            const InnerResult result = problem.inner_solve(partial);
            ++report.iterations;
            if (result.feasible)
            {
                if (detail::improves(result.objective, partial, best, best_selection))
                {
                    best = result.objective;
                    best_selection = partial;
                    report.objective_trace.push_back(best);
                }
            }
            else if (result.objective < best_infeasible_obj)
            {
                best_infeasible_obj = result.objective;
                best_infeasible = partial;
            }
            return;
        }

        std::vector<Child> children;
        children.reserve(static_cast<std::size_t>(problem.mode_count));
        for (int m = 0; m < problem.mode_count; ++m)
        {
            partial.push_back(m);
            children.push_back(Child{m, bound_fn(partial)});
            partial.pop_back();
        }
        std::stable_sort(children.begin(), children.end(),
                         [](const Child &a, const Child &b) { return a.bound < b.bound; });

        for (const Child &child : children)
        {
            if (child.bound >= best)
                continue;
            partial.push_back(child.mode);
            visit(partial);
            partial.pop_back();
        }
    };

    ModeSelection root;
    root.reserve(static_cast<std::size_t>(problem.tile_count));
    visit(root);

    report.converged = true;
    report.feasible = !best_selection.empty();
    if (report.feasible)
    {
        report.selection = best_selection;
        report.final_objective = best;
    }
    else
    {
        report.selection = best_infeasible.empty() ? ModeSelection(problem.tile_count, 0)
                                                   : best_infeasible;
        report.final_objective = best_infeasible_obj;
    }
    return {report.selection, report};
}

} // namespace irsim::optim

#endif // IRSIM_OPTIM_HPP
