#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace uavrelay::convex {

using Vector = std::vector<double>;

struct Evaluation {
    double value = 0.0;
    Vector gradient;
};

// Value may be -inf or NaN outside the function's domain.
using Function = std::function<Evaluation(std::span<const double>)>;

struct Ball {
    Vector center;
    double radius = 0.0;
};

// normal . x <= offset
struct Halfspace {
    Vector normal;
    double offset = 0.0;
};

struct FeasibleSet {
    std::optional<Ball> ball;
    std::vector<Halfspace> halfspaces;
    Vector lower;  // empty means unbounded below
    Vector upper;  // empty means unbounded above
    // Concave g with the constraint g(x) >= 0, enforced by a log barrier.
    std::vector<Function> barrier_terms;

    // Euclidean projection onto the ball/halfspace/box part.
    Vector project(std::span<const double> x) const;

    // Largest residual over the ball/halfspace/box part (0 when inside).
    double linear_violation(std::span<const double> x) const;

    std::size_t count_active(std::span<const double> x, double tol) const;
};

struct Options {
    int max_iterations = 500;  // per barrier phase
    double gradient_tolerance = 1e-8;
    double initial_step = 1.0;
    std::vector<double> barrier_weights = {1e-2, 1e-4, 1e-6};
    double armijo = 1e-4;
};

enum class Status { converged, stalled, iteration_cap, infeasible };

std::string to_string(Status s);

struct Diagnostics {
    int iterations = 0;
    double gradient_norm = 0.0;
    std::size_t active_constraints = 0;
    Status status = Status::converged;
    // Composite (objective plus barrier) value after each accepted step, per phase.
    std::vector<std::vector<double>> trace;
};

struct Result {
    Vector x;
    double value = 0.0;  // objective without barrier
    Diagnostics diagnostics;
};

Result maximize_concave(const Function& objective, const FeasibleSet& set, std::span<const double> x0,
                        const Options& options = {});

// Largest coordinate-wise relative gap between the analytic gradient and
// central differences with the given step.
double grad_check(const Function& objective, std::span<const double> point, double step);

} // namespace uavrelay::convex
