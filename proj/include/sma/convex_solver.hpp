#pragma once

#include "sma/dissipation.hpp"
#include "sma/errors.hpp"
#include "sma/tensor.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace sma {

struct SmoothPart {
    std::function<double(const Vec5&)> value;
    std::function<Vec5(const Vec5&)> gradient;
    std::function<Mat5(const Vec5&)> hessian;  // optional, enables Newton steps
    double lipschitz = 1.0;                     // of the gradient
    double modulus = 0.0;                       // strong convexity
};

// minimize  s(z) + scale*D(z - anchor) + origin_weight*|z| + I(|z| <= ball_radius)
struct PointProblem {
    SmoothPart smooth;
    const DissipationDensity* dissipation = nullptr;
    double scale = 1.0;
    DevTensor3 anchor;
    double origin_weight = 0.0;
    std::optional<double> ball_radius;
    std::optional<DevTensor3> start;  // defaults to the anchor
    double tolerance = 1e-10;
    int max_iterations = 10000;
    bool record_history = false;
};

struct PointSolution {
    DevTensor3 z;
    double objective = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> history;  // objective after each accepted iteration
};

PointSolution solve_point(const PointProblem& pb);

// Nonsmooth part only (without the ball indicator).
double nonsmooth_value(const PointProblem& pb, const DevTensor3& z);
double objective_value(const PointProblem& pb, const DevTensor3& z);

// prox of t * (nonsmooth part) at x.
DevTensor3 composite_prox(const PointProblem& pb, double t, const DevTensor3& x);

// |z - prox_{1/L}(z - grad/L)| * L, the prox-gradient mapping norm.
double stationarity_residual(const PointProblem& pb, const DevTensor3& z);

} // namespace sma
