#pragma once

#include <span>
#include <string>
#include <vector>

namespace cppe {

enum class DecayModel { Exp4, Mims, ExpT1 };

/// "exp4", "mims", "exp_t1"; unknown ids throw InvalidParameter.
DecayModel parse_decay_model(const std::string& id);
std::string decay_model_id(DecayModel model);

struct FitParameter {
    std::string name;
    double value = 0.0;
    double sigma = 0.0;
};

struct DecayFit {
    DecayModel model = DecayModel::Exp4;
    std::vector<FitParameter> params;
    double residual_norm = 0.0;
    double condition_number = 0.0;
    /// The decay constant is indistinguishable from infinity (flat data); the time
    /// parameter is then reported as +inf.
    bool unbounded = false;
    bool poisson_weighted = false;
    int iterations = 0;

    const FitParameter& param(const std::string& name) const;
    double value(const std::string& name) const { return param(name).value; }
    double sigma(const std::string& name) const { return param(name).sigma; }
    /// Model curve at x with the fitted parameters.
    double evaluate(double x) const;
};

struct FitPoint {
    double x = 0.0;
    double y = 0.0;
};

struct FitOptions {
    /// Per-point 1-sigma ordinate errors; empty means unweighted with the covariance
    /// scaled by the residual variance.
    std::vector<double> sigma;
    /// ExpT1 only: add a constant background parameter.
    bool background = false;
    /// ExpT1 only: Poisson weights when any count is below 25.
    bool poisson_for_low_counts = true;
    int max_iterations = 500;
};

/// eta(T_s) = eta_o exp(-4 T_s / T2). Parameters "eta_o", "T2".
DecayFit fit_efficiency_decay(std::span<const FitPoint> points, const FitOptions& options = {});

/// I(tau) = I0 exp(-2 (2 tau / T2)^chi). Parameters "I0", "T2", "chi".
DecayFit fit_mims(std::span<const FitPoint> points, const FitOptions& options = {});

/// C(t) = C0 exp(-t / T1) (+ B). Parameters "C0", "T1" (, "B").
DecayFit fit_t1(std::span<const FitPoint> points, const FitOptions& options = {});

DecayFit fit_decay(DecayModel model, std::span<const FitPoint> points, const FitOptions& options = {});

/// Evaluates a model for explicit parameter values in the fit's parameter order.
double decay_model_value(DecayModel model, std::span<const double> params, double x);

}  // namespace cppe
