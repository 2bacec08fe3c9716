#include "cppe/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "cppe/error.hpp"

namespace cppe {

namespace {

// Internally the time constants are fitted as rates k = 1 / T so flat data converges to
// k = 0 instead of running off to infinity.
struct Model {
    int n_params = 2;
    std::function<double(const Eigen::VectorXd&, double, Eigen::Ref<Eigen::VectorXd>)> eval;
    std::function<bool(const Eigen::VectorXd&)> admissible;
};

Model exp_model(double c, bool background) {
    Model m;
    m.n_params = background ? 3 : 2;
    m.eval = [c, background](const Eigen::VectorXd& p, double x, Eigen::Ref<Eigen::VectorXd> grad) {
        const double e = std::exp(-c * x * p[1]);
        grad[0] = e;
        grad[1] = -c * x * p[0] * e;
        double y = p[0] * e;
        if (background) {
            grad[2] = 1.0;
            y += p[2];
        }
        return y;
    };
    m.admissible = [](const Eigen::VectorXd&) { return true; };
    return m;
}

Model mims_model() {
    Model m;
    m.n_params = 3;
    m.eval = [](const Eigen::VectorXd& p, double x, Eigen::Ref<Eigen::VectorXd> grad) {
        const double u = 2.0 * x * p[1];
        const double uc = std::pow(u, p[2]);
        const double e = std::exp(-2.0 * uc);
        const double y = p[0] * e;
        grad[0] = e;
        grad[1] = u > 0.0 ? y * (-2.0 * p[2] * uc / p[1]) : 0.0;
        grad[2] = u > 0.0 ? y * (-2.0 * uc * std::log(u)) : 0.0;
        return y;
    };
    m.admissible = [](const Eigen::VectorXd& p) { return p[1] > 0.0 && p[2] > 0.0; };
    return m;
}

struct Solution {
    Eigen::VectorXd p;
    Eigen::MatrixXd cov;
    double rss = 0.0;
    double cond = 0.0;
    int iterations = 0;
};

double weighted_rss(const Model& m, const Eigen::VectorXd& p, std::span<const FitPoint> pts,
                    const Eigen::VectorXd& w) {
    Eigen::VectorXd g(m.n_params);
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double r = pts[i].y - m.eval(p, pts[i].x, g);
        s += w[static_cast<Eigen::Index>(i)] * r * r;
    }
    return s;
}

Solution levenberg_marquardt(const Model& m, Eigen::VectorXd p, std::span<const FitPoint> pts,
                             const Eigen::VectorXd& w, int max_iter) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    const int np = m.n_params;
    Eigen::MatrixXd J(n, np);
    Eigen::VectorXd r(n);
    Eigen::VectorXd g(np);
    auto linearize = [&](const Eigen::VectorXd& q) {
        for (Eigen::Index i = 0; i < n; ++i) {
            r[i] = pts[static_cast<std::size_t>(i)].y - m.eval(q, pts[static_cast<std::size_t>(i)].x, g);
            J.row(i) = g.transpose();
        }
    };
    double cost = weighted_rss(m, p, pts, w);
    double lambda = 1e-3;
    int it = 0;
    bool converged = false;
    for (; it < max_iter && !converged; ++it) {
        linearize(p);
        const Eigen::MatrixXd A = J.transpose() * w.asDiagonal() * J;
        const Eigen::VectorXd b = J.transpose() * w.asDiagonal() * r;
        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd Ad = A;
            for (int k = 0; k < np; ++k) Ad(k, k) += lambda * std::max(A(k, k), 1e-300);
            const Eigen::VectorXd step = Ad.ldlt().solve(b);
            const Eigen::VectorXd trial = p + step;
            const double trial_cost = m.admissible(trial) ? weighted_rss(m, trial, pts, w)
                                                          : std::numeric_limits<double>::infinity();
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                const bool small_step =
                    (step.array().abs() <= 1e-12 * (p.array().abs() + 1e-300)).all();
                const bool small_gain = cost - trial_cost <= 1e-15 * cost;
                p = trial;
                converged = small_step || small_gain || trial_cost == 0.0;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
            } else {
                lambda *= 10.0;
                if (lambda > 1e15) {
                    converged = true;  // no descent direction left: at the minimum to rounding
                    break;
                }
            }
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "fit did not converge in " << max_iter << " iterations (cost " << cost << ", lambda "
            << lambda << ")";
        throw FitError(msg.str());
    }
    linearize(p);
    const Eigen::MatrixXd A = J.transpose() * w.asDiagonal() * J;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    const double emax = eig.eigenvalues().maxCoeff();
    const double emin = eig.eigenvalues().minCoeff();
    Solution s;
    s.p = p;
    s.rss = cost;
    s.iterations = it;
    s.cond = emin > 0.0 ? emax / emin : std::numeric_limits<double>::infinity();
    s.cov = A.completeOrthogonalDecomposition().pseudoInverse();
    return s;
}

void check_points(std::span<const FitPoint> pts, std::size_t min_points, bool positive_x) {
    if (pts.size() < min_points) {
        throw InvalidParameter("fit needs at least " + std::to_string(min_points) + " points");
    }
    for (const auto& p : pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidParameter("fit data must be finite");
        if (positive_x ? !(p.x > 0.0) : !(p.x >= 0.0)) {
            throw InvalidParameter(positive_x ? "abscissae must be > 0" : "abscissae must be >= 0");
        }
    }
}

// Initial amplitude from the earliest point, rate from the log-slope between the earliest
// and latest points.
std::pair<double, double> initial_guess(std::span<const FitPoint> pts, double c) {
    auto first = pts.begin();
    auto last = pts.begin();
    for (auto it = pts.begin(); it != pts.end(); ++it) {
        if (it->x < first->x) first = it;
        if (it->x > last->x) last = it;
    }
    const double span = last->x - first->x;
    double k = 0.0;
    if (span > 0.0 && first->y > 0.0 && last->y > 0.0) k = std::log(first->y / last->y) / (c * span);
    if (!(k > 0.0) && span > 0.0) k = 1e-3 / (c * span);
    return {first->y, k};
}

DecayFit finish(DecayModel model, const Solution& s, std::span<const FitPoint> pts,
                const std::vector<std::string>& names, double y_scale, bool absolute_sigma,
                double x_max) {
    DecayFit f;
    f.model = model;
    f.iterations = s.iterations;
    f.condition_number = s.cond;
    const auto n = static_cast<double>(pts.size());
    const double dof = n - static_cast<double>(s.p.size());
    const double var = absolute_sigma ? 1.0 : (dof > 0.0 ? s.rss / dof : 0.0);
    const double k = s.p[1];
    f.unbounded = !(k * x_max > 1e-9);
    for (Eigen::Index i = 0; i < s.p.size(); ++i) {
        FitParameter fp;
        fp.name = names[static_cast<std::size_t>(i)];
        const double sd = std::sqrt(std::max(0.0, var * s.cov(i, i)));
        if (i == 1) {
            fp.value = f.unbounded ? std::numeric_limits<double>::infinity() : 1.0 / k;
            fp.sigma = f.unbounded ? std::numeric_limits<double>::infinity() : sd / (k * k);
        } else if (i == 0 || fp.name == "B") {
            fp.value = s.p[i] * y_scale;
            fp.sigma = sd * y_scale;
        } else {
            fp.value = s.p[i];
            fp.sigma = sd;
        }
        f.params.push_back(fp);
    }
    f.residual_norm = std::sqrt(s.rss) * (absolute_sigma ? 1.0 : y_scale);
    return f;
}

double max_abs_y(std::span<const FitPoint> pts) {
    double m = 0.0;
    for (const auto& p : pts) m = std::max(m, std::abs(p.y));
    return m;
}

double max_x(std::span<const FitPoint> pts) {
    double m = 0.0;
    for (const auto& p : pts) m = std::max(m, p.x);
    return m;
}

Eigen::VectorXd sigma_weights(const FitOptions& o, std::size_t n, double y_scale) {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    if (o.sigma.empty()) return w;
    if (o.sigma.size() != n) throw InvalidParameter("one sigma per point is required");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(o.sigma[i] > 0.0)) throw InvalidParameter("point sigmas must be > 0");
        const double s = o.sigma[i] / y_scale;
        w[static_cast<Eigen::Index>(i)] = 1.0 / (s * s);
    }
    return w;
}

std::vector<FitPoint> scaled(std::span<const FitPoint> pts, double y_scale) {
    std::vector<FitPoint> out(pts.begin(), pts.end());
    for (auto& p : out) p.y /= y_scale;
    return out;
}

}  // namespace

DecayModel parse_decay_model(const std::string& id) {
    if (id == "exp4") return DecayModel::Exp4;
    if (id == "mims") return DecayModel::Mims;
    if (id == "exp_t1") return DecayModel::ExpT1;
    throw InvalidParameter("unknown fit model '" + id + "' (expected exp4, mims or exp_t1)");
}

std::string decay_model_id(DecayModel model) {
    switch (model) {
        case DecayModel::Exp4: return "exp4";
        case DecayModel::Mims: return "mims";
        case DecayModel::ExpT1: return "exp_t1";
    }
    return "";
}

const FitParameter& DecayFit::param(const std::string& name) const {
    for (const auto& p : params) {
        if (p.name == name) return p;
    }
    throw InvalidParameter("fit has no parameter '" + name + "'");
}

double decay_model_value(DecayModel model, std::span<const double> p, double x) {
    switch (model) {
        case DecayModel::Exp4: return p[0] * std::exp(-4.0 * x / p[1]);
        case DecayModel::Mims: return p[0] * std::exp(-2.0 * std::pow(2.0 * x / p[1], p[2]));
        case DecayModel::ExpT1: return p[0] * std::exp(-x / p[1]) + (p.size() > 2 ? p[2] : 0.0);
    }
    return 0.0;
}

double DecayFit::evaluate(double x) const {
    std::vector<double> p;
    for (const auto& q : params) p.push_back(q.value);
    return decay_model_value(model, p, x);
}

DecayFit fit_efficiency_decay(std::span<const FitPoint> points, const FitOptions& o) {
    check_points(points, 3, false);
    const double ys = max_abs_y(points);
    if (ys == 0.0) throw FitError("degenerate fit: all ordinates are zero");
    const auto pts = scaled(points, ys);
    const auto [a, k] = initial_guess(pts, 4.0);
    Eigen::VectorXd p0(2);
    p0 << a, k;
    const auto s = levenberg_marquardt(exp_model(4.0, false), p0, pts, sigma_weights(o, pts.size(), ys),
                                       o.max_iterations);
    return finish(DecayModel::Exp4, s, pts, {"eta_o", "T2"}, ys, !o.sigma.empty(), max_x(pts));
}

DecayFit fit_mims(std::span<const FitPoint> points, const FitOptions& o) {
    check_points(points, 4, true);
    const double ys = max_abs_y(points);
    if (ys == 0.0) throw FitError("degenerate fit: all ordinates are zero");
    const auto pts = scaled(points, ys);
    const auto [a, k] = initial_guess(pts, 4.0);
    Eigen::VectorXd p0(3);
    p0 << a, k, 1.0;
    const auto s = levenberg_marquardt(mims_model(), p0, pts, sigma_weights(o, pts.size(), ys),
                                       o.max_iterations);
    auto f = finish(DecayModel::Mims, s, pts, {"I0", "T2", "chi"}, ys, !o.sigma.empty(), max_x(pts));
    if (f.unbounded) throw FitError("degenerate fit: no decay in the data");
    return f;
}

DecayFit fit_t1(std::span<const FitPoint> points, const FitOptions& o) {
    check_points(points, 3, false);
    const double ys = max_abs_y(points);
    if (ys == 0.0) throw FitError("degenerate fit: all ordinates are zero");
    const auto pts = scaled(points, ys);
    auto [a, k] = initial_guess(pts, 1.0);
    const int np = o.background ? 3 : 2;
    Eigen::VectorXd p0(np);
    if (o.background) {
        double floor = pts.front().y;
        for (const auto& p : pts) floor = std::min(floor, p.y);
        p0 << a - floor, k, floor;
    } else {
        p0 << a, k;
    }
    const Model model = exp_model(1.0, o.background);
    bool poisson = false;
    if (o.sigma.empty() && o.poisson_for_low_counts) {
        poisson = std::any_of(points.begin(), points.end(), [](const FitPoint& p) { return p.y < 25.0; });
    }
    Eigen::VectorXd w = sigma_weights(o, pts.size(), ys);
    Solution s = levenberg_marquardt(model, p0, pts, w, o.max_iterations);
    if (poisson) {
        // Iteratively reweighted: variance of a count equals its expectation.
        Eigen::VectorXd g(np);
        for (int pass = 0; pass < 4; ++pass) {
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double mu = model.eval(s.p, pts[i].x, g) * ys;
                w[static_cast<Eigen::Index>(i)] = ys * ys / std::max(mu, 0.5);
            }
            s = levenberg_marquardt(model, s.p, pts, w, o.max_iterations);
        }
    }
    std::vector<std::string> names = {"C0", "T1"};
    if (o.background) names.push_back("B");
    auto f = finish(DecayModel::ExpT1, s, pts, names, ys, !o.sigma.empty() || poisson, max_x(pts));
    f.poisson_weighted = poisson;
    if (o.background && std::abs(s.p[0]) <= 1e-9 * std::max(std::abs(s.p[2]), 1e-300)) {
        f.unbounded = true;
        f.params[1].value = std::numeric_limits<double>::infinity();
        f.params[1].sigma = std::numeric_limits<double>::infinity();
    }
    return f;
}

DecayFit fit_decay(DecayModel model, std::span<const FitPoint> points, const FitOptions& options) {
    switch (model) {
        case DecayModel::Exp4: return fit_efficiency_decay(points, options);
        case DecayModel::Mims: return fit_mims(points, options);
        case DecayModel::ExpT1: return fit_t1(points, options);
    }
    throw InvalidParameter("unknown fit model");
}

}  // namespace cppe
