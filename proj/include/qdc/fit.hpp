// fit.hpp - Levenberg-Marquardt least squares with finite-difference Jacobians
// and a small nonnegative linear least-squares solver.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace qdc {

struct FitOptions {
    int max_iterations = 500;
    double ftol = 1e-14;     // relative decrease of the cost
    double xtol = 1e-12;     // relative parameter step
    double gtol = 1e-14;     // scaled gradient
    double fd_step = 1e-6;   // relative central-difference step
    double lambda_initial = 1e-3;
};

struct FitResult {
    Eigen::VectorXd params;
    Eigen::VectorXd errors;      // 1 sigma, covariance scaled by reduced chi^2
    Eigen::MatrixXd covariance;
    double chi2 = 0.0;
    double reduced_chi2 = 0.0;
    int dof = 0;
    int iterations = 0;
};

class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, double residual_norm)
        : std::runtime_error(what), residual_norm_(residual_norm) {}
    double residual_norm() const noexcept { return residual_norm_; }

private:
    double residual_norm_;
};

// Writes the (weighted) residual vector for parameters p into r.
using ResidualFunction = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)>;

// Jacobian of the residuals by central differences, step fd_step * max(|p_j|, 1e-3).
Eigen::MatrixXd numerical_jacobian(const ResidualFunction& f, const Eigen::VectorXd& p, Eigen::Index m,
                                   double fd_step);

// Minimizes |r(p)|^2 starting from p0; m is the number of residuals.
FitResult levenberg_marquardt(const ResidualFunction& f, const Eigen::VectorXd& p0, Eigen::Index m,
                              const FitOptions& opts = {});

// Runs levenberg_marquardt from every start and returns the lowest-chi^2 result.
FitResult fit_multistart(const ResidualFunction& f, const std::vector<Eigen::VectorXd>& starts, Eigen::Index m,
                         const FitOptions& opts = {});

// min |A x - b| subject to x >= 0 (Lawson-Hanson active set).
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace qdc
