#include "qdc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qdc {

Eigen::MatrixXd numerical_jacobian(const ResidualFunction& f, const Eigen::VectorXd& p, Eigen::Index m,
                                   double fd_step) {
    const Eigen::Index n = p.size();
    Eigen::MatrixXd J(m, n);
    Eigen::VectorXd rp(m), rm(m), q = p;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = fd_step * std::max(std::abs(p[j]), 1e-3);
        q[j] = p[j] + h;
        f(q, rp);
        q[j] = p[j] - h;
        f(q, rm);
        q[j] = p[j];
        J.col(j) = (rp - rm) / (2.0 * h);
    }
    return J;
}

FitResult levenberg_marquardt(const ResidualFunction& f, const Eigen::VectorXd& p0, Eigen::Index m,
                              const FitOptions& opts) {
    const Eigen::Index n = p0.size();
    if (m < n) throw std::invalid_argument("levenberg_marquardt: fewer residuals than parameters");
    Eigen::VectorXd p = p0, r(m), r_new(m);
    f(p, r);
    if (!r.allFinite()) throw FitError("levenberg_marquardt: non-finite residuals at the start point", INFINITY);
    double cost = r.squaredNorm();

    Eigen::MatrixXd J = numerical_jacobian(f, p, m, opts.fd_step);
    Eigen::MatrixXd A = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * r;
    double lambda = opts.lambda_initial;
    bool converged = false;
    int it = 0;

    for (; it < opts.max_iterations && !converged; ++it) {
        if (g.lpNorm<Eigen::Infinity>() <= opts.gtol * std::max(cost, 1e-300) || cost < 1e-300) {
            converged = true;
            break;
        }
        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd Ad = A;
            for (Eigen::Index j = 0; j < n; ++j) Ad(j, j) += lambda * std::max(A(j, j), 1e-12);
            const Eigen::VectorXd delta = Ad.ldlt().solve(-g);
            const Eigen::VectorXd p_new = p + delta;
            f(p_new, r_new);
            const double cost_new = r_new.allFinite() ? r_new.squaredNorm() : INFINITY;
            if (cost_new < cost) {
                const double drop = cost - cost_new;
                const bool small_step = delta.norm() <= opts.xtol * (p.norm() + opts.xtol);
                p = p_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-15);
                accepted = true;
                if (drop <= opts.ftol * cost || small_step) converged = true;
                J = numerical_jacobian(f, p, m, opts.fd_step);
                A = J.transpose() * J;
                g = J.transpose() * r;
            } else {
                lambda *= 4.0;
                if (lambda > 1e16) {
                    // No downhill step exists at machine precision: a minimum.
                    converged = true;
                    break;
                }
            }
        }
    }
    if (!converged) {
        throw FitError("levenberg_marquardt: no convergence after " + std::to_string(it) + " iterations",
                       std::sqrt(cost));
    }

    FitResult res;
    res.params = p;
    res.chi2 = cost;
    res.dof = static_cast<int>(m - n);
    res.reduced_chi2 = res.dof > 0 ? cost / res.dof : 0.0;
    res.iterations = it;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    res.covariance = cod.pseudoInverse() * res.reduced_chi2;
    res.errors = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return res;
}

FitResult fit_multistart(const ResidualFunction& f, const std::vector<Eigen::VectorXd>& starts, Eigen::Index m,
                         const FitOptions& opts) {
    if (starts.empty()) throw std::invalid_argument("fit_multistart: no start points");
    FitResult best;
    bool have = false;
    double last_norm = INFINITY;
    for (const auto& s : starts) {
        try {
            FitResult r = levenberg_marquardt(f, s, m, opts);
            if (!have || r.chi2 < best.chi2) {
                best = std::move(r);
                have = true;
            }
        } catch (const FitError& e) {
            last_norm = e.residual_norm();
        }
    }
    if (!have) throw FitError("fit_multistart: every start failed", last_norm);
    return best;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const Eigen::Index n = A.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(n, false);
    const double tol = 1e-12 * A.norm() * std::max(b.norm(), 1.0);

    const auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (passive[j]) idx.push_back(j);
        }
        z.setZero(n);
        if (idx.empty()) return;
        Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
        const Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
        for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[static_cast<Eigen::Index>(k)];
    };

    for (int outer = 0; outer < 3 * n + 10; ++outer) {
        const Eigen::VectorXd w = A.transpose() * (b - A * x);
        Eigen::Index best = -1;
        double wmax = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!passive[j] && w[j] > wmax) {
                wmax = w[j];
                best = j;
            }
        }
        if (best < 0) break;
        passive[best] = true;
        Eigen::VectorXd z;
        for (int inner = 0; inner < 3 * n + 10; ++inner) {
            solve_passive(z);
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[j] && z[j] <= 0.0) feasible = false;
            }
            if (feasible) break;
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[j] && z[j] <= 0.0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
            }
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[j] && std::abs(x[j]) <= 1e-15) {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
        x = z.cwiseMax(0.0);
    }
    return x;
}

}  // namespace qdc
