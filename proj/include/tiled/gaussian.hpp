#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiled/features.hpp"
#include "tiled/image.hpp"

namespace tiled {

// Per-cell multivariate Gaussian over patch embeddings. Population
// statistics; covariance regularized with epsilon on the diagonal.
struct GaussianPatchModel {
    int grid_h = 0;
    int grid_w = 0;
    int dim = 0;
    double epsilon = 0.01;
    std::string fingerprint;
    std::vector<double> means;        // grid_h*grid_w x dim
    std::vector<double> covariances;  // grid_h*grid_w x dim*dim, regularized

    int cell_count() const { return grid_h * grid_w; }
    std::size_t tensor_bytes() const {
        return (means.size() + covariances.size()) * sizeof(double);
    }
};

inline GaussianPatchModel fit_gaussian(const std::vector<FeatureMap>& features,
                                       double epsilon,
                                       const std::string& fingerprint = {}) {
    if (features.empty())
        throw std::invalid_argument("fit_gaussian: empty training set");
    const FeatureMap& first = features.front();
    for (const FeatureMap& fm : features)
        if (fm.grid_h != first.grid_h || fm.grid_w != first.grid_w || fm.dim != first.dim)
            throw std::invalid_argument("fit_gaussian: feature map shape mismatch");

    GaussianPatchModel model;
    model.grid_h = first.grid_h;
    model.grid_w = first.grid_w;
    model.dim = first.dim;
    model.epsilon = epsilon;
    model.fingerprint = fingerprint;
    const int d = first.dim;
    const std::size_t cells = static_cast<std::size_t>(model.cell_count());
    model.means.assign(cells * d, 0.0);
    model.covariances.assign(cells * d * d, 0.0);

    const double inv_n = 1.0 / static_cast<double>(features.size());
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const int gy = static_cast<int>(cell) / model.grid_w;
        const int gx = static_cast<int>(cell) % model.grid_w;
        double* mu = model.means.data() + cell * d;
        for (const FeatureMap& fm : features) {
            const double* f = fm.cell(gy, gx);
            for (int a = 0; a < d; ++a) mu[a] += f[a];
        }
        for (int a = 0; a < d; ++a) mu[a] *= inv_n;

        double* cov = model.covariances.data() + cell * d * d;
        for (const FeatureMap& fm : features) {
            const double* f = fm.cell(gy, gx);
            for (int a = 0; a < d; ++a)
                for (int b = a; b < d; ++b)
                    cov[a * d + b] += (f[a] - mu[a]) * (f[b] - mu[b]);
        }
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) {
                cov[a * d + b] *= inv_n;
                cov[b * d + a] = cov[a * d + b];
            }
        for (int a = 0; a < d; ++a) cov[a * d + a] += epsilon;
    }
    return model;
}

// Mahalanobis distance per cell: sqrt((x-mu)^T (Sigma+eps I)^-1 (x-mu)).
inline ScalarMap score_gaussian(const GaussianPatchModel& model, const FeatureMap& features) {
    if (features.grid_h != model.grid_h || features.grid_w != model.grid_w ||
        features.dim != model.dim)
        throw std::invalid_argument("score_gaussian: feature map shape mismatch");

    const int d = model.dim;
    ScalarMap out(model.grid_h, model.grid_w);
    Eigen::MatrixXd sigma(d, d);
    Eigen::VectorXd delta(d);
    for (int gy = 0; gy < model.grid_h; ++gy)
        for (int gx = 0; gx < model.grid_w; ++gx) {
            const std::size_t cell = static_cast<std::size_t>(gy) * model.grid_w + gx;
            const double* mu = model.means.data() + cell * d;
            const double* cov = model.covariances.data() + cell * d * d;
            const double* f = features.cell(gy, gx);
            for (int a = 0; a < d; ++a) {
                delta(a) = f[a] - mu[a];
                for (int b = 0; b < d; ++b) sigma(a, b) = cov[a * d + b];
            }
            Eigen::LLT<Eigen::MatrixXd> llt(sigma);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error(
                    "score_gaussian: regularized covariance not positive definite "
                    "(epsilon misconfigured)");
            const double m2 = delta.dot(llt.solve(delta));
            out.at(gy, gx) = std::sqrt(std::max(0.0, m2));
        }
    return out;
}

}  // namespace tiled
