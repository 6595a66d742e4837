#include <tisp/linalg.hpp>

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include <tisp/random.hpp>

namespace tisp {

SpectralNormResult spectral_norm(const Matrix& X, const PowerIterationOptions& opts)
{
    SpectralNormResult out;
    // All-zero columns do not change the norm; leave them out so that padding
    // a design with zero columns gives bit-identical iterates.
    const auto zero = zero_columns(X);
    if (std::find(zero.begin(), zero.end(), true) != zero.end()) {
        std::vector<Index> keep;
        for (Index j = 0; j < X.cols(); ++j) {
            if (!zero[static_cast<std::size_t>(j)]) keep.push_back(j);
        }
        const Matrix reduced = X(Eigen::all, keep);
        return spectral_norm(reduced, opts);
    }
    const Index p = X.cols();
    if (p == 0 || X.rows() == 0) {
        out.converged = true;
        return out;
    }

    Vector v = Vector::Ones(p).normalized();
    Vector w = X.transpose() * (X * v);
    double q = v.dot(w);
    if (q <= 0.0) {
        CounterRng rng(opts.fallback_seed);
        for (Index j = 0; j < p; ++j) v(j) = rng.normal();
        v.normalize();
        w = X.transpose() * (X * v);
        q = v.dot(w);
    }
    if (q <= 0.0) {
        // X is (numerically) zero.
        out.converged = true;
        return out;
    }

    for (int it = 1; it <= opts.max_iter; ++it) {
        v = w / w.norm();
        w = X.transpose() * (X * v);
        const double q_new = v.dot(w);
        out.iterations = it;
        const bool done = std::abs(q_new - q) <= opts.rel_tol * q_new;
        q = q_new;
        if (done) {
            out.converged = true;
            break;
        }
    }
    // The power estimate is a lower bound, and the step-size certificate sits
    // right at the boundary, so polish it on the smaller Gram when affordable.
    if (std::min(X.rows(), p) <= opts.dense_limit) {
        const Matrix G = X.rows() < p ? Matrix(X * X.transpose()) : Matrix(X.transpose() * X);
        Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
        if (es.info() == Eigen::Success) q = std::max(q, es.eigenvalues().maxCoeff());
    }
    out.norm = std::sqrt(q);
    return out;
}

Vector normalize_columns(Matrix& X)
{
    Vector scales = Vector::Ones(X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        const double n = X.col(j).norm();
        if (n > 0.0) {
            X.col(j) /= n;
            scales(j) = n;
        }
    }
    return scales;
}

std::vector<bool> zero_columns(const Matrix& X)
{
    std::vector<bool> zero(static_cast<std::size_t>(X.cols()));
    for (Index j = 0; j < X.cols(); ++j) {
        zero[static_cast<std::size_t>(j)] = (X.col(j).array() == 0.0).all();
    }
    return zero;
}

} // namespace tisp
