#include "sqcomm/linalg_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sqcomm/errors.hpp"

namespace sqcomm {

namespace {

using full_svd = Eigen::BDCSVD<rmatrix>;

full_svd decompose(const rmatrix& a) {
    if (a.size() == 0) throw zero_matrix("svd: empty matrix");
    if (a.cwiseAbs().maxCoeff() == 0.0) throw zero_matrix("svd: zero matrix");
    return full_svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

std::size_t numerical_rank(const rvector& sigma) {
    if (sigma.size() == 0) return 0;
    const double cut = rank_cutoff * sigma[0];
    std::size_t r = 0;
    while (r < static_cast<std::size_t>(sigma.size()) && sigma[static_cast<Eigen::Index>(r)] > cut) ++r;
    return r;
}

template <class Vec>
Vec fast_hadamard(std::size_t n, Vec v, bool normalize) {
    const std::size_t size = static_cast<std::size_t>(v.size());
    if (n >= 63 || size != (std::size_t{1} << n))
        throw bad_dimension("hadamard: expected 2^" + std::to_string(n) + " entries, got " +
                            std::to_string(size));
    for (std::size_t h = 1; h < size; h <<= 1) {
        for (std::size_t i = 0; i < size; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const auto x = v[static_cast<Eigen::Index>(j)];
                const auto y = v[static_cast<Eigen::Index>(j + h)];
                v[static_cast<Eigen::Index>(j)] = x + y;
                v[static_cast<Eigen::Index>(j + h)] = x - y;
            }
        }
    }
    if (normalize) v /= std::sqrt(static_cast<double>(size));
    return v;
}

} // namespace

rmatrix svd_factors::reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }

svd_factors svd(const rmatrix& a) {
    const full_svd dec = decompose(a);
    const auto r = static_cast<Eigen::Index>(numerical_rank(dec.singularValues()));
    return {dec.singularValues().head(r), dec.matrixU().leftCols(r), dec.matrixV().leftCols(r)};
}

rmatrix pseudoinverse(const rmatrix& a) {
    const svd_factors f = svd(a);
    return f.v * f.sigma.cwiseInverse().asDiagonal() * f.u.transpose();
}

rvector pinv_solve(const rmatrix& a, const rvector& b) {
    if (a.rows() != b.size()) throw dimension_mismatch("pinv_solve: A has " + std::to_string(a.rows()) +
                                                       " rows but b has " + std::to_string(b.size()));
    const svd_factors f = svd(a);
    const rvector coeff = (f.u.transpose() * b).cwiseQuotient(f.sigma);
    return f.v * coeff;
}

problem_params params(const rmatrix& a, const rvector& b) {
    if (b.size() == 0 || b.norm() == 0.0) throw gamma_undefined("params: b is zero");
    const svd_factors f = svd(a);
    const double sigma_min = f.sigma[f.sigma.size() - 1];
    const rvector x = pinv_solve(a, b);

    problem_params p;
    p.kappa_f = a.norm() / sigma_min;
    p.kappa = f.sigma[0] / sigma_min;
    p.gamma = (a * x).norm() / b.norm();
    p.rank = f.rank();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const auto nnz = static_cast<std::size_t>((a.row(i).array() != 0.0).count());
        p.sparsity = std::max(p.sparsity, nnz);
    }
    return p;
}

rmatrix threshold_svd(const rmatrix& a, double delta) {
    if (!(delta > 0.0)) throw invalid_argument("threshold_svd: delta must be positive");
    rmatrix out = rmatrix::Zero(a.rows(), a.cols());
    if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) return out;
    const svd_factors f = svd(a);
    for (Eigen::Index i = 0; i < f.sigma.size(); ++i)
        if (f.sigma[i] >= delta) out += f.sigma[i] * f.u.col(i) * f.v.col(i).transpose();
    return out;
}

top_singular_result top_singular(const rmatrix& a) {
    const full_svd dec = decompose(a);
    const rvector& s = dec.singularValues();
    top_singular_result out;
    out.sigma = s[0];
    out.v = dec.matrixV().col(0);
    out.degenerate = s.size() > 1 && s[1] >= s[0] * (1.0 - 1e-9);
    return out;
}

namespace {

Eigen::SelfAdjointEigenSolver<cmatrix> hermitian_eigen(const cmatrix& a) {
    if (a.rows() != a.cols()) throw bad_dimension("expm: matrix is not square");
    if (a.rows() == 0 || static_cast<std::size_t>(a.rows()) > max_dense_dimension)
        throw bad_dimension("expm: dimension " + std::to_string(a.rows()) + " outside [1, 4096]");
    if ((a - a.adjoint()).norm() > 1e-10) throw not_hermitian("expm: ||A - A^dagger||_F > 1e-10");
    Eigen::SelfAdjointEigenSolver<cmatrix> eig(a);
    if (eig.info() != Eigen::Success) throw numerical_failure("expm: eigendecomposition failed");
    return eig;
}

cvector phases(const rvector& lambda, double t) {
    cvector p(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) p[i] = std::polar(1.0, lambda[i] * t);
    return p;
}

} // namespace

cmatrix expm(const cmatrix& a, double t) {
    const auto eig = hermitian_eigen(a);
    const cmatrix& q = eig.eigenvectors();
    cmatrix u = q * phases(eig.eigenvalues(), t).asDiagonal() * q.adjoint();
    const double drift =
        (u.adjoint() * u - cmatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
    if (drift > 1e-9) throw numerical_failure("expm: result is not unitary");
    return u;
}

cvector expm_apply(const cmatrix& a, double t, const cvector& v) {
    if (v.size() != a.rows()) throw bad_dimension("expm_apply: vector length does not match A");
    const auto eig = hermitian_eigen(a);
    const cmatrix& q = eig.eigenvectors();
    const cvector out = q * phases(eig.eigenvalues(), t).cwiseProduct(q.adjoint() * v);
    const double before = v.norm();
    if (std::abs(out.norm() - before) > 1e-9 * std::max(1.0, before))
        throw numerical_failure("expm_apply: norm not preserved");
    return out;
}

rvector hadamard_apply(std::size_t n, const rvector& v) { return fast_hadamard(n, v, true); }
cvector hadamard_apply(std::size_t n, const cvector& v) { return fast_hadamard(n, v, true); }

rmatrix hadamard_matrix(std::size_t n) {
    const std::size_t size = std::size_t{1} << n;
    rmatrix h(size, size);
    const double scale = 1.0 / std::sqrt(static_cast<double>(size));
    for (std::size_t x = 0; x < size; ++x)
        for (std::size_t y = 0; y < size; ++y)
            h(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) =
                (std::popcount(x & y) % 2 == 0) ? scale : -scale;
    return h;
}

std::size_t log2_exact(std::size_t size) {
    if (size == 0 || !std::has_single_bit(size))
        throw bad_dimension("length " + std::to_string(size) + " is not a power of two");
    return static_cast<std::size_t>(std::countr_zero(size));
}

rvector walsh_hadamard(const rvector& v) {
    return fast_hadamard(log2_exact(static_cast<std::size_t>(v.size())), v, false);
}

std::vector<double> dsp_distribution(std::span<const int> f, std::span<const int> g) {
    if (f.size() != g.size()) throw bad_dimension("dsp_distribution: f and g differ in length");
    log2_exact(f.size());
    rvector fg(static_cast<Eigen::Index>(f.size()));
    for (std::size_t x = 0; x < f.size(); ++x) {
        if ((f[x] != 1 && f[x] != -1) || (g[x] != 1 && g[x] != -1))
            throw invalid_argument("dsp_distribution: entries must be +-1");
        fg[static_cast<Eigen::Index>(x)] = f[x] * g[x];
    }
    const rvector w = walsh_hadamard(fg) / static_cast<double>(f.size());
    std::vector<double> p(f.size());
    for (std::size_t y = 0; y < p.size(); ++y) p[y] = w[static_cast<Eigen::Index>(y)] * w[static_cast<Eigen::Index>(y)];
    return p;
}

} // namespace sqcomm
