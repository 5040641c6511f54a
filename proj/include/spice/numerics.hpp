#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace spice {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FactorizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Solves A x = b for symmetric positive-definite A via Cholesky.
inline Vector solve_spd(const Matrix& a, const Vector& b)
{
    if (a.rows() != a.cols()) {
        throw ArgumentError("solve_spd: matrix is not square");
    }
    if (a.rows() != b.size()) {
        throw ArgumentError("solve_spd: dimension mismatch (" + std::to_string(a.rows()) + " vs " +
                            std::to_string(b.size()) + ")");
    }
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale > 0.0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ArgumentError("solve_spd: matrix is not symmetric");
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw FactorizationError("solve_spd: non-positive pivot in Cholesky factorization");
    }
    Vector x = llt.solve(b);
    // one step of iterative refinement keeps the relative residual near machine precision
    // for the badly conditioned systems that come out of large scaling factors
    const Vector residual = b - a * x;
    x += llt.solve(residual);
    return x;
}

struct PowerIterationOptions {
    int max_iterations = 1000;
    double tolerance = 1e-10;
    double stall_tolerance = 1e-14;
};

struct PowerIterationResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Largest eigenvalue of M^T M (the squared spectral norm of M) by power iteration.
///
/// Starts from the normalized all-ones vector and applies M then M^T, so M^T M is
/// never formed. Stops when the Rayleigh quotient changes by less than
/// `tolerance` (relative). A change below `stall_tolerance` before that is
/// reported as converged = false with the current estimate.
inline PowerIterationResult spectral_norm_sq_detailed(const Matrix& m,
                                                      const PowerIterationOptions& opts = {})
{
    if (m.size() == 0) {
        throw ArgumentError("spectral_norm_sq: empty matrix");
    }
    PowerIterationResult out;
    Vector v = Vector::Ones(m.cols()).normalized();
    double estimate = 0.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Vector mv = m * v;
        const double rayleigh = mv.squaredNorm();
        out.iterations = it;
        Vector next = m.transpose() * mv;
        const double norm = next.norm();
        if (norm == 0.0) {
            // v is in the null space of M; all-ones start on a zero matrix lands here
            out.value = rayleigh;
            out.converged = true;
            return out;
        }
        const double change = std::abs(rayleigh - estimate);
        estimate = rayleigh;
        v = next / norm;
        if (it > 1 && change <= opts.tolerance * rayleigh) {
            out.converged = true;
            break;
        }
        if (it > 1 && change <= opts.stall_tolerance * rayleigh) {
            break;
        }
    }
    // the last normalized iterate gives a Rayleigh quotient at least as good as the previous one
    out.value = std::max(estimate, (m * v).squaredNorm());
    return out;
}

inline double spectral_norm_sq(const Matrix& m, const PowerIterationOptions& opts = {})
{
    return spectral_norm_sq_detailed(m, opts).value;
}

inline double frobenius_norm_sq(const Matrix& m) { return m.squaredNorm(); }

/// Deterministic generator: std::mt19937_64 (whose output sequence the C++ standard fixes)
/// feeding 53-bit uniforms into the Box-Muller transform.
///
/// Normal draws come in pairs; the second value of each pair is cached and
/// returned by the next call.
class SeededRng {
public:
    static constexpr const char* algorithm_id = "mt19937_64+box-muller";

    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform()
    {
        const std::uint64_t bits = engine_() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// rows x cols matrix of scale * N(0,1), drawn in row-major order.
inline Matrix gaussian_matrix(SeededRng& rng, Eigen::Index rows, Eigen::Index cols, double scale)
{
    if (rows < 1 || cols < 1) {
        throw ArgumentError("gaussian_matrix: shape must be at least 1x1");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = scale * rng.normal();
        }
    }
    return m;
}

inline Vector gaussian_vector(SeededRng& rng, Eigen::Index len, double scale)
{
    if (len < 1) {
        throw ArgumentError("gaussian_vector: length must be at least 1");
    }
    Vector v(len);
    for (Eigen::Index i = 0; i < len; ++i) {
        v(i) = scale * rng.normal();
    }
    return v;
}

} // namespace spice
