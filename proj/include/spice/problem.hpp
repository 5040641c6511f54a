#pragma once

#include "spice/numerics.hpp"

#include <algorithm>
#include <concepts>
#include <functional>
#include <optional>
#include <vector>

namespace spice {

enum class DualKind { Nonnegative, Free };

/// Per-coordinate description of the dual domain: inequality rows live in R_+,
/// equality rows are unconstrained.
class DualDomain {
public:
    DualDomain() = default;
    explicit DualDomain(std::vector<DualKind> kinds) : kinds_(std::move(kinds))
    {
        if (kinds_.empty()) {
            throw ArgumentError("DualDomain: needs at least one coordinate");
        }
    }

    static DualDomain nonnegative(Eigen::Index p) { return DualDomain(std::vector<DualKind>(p, DualKind::Nonnegative)); }
    static DualDomain free(Eigen::Index p) { return DualDomain(std::vector<DualKind>(p, DualKind::Free)); }

    /// `inequalities` nonnegative rows followed by `equalities` free rows.
    static DualDomain mixed(Eigen::Index inequalities, Eigen::Index equalities)
    {
        std::vector<DualKind> kinds(inequalities, DualKind::Nonnegative);
        kinds.insert(kinds.end(), equalities, DualKind::Free);
        return DualDomain(std::move(kinds));
    }

    Eigen::Index size() const { return static_cast<Eigen::Index>(kinds_.size()); }
    DualKind kind(Eigen::Index i) const { return kinds_[static_cast<std::size_t>(i)]; }
    bool is_inequality(Eigen::Index i) const { return kind(i) == DualKind::Nonnegative; }

    bool contains(const Vector& lambda) const
    {
        if (lambda.size() != size()) {
            return false;
        }
        for (Eigen::Index i = 0; i < size(); ++i) {
            if (is_inequality(i) && !(lambda(i) >= 0.0)) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<DualKind> kinds_;
};

inline Vector project_dual(const DualDomain& domain, const Vector& lambda)
{
    if (lambda.size() != domain.size()) {
        throw ArgumentError("project_dual: length mismatch");
    }
    Vector out = lambda;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (domain.is_inequality(i)) {
            out(i) = std::max(out(i), 0.0);
        }
    }
    return out;
}

/// Primal block(s) and dual vector. `y` is empty for single-block problems.
struct Iterate {
    Vector x;
    Vector y;
    Vector lambda;

    bool two_block() const { return y.size() > 0; }

    /// w = (x, [y,] lambda)
    Vector stacked() const
    {
        Vector w(x.size() + y.size() + lambda.size());
        w << x, y, lambda;
        return w;
    }
};

enum class Block { X, Y };

/// Arguments of the primal prediction subproblem
///   argmin_v  rho * f_b(v) + lambda^T Phi_b(v) / eta + (r/2) ||v - anchor||^2.
struct PredictionRequest {
    const Vector& lambda;
    double rho;
    double eta;
    double r;
    const Vector& anchor;
};

enum class NormMode { Spectral, Frobenius };

/// What the solver needs from a problem. Block Y oracles are only queried when
/// block_count() == 2; the coupled constraint is Phi(x) + Psi(y) <= 0 (or = 0 on
/// free dual rows).
template <class P>
concept SpiceProblem = requires(const P& prob, Block b, const Vector& v, const PredictionRequest& req) {
    { prob.block_count() } -> std::convertible_to<int>;
    { prob.dim(b) } -> std::convertible_to<Eigen::Index>;
    { prob.dual_domain() } -> std::convertible_to<const DualDomain&>;
    { prob.objective(b, v) } -> std::convertible_to<double>;
    { prob.constraints(b, v) } -> std::convertible_to<Vector>;
    { prob.jacobian(b, v) } -> std::convertible_to<Matrix>;
    { prob.predict(b, req) } -> std::convertible_to<Vector>;
};

/// Oracles for one primal block.
struct BlockOracles {
    Eigen::Index dim = 0;
    std::function<double(const Vector&)> objective;
    std::function<Vector(const Vector&)> constraints;
    std::function<Matrix(const Vector&)> jacobian;
    std::function<Vector(const PredictionRequest&)> predict;
};

/// Type-erased problem assembled from callables; useful for small hand-written
/// problems and for wrapping anything that is not worth a dedicated class.
class ProblemInstance {
public:
    ProblemInstance(BlockOracles x, DualDomain domain) : blocks_{std::move(x), {}}, domain_(std::move(domain)) {}
    ProblemInstance(BlockOracles x, BlockOracles y, DualDomain domain)
        : blocks_{std::move(x), std::move(y)}, domain_(std::move(domain)), two_block_(true)
    {
    }

    int block_count() const { return two_block_ ? 2 : 1; }
    Eigen::Index dim(Block b) const { return oracles(b).dim; }
    const DualDomain& dual_domain() const { return domain_; }

    double objective(Block b, const Vector& v) const { return oracles(b).objective(v); }
    Vector constraints(Block b, const Vector& v) const { return oracles(b).constraints(v); }
    Matrix jacobian(Block b, const Vector& v) const { return oracles(b).jacobian(v); }
    Vector predict(Block b, const PredictionRequest& req) const
    {
        if (!oracles(b).predict) {
            throw ArgumentError("ProblemInstance: no prediction oracle attached");
        }
        return oracles(b).predict(req);
    }

private:
    const BlockOracles& oracles(Block b) const { return b == Block::X ? blocks_[0] : blocks_[1]; }

    BlockOracles blocks_[2];
    DualDomain domain_;
    bool two_block_ = false;
};

static_assert(SpiceProblem<ProblemInstance>);

template <SpiceProblem P>
void check_dimensions(const P& prob, const Iterate& it)
{
    if (it.x.size() != prob.dim(Block::X)) {
        throw ArgumentError("iterate x has wrong dimension");
    }
    if (prob.block_count() == 2 ? it.y.size() != prob.dim(Block::Y) : it.y.size() != 0) {
        throw ArgumentError("iterate y has wrong dimension");
    }
    if (it.lambda.size() != prob.dual_domain().size()) {
        throw ArgumentError("iterate lambda has wrong dimension");
    }
}

/// f(x), or f(x) + g(y) for two-block problems.
template <SpiceProblem P>
double eval_objective(const P& prob, const Iterate& it)
{
    check_dimensions(prob, it);
    double value = prob.objective(Block::X, it.x);
    if (prob.block_count() == 2) {
        value += prob.objective(Block::Y, it.y);
    }
    return value;
}

/// Phi(x) [+ Psi(y)]
template <SpiceProblem P>
Vector constraint_value(const P& prob, const Vector& x, const Vector& y)
{
    Vector c = prob.constraints(Block::X, x);
    if (prob.block_count() == 2) {
        c += prob.constraints(Block::Y, y);
    }
    return c;
}

/// Gamma(w) = (DPhi(x)^T lambda; [DPsi(y)^T lambda;] -Phi(x) [-Psi(y)])
template <SpiceProblem P>
Vector gamma_operator(const P& prob, const Iterate& it)
{
    check_dimensions(prob, it);
    const Vector top_x = prob.jacobian(Block::X, it.x).transpose() * it.lambda;
    Vector top_y;
    if (prob.block_count() == 2) {
        top_y = prob.jacobian(Block::Y, it.y).transpose() * it.lambda;
    }
    const Vector bottom = -constraint_value(prob, it.x, it.y);
    Vector out(top_x.size() + top_y.size() + bottom.size());
    out << top_x, top_y, bottom;
    return out;
}

inline double matrix_norm_sq(const Matrix& m, NormMode mode)
{
    if (mode == NormMode::Frobenius) {
        return frobenius_norm_sq(m);
    }
    // tighter than the default: the solver's G_k margin is checked at 1e-10 absolute
    return spectral_norm_sq(m, PowerIterationOptions{1000, 1e-15, 1e-16});
}

/// R(u) = ||DPhi(x)||^2 [+ ||DPsi(y)||^2]
template <SpiceProblem P>
double jacobian_norm_sq(const P& prob, const Vector& x, const Vector& y, NormMode mode)
{
    double value = matrix_norm_sq(prob.jacobian(Block::X, x), mode);
    if (prob.block_count() == 2) {
        value += matrix_norm_sq(prob.jacobian(Block::Y, y), mode);
    }
    return value;
}

struct KktResidual {
    double feasibility = 0.0;
    double complementarity = 0.0;
    double stationarity_proxy = 0.0;
};

/// Feasibility and complementarity at `it`; the stationarity proxy is the
/// prediction gap ||w - w_bar|| when a predictor computed at `it` is supplied.
template <SpiceProblem P>
KktResidual kkt_residual(const P& prob, const Iterate& it, const std::optional<Iterate>& predictor = std::nullopt)
{
    check_dimensions(prob, it);
    const DualDomain& domain = prob.dual_domain();
    const Vector phi = constraint_value(prob, it.x, it.y);
    KktResidual out;
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        if (domain.is_inequality(i)) {
            out.feasibility = std::max(out.feasibility, std::max(phi(i), 0.0));
            out.complementarity = std::max(out.complementarity, std::abs(it.lambda(i) * phi(i)));
        } else {
            out.feasibility = std::max(out.feasibility, std::abs(phi(i)));
        }
    }
    if (predictor) {
        out.stationarity_proxy = (it.stacked() - predictor->stacked()).norm();
    }
    return out;
}

} // namespace spice
