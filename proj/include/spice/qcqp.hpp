#pragma once

#include "spice/problem.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace spice::qcqp {

enum class Structure { Single, Separable };

inline const char* to_string(Structure s) { return s == Structure::Single ? "single" : "separable"; }

/// How the common constraint bound pi is chosen.
enum class BoundRule {
    Fixed,          // pi = QcqpConfig::pi
    ActiveFraction, // pi = pi_fraction * min_i (constraint value i at the unconstrained minimizer)
};

struct QcqpConfig {
    Structure structure = Structure::Single;
    Eigen::Index n = 50;
    Eigen::Index m = 50; // separable only
    Eigen::Index q = 60;
    Eigen::Index p = 5;
    double scale_w0 = 1.0;
    double scale_a0 = 12.0;
    double scale_wi = 1.0;
    double scale_ai = 0.1;
    BoundRule bound_rule = BoundRule::Fixed;
    double pi = 500000.0;
    double pi_fraction = 0.5;
    std::uint64_t seed = 0;

    static double default_pi(Structure s) { return s == Structure::Single ? 500000.0 : 1000000.0; }

    void validate() const
    {
        if (n < 1 || q < 1 || p < 1 || (structure == Structure::Separable && m < 1)) {
            throw ArgumentError("QcqpConfig: dimensions must be at least 1");
        }
        if (bound_rule == BoundRule::Fixed && !(pi > 0.0)) {
            throw ArgumentError("QcqpConfig: pi must be positive");
        }
        if (bound_rule == BoundRule::ActiveFraction && !(pi_fraction > 0.0)) {
            throw ArgumentError("QcqpConfig: pi_fraction must be positive");
        }
    }
};

/// Instance data. Index 0 of w/a/v/c is the objective term; 1..p are constraints.
struct QcqpData {
    Structure structure = Structure::Single;
    std::uint64_t seed = 0;
    double scale_w0 = 1.0;
    double scale_a0 = 12.0;
    double scale_wi = 1.0;
    double scale_ai = 0.1;
    std::vector<Matrix> w;
    std::vector<Vector> a;
    std::vector<Matrix> v;
    std::vector<Vector> c;
    std::vector<double> pi;

    // W_i^T W_i, W_i^T a_i (and the V counterparts), filled by build_caches()
    std::vector<Matrix> wtw;
    std::vector<Vector> wta;
    std::vector<Matrix> vtv;
    std::vector<Vector> vtc;

    Eigen::Index n() const { return w.front().cols(); }
    Eigen::Index m() const { return structure == Structure::Separable ? v.front().cols() : 0; }
    Eigen::Index q() const { return w.front().rows(); }
    Eigen::Index p() const { return static_cast<Eigen::Index>(pi.size()); }

    void build_caches()
    {
        wtw.clear();
        wta.clear();
        vtv.clear();
        vtc.clear();
        for (std::size_t i = 0; i < w.size(); ++i) {
            wtw.push_back(w[i].transpose() * w[i]);
            wta.push_back(w[i].transpose() * a[i]);
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            vtv.push_back(v[i].transpose() * v[i]);
            vtc.push_back(v[i].transpose() * c[i]);
        }
    }
};

namespace detail {

inline const std::vector<Matrix>& mats(const QcqpData& d, Block b) { return b == Block::X ? d.w : d.v; }
inline const std::vector<Vector>& vecs(const QcqpData& d, Block b) { return b == Block::X ? d.a : d.c; }
inline const std::vector<Matrix>& grams(const QcqpData& d, Block b) { return b == Block::X ? d.wtw : d.vtv; }
inline const std::vector<Vector>& moments(const QcqpData& d, Block b) { return b == Block::X ? d.wta : d.vtc; }

/// Minimum-norm least-squares solution of min ||A x - b||.
inline Vector least_squares(const Matrix& a, const Vector& b)
{
    return Eigen::CompleteOrthogonalDecomposition<Matrix>(a).solve(b);
}

/// Same argmin as primal_prediction, from a QR factorization of the weighted rows
/// [sqrt(rho) W0; sqrt(lambda_i / eta) W_i; sqrt(r / 2) I].
inline Vector stacked_prediction(const QcqpData& d, Block block, const Vector& lambda, double rho, double eta, double r,
                                 const Vector& prev)
{
    const auto& w = mats(d, block);
    const auto& a = vecs(d, block);
    const Eigen::Index q = w[0].rows();
    const Eigen::Index n = w[0].cols();
    Eigen::Index active = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        active += lambda(i) > 0.0 ? 1 : 0;
    }
    Matrix rows(q * (active + 1) + n, n);
    Vector rhs(rows.rows());
    const double w0 = std::sqrt(rho);
    rows.topRows(q) = w0 * w[0];
    rhs.head(q) = w0 * a[0];
    Eigen::Index at = q;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > 0.0) {
            const double wi = std::sqrt(lambda(i) / eta);
            const auto idx = static_cast<std::size_t>(i + 1);
            rows.middleRows(at, q) = wi * w[idx];
            rhs.segment(at, q) = wi * a[idx];
            at += q;
        }
    }
    const double wr = std::sqrt(0.5 * r);
    rows.bottomRows(n) = wr * Matrix::Identity(n, n);
    rhs.tail(n) = wr * prev;
    return Eigen::HouseholderQR<Matrix>(rows).solve(rhs);
}

} // namespace detail

/// argmin_x  rho ||W0 x - a0||^2 + (1/eta) sum_i lambda_i ||W_i x - a_i||^2 + (r/2) ||x - x_prev||^2
/// (V, c for the y block). Systems with rho > 1e6 are divided through by rho and
/// solved by QR on the stacked weighted rows.
inline Vector primal_prediction(const QcqpData& d, Block block, const Vector& lambda, double rho, double eta, double r,
                                const Vector& prev)
{
    if (!(r > 0.0)) {
        throw ArgumentError("primal_prediction: r must be positive");
    }
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < 0.0) {
            throw ArgumentError("primal_prediction: lambda must be nonnegative");
        }
    }
    if (rho > 1e6) {
        // normal equations would square a condition number that is already ~ rho / r
        return detail::stacked_prediction(d, block, lambda, 1.0, eta * rho, r / rho, prev);
    }
    const auto& gram = detail::grams(d, block);
    const auto& moment = detail::moments(d, block);
    const double obj_weight = 2.0 * rho;
    Matrix system = obj_weight * gram[0];
    Vector rhs = obj_weight * moment[0];
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const double li = lambda(i);
        if (li == 0.0) {
            continue;
        }
        const double weight = 2.0 * li / eta;
        system += weight * gram[static_cast<std::size_t>(i + 1)];
        rhs += weight * moment[static_cast<std::size_t>(i + 1)];
    }
    system.diagonal().array() += r;
    rhs += r * prev;
    try {
        return solve_spd(system, rhs);
    } catch (const FactorizationError&) {
        return detail::stacked_prediction(d, block, lambda, rho, eta, r, prev);
    }
}

inline Vector primal_prediction(const QcqpData& d, const Vector& lambda, double rho, double eta, double r,
                                const Vector& x_prev)
{
    return primal_prediction(d, Block::X, lambda, rho, eta, r, x_prev);
}

/// Per-constraint values ||W_i x - a_i||^2 [+ ||V_i y - c_i||^2] - pi_i.
inline Vector constraint_values(const QcqpData& d, const Vector& x, const Vector& y)
{
    Vector out(d.p());
    for (Eigen::Index i = 0; i < d.p(); ++i) {
        const auto idx = static_cast<std::size_t>(i + 1);
        double value = (d.w[idx] * x - d.a[idx]).squaredNorm() - d.pi[idx - 1];
        if (d.structure == Structure::Separable) {
            value += (d.v[idx] * y - d.c[idx]).squaredNorm();
        }
        out(i) = value;
    }
    return out;
}

/// lambda_bar_i = max(lambda_i + (constraint_i(x_bar, y_bar)) / (eta s), 0)
inline Vector dual_prediction(const QcqpData& d, const Vector& x_bar, const Vector& y_bar, const Vector& lambda,
                              double eta, double s)
{
    if (!(s > 0.0)) {
        throw ArgumentError("dual_prediction: s must be positive");
    }
    const Vector hat = lambda + constraint_values(d, x_bar, y_bar) / (eta * s);
    return hat.cwiseMax(0.0);
}

/// QCQP family as a SpiceProblem. The pi_i offsets sit in the x-block constraints.
class QcqpProblem {
public:
    explicit QcqpProblem(std::shared_ptr<const QcqpData> data)
        : data_(std::move(data)), domain_(DualDomain::nonnegative(data_->p()))
    {
    }

    const QcqpData& data() const { return *data_; }
    std::shared_ptr<const QcqpData> shared_data() const { return data_; }

    int block_count() const { return data_->structure == Structure::Separable ? 2 : 1; }
    Eigen::Index dim(Block b) const { return b == Block::X ? data_->n() : data_->m(); }
    const DualDomain& dual_domain() const { return domain_; }

    double objective(Block b, const Vector& v) const
    {
        return (detail::mats(*data_, b)[0] * v - detail::vecs(*data_, b)[0]).squaredNorm();
    }

    Vector constraints(Block b, const Vector& v) const
    {
        const auto& mats = detail::mats(*data_, b);
        const auto& vecs = detail::vecs(*data_, b);
        Vector out(data_->p());
        for (Eigen::Index i = 0; i < data_->p(); ++i) {
            const auto idx = static_cast<std::size_t>(i + 1);
            out(i) = (mats[idx] * v - vecs[idx]).squaredNorm();
            if (b == Block::X) {
                out(i) -= data_->pi[idx - 1];
            }
        }
        return out;
    }

    /// Row i is 2 (G_i v - b_i)^T with G_i = W_i^T W_i, b_i = W_i^T a_i.
    Matrix jacobian(Block b, const Vector& v) const
    {
        const auto& grams = detail::grams(*data_, b);
        const auto& moments = detail::moments(*data_, b);
        Matrix out(data_->p(), v.size());
        for (Eigen::Index i = 0; i < data_->p(); ++i) {
            const auto idx = static_cast<std::size_t>(i + 1);
            out.row(i) = (2.0 * (grams[idx] * v - moments[idx])).transpose();
        }
        return out;
    }

    Vector predict(Block b, const PredictionRequest& req) const
    {
        return primal_prediction(*data_, b, req.lambda, req.rho, req.eta, req.r, req.anchor);
    }

private:
    std::shared_ptr<const QcqpData> data_;
    DualDomain domain_;
};

static_assert(SpiceProblem<QcqpProblem>);

/// Unconstrained minimizer of the objective, per block (y empty when single).
inline Iterate unconstrained_minimizer(const QcqpData& d)
{
    Iterate out;
    out.x = detail::least_squares(d.w[0], d.a[0]);
    if (d.structure == Structure::Separable) {
        out.y = detail::least_squares(d.v[0], d.c[0]);
    }
    out.lambda = Vector::Zero(d.p());
    return out;
}

/// Draw order: W0, a0, [V0, c0,] then W_i, a_i, [V_i, c_i] for i = 1..p.
inline QcqpData generate_data(const QcqpConfig& cfg)
{
    cfg.validate();
    QcqpData d;
    d.structure = cfg.structure;
    d.seed = cfg.seed;
    d.scale_w0 = cfg.scale_w0;
    d.scale_a0 = cfg.scale_a0;
    d.scale_wi = cfg.scale_wi;
    d.scale_ai = cfg.scale_ai;
    const bool separable = cfg.structure == Structure::Separable;

    SeededRng rng(cfg.seed);
    for (Eigen::Index i = 0; i <= cfg.p; ++i) {
        const double sw = i == 0 ? cfg.scale_w0 : cfg.scale_wi;
        const double sa = i == 0 ? cfg.scale_a0 : cfg.scale_ai;
        d.w.push_back(gaussian_matrix(rng, cfg.q, cfg.n, sw));
        d.a.push_back(gaussian_vector(rng, cfg.q, sa));
        if (separable) {
            d.v.push_back(gaussian_matrix(rng, cfg.q, cfg.m, sw));
            d.c.push_back(gaussian_vector(rng, cfg.q, sa));
        }
    }

    if (cfg.bound_rule == BoundRule::Fixed) {
        d.pi.assign(static_cast<std::size_t>(cfg.p), cfg.pi);
    } else {
        d.pi.assign(static_cast<std::size_t>(cfg.p), 0.0);
        const Iterate unc = unconstrained_minimizer(d);
        const Vector values = constraint_values(d, unc.x, unc.y);
        d.pi.assign(static_cast<std::size_t>(cfg.p), cfg.pi_fraction * values.minCoeff());
    }
    d.build_caches();
    return d;
}

inline QcqpProblem generate(const QcqpConfig& cfg)
{
    return QcqpProblem(std::make_shared<const QcqpData>(generate_data(cfg)));
}

/// Zero primal start and zero duals.
inline Iterate zero_start(const QcqpData& d)
{
    Iterate it;
    it.x = Vector::Zero(d.n());
    if (d.structure == Structure::Separable) {
        it.y = Vector::Zero(d.m());
    }
    it.lambda = Vector::Zero(d.p());
    return it;
}

// ---------------------------------------------------------------------------
// Reference solver for tiny single-block instances

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReferenceSolution {
    Vector x;
    Vector lambda;
    double f = 0.0;
    double stationarity = 0.0; // ||grad f + sum lambda_i grad phi_i||
};

namespace detail {

struct KktCandidate {
    Vector x;
    Vector nu; // multipliers of the active subset
    bool ok = false;
};

/// Newton on  grad f + sum_{i in S} nu_i grad phi_i = 0,  phi_S = 0  with a
/// backtracking line search on the residual norm.
inline KktCandidate newton_on_face(const QcqpData& d, const std::vector<Eigen::Index>& active, Vector x)
{
    const Eigen::Index n = d.n();
    const auto ns = static_cast<Eigen::Index>(active.size());

    auto grad_phi = [&](Eigen::Index i, const Vector& at) -> Vector {
        const auto idx = static_cast<std::size_t>(i + 1);
        return 2.0 * d.w[idx].transpose() * (d.w[idx] * at - d.a[idx]);
    };
    auto phi = [&](Eigen::Index i, const Vector& at) {
        const auto idx = static_cast<std::size_t>(i + 1);
        return (d.w[idx] * at - d.a[idx]).squaredNorm() - d.pi[idx - 1];
    };
    auto grad_f = [&](const Vector& at) -> Vector { return 2.0 * d.w[0].transpose() * (d.w[0] * at - d.a[0]); };

    Matrix js(ns, n);
    auto fill_js = [&](const Vector& at) {
        for (Eigen::Index j = 0; j < ns; ++j) {
            js.row(j) = grad_phi(active[static_cast<std::size_t>(j)], at).transpose();
        }
    };
    auto residual = [&](const Vector& at, const Vector& nu) {
        fill_js(at);
        Vector res(n + ns);
        res.head(n) = grad_f(at) + js.transpose() * nu;
        for (Eigen::Index j = 0; j < ns; ++j) {
            res(n + j) = phi(active[static_cast<std::size_t>(j)], at);
        }
        return res;
    };

    fill_js(x);
    Vector nu = Vector::Zero(ns);
    if (ns > 0) {
        // multipliers from a least-squares fit of the stationarity equation
        nu = least_squares(js.transpose(), -grad_f(x));
    }

    const double scale = 1.0 + d.a[0].squaredNorm() + (d.pi.empty() ? 0.0 : d.pi.front());
    Vector res = residual(x, nu);
    for (int iter = 0; iter < 200; ++iter) {
        if (res.norm() <= 1e-13 * scale) {
            break;
        }
        Matrix k = Matrix::Zero(n + ns, n + ns);
        k.topLeftCorner(n, n) = 2.0 * d.wtw[0];
        for (Eigen::Index j = 0; j < ns; ++j) {
            k.topLeftCorner(n, n) += 2.0 * nu(j) * d.wtw[static_cast<std::size_t>(active[static_cast<std::size_t>(j)] + 1)];
        }
        fill_js(x);
        k.topRightCorner(n, ns) = js.transpose();
        k.bottomLeftCorner(ns, n) = js;
        const Vector step = Eigen::FullPivLU<Matrix>(k).solve(-res);
        if (!step.allFinite()) {
            return {};
        }
        double t = 1.0;
        const double base = res.norm();
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Vector xt = x + t * step.head(n);
            const Vector nut = nu + t * step.tail(ns);
            const Vector rt = residual(xt, nut);
            if (rt.norm() < (1.0 - 1e-4 * t) * base || rt.norm() <= 1e-13 * scale) {
                x = xt;
                nu = nut;
                res = rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            break;
        }
    }
    return {x, nu, res.norm() <= 1e-9 * scale};
}

} // namespace detail

/// Independent solution of a tiny single-block instance: every active subset of
/// constraints is tried with Newton's method on its KKT system from five starts;
/// the feasible KKT point with nonnegative multipliers and the smallest objective wins.
inline ReferenceSolution reference_solve_tiny(const QcqpData& d)
{
    if (d.structure != Structure::Single) {
        throw ArgumentError("reference_solve_tiny: single-block instances only");
    }
    if (d.n() > 5 || d.p() > 3) {
        throw ArgumentError("reference_solve_tiny: requires n <= 5 and p <= 3");
    }
    const Eigen::Index n = d.n();
    const Eigen::Index p = d.p();

    std::vector<Vector> starts;
    const Vector unc = detail::least_squares(d.w[0], d.a[0]);
    starts.push_back(unc);
    starts.push_back(Vector::Zero(n));
    SeededRng rng(0x5eed);
    const double spread = 1.0 + unc.norm();
    for (int i = 0; i < 3; ++i) {
        starts.push_back(gaussian_vector(rng, n, spread / std::sqrt(static_cast<double>(n))));
    }

    const double feas_tol = 1e-9 * (1.0 + *std::max_element(d.pi.begin(), d.pi.end()));
    bool found = false;
    ReferenceSolution best;
    for (unsigned mask = 0; mask < (1u << p); ++mask) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (mask & (1u << i)) {
                active.push_back(i);
            }
        }
        for (const Vector& start : starts) {
            const detail::KktCandidate cand = detail::newton_on_face(d, active, start);
            if (!cand.ok || (cand.nu.size() > 0 && cand.nu.minCoeff() < -1e-10)) {
                continue;
            }
            const Vector phi = constraint_values(d, cand.x, Vector());
            if (phi.maxCoeff() > feas_tol) {
                continue;
            }
            const double f = (d.w[0] * cand.x - d.a[0]).squaredNorm();
            if (!found || f < best.f) {
                found = true;
                best.x = cand.x;
                best.f = f;
                best.lambda = Vector::Zero(p);
                for (std::size_t j = 0; j < active.size(); ++j) {
                    best.lambda(active[j]) = std::max(cand.nu(static_cast<Eigen::Index>(j)), 0.0);
                }
            }
        }
    }
    if (!found) {
        throw InfeasibleError("reference_solve_tiny: no feasible KKT point found");
    }
    Vector stat = 2.0 * d.w[0].transpose() * (d.w[0] * best.x - d.a[0]);
    for (Eigen::Index i = 0; i < p; ++i) {
        const auto idx = static_cast<std::size_t>(i + 1);
        stat += best.lambda(i) * 2.0 * d.w[idx].transpose() * (d.w[idx] * best.x - d.a[idx]);
    }
    best.stationarity = stat.norm();
    return best;
}

// ---------------------------------------------------------------------------
// Instance container: magic, JSON header, then little-endian float64 payload.

inline constexpr char kMagic[8] = {'S', 'P', 'Q', 'C', 'Q', 'P', '0', '1'};

namespace detail {

inline void write_u64(std::ostream& os, std::uint64_t v)
{
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    }
    os.write(reinterpret_cast<const char*>(buf), 8);
}

inline std::uint64_t read_u64(std::istream& is)
{
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) {
        throw ArgumentError("qcqp instance: truncated stream");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return v;
}

inline void write_f64(std::ostream& os, double x) { write_u64(os, std::bit_cast<std::uint64_t>(x)); }
inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

inline void write_matrix(std::ostream& os, const Matrix& m)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            write_f64(os, m(i, j));
        }
    }
}

inline Matrix read_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols)
{
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = read_f64(is);
        }
    }
    return m;
}

inline void write_vector(std::ostream& os, const Vector& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        write_f64(os, v(i));
    }
}

inline Vector read_vector(std::istream& is, Eigen::Index len)
{
    Vector v(len);
    for (Eigen::Index i = 0; i < len; ++i) {
        v(i) = read_f64(is);
    }
    return v;
}

} // namespace detail

inline nlohmann::json instance_header(const QcqpData& d)
{
    nlohmann::json h;
    h["format"] = "spice-qcqp";
    h["version"] = 1;
    h["problem"] = to_string(d.structure);
    h["n"] = d.n();
    h["m"] = d.m();
    h["q"] = d.q();
    h["p"] = d.p();
    h["seed"] = d.seed;
    h["scales"] = {{"w0", d.scale_w0}, {"a0", d.scale_a0}, {"wi", d.scale_wi}, {"ai", d.scale_ai}};
    h["pi"] = d.pi;
    h["rng"] = SeededRng::algorithm_id;
    h["layout"] = d.structure == Structure::Single ? "W0 a0 W1 a1 ... (row-major float64 LE)"
                                                   : "W0 a0 V0 c0 W1 a1 V1 c1 ... (row-major float64 LE)";
    return h;
}

inline void write_instance(std::ostream& os, const QcqpData& d)
{
    const std::string header = instance_header(d).dump();
    os.write(kMagic, sizeof(kMagic));
    detail::write_u64(os, header.size());
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    // pi is stored bit-exactly in the payload too; the JSON copy is for humans
    for (double v : d.pi) {
        detail::write_f64(os, v);
    }
    for (std::size_t i = 0; i < d.w.size(); ++i) {
        detail::write_matrix(os, d.w[i]);
        detail::write_vector(os, d.a[i]);
        if (d.structure == Structure::Separable) {
            detail::write_matrix(os, d.v[i]);
            detail::write_vector(os, d.c[i]);
        }
    }
}

inline QcqpData read_instance(std::istream& is)
{
    char magic[sizeof(kMagic)];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ArgumentError("qcqp instance: bad magic");
    }
    const std::uint64_t len = detail::read_u64(is);
    if (len > (1u << 20)) {
        throw ArgumentError("qcqp instance: header too large");
    }
    std::string text(len, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(len))) {
        throw ArgumentError("qcqp instance: truncated header");
    }
    const nlohmann::json h = nlohmann::json::parse(text);

    QcqpData d;
    d.structure = h.at("problem").get<std::string>() == "separable" ? Structure::Separable : Structure::Single;
    d.seed = h.at("seed").get<std::uint64_t>();
    d.scale_w0 = h.at("scales").at("w0").get<double>();
    d.scale_a0 = h.at("scales").at("a0").get<double>();
    d.scale_wi = h.at("scales").at("wi").get<double>();
    d.scale_ai = h.at("scales").at("ai").get<double>();
    const auto n = h.at("n").get<Eigen::Index>();
    const auto m = h.at("m").get<Eigen::Index>();
    const auto q = h.at("q").get<Eigen::Index>();
    const auto p = h.at("p").get<Eigen::Index>();
    if (n < 1 || q < 1 || p < 1 || (d.structure == Structure::Separable && m < 1)) {
        throw ArgumentError("qcqp instance: bad dimensions");
    }
    for (Eigen::Index i = 0; i < p; ++i) {
        d.pi.push_back(detail::read_f64(is));
    }
    for (Eigen::Index i = 0; i <= p; ++i) {
        d.w.push_back(detail::read_matrix(is, q, n));
        d.a.push_back(detail::read_vector(is, q));
        if (d.structure == Structure::Separable) {
            d.v.push_back(detail::read_matrix(is, q, m));
            d.c.push_back(detail::read_vector(is, q));
        }
    }
    d.build_caches();
    return d;
}

inline void save_instance(const std::string& path, const QcqpData& d)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ArgumentError("cannot open " + path + " for writing");
    }
    write_instance(os, d);
}

inline QcqpData load_instance(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ArgumentError("cannot open " + path);
    }
    return read_instance(is);
}

} // namespace spice::qcqp
