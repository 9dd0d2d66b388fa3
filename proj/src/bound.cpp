#include "sarx/bound.hpp"

#include <Eigen/Eigenvalues>
#include <bit>
#include <cmath>
#include <limits>

namespace sarx {

VectorXd column_dot(const MatrixXd& A, const MatrixXd& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw ConfigError("column_dot: shapes must match");
    VectorXd out(A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j) out(j) = A.col(j).dot(B.col(j));
    return out;
}

BoundComputation assemble_bound_system(const MatrixXd& phi_C, const MatrixXd& W_C,
                                       const VectorXd& h_C, const VectorXd& w_now,
                                       const VectorXd& w_lag, double cond_cap) {
    const Eigen::Index n = phi_C.rows();
    const Eigen::Index W = phi_C.cols();
    if (W < 1 || n < 1) throw ConfigError("bound system: empty window");
    if (W_C.rows() != n || W_C.cols() != W || h_C.size() != W || w_now.size() != n ||
        w_lag.size() != n)
        throw ConfigError("bound system: inconsistent shapes");
    for (Eigen::Index j = 0; j < W; ++j)
        if (!(h_C(j) > 0.0)) throw ConfigError("bound system: step sizes must be positive");

    MatrixXd phi_h = phi_C * h_C.asDiagonal();          // n x W
    MatrixXd gram = phi_h * phi_C.transpose();          // n x n
    gram = 0.5 * (gram + gram.transpose().eval());

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    double lo = eig.eigenvalues()(0);
    double hi = eig.eigenvalues()(n - 1);
    double cond = (lo > 0.0 && hi > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(cond <= cond_cap)) throw IllConditioned(cond);

    // err_now satisfies gram * err_now = [dw - phi_h * box] - phi_h * noise,
    // where dw telescopes the window's updates and box carries the drift of
    // the estimates the updates actually used.
    MatrixXd delta_W = w_now.replicate(1, W) - W_C;
    VectorXd box = column_dot(phi_C, delta_W);
    VectorXd dw = w_now - w_lag;

    auto ldlt = gram.ldlt();
    BoundComputation bc;
    bc.A = ldlt.solve(phi_h);
    bc.b = ldlt.solve(dw - phi_h * box);
    bc.cond = cond;
    return bc;
}

double exact_upper_bound(const BoundComputation& bc, double n_max, int vertex_cap) {
    const int W = static_cast<int>(bc.A.cols());
    if (W < 1) throw ConfigError("exact bound: empty window");
    if (n_max < 0) throw ConfigError("exact bound: n_max must be >= 0");
    if (vertex_cap < 1 || vertex_cap > 62) throw ConfigError("exact bound: bad vertex cap");
    if (W > vertex_cap) throw ExactModeTooLarge(W, vertex_cap);
    if (n_max == 0.0) return bc.b.norm();

    // Sweep half the cube (last coordinate pinned at +n_max); the mirrored
    // vertex -v is covered by evaluating both |s - b| and |s + b|.
    VectorXd s = bc.A.rowwise().sum() * n_max;  // A * (+n_max, ..., +n_max)
    double best = std::max((s - bc.b).squaredNorm(), (s + bc.b).squaredNorm());

    const int bits = W - 1;
    std::vector<double> flip(bits);  // +-2 n_max, tracks current sign per coordinate
    for (int j = 0; j < bits; ++j) flip[j] = -2.0 * n_max;

    const std::uint64_t count = bits > 0 ? (std::uint64_t{1} << bits) : 1;
    for (std::uint64_t k = 1; k < count; ++k) {
        int j = std::countr_zero(k);  // Gray code: one coordinate flips per visit
        s += flip[j] * bc.A.col(j);
        flip[j] = -flip[j];
        best = std::max(best, std::max((s - bc.b).squaredNorm(), (s + bc.b).squaredNorm()));
    }
    return std::sqrt(best);
}

double monte_carlo_upper_bound(const BoundComputation& bc,
                               const std::function<VectorXd()>& sampler, long long n_samples) {
    if (n_samples < 1) throw ConfigError("monte carlo bound: need at least one sample");
    double best = 0.0;
    for (long long i = 0; i < n_samples; ++i) {
        VectorXd v = sampler();
        if (v.size() != bc.A.cols())
            throw ConfigError("monte carlo bound: sample length does not match window");
        best = std::max(best, (bc.b - bc.A * v).squaredNorm());
    }
    return std::sqrt(best);
}

McSamples mc_sample_schedule(long long t, const McScheduleParams& params) {
    if (t < 1) throw ConfigError("mc schedule: update index must be >= 1");
    if (!(params.zeta1 > 0.0 && params.zeta1 < 1.0))
        throw ConfigError("mc schedule: zeta1 must be in (0, 1)");
    if (!(params.zeta2 > 0.0 && params.zeta2 < 1.0))
        throw ConfigError("mc schedule: zeta2 must be in (0, 1)");
    if (params.cap < 1) throw ConfigError("mc schedule: cap must be >= 1");

    double raw = params.zeta2 * static_cast<double>(t) /
                 (2.0 * std::pow(params.zeta1, 2.0 * static_cast<double>(t)));
    McSamples out;
    if (!std::isfinite(raw) || raw >= static_cast<double>(params.cap)) {
        out.n = params.cap;
        out.guarantee_void = true;
        return out;
    }
    out.n = std::max<long long>(1, static_cast<long long>(std::ceil(raw)));
    return out;
}

ErrorBound multi_window_bound(const std::vector<std::optional<BoundComputation>>& windows,
                              double n_max, int vertex_cap) {
    if (windows.empty()) throw ConfigError("multi window bound: no windows");
    for (const auto& w : windows)
        if (!w.has_value()) return ErrorBound::unbounded();
    double best = 0.0;
    for (const auto& w : windows)
        best = std::max(best, exact_upper_bound(*w, n_max, vertex_cap));
    return ErrorBound::finite(best);
}

}  // namespace sarx
