#include "pflow/linear_solver.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace pflow {

SolverKind parse_solver_kind(std::string_view name) {
    if (name == "builtin") return SolverKind::Builtin;
    if (name == "dense") return SolverKind::Dense;
    if (name == "external") return SolverKind::External;
    throw std::invalid_argument("unknown solver '" + std::string(name) + "' (expected builtin, dense or external)");
}

std::string_view to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::Builtin: return "builtin";
        case SolverKind::Dense: return "dense";
        case SolverKind::External: return "external";
    }
    return "?";
}

bool LinearSolver::pattern_changed(const CscMatrix& a) {
    if (a.n_cols == n_ && a.col_ptr == col_ptr_ && a.row_idx == row_idx_) return false;
    n_ = a.n_cols;
    col_ptr_ = a.col_ptr;
    row_idx_ = a.row_idx;
    return true;
}

namespace {

void check_square(const CscMatrix& a, std::span<const double> rhs, std::span<double> x) {
    if (a.n_rows != a.n_cols) throw std::invalid_argument("linear solve: matrix is not square");
    if (rhs.size() != a.n_rows || x.size() != a.n_cols) {
        throw std::invalid_argument("linear solve: vector length does not match the matrix");
    }
}

// Left-looking (Gilbert-Peierls) LU: P A Q = L U, L unit lower triangular.
class SparseLu final : public LinearSolver {
  public:
    SolverKind kind() const override { return SolverKind::Builtin; }

    void solve(const CscMatrix& a, std::span<const double> rhs, std::span<double> x) override {
        check_square(a, rhs, x);
        if (pattern_changed(a)) analyze(a);
        factor(a);

        const std::size_t n = a.n_cols;
        for (std::size_t i = 0; i < n; ++i) work_[pinv_[i]] = rhs[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double xj = work_[j];
            for (Index p = lp_[j] + 1; p < lp_[j + 1]; ++p) work_[li_[p]] -= lx_[p] * xj;
        }
        for (std::size_t jj = n; jj-- > 0;) {
            work_[jj] /= ux_[up_[jj + 1] - 1];
            const double xj = work_[jj];
            for (Index p = up_[jj]; p < up_[jj + 1] - 1; ++p) work_[ui_[p]] -= ux_[p] * xj;
        }
        for (std::size_t k = 0; k < n; ++k) x[q_[k]] = work_[k];
    }

  private:
    static constexpr double kPivotTolerance = 0.1;

    void analyze(const CscMatrix& a) {
        ++analyses_;
        const std::size_t n = a.n_cols;
        q_ = minimum_degree_order(a);
        x_.assign(n, 0.0);
        work_.assign(n, 0.0);
        xi_.assign(2 * n, 0);
        mark_.assign(n, 0);
        pinv_.assign(n, -1);
        lp_.assign(n + 1, 0);
        up_.assign(n + 1, 0);
        const std::size_t guess = 4 * a.nnz() + n;
        li_.reserve(guess);
        lx_.reserve(guess);
        ui_.reserve(guess);
        ux_.reserve(guess);
    }

    // Depth-first search from row j through the columns of L already built;
    // pushes finished nodes onto xi[top..n).
    std::size_t dfs(Index j, std::size_t top, std::size_t n) {
        Index* stack = xi_.data();
        Index* pstack = xi_.data() + n;
        std::size_t head = 0;
        stack[0] = j;
        while (true) {
            j = stack[head];
            const Index jcol = pinv_[j];
            if (!mark_[j]) {
                mark_[j] = 1;
                pstack[head] = jcol < 0 ? 0 : lp_[jcol] + 1;
            }
            bool done = true;
            const Index pend = jcol < 0 ? 0 : lp_[jcol + 1];
            for (Index p = pstack[head]; p < pend; ++p) {
                const Index i = li_[p];
                if (mark_[i]) continue;
                pstack[head] = p + 1;
                stack[++head] = i;
                done = false;
                break;
            }
            if (done) {
                // head >= top is guaranteed: the stack and the output share xi.
                xi_[--top] = j;
                if (head == 0) break;
                --head;
            }
        }
        return top;
    }

    void factor(const CscMatrix& a) {
        const std::size_t n = a.n_cols;
        std::fill(pinv_.begin(), pinv_.end(), -1);
        li_.clear();
        lx_.clear();
        ui_.clear();
        ux_.clear();

        double max_pivot = 0.0;
        double min_pivot = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            lp_[k] = static_cast<Index>(li_.size());
            up_[k] = static_cast<Index>(ui_.size());
            const Index col = q_[k];

            // Sparse triangular solve x = L \ A(:, col) over the reach of A(:, col).
            std::size_t top = n;
            for (Index p = a.col_ptr[col]; p < a.col_ptr[col + 1]; ++p) {
                if (!mark_[a.row_idx[p]]) top = dfs(a.row_idx[p], top, n);
            }
            for (std::size_t p = top; p < n; ++p) mark_[xi_[p]] = 0;
            for (Index p = a.col_ptr[col]; p < a.col_ptr[col + 1]; ++p) x_[a.row_idx[p]] = a.values[p];
            for (std::size_t px = top; px < n; ++px) {
                const Index j = xi_[px];
                const Index J = pinv_[j];
                if (J < 0) continue;
                const double xj = x_[j];
                for (Index p = lp_[J] + 1; p < lp_[J + 1]; ++p) x_[li_[p]] -= lx_[p] * xj;
            }

            // Pivot: largest candidate, unless the diagonal is within tolerance.
            Index ipiv = -1;
            double best = -1.0;
            for (std::size_t p = top; p < n; ++p) {
                const Index i = xi_[p];
                if (pinv_[i] < 0) {
                    const double t = std::abs(x_[i]);
                    if (t > best) {
                        best = t;
                        ipiv = i;
                    }
                } else {
                    ui_.push_back(pinv_[i]);
                    ux_.push_back(x_[i]);
                }
            }
            if (ipiv < 0 || !(best > 0.0) || !std::isfinite(best)) {
                for (std::size_t p = top; p < n; ++p) x_[xi_[p]] = 0.0;
                throw SingularMatrixError("sparse LU: zero pivot in column " + std::to_string(col));
            }
            if (pinv_[col] < 0 && std::abs(x_[col]) >= kPivotTolerance * best) ipiv = col;

            const double pivot = x_[ipiv];
            max_pivot = std::max(max_pivot, std::abs(pivot));
            min_pivot = std::min(min_pivot, std::abs(pivot));
            ui_.push_back(static_cast<Index>(k));
            ux_.push_back(pivot);
            pinv_[ipiv] = static_cast<Index>(k);
            li_.push_back(ipiv);
            lx_.push_back(1.0);
            for (std::size_t p = top; p < n; ++p) {
                const Index i = xi_[p];
                if (pinv_[i] < 0) {
                    li_.push_back(i);
                    lx_.push_back(x_[i] / pivot);
                }
                x_[i] = 0.0;
            }
        }
        lp_[n] = static_cast<Index>(li_.size());
        up_[n] = static_cast<Index>(ui_.size());
        for (auto& i : li_) i = pinv_[i];

        if (min_pivot <= kSingularPivotRatio * max_pivot) {
            throw SingularMatrixError("sparse LU: pivot ratio below threshold (matrix is numerically singular)");
        }
    }

    std::vector<Index> q_, pinv_;
    std::vector<Index> lp_, li_, up_, ui_;
    std::vector<double> lx_, ux_;
    std::vector<double> x_, work_;
    std::vector<Index> xi_;
    std::vector<char> mark_;
};

class DenseLu final : public LinearSolver {
  public:
    SolverKind kind() const override { return SolverKind::Dense; }

    void solve(const CscMatrix& a, std::span<const double> rhs, std::span<double> x) override {
        check_square(a, rhs, x);
        const std::size_t n = a.n_cols;
        if (n > kDenseMaxSize) {
            throw std::invalid_argument("dense solver: " + std::to_string(n) + " unknowns exceed the " +
                                        std::to_string(kDenseMaxSize) + " limit");
        }
        if (pattern_changed(a)) ++analyses_;
        lu_ = to_dense(a);
        perm_.resize(n);
        double max_pivot = 0.0;
        double min_pivot = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            for (std::size_t i = k + 1; i < n; ++i) {
                if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
            }
            perm_[k] = p;
            if (p != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
            }
            const double pivot = lu_(k, k);
            if (pivot == 0.0 || !std::isfinite(pivot)) {
                throw SingularMatrixError("dense LU: zero pivot in column " + std::to_string(k));
            }
            max_pivot = std::max(max_pivot, std::abs(pivot));
            min_pivot = std::min(min_pivot, std::abs(pivot));
            for (std::size_t i = k + 1; i < n; ++i) lu_(i, k) /= pivot;
            for (std::size_t j = k + 1; j < n; ++j) {
                const double ukj = lu_(k, j);
                if (ukj == 0.0) continue;
                for (std::size_t i = k + 1; i < n; ++i) lu_(i, j) -= lu_(i, k) * ukj;
            }
        }
        if (min_pivot <= kSingularPivotRatio * max_pivot) {
            throw SingularMatrixError("dense LU: pivot ratio below threshold (matrix is numerically singular)");
        }

        std::copy(rhs.begin(), rhs.end(), x.begin());
        for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[perm_[k]]);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = j + 1; i < n; ++i) x[i] -= lu_(i, j) * x[j];
        }
        for (std::size_t j = n; j-- > 0;) {
            x[j] /= lu_(j, j);
            for (std::size_t i = 0; i < j; ++i) x[i] -= lu_(i, j) * x[j];
        }
    }

  private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
};

class EigenLu final : public LinearSolver {
  public:
    SolverKind kind() const override { return SolverKind::External; }

    void solve(const CscMatrix& a, std::span<const double> rhs, std::span<double> x) override {
        check_square(a, rhs, x);
        using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
        Eigen::Map<const SpMat> view(static_cast<Index>(a.n_rows), static_cast<Index>(a.n_cols),
                                     static_cast<Index>(a.nnz()), a.col_ptr.data(), a.row_idx.data(),
                                     a.values.data());
        if (pattern_changed(a)) {
            ++analyses_;
            lu_.analyzePattern(view);
        }
        lu_.factorize(view);
        if (lu_.info() != Eigen::Success) {
            throw SingularMatrixError("external LU: factorization failed (" + lu_.lastErrorMessage() + ")");
        }
        Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
        Eigen::Map<Eigen::VectorXd> out(x.data(), static_cast<Eigen::Index>(x.size()));
        out = lu_.solve(b);
        if (lu_.info() != Eigen::Success) throw SingularMatrixError("external LU: solve failed");
    }

  private:
    Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, Index>, Eigen::COLAMDOrdering<Index>> lu_;
};

}  // namespace

std::unique_ptr<LinearSolver> make_solver(SolverKind kind) {
    switch (kind) {
        case SolverKind::Builtin: return std::make_unique<SparseLu>();
        case SolverKind::Dense: return std::make_unique<DenseLu>();
        case SolverKind::External: return std::make_unique<EigenLu>();
    }
    throw std::invalid_argument("unknown solver kind");
}

}  // namespace pflow
