#pragma once

// Direct solvers for J dx = rhs behind one interface.
//
//   builtin   sparse left-looking LU with threshold partial pivoting and a
//             minimum-degree column order computed once per pattern
//   dense     partial-pivoting dense LU, for test oracles (n <= 2000)
//   external  Eigen's SparseLU with COLAMD ordering

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pflow/sparse.hpp"

namespace pflow {

enum class SolverKind { Builtin, Dense, External };

/// Accepts "builtin", "dense" or "external"; throws std::invalid_argument.
SolverKind parse_solver_kind(std::string_view name);
std::string_view to_string(SolverKind kind);

class SingularMatrixError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A pivot is treated as zero when |pivot| <= kSingularPivotRatio * max |pivot|.
inline constexpr double kSingularPivotRatio = 1e-12;

inline constexpr std::size_t kDenseMaxSize = 2000;

class LinearSolver {
  public:
    virtual ~LinearSolver() = default;

    /// Factorizes `a` numerically (reusing the symbolic analysis when the
    /// pattern is unchanged) and solves a x = rhs.
    /// Throws SingularMatrixError.
    virtual void solve(const CscMatrix& a, std::span<const double> rhs, std::span<double> x) = 0;

    virtual SolverKind kind() const = 0;

    /// Number of symbolic analyses performed so far.
    std::size_t analyses() const { return analyses_; }

  protected:
    /// True (and the stored pattern updated) when `a` differs from the last
    /// analysed pattern.
    bool pattern_changed(const CscMatrix& a);

    std::size_t analyses_ = 0;

  private:
    std::size_t n_ = 0;
    std::vector<Index> col_ptr_, row_idx_;
};

std::unique_ptr<LinearSolver> make_solver(SolverKind kind);

/// Fill-reducing symmetric order of the pattern of A + A^T (minimum degree,
/// ties broken by index). Returns a permutation of 0..n-1.
std::vector<Index> minimum_degree_order(const CscMatrix& a);

}  // namespace pflow
