#include "pflow/sparse.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace pflow {

CscMatrix csc_from_triplets(std::size_t n_rows, std::size_t n_cols, std::span<const Index> rows,
                            std::span<const Index> cols, std::span<const double> vals,
                            std::vector<Index>* slot_to_csc) {
    const std::size_t nt = rows.size();
    if (cols.size() != nt || (!vals.empty() && vals.size() != nt)) {
        throw std::invalid_argument("csc_from_triplets: triplet arrays differ in length");
    }
    std::vector<Index> order(nt);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return cols[a] != cols[b] ? cols[a] < cols[b] : rows[a] < rows[b];
    });

    CscMatrix a;
    a.n_rows = n_rows;
    a.n_cols = n_cols;
    a.col_ptr.assign(n_cols + 1, 0);
    if (slot_to_csc) slot_to_csc->assign(nt, 0);
    for (std::size_t t = 0; t < nt; ++t) {
        const Index s = order[t];
        if (rows[s] < 0 || static_cast<std::size_t>(rows[s]) >= n_rows || cols[s] < 0 ||
            static_cast<std::size_t>(cols[s]) >= n_cols) {
            throw std::out_of_range("csc_from_triplets: triplet index outside the matrix");
        }
        const bool repeat = t > 0 && rows[order[t - 1]] == rows[s] && cols[order[t - 1]] == cols[s];
        if (!repeat) {
            a.row_idx.push_back(rows[s]);
            a.values.push_back(0.0);
            ++a.col_ptr[cols[s] + 1];
        }
        if (!vals.empty()) a.values.back() += vals[s];
        if (slot_to_csc) (*slot_to_csc)[s] = static_cast<Index>(a.row_idx.size() - 1);
    }
    std::partial_sum(a.col_ptr.begin(), a.col_ptr.end(), a.col_ptr.begin());
    return a;
}

DenseMatrix to_dense(const CscMatrix& a) {
    DenseMatrix d(a.n_rows, a.n_cols);
    for (std::size_t j = 0; j < a.n_cols; ++j) {
        for (Index p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) d(a.row_idx[p], j) += a.values[p];
    }
    return d;
}

void multiply(const CscMatrix& a, std::span<const double> x, std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t j = 0; j < a.n_cols; ++j) {
        for (Index p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) y[a.row_idx[p]] += a.values[p] * x[j];
    }
}

void write_matrix_market(std::ostream& os, const CscMatrix& a) {
    const auto old_precision = os.precision(17);
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << a.n_rows << ' ' << a.n_cols << ' ' << a.nnz() << '\n';
    for (std::size_t j = 0; j < a.n_cols; ++j) {
        for (Index p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
            os << a.row_idx[p] + 1 << ' ' << j + 1 << ' ' << a.values[p] << '\n';
        }
    }
    os.precision(old_precision);
}

}  // namespace pflow
