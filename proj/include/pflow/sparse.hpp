#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "pflow/system.hpp"

namespace pflow {

/// Compressed sparse column matrix with sorted, unique row indices per column.
struct CscMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<Index> col_ptr;   // n_cols + 1
    std::vector<Index> row_idx;
    std::vector<double> values;

    std::size_t nnz() const { return row_idx.size(); }
};

/// Column-major dense matrix, used by the test oracles and the dense backend.
struct DenseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : n_rows(r), n_cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return data[j * n_rows + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data[j * n_rows + i]; }
};

/// Builds the CSC structure of a triplet pattern (duplicates merged). If
/// `slot_to_csc` is given it receives, for each triplet, its value position.
CscMatrix csc_from_triplets(std::size_t n_rows, std::size_t n_cols, std::span<const Index> rows,
                            std::span<const Index> cols, std::span<const double> vals,
                            std::vector<Index>* slot_to_csc = nullptr);

DenseMatrix to_dense(const CscMatrix& a);

/// y = A x
void multiply(const CscMatrix& a, std::span<const double> x, std::span<double> y);

/// MatrixMarket "coordinate real general", 1-based indices.
void write_matrix_market(std::ostream& os, const CscMatrix& a);

}  // namespace pflow
