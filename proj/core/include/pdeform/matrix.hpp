#pragma once

#include "pdeform/rational.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace pdeform {

// Sparse row: (column, value) pairs sorted by column, values nonzero.
using SRow = std::vector<std::pair<int, Rational>>;

SRow srow_normalize(SRow r);                              // sort, combine, drop zeros
SRow srow_axpy(const SRow& a, const Rational& c, const SRow& b); // a + c*b
SRow srow_scale(const SRow& a, const Rational& c);
std::vector<Rational> srow_dense(const SRow& r, int n);
SRow srow_from_dense(const std::vector<Rational>& v);

// Row-major sparse matrix over Q. Used both for equation systems (rows are
// equations in the unknown columns) and for spans (rows are spanning vectors).
class SparseMat {
public:
    explicit SparseMat(int cols = 0) : cols_(cols) {}
    int cols() const { return cols_; }
    int nrows() const { return static_cast<int>(rows_.size()); }
    void add_row(SRow r);
    const SRow& row(int i) const { return rows_[i]; }
    const std::vector<SRow>& rows() const { return rows_; }
    void append(const SparseMat& o); // stack rows; column counts must agree
    SparseMat transpose() const;
    // [this | o] side by side; column indices of o shifted by cols().
    SparseMat augment(const SparseMat& o) const;

private:
    int cols_;
    std::vector<SRow> rows_;
};

// Fully reduced row echelon form.
struct Rref {
    int cols = 0;
    std::vector<SRow> rows;      // nonzero rows, leading coefficient 1
    std::vector<int> pivot_cols; // increasing, one per row
    int rank() const { return static_cast<int>(rows.size()); }
    bool is_pivot(int col) const;
    // Remainder of v after eliminating all pivot columns (canonical rep mod row span).
    SRow reduce(SRow v) const;
};

Rref rref(const SparseMat& m);
int rank(const SparseMat& m);

// Basis of {x : M x = 0} (rows of M are equations). One vector per free column,
// free columns in ascending order, with entry 1 at the free column.
std::vector<SRow> kernel_basis(const SparseMat& m);

// Particular solution of M x = b with all free variables set to zero,
// or nullopt if inconsistent.
std::optional<std::vector<Rational>> solve(const SparseMat& m, const std::vector<Rational>& b);

// Both arguments are spans (rows = vectors in the same coordinate space).
// dim(span U  intersect  span V); basis returned in the second form.
int span_intersection_dim(const SparseMat& U, const SparseMat& V);
std::vector<SRow> span_intersection_basis(const SparseMat& U, const SparseMat& V);

// Coordinates of v in span(U) (rows = vectors), or nullopt if v is outside.
std::optional<std::vector<Rational>> coords_in_span(const SparseMat& U, const SRow& v);

} // namespace pdeform
