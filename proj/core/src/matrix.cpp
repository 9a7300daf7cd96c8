#include "pdeform/matrix.hpp"

#include "pdeform/error.hpp"

#include <algorithm>
#include <map>

namespace pdeform {

SRow srow_normalize(SRow r) {
    std::sort(r.begin(), r.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SRow out;
    for (auto& [c, v] : r) {
        if (!out.empty() && out.back().first == c)
            out.back().second += v;
        else
            out.emplace_back(c, v);
        if (!out.empty() && out.back().second == 0) out.pop_back();
    }
    return out;
}

SRow srow_axpy(const SRow& a, const Rational& c, const SRow& b) {
    SRow out;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            Rational v = c * b[j].second;
            if (v != 0) out.emplace_back(b[j].first, v);
            ++j;
        } else {
            Rational v = a[i].second + c * b[j].second;
            if (v != 0) out.emplace_back(a[i].first, v);
            ++i;
            ++j;
        }
    }
    return out;
}

SRow srow_scale(const SRow& a, const Rational& c) {
    if (c == 0) return {};
    SRow out = a;
    for (auto& [col, v] : out) v *= c;
    return out;
}

std::vector<Rational> srow_dense(const SRow& r, int n) {
    std::vector<Rational> out(n, 0);
    for (const auto& [c, v] : r) out[c] = v;
    return out;
}

SRow srow_from_dense(const std::vector<Rational>& v) {
    SRow out;
    for (size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0) out.emplace_back(static_cast<int>(i), v[i]);
    return out;
}

void SparseMat::add_row(SRow r) {
    r = srow_normalize(std::move(r));
    if (!r.empty() && r.back().first >= cols_)
        fail(Errc::Internal, "row entry beyond column count");
    rows_.push_back(std::move(r));
}

void SparseMat::append(const SparseMat& o) {
    if (o.cols_ != cols_) fail(Errc::Internal, "appending matrix with different width");
    rows_.insert(rows_.end(), o.rows_.begin(), o.rows_.end());
}

SparseMat SparseMat::transpose() const {
    SparseMat t(nrows());
    std::vector<SRow> cols(cols_);
    for (int i = 0; i < nrows(); ++i)
        for (const auto& [c, v] : rows_[i]) cols[c].emplace_back(i, v);
    for (auto& c : cols) t.add_row(std::move(c));
    return t;
}

SparseMat SparseMat::augment(const SparseMat& o) const {
    if (o.nrows() != nrows()) fail(Errc::Internal, "augmenting matrix with different height");
    SparseMat m(cols_ + o.cols_);
    for (int i = 0; i < nrows(); ++i) {
        SRow r = rows_[i];
        for (const auto& [c, v] : o.rows_[i]) r.emplace_back(c + cols_, v);
        m.add_row(std::move(r));
    }
    return m;
}

bool Rref::is_pivot(int col) const {
    return std::binary_search(pivot_cols.begin(), pivot_cols.end(), col);
}

SRow Rref::reduce(SRow v) const {
    for (size_t i = 0; i < rows.size(); ++i) {
        // locate the pivot column's coefficient in v
        auto it = std::lower_bound(v.begin(), v.end(), pivot_cols[i],
                                   [](const auto& p, int c) { return p.first < c; });
        if (it == v.end() || it->first != pivot_cols[i]) continue;
        v = srow_axpy(v, -it->second, rows[i]);
    }
    return v;
}

Rref rref(const SparseMat& m) {
    Rref r;
    r.cols = m.cols();
    // pivot col -> index into r.rows
    std::map<int, size_t> pivots;
    for (int i = 0; i < m.nrows(); ++i) {
        SRow v = m.row(i);
        // eliminate existing pivots
        for (const auto& [pc, ri] : pivots) {
            auto it = std::lower_bound(v.begin(), v.end(), pc,
                                       [](const auto& p, int c) { return p.first < c; });
            if (it != v.end() && it->first == pc) v = srow_axpy(v, -it->second, r.rows[ri]);
        }
        if (v.empty()) continue;
        int pc = v.front().first;
        v = srow_scale(v, Rational(1) / v.front().second);
        // back-substitute into existing rows
        for (auto& row : r.rows) {
            auto it = std::lower_bound(row.begin(), row.end(), pc,
                                       [](const auto& p, int c) { return p.first < c; });
            if (it != row.end() && it->first == pc) row = srow_axpy(row, -it->second, v);
        }
        pivots.emplace(pc, r.rows.size());
        r.rows.push_back(std::move(v));
    }
    // order rows by pivot column
    Rref out;
    out.cols = r.cols;
    for (const auto& [pc, ri] : pivots) {
        out.pivot_cols.push_back(pc);
        out.rows.push_back(std::move(r.rows[ri]));
    }
    return out;
}

int rank(const SparseMat& m) { return rref(m).rank(); }

std::vector<SRow> kernel_basis(const SparseMat& m) {
    Rref r = rref(m);
    std::vector<SRow> basis;
    size_t pi = 0;
    for (int c = 0; c < m.cols(); ++c) {
        if (pi < r.pivot_cols.size() && r.pivot_cols[pi] == c) {
            ++pi;
            continue;
        }
        // free column c: x_c = 1, pivots adjust
        SRow vec{{c, Rational(1)}};
        for (size_t i = 0; i < r.rows.size(); ++i) {
            auto it = std::lower_bound(r.rows[i].begin(), r.rows[i].end(), c,
                                       [](const auto& p, int cc) { return p.first < cc; });
            if (it != r.rows[i].end() && it->first == c)
                vec.emplace_back(r.pivot_cols[i], -it->second);
        }
        basis.push_back(srow_normalize(std::move(vec)));
    }
    return basis;
}

std::optional<std::vector<Rational>> solve(const SparseMat& m, const std::vector<Rational>& b) {
    if (static_cast<int>(b.size()) != m.nrows()) fail(Errc::Internal, "solve: rhs length");
    SparseMat rhs(1);
    for (const auto& v : b) {
        SRow r;
        if (v != 0) r.emplace_back(0, v);
        rhs.add_row(std::move(r));
    }
    Rref r = rref(m.augment(rhs));
    std::vector<Rational> x(m.cols(), 0);
    for (size_t i = 0; i < r.rows.size(); ++i) {
        if (r.pivot_cols[i] >= m.cols()) return std::nullopt; // pivot in rhs column
        Rational val = 0;
        auto it = std::lower_bound(r.rows[i].begin(), r.rows[i].end(), m.cols(),
                                   [](const auto& p, int c) { return p.first < c; });
        if (it != r.rows[i].end() && it->first == m.cols()) val = it->second;
        x[r.pivot_cols[i]] = val;
    }
    return x;
}

int span_intersection_dim(const SparseMat& U, const SparseMat& V) {
    SparseMat both = U;
    both.append(V);
    return rank(U) + rank(V) - rank(both);
}

std::vector<SRow> span_intersection_basis(const SparseMat& U, const SparseMat& V) {
    // relations among the stacked vectors: columns of the transposed system
    SparseMat cols(U.nrows() + V.nrows());
    // rows of `cols` are coordinates; entry (k, i) = i-th vector's k-th coordinate
    int dim = U.cols();
    std::vector<SRow> coord_rows(dim);
    for (int i = 0; i < U.nrows(); ++i)
        for (const auto& [c, v] : U.row(i)) coord_rows[c].emplace_back(i, v);
    for (int j = 0; j < V.nrows(); ++j)
        for (const auto& [c, v] : V.row(j)) coord_rows[c].emplace_back(U.nrows() + j, v);
    for (auto& r : coord_rows) cols.add_row(std::move(r));
    auto rels = kernel_basis(cols);
    // each relation (a, b) gives sum a_i u_i = -sum b_j v_j in the intersection
    SparseMat cand(dim);
    for (const auto& rel : rels) {
        SRow vec;
        for (const auto& [i, a] : rel) {
            if (i >= U.nrows()) continue;
            vec = srow_axpy(vec, a, U.row(i));
        }
        if (!vec.empty()) cand.add_row(std::move(vec));
    }
    return rref(cand).rows;
}

std::optional<std::vector<Rational>> coords_in_span(const SparseMat& U, const SRow& v) {
    // solve U^T x = v
    SparseMat sys = U.transpose();
    return solve(sys, srow_dense(v, U.cols()));
}

} // namespace pdeform
