#include "mqsbt/la/matrix_market.hpp"

#include "mqsbt/errors.hpp"
#include "mqsbt/la/sparse.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace mqsbt::la {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void put_value(std::FILE* f, long i, long j, double v) {
    std::fprintf(f, "%ld %ld %.17e\n", i, j, v);
}

std::FILE* open_out(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    return f;
}

}  // namespace

void write_matrix_market(const std::string& path, const SparseMatrix& A, bool symmetric) {
    if (symmetric && !is_symmetric(A, 0.0))
        throw ValidationError("write_matrix_market: matrix flagged symmetric is not symmetric");
    std::FILE* f = open_out(path);
    std::fprintf(f, "%%%%MatrixMarket matrix coordinate real %s\n", symmetric ? "symmetric" : "general");
    long nnz = 0;
    for (Index i = 0; i < A.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it)
            if (!symmetric || it.col() <= i) ++nnz;
    std::fprintf(f, "%ld %ld %ld\n", static_cast<long>(A.rows()), static_cast<long>(A.cols()), nnz);
    for (Index i = 0; i < A.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it)
            if (!symmetric || it.col() <= i) put_value(f, i + 1, it.col() + 1, it.value());
    std::fclose(f);
}

void write_matrix_market(const std::string& path, const DenseMatrix& A) {
    std::FILE* f = open_out(path);
    std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f, "%ld %ld %ld\n", static_cast<long>(A.rows()), static_cast<long>(A.cols()),
                 static_cast<long>(A.size()));
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j) put_value(f, i + 1, j + 1, A(i, j));
    std::fclose(f);
}

SparseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    std::istringstream hs(lower(line));
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%matrixmarket" || object != "matrix")
        throw ValidationError(path + ": not a Matrix Market matrix file");
    if (format != "coordinate" && format != "array")
        throw ValidationError(path + ": unsupported format " + format);
    if (field != "real" && field != "integer" && field != "double")
        throw ValidationError(path + ": unsupported field " + field);
    if (symmetry != "general" && symmetry != "symmetric")
        throw ValidationError(path + ": unsupported symmetry " + symmetry);
    const bool sym = symmetry == "symmetric";

    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream ss(line);
    long rows = 0, cols = 0, nnz = 0;
    std::vector<Triplet> t;
    if (format == "coordinate") {
        if (!(ss >> rows >> cols >> nnz)) throw ValidationError(path + ": bad size line");
        t.reserve(sym ? 2 * nnz : nnz);
        for (long k = 0; k < nnz; ++k) {
            long i, j;
            double v;
            if (!(in >> i >> j >> v)) throw ValidationError(path + ": truncated entry list");
            if (i < 1 || i > rows || j < 1 || j > cols)
                throw ValidationError(path + ": index out of range");
            t.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
            if (sym && i != j) t.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
        }
    } else {
        if (!(ss >> rows >> cols)) throw ValidationError(path + ": bad size line");
        for (long j = 0; j < cols; ++j)
            for (long i = sym ? j : 0; i < rows; ++i) {
                double v;
                if (!(in >> v)) throw ValidationError(path + ": truncated array");
                if (v == 0.0) continue;
                t.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
                if (sym && i != j) t.emplace_back(static_cast<int>(j), static_cast<int>(i), v);
            }
    }
    return from_triplets(rows, cols, t);
}

DenseMatrix read_matrix_market_dense(const std::string& path) {
    return DenseMatrix(read_matrix_market(path));
}

}  // namespace mqsbt::la
