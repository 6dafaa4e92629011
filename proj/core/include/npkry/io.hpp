#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "npkry/dense_vector.hpp"
#include "npkry/sparse_matrix.hpp"

namespace npkry {

/// Matrix Market coordinate format, ASCII, 1-based indices,
/// "real general" header. Symmetric inputs are expanded on read.
void write_matrix_market(const SparseMatrix& A,
                         const std::filesystem::path& path);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

/// Raw little-endian f64 blob with an 8-byte (u64) length header.
void write_vector_blob(const DenseVector& v,
                       const std::filesystem::path& path);
DenseVector read_vector_blob(const std::filesystem::path& path);

/// One CSV record with RFC-4180 quoting.
std::string csv_row(const std::vector<std::string>& fields);
/// Splits one CSV record; understands quoted fields and doubled quotes.
std::vector<std::string> csv_split(const std::string& line);

/// Fixed-width decimal formatting used in every CSV the toolkit emits,
/// chosen so repeated runs are byte-identical.
std::string format_double(double v);

}  // namespace npkry
