#include "npkry/io.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "npkry/error.hpp"

namespace npkry {

void write_matrix_market(const SparseMatrix& A,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  check(out.good(), "cannot open for writing: " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nnz() << "\n";
  const auto row_ptr = A.row_ptr();
  const auto col_idx = A.col_idx();
  const auto values = A.values();
  char buf[64];
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", values[k]);
      out << (i + 1) << " " << (col_idx[k] + 1) << " " << buf << "\n";
    }
  check(out.good(), "write failed: " + path.string());
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open: " + path.string());
  std::string line;
  check(static_cast<bool>(std::getline(in, line)),
        "empty Matrix Market file: " + path.string());
  check(line.rfind("%%MatrixMarket", 0) == 0,
        "missing MatrixMarket banner: " + path.string());
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  check(object == "matrix" && format == "coordinate" && field == "real",
        "unsupported Matrix Market header: " + line);
  const bool symmetric = symmetry == "symmetric";
  check(symmetric || symmetry == "general",
        "unsupported symmetry kind: " + symmetry);
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream dims(line);
  std::size_t rows = 0, cols = 0, nnz = 0;
  dims >> rows >> cols >> nnz;
  check(rows > 0 && cols > 0, "bad dimensions in " + path.string());
  std::vector<SparseMatrix::Triplet> triplets;
  triplets.reserve(symmetric ? 2 * nnz : nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t i = 0, j = 0;
    double v = 0.0;
    in >> i >> j >> v;
    check(static_cast<bool>(in), "truncated Matrix Market file");
    check(i >= 1 && j >= 1 && i <= rows && j <= cols,
          "index out of range in " + path.string());
    triplets.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j) triplets.emplace_back(j - 1, i - 1, v);
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(triplets));
}

void write_vector_blob(const DenseVector& v,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "cannot open for writing: " + path.string());
  const std::uint64_t n = v.size();
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(8 * v.size()));
  check(out.good(), "write failed: " + path.string());
}

DenseVector read_vector_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open: " + path.string());
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  check(static_cast<bool>(in) && n > 0, "bad blob header: " + path.string());
  std::vector<double> data(n);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(8 * n));
  check(static_cast<bool>(in), "truncated blob: " + path.string());
  return DenseVector(std::move(data));
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string& f = fields[i];
    const bool quote = f.find_first_of(",\"\n\r") != std::string::npos;
    if (i) out += ',';
    if (!quote) {
      out += f;
    } else {
      out += '"';
      for (char c : f) {
        out += c;
        if (c == '"') out += '"';
      }
      out += '"';
    }
  }
  out += '\n';
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace npkry
