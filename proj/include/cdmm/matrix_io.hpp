#pragma once

// Matrix ingestion:
//  * Matrix Market coordinate files (real/integer/pattern, general or
//    symmetric) load as SparseMatrix.
//  * Dense CSV: one header line of column names, then one line per row.

#include <cctype>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cdmm/error.hpp"
#include "cdmm/matrix.hpp"

namespace cdmm {

inline SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  for (auto* s : {&object, &format, &field, &symmetry}) {
    for (auto& ch : *s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (tag != "%%MatrixMarket" || object != "matrix") throw ParseError("matrix market: bad banner");
  if (format != "coordinate") throw ParseError("matrix market: only coordinate format is supported");
  if (field != "real" && field != "integer" && field != "pattern" && field != "double") {
    throw ParseError("matrix market: unsupported field '" + field + "'");
  }
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") throw ParseError("matrix market: unsupported symmetry '" + symmetry + "'");

  do {
    if (!std::getline(in, line)) throw ParseError("matrix market: missing size line");
  } while (line.empty() || line[0] == '%');
  std::size_t rows = 0, cols = 0, entries = 0;
  {
    std::istringstream size(line);
    if (!(size >> rows >> cols >> entries)) throw ParseError("matrix market: bad size line");
  }
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(symmetric ? 2 * entries : entries);
  for (std::size_t i = 0; i < entries; ++i) {
    if (!std::getline(in, line)) throw ParseError("matrix market: expected " + std::to_string(entries) + " entries");
    if (line.empty() || line[0] == '%') {
      --i;
      continue;
    }
    std::istringstream es(line);
    std::size_t r = 0, c = 0;
    double v = 1.0;
    if (!(es >> r >> c) || (field != "pattern" && !(es >> v))) {
      throw ParseError("matrix market: bad entry line '" + line + "'");
    }
    if (r == 0 || c == 0 || r > rows || c > cols) throw ParseError("matrix market: index out of range");
    trip.push_back({r - 1, c - 1, v});
    if (symmetric && r != c) trip.push_back({c - 1, r - 1, v});
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(trip));
}

inline void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  out << std::setprecision(17);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (std::size_t p = m.col_ptr()[c]; p < m.col_ptr()[c + 1]; ++p) {
      out << m.row_idx()[p] + 1 << ' ' << c + 1 << ' ' << m.values()[p] << '\n';
    }
  }
}

inline DenseMatrix read_dense_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv: missing header line");
  std::size_t cols = 1;
  for (char ch : line) cols += ch == ',';
  std::vector<double> entries;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(ls, cell, ',')) {
      std::size_t used = 0;
      try {
        entries.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        used = 0;
      }
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used == 0 || used != cell.size()) {
        throw ParseError("csv: row " + std::to_string(rows + 1) + " has non-numeric cell '" + cell + "'");
      }
      ++n;
    }
    if (n != cols) {
      throw ParseError("csv: row " + std::to_string(rows + 1) + " has " + std::to_string(n) +
                       " cells, header has " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("csv: no data rows");
  return DenseMatrix(rows, cols, std::move(entries));
}

inline void write_dense_csv(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << "c" << c;
  out << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

inline SparseMatrix load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_matrix_market(in);
}

inline DenseMatrix load_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_dense_csv(in);
}

}  // namespace cdmm
