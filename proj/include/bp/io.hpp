#pragma once

#include <string>

#include "bp/linalg.hpp"

namespace bp {

// Round-trip formatting for doubles (17 significant digits).
std::string format_full(double v);

// Dense MatrixMarket ("array real general") storage, column-major values.
void save_matrix_market(const std::string& path, const Matrix& M);
Matrix load_matrix_market(const std::string& path);

// Comma-separated values, one matrix row per line, '.' decimal separator.
void save_matrix_csv(const std::string& path, const Matrix& M);
Matrix load_matrix_csv(const std::string& path);

// Dispatch on extension: .mtx -> MatrixMarket, .csv -> CSV.
Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& M);

// A vector file is a matrix file with a single row or single column.
Vector load_vector(const std::string& path);

}  // namespace bp
