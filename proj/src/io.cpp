#include "bp/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "bp/errors.hpp"

namespace bp {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  return lowercase(path.substr(dot + 1));
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open file: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write file: " + path);
  return out;
}

double parse_double(const std::string& tok, const std::string& path) {
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("bad numeric value '" + tok + "' in " + path);
  }
}

}  // namespace

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_matrix_market(const std::string& path, const Matrix& M) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << " " << M.cols() << "\n";
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      out << format_full(M(i, j)) << "\n";
  if (!out) throw InvalidInput("write failed: " + path);
}

Matrix load_matrix_market(const std::string& path) {
  auto in = open_in(path);
  std::string header;
  if (!std::getline(in, header))
    throw InvalidInput("empty MatrixMarket file: " + path);
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lowercase(object) != "matrix")
    throw InvalidInput("not a MatrixMarket file: " + path);
  if (lowercase(format) != "array")
    throw InvalidInput("only dense array MatrixMarket supported: " + path);
  const std::string f = lowercase(field);
  if (f != "real" && f != "integer" && f != "double")
    throw InvalidInput("only real MatrixMarket fields supported: " + path);
  if (lowercase(symmetry) != "general")
    throw InvalidInput("only general MatrixMarket symmetry supported: " + path);

  std::string line;
  Eigen::Index rows = -1, cols = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    long long r = 0, c = 0;
    if (!(ls >> r >> c) || r < 0 || c < 0)
      throw InvalidInput("bad MatrixMarket size line in " + path);
    rows = static_cast<Eigen::Index>(r);
    cols = static_cast<Eigen::Index>(c);
    break;
  }
  if (rows < 0) throw InvalidInput("missing MatrixMarket size line in " + path);

  Matrix M(rows, cols);
  Eigen::Index count = 0;
  std::string tok;
  while (count < rows * cols && in >> tok) {
    if (tok[0] == '%') {
      std::getline(in, line);
      continue;
    }
    M(count % rows, count / rows) = parse_double(tok, path);
    ++count;
  }
  if (count != rows * cols)
    throw InvalidInput("truncated MatrixMarket data in " + path);
  return M;
}

void save_matrix_csv(const std::string& path, const Matrix& M) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ",";
      out << format_full(M(i, j));
    }
    out << "\n";
  }
  if (!out) throw InvalidInput("write failed: " + path);
}

Matrix load_matrix_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      if (b == std::string::npos)
        throw InvalidInput("empty CSV cell in " + path);
      row.push_back(parse_double(cell.substr(b, e - b + 1), path));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidInput("ragged CSV rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("empty CSV file: " + path);
  Matrix M(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      M(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return M;
}

Matrix load_matrix(const std::string& path) {
  const std::string ext = extension(path);
  if (ext == "mtx") return load_matrix_market(path);
  if (ext == "csv") return load_matrix_csv(path);
  throw InvalidInput("unknown matrix file extension: " + path);
}

void save_matrix(const std::string& path, const Matrix& M) {
  const std::string ext = extension(path);
  if (ext == "mtx") return save_matrix_market(path, M);
  if (ext == "csv") return save_matrix_csv(path, M);
  throw InvalidInput("unknown matrix file extension: " + path);
}

Vector load_vector(const std::string& path) {
  const Matrix M = load_matrix(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw InvalidInput("vector file must have a single row or column: " + path);
}

}  // namespace bp
