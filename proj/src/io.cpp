#include "lowrank/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lowrank {

namespace {

// Splits a line into whitespace-separated tokens.
std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line, int col) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected a decimal number, got '" + tok + "'", line, col);
  }
  if (pos != tok.size())
    throw ParseError("trailing characters in number '" + tok + "'", line, col);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + tok + "'", line, col);
  return v;
}

long parse_positive_int(const std::string& tok, int line, int col) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected a positive integer, got '" + tok + "'", line, col);
  }
  if (pos != tok.size() || v <= 0)
    throw ParseError("expected a positive integer, got '" + tok + "'", line, col);
  return v;
}

} // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // Prefer the shortest representation that still round-trips.
  for (int prec = 1; prec <= 16; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
    if (std::stod(shorter) == x) return shorter;
  }
  return buf;
}

Matrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header line", 1, 1);
  auto head = tokens_of(line);
  if (head.size() != 2)
    throw ParseError("header must be 'd1 d2'", 1, head.empty() ? 1 : (int)head.size());
  const long d1 = parse_positive_int(head[0], 1, 1);
  const long d2 = parse_positive_int(head[1], 1, 2);
  Matrix m(d1, d2);
  for (long i = 0; i < d1; ++i) {
    if (!std::getline(in, line))
      throw ParseError("expected " + std::to_string(d1) + " data rows, got " + std::to_string(i),
                       (int)(i + 2), 1);
    auto toks = tokens_of(line);
    if ((long)toks.size() != d2)
      throw ParseError("expected " + std::to_string(d2) + " fields, got " +
                           std::to_string(toks.size()),
                       (int)(i + 2), (int)toks.size() + 1);
    for (long j = 0; j < d2; ++j)
      m(i, j) = parse_double(toks[j], (int)(i + 2), (int)(j + 1));
  }
  return m;
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return read_matrix(f);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_file(const std::string& path, const Matrix& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrix(f, m);
}

Sample2D read_sample(std::istream& in) {
  Sample2D pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (toks.size() != 2)
      throw ParseError("expected two fields per point", lineno, (int)toks.size());
    pts.emplace_back(parse_double(toks[0], lineno, 1), parse_double(toks[1], lineno, 2));
  }
  return pts;
}

Sample2D read_sample_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return read_sample(f);
}

void write_sample(std::ostream& out, const Sample2D& pts) {
  for (const auto& [x, y] : pts) out << format_double(x) << ' ' << format_double(y) << '\n';
}

void write_sample_file(const std::string& path, const Sample2D& pts) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_sample(f, pts);
}

} // namespace lowrank
