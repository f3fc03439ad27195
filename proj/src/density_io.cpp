#include "afcsim/density_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "afcsim/error.hpp"

namespace afcsim::quantum {

Complex parse_complex(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double re = std::strtod(begin, &end);
  if (end == begin) throw DataError("density matrix: bad complex token '" + token + "'");
  if (*end == '\0') return {re, 0.0};
  const char* im_begin = end;
  const double im = std::strtod(im_begin, &end);
  if (end == im_begin || *im_begin == '\0' || (*im_begin != '+' && *im_begin != '-') ||
      std::string(end) != "j") {
    throw DataError("density matrix: bad complex token '" + token + "'");
  }
  return {re, im};
}

std::string format_complex(Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gj", z.real(), z.imag());
  return buf;
}

void write_density_matrix(std::ostream& out, const Matrix4& m, const std::string& comment) {
  out << "# afcsim density matrix v1\n";
  out << "# basis: ee el le ll (row-major; first qubit = idler, second = signal)\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  }
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out << (c ? " " : "") << format_complex(m(r, c));
    out << '\n';
  }
}

std::string format_density_matrix(const Matrix4& m, const std::string& comment) {
  std::ostringstream os;
  write_density_matrix(os, m, comment);
  return os.str();
}

Matrix4 read_density_matrix(std::istream& in) {
  std::vector<Complex> values;
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::vector<Complex> parsed;
    for (std::string tok; row >> tok;) parsed.push_back(parse_complex(tok));
    if (parsed.size() != 4) {
      throw DataError("density matrix: expected 4 entries per row, got " + std::to_string(parsed.size()));
    }
    values.insert(values.end(), parsed.begin(), parsed.end());
  }
  if (values.size() != 16) {
    throw DataError("density matrix: expected 4 rows, got " + std::to_string(values.size() / 4));
  }
  Matrix4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = values[4 * r + c];
  }
  return m;
}

Matrix4 load_density_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open density matrix file " + path.string());
  return read_density_matrix(in);
}

}  // namespace afcsim::quantum
