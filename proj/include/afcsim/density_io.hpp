#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "afcsim/quantum_core.hpp"

namespace afcsim::quantum {

/// Text format: '#' comment lines (the header names the basis order), then four rows of
/// four "re+imj" tokens separated by whitespace, row-major.
///
///   # afcsim density matrix v1
///   # basis: ee el le ll (row-major; first qubit = idler, second = signal)
///   0.455+0j 0.005-0.013j ...
void write_density_matrix(std::ostream& out, const Matrix4& m, const std::string& comment = {});
std::string format_density_matrix(const Matrix4& m, const std::string& comment = {});

/// Reads the raw matrix (no validation beyond shape). Throws DataError on malformed input.
Matrix4 read_density_matrix(std::istream& in);
Matrix4 load_density_matrix(const std::filesystem::path& path);

/// Parses one "re+imj" / "re-imj" / "re" token.
Complex parse_complex(const std::string& token);
std::string format_complex(Complex z);

}  // namespace afcsim::quantum
