#include <sstream>

#include "doctest.h"

#include "afcsim/density_io.hpp"
#include "afcsim/error.hpp"

using namespace afcsim;
using namespace afcsim::quantum;

TEST_CASE("complex tokens") {
  CHECK(parse_complex("0.455+0j") == Complex(0.455, 0.0));
  CHECK(parse_complex("0.005-0.013j") == Complex(0.005, -0.013));
  CHECK(parse_complex("-0.25") == Complex(-0.25, 0.0));
  CHECK(parse_complex("1e-3+2e-3j") == Complex(1e-3, 2e-3));
  CHECK_THROWS_AS(parse_complex("abc"), DataError);
  CHECK_THROWS_AS(parse_complex("0.1+0.2"), DataError);
}

TEST_CASE("matrix round trip") {
  Rng rng = make_rng(3);
  Matrix4 m = random_state(rng).matrix();
  std::stringstream ss;
  write_density_matrix(ss, m, "test");
  Matrix4 back = read_density_matrix(ss);
  CHECK((back - m).norm() < 1e-12);
}

TEST_CASE("malformed matrices") {
  std::istringstream three_rows("# x\n1 0 0 0\n0 1 0 0\n0 0 1 0\n");
  CHECK_THROWS_AS(read_density_matrix(three_rows), DataError);
  std::istringstream short_row("1 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
  CHECK_THROWS_AS(read_density_matrix(short_row), DataError);
  CHECK_THROWS_AS(load_density_matrix("/nonexistent/rho.txt"), DataError);
}
