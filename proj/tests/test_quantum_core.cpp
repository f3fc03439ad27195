#include <cmath>
#include <numbers>

#include "doctest.h"

#include "afcsim/density_io.hpp"
#include "afcsim/error.hpp"
#include "afcsim/quantum_core.hpp"
#include "fixtures.hpp"

using namespace afcsim;
using namespace afcsim::quantum;

namespace {

TwoQubitState werner(double v) {
  return projector(bell_psi_plus()).mixed_with(TwoQubitState::maximally_mixed(), 1.0 - v);
}

}  // namespace

TEST_CASE("time-bin kets") {
  CHECK_THROWS_AS(TimeBinKet(1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(TimeBinKet::normalized(0.0, 0.0), InvalidArgument);
  auto d = TimeBinKet::diagonal();
  CHECK(std::abs(d.late_amplitude() - Complex(std::sqrt(0.5), 0.0)) < 1e-15);
  auto r = TimeBinKet::right_circular();
  CHECK(std::abs(r.late_amplitude() - Complex(0.0, std::sqrt(0.5))) < 1e-15);
  auto e = TimeBinKet::energy_basis(-std::numbers::pi / 2);
  CHECK(std::abs(e.late_amplitude() - r.late_amplitude()) < 1e-15);
}

TEST_CASE("bell state and basis order") {
  auto psi = bell_psi_plus();
  CHECK(std::abs(psi[Basis::EE] - Complex(std::sqrt(0.5))) < 1e-15);
  CHECK(std::abs(psi[Basis::EL]) < 1e-15);
  auto prod = TwoQubitKet::product(TimeBinKet::early(), TimeBinKet::late());
  CHECK(std::abs(prod[Basis::EL] - 1.0) < 1e-15);
}

TEST_CASE("state validation") {
  Matrix4 m = Matrix4::Identity() * 0.3;
  CHECK_THROWS_AS(TwoQubitState::from_matrix(m), DataError);
  Matrix4 h = Matrix4::Identity() * 0.25;
  h(0, 1) = Complex(0.0, 0.1);
  CHECK_THROWS_AS(TwoQubitState::from_matrix(h), DataError);
  Matrix4 neg = Matrix4::Zero();
  neg(0, 0) = 1.1;
  neg(1, 1) = -0.1;
  CHECK_THROWS_AS(TwoQubitState::from_matrix(neg), DataError);
  CHECK_THROWS_AS(nearest_psd(neg), DataError);
}

TEST_CASE("metrics of pure and mixed reference states") {
  auto bell = projector(bell_psi_plus());
  CHECK(fidelity(bell, bell) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(purity(bell) == doctest::Approx(1.0));
  CHECK(concurrence(bell) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(entanglement_of_formation(bell) == doctest::Approx(1.0).epsilon(1e-9));
  auto mixed = TwoQubitState::maximally_mixed();
  CHECK(purity(mixed) == doctest::Approx(0.25));
  CHECK(concurrence(mixed) == doctest::Approx(0.0));
  CHECK(fidelity(bell, mixed) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(trace_distance(bell, mixed) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("werner state oracle") {
  auto w = werner(0.7);
  CHECK(w.expectation(bell_psi_plus()) == doctest::Approx(0.775).epsilon(1e-12));
  CHECK(purity(w) == doctest::Approx(0.6175).epsilon(1e-12));
  CHECK(concurrence(w) == doctest::Approx(0.55).epsilon(1e-10));
  CHECK(entanglement_of_formation(w) == doctest::Approx(0.4106412413367915).epsilon(1e-9));
}

TEST_CASE("binary entropy edges") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(eof_from_concurrence(0.0) == doctest::Approx(0.0));
}

TEST_CASE("golden before/after matrices") {
  const Matrix4 before = load_density_matrix(testing::fixture("table4_before.txt"));
  const Matrix4 after = load_density_matrix(testing::fixture("table4_after.txt"));
  const auto psi = bell_psi_plus().vector();

  // raw matrix, before any clipping
  CHECK((psi.adjoint() * before * psi)(0).real() == doctest::Approx(0.9125).epsilon(1e-12));
  CHECK(before.cwiseAbs2().sum() == doctest::Approx(0.838377).epsilon(1e-12));
  CHECK(before.trace().real() == doctest::Approx(0.999).epsilon(1e-12));

  auto b = nearest_psd(before);
  auto a = nearest_psd(after);
  CHECK(b.expectation(bell_psi_plus()) == doctest::Approx(0.9134134134134134).epsilon(1e-9));
  CHECK(purity(b) == doctest::Approx(0.8400562724887052).epsilon(1e-9));
  CHECK(concurrence(b) == doctest::Approx(0.8286204329290165).epsilon(1e-8));
  CHECK(entanglement_of_formation(b) == doctest::Approx(0.7603401643976924).epsilon(1e-8));
  CHECK(fidelity(b, projector(bell_psi_plus())) == doctest::Approx(0.9134134134134134).epsilon(1e-8));

  CHECK(a.expectation(bell_psi_plus()) == doctest::Approx(0.8648648648648646).epsilon(1e-9));
  CHECK(purity(a) == doctest::Approx(0.772018264510757).epsilon(1e-9));
  CHECK(concurrence(a) == doctest::Approx(0.748185486373901).epsilon(1e-8));
  CHECK(entanglement_of_formation(a) == doctest::Approx(0.6536977840769623).epsilon(1e-8));

  CHECK(fidelity(b, a) == doctest::Approx(0.9337757811755527).epsilon(1e-8));
  CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)).epsilon(1e-10));
}

TEST_CASE("random states are valid") {
  Rng rng = make_rng(7);
  for (int rank = 1; rank <= 4; ++rank) {
    auto s = random_state(rng, rank);
    Eigen::SelfAdjointEigenSolver<Matrix4> es(s.matrix());
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(s.matrix().trace().real() == doctest::Approx(1.0));
    int nonzero = 0;
    for (int i = 0; i < 4; ++i) nonzero += es.eigenvalues()(i) > 1e-10;
    CHECK(nonzero == rank);
  }
  CHECK_THROWS_AS(random_state(rng, 0), InvalidArgument);
}

TEST_CASE("psd_sqrt squares back") {
  Rng rng = make_rng(11);
  auto s = random_state(rng);
  Matrix4 r = psd_sqrt(s.matrix());
  CHECK((r * r - s.matrix()).norm() < 1e-12);
}
