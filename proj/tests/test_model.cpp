#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "holomera/linalg.hpp"
#include "holomera/model.hpp"
#include "oracles/free_fermion.hpp"

using namespace holomera;

TEST_CASE("critical Ising couplings are hermitian and equal on both bonds") {
    TwoCouplingHamiltonian H = critical_ising();
    H.check();
    REQUIRE((H.hA - H.hB).max_abs() == 0.0);
    REQUIRE(H.site_dim == 2);
    REQUIRE(H.energy_shift == 0.0);
    REQUIRE(dynamic_exponent(H) == 1);
    REQUIRE(wilson_lambda(H) == 2.0);
}

TEST_CASE("single bond term spectrum is {-sqrt2, -1, 1, sqrt2}") {
    TwoCouplingHamiltonian H = critical_ising();
    EighResult r = eigh_lowest(as_matrix2(H.hA), 4);
    const double s2 = std::sqrt(2.0);
    REQUIRE(r.values[0] == Catch::Approx(-s2).margin(1e-12));
    REQUIRE(r.values[1] == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE(r.values[2] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(r.values[3] == Catch::Approx(s2).margin(1e-12));
}

TEST_CASE("free-fermion ring energy density approaches -4/pi") {
    // the mode-sum oracle, evaluated at a large ring
    double e = oracle::energy_density(4096);
    REQUIRE(e == Catch::Approx(-4.0 / M_PI).margin(1e-6));
    // and it converges monotonically from below in magnitude
    REQUIRE(std::abs(oracle::energy_density(64) + 4.0 / M_PI) >
            std::abs(oracle::energy_density(256) + 4.0 / M_PI));
}

TEST_CASE("free-fermion gap dimensions approach 1/8 and 1") {
    auto [sig256, eps256] = oracle::gap_dimensions(256);
    REQUIRE(sig256 == Catch::Approx(0.125).margin(2e-3));
    REQUIRE(eps256 == Catch::Approx(1.0).margin(2e-3));
}

TEST_CASE("Majorana pipeline agrees with brute-force spin chain diagonalization") {
    for (double lambda : {1.0, 0.5, 0.25}) {
        oracle::DefectChain c{8, 3, lambda};
        oracle::SpinChainResult ed = oracle::spin_chain_ed(c);
        REQUIRE(oracle::defect_ground_energy(c) ==
                Catch::Approx(ed.ground_energy).margin(1e-10));
        std::vector<double> z = oracle::z_profile(c);
        for (int j = 0; j < 8; ++j)
            REQUIRE(z[static_cast<size_t>(j)] ==
                    Catch::Approx(ed.z_profile[static_cast<size_t>(j)]).margin(1e-10));
    }
}

TEST_CASE("bulk magnetization of the homogeneous chain is 2/pi") {
    std::vector<double> z = oracle::z_profile(oracle::DefectChain{512, 255, 1.0});
    REQUIRE(z[256] == Catch::Approx(2.0 / M_PI).margin(1e-3));
}

TEST_CASE("bond impurity presets") {
    ImpurityModel imp1 = bond_impurity(1.0);
    REQUIRE(imp1.is_zero());

    ImpurityModel imp0 = bond_impurity(0.0);
    // lambda = 0 removes the whole -X(x)X coupling: term = +X(x)X
    DenseTensor expect = kron(pauli_x(), pauli_x()).reshaped({2, 2, 2, 2});
    REQUIRE((imp0.term - expect).max_abs() == 0.0);

    ImpurityModel imph = bond_impurity(0.5);
    REQUIRE(hermiticity_defect(imph.term) == 0.0);
    REQUIRE_THROWS_AS(bond_impurity(-0.1), TensorError);
}

TEST_CASE("field impurity and preset parsing") {
    ImpurityModel f = field_impurity(0.3);
    REQUIRE(hermiticity_defect(f.term) == 0.0);
    REQUIRE(f.term.max_abs() == Catch::Approx(0.3));

    ModelPreset p1 = parse_model("ising");
    REQUIRE_FALSE(p1.impurity.has_value());
    ModelPreset p2 = parse_model("ising+bond:0.5");
    REQUIRE(p2.impurity.has_value());
    REQUIRE(p2.impurity->label.substr(0, 5) == "bond:");
    ModelPreset p3 = parse_model("ising+field:0.25");
    REQUIRE(p3.impurity.has_value());
    REQUIRE_THROWS_AS(parse_model("heisenberg"), TensorError);
    REQUIRE_THROWS_AS(parse_model("ising+kink:1"), TensorError);
}

TEST_CASE("shifted couplings zero the recorded expectations") {
    TwoCouplingHamiltonian H = critical_ising();
    TwoCouplingHamiltonian S = shifted_couplings(H, -1.2, -1.2);
    REQUIRE(S.energy_shift == Catch::Approx(-1.2));
    // constant Hamiltonian shifts to exactly zero
    TwoCouplingHamiltonian C = H;
    C.hA = DenseTensor::identity(4).reshaped({2, 2, 2, 2});
    C.hA *= 3.5;
    C.hB = C.hA;
    TwoCouplingHamiltonian Cs = shifted_couplings(C, 3.5, 3.5);
    REQUIRE(Cs.hA.max_abs() == 0.0);
    REQUIRE(Cs.hB.max_abs() == 0.0);
}
