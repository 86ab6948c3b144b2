#pragma once

// Lattice models: two-coupling nearest-neighbour Hamiltonians on an infinite
// chain (h^A on even bonds, h^B on odd bonds), critical presets and local
// defect terms. Single-site fields are shared half-half between the two
// adjacent bonds so the presets keep h^A = h^B.

#include <cmath>
#include <optional>
#include <string>

#include "holomera/tensor.hpp"

namespace holomera {

inline DenseTensor pauli_x() { return DenseTensor({2, 2}, {0, 1, 1, 0}); }
inline DenseTensor pauli_y_imag() { return DenseTensor({2, 2}, {0, -1, 1, 0}); }  // iY, real
inline DenseTensor pauli_z() { return DenseTensor({2, 2}, {1, 0, 0, -1}); }

/// Two-site operator stored with 4 indices [o1 o2 i1 i2].
inline DenseTensor two_site(const DenseTensor& m4x4, index_t q) {
    return m4x4.reshaped({q, q, q, q});
}

inline DenseTensor as_matrix2(const DenseTensor& op) {
    const index_t d = op.dim(0) * op.dim(1);
    return op.reshaped({d, d});
}

struct TwoCouplingHamiltonian {
    DenseTensor hA;        // even bonds, 4 indices of dimension q
    DenseTensor hB;        // odd bonds
    index_t site_dim = 2;  // q
    double energy_shift = 0.0;  // identity offset already subtracted, per bond
    std::string label = "custom";

    void check() const {
        detail::require(hA.rank() == 4 && hB.rank() == 4, "hamiltonian: two-site terms expected");
        detail::require(hermiticity_defect(hA) <= 1e-12 && hermiticity_defect(hB) <= 1e-12,
                        "hamiltonian: couplings must be hermitian");
    }
};

/// Transverse-field Ising at its critical point:
///   h = -X(x)X - (Z(x)1 + 1(x)Z)/2   on every bond, site_dim 2.
/// Lorentz-invariant critical point, so z = 1 and the Wilson amplitude is 2.
inline TwoCouplingHamiltonian critical_ising() {
    DenseTensor X = pauli_x(), Z = pauli_z(), I = DenseTensor::identity(2);
    DenseTensor m = DenseTensor({4, 4});
    m -= kron(X, X);
    DenseTensor zfield = kron(Z, I) + kron(I, Z);
    zfield *= 0.5;
    m -= zfield;
    TwoCouplingHamiltonian H;
    H.hA = two_site(m, 2);
    H.hB = H.hA;
    H.site_dim = 2;
    H.energy_shift = 0.0;
    H.label = "ising";
    return H;
}

inline int dynamic_exponent(const TwoCouplingHamiltonian&) { return 1; }
inline double wilson_lambda(const TwoCouplingHamiltonian& H) {
    return std::pow(2.0, dynamic_exponent(H));
}

/// Hermitian defect term on the central two-site cell.
struct ImpurityModel {
    DenseTensor term;      // [o1 o2 i1 i2] on the two sites of the region
    int region_offset = 0; // region sits on the central cell by convention
    std::string label;

    bool is_zero(double tol = 0.0) const { return term.max_abs() <= tol; }
};

/// Bond-strength defect: total X(x)X coupling on the central bond becomes
/// lambda times the bulk value; lambda = 1 is the homogeneous chain and
/// lambda = 0 cuts the bond.
inline ImpurityModel bond_impurity(double lambda) {
    detail::require(lambda >= 0.0, "bond_impurity: lambda must be >= 0");
    DenseTensor X = pauli_x();
    DenseTensor m = kron(X, X);
    m *= -(lambda - 1.0);  // (lambda - 1) * (-X x X)
    ImpurityModel imp;
    imp.term = two_site(m, 2);
    imp.label = "bond:" + std::to_string(lambda);
    return imp;
}

/// Local field defect: delta * Z on the left site of the region.
inline ImpurityModel field_impurity(double delta) {
    DenseTensor m = kron(pauli_z(), DenseTensor::identity(2));
    m *= delta;
    ImpurityModel imp;
    imp.term = two_site(m, 2);
    imp.label = "field:" + std::to_string(delta);
    return imp;
}

/// Parse a model preset name: "ising", "ising+bond:<lambda>", "ising+field:<delta>".
struct ModelPreset {
    TwoCouplingHamiltonian hamiltonian;
    std::optional<ImpurityModel> impurity;
};

inline ModelPreset parse_model(const std::string& name) {
    ModelPreset p;
    if (name == "ising") {
        p.hamiltonian = critical_ising();
        return p;
    }
    auto plus = name.find('+');
    detail::require(plus != std::string::npos && name.substr(0, plus) == "ising",
                    "unknown model preset '" + name + "'");
    std::string defect = name.substr(plus + 1);
    auto colon = defect.find(':');
    detail::require(colon != std::string::npos, "defect preset needs a parameter: '" + defect + "'");
    std::string kind = defect.substr(0, colon);
    double value = std::stod(defect.substr(colon + 1));
    p.hamiltonian = critical_ising();
    if (kind == "bond")
        p.impurity = bond_impurity(value);
    else if (kind == "field")
        p.impurity = field_impurity(value);
    else
        throw TensorError("unknown defect preset '" + kind + "'");
    return p;
}

/// Subtract the identity component fixing <hA> = <hB> = 0 for the supplied
/// per-bond expectation values; the offsets are recorded in energy_shift.
inline TwoCouplingHamiltonian shifted_couplings(const TwoCouplingHamiltonian& H,
                                                double expect_A, double expect_B) {
    TwoCouplingHamiltonian out = H;
    const index_t q = H.site_dim;
    DenseTensor id4 = DenseTensor::identity(q * q).reshaped({q, q, q, q});
    DenseTensor dA = id4, dB = id4;
    dA *= expect_A;
    dB *= expect_B;
    out.hA -= dA;
    out.hB -= dB;
    out.energy_shift = H.energy_shift + 0.5 * (expect_A + expect_B);
    return out;
}

}  // namespace holomera
