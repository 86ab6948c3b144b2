#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "holomera/geometry.hpp"
#include "holomera/layer.hpp"
#include "holomera/rng.hpp"

using namespace holomera;

namespace {

DenseTensor random_sym_op(index_t d, Rng& rng) {
    DenseTensor t({d, d, d, d});
    for (index_t i = 0; i < t.size(); ++i) t[i] = rng.gaussian();
    return symmetrized(t);
}

DenseTensor random_dense(std::vector<index_t> dims, Rng& rng) {
    DenseTensor t(std::move(dims));
    for (index_t i = 0; i < t.size(); ++i) t[i] = rng.gaussian();
    return t;
}

MeraLayer random_layer(index_t fine, index_t coarse, Rng& rng) {
    MeraLayer L;
    DenseTensor gu = random_dense({fine * fine, fine * fine}, rng);
    L.u = polar_isometry(gu, {0}, {1}).isometry.tensor.reshaped({fine, fine, fine, fine});
    DenseTensor gw = random_dense({fine * fine, coarse}, rng);
    L.w = polar_isometry(gw, {0}, {1}).isometry.tensor.reshaped({fine, fine, coarse});
    return L;
}

double tr_pair(const DenseTensor& r, const DenseTensor& o) {
    return contract(r, o, {{0, 2}, {1, 3}, {2, 0}, {3, 1}})[0];
}

DenseTensor identity_op(index_t d) {
    return DenseTensor::identity(d * d).reshaped({d, d, d, d});
}

}  // namespace

TEST_CASE("ascending channels are unital and linear") {
    Rng rng(101, "layer");
    MeraLayer L = random_layer(3, 3, rng);
    DenseTensor id = identity_op(3);

    REQUIRE((ascend_disconnected(id, L) - id).max_abs() < 1e-12);
    REQUIRE((ascend_center(id, L) - id).max_abs() < 1e-12);
    REQUIRE((ascend_left(id, L) - id).max_abs() < 1e-12);
    REQUIRE((ascend_right(id, L) - id).max_abs() < 1e-12);

    DenseTensor three = id;
    three *= 3.0;
    REQUIRE((ascend_B(id, id, L) - three).max_abs() < 1e-12);

    DenseTensor zero({3, 3, 3, 3});
    REQUIRE(ascend_A(zero, L).max_abs() == 0.0);
    REQUIRE(ascend_B(zero, zero, L).max_abs() == 0.0);
}

TEST_CASE("ascending channels preserve hermiticity") {
    Rng rng(103, "layer");
    MeraLayer L = random_layer(2, 4, rng);
    for (int trial = 0; trial < 5; ++trial) {
        DenseTensor o = random_sym_op(2, rng);
        REQUIRE(hermiticity_defect(ascend_disconnected(o, L)) < 1e-12);
        REQUIRE(hermiticity_defect(ascend_center(o, L)) < 1e-12);
        REQUIRE(hermiticity_defect(ascend_left(o, L)) < 1e-12);
        REQUIRE(hermiticity_defect(ascend_right(o, L)) < 1e-12);
    }
}

TEST_CASE("descending channels are the trace adjoints of the ascents") {
    Rng rng(107, "layer");
    MeraLayer L = random_layer(3, 4, rng);
    using Chan = std::function<DenseTensor(const DenseTensor&, const MeraLayer&)>;
    std::vector<std::pair<Chan, Chan>> pairs = {
        {[](const DenseTensor& o, const MeraLayer& l) { return ascend_disconnected(o, l); },
         [](const DenseTensor& r, const MeraLayer& l) { return descend_disconnected(r, l); }},
        {[](const DenseTensor& o, const MeraLayer& l) { return ascend_center(o, l); },
         [](const DenseTensor& r, const MeraLayer& l) { return descend_center(r, l); }},
        {[](const DenseTensor& o, const MeraLayer& l) { return ascend_left(o, l); },
         [](const DenseTensor& r, const MeraLayer& l) { return descend_left(r, l); }},
        {[](const DenseTensor& o, const MeraLayer& l) { return ascend_right(o, l); },
         [](const DenseTensor& r, const MeraLayer& l) { return descend_right(r, l); }},
    };
    for (auto& [asc, desc] : pairs) {
        for (int trial = 0; trial < 3; ++trial) {
            DenseTensor o = random_sym_op(3, rng);
            DenseTensor rho = random_sym_op(4, rng);
            double lhs = tr_pair(rho, asc(o, L));
            double rhs = tr_pair(desc(rho, L), o);
            REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-11).margin(1e-11));
        }
    }
}

TEST_CASE("descending a density pair preserves trace and positivity of trace") {
    Rng rng(109, "layer");
    MeraLayer L = random_layer(3, 5, rng);
    DensityPair rho;
    rho.rhoA = random_sym_op(5, rng);
    rho.rhoB = random_sym_op(5, rng);
    // normalize traces to 1
    rho.rhoA *= 1.0 / tr_pair(rho.rhoA, identity_op(5));
    rho.rhoB *= 1.0 / tr_pair(rho.rhoB, identity_op(5));
    DensityPair down = descend_pair(rho, L);
    REQUIRE(tr_pair(down.rhoA, identity_op(3)) == Catch::Approx(1.0).margin(1e-11));
    REQUIRE(tr_pair(down.rhoB, identity_op(3)) == Catch::Approx(1.0).margin(1e-11));
}

TEST_CASE("tensor environments match finite differences of the cell energy") {
    Rng rng(113, "layer");
    const index_t f = 2, c = 3;
    MeraLayer L = random_layer(f, c, rng);
    CouplingPair h{random_sym_op(f, rng), random_sym_op(f, rng)};
    DensityPair rho{random_sym_op(c, rng), random_sym_op(c, rng)};

    const double eps = 1e-6;
    auto energy_with = [&](const MeraLayer& lay) { return cell_energy(rho, h, lay); };

    DenseTensor gu = env_u(rho, h, L);
    for (index_t probe : {index_t{0}, index_t{5}, index_t{9}, index_t{14}}) {
        MeraLayer lp = L, lm = L;
        lp.u[probe] += eps;
        lm.u[probe] -= eps;
        double fd = (energy_with(lp) - energy_with(lm)) / (2 * eps);
        // u enters bra and ket; symmetric rho and h make both derivatives equal
        REQUIRE(fd == Catch::Approx(2.0 * gu[probe]).epsilon(1e-4).margin(1e-7));
    }

    DenseTensor gw = env_w(rho, h, L);
    for (index_t probe : {index_t{0}, index_t{3}, index_t{7}, index_t{11}}) {
        MeraLayer lp = L, lm = L;
        lp.w[probe] += eps;
        lm.w[probe] -= eps;
        double fd = (energy_with(lp) - energy_with(lm)) / (2 * eps);
        REQUIRE(fd == Catch::Approx(2.0 * gw[probe]).epsilon(1e-4).margin(1e-7));
    }
}

TEST_CASE("positioned bulk ascent lands where the support simulation says") {
    Rng rng(127, "layer");
    MeraLayer L = random_layer(2, 2, rng);
    for (index_t p = -21; p <= 20; ++p) {
        if (p >= -1 && p <= 3) continue;  // cone neighbourhood handled by interfaces
        PositionedTerm t{p, random_sym_op(2, rng)};
        PositionedTerm up = ascend_term_bulk(t, L);
        std::set<index_t> supp = coarse_support(region_sites(p, p + 1));
        REQUIRE(supp.count(up.pos) == 1);
        REQUIRE(supp.count(up.pos + 1) == 1);
        REQUIRE(supp.size() == 2);
    }
}

TEST_CASE("interface ascents absorb the identity") {
    Rng rng(131, "layer");
    MeraLayer L = random_layer(3, 3, rng);
    DenseTensor id = identity_op(3);
    DenseTensor right = ascend_term_interface_right(id, L);
    DenseTensor left = ascend_term_interface_left(id, L);
    REQUIRE((right - id).max_abs() < 1e-12);
    REQUIRE((left - id).max_abs() < 1e-12);
}

TEST_CASE("interface ascents are exact on explicit small contractions") {
    // right interface: conjugate only the exterior w on the second op leg
    Rng rng(137, "layer");
    MeraLayer L = random_layer(2, 3, rng);
    DenseTensor o = random_sym_op(2, rng);
    DenseTensor res = ascend_term_interface_right(o, L);
    // brute force: sum_f5 o[p1o p2o p1i p2i] w[p2i f5 c2i] w[p2o f5 c2o]
    DenseTensor brute({2, 3, 2, 3});
    for (index_t p1o = 0; p1o < 2; ++p1o)
        for (index_t c2o = 0; c2o < 3; ++c2o)
            for (index_t p1i = 0; p1i < 2; ++p1i)
                for (index_t c2i = 0; c2i < 3; ++c2i) {
                    double s = 0;
                    for (index_t p2o = 0; p2o < 2; ++p2o)
                        for (index_t p2i = 0; p2i < 2; ++p2i)
                            for (index_t f5 = 0; f5 < 2; ++f5)
                                s += o.at({p1o, p2o, p1i, p2i}) * L.w.at({p2i, f5, c2i}) *
                                     L.w.at({p2o, f5, c2o});
                    brute.at({p1o, c2o, p1i, c2i}) = s;
                }
    REQUIRE((res - brute).max_abs() < 1e-12);
}
