#include <catch2/catch_amalgamated.hpp>

#include "holomera/rng.hpp"
#include "holomera/tensor.hpp"

using namespace holomera;

namespace {

DenseTensor random_tensor(std::vector<index_t> dims, Rng& rng) {
    DenseTensor t(std::move(dims));
    for (index_t i = 0; i < t.size(); ++i) t[i] = rng.gaussian();
    return t;
}

}  // namespace

TEST_CASE("identity contraction leaves a tensor unchanged") {
    Rng rng(3, "tensor");
    DenseTensor t = random_tensor({2, 5, 3}, rng);
    DenseTensor r = contract(DenseTensor::identity(2), t, {{1, 0}});
    REQUIRE(r.dims() == t.dims());
    for (index_t i = 0; i < t.size(); ++i) REQUIRE(r[i] == Catch::Approx(t[i]).margin(0));
}

TEST_CASE("contract reproduces a hand matrix product") {
    DenseTensor a({2, 2}, {1, 2, 3, 4});
    DenseTensor b({2, 2}, {5, 6, 7, 8});
    DenseTensor c = contract(a, b, {{1, 0}});
    REQUIRE(c[0] == 19.0);
    REQUIRE(c[1] == 22.0);
    REQUIRE(c[2] == 43.0);
    REQUIRE(c[3] == 50.0);
}

TEST_CASE("contract is bilinear") {
    Rng rng(11, "tensor");
    DenseTensor a = random_tensor({3, 4, 2}, rng);
    DenseTensor b = random_tensor({4, 3, 5}, rng);
    double alpha = 1.7321;
    DenseTensor sa = a;
    sa *= alpha;
    DenseTensor lhs = contract(sa, b, {{1, 0}, {0, 1}});
    DenseTensor rhs = contract(a, b, {{1, 0}, {0, 1}});
    rhs *= alpha;
    REQUIRE((lhs - rhs).max_abs() < 1e-12 * rhs.max_abs());
}

TEST_CASE("contract errors on dimension mismatch and bad indices") {
    DenseTensor a({2, 3});
    DenseTensor b({4, 2});
    REQUIRE_THROWS_AS(contract(a, b, {{1, 0}}), TensorError);
    REQUIRE_THROWS_AS(contract(a, b, {{2, 0}}), TensorError);
    REQUIRE_THROWS_AS(contract(a, b, {{0, 1}, {0, 0}}), TensorError);
}

TEST_CASE("permute round-trips and matches manual indexing") {
    Rng rng(5, "tensor");
    DenseTensor t = random_tensor({2, 3, 4}, rng);
    DenseTensor p = permute(t, {2, 0, 1});
    REQUIRE(p.dims() == std::vector<index_t>{4, 2, 3});
    for (index_t i = 0; i < 2; ++i)
        for (index_t j = 0; j < 3; ++j)
            for (index_t k = 0; k < 4; ++k) REQUIRE(p.at({k, i, j}) == t.at({i, j, k}));
    DenseTensor back = permute(p, {1, 2, 0});
    REQUIRE((back - t).max_abs() == 0.0);
}

TEST_CASE("reshape is a relabeling of the same data") {
    Rng rng(7, "tensor");
    DenseTensor t = random_tensor({6, 4}, rng);
    DenseTensor r = t.reshaped({2, 3, 4});
    REQUIRE(r.size() == t.size());
    for (index_t i = 0; i < t.size(); ++i) REQUIRE(r[i] == t[i]);
    REQUIRE_THROWS_AS(t.reshaped({5, 5}), TensorError);
}

TEST_CASE("kron matches the 2x2 block structure") {
    DenseTensor z({2, 2}, {1, 0, 0, -1});
    DenseTensor x({2, 2}, {0, 1, 1, 0});
    DenseTensor zx = kron(z, x);
    REQUIRE(zx.dim(0) == 4);
    REQUIRE(zx.at({0, 1}) == 1.0);
    REQUIRE(zx.at({1, 0}) == 1.0);
    REQUIRE(zx.at({2, 3}) == -1.0);
    REQUIRE(zx.at({3, 2}) == -1.0);
    REQUIRE(zx.at({0, 0}) == 0.0);
}

TEST_CASE("hermiticity defect flags asymmetric operators") {
    DenseTensor sym({2, 2}, {1, 2, 2, -1});
    REQUIRE(hermiticity_defect(sym) == 0.0);
    DenseTensor asym({2, 2}, {1, 2, 3, -1});
    REQUIRE(hermiticity_defect(asym) == 1.0);
    REQUIRE(hermiticity_defect(symmetrized(asym)) == 0.0);
}
