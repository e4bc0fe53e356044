#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "advsec/tensor.hpp"

using namespace advsec;

TEST_CASE("norm matches known values") {
    CHECK(norm(Tensor::vector({3, 4}), Norm::l2) == Catch::Approx(5.0));
    CHECK(norm(Tensor::vector({0, 0, 0}), Norm::linf) == 0.0);
    CHECK(norm(Tensor::vector({1, -2, 3}), Norm::l1) == Catch::Approx(6.0));
}

TEST_CASE("norm is zero iff the vector is zero") {
    CHECK(norm(Tensor::vector({0, 0}), Norm::l2) == 0.0);
    CHECK(norm(Tensor::vector({0, 1e-300}), Norm::l2) > 0.0);
}

TEST_CASE("tensors reject non-finite values") {
    CHECK_THROWS_AS(Tensor::vector({1.0, std::nan("")}), InvalidValueError);
    CHECK_THROWS_AS(Tensor::vector({std::numeric_limits<double>::infinity()}),
                    InvalidValueError);
    CHECK_THROWS_AS(Tensor::sparse_vector(3, {1}, {std::nan("")}), InvalidValueError);
}

TEST_CASE("element count equals shape product") {
    CHECK_THROWS_AS(Tensor::dense({2, 3}, {1, 2, 3, 4, 5}), ShapeError);
    Tensor t = Tensor::dense({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.size() == 6);
    CHECK(t.at(1, 2) == 6.0);
}

TEST_CASE("sparse CSR drops explicit zeros and demands sorted columns") {
    Tensor t = Tensor::sparse_csr(2, 4, {0, 2, 3}, {0, 2, 1}, {1.0, 0.0, 5.0});
    CHECK(t.nnz() == 2);  // the explicit zero is gone
    CHECK(t.at(0, 2) == 0.0);
    CHECK(t.at(0, 0) == 1.0);
    CHECK(t.at(1, 1) == 5.0);
    CHECK_THROWS_AS(Tensor::sparse_csr(1, 4, {0, 2}, {2, 1}, {1.0, 1.0}), ShapeError);
    CHECK_THROWS_AS(Tensor::sparse_csr(1, 4, {0, 2}, {1, 1}, {1.0, 1.0}), ShapeError);
}

TEST_CASE("dense and sparse encodings agree on norms and dots") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    std::bernoulli_distribution keep(0.4);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v(17, 0.0), w(17);
        for (auto& x : w) x = val(rng);
        for (auto& x : v)
            if (keep(rng)) x = val(rng);
        Tensor dense = Tensor::vector(v);
        Tensor sparse = dense.to_sparse();
        REQUIRE(sparse.is_sparse());
        for (Norm p : {Norm::l1, Norm::l2, Norm::linf})
            CHECK(norm(dense, p) == Catch::Approx(norm(sparse, p)).margin(1e-12));
        CHECK(dot(dense, w) == Catch::Approx(dot(sparse, w)).margin(1e-12));
        CHECK(squared_distance(dense, w) ==
              Catch::Approx(squared_distance(sparse, w)).margin(1e-12));
    }
}

TEST_CASE("norm properties: triangle inequality and absolute homogeneity") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t d = 1 + rep % 9;
        std::vector<double> a(d), b(d), sum(d);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = val(rng);
            b[i] = val(rng);
            sum[i] = a[i] + b[i];
        }
        const double scale = val(rng);
        std::vector<double> scaled(d);
        for (std::size_t i = 0; i < d; ++i) scaled[i] = scale * a[i];
        for (Norm p : {Norm::l1, Norm::l2, Norm::linf}) {
            CHECK(norm(Tensor::vector(sum), p) <=
                  norm(Tensor::vector(a), p) + norm(Tensor::vector(b), p) + 1e-9);
            CHECK(norm(Tensor::vector(scaled), p) ==
                  Catch::Approx(std::abs(scale) * norm(Tensor::vector(a), p)).margin(1e-9));
        }
    }
}

TEST_CASE("row extraction preserves storage kind") {
    Tensor dense = Tensor::dense({2, 3}, {1, 0, 2, 0, 3, 0});
    Tensor sparse = dense.to_sparse();
    CHECK_FALSE(dense.row(0).is_sparse());
    CHECK(sparse.row(1).is_sparse());
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(dense.row(1).at(j) == sparse.row(1).at(j));
}
