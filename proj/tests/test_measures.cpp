#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "prw/measures.hpp"
#include "prw/rng.hpp"
#include "prw/testbed.hpp"
#include "test_util.hpp"

using namespace prw;
using testutil::TempDir;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

// Brute-force oracle for max_ij ||x_i - y_j||^2.
double max_pair_distance(const Matrix& x, const Matrix& y) {
    double best = 0.0;
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < y.rows(); ++j)
            best = std::max(best, (x.row(i) - y.row(j)).squaredNorm());
    return best;
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("load_instance: single identical atoms") {
    TempDir dir("m1");
    write_file(dir.file("mu.csv"), "1.0, 0.0, 0.0\n");
    write_file(dir.file("nu.csv"), "1.0, 0.0, 0.0\n");
    const ProblemInstance inst =
        load_instance(dir.file("mu.csv"), dir.file("nu.csv"), MeasureFormat::csv);
    CHECK(inst.size() == 1);
    CHECK(inst.dim() == 2);
    CHECK(inst.cost_sup() == 0.0);
}

TEST_CASE("load_instance: cost_sup from the four pairwise distances") {
    // Pairs: (0,0)-(1,0): 1, (0,0)-(3,0): 9, (2,0)-(1,0): 1, (2,0)-(3,0): 1.
    TempDir dir("m2");
    write_file(dir.file("mu.csv"), "0.5,0,0\n0.5,2,0\n");
    write_file(dir.file("nu.csv"), "0.5,1,0\n0.5,3,0\n");
    const ProblemInstance inst =
        load_instance(dir.file("mu.csv"), dir.file("nu.csv"), MeasureFormat::csv);
    CHECK(inst.size() == 2);
    CHECK(inst.dim() == 2);
    CHECK(inst.cost_sup() == doctest::Approx(9.0).epsilon(1e-10));
}

TEST_CASE("load_instance: weights off simplex rejected") {
    TempDir dir("m3");
    write_file(dir.file("mu.csv"), "0.5,0,0\n0.4,1,1\n");
    write_file(dir.file("nu.csv"), "0.5,0,0\n0.5,1,1\n");
    CHECK_THROWS_WITH_AS(
        load_instance(dir.file("mu.csv"), dir.file("nu.csv"), MeasureFormat::csv),
        doctest::Contains("off simplex"), invalid_input);
}

TEST_CASE("zero weight rejected with row index") {
    TempDir dir("m4");
    write_file(dir.file("mu.csv"), "1.0,0,0\n0.0,1,1\n");
    CHECK_THROWS_WITH_AS(load_measure(dir.file("mu.csv"), MeasureFormat::csv),
                         doctest::Contains("zero weight at row 1"), invalid_input);
}

TEST_CASE("header row auto-detected") {
    TempDir dir("m5");
    write_file(dir.file("mu.csv"), "weight,x,y\n0.5,0,0\n0.5,1,1\n");
    const DiscreteMeasure m = load_measure(dir.file("mu.csv"), MeasureFormat::csv);
    CHECK(m.size() == 2);
}

TEST_CASE("parse failure reports the line") {
    TempDir dir("m6");
    write_file(dir.file("mu.csv"), "0.5,0,0\n0.5,oops,1\n");
    CHECK_THROWS_WITH_AS(load_measure(dir.file("mu.csv"), MeasureFormat::csv),
                         doctest::Contains("line 2"), invalid_input);
}

TEST_CASE("inconsistent dimension rejected") {
    TempDir dir("m7");
    write_file(dir.file("mu.csv"), "0.5,0,0\n0.5,1\n");
    CHECK_THROWS_AS(load_measure(dir.file("mu.csv"), MeasureFormat::csv), invalid_input);
}

TEST_CASE("jsonl rows load") {
    TempDir dir("m8");
    write_file(dir.file("mu.jsonl"), "[0.25, 0, 1]\n[0.75, 2, -1]\n");
    const DiscreteMeasure m = load_measure(dir.file("mu.jsonl"), MeasureFormat::jsonl);
    CHECK(m.size() == 2);
    CHECK(m.dim() == 2);
    CHECK(m.weights()[1] == 0.75);
}

TEST_CASE("unequal atom counts rejected") {
    Rng rng(7);
    DiscreteMeasure mu(PointCloud(rng.gaussian_matrix(3, 2)),
                       Vector::Constant(3, 1.0 / 3.0));
    DiscreteMeasure nu(PointCloud(rng.gaussian_matrix(4, 2)),
                       Vector::Constant(4, 0.25));
    CHECK_THROWS_WITH_AS(ProblemInstance(std::move(mu), std::move(nu)),
                         doctest::Contains("atom count"), invalid_input);
}

TEST_CASE("non-finite coordinates rejected") {
    Matrix pts(1, 2);
    pts << 1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(PointCloud(std::move(pts)), invalid_input);
}

TEST_CASE("cost_sup equals brute force on random instances up to n = 50") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const Index n = 10 + 10 * static_cast<Index>(seed);
        const ProblemInstance inst = testutil::random_instance(n, 6, seed);
        const double oracle = max_pair_distance(inst.mu().cloud().points(),
                                                inst.nu().cloud().points());
        CHECK(inst.cost_sup() == doctest::Approx(oracle).epsilon(1e-10));
    }
}

TEST_CASE("cost_sup of identical clouds still scans all cross pairs") {
    // x = y = {0, 1} on a line: the (0,1) pair gives 1 even though x_i = y_i.
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    DiscreteMeasure mu(PointCloud(pts), Vector::Constant(2, 0.5));
    DiscreteMeasure nu(PointCloud(pts), Vector::Constant(2, 0.5));
    const ProblemInstance inst(std::move(mu), std::move(nu));
    CHECK(inst.cost_sup() == doctest::Approx(1.0));
}

TEST_CASE("hypercube instance has cost_sup >= 16") {
    const auto [inst, truth] = gen_fragmented_hypercube(100, 30, 2, 11);
    CHECK(inst.cost_sup() >= 16.0);
    CHECK(truth.wasserstein_sq == doctest::Approx(8.0));
}

TEST_CASE("save -> load round-trips weights and coordinates bit-identically") {
    const ProblemInstance inst = testutil::random_instance(12, 5, 99);
    TempDir dir("m9");
    for (MeasureFormat fmt : {MeasureFormat::csv, MeasureFormat::jsonl}) {
        const std::string path =
            dir.file(fmt == MeasureFormat::csv ? "m.csv" : "m.jsonl");
        save_measure(inst.mu(), path, fmt);
        const DiscreteMeasure back = load_measure(path, fmt);
        CHECK(back.weights() == inst.mu().weights());
        CHECK(back.cloud().points() == inst.mu().cloud().points());
    }
}

TEST_CASE("instance metadata JSON") {
    const ProblemInstance inst = testutil::random_instance(8, 3, 5);
    const nlohmann::json meta = instance_metadata(inst);
    CHECK(meta["n"] == 8);
    CHECK(meta["d"] == 3);
    CHECK(meta["cost_sup"].get<double>() == inst.cost_sup());
    CHECK(meta["mu_weights"]["sum"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("cost_matrix materializes on request and matches cost_sup") {
    const ProblemInstance inst = testutil::random_instance(9, 4, 21);
    const Matrix c = inst.cost_matrix();
    CHECK(c.maxCoeff() == doctest::Approx(inst.cost_sup()).epsilon(1e-10));
    CHECK(c.minCoeff() >= 0.0);
}

}  // TEST_SUITE
