#pragma once

#include <filesystem>
#include <string>

#include "prw/measures.hpp"
#include "prw/rng.hpp"
#include "prw/types.hpp"

namespace prw::testutil {

// Random instance with Gaussian clouds and strictly positive normalized weights.
inline ProblemInstance random_instance(Index n, Index d, std::uint64_t seed,
                                       bool uniform_weights = false,
                                       double scale = 1.0) {
    Rng rng(seed);
    Matrix x = scale * rng.gaussian_matrix(n, d);
    Matrix y = scale * rng.gaussian_matrix(n, d);
    auto weights = [&](Index m) {
        if (uniform_weights) return Vector(Vector::Constant(m, 1.0 / double(m)));
        Vector w(m);
        for (Index i = 0; i < m; ++i) w[i] = rng.uniform(0.2, 1.0);
        w /= w.sum();
        return w;
    };
    Vector wr = weights(n);
    Vector wc = weights(n);
    return ProblemInstance(DiscreteMeasure(PointCloud(std::move(x)), std::move(wr)),
                           DiscreteMeasure(PointCloud(std::move(y)), std::move(wc)));
}

// Instance whose two measures share the same cloud and weights.
inline ProblemInstance identical_instance(Index n, Index d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x = rng.gaussian_matrix(n, d);
    Vector w = Vector::Constant(n, 1.0 / double(n));
    DiscreteMeasure mu(PointCloud(x), w);
    DiscreteMeasure nu(PointCloud(x), w);
    return ProblemInstance(std::move(mu), std::move(nu));
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("prw_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace prw::testutil
