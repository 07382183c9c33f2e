#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "prw/types.hpp"

namespace prw {

// A set of n points in R^d, stored one point per row. All entries finite.
class PointCloud {
public:
    explicit PointCloud(Matrix points);

    Index size() const { return points_.rows(); }
    Index dim() const { return points_.cols(); }
    const Matrix& points() const { return points_; }

private:
    Matrix points_;
};

// A point cloud with simplex weights. Weights must sum to one (1e-12
// absolute) and every weight must be strictly positive: the solvers take
// log(r_i) and log(c_j), so zero-weight atoms are rejected up front.
class DiscreteMeasure {
public:
    DiscreteMeasure(PointCloud cloud, Vector weights);

    Index size() const { return cloud_.size(); }
    Index dim() const { return cloud_.dim(); }
    const PointCloud& cloud() const { return cloud_; }
    const Vector& weights() const { return weights_; }

    // Smallest admissible weight; anything below is reported as "zero weight".
    static constexpr double min_weight = 1e-15;

private:
    PointCloud cloud_;
    Vector weights_;
};

// A pair of measures over the same ambient space with equal atom counts.
// The squared-distance cost matrix is never stored; only its sup norm is
// cached at construction.
class ProblemInstance {
public:
    ProblemInstance(DiscreteMeasure mu, DiscreteMeasure nu);

    const DiscreteMeasure& mu() const { return mu_; }
    const DiscreteMeasure& nu() const { return nu_; }
    Index size() const { return mu_.size(); }
    Index dim() const { return mu_.dim(); }
    double cost_sup() const { return cost_sup_; }

    // Dense n x n matrix C with C_ij = ||x_i - y_j||^2, materialized on request.
    Matrix cost_matrix() const;

private:
    DiscreteMeasure mu_;
    DiscreteMeasure nu_;
    double cost_sup_;
};

// max_ij ||x_i - y_j||^2 without materializing the n x n matrix.
double cost_sup(const ProblemInstance& instance);

enum class MeasureFormat { csv, jsonl };

// CSV rows are "weight, coord_1, ..., coord_d"; a header row is detected by a
// non-numeric first token. JSONL rows are arrays [weight, coord_1, ...].
DiscreteMeasure load_measure(const std::string& path, MeasureFormat format);
void save_measure(const DiscreteMeasure& measure, const std::string& path,
                  MeasureFormat format);

ProblemInstance load_instance(const std::string& path_mu, const std::string& path_nu,
                              MeasureFormat format);

// {n, d, cost_sup, weight stats} for provenance output.
nlohmann::json instance_metadata(const ProblemInstance& instance);

}  // namespace prw
