#include "prw/measures.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace prw {

namespace {

void require(bool cond, const std::string& message) {
    if (!cond) throw invalid_input(message);
}

}  // namespace

PointCloud::PointCloud(Matrix points) : points_(std::move(points)) {
    require(points_.rows() >= 1 && points_.cols() >= 1,
            "point cloud must have n >= 1 and d >= 1");
    require(points_.allFinite(), "point cloud contains non-finite coordinates");
}

DiscreteMeasure::DiscreteMeasure(PointCloud cloud, Vector weights)
    : cloud_(std::move(cloud)), weights_(std::move(weights)) {
    require(weights_.size() == cloud_.size(),
            "weight count does not match atom count");
    require(weights_.allFinite(), "weights contain non-finite values");
    for (Index i = 0; i < weights_.size(); ++i) {
        if (weights_[i] < min_weight)
            throw invalid_input("zero weight at row " + std::to_string(i) +
                                " (weights must be strictly positive)");
    }
    const double total = weights_.sum();
    if (std::abs(total - 1.0) > 1e-12)
        throw invalid_input("weights off simplex: sum = " + std::to_string(total));
}

namespace {

double compute_cost_sup(const Matrix& x, const Matrix& y) {
    // Row-blocked max of ||x_i - y_j||^2; O(n^2 d) time, O(n d) memory.
    double best = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        const double m =
            (y.rowwise() - x.row(i)).rowwise().squaredNorm().maxCoeff();
        best = std::max(best, m);
    }
    return best;
}

}  // namespace

ProblemInstance::ProblemInstance(DiscreteMeasure mu, DiscreteMeasure nu)
    : mu_(std::move(mu)), nu_(std::move(nu)), cost_sup_(0.0) {
    require(mu_.dim() == nu_.dim(), "ambient dimension mismatch between measures");
    require(mu_.size() == nu_.size(),
            "atom count mismatch: both measures must have n atoms (n = " +
                std::to_string(mu_.size()) + " vs " + std::to_string(nu_.size()) + ")");
    cost_sup_ = compute_cost_sup(mu_.cloud().points(), nu_.cloud().points());
}

Matrix ProblemInstance::cost_matrix() const {
    const Matrix& x = mu_.cloud().points();
    const Matrix& y = nu_.cloud().points();
    const Vector sx = x.rowwise().squaredNorm();
    const Vector sy = y.rowwise().squaredNorm();
    Matrix c = -2.0 * x * y.transpose();
    c.colwise() += sx;
    c.rowwise() += sy.transpose();
    return c.cwiseMax(0.0);
}

double cost_sup(const ProblemInstance& instance) { return instance.cost_sup(); }

namespace {

bool parse_double(const std::string& token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
    if (begin == end) return false;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

DiscreteMeasure rows_to_measure(const std::vector<std::vector<double>>& rows,
                                const std::string& path) {
    if (rows.empty()) throw invalid_input(path + ": no data rows");
    const Index n = static_cast<Index>(rows.size());
    const Index d = static_cast<Index>(rows.front().size()) - 1;
    if (d < 1) throw invalid_input(path + ": rows need a weight and at least one coordinate");
    Matrix points(n, d);
    Vector weights(n);
    for (Index i = 0; i < n; ++i) {
        if (static_cast<Index>(rows[i].size()) != d + 1)
            throw invalid_input(path + ": inconsistent dimension at row " +
                                std::to_string(i));
        weights[i] = rows[i][0];
        for (Index j = 0; j < d; ++j) points(i, j) = rows[i][j + 1];
    }
    return DiscreteMeasure(PointCloud(std::move(points)), std::move(weights));
}

DiscreteMeasure load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    Index line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string token;
        bool bad_token = false;
        while (std::getline(ss, token, ',')) {
            double value;
            if (!parse_double(token, value)) {
                bad_token = true;
                break;
            }
            row.push_back(value);
        }
        if (bad_token) {
            // A non-numeric first token on the first data line is a header.
            if (rows.empty()) continue;
            throw invalid_input(path + ": parse failure at line " +
                                std::to_string(line_no));
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows_to_measure(rows, path);
}

DiscreteMeasure load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    Index line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_array())
            throw invalid_input(path + ": parse failure at line " +
                                std::to_string(line_no) +
                                " (expected a JSON array [weight, coords...])");
        std::vector<double> row;
        for (const auto& v : j) {
            if (!v.is_number())
                throw invalid_input(path + ": non-numeric entry at line " +
                                    std::to_string(line_no));
            row.push_back(v.get<double>());
        }
        rows.push_back(std::move(row));
    }
    return rows_to_measure(rows, path);
}

}  // namespace

DiscreteMeasure load_measure(const std::string& path, MeasureFormat format) {
    return format == MeasureFormat::csv ? load_csv(path) : load_jsonl(path);
}

void save_measure(const DiscreteMeasure& measure, const std::string& path,
                  MeasureFormat format) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write " + path);
    out.precision(17);
    const Matrix& pts = measure.cloud().points();
    for (Index i = 0; i < measure.size(); ++i) {
        if (format == MeasureFormat::csv) {
            out << measure.weights()[i];
            for (Index j = 0; j < pts.cols(); ++j) out << ',' << pts(i, j);
            out << '\n';
        } else {
            nlohmann::json row = nlohmann::json::array();
            row.push_back(measure.weights()[i]);
            for (Index j = 0; j < pts.cols(); ++j) row.push_back(pts(i, j));
            out << row.dump() << '\n';
        }
    }
}

ProblemInstance load_instance(const std::string& path_mu, const std::string& path_nu,
                              MeasureFormat format) {
    return ProblemInstance(load_measure(path_mu, format),
                           load_measure(path_nu, format));
}

nlohmann::json instance_metadata(const ProblemInstance& instance) {
    const Vector& r = instance.mu().weights();
    const Vector& c = instance.nu().weights();
    return nlohmann::json{
        {"n", instance.size()},
        {"d", instance.dim()},
        {"cost_sup", instance.cost_sup()},
        {"mu_weights", {{"min", r.minCoeff()}, {"max", r.maxCoeff()}, {"sum", r.sum()}}},
        {"nu_weights", {{"min", c.minCoeff()}, {"max", c.maxCoeff()}, {"sum", c.sum()}}},
    };
}

}  // namespace prw
