#include "mws/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mws {

void Dataset::validate() const {
    if (features.rows() < 1 || features.cols() < 1)
        throw std::runtime_error("dataset '" + name + "': empty feature matrix");
    if (target.size() != features.rows())
        throw std::runtime_error("dataset '" + name + "': target length mismatch");
    if (static_cast<Eigen::Index>(column_names.size()) != features.cols())
        throw std::runtime_error("dataset '" + name + "': column name count mismatch");
    std::set<std::string> uniq(column_names.begin(), column_names.end());
    if (static_cast<Eigen::Index>(uniq.size()) != features.cols())
        throw std::runtime_error("dataset '" + name + "': duplicate column names");
    if (!features.allFinite() || !target.allFinite())
        throw std::runtime_error("dataset '" + name + "': non-finite entries");
}

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::string& path, const PreprocessSpec& spec) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);

    std::vector<std::vector<std::string>> raw;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ": ragged row with " +
                                     std::to_string(cells.size()) + " cells");
        raw.push_back(std::move(cells));
    }

    int target_idx = -1;
    for (size_t j = 0; j < header.size(); ++j)
        if (header[j] == spec.target_column) target_idx = static_cast<int>(j);
    if (target_idx < 0)
        throw std::runtime_error(path + ": target column '" + spec.target_column +
                                 "' not found");
    for (const auto& dc : spec.drop_columns)
        if (dc == spec.target_column)
            throw std::runtime_error("drop_columns may not include the target column");

    std::set<std::string> dropped(spec.drop_columns.begin(), spec.drop_columns.end());
    std::set<std::string> declared_cat(spec.categorical_columns.begin(),
                                       spec.categorical_columns.end());

    // Drop rows with any missing cell among kept columns.
    std::vector<size_t> kept_rows;
    for (size_t i = 0; i < raw.size(); ++i) {
        bool complete = true;
        for (size_t j = 0; j < header.size(); ++j) {
            if (dropped.count(header[j])) continue;
            const std::string& cell = raw[i][j];
            if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" ||
                cell == "?") {
                complete = false;
                break;
            }
        }
        if (complete) kept_rows.push_back(i);
    }
    if (kept_rows.empty()) throw std::runtime_error(path + ": no rows left after cleaning");

    // Column classification: categorical if declared, or if any cell fails
    // numeric parse.
    std::vector<int> feature_cols;
    std::vector<bool> is_cat(header.size(), false);
    for (size_t j = 0; j < header.size(); ++j) {
        if (static_cast<int>(j) == target_idx || dropped.count(header[j])) continue;
        feature_cols.push_back(static_cast<int>(j));
        bool cat = declared_cat.count(header[j]) > 0;
        if (!cat) {
            for (size_t i : kept_rows) {
                double tmp;
                if (!parse_double(raw[i][j], tmp)) {
                    cat = true;
                    break;
                }
            }
        }
        is_cat[j] = cat;
    }

    const size_t n = kept_rows.size();
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;

    for (int j : feature_cols) {
        if (!is_cat[j]) {
            std::vector<double> col(n);
            for (size_t i = 0; i < n; ++i) {
                if (!parse_double(raw[kept_rows[i]][j], col[i]))
                    throw std::runtime_error(path + ": non-numeric residue in column '" +
                                             header[j] + "'");
            }
            names.push_back(header[j]);
            cols.push_back(std::move(col));
        } else {
            // One-hot with drop-first: reference level is the lexicographically
            // smallest.
            std::set<std::string> levels;
            for (size_t i : kept_rows) levels.insert(raw[i][j]);
            bool first = true;
            for (const auto& lv : levels) {
                if (first) {  // dropped reference level
                    first = false;
                    continue;
                }
                std::vector<double> col(n);
                for (size_t i = 0; i < n; ++i)
                    col[i] = raw[kept_rows[i]][j] == lv ? 1.0 : 0.0;
                names.push_back(header[j] + "=" + lv);
                cols.push_back(std::move(col));
            }
        }
    }
    if (cols.empty()) throw std::runtime_error(path + ": no feature columns remain");

    Dataset d;
    d.name = path;
    d.column_names = names;
    d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j)
        for (size_t i = 0; i < n; ++i) d.features(static_cast<Eigen::Index>(i),
                                                  static_cast<Eigen::Index>(j)) = cols[j][i];
    d.target.resize(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
        double v;
        if (!parse_double(raw[kept_rows[i]][target_idx], v))
            throw std::runtime_error(path + ": non-numeric target value");
        d.target(static_cast<Eigen::Index>(i)) = v;
    }
    d.validate();
    return d;
}

void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    for (Eigen::Index j = 0; j < d.cols(); ++j) out << "f" << j << ",";
    out << "target\n";
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.cols(); ++j) out << d.features(i, j) << ",";
        out << d.target(i) << "\n";
    }
    if (!out) throw std::runtime_error("write failure on " + path);
}

Vector minmax_normalize(const Vector& v) {
    const double lo = v.minCoeff(), hi = v.maxCoeff();
    if (hi - lo <= 0.0) return Vector::Zero(v.size());
    return (v.array() - lo) / (hi - lo);
}

Matrix minmax_normalize(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        out.col(j) = minmax_normalize(Vector(m.col(j)));
    return out;
}

Dataset minmax_normalize(const Dataset& d) {
    Dataset out = d;
    out.features = minmax_normalize(d.features);
    out.target = minmax_normalize(d.target);
    return out;
}

MinMaxParams minmax_fit(const Matrix& train) {
    if (train.rows() < 1) throw std::runtime_error("minmax_fit: empty matrix");
    MinMaxParams p;
    p.lo = train.colwise().minCoeff().transpose();
    p.range = train.colwise().maxCoeff().transpose() - p.lo;
    for (Eigen::Index j = 0; j < p.range.size(); ++j)
        if (p.range(j) <= 0.0) p.range(j) = 1.0;
    return p;
}

Matrix minmax_apply(const Matrix& m, const MinMaxParams& p) {
    return (m.rowwise() - p.lo.transpose()).array().rowwise() /
           p.range.transpose().array();
}

std::pair<Matrix, ScalerParams> standardize_fit(const Matrix& train) {
    if (train.rows() < 1) throw std::runtime_error("standardize_fit: empty matrix");
    ScalerParams p;
    p.mean = train.colwise().mean().transpose();
    p.scale.resize(train.cols());
    const double n = static_cast<double>(train.rows());
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
        const double var = (train.col(j).array() - p.mean(j)).square().sum() / n;
        p.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return {standardize_apply(train, p), p};
}

Matrix standardize_apply(const Matrix& m, const ScalerParams& p) {
    return (m.rowwise() - p.mean.transpose()).array().rowwise() /
           p.scale.transpose().array();
}

TargetScaler standardize_target_fit(const Vector& y) {
    TargetScaler s;
    s.mean = y.mean();
    const double var = (y.array() - s.mean).square().sum() / static_cast<double>(y.size());
    s.scale = var > 0.0 ? std::sqrt(var) : 1.0;
    return s;
}

Vector standardize_target_apply(const Vector& y, const TargetScaler& s) {
    return (y.array() - s.mean) / s.scale;
}

Vector standardize_target_invert(const Vector& y, const TargetScaler& s) {
    return y.array() * s.scale + s.mean;
}

}  // namespace mws
