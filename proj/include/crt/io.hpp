#pragma once

// JSON and CSV serialization of grids, bases, diagnostics and reports.

#include "crt/verify.hpp"

#include <json.hpp>

#include <iomanip>
#include <ostream>
#include <sstream>

namespace crt::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline json to_json(const QuadratureGrid& grid)
{
    return {
        {"id", grid.id()},
        {"n_s", grid.n_s()},
        {"n_angle", grid.n_angle()},
        {"exactness_degree", grid.exactness_degree()},
        {"nodes", grid.size()},
        {"min_pole_distance", grid.min_pole_distance()},
    };
}

inline json to_json(const Basis& basis)
{
    json bidegrees = json::array();
    for (int j = 0; j < basis.rank(); ++j) {
        const auto [p, q] = basis.bidegree(j);
        bidegrees.push_back({p, q});
    }
    const auto& d = basis.diagnostics();
    return {
        {"id", basis.id()},
        {"degree", basis.degree()},
        {"rank", basis.rank()},
        {"monomial_count", d.monomial_count},
        {"discarded", d.discarded},
        {"smallest_kept_ratio", d.smallest_kept_ratio},
        {"largest_discarded_ratio", d.largest_discarded_ratio},
        {"bidegrees", bidegrees},
    };
}

inline json to_json(const SolveDiagnostics& d)
{
    return {
        {"residual", d.residual},
        {"relative_residual", d.relative_residual},
        {"precondition_component", d.precondition_component},
        {"precondition_violated", d.precondition_violated},
        {"data_norm", d.data_norm},
        {"truncation_residual", d.truncation_residual},
        {"sigma_max", d.sigma_max},
        {"sigma_min_kept", d.sigma_min_kept},
        {"sigma_max_discarded", d.sigma_max_discarded},
        {"kernel_dimension", d.kernel_dimension},
    };
}

inline json to_json(const TransferReport& r)
{
    return {
        {"sphere_residual", r.sphere_residual},
        {"h1_residual_max", r.h1_residual_max},
        {"h1_residual_rms", r.h1_residual_rms},
        {"precondition_component", r.precondition_component},
        {"norm_l2_h1", r.norm_l2_h1},
        {"norm_l2_s3", r.norm_l2_s3},
        {"n", r.n},
        {"grid", r.grid},
        {"seed", r.seed},
        {"elapsed_ms", r.elapsed_ms},
        {"precondition_violated", r.precondition_violated},
        {"norm_identity_error", r.norm_identity_error},
        {"norm_l4_h1_u", r.norm_l4_h1_u},
        {"truncation_residual", r.truncation_residual},
        {"recipe", r.recipe},
    };
}

inline json to_json(const verify::Metric& m)
{
    return {{"name", m.name}, {"value", m.value}, {"tolerance", m.tolerance}, {"strict", m.strict},
            {"passed", m.passed()}};
}

inline json to_json(const verify::CheckResult& r)
{
    json metrics = json::array();
    for (const auto& m : r.metrics) metrics.push_back(to_json(m));
    json out{{"id", r.id}, {"name", r.name}, {"passed", r.passed()}, {"metrics", metrics}};
    if (!r.detail.empty()) out["error"] = r.detail;
    out["elapsed_ms"] = r.elapsed_ms;
    return out;
}

/// Dense complex matrix as CSV rows: row,col,real,imag.
inline void write_csv(std::ostream& os, const OperatorMatrix& m)
{
    os << "# " << m.tag << " degree=" << m.degree << " grid=" << m.grid_id << '\n';
    os << "row,col,real,imag\n";
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.entries.rows(); ++i)
        for (Eigen::Index j = 0; j < m.entries.cols(); ++j)
            os << i << ',' << j << ',' << m.entries(i, j).real() << ',' << m.entries(i, j).imag() << '\n';
}

/// Table with a header row; values are written with round-trip precision.
inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows)
{
    for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
    os << '\n' << std::setprecision(17);
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
        os << '\n';
    }
}

} // namespace crt::io
