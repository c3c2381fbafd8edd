#pragma once

// Full evaluation protocol against a synthetic world and its JSON report.

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "latentedit/eval.hpp"
#include "latentedit/io.hpp"

namespace latentedit {

struct ProtocolConfig {
    Index n = 1024;
    double threshold = 0.9;
    std::uint64_t seed = 0;
    std::set<Index> excluded_rows;
};

/// Sample seed for attribute k; identical across methods so they see the same latents.
inline std::uint64_t attribute_seed(std::uint64_t seed, Index k) {
    return oracle_detail::stream_seed(seed, 100 + static_cast<std::uint64_t>(k));
}

struct AttributeResult {
    EditPairs pairs;
    IdentityScore identity;
    double frechet = kNaN;  // between identity embeddings before and after
};

struct MethodResult {
    std::string name;
    std::string grid_space;
    std::vector<double> grid;
    std::vector<AttributeResult> attributes;
    Matrix variation;
    std::vector<std::string> warnings;

    double mean_rate() const {
        double acc = 0.0;
        int used = 0;
        for (const auto& a : attributes)
            if (!std::isnan(a.pairs.rate())) {
                acc += a.pairs.rate();
                ++used;
            }
        return used ? acc / used : kNaN;
    }

    double mean_identity() const {
        double acc = 0.0;
        int used = 0;
        for (const auto& a : attributes)
            if (!std::isnan(a.identity.mean_cosine)) {
                acc += a.identity.mean_cosine;
                ++used;
            }
        return used ? acc / used : kNaN;
    }
};

template <StepEditor E>
MethodResult run_protocol(const std::string& name, const E& editor, const std::string& grid_space,
                          std::vector<double> grid, const SyntheticWorld& world, const ProtocolConfig& cfg) {
    MethodResult r{name, grid_space, std::move(grid), {}, {}, {}};
    const auto classifier = [&world](const Vector& w) { return classify(world, w); };
    const auto embedder = [&world](const Vector& w) { return embed_identity(world, w); };
    std::vector<EditPairs> all_pairs;
    for (Index k = 0; k < world.num_attributes; ++k) {
        AttributeResult a;
        a.pairs = build_edit_pairs(editor, world, cfg.n, k, cfg.threshold, attribute_seed(cfg.seed, k));
        if (a.pairs.negatives == 0)
            r.warnings.push_back(name + ": attribute " + std::to_string(k) + " has no negative samples; rate undefined");
        if (!a.pairs.before.empty()) {
            a.identity = identity_similarity(a.pairs, embedder);
            const auto rows = static_cast<Index>(a.pairs.before.size());
            if (rows > world.identity_dim) {
                Matrix before(rows, world.identity_dim), after(rows, world.identity_dim);
                for (Index i = 0; i < rows; ++i) {
                    before.row(i) = embedder(a.pairs.before[static_cast<std::size_t>(i)]).transpose();
                    after.row(i) = embedder(a.pairs.after[static_cast<std::size_t>(i)]).transpose();
                }
                a.frechet = frechet_distance(before, after);
            } else {
                r.warnings.push_back(name + ": attribute " + std::to_string(k) +
                                     " has too few pairs for a Frechet distance");
            }
        }
        all_pairs.push_back(a.pairs);
        r.attributes.push_back(std::move(a));
    }
    r.variation = variation_matrix(all_pairs, world.num_attributes, classifier);
    return r;
}

namespace report_detail {

inline io::Json number_or_null(double x) { return std::isfinite(x) ? io::Json(x) : io::Json(nullptr); }

inline io::Json matrix_or_nulls(const Matrix& m) {
    io::Json rows = io::Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        io::Json row = io::Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace report_detail

inline constexpr int kReportVersion = 1;

/// Machine-readable report. Non-finite values are written as null.
inline io::Json make_report(const std::vector<MethodResult>& methods, const ProtocolConfig& cfg, io::Json config_echo) {
    using report_detail::number_or_null;
    io::Json warnings = io::Json::array();
    io::Json jm = io::Json::array();
    for (const auto& m : methods) {
        io::Json attrs = io::Json::array();
        for (const auto& a : m.attributes) {
            attrs.push_back({{"index", a.pairs.attribute},
                             {"sampled", a.pairs.sampled},
                             {"negatives", a.pairs.negatives},
                             {"successes", a.pairs.successes},
                             {"well_edited_rate", number_or_null(a.pairs.rate())},
                             {"identity_similarity", number_or_null(a.identity.mean_cosine)},
                             {"identity_pairs_used", a.identity.used},
                             {"identity_pairs_skipped", a.identity.skipped},
                             {"frechet_distance", number_or_null(a.frechet)}});
        }
        const bool has_matrix = m.variation.size() > 0 && m.variation.rows() == m.variation.cols();
        jm.push_back({{"name", m.name},
                      {"grid_space", m.grid_space},
                      {"grid", m.grid},
                      {"attributes", attrs},
                      {"mean_well_edited_rate", number_or_null(m.mean_rate())},
                      {"mean_identity_similarity", number_or_null(m.mean_identity())},
                      {"variation_matrix", report_detail::matrix_or_nulls(m.variation)},
                      {"off_diagonal_sum",
                       number_or_null(has_matrix ? off_diagonal_sum(m.variation, cfg.excluded_rows) : kNaN)},
                      {"mean_abs_off_diagonal",
                       number_or_null(has_matrix ? mean_abs_off_diagonal(m.variation, cfg.excluded_rows) : kNaN)}});
        for (const auto& w : m.warnings) warnings.push_back(w);
    }
    return io::Json{{"schema", "latentedit.report"},
                    {"version", kReportVersion},
                    {"protocol",
                     {{"n", cfg.n},
                      {"threshold", cfg.threshold},
                      {"negative_below", kNegativeBelow},
                      {"seed", cfg.seed},
                      {"excluded_rows", std::vector<Index>(cfg.excluded_rows.begin(), cfg.excluded_rows.end())}}},
                    {"config", std::move(config_echo)},
                    {"methods", jm},
                    {"warnings", warnings}};
}

/// Variation matrix as CSV, one row per edited attribute; NaN entries left empty.
inline std::string variation_csv(const Matrix& m) {
    std::string out = "edited";
    for (Index l = 0; l < m.cols(); ++l) out += ",attr_" + std::to_string(l);
    out += '\n';
    char buf[64];
    for (Index k = 0; k < m.rows(); ++k) {
        out += std::to_string(k);
        for (Index l = 0; l < m.cols(); ++l) {
            out += ',';
            if (std::isfinite(m(k, l))) {
                std::snprintf(buf, sizeof buf, "%.17g", m(k, l));
                out += buf;
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace latentedit
