#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "latentedit/types.hpp"

namespace latentedit {

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Inverse standard normal CDF.
///
/// Acklam's piecewise rational approximation (relative error ~1e-9) followed
/// by one Halley step against erfc. The upper half is mapped onto the lower
/// tail through q = 1 - p, which is exact in floating point for p >= 0.5.
inline double inv_norm_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::OutOfDomain, "inv_norm_cdf needs 0 < p < 1, got " + std::to_string(p));
    if (p > 0.5) return -inv_norm_cdf(1.0 - p);
    if (p == 0.5) return 0.0;

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

    // x <= 0 here, so erfc(-x/sqrt2) is evaluated on its accurate side.
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

enum class AttributeScale { Raw, Gaussianized };

struct AttributeVector {
    Vector values;
    AttributeScale scale = AttributeScale::Raw;
};

/// Per-attribute empirical quantile tables (one sorted row per attribute).
struct AttributeTransform {
    Matrix table;  // K x n, each row sorted ascending

    Index num_attributes() const { return table.rows(); }
    Index num_samples() const { return table.cols(); }
};

inline AttributeTransform fit_transform(const Matrix& attrs) {
    if (attrs.rows() < 2) fail(ErrorCode::TooFewSamples, "attribute transform needs at least 2 samples");
    require(attrs.allFinite(), ErrorCode::NonFinite, "attribute matrix has non-finite entries");
    AttributeTransform t;
    t.table = attrs.transpose();
    for (Index k = 0; k < t.table.rows(); ++k) {
        auto row = t.table.row(k);
        std::sort(row.begin(), row.end());
    }
    return t;
}

/// Midrank empirical CDF of `value` against row `k`, clamped to [1/(2n), 1-1/(2n)].
inline double midrank_cdf(const AttributeTransform& t, Index k, double value) {
    const auto row = t.table.row(k);
    const auto lo = std::lower_bound(row.begin(), row.end(), value);
    const auto hi = std::upper_bound(lo, row.end(), value);
    const double below = static_cast<double>(lo - row.begin());
    const double equal = static_cast<double>(hi - lo);
    const double n = static_cast<double>(t.num_samples());
    const double p = (below + (equal + 1.0) / 2.0) / (n + 1.0);
    const double eps = 1.0 / (2.0 * n);
    return std::clamp(p, eps, 1.0 - eps);
}

/// Linearly interpolated empirical quantile of row `k`; the i-th sorted entry
/// (1-based) sits at p = i / (n + 1), matching midrank_cdf on distinct values.
inline double interpolated_quantile(const AttributeTransform& t, Index k, double p) {
    const Index n = t.num_samples();
    const auto row = t.table.row(k);
    const double pos = std::clamp(p * static_cast<double>(n + 1), 1.0, static_cast<double>(n));
    const auto lower = static_cast<Index>(std::floor(pos));
    const double frac = pos - static_cast<double>(lower);
    if (lower >= n) return row(n - 1);
    return row(lower - 1) + frac * (row(lower) - row(lower - 1));
}

inline double to_gaussian(const AttributeTransform& t, Index k, double raw) {
    return inv_norm_cdf(midrank_cdf(t, k, raw));
}

inline double from_gaussian(const AttributeTransform& t, Index k, double g) {
    return interpolated_quantile(t, k, norm_cdf(g));
}

inline AttributeVector to_gaussian(const AttributeTransform& t, const AttributeVector& a) {
    if (a.scale != AttributeScale::Raw) fail(ErrorCode::ScaleMismatch, "to_gaussian expects raw attributes");
    require_dim(a.values.size(), t.num_attributes(), "to_gaussian: attribute count");
    AttributeVector g{Vector(a.values.size()), AttributeScale::Gaussianized};
    for (Index k = 0; k < a.values.size(); ++k) g.values(k) = to_gaussian(t, k, a.values(k));
    return g;
}

inline AttributeVector from_gaussian(const AttributeTransform& t, const AttributeVector& g) {
    if (g.scale != AttributeScale::Gaussianized) fail(ErrorCode::ScaleMismatch, "from_gaussian expects gaussianized attributes");
    require_dim(g.values.size(), t.num_attributes(), "from_gaussian: attribute count");
    AttributeVector a{Vector(g.values.size()), AttributeScale::Raw};
    for (Index k = 0; k < g.values.size(); ++k) a.values(k) = from_gaussian(t, k, g.values(k));
    return a;
}

/// Gaussianizes every row of a raw n x K attribute matrix.
inline Matrix gaussianize_rows(const AttributeTransform& t, const Matrix& raw) {
    require_dim(raw.cols(), t.num_attributes(), "gaussianize_rows: attribute count");
    Matrix out(raw.rows(), raw.cols());
    for (Index i = 0; i < raw.rows(); ++i)
        for (Index k = 0; k < raw.cols(); ++k) out(i, k) = to_gaussian(t, k, raw(i, k));
    return out;
}

}  // namespace latentedit
