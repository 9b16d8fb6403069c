#include "fhire/stat_tests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "fhire/error.hpp"

namespace fhire {

const char* to_string(TestKind kind) {
    switch (kind) {
        case TestKind::MannWhitneyU: return "mann_whitney_u";
        case TestKind::ChiSquared: return "chi_squared";
        case TestKind::KolmogorovSmirnov: return "kolmogorov_smirnov";
        case TestKind::SlopeT: return "slope_t";
    }
    return "?";
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double chi_squared_survival_1df(double statistic) {
    if (statistic <= 0.0) return 1.0;
    return std::erfc(std::sqrt(statistic / 2.0));
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DataError(DataErrorKind::EmptyInput, "Mann-Whitney needs two nonempty samples");
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    const std::size_t n = na + nb;

    std::vector<std::pair<double, bool>> pooled;  // (value, from a)
    pooled.reserve(n);
    for (double x : a) pooled.emplace_back(x, true);
    for (double x : b) pooled.emplace_back(x, false);
    std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].second) rank_sum_a += midrank;
        }
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }

    const double dna = static_cast<double>(na);
    const double dnb = static_cast<double>(nb);
    const double dn = static_cast<double>(n);
    TestResult result;
    result.test = TestKind::MannWhitneyU;
    result.statistic = rank_sum_a - dna * (dna + 1.0) / 2.0;

    const double mean = dna * dnb / 2.0;
    double variance = dna * dnb / 12.0 * (dn + 1.0);
    if (n > 1) variance = dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (variance <= 0.0) {
        result.p_value = 1.0;
        return result;
    }
    const double z = std::max(0.0, std::abs(result.statistic - mean) - 0.5) / std::sqrt(variance);
    result.p_value = std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
    return result;
}

TestResult chi_squared_2x2(const std::array<std::array<double, 2>, 2>& table) {
    const double row0 = table[0][0] + table[0][1];
    const double row1 = table[1][0] + table[1][1];
    const double col0 = table[0][0] + table[1][0];
    const double col1 = table[0][1] + table[1][1];
    if (row0 <= 0 || row1 <= 0 || col0 <= 0 || col1 <= 0) {
        throw DataError(DataErrorKind::ZeroMarginal, "2x2 table has an empty row or column");
    }
    const double total = row0 + row1;
    const std::array<double, 2> rows = {row0, row1};
    const std::array<double, 2> cols = {col0, col1};
    double statistic = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double expected = rows[i] * cols[j] / total;
            const double d = table[i][j] - expected;
            statistic += d * d / expected;
        }
    }
    return {TestKind::ChiSquared, statistic, chi_squared_survival_1df(statistic)};
}

TestResult ks_uniform(std::span<const double> sample, double lo, double hi) {
    if (sample.empty()) throw DataError(DataErrorKind::EmptyInput, "KS test needs a nonempty sample");
    if (!(hi > lo)) throw std::invalid_argument("KS bounds must satisfy lo < hi");
    std::vector<double> u(sample.begin(), sample.end());
    for (auto& x : u) x = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d = std::max(d, static_cast<double>(i + 1) / n - u[i]);
        d = std::max(d, u[i] - static_cast<double>(i) / n);
    }
    // Stephens' finite-sample adjustment of the Kolmogorov limit.
    const double sn = std::sqrt(n);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    if (lambda < 1e-3) {
        p = 1.0;
    } else {
        for (int j = 1; j <= 200; ++j) {
            const double term = std::exp(-2.0 * j * j * lambda * lambda);
            p += (j % 2 ? 2.0 : -2.0) * term;
            if (term < 1e-16) break;
        }
    }
    return {TestKind::KolmogorovSmirnov, d, std::clamp(p, 0.0, 1.0)};
}

double LinearFit::mean_response_se(double x) const {
    const double dx = x - x_mean;
    return residual_sd * std::sqrt(1.0 / static_cast<double>(n) + dx * dx / sxx);
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
    if (x.size() < 3) throw DataError(DataErrorKind::EmptyInput, "OLS needs at least three points");
    const double n = static_cast<double>(x.size());
    LinearFit fit;
    fit.n = x.size();
    fit.x_mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - fit.x_mean;
        fit.sxx += dx * dx;
        sxy += dx * (y[i] - y_mean);
    }
    if (fit.sxx <= 0.0) throw NumericalError("OLS needs at least two distinct x values");
    fit.slope = sxy / fit.sxx;
    fit.intercept = y_mean - fit.slope * fit.x_mean;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.predict(x[i]);
        sse += r * r;
    }
    fit.residual_sd = std::sqrt(sse / (n - 2.0));
    return fit;
}

TestResult slope_test(const LinearFit& fit) {
    TestResult result{TestKind::SlopeT, 0.0, 1.0};
    const double se = fit.residual_sd / std::sqrt(fit.sxx);
    if (se <= 0.0) {
        result.statistic = fit.slope == 0.0 ? 0.0 : std::copysign(INFINITY, fit.slope);
        result.p_value = fit.slope == 0.0 ? 1.0 : 0.0;
        return result;
    }
    result.statistic = fit.slope / se;
    const boost::math::students_t dist(static_cast<double>(fit.n) - 2.0);
    result.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.statistic))), 0.0, 1.0);
    return result;
}

double t_quantile(double p, double dof) {
    const boost::math::students_t dist(dof);
    return boost::math::quantile(dist, p);
}

}  // namespace fhire
