#pragma once

/**
 * @file metrics.hpp
 * Fidelity and detectability evaluation: per-dimension two-sample
 * Kolmogorov-Smirnov and 1-Wasserstein statistics with robust aggregates,
 * plus an external logistic-regression real-vs-synthetic detector scored by
 * AUC-ROC.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qsynth/common.hpp"
#include "qsynth/rng.hpp"

namespace qsynth::metrics {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Asymptotic two-sided KS p-value 2*sum_{k>=1} (-1)^{k-1} exp(-2 k^2 l^2),
/// truncated once terms drop below 1e-12 and clamped to (0, 1].
inline double ks_asymptotic_p(double lambda) {
    if (lambda < 1e-6) {
        return 1.0;
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100000; ++k) {
        const double term =
            std::exp(-2.0 * static_cast<double>(k) * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-12) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 1e-300, 1.0);
}

/// Two-sample KS statistic: the largest ECDF gap over the pooled sample
/// points, with the asymptotic p-value at lambda = K*sqrt(n1*n2/(n1+n2)).
inline KsResult ks_two_sample(std::span<const double> a,
                              std::span<const double> b) {
    require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double n1 = static_cast<double>(sa.size());
    const double n2 = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double stat = 0.0;
    while (i < sa.size() || j < sb.size()) {
        double v;
        if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
            v = sa[i];
        } else {
            v = sb[j];
        }
        while (i < sa.size() && sa[i] == v) {
            ++i;
        }
        while (j < sb.size() && sb[j] == v) {
            ++j;
        }
        stat = std::max(stat, std::abs(static_cast<double>(i) / n1 -
                                       static_cast<double>(j) / n2));
    }

    KsResult out;
    out.statistic = stat;
    out.p_value = ks_asymptotic_p(stat * std::sqrt(n1 * n2 / (n1 + n2)));
    return out;
}

/// Empirical 1-Wasserstein distance: integral of |F_a - F_b| over the pooled
/// support, computed exactly from the sorted samples.
inline double wasserstein_1d(std::span<const double> a,
                             std::span<const double> b) {
    require(!a.empty() && !b.empty(), "wasserstein_1d: empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double n1 = static_cast<double>(sa.size());
    const double n2 = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double integral = 0.0;
    double prev = std::min(sa.front(), sb.front());
    while (i < sa.size() || j < sb.size()) {
        double v;
        if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
            v = sa[i];
        } else {
            v = sb[j];
        }
        integral += std::abs(static_cast<double>(i) / n1 -
                             static_cast<double>(j) / n2) *
                    (v - prev);
        while (i < sa.size() && sa[i] == v) {
            ++i;
        }
        while (j < sb.size() && sb[j] == v) {
            ++j;
        }
        prev = v;
    }
    return integral;
}

/// Midpoint-of-central-order-statistics median.
inline double median(std::vector<double> values) {
    require(!values.empty(), "median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Inclusive linear-interpolation percentile: rank position q/100*(n-1).
inline double percentile(std::vector<double> values, double q) {
    require(!values.empty(), "percentile: empty input");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= values.size()) {
        return values.back();
    }
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

struct Aggregates {
    double k_med = 0.0;
    double p_med = 1.0;
    double w_med = 0.0;
    double w_75 = 0.0;
};

inline Aggregates summarize(const std::vector<double>& per_dim_k,
                            const std::vector<double>& per_dim_p,
                            const std::vector<double>& per_dim_w) {
    Aggregates agg;
    agg.k_med = median(per_dim_k);
    agg.p_med = median(per_dim_p);
    agg.w_med = median(per_dim_w);
    agg.w_75 = percentile(per_dim_w, 75.0);
    return agg;
}

// ---------------------------------------------------------------------------
// Logistic-regression detector
// ---------------------------------------------------------------------------

struct LogRegModel {
    Vector weights;
    double bias = 0.0;
    int iterations_run = 0;
};

inline double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

inline double logreg_score(const LogRegModel& model, const Vector& x) {
    return sigmoid(model.weights.dot(x) + model.bias);
}

/// Full-batch gradient descent on mean BCE, zero init, fixed step 0.1,
/// stopping at gradient inf-norm < 1e-6 or max_iter.
inline LogRegModel fit_logreg(const Matrix& features,
                              const std::vector<int>& labels,
                              int max_iter = 5000) {
    const auto n = features.rows();
    const auto d = features.cols();
    require(n > 0 && static_cast<std::size_t>(n) == labels.size(),
            "fit_logreg: row/label count mismatch");
    const auto positives = std::count(labels.begin(), labels.end(), 1);
    require(positives > 0 && positives < n,
            "fit_logreg: both classes must be present");

    LogRegModel model;
    model.weights = Vector::Zero(d);
    constexpr double step = 0.1;
    for (int iter = 0; iter < max_iter; ++iter) {
        Vector grad_w = Vector::Zero(d);
        double grad_b = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p =
                sigmoid(model.weights.dot(features.row(i)) + model.bias);
            const double delta = p - static_cast<double>(labels[static_cast<std::size_t>(i)]);
            grad_w += delta * features.row(i).transpose();
            grad_b += delta;
        }
        grad_w /= static_cast<double>(n);
        grad_b /= static_cast<double>(n);
        model.iterations_run = iter + 1;
        if (std::max(grad_w.cwiseAbs().maxCoeff(), std::abs(grad_b)) < 1e-6) {
            break;
        }
        model.weights -= step * grad_w;
        model.bias -= step * grad_b;
    }
    return model;
}

/// Rank-based (Mann-Whitney) AUC estimator; ties contribute 1/2.
inline double auc_roc(const std::vector<double>& scores,
                      const std::vector<int>& labels) {
    require(scores.size() == labels.size(), "auc_roc: size mismatch");
    const auto n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return scores[x] < scores[y];
    });

    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        // average rank of the tied block [i, j), ranks are 1-based
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                rank_sum_pos += avg_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    require(n_pos > 0 && n_neg > 0, "auc_roc: both classes must be present");
    const double u = rank_sum_pos -
                     static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

/// ROC curve points (FPR, TPR) sweeping the decision threshold over the
/// observed scores, predicted positive when score >= threshold.
inline std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                        const std::vector<int>& labels) {
    std::vector<double> thresholds(scores);
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    const double n_pos =
        static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double n_neg = static_cast<double>(labels.size()) - n_pos;

    std::vector<RocPoint> points;
    points.push_back({0.0, 0.0});
    for (const double t : thresholds) {
        double tp = 0.0;
        double fp = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                (labels[i] == 1 ? tp : fp) += 1.0;
            }
        }
        points.push_back({fp / n_neg, tp / n_pos});
    }
    return points;
}

struct DetectabilityResult {
    double auc = 0.5;
    double gap = 0.0;
    std::vector<RocPoint> roc;
};

/// Trains a logistic detector to separate real (label 1) from synthetic
/// (label 0) samples on a stratified seeded split and scores AUC on the
/// held-out part.
inline DetectabilityResult detectability_audit(const Matrix& real,
                                               const Matrix& synthetic,
                                               double split_ratio = 0.7,
                                               std::uint64_t seed = 0) {
    require(real.cols() == synthetic.cols(),
            "detectability_audit: dimension mismatch");
    require(real.rows() >= 20 && synthetic.rows() >= 20,
            "detectability_audit: need at least 20 rows per side");

    Rng rng(seed, "detector-split");
    const auto split = [&](Eigen::Index n) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        rng.shuffle(idx);
        const auto cut = static_cast<std::size_t>(
            std::llround(split_ratio * static_cast<double>(n)));
        return std::pair{std::vector<Eigen::Index>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut)),
                         std::vector<Eigen::Index>(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end())};
    };
    const auto [real_train, real_test] = split(real.rows());
    const auto [synth_train, synth_test] = split(synthetic.rows());

    const auto stack = [&](const std::vector<Eigen::Index>& ri,
                           const std::vector<Eigen::Index>& si) {
        Matrix x(static_cast<Eigen::Index>(ri.size() + si.size()), real.cols());
        std::vector<int> y;
        y.reserve(ri.size() + si.size());
        Eigen::Index row = 0;
        for (const auto i : ri) {
            x.row(row++) = real.row(i);
            y.push_back(1);
        }
        for (const auto i : si) {
            x.row(row++) = synthetic.row(i);
            y.push_back(0);
        }
        return std::pair{std::move(x), std::move(y)};
    };

    const auto [x_train, y_train] = stack(real_train, synth_train);
    const auto [x_test, y_test] = stack(real_test, synth_test);

    const LogRegModel detector = fit_logreg(x_train, y_train);
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(x_test.rows()));
    for (Eigen::Index i = 0; i < x_test.rows(); ++i) {
        scores.push_back(logreg_score(detector, x_test.row(i).transpose()));
    }

    DetectabilityResult out;
    out.auc = auc_roc(scores, y_test);
    out.gap = std::abs(out.auc - 0.5);
    out.roc = roc_points(scores, y_test);
    return out;
}

// ---------------------------------------------------------------------------
// Fidelity report
// ---------------------------------------------------------------------------

struct FidelityReport {
    std::vector<double> ks_stats;     // K_j
    std::vector<double> ks_pvalues;   // P_j
    std::vector<double> wasserstein;  // W_j
    double k_med = 0.0;
    double p_med = 1.0;
    double w_med = 0.0;
    double w_75 = 0.0;
    double detector_auc = 0.5;
    double detectability_gap = 0.0;
    std::vector<RocPoint> roc;
    Eigen::Index sample_size = 0;
};

/// Per-dimension KS/Wasserstein statistics plus the detectability audit,
/// comparing equally sized real and synthetic matrices column by column.
inline FidelityReport fidelity_report(const Matrix& real,
                                      const Matrix& synthetic,
                                      double split_ratio = 0.7,
                                      std::uint64_t seed = 0) {
    require(real.cols() == synthetic.cols(),
            "fidelity_report: dimension mismatch");
    FidelityReport report;
    report.sample_size = std::min(real.rows(), synthetic.rows());
    for (Eigen::Index j = 0; j < real.cols(); ++j) {
        std::vector<double> a(static_cast<std::size_t>(real.rows()));
        std::vector<double> b(static_cast<std::size_t>(synthetic.rows()));
        for (Eigen::Index i = 0; i < real.rows(); ++i) {
            a[static_cast<std::size_t>(i)] = real(i, j);
        }
        for (Eigen::Index i = 0; i < synthetic.rows(); ++i) {
            b[static_cast<std::size_t>(i)] = synthetic(i, j);
        }
        const KsResult ks = ks_two_sample(a, b);
        report.ks_stats.push_back(ks.statistic);
        report.ks_pvalues.push_back(ks.p_value);
        report.wasserstein.push_back(wasserstein_1d(a, b));
    }
    const Aggregates agg =
        summarize(report.ks_stats, report.ks_pvalues, report.wasserstein);
    report.k_med = agg.k_med;
    report.p_med = agg.p_med;
    report.w_med = agg.w_med;
    report.w_75 = agg.w_75;

    const DetectabilityResult det =
        detectability_audit(real, synthetic, split_ratio, seed);
    report.detector_auc = det.auc;
    report.detectability_gap = det.gap;
    report.roc = det.roc;
    return report;
}

} // namespace qsynth::metrics
