#pragma once

/**
 * @file preprocess.hpp
 * Maps raw labeled tabular data into the bounded low-dimensional
 * representation the generators are trained in, and back: univariate
 * feature selection on the full table, restriction to the minority class,
 * per-feature standardization, PCA onto the leading components and max-abs
 * scaling into [-1, 1]^d.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qsynth/common.hpp"

namespace qsynth::preprocess {

struct LabeledTable {
    Matrix features; // N x D
    std::vector<int> labels;

    void validate() const {
        require(static_cast<std::size_t>(features.rows()) == labels.size(),
                "LabeledTable: row/label count mismatch");
        require(features.allFinite(), "LabeledTable: non-finite feature");
        for (const int y : labels) {
            require(y == 0 || y == 1, "LabeledTable: labels must be 0 or 1");
        }
    }
};

/// Everything fitted by `fit`, sufficient for transform and inverse.
struct PreprocessModel {
    std::vector<Eigen::Index> selected_indices; // descending F-score order
    Vector mean;                 // per selected feature
    Vector std_dev;              // population standard deviation
    Matrix projection;           // k x out_dim, orthonormal columns
    Vector maxabs;               // per component, >= epsilon
    double epsilon = 1e-8;
    Vector explained_variance;   // leading eigenvalues, non-increasing

    Eigen::Index num_selected() const { return mean.size(); }
    Eigen::Index out_dim() const { return projection.cols(); }
};

/// One-way ANOVA F-statistic of one feature against the binary class.
/// Degenerate within-class variance maps to +inf (separating feature) or 0.
inline double anova_f(const Vector& column, const std::vector<int>& labels) {
    double n0 = 0.0;
    double n1 = 0.0;
    double s0 = 0.0;
    double s1 = 0.0;
    for (Eigen::Index i = 0; i < column.size(); ++i) {
        if (labels[static_cast<std::size_t>(i)] == 1) {
            n1 += 1.0;
            s1 += column[i];
        } else {
            n0 += 1.0;
            s0 += column[i];
        }
    }
    const double m0 = s0 / n0;
    const double m1 = s1 / n1;
    const double grand = (s0 + s1) / (n0 + n1);

    const double ss_between =
        n0 * (m0 - grand) * (m0 - grand) + n1 * (m1 - grand) * (m1 - grand);
    double ss_within = 0.0;
    for (Eigen::Index i = 0; i < column.size(); ++i) {
        const double m = labels[static_cast<std::size_t>(i)] == 1 ? m1 : m0;
        ss_within += (column[i] - m) * (column[i] - m);
    }
    const double df_within = n0 + n1 - 2.0;
    if (ss_within <= 0.0 || df_within <= 0.0) {
        return ss_between > 0.0 ? std::numeric_limits<double>::infinity()
                                : 0.0;
    }
    return ss_between / (ss_within / df_within);
}

/// Indices of the k features with the highest ANOVA F-statistic, descending
/// score, ties broken by lower index.
inline std::vector<Eigen::Index> select_k_best(const LabeledTable& table,
                                               Eigen::Index k) {
    table.validate();
    require(k >= 1 && k <= table.features.cols(),
            "select_k_best: k must be in [1, D]");
    const auto n1 = std::count(table.labels.begin(), table.labels.end(), 1);
    require(n1 > 0 && static_cast<std::size_t>(n1) < table.labels.size(),
            "select_k_best: both classes must be present");

    std::vector<double> scores(static_cast<std::size_t>(table.features.cols()));
    for (Eigen::Index j = 0; j < table.features.cols(); ++j) {
        scores[static_cast<std::size_t>(j)] =
            anova_f(table.features.col(j), table.labels);
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(table.features.cols()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                         return scores[static_cast<std::size_t>(a)] >
                                scores[static_cast<std::size_t>(b)];
                     });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

namespace detail {

inline Matrix take_columns(const Matrix& x,
                           const std::vector<Eigen::Index>& idx) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = x.col(idx[j]);
    }
    return out;
}

/// Leading eigenvectors of the (already centered) data covariance, columns
/// ordered by non-increasing eigenvalue and sign-fixed so each column's
/// largest-magnitude entry is positive.
inline std::pair<Matrix, Vector> leading_components(const Matrix& centered,
                                                    Eigen::Index out_dim) {
    const Matrix cov = centered.transpose() * centered /
                       static_cast<double>(centered.rows());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    require(solver.info() == Eigen::Success,
            "fit: eigendecomposition failed");
    Matrix w(cov.rows(), out_dim);
    Vector variance(out_dim);
    const Eigen::Index total = cov.rows();
    for (Eigen::Index c = 0; c < out_dim; ++c) {
        // Eigen sorts eigenvalues ascending
        const Eigen::Index src = total - 1 - c;
        Vector v = solver.eigenvectors().col(src);
        Eigen::Index arg_max = 0;
        v.cwiseAbs().maxCoeff(&arg_max);
        if (v[arg_max] < 0.0) {
            v = -v;
        }
        w.col(c) = v;
        variance[c] = solver.eigenvalues()[src];
    }
    return {w, variance};
}

} // namespace detail

/// Fits the full pipeline on a labeled table and returns the model together
/// with the bounded representation of the minority rows.
inline std::pair<PreprocessModel, Matrix> fit(const LabeledTable& table,
                                              Eigen::Index k = 10,
                                              Eigen::Index out_dim = 4,
                                              double eps = 1e-8) {
    const auto n1 = std::count(table.labels.begin(), table.labels.end(), 1);
    require(n1 > 0, "fit: minority class is empty");
    require(out_dim >= 1 && out_dim <= k, "fit: out_dim must be in [1, k]");
    require(n1 >= out_dim + 1,
            "fit: need at least out_dim+1 minority rows, got " +
                std::to_string(n1));

    PreprocessModel model;
    model.epsilon = eps;
    model.selected_indices = select_k_best(table, k);

    Matrix minority(n1, k);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < table.features.rows(); ++i) {
        if (table.labels[static_cast<std::size_t>(i)] == 1) {
            for (std::size_t j = 0; j < model.selected_indices.size(); ++j) {
                minority(row, static_cast<Eigen::Index>(j)) =
                    table.features(i, model.selected_indices[j]);
            }
            ++row;
        }
    }

    model.mean = minority.colwise().mean();
    model.std_dev = Vector(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double var =
            (minority.col(j).array() - model.mean[j]).square().sum() /
            static_cast<double>(n1);
        model.std_dev[j] = std::sqrt(var);
        if (model.std_dev[j] <= 0.0) {
            throw fit_error(
                "fit: selected feature " +
                std::to_string(model.selected_indices[static_cast<std::size_t>(j)]) +
                " has zero variance on the minority class");
        }
    }

    const Matrix standardized =
        (minority.rowwise() - model.mean.transpose()).array().rowwise() /
        model.std_dev.transpose().array();

    auto [w, variance] = detail::leading_components(standardized, out_dim);
    model.projection = std::move(w);
    model.explained_variance = std::move(variance);

    const Matrix projected = standardized * model.projection;
    model.maxabs = Vector(out_dim);
    for (Eigen::Index j = 0; j < out_dim; ++j) {
        model.maxabs[j] =
            std::max(projected.col(j).cwiseAbs().maxCoeff(), eps);
    }

    Matrix bounded = projected.array().rowwise() /
                     model.maxabs.transpose().array();
    return {std::move(model), std::move(bounded)};
}

/// Applies the fitted pipeline to new rows in the ORIGINAL feature space and
/// clips to [-1, 1] so evaluation data shares the training representation.
inline Matrix transform(const PreprocessModel& model, const Matrix& features) {
    require(features.allFinite(), "transform: non-finite input");
    Matrix selected = detail::take_columns(features, model.selected_indices);
    const Matrix standardized =
        (selected.rowwise() - model.mean.transpose()).array().rowwise() /
        model.std_dev.transpose().array();
    Matrix bounded = (standardized * model.projection).array().rowwise() /
                     model.maxabs.transpose().array();
    return bounded.cwiseMax(-1.0).cwiseMin(1.0);
}

/// Maps bounded samples back to the selected-feature space:
/// x = ((bounded .* M) W^T) .* sigma + mu, row-wise.
inline Matrix inverse_transform(const PreprocessModel& model,
                                const Matrix& bounded) {
    require(bounded.cols() == model.out_dim(),
            "inverse_transform: expected " +
                std::to_string(model.out_dim()) + " columns, got " +
                std::to_string(bounded.cols()));
    require(bounded.allFinite(), "inverse_transform: non-finite input");
    const Matrix unscaled =
        bounded.array().rowwise() * model.maxabs.transpose().array();
    Matrix standardized = unscaled * model.projection.transpose();
    return (standardized.array().rowwise() *
            model.std_dev.transpose().array())
               .rowwise() +
           model.mean.transpose().array();
}

} // namespace qsynth::preprocess
