#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "metaxfer/aslib.hpp"
#include "metaxfer/matrix.hpp"
#include "metaxfer/rng.hpp"

namespace metaxfer {

// Instance features with the best-algorithm label per instance. X may hold
// NaN (missing) entries until apply_preprocessor has run.
struct MetaDataset {
    std::string name;
    Matrix X;
    std::vector<int> y;  // values in [0, C), every class occupied
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;  // algorithm ids

    size_t class_count() const { return class_names.size(); }
    size_t feature_count() const { return feature_names.size(); }
};

struct FittedPreprocessor {
    std::vector<double> feature_min;
    std::vector<double> feature_max;
    std::vector<double> feature_median;    // imputation values
    std::vector<size_t> selected_indices;  // ascending, distinct
    std::vector<double> f_scores;          // length d

    size_t input_dim() const { return feature_median.size(); }
    size_t output_dim() const { return selected_indices.size(); }
};

struct SplitIndices {
    std::vector<size_t> train_rows;
    std::vector<size_t> test_rows;
};

// Label = best algorithm per instance under the scenario's performance
// measure; non-ok runs are penalized at 10x cutoff (PAR10) when minimizing.
// Instances without an ok run and classes with fewer than two instances are
// dropped; class ids are re-densified. Throws DegenerateDataset when fewer
// than 2 classes or 10 instances survive.
MetaDataset derive_labels(const AslibScenario& scenario, std::ostream* warnings = nullptr);

// Medians (ignoring NaN), min/max after imputation, ANOVA-F scores on the
// imputed+normalized training columns, top-k selection with smaller-index
// tie-breaking. Throws KTooLarge when k exceeds the feature count.
FittedPreprocessor fit_preprocessor(const Matrix& x_train, const std::vector<int>& y_train,
                                    size_t k);

// Impute -> min-max normalize (constant features map to 0) -> clip to [0,1]
// -> restrict to selected columns. Output has no NaN entries.
Matrix apply_preprocessor(const FittedPreprocessor& prep, const Matrix& x);

// One-way ANOVA F statistic. Returns 0 when both between- and within-group
// sums of squares vanish, and a large finite sentinel when only the
// within-group sum vanishes.
double anova_f(std::span<const double> column, std::span<const int> labels);

inline constexpr double kAnovaPerfectSeparationSentinel = 1.7976931348623157e308;  // DBL_MAX

// Feature count of the smallest dataset. Throws EmptyCollection.
size_t choose_k(const std::vector<MetaDataset>& datasets);

// Per class c: test count = round(test_fraction * n_c) clamped to
// [1, n_c - 1], membership uniform via rng. Throws ClassTooSmall when any
// class has fewer than two members.
SplitIndices stratified_split(const std::vector<int>& y, double test_fraction, Prng& rng);

// CSV of features plus a final integer label column, with a JSON sidecar
// carrying names and (optionally) the fitted preprocessor.
void save_meta_dataset(const MetaDataset& dataset, const std::filesystem::path& csv_path,
                       const std::filesystem::path& sidecar_path,
                       const FittedPreprocessor* prep = nullptr);
MetaDataset load_meta_dataset(const std::filesystem::path& csv_path,
                              const std::filesystem::path& sidecar_path);

// Canonical fingerprint of a dataset's contents (hex), for provenance echoes.
std::string meta_dataset_fingerprint(const MetaDataset& dataset);

}  // namespace metaxfer
