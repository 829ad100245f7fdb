#pragma once

// Classical comparison models behind one fit / predict interface.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sdae/data.hpp"
#include "sdae/sda.hpp"

namespace sdae {

namespace baseline {

// Softmax regression trained with the same SGD loop as the supervised net.
struct LogisticRegressionSpec {
  SgdConfig sgd{0.1, 20, 30, 0};
};

// Euclidean distance, majority vote, ties to the lowest class.
struct KNearestSpec {
  std::size_t k = 3;
};

struct NearestCentroidSpec {};

struct GaussianNBSpec {
  double variance_floor = 1e-9;
};

struct MultinomialNBSpec {
  double alpha = 1.0;
};

struct BernoulliNBSpec {
  double alpha = 1.0;
  double binarize_threshold = 0.5;
};

// Single hidden layer net with no pre-training.
struct SingleHiddenNetSpec {
  std::size_t hidden = 700;
  Activation activation = Activation::Relu;
  SgdConfig sgd{0.1, 20, 30, 0};
};

// Listed so reports keep the same rows as the comparison table; fitting one
// throws ArgumentError.
struct NotImplementedSpec {
  std::string name;
};

struct LogisticRegression {
  SupervisedNet net;  // zero hidden layers
};

struct KNearest {
  std::size_t k = 3;
  Matrix samples;
  std::vector<std::size_t> labels;
};

struct NearestCentroid {
  Matrix centroids;  // n_classes x d
};

struct GaussianNB {
  Matrix means;      // n_classes x d
  Matrix variances;  // n_classes x d, floored
  std::vector<double> priors;
};

struct MultinomialNB {
  Matrix feature_log_prob;  // n_classes x d
  std::vector<double> priors;
};

struct BernoulliNB {
  Matrix feature_prob;  // P(x_f = 1 | c), n_classes x d
  std::vector<double> priors;
  double binarize_threshold = 0.5;
};

struct SingleHiddenNet {
  SupervisedNet net;
};

}  // namespace baseline

using BaselineSpec =
    std::variant<baseline::LogisticRegressionSpec, baseline::KNearestSpec,
                 baseline::NearestCentroidSpec, baseline::GaussianNBSpec,
                 baseline::MultinomialNBSpec, baseline::BernoulliNBSpec,
                 baseline::SingleHiddenNetSpec, baseline::NotImplementedSpec>;

using BaselineModel =
    std::variant<baseline::LogisticRegression, baseline::KNearest, baseline::NearestCentroid,
                 baseline::GaussianNB, baseline::MultinomialNB, baseline::BernoulliNB,
                 baseline::SingleHiddenNet>;

// Row label used in reports, e.g. "K-Nearest Neighbors (K=3)".
std::string display_name(const BaselineSpec& spec);

// Throws ArgumentError on an empty set or when a class in [0, n_classes) has
// no training sample.
BaselineModel fit(const BaselineSpec& spec, const LabeledSet& train);

std::size_t predict_baseline(const BaselineModel& model, std::span<const double> x);

// Per-class log scores for the probabilistic models (log prior + log
// likelihood); exposed for testing the decision rules.
std::vector<double> class_log_scores(const BaselineModel& model, std::span<const double> x);

struct BaselineRow {
  std::string model;
  std::optional<double> valid_error_pct;  // empty for not-implemented rows
  std::string status;                     // "ok" or "not implemented"
};

// The default comparison suite in table order: logistic regression, KNN
// (k=3), nearest centroid, the three naive Bayes variants, a 700-unit ReLU net.
// Decision tree and the SVM rows appear as not-implemented placeholders.
std::vector<BaselineSpec> default_baseline_suite(std::uint64_t seed);

// Fit on the Train split, score on the Valid split.
std::vector<BaselineRow> run_baseline_suite(const Dataset& data,
                                            std::span<const BaselineSpec> specs);

}  // namespace sdae
