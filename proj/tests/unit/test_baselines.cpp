#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "sdae/baselines.hpp"
#include "sdae/error.hpp"

using namespace sdae;

namespace {

LabeledSet labeled(Matrix x, std::vector<std::size_t> y, std::size_t classes) {
  return {std::move(x), std::move(y), classes};
}

// Random instance where every class is present.
LabeledSet random_set(Rng& rng, std::size_t n, std::size_t d, std::size_t classes,
                      double quantum = 0.0) {
  Matrix x(n, d);
  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i < classes ? i : rng.below(classes);
    for (std::size_t f = 0; f < d; ++f) {
      double v = rng.uniform(0, 1);
      if (quantum > 0) v = std::round(v / quantum) * quantum;
      x(i, f) = v;
    }
  }
  return labeled(std::move(x), std::move(y), classes);
}

}  // namespace

TEST(NearestCentroid, OnePointPerClass) {
  const auto train = labeled(Matrix{{0.1, 0.2}, {0.7, 0.3}, {0.5, 0.9}}, {0, 1, 2}, 3);
  const auto m = std::get<baseline::NearestCentroid>(fit(baseline::NearestCentroidSpec{}, train));
  EXPECT_EQ(m.centroids, train.inputs);
}

TEST(NearestCentroid, PicksCloserCentroid) {
  const auto train = labeled(Matrix{{0}, {10}}, {0, 1}, 2);
  const auto model = fit(baseline::NearestCentroidSpec{}, train);
  EXPECT_EQ(predict_baseline(model, Vector{1}), 0u);
  EXPECT_EQ(predict_baseline(model, Vector{6}), 1u);
  EXPECT_EQ(predict_baseline(model, Vector{5}), 0u);  // tie -> lower class
}

TEST(GaussianNB, SingleClassMean) {
  const auto m = std::get<baseline::GaussianNB>(fit(baseline::GaussianNBSpec{}, labeled(Matrix{{0}, {2}}, {0, 0}, 1)));
  EXPECT_EQ(m.means, (Matrix{{1}}));
  EXPECT_EQ(m.variances, (Matrix{{1}}));
  EXPECT_EQ(m.priors, (std::vector<double>{1.0}));
}

TEST(GaussianNB, VarianceFloor) {
  const auto m = std::get<baseline::GaussianNB>(
      fit(baseline::GaussianNBSpec{}, labeled(Matrix{{0.5}, {0.5}, {0.1}}, {0, 0, 1}, 2)));
  EXPECT_EQ(m.variances(0, 0), 1e-9);
  EXPECT_EQ(m.variances(1, 0), 1e-9);
}

TEST(GaussianNB, EightHandPlacedPoints) {
  // Class 0: {0, .1, .2} (mean .1, var .02/3); class 1: {.4 ... .8} (mean .6, var .02).
  const auto train = labeled(Matrix{{0.0}, {0.1}, {0.2}, {0.4}, {0.5}, {0.6}, {0.7}, {0.8}},
                             {0, 0, 0, 1, 1, 1, 1, 1}, 2);
  const auto model = fit(baseline::GaussianNBSpec{}, train);
  auto log_post = [](double x, double prior, double mean, double var) {
    return std::log(prior) - 0.5 * std::log(2 * std::numbers::pi * var) -
           (x - mean) * (x - mean) / (2 * var);
  };
  for (double x : {0.0, 0.1, 0.25, 0.3, 0.35, 0.6, 0.9}) {
    const double s0 = log_post(x, 3.0 / 8, 0.1, 0.02 / 3);
    const double s1 = log_post(x, 5.0 / 8, 0.6, 0.02);
    const auto scores = class_log_scores(model, Vector{x});
    EXPECT_NEAR(scores[0], s0, 1e-9);
    EXPECT_NEAR(scores[1], s1, 1e-9);
    EXPECT_EQ(predict_baseline(model, Vector{x}), s1 > s0 ? 1u : 0u) << x;
  }
  EXPECT_EQ(predict_baseline(model, Vector{0.25}), 0u);
  EXPECT_EQ(predict_baseline(model, Vector{0.3}), 1u);
}

TEST(MultinomialNB, LaplaceSmoothedLogProbs) {
  const auto m = std::get<baseline::MultinomialNB>(fit(baseline::MultinomialNBSpec{}, labeled(Matrix{{2, 0}}, {0}, 1)));
  EXPECT_DOUBLE_EQ(m.feature_log_prob(0, 0), std::log(3.0 / 4.0));
  EXPECT_DOUBLE_EQ(m.feature_log_prob(0, 1), std::log(1.0 / 4.0));
}

TEST(BernoulliNB, SmoothedProbabilitiesAndThreshold) {
  const auto m = std::get<baseline::BernoulliNB>(
      fit(baseline::BernoulliNBSpec{}, labeled(Matrix{{0.9, 0.5}, {0.6, 0.1}}, {0, 0}, 1)));
  EXPECT_DOUBLE_EQ(m.feature_prob(0, 0), 3.0 / 4.0);  // both above 0.5
  EXPECT_DOUBLE_EQ(m.feature_prob(0, 1), 1.0 / 4.0);  // 0.5 is not above the threshold
}

TEST(NaiveBayes, MatchTextbookFormulasOnRandomInstances) {
  Rng rng(2024);
  for (int t = 0; t < 100; ++t) {
    const auto train = random_set(rng, 12 + rng.below(20), 5, 3);
    const auto xs = testing_support::mat(train.inputs);
    const auto g = fit(baseline::GaussianNBSpec{}, train);
    const auto mn = fit(baseline::MultinomialNBSpec{}, train);
    const auto bn = fit(baseline::BernoulliNBSpec{}, train);
    for (int q = 0; q < 10; ++q) {
      const auto x = testing_support::random_vector(5, rng, 0, 1);
      const auto ox = testing_support::vec(x);
      const auto eg = oracle::gaussian_nb_scores(xs, train.labels, 3, ox);
      const auto em = oracle::multinomial_nb_scores(xs, train.labels, 3, ox);
      const auto eb = oracle::bernoulli_nb_scores(xs, train.labels, 3, ox);
      EXPECT_EQ(predict_baseline(g, x), oracle::argmax(eg));
      EXPECT_EQ(predict_baseline(mn, x), oracle::argmax(em));
      EXPECT_EQ(predict_baseline(bn, x), oracle::argmax(eb));
      const auto sg = class_log_scores(g, x), sm = class_log_scores(mn, x), sb = class_log_scores(bn, x);
      for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_NEAR(sg[c], eg[c], 1e-9 * std::max(1.0, std::abs(eg[c])));
        EXPECT_NEAR(sm[c], em[c], 1e-12 * std::max(1.0, std::abs(em[c])));
        EXPECT_NEAR(sb[c], eb[c], 1e-12 * std::max(1.0, std::abs(eb[c])));
      }
    }
  }
}

TEST(NaiveBayes, PriorsSumToOne) {
  Rng rng(3);
  const auto train = random_set(rng, 40, 4, 4);
  for (const auto& spec : std::vector<BaselineSpec>{baseline::GaussianNBSpec{}, baseline::MultinomialNBSpec{},
                                                    baseline::BernoulliNBSpec{}}) {
    const auto model = fit(spec, train);
    std::visit(
        [](const auto& m) {
          if constexpr (requires { m.priors; }) {
            double s = 0.0;
            for (double p : m.priors) s += p;
            EXPECT_NEAR(s, 1.0, 1e-15);
          }
        },
        model);
  }
}

TEST(KNearest, OwnLabelWithK1) {
  Rng rng(5);
  const auto train = random_set(rng, 50, 3, 4);
  const auto model = fit(baseline::KNearestSpec{1}, train);
  for (std::size_t i = 0; i < train.size(); ++i)
    EXPECT_EQ(predict_baseline(model, train.inputs.row(i)), train.labels[i]);
}

TEST(KNearest, MatchesBruteForceOnFiveHundredPoints) {
  Rng rng(6);
  for (double quantum : {0.0, 0.5}) {
    const auto train = random_set(rng, 500, 4, 3, quantum);
    const auto xs = testing_support::mat(train.inputs);
    for (std::size_t k : {1u, 3u, 7u}) {
      const auto model = fit(baseline::KNearestSpec{k}, train);
      for (int q = 0; q < 100; ++q) {
        auto x = testing_support::random_vector(4, rng, 0, 1);
        if (quantum > 0) for (double& v : x) v = std::round(v / quantum) * quantum;
        EXPECT_EQ(predict_baseline(model, x),
                  oracle::brute_force_knn(xs, train.labels, testing_support::vec(x), k, 3));
      }
    }
  }
}

TEST(KNearest, RejectsZeroK) {
  Rng rng(1);
  EXPECT_THROW(fit(baseline::KNearestSpec{0}, random_set(rng, 10, 2, 2)), ArgumentError);
}

TEST(LogisticRegression, IsAZeroHiddenLayerNet) {
  Rng rng(7);
  const auto train = random_set(rng, 60, 6, 3);
  baseline::LogisticRegressionSpec spec;
  spec.sgd = {0.2, 7, 5, 99};
  const auto model = std::get<baseline::LogisticRegression>(fit(spec, train));
  Rng init(99);
  auto net = logistic_net(6, 3, init);
  train_supervised(net, train, spec.sgd);
  EXPECT_EQ(model.net, net);
  EXPECT_EQ(model.net.hidden_layers(), 0u);
  for (int q = 0; q < 100; ++q) {
    const auto x = testing_support::random_vector(6, rng, 0, 1);
    EXPECT_EQ(predict(model.net, x), predict(net, x));
  }
}

TEST(SingleHiddenNet, ArchitectureFromSpec) {
  Rng rng(8);
  const auto train = random_set(rng, 30, 5, 2);
  baseline::SingleHiddenNetSpec spec;
  spec.hidden = 7;
  spec.sgd.epochs = 2;
  const auto m = std::get<baseline::SingleHiddenNet>(fit(spec, train));
  ASSERT_EQ(m.net.layers.size(), 2u);
  EXPECT_EQ(m.net.layers[0].outputs(), 7u);
  EXPECT_EQ(m.net.layers[0].activation, Activation::Relu);
  EXPECT_EQ(m.net.layers[1].activation, Activation::Softmax);
}

TEST(Fit, Errors) {
  Rng rng(9);
  const auto missing = labeled(Matrix{{0.1}, {0.2}}, {0, 0}, 2);
  for (const auto& spec : std::vector<BaselineSpec>{baseline::LogisticRegressionSpec{}, baseline::KNearestSpec{},
                                                    baseline::NearestCentroidSpec{}, baseline::GaussianNBSpec{},
                                                    baseline::MultinomialNBSpec{}, baseline::BernoulliNBSpec{}}) {
    EXPECT_THROW(fit(spec, missing), ArgumentError) << display_name(spec);
    EXPECT_THROW(fit(spec, labeled(Matrix(0, 1), {}, 2)), ArgumentError);
  }
  EXPECT_THROW(fit(baseline::NotImplementedSpec{"Decision Tree"}, random_set(rng, 4, 2, 2)), ArgumentError);
  const auto model = fit(baseline::GaussianNBSpec{}, random_set(rng, 10, 3, 2));
  EXPECT_THROW(predict_baseline(model, Vector{0.1, 0.2}), ShapeError);
  EXPECT_THROW(class_log_scores(fit(baseline::KNearestSpec{}, random_set(rng, 10, 3, 2)), Vector(3)), ArgumentError);
}

TEST(Suite, DefaultOrderAndNames) {
  const auto suite = default_baseline_suite(1);
  std::vector<std::string> names;
  for (const auto& s : suite) names.push_back(display_name(s));
  const std::vector<std::string> expected{
      "Logistic Regression",
      "Decision Tree",
      "K-Nearest Neighbors (K=3)",
      "Nearest Centroids",
      "Gaussian Naive Bayes",
      "Multinomial Naive Bayes",
      "Bernoulli Naive Bayes",
      "Support Vector Machine (SVM)",
      "SVM with Linear Kernel",
      "SVM with RBF Kernel",
      "SVM with Sigmoid Kernel",
      "ANN with a single hidden layer (hidden activation: relu, output activation: softmax, "
      "hidden neurons: 700, no pre-training)"};
  EXPECT_EQ(names, expected);
}

TEST(Suite, OneModelOneRow) {
  const auto ds = split(make_bars(60, 6, 1, 0.3), {0.5, 0.25, 0.25}, 2);
  const std::vector<BaselineSpec> specs{baseline::NearestCentroidSpec{}};
  const auto rows = run_baseline_suite(ds, specs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "ok");
  ASSERT_TRUE(rows[0].valid_error_pct.has_value());
}

TEST(Suite, DeterministicAndPlaceholders) {
  const auto ds = split(make_bars(120, 6, 1, 0.3), {0.5, 0.25, 0.25}, 2);
  auto suite = default_baseline_suite(3);
  std::get<baseline::SingleHiddenNetSpec>(suite.back()).hidden = 16;
  std::get<baseline::SingleHiddenNetSpec>(suite.back()).sgd.epochs = 3;
  std::get<baseline::LogisticRegressionSpec>(suite.front()).sgd.epochs = 3;
  const auto a = run_baseline_suite(ds, suite), b = run_baseline_suite(ds, suite);
  ASSERT_EQ(a.size(), suite.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].model, b[i].model);
    EXPECT_EQ(a[i].valid_error_pct, b[i].valid_error_pct);
    EXPECT_EQ(a[i].status, b[i].status);
  }
  EXPECT_EQ(a[1].status, "not implemented");
  EXPECT_FALSE(a[1].valid_error_pct.has_value());
}

TEST(Suite, KnnMemorisesTrainingSplit) {
  const Dataset bars = make_bars(80, 6, 4, 0.5);
  const auto ds = join_splits(bars, bars, bars);  // validation split = training split
  const std::vector<BaselineSpec> specs{baseline::KNearestSpec{1}};
  const auto rows = run_baseline_suite(ds, specs);
  EXPECT_EQ(rows[0].valid_error_pct, 0.0);
}
