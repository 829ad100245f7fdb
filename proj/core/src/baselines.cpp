#include "sdae/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "sdae/error.hpp"

namespace sdae {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Class counts; throws if any class in [0, n_classes) is missing.
std::vector<std::size_t> class_counts(const LabeledSet& train) {
  if (train.size() == 0) throw ArgumentError("fit: empty training set");
  train.validate();
  std::vector<std::size_t> counts(train.n_classes);
  for (auto y : train.labels) ++counts[y];
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw ArgumentError("fit: class " + std::to_string(c) + " has no training samples");
    }
  }
  return counts;
}

std::vector<double> priors_from(const std::vector<std::size_t>& counts, std::size_t total) {
  std::vector<double> p(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    p[c] = static_cast<double>(counts[c]) / static_cast<double>(total);
  }
  return p;
}

// Per-class feature sums, n_classes x d.
Matrix class_sums(const LabeledSet& train) {
  Matrix sums(train.n_classes, train.dim());
  for (std::size_t i = 0; i < train.size(); ++i) {
    axpy(1.0, train.inputs.row(i), sums.row(train.labels[i]));
  }
  return sums;
}

Matrix class_means(const LabeledSet& train, const std::vector<std::size_t>& counts) {
  Matrix means = class_sums(train);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (double& v : means.row(c)) v /= static_cast<double>(counts[c]);
  }
  return means;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_dim(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw ShapeError("baseline expects inputs of length " + std::to_string(expected) + ", got " +
                     std::to_string(got));
  }
}

baseline::GaussianNB fit_gaussian(const baseline::GaussianNBSpec& spec, const LabeledSet& train) {
  const auto counts = class_counts(train);
  baseline::GaussianNB m{class_means(train, counts), Matrix(train.n_classes, train.dim()),
                         priors_from(counts, train.size())};
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto c = train.labels[i];
    const auto x = train.inputs.row(i);
    auto var = m.variances.row(c);
    const auto mu = m.means.row(c);
    for (std::size_t f = 0; f < x.size(); ++f) var[f] += (x[f] - mu[f]) * (x[f] - mu[f]);
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (double& v : m.variances.row(c)) {
      v = std::max(v / static_cast<double>(counts[c]), spec.variance_floor);
    }
  }
  return m;
}

baseline::MultinomialNB fit_multinomial(const baseline::MultinomialNBSpec& spec,
                                        const LabeledSet& train) {
  const auto counts = class_counts(train);
  Matrix flp = class_sums(train);
  const double d = static_cast<double>(train.dim());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    auto row = flp.row(c);
    double total = 0.0;
    for (double v : row) total += v;
    for (double& v : row) v = std::log((v + spec.alpha) / (total + spec.alpha * d));
  }
  return {std::move(flp), priors_from(counts, train.size())};
}

baseline::BernoulliNB fit_bernoulli(const baseline::BernoulliNBSpec& spec,
                                    const LabeledSet& train) {
  const auto counts = class_counts(train);
  Matrix p(train.n_classes, train.dim());
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto row = p.row(train.labels[i]);
    const auto x = train.inputs.row(i);
    for (std::size_t f = 0; f < x.size(); ++f)
      if (x[f] > spec.binarize_threshold) row[f] += 1.0;
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (double& v : p.row(c)) {
      v = (v + spec.alpha) / (static_cast<double>(counts[c]) + 2.0 * spec.alpha);
    }
  }
  return {std::move(p), priors_from(counts, train.size()), spec.binarize_threshold};
}

std::size_t knn_predict(const baseline::KNearest& m, std::span<const double> x) {
  check_dim(m.samples.cols(), x.size());
  std::vector<std::pair<double, std::size_t>> dist(m.samples.rows());
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = {squared_distance(m.samples.row(i), x), i};
  const std::size_t k = std::min(m.k, dist.size());
  // Pairs compare by distance then stored index, so ties keep the earlier sample.
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  const std::size_t n_classes = *std::max_element(m.labels.begin(), m.labels.end()) + 1;
  std::vector<std::size_t> votes(n_classes);
  for (std::size_t i = 0; i < k; ++i) ++votes[m.labels[dist[i].second]];
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c)
    if (votes[c] > votes[best]) best = c;
  return best;
}

}  // namespace

std::string display_name(const BaselineSpec& spec) {
  return std::visit(
      overloaded{
          [](const baseline::LogisticRegressionSpec&) { return std::string("Logistic Regression"); },
          [](const baseline::KNearestSpec& s) {
            return "K-Nearest Neighbors (K=" + std::to_string(s.k) + ")";
          },
          [](const baseline::NearestCentroidSpec&) { return std::string("Nearest Centroids"); },
          [](const baseline::GaussianNBSpec&) { return std::string("Gaussian Naive Bayes"); },
          [](const baseline::MultinomialNBSpec&) { return std::string("Multinomial Naive Bayes"); },
          [](const baseline::BernoulliNBSpec&) { return std::string("Bernoulli Naive Bayes"); },
          [](const baseline::SingleHiddenNetSpec& s) {
            return "ANN with a single hidden layer (hidden activation: " +
                   std::string(to_string(s.activation)) +
                   ", output activation: softmax, hidden neurons: " + std::to_string(s.hidden) +
                   ", no pre-training)";
          },
          [](const baseline::NotImplementedSpec& s) { return s.name; },
      },
      spec);
}

BaselineModel fit(const BaselineSpec& spec, const LabeledSet& train) {
  return std::visit(
      overloaded{
          [&](const baseline::LogisticRegressionSpec& s) -> BaselineModel {
            class_counts(train);
            Rng init(s.sgd.seed);
            auto net = logistic_net(train.dim(), train.n_classes, init);
            train_supervised(net, train, s.sgd);
            return baseline::LogisticRegression{std::move(net)};
          },
          [&](const baseline::KNearestSpec& s) -> BaselineModel {
            if (s.k == 0) throw ArgumentError("KNN: k must be at least 1");
            class_counts(train);
            return baseline::KNearest{s.k, train.inputs, train.labels};
          },
          [&](const baseline::NearestCentroidSpec&) -> BaselineModel {
            const auto counts = class_counts(train);
            return baseline::NearestCentroid{class_means(train, counts)};
          },
          [&](const baseline::GaussianNBSpec& s) -> BaselineModel {
            return fit_gaussian(s, train);
          },
          [&](const baseline::MultinomialNBSpec& s) -> BaselineModel {
            return fit_multinomial(s, train);
          },
          [&](const baseline::BernoulliNBSpec& s) -> BaselineModel {
            return fit_bernoulli(s, train);
          },
          [&](const baseline::SingleHiddenNetSpec& s) -> BaselineModel {
            class_counts(train);
            StackSpec arch{train.dim(), {s.hidden}, s.activation, train.n_classes, {}, {}};
            Rng init(s.sgd.seed);
            auto net = random_net(arch, init);
            train_supervised(net, train, s.sgd);
            return baseline::SingleHiddenNet{std::move(net)};
          },
          [&](const baseline::NotImplementedSpec& s) -> BaselineModel {
            throw ArgumentError(s.name + " is not implemented");
          },
      },
      spec);
}

std::vector<double> class_log_scores(const BaselineModel& model, std::span<const double> x) {
  return std::visit(
      overloaded{
          [&](const baseline::GaussianNB& m) {
            check_dim(m.means.cols(), x.size());
            std::vector<double> s(m.priors.size());
            for (std::size_t c = 0; c < s.size(); ++c) {
              double acc = std::log(m.priors[c]);
              const auto mu = m.means.row(c);
              const auto var = m.variances.row(c);
              for (std::size_t f = 0; f < x.size(); ++f) {
                const double d = x[f] - mu[f];
                acc -= 0.5 * std::log(2.0 * std::numbers::pi * var[f]) + d * d / (2.0 * var[f]);
              }
              s[c] = acc;
            }
            return s;
          },
          [&](const baseline::MultinomialNB& m) {
            check_dim(m.feature_log_prob.cols(), x.size());
            std::vector<double> s(m.priors.size());
            for (std::size_t c = 0; c < s.size(); ++c) {
              s[c] = std::log(m.priors[c]) + dot(m.feature_log_prob.row(c), x);
            }
            return s;
          },
          [&](const baseline::BernoulliNB& m) {
            check_dim(m.feature_prob.cols(), x.size());
            std::vector<double> s(m.priors.size());
            for (std::size_t c = 0; c < s.size(); ++c) {
              double acc = std::log(m.priors[c]);
              const auto p = m.feature_prob.row(c);
              for (std::size_t f = 0; f < x.size(); ++f) {
                acc += x[f] > m.binarize_threshold ? std::log(p[f]) : std::log(1.0 - p[f]);
              }
              s[c] = acc;
            }
            return s;
          },
          [&](const auto&) -> std::vector<double> {
            throw ArgumentError("class_log_scores: model is not probabilistic");
          },
      },
      model);
}

std::size_t predict_baseline(const BaselineModel& model, std::span<const double> x) {
  return std::visit(
      overloaded{
          [&](const baseline::LogisticRegression& m) { return classify(m.net, x); },
          [&](const baseline::SingleHiddenNet& m) { return classify(m.net, x); },
          [&](const baseline::KNearest& m) { return knn_predict(m, x); },
          [&](const baseline::NearestCentroid& m) {
            check_dim(m.centroids.cols(), x.size());
            std::size_t best = 0;
            double best_d = squared_distance(m.centroids.row(0), x);
            for (std::size_t c = 1; c < m.centroids.rows(); ++c) {
              const double d = squared_distance(m.centroids.row(c), x);
              if (d < best_d) {
                best_d = d;
                best = c;
              }
            }
            return best;
          },
          [&](const auto&) { return argmax(class_log_scores(model, x)); },
      },
      model);
}

std::vector<BaselineSpec> default_baseline_suite(std::uint64_t seed) {
  baseline::LogisticRegressionSpec lr;
  lr.sgd.seed = derive_seed(seed, 1);
  baseline::SingleHiddenNetSpec ann;
  ann.sgd.seed = derive_seed(seed, 2);
  return {lr,
          baseline::NotImplementedSpec{"Decision Tree"},
          baseline::KNearestSpec{3},
          baseline::NearestCentroidSpec{},
          baseline::GaussianNBSpec{},
          baseline::MultinomialNBSpec{},
          baseline::BernoulliNBSpec{},
          baseline::NotImplementedSpec{"Support Vector Machine (SVM)"},
          baseline::NotImplementedSpec{"SVM with Linear Kernel"},
          baseline::NotImplementedSpec{"SVM with RBF Kernel"},
          baseline::NotImplementedSpec{"SVM with Sigmoid Kernel"},
          ann};
}

std::vector<BaselineRow> run_baseline_suite(const Dataset& data,
                                            std::span<const BaselineSpec> specs) {
  const LabeledSet train = data.subset(Split::Train);
  const LabeledSet valid = data.subset(Split::Valid);
  if (train.size() == 0 || valid.size() == 0) {
    throw ArgumentError("baseline suite needs Train and Valid samples");
  }
  std::vector<BaselineRow> rows;
  for (const auto& spec : specs) {
    if (std::holds_alternative<baseline::NotImplementedSpec>(spec)) {
      rows.push_back({display_name(spec), std::nullopt, "not implemented"});
      continue;
    }
    const BaselineModel model = fit(spec, train);
    std::vector<std::size_t> predicted(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i) {
      predicted[i] = predict_baseline(model, valid.inputs.row(i));
    }
    const Evaluation ev = tally(valid.labels, predicted, valid.n_classes);
    rows.push_back({display_name(spec), 100.0 * ev.error_rate, "ok"});
  }
  return rows;
}

}  // namespace sdae
