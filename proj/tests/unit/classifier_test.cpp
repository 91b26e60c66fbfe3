#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "raid/classifier.hpp"
#include "raid/error.hpp"
#include "raid/synthetic.hpp"

using namespace raid;
using namespace raid::classifier;
using raid::testing::TestRng;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

descriptor::Descriptor point(std::vector<double> v) {
  descriptor::Descriptor d;
  d.kind = descriptor::DescriptorKind::ShapeContext;
  d.shape = {static_cast<int>(v.size()), 1, 1, 1};
  d.values = std::move(v);
  return d;
}

LabeledRelationship item(std::vector<double> v, std::set<std::string> classes, std::string id = "") {
  return {id, "1", "t", point(std::move(v)), std::move(classes)};
}

ClassifierConfig config(std::vector<std::string> classes, int k = 5, double threshold = 0.5) {
  ClassifierConfig c;
  c.k = k;
  c.threshold = threshold;
  c.class_list = std::move(classes);
  return c;
}

}  // namespace

TEST(Knn, NearestSelfWithKOne) {
  const std::vector<LabeledRelationship> train{item({0, 0}, {"a"}), item({1, 0}, {"b", "c"}), item({0, 1}, {})};
  const auto p = knn_predict(train, point({1, 0}), config({"a", "b", "c"}, 1));
  EXPECT_EQ(p.classes, (std::set<std::string>{"b", "c"}));
  EXPECT_DOUBLE_EQ(p.probability.at("a"), 0.0);
  EXPECT_DOUBLE_EQ(p.probability.at("b"), 1.0);
}

TEST(Knn, UnanimousNeighbors) {
  std::vector<LabeledRelationship> train;
  for (int i = 0; i < 5; ++i) train.push_back(item({0.01 * i, 0}, {"bridging"}));
  for (int i = 0; i < 5; ++i) train.push_back(item({5 + 0.01 * i, 0}, {"crossing"}));
  const auto p = knn_predict(train, point({0, 0}), config({"bridging", "crossing"}));
  EXPECT_EQ(p.classes, (std::set<std::string>{"bridging"}));
  EXPECT_DOUBLE_EQ(p.probability.at("bridging"), 1.0);
}

TEST(Knn, TwoOfFiveBelowThreshold) {
  std::vector<LabeledRelationship> train{item({0.1, 0}, {"x"}), item({0.2, 0}, {"x"}), item({0.3, 0}, {}),
                                         item({0.4, 0}, {}), item({0.5, 0}, {}), item({9, 0}, {"x"})};
  const auto p = knn_predict(train, point({0, 0}), config({"x"}));
  EXPECT_DOUBLE_EQ(p.probability.at("x"), 0.4);
  EXPECT_TRUE(p.classes.empty());
}

TEST(Knn, KLargerThanTrainingSet) {
  const std::vector<LabeledRelationship> train{item({0, 0}, {"a"})};
  EXPECT_EQ(code_of([&] { knn_predict(train, point({0, 0}), config({"a"}, 2)); }), ErrorCode::BadRequest);
}

TEST(Knn, TiesKeepInputOrder) {
  // Four items at distance 1; k = 2 takes the first two in input order.
  const std::vector<LabeledRelationship> train{item({1, 0}, {"a"}), item({0, 1}, {"a"}), item({-1, 0}, {"b"}),
                                               item({0, -1}, {"b"})};
  EXPECT_EQ(knn_predict(train, point({0, 0}), config({"a", "b"}, 2)).classes, (std::set<std::string>{"a"}));
  std::vector<LabeledRelationship> rev(train.rbegin(), train.rend());
  EXPECT_EQ(knn_predict(rev, point({0, 0}), config({"a", "b"}, 2)).classes, (std::set<std::string>{"b"}));
}

TEST(Knn, PermutationInvariantWithoutTies) {
  TestRng g(101);
  std::vector<LabeledRelationship> train;
  for (int i = 0; i < 40; ++i) {
    std::set<std::string> c;
    if (g.uniform() < 0.5) c.insert("a");
    if (g.uniform() < 0.3) c.insert("b");
    train.push_back(item({g.uniform(), g.uniform(), g.uniform()}, c));
  }
  const auto q = point({0.5, 0.5, 0.5});
  const auto want = knn_predict(train, q, config({"a", "b"}));
  for (int t = 0; t < 10; ++t) {
    for (std::size_t i = train.size() - 1; i > 0; --i) {
      std::swap(train[i], train[static_cast<std::size_t>(g.integer(0, static_cast<int>(i)))]);
    }
    EXPECT_EQ(knn_predict(train, q, config({"a", "b"})).probability, want.probability);
  }
}

TEST(Config, Validation) {
  EXPECT_EQ(code_of([] { config({"a"}, 0).validate(); }), ErrorCode::BadRequest);
  EXPECT_EQ(code_of([] { config({"a"}, 5, 1.5).validate(); }), ErrorCode::BadRequest);
  EXPECT_EQ(code_of([] { config({"a", "a"}).validate(); }), ErrorCode::BadRequest);
  EXPECT_EQ(code_of([] { config({"none"}).validate(); }), ErrorCode::BadRequest);
  EXPECT_NO_THROW(config({"a", "b"}).validate());
}

TEST(Scores, HandComputed) {
  // a: TP 1 (item 0), FP 1 (item 1), FN 1 (item 2). b: TP 1, never missed.
  const std::vector<std::set<std::string>> actual{{"a"}, {"b"}, {"a", "b"}};
  const std::vector<std::set<std::string>> predicted{{"a"}, {"a", "b"}, {"b"}};
  const auto s = score(actual, predicted, {"a", "b", "c"});
  ASSERT_EQ(s.per_class.size(), 3u);
  EXPECT_EQ(s.per_class[0].true_positive, 1);
  EXPECT_EQ(s.per_class[0].false_positive, 1);
  EXPECT_EQ(s.per_class[0].false_negative, 1);
  EXPECT_DOUBLE_EQ(s.per_class[0].f1, 0.5);
  EXPECT_DOUBLE_EQ(s.per_class[1].precision, 1.0);
  EXPECT_DOUBLE_EQ(s.per_class[1].recall, 1.0);
  // Unused class: every ratio has a zero denominator and reads 0.
  EXPECT_DOUBLE_EQ(s.per_class[2].f1, 0.0);
  EXPECT_DOUBLE_EQ(s.macro_f1, (0.5 + 1.0 + 0.0) / 3.0);
  // Micro: TP 3, FP 1, FN 1.
  EXPECT_DOUBLE_EQ(s.micro_precision, 0.75);
  EXPECT_DOUBLE_EQ(s.micro_recall, 0.75);
  EXPECT_DOUBLE_EQ(s.micro_f1, 0.75);
}

TEST(Confusion, RowSumsEqualClassCounts) {
  TestRng g(102);
  const std::vector<std::string> classes{"a", "b", "c"};
  std::vector<std::set<std::string>> actual, predicted;
  for (int i = 0; i < 200; ++i) {
    std::set<std::string> a, p;
    for (const auto& c : classes) {
      if (g.uniform() < 0.3) a.insert(c);
      if (g.uniform() < 0.3) p.insert(c);
    }
    actual.push_back(a);
    predicted.push_back(p);
  }
  const auto m = confusion_matrix(actual, predicted, classes);
  ASSERT_EQ(m.size(), 4u);
  for (std::size_t r = 0; r < 4; ++r) {
    std::size_t want = 0;
    for (const auto& a : actual) want += r < 3 ? a.count(classes[r]) : a.empty();
    EXPECT_NEAR(std::accumulate(m[r].begin(), m[r].end(), 0.0), static_cast<double>(want), 1e-9) << r;
  }
}

TEST(Confusion, HandComputed) {
  const auto m = confusion_matrix({{"a"}, {"a", "b"}, {}}, {{"b"}, {"a"}, {"a", "b"}}, {"a", "b"});
  // Item 0: (a, b) += 1. Item 1: (a, a) += 1, (b, a) += 1. Item 2: (none, a), (none, b) += 1/2.
  EXPECT_DOUBLE_EQ(m[0][0], 1.0);
  EXPECT_DOUBLE_EQ(m[0][1], 1.0);
  EXPECT_DOUBLE_EQ(m[1][0], 1.0);
  EXPECT_DOUBLE_EQ(m[2][0], 0.5);
  EXPECT_DOUBLE_EQ(m[2][1], 0.5);
  EXPECT_DOUBLE_EQ(m[2][2], 0.0);
}

TEST(Loocv, SeparableClustersScorePerfectly) {
  TestRng g(103);
  std::vector<LabeledRelationship> data;
  const std::vector<std::string> classes{"p", "q", "r"};
  for (std::size_t c = 0; c < 4; ++c) {
    for (int i = 0; i < 10; ++i) {
      std::vector<double> v(4, 0.0);
      v[c] = 1.0;
      for (auto& x : v) x += g.range(0, 0.05);
      data.push_back(item(v, c < 3 ? std::set<std::string>{classes[c]} : std::set<std::string>{}));
    }
  }
  const auto r = loocv(data, config(classes));
  for (const auto& m : r.scores.per_class) EXPECT_DOUBLE_EQ(m.f1, 1.0) << m.name;
  EXPECT_DOUBLE_EQ(r.scores.macro_f1, 1.0);
  EXPECT_EQ(r.items, data.size());
  EXPECT_EQ(r.matrix_labels.back(), "none");
  EXPECT_DOUBLE_EQ(r.confusion[3][3], 10.0);
  EXPECT_EQ(r.sweep.size(), 9u);
}

TEST(Loocv, PermutedLabelsScoreNearThePrior) {
  // Two balanced single-label classes: a classifier that ignores the
  // descriptor has expected macro F1 equal to the prior 0.5.
  TestRng g(104);
  std::vector<LabeledRelationship> data;
  for (int i = 0; i < 200; ++i) {
    data.push_back(item({g.uniform(), g.uniform(), g.uniform()}, {i % 2 ? "a" : "b"}, std::to_string(i)));
  }
  double sum = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<std::set<std::string>> labels;
    for (const auto& d : data) labels.push_back(d.classes);
    for (std::size_t i = labels.size() - 1; i > 0; --i) {
      std::swap(labels[i], labels[static_cast<std::size_t>(g.integer(0, static_cast<int>(i)))]);
    }
    auto shuffled = data;
    for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].classes = labels[i];
    sum += loocv(shuffled, config({"a", "b"})).scores.macro_f1;
  }
  EXPECT_NEAR(sum / 20.0, 0.5, 0.15);
}

TEST(Loocv, RaisingThresholdNeverAddsClasses) {
  const auto s = synthetic::build_synthetic(synthetic::design_names(), 6, 5);
  const auto data = describe_labeled(s.data, s.labels, descriptor::DescriptorKind::Raid);
  const auto cls = synthetic::relationship_classes();
  std::vector<std::set<std::string>> prev;
  double prev_recall = 2.0;
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto r = loocv(data, config(cls, 5, t));
    if (!prev.empty()) {
      for (std::size_t i = 0; i < prev.size(); ++i) {
        EXPECT_TRUE(std::includes(prev[i].begin(), prev[i].end(), r.predictions[i].begin(), r.predictions[i].end()));
      }
    }
    EXPECT_LE(r.scores.micro_recall, prev_recall);
    prev_recall = r.scores.micro_recall;
    prev = r.predictions;
  }
}

TEST(Loocv, TooSmall) {
  const std::vector<LabeledRelationship> data(5, item({0, 0}, {"a"}));
  EXPECT_EQ(code_of([&] { loocv(data, config({"a"})); }), ErrorCode::BadRequest);
}

TEST(Labels, RoundTripAndErrors) {
  const std::vector<RelationLabel> labels{{"1", "2", "horse", {"riding"}}, {"3", "4", "chair", {}}};
  const auto back = parse_labels(format_labels(labels));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].classes, labels[0].classes);
  EXPECT_EQ(back[1].target_label, "chair");
  EXPECT_EQ(code_of([] { parse_labels("{\"relationships\": [{\"image_id\": 1}]}"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { parse_labels("not json"); }), ErrorCode::Parse);
}

TEST(Labels, DescribeRejectsUnknownRegion) {
  const auto s = synthetic::build_synthetic({"crossing"}, 2, 1);
  auto labels = s.labels;
  labels.push_back({"1", "99", "target", {"crossing"}});
  EXPECT_EQ(code_of([&] { describe_labeled(s.data, labels, descriptor::DescriptorKind::Raid); }),
            ErrorCode::NotFound);
}
