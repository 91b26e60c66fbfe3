#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "raid/dataset.hpp"
#include "raid/descriptor.hpp"

namespace raid::classifier {

/// Class assignment of one relationship, as stored in a label sidecar.
struct RelationLabel {
  std::string image_id;
  std::string source_region_id;
  std::string target_label;
  std::set<std::string> classes;
};

/// Sidecar JSON: {"relationships": [{image_id, source_region_id,
/// target_label, classes: [...]}, ...]}.
std::vector<RelationLabel> parse_labels(std::string_view text,
                                        std::string_view source_name = "<memory>");
std::vector<RelationLabel> load_labels(const std::filesystem::path& path);
std::string format_labels(const std::vector<RelationLabel>& labels);

struct LabeledRelationship {
  std::string image_id;
  std::string source_region_id;
  std::string target_label;
  descriptor::Descriptor descriptor;
  std::set<std::string> classes;
};

/// Descriptors for every labeled relationship of the dataset. Throws
/// NotFound for labels that name a missing image or region.
std::vector<LabeledRelationship> describe_labeled(const dataset::Dataset& data,
                                                  const std::vector<RelationLabel>& labels,
                                                  descriptor::DescriptorKind kind,
                                                  const descriptor::DescriptorConfig& cfg = {});

struct ClassifierConfig {
  int k = 5;
  double threshold = 0.5;
  std::vector<std::string> class_list;

  void validate() const;
};

struct Prediction {
  /// Fraction of the k nearest neighbors carrying each class in class_list.
  std::map<std::string, double> probability;
  std::set<std::string> classes;
};

/// Per-class binary k-NN by L1 distance. Neighbors at equal distance keep
/// their input order. Class c is predicted when its probability reaches the
/// threshold. Throws BadRequest when k exceeds the training set.
Prediction knn_predict(const std::vector<LabeledRelationship>& train,
                       const descriptor::Descriptor& query, const ClassifierConfig& cfg);

struct ClassMetrics {
  std::string name;
  int support = 0;
  int true_positive = 0;
  int false_positive = 0;
  int false_negative = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Metrics of one prediction set. Zero-denominator ratios are 0.
struct Scores {
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
};

struct SweepPoint {
  double threshold = 0.0;
  Scores scores;
};

struct EvalReport {
  std::vector<std::string> class_list;
  int k = 5;
  double threshold = 0.5;
  std::size_t items = 0;
  Scores scores;
  /// labels = class_list + "none"; matrix[actual][predicted]. An item adds
  /// 1/|P| to (a, p) for each actual a and predicted p, with empty sets read
  /// as {none}, so row a sums to the number of items carrying a.
  std::vector<std::string> matrix_labels;
  std::vector<std::vector<double>> confusion;
  std::vector<SweepPoint> sweep;
  /// Predicted class set of every item at the report threshold.
  std::vector<std::set<std::string>> predictions;
};

Scores score(const std::vector<std::set<std::string>>& actual,
             const std::vector<std::set<std::string>>& predicted,
             const std::vector<std::string>& class_list);

std::vector<std::vector<double>> confusion_matrix(
    const std::vector<std::set<std::string>>& actual,
    const std::vector<std::set<std::string>>& predicted,
    const std::vector<std::string>& class_list);

/// Leave-one-out evaluation: every item is predicted from all others.
/// The sweep covers the given thresholds (0.1, 0.2, ..., 0.9 when empty).
/// Throws BadRequest when there are not more than k items.
EvalReport loocv(const std::vector<LabeledRelationship>& data, const ClassifierConfig& cfg,
                 std::vector<double> thresholds = {});

}  // namespace raid::classifier
