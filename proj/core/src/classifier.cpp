#include "raid/classifier.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "raid/error.hpp"
#include "raid/index.hpp"

namespace raid::classifier {

using nlohmann::json;

std::vector<RelationLabel> parse_labels(std::string_view text, std::string_view source_name) {
  std::vector<RelationLabel> out;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, fmt::format("{}: malformed JSON: {}", source_name, e.what()));
  }
  try {
    const auto& list = doc.at("relationships");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& j = list[i];
      auto id = [&](const char* name) {
        const auto& v = j.at(name);
        return v.is_string() ? v.get<std::string>() : v.dump();
      };
      RelationLabel l{id("image_id"), id("source_region_id"),
                      j.at("target_label").get<std::string>(), {}};
      for (const auto& c : j.at("classes")) l.classes.insert(c.get<std::string>());
      out.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, fmt::format("{}: bad label file: {}", source_name, e.what()));
  }
  return out;
}

std::vector<RelationLabel> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open label file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_labels(buf.str(), path.string());
}

std::string format_labels(const std::vector<RelationLabel>& labels) {
  json list = json::array();
  for (const auto& l : labels) {
    list.push_back({{"image_id", l.image_id},
                    {"source_region_id", l.source_region_id},
                    {"target_label", l.target_label},
                    {"classes", l.classes}});
  }
  return json{{"relationships", list}}.dump(1) + "\n";
}

std::vector<LabeledRelationship> describe_labeled(const dataset::Dataset& data,
                                                  const std::vector<RelationLabel>& labels,
                                                  descriptor::DescriptorKind kind,
                                                  const descriptor::DescriptorConfig& cfg) {
  std::vector<LabeledRelationship> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto* image = data.find_image(l.image_id);
    if (image == nullptr) throw Error(ErrorCode::NotFound, "labeled image not found: " + l.image_id);
    const auto c = dataset::make_candidate(*image, l.source_region_id, l.target_label);
    const auto* src = image->find_region(l.source_region_id);
    out.push_back({l.image_id, l.source_region_id, l.target_label,
                   index::compute_descriptor(kind, src->geometry, c.merged_target, image->frame(), cfg),
                   l.classes});
  }
  return out;
}

void ClassifierConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::BadRequest, "k must be at least 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::BadRequest, "threshold must lie in [0, 1]");
  }
  std::set<std::string> seen;
  for (const auto& c : class_list) {
    if (c.empty() || c == "none") throw Error(ErrorCode::BadRequest, "invalid class name '" + c + "'");
    if (!seen.insert(c).second) throw Error(ErrorCode::BadRequest, "duplicate class '" + c + "'");
  }
}

namespace {

constexpr double kThresholdSlack = 1e-12;

void check_classes(const std::vector<LabeledRelationship>& data, const ClassifierConfig& cfg) {
  const std::set<std::string> known(cfg.class_list.begin(), cfg.class_list.end());
  for (const auto& item : data) {
    for (const auto& c : item.classes) {
      if (!known.count(c)) throw Error(ErrorCode::BadRequest, "class '" + c + "' is not in the class list");
    }
  }
}

// Indices of the k smallest distances, ties in input order.
std::vector<std::size_t> nearest(const std::vector<double>& dist, std::size_t k,
                                 std::size_t skip = static_cast<std::size_t>(-1)) {
  std::vector<std::size_t> order;
  order.reserve(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (i != skip) order.push_back(i);
  }
  auto less = [&](std::size_t a, std::size_t b) {
    return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), less);
  order.resize(k);
  return order;
}

std::map<std::string, double> probabilities(const std::vector<LabeledRelationship>& data,
                                            const std::vector<std::size_t>& neighbors,
                                            const ClassifierConfig& cfg) {
  std::map<std::string, double> p;
  for (const auto& c : cfg.class_list) {
    int n = 0;
    for (auto j : neighbors) n += data[j].classes.count(c) ? 1 : 0;
    p[c] = static_cast<double>(n) / static_cast<double>(neighbors.size());
  }
  return p;
}

std::set<std::string> threshold_classes(const std::map<std::string, double>& p, double t) {
  std::set<std::string> out;
  for (const auto& [c, v] : p) {
    if (v >= t - kThresholdSlack) out.insert(c);
  }
  return out;
}

double ratio(double a, double b) { return b > 0.0 ? a / b : 0.0; }
double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

Prediction knn_predict(const std::vector<LabeledRelationship>& train,
                       const descriptor::Descriptor& query, const ClassifierConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorCode::BadRequest, "training set is empty");
  if (static_cast<std::size_t>(cfg.k) > train.size()) {
    throw Error(ErrorCode::BadRequest,
                fmt::format("k = {} exceeds the training set size {}", cfg.k, train.size()));
  }
  check_classes(train, cfg);
  std::vector<double> dist(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) dist[i] = descriptor::l1_distance(query, train[i].descriptor);
  Prediction out;
  out.probability = probabilities(train, nearest(dist, static_cast<std::size_t>(cfg.k)), cfg);
  out.classes = threshold_classes(out.probability, cfg.threshold);
  return out;
}

Scores score(const std::vector<std::set<std::string>>& actual,
             const std::vector<std::set<std::string>>& predicted,
             const std::vector<std::string>& class_list) {
  if (actual.size() != predicted.size()) {
    throw Error(ErrorCode::BadRequest, "actual and predicted lists differ in length");
  }
  Scores s;
  int tp_all = 0, fp_all = 0, fn_all = 0;
  for (const auto& c : class_list) {
    ClassMetrics m;
    m.name = c;
    for (std::size_t i = 0; i < actual.size(); ++i) {
      const bool a = actual[i].count(c) > 0;
      const bool p = predicted[i].count(c) > 0;
      m.support += a;
      m.true_positive += a && p;
      m.false_positive += !a && p;
      m.false_negative += a && !p;
    }
    m.precision = ratio(m.true_positive, m.true_positive + m.false_positive);
    m.recall = ratio(m.true_positive, m.true_positive + m.false_negative);
    m.f1 = f1_of(m.precision, m.recall);
    tp_all += m.true_positive;
    fp_all += m.false_positive;
    fn_all += m.false_negative;
    s.macro_precision += m.precision;
    s.macro_recall += m.recall;
    s.macro_f1 += m.f1;
    s.per_class.push_back(std::move(m));
  }
  if (!class_list.empty()) {
    const double n = static_cast<double>(class_list.size());
    s.macro_precision /= n;
    s.macro_recall /= n;
    s.macro_f1 /= n;
  }
  s.micro_precision = ratio(tp_all, tp_all + fp_all);
  s.micro_recall = ratio(tp_all, tp_all + fn_all);
  s.micro_f1 = f1_of(s.micro_precision, s.micro_recall);
  return s;
}

std::vector<std::vector<double>> confusion_matrix(
    const std::vector<std::set<std::string>>& actual,
    const std::vector<std::set<std::string>>& predicted,
    const std::vector<std::string>& class_list) {
  const std::size_t n = class_list.size() + 1;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < class_list.size(); ++i) slot[class_list[i]] = i;
  auto slots = [&](const std::set<std::string>& s) {
    std::vector<std::size_t> out;
    for (const auto& c : s) out.push_back(slot.at(c));
    if (out.empty()) out.push_back(n - 1);
    return out;
  };
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const auto rows = slots(actual[i]);
    const auto cols = slots(predicted[i]);
    const double w = 1.0 / static_cast<double>(cols.size());
    for (auto r : rows) {
      for (auto c : cols) m[r][c] += w;
    }
  }
  return m;
}

EvalReport loocv(const std::vector<LabeledRelationship>& data, const ClassifierConfig& cfg,
                 std::vector<double> thresholds) {
  cfg.validate();
  if (data.size() <= static_cast<std::size_t>(cfg.k)) {
    throw Error(ErrorCode::BadRequest,
                fmt::format("leave-one-out needs more than k = {} items, got {}", cfg.k, data.size()));
  }
  check_classes(data, cfg);
  if (thresholds.empty()) {
    for (int t = 1; t <= 9; ++t) thresholds.push_back(t / 10.0);
  }

  const std::size_t n = data.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i][j] = dist[j][i] = descriptor::l1_distance(data[i].descriptor, data[j].descriptor);
    }
  }
  std::vector<std::map<std::string, double>> prob(n);
  for (std::size_t i = 0; i < n; ++i) {
    prob[i] = probabilities(data, nearest(dist[i], static_cast<std::size_t>(cfg.k), i), cfg);
  }

  std::vector<std::set<std::string>> actual;
  for (const auto& d : data) actual.push_back(d.classes);
  auto predict_all = [&](double t) {
    std::vector<std::set<std::string>> out;
    for (const auto& p : prob) out.push_back(threshold_classes(p, t));
    return out;
  };

  EvalReport r;
  r.class_list = cfg.class_list;
  r.k = cfg.k;
  r.threshold = cfg.threshold;
  r.items = n;
  r.predictions = predict_all(cfg.threshold);
  r.scores = score(actual, r.predictions, cfg.class_list);
  r.matrix_labels = cfg.class_list;
  r.matrix_labels.push_back("none");
  r.confusion = confusion_matrix(actual, r.predictions, cfg.class_list);
  for (double t : thresholds) r.sweep.push_back({t, score(actual, predict_all(t), cfg.class_list)});
  return r;
}

}  // namespace raid::classifier
