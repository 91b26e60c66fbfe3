#include "raid_app/cli.hpp"

#include <fmt/format.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "raid/classifier.hpp"
#include "raid/dataset.hpp"
#include "raid/eval_report.hpp"
#include "raid/index.hpp"
#include "raid/synthetic.hpp"
#include "raid/verb_store.hpp"
#include "raid_app/contact_sheet.hpp"
#include "raid_app/service.hpp"
#include "raid_app/wire.hpp"

namespace raid::app {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
}

json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, fmt::format("{}: {}", path, e.what()));
  }
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0) || hi < lo) {
      throw Error(ErrorCode::BadRequest, "thresholds must look like lo:hi:step, e.g. 0.1:0.9:0.1");
    }
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(lo + i * step);
  } else {
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw Error(ErrorCode::BadRequest, "bad threshold '" + item + "'");
      }
    }
  }
  for (double t : out) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::BadRequest, "thresholds must lie in [0, 1]");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_warnings(const dataset::Dataset& d, std::ostream& err) {
  const auto& w = d.warnings;
  if (w.total() == 0) return;
  err << fmt::format(
      "warning: skipped {} annotations (rle {}, crowd {}, unknown category {}, unknown image {}, "
      "invalid {}, outside image {})\n",
      w.total(), w.rle_skipped, w.crowd_skipped, w.unknown_category, w.unknown_image,
      w.invalid_geometry, w.outside_image);
  for (const auto& m : w.messages) err << "warning: " << m << "\n";
}

std::atomic<Service*> g_service{nullptr};

extern "C" void stop_service(int) {
  if (auto* s = g_service.load()) s->stop();
}

struct PairOptions {
  std::string image;
  std::string region;
  std::string target_label;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Region-relationship descriptors: index, query, evaluate, serve"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "raid 0.1.0");

  // build-index
  auto* build = app.add_subcommand("build-index", "Compute descriptors for every relationship of a dataset");
  std::string b_annotations, b_out, b_kind = "raid", b_source_label;
  unsigned b_threads = std::max(1u, std::thread::hardware_concurrency());
  double b_samples = descriptor::DescriptorConfig{}.sample_count_target;
  build->add_option("--annotations", b_annotations, "COCO annotation file")->required();
  build->add_option("--out", b_out, "Index file to write")->required();
  build->add_option("--descriptor", b_kind, "raid or sc")->check(CLI::IsMember({"raid", "sc"}));
  build->add_option("--source-label", b_source_label, "Only index sources with this label");
  build->add_option("--threads", b_threads, "Worker threads")->check(CLI::PositiveNumber);
  build->add_option("--sample-count", b_samples, "Samples per image area")->check(CLI::PositiveNumber);

  // query
  auto* query = app.add_subcommand("query", "Rank indexed relationships by descriptor distance");
  std::string q_index, q_verb, q_verbs, q_sketch, q_source_label, q_filter_target, q_out, q_annotations,
      q_sheet, q_images;
  PairOptions q_pair;
  double q_min_area = 0.01;
  int q_top = 20;
  query->add_option("--index", q_index, "Index file")->required();
  auto* q_from = query->add_option("--from-image", q_pair.image, "Query by an indexed pair: image id");
  query->add_option("--source-region", q_pair.region, "Source region id of the pair");
  query->add_option("--target-label", q_pair.target_label,
                    "Target label of the pair; without --from-image, a target label filter");
  auto* q_verb_opt = query->add_option("--verb", q_verb, "Query by a stored verb");
  query->add_option("--verbs", q_verbs, "Verb store file");
  auto* q_sketch_opt = query->add_option("--sketch", q_sketch, "Query by a sketch JSON file");
  q_from->excludes(q_verb_opt)->excludes(q_sketch_opt);
  q_verb_opt->excludes(q_sketch_opt);
  query->add_option("--source-label", q_source_label, "Source label filter");
  query->add_option("--filter-target-label", q_filter_target, "Target label filter");
  query->add_option("--min-area-frac", q_min_area, "Minimum source area fraction");
  query->add_option("--top-n", q_top, "Number of results");
  query->add_option("--out", q_out, "Write results to this file instead of stdout");
  query->add_option("--annotations", q_annotations, "Annotation file; adds region outlines");
  query->add_option("--contact-sheet", q_sheet, "Write an SVG contact sheet (needs --annotations)");
  query->add_option("--images-dir", q_images, "Image directory for contact sheet thumbnails");

  // eval
  auto* eval = app.add_subcommand("eval", "Leave-one-out k-NN evaluation of labeled relationships");
  std::string e_dataset, e_labels, e_kind = "raid", e_thresholds = "0.1:0.9:0.1", e_report, e_classes;
  int e_k = 5;
  double e_threshold = 0.5;
  eval->add_option("--dataset", e_dataset, "COCO annotation file")->required();
  eval->add_option("--labels", e_labels, "Relationship label file")->required();
  eval->add_option("--descriptor", e_kind, "raid or sc")->check(CLI::IsMember({"raid", "sc"}));
  eval->add_option("--k", e_k, "Neighbors");
  eval->add_option("--threshold", e_threshold, "Membership probability threshold");
  eval->add_option("--thresholds", e_thresholds, "Sweep thresholds, lo:hi:step or a comma list");
  eval->add_option("--classes", e_classes, "Comma-separated class list (default: classes in the labels)");
  eval->add_option("--report", e_report, "Report directory")->required();

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a labeled synthetic relationship dataset");
  std::string g_classes = "all", g_out;
  int g_per = 20;
  std::uint64_t g_seed = 1;
  gen->add_option("--classes", g_classes, "Comma-separated designs, or all");
  gen->add_option("--per-class", g_per, "Pairs per design")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", g_seed, "Random seed");
  gen->add_option("--out", g_out, "Output directory")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string s_index, s_annotations, s_verbs, s_host = "127.0.0.1", s_static;
  int s_port = 8080;
  unsigned s_threads = 8;
  serve->add_option("--index", s_index, "Index file")->envname("RAID_INDEX");
  serve->add_option("--annotations", s_annotations, "Annotation file")->envname("RAID_ANNOTATIONS");
  serve->add_option("--verbs", s_verbs, "Verb store file")->envname("RAID_VERBS");
  serve->add_option("--host", s_host, "Bind address")->envname("RAID_HOST");
  serve->add_option("--port", s_port, "Port (0 picks a free one)")->envname("RAID_PORT");
  serve->add_option("--static", s_static, "UI asset directory")->envname("RAID_STATIC_DIR");
  serve->add_option("--threads", s_threads, "HTTP worker threads")->check(CLI::PositiveNumber);

  // save-verb
  auto* save = app.add_subcommand("save-verb", "Store a descriptor under a verb name");
  std::string v_verbs, v_name, v_index, v_sketch, v_note;
  PairOptions v_pair;
  save->add_option("--verbs", v_verbs, "Verb store file")->required();
  save->add_option("--name", v_name, "Verb name")->required();
  save->add_option("--index", v_index, "Index file (for --from-image)");
  auto* v_from = save->add_option("--from-image", v_pair.image, "Image id of an indexed pair");
  save->add_option("--source-region", v_pair.region, "Source region id of the pair");
  save->add_option("--target-label", v_pair.target_label, "Target label of the pair");
  auto* v_sketch_opt = save->add_option("--sketch", v_sketch, "Sketch JSON file");
  v_from->excludes(v_sketch_opt);
  save->add_option("--note", v_note, "Provenance note");

  // verbs
  auto* list = app.add_subcommand("verbs", "Show stored verbs");
  std::string l_verbs, l_name;
  list->add_option("--verbs", l_verbs, "Verb store file")->required();
  list->add_option("--name", l_name, "Show one verb with its descriptor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) {
      const auto data = dataset::load_annotations(b_annotations);
      print_warnings(data, err);
      descriptor::DescriptorConfig cfg;
      cfg.sample_count_target = b_samples;
      index::BuildOptions opt;
      opt.kind = descriptor::parse_kind(b_kind);
      opt.threads = b_threads;
      if (!b_source_label.empty()) opt.source_label = b_source_label;
      const auto result = index::build_index(data, cfg, opt);
      result.index.save(b_out);
      out << fmt::format("records {} skipped {} candidates {} images {} seconds {:.3f}\n",
                         result.stats.records, result.stats.skipped_total(), result.stats.candidates,
                         result.stats.images, result.stats.seconds);
      return kExitOk;
    }

    if (*query) {
      const auto idx = index::DescriptorIndex::load(q_index);
      index::QuerySpec spec;
      if (!q_pair.image.empty()) {
        if (q_pair.region.empty() || q_pair.target_label.empty()) {
          throw Error(ErrorCode::BadRequest, "--from-image needs --source-region and --target-label");
        }
        const auto i = idx.find(q_pair.image, q_pair.region, q_pair.target_label);
        if (!i) {
          throw Error(ErrorCode::NotFound, fmt::format("pair ({}, {}, {}) is not in the index", q_pair.image,
                                                       q_pair.region, q_pair.target_label));
        }
        spec.descriptor = idx.descriptor(*i);
      } else if (!q_verb.empty()) {
        if (q_verbs.empty()) throw Error(ErrorCode::BadRequest, "--verb needs --verbs");
        spec.descriptor = verbs::VerbStore(q_verbs).lookup(q_verb).descriptor;
        if (!q_pair.target_label.empty()) spec.target_label = q_pair.target_label;
      } else if (!q_sketch.empty()) {
        auto sketch = sketch_from_json(read_json(q_sketch));
        sketch.kind = idx.kind();
        spec.descriptor = compute_sketch(sketch, idx.config());
        if (!q_pair.target_label.empty()) spec.target_label = q_pair.target_label;
      } else {
        throw Error(ErrorCode::BadRequest, "give one of --from-image, --verb or --sketch");
      }
      if (!q_source_label.empty()) spec.source_label = q_source_label;
      if (!q_filter_target.empty()) spec.target_label = q_filter_target;
      spec.min_area_fraction = q_min_area;
      spec.top_n = q_top;
      const auto results = idx.query(spec);

      std::optional<dataset::Dataset> data;
      if (!q_annotations.empty()) data = dataset::load_annotations(q_annotations);
      const json doc = {{"descriptor_kind", std::string(descriptor::to_string(idx.kind()))},
                        {"count", results.size()},
                        {"results", results_to_json(idx, results, data ? &*data : nullptr)}};
      const std::string text = doc.dump(2) + "\n";
      if (q_out.empty()) {
        out << text;
      } else {
        write_file(q_out, text);
      }
      if (!q_sheet.empty()) {
        if (!data) throw Error(ErrorCode::BadRequest, "--contact-sheet needs --annotations");
        write_file(q_sheet, contact_sheet_svg(doc["results"], q_images));
      }
      return kExitOk;
    }

    if (*eval) {
      const auto data = dataset::load_annotations(e_dataset);
      print_warnings(data, err);
      const auto labels = classifier::load_labels(e_labels);
      classifier::ClassifierConfig cfg;
      cfg.k = e_k;
      cfg.threshold = e_threshold;
      if (!e_classes.empty()) {
        cfg.class_list = split_list(e_classes);
      } else {
        std::set<std::string> all;
        for (const auto& l : labels) all.insert(l.classes.begin(), l.classes.end());
        cfg.class_list.assign(all.begin(), all.end());
      }
      const auto items = classifier::describe_labeled(data, labels, descriptor::parse_kind(e_kind));
      const auto report = classifier::loocv(items, cfg, parse_thresholds(e_thresholds));
      report::write_report(report, e_report);
      out << fmt::format("{} items {} macro_f1 {:.4f} micro_f1 {:.4f}\n", e_kind, report.items,
                         report.scores.macro_f1, report.scores.micro_f1);
      return kExitOk;
    }

    if (*gen) {
      const auto designs = g_classes == "all" ? synthetic::design_names() : split_list(g_classes);
      const auto s = synthetic::build_synthetic(designs, g_per, g_seed);
      synthetic::write_synthetic(s, g_out);
      out << fmt::format("images {} relationships {} out {}\n", s.data.images.size(), s.labels.size(), g_out);
      return kExitOk;
    }

    if (*serve) {
      std::shared_ptr<const index::DescriptorIndex> idx;
      std::shared_ptr<const dataset::Dataset> data;
      if (!s_index.empty()) idx = std::make_shared<index::DescriptorIndex>(index::DescriptorIndex::load(s_index));
      if (!s_annotations.empty()) {
        data = std::make_shared<dataset::Dataset>(dataset::load_annotations(s_annotations));
        print_warnings(*data, err);
      }
      auto store = s_verbs.empty() ? std::make_shared<verbs::VerbStore>()
                                   : std::make_shared<verbs::VerbStore>(s_verbs);
      Service service(idx, data, store, {s_static, s_threads});
      const int port = service.bind(s_host, s_port);
      if (port < 0) throw Error(ErrorCode::Io, fmt::format("cannot bind {}:{}", s_host, s_port));
      out << fmt::format("listening on http://{}:{}\n", s_host, port) << std::flush;
      g_service = &service;
      std::signal(SIGINT, stop_service);
      std::signal(SIGTERM, stop_service);
      const bool ok = service.run();
      g_service = nullptr;
      return ok ? kExitOk : kExitInternal;
    }

    if (*save) {
      descriptor::Descriptor d;
      std::string note = v_note;
      if (!v_pair.image.empty()) {
        if (v_index.empty()) throw Error(ErrorCode::BadRequest, "--from-image needs --index");
        const auto idx = index::DescriptorIndex::load(v_index);
        const auto i = idx.find(v_pair.image, v_pair.region, v_pair.target_label);
        if (!i) throw Error(ErrorCode::NotFound, "pair is not in the index");
        d = idx.descriptor(*i);
        if (note.empty()) {
          note = fmt::format("image {} region {} target {}", v_pair.image, v_pair.region, v_pair.target_label);
        }
      } else if (!v_sketch.empty()) {
        d = compute_sketch(sketch_from_json(read_json(v_sketch)));
        if (note.empty()) note = "sketch " + v_sketch;
      } else {
        throw Error(ErrorCode::BadRequest, "give --from-image or --sketch");
      }
      verbs::VerbStore store(v_verbs);
      out << verb_detail_json(store.save(v_name, d, note)).dump(2) << "\n";
      return kExitOk;
    }

    if (*list) {
      const verbs::VerbStore store(l_verbs);
      if (!l_name.empty()) {
        out << verb_detail_json(store.lookup(l_name)).dump(2) << "\n";
      } else {
        json items = json::array();
        for (const auto& e : store.list()) items.push_back(verb_summary_json(e));
        out << json{{"verbs", items}}.dump(2) << "\n";
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::BadRequest ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace raid::app
