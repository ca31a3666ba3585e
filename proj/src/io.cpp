#include "plkit/io.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "plkit/errors.hpp"
#include "plkit/format.hpp"

namespace plkit::io {
namespace {

using nlohmann::json;

// std::map storage keeps object keys sorted, so equal values serialize to
// equal bytes.
json parse_or_throw(const std::string& path, const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string id_string(const std::string& path, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw FormatError(path + ": image id must be a string or an integer");
}

// Parses a [x, y, w, h] box, reporting failures into problems.
std::optional<Box> bbox_or_report(const json& v, const std::string& who,
                                  std::vector<std::string>& problems) {
  if (!v.is_array() || v.size() != 4 ||
      !std::all_of(v.begin(), v.end(),
                   [](const json& e) { return e.is_number(); })) {
    problems.push_back(who + " bbox must be four numbers");
    return std::nullopt;
  }
  try {
    return Box::from_xywh(v[0].get<double>(), v[1].get<double>(),
                          v[2].get<double>(), v[3].get<double>());
  } catch (const ValidationError& e) {
    problems.push_back(who + " bbox invalid: " + e.what());
    return std::nullopt;
  }
}

json bbox_json(const Box& b) {
  return json::array({b.x1, b.y1, b.x2 - b.x1, b.y2 - b.y1});
}

}  // namespace

Dataset load_annotations(const std::string& path) {
  const json root = parse_or_throw(path, read_text_file(path));
  try {
    Dataset ds;
    std::vector<std::string> problems;

    // Category ids map to class indices by ascending id.
    std::map<std::int64_t, std::size_t> cat_index;
    std::vector<std::pair<std::int64_t, std::string>> cats;
    for (const json& c : root.at("categories")) {
      cats.emplace_back(c.at("id").get<std::int64_t>(),
                        c.at("name").get<std::string>());
    }
    std::sort(cats.begin(), cats.end());
    for (const auto& [id, name] : cats) {
      if (cat_index.count(id)) {
        problems.push_back("duplicate category id " + std::to_string(id));
        continue;
      }
      cat_index[id] = ds.categories.size();
      ds.categories.push_back(name);
    }

    std::map<std::string, std::size_t> record_index;
    for (const json& img : root.at("images")) {
      ImageRecord r;
      r.image_id = id_string(path, img.at("id"));
      r.width = img.at("width").get<int>();
      r.height = img.at("height").get<int>();
      r.weak_labels = WeakLabels(ds.categories.size());
      if (record_index.count(r.image_id)) {
        problems.push_back("duplicate image id '" + r.image_id + "'");
        continue;
      }
      record_index[r.image_id] = ds.records.size();
      ds.records.push_back(std::move(r));
    }

    // Instances land on their image in file order.
    std::vector<std::vector<Instance>> instances(ds.records.size());
    std::set<std::string> has_instances;
    std::size_t ann_no = 0;
    for (const json& a : root.at("annotations")) {
      const std::string who = "annotation " + std::to_string(ann_no++);
      const std::string image = id_string(path, a.at("image_id"));
      const auto rec = record_index.find(image);
      if (rec == record_index.end()) {
        problems.push_back(who + " references unknown image '" + image + "'");
        continue;
      }
      const std::int64_t cat = a.at("category_id").get<std::int64_t>();
      const auto ci = cat_index.find(cat);
      if (ci == cat_index.end()) {
        problems.push_back(who + " references unknown category " +
                           std::to_string(cat));
        continue;
      }
      const std::optional<Box> box = bbox_or_report(a.at("bbox"), who, problems);
      if (!box) continue;
      instances[rec->second].push_back(
          Instance::foreground(static_cast<int>(ci->second), *box));
      has_instances.insert(image);
    }

    std::set<std::string> weak_images;
    if (root.contains("weak_labels")) {
      for (const json& w : root.at("weak_labels")) {
        const std::string image = id_string(path, w.at("image_id"));
        const auto rec = record_index.find(image);
        if (rec == record_index.end()) {
          problems.push_back("weak labels reference unknown image '" + image +
                             "'");
          continue;
        }
        if (!weak_images.insert(image).second) {
          problems.push_back("duplicate weak labels for image '" + image + "'");
          continue;
        }
        if (has_instances.count(image)) {
          problems.push_back("image '" + image +
                             "' has both annotations and weak labels");
          continue;
        }
        for (const json& c : w.at("category_ids")) {
          const std::int64_t cat = c.get<std::int64_t>();
          const auto ci = cat_index.find(cat);
          if (ci == cat_index.end()) {
            problems.push_back("weak labels for image '" + image +
                               "' reference unknown category " +
                               std::to_string(cat));
            continue;
          }
          ds.records[rec->second].weak_labels.set(ci->second);
        }
      }
    }

    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      ImageRecord& r = ds.records[i];
      if (weak_images.count(r.image_id)) continue;
      for (const Instance& inst : instances[i]) {
        r.weak_labels.set(static_cast<std::size_t>(inst.class_id));
      }
      r.full_annotations = std::move(instances[i]);
    }
    for (const ImageRecord& r : ds.records) {
      for (auto& p : validate_record(r, ds.category_count())) {
        problems.push_back(std::move(p));
      }
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return ds;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_annotations(const std::string& path, const Dataset& dataset) {
  std::vector<std::string> problems;
  for (const ImageRecord& r : dataset.records) {
    for (auto& p : validate_record(r, dataset.category_count())) {
      problems.push_back(std::move(p));
    }
    if (!r.full_annotations) continue;
    for (const Instance& inst : *r.full_annotations) {
      if (!inst.is_foreground()) {
        problems.push_back("image '" + r.image_id +
                           "' has a background instance, which has no "
                           "annotation shape");
      }
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));

  json root;
  root["categories"] = json::array();
  for (std::size_t k = 0; k < dataset.categories.size(); ++k) {
    root["categories"].push_back(
        {{"id", k}, {"name", dataset.categories[k]}});
  }
  root["images"] = json::array();
  root["annotations"] = json::array();
  root["weak_labels"] = json::array();
  for (const ImageRecord& r : dataset.records) {
    root["images"].push_back(
        {{"id", r.image_id}, {"width", r.width}, {"height", r.height}});
    if (r.is_fully_annotated()) {
      for (const Instance& inst : *r.full_annotations) {
        root["annotations"].push_back({{"image_id", r.image_id},
                                       {"category_id", inst.class_id},
                                       {"bbox", bbox_json(*inst.box)}});
      }
    } else {
      json ids = json::array();
      for (std::size_t k = 0; k < r.weak_labels.size(); ++k) {
        if (r.weak_labels.is_set(k)) ids.push_back(k);
      }
      root["weak_labels"].push_back(
          {{"image_id", r.image_id}, {"category_ids", std::move(ids)}});
    }
  }
  write_text_file(path, root.dump() + "\n");
}

std::map<std::string, std::vector<Detection>> load_detections(
    const std::string& path, std::size_t category_count) {
  const json root = parse_or_throw(path, read_text_file(path));
  try {
    if (!root.is_array()) {
      throw FormatError(path + ": detection file must be a top-level array");
    }
    std::map<std::string, std::vector<Detection>> out;
    std::vector<std::string> problems;
    std::size_t det_no = 0;
    for (const json& d : root) {
      const std::string who = "detection " + std::to_string(det_no++);
      const std::string image = id_string(path, d.at("image_id"));
      const std::optional<Box> box = bbox_or_report(d.at("bbox"), who, problems);
      const json& scores = d.at("scores");
      if (!scores.is_array() || scores.size() != category_count) {
        problems.push_back(who + " has " + std::to_string(scores.size()) +
                           " scores, expected " +
                           std::to_string(category_count));
        continue;
      }
      if (!box) continue;
      Detection det{*box, scores.get<std::vector<double>>(), std::nullopt};
      if (d.contains("objectness")) {
        det.objectness = d.at("objectness").get<double>();
      }
      out[image].push_back(std::move(det));
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return out;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_detections(
    const std::string& path,
    const std::map<std::string, std::vector<Detection>>& detections) {
  json root = json::array();
  for (const auto& [image, dets] : detections) {
    for (const Detection& d : dets) {
      json entry = {{"image_id", image},
                    {"bbox", bbox_json(d.box)},
                    {"scores", d.class_scores}};
      if (d.objectness) entry["objectness"] = *d.objectness;
      root.push_back(std::move(entry));
    }
  }
  write_text_file(path, root.dump() + "\n");
}

std::vector<PseudoLabelSet> load_pseudo_labels(const std::string& path) {
  const json root = parse_or_throw(path, read_text_file(path));
  try {
    std::vector<PseudoLabelSet> sets;
    std::map<std::pair<std::string, std::string>, std::size_t> set_index;
    std::vector<std::string> problems;
    for (const json& img : root.at("images")) {
      PseudoLabelSet set;
      set.image_id = id_string(path, img.at("id"));
      set.strategy_tag = img.at("strategy_tag").get<std::string>();
      const auto key = std::make_pair(set.image_id, set.strategy_tag);
      if (set_index.count(key)) {
        problems.push_back("duplicate set for image '" + set.image_id +
                           "' and strategy '" + set.strategy_tag + "'");
        continue;
      }
      set_index[key] = sets.size();
      sets.push_back(std::move(set));
    }
    std::size_t ann_no = 0;
    for (const json& a : root.at("annotations")) {
      const std::string who = "annotation " + std::to_string(ann_no++);
      const std::string image = id_string(path, a.at("image_id"));
      const std::string tag = a.at("strategy_tag").get<std::string>();
      const auto it = set_index.find(std::make_pair(image, tag));
      if (it == set_index.end()) {
        problems.push_back(who + " references unknown set for image '" +
                           image + "' and strategy '" + tag + "'");
        continue;
      }
      const std::optional<Box> box = bbox_or_report(a.at("bbox"), who, problems);
      if (!box) continue;
      PseudoLabel pl;
      pl.class_id = a.at("category_id").get<int>();
      pl.box = *box;
      pl.score = a.at("score").get<double>();
      if (!(pl.score >= 0.0 && pl.score <= 1.0)) {
        problems.push_back(who + " score " + format_double(pl.score) +
                           " outside [0,1]");
        continue;
      }
      sets[it->second].labels.push_back(std::move(pl));
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return sets;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_pseudo_labels(const std::string& path,
                         const std::vector<PseudoLabelSet>& sets) {
  json root;
  root["images"] = json::array();
  root["annotations"] = json::array();
  for (const PseudoLabelSet& set : sets) {
    root["images"].push_back(
        {{"id", set.image_id}, {"strategy_tag", set.strategy_tag}});
    for (const PseudoLabel& pl : set.labels) {
      root["annotations"].push_back({{"image_id", set.image_id},
                                     {"strategy_tag", set.strategy_tag},
                                     {"category_id", pl.class_id},
                                     {"bbox", bbox_json(pl.box)},
                                     {"score", pl.score}});
    }
  }
  write_text_file(path, root.dump() + "\n");
}

namespace {

json counts_json(const ClassCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
}

json stat_json(const MetricStat& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}};
}

}  // namespace

std::string quality_report_json(const QualityReport& report) {
  json j = {{"metric", "pseudo_label_quality_proxy"},
            {"iou_thr", report.iou_thr},
            {"tp", report.tp},
            {"fp", report.fp},
            {"fn", report.fn},
            {"precision", report.precision},
            {"recall", report.recall},
            {"f1", report.f1},
            {"mean_matched_iou", report.mean_matched_iou},
            {"matched_score_mean", report.matched_score_mean}};
  j["per_class"] = json::array();
  for (const ClassCounts& c : report.per_class) {
    j["per_class"].push_back(counts_json(c));
  }
  return j.dump() + "\n";
}

std::string quality_report_csv(const QualityReport& report) {
  std::ostringstream out;
  out << "iou_thr,tp,fp,fn,precision,recall,f1,mean_matched_iou,"
         "matched_score_mean,metric\n";
  out << format_double(report.iou_thr) << ',' << report.tp << ',' << report.fp
      << ',' << report.fn << ',' << format_double(report.precision) << ','
      << format_double(report.recall) << ',' << format_double(report.f1) << ','
      << format_double(report.mean_matched_iou) << ','
      << format_double(report.matched_score_mean)
      << ",pseudo_label_quality_proxy\n";
  return out.str();
}

std::string comparison_json(const std::vector<StrategySummary>& rows) {
  json j = json::array();
  for (const StrategySummary& row : rows) {
    j.push_back({{"name", row.name},
                 {"trials", row.trials},
                 {"precision", stat_json(row.precision)},
                 {"recall", stat_json(row.recall)},
                 {"f1", stat_json(row.f1)},
                 {"mean_matched_iou", stat_json(row.mean_matched_iou)},
                 {"matched_score_mean", stat_json(row.matched_score_mean)}});
  }
  return j.dump() + "\n";
}

std::string comparison_csv(const std::vector<StrategySummary>& rows) {
  std::ostringstream out;
  out << "strategy,trials,precision_mean,precision_stddev,recall_mean,"
         "recall_stddev,f1_mean,f1_stddev,mean_matched_iou_mean,"
         "mean_matched_iou_stddev,matched_score_mean_mean,"
         "matched_score_mean_stddev\n";
  for (const StrategySummary& row : rows) {
    out << row.name << ',' << row.trials;
    for (const MetricStat* s :
         {&row.precision, &row.recall, &row.f1, &row.mean_matched_iou,
          &row.matched_score_mean}) {
      out << ',' << format_double(s->mean) << ',' << format_double(s->stddev);
    }
    out << '\n';
  }
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("could not open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("could not read '" + path + "'");
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("could not open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out.good()) throw IoError("could not write '" + path + "'");
}

}  // namespace plkit::io
