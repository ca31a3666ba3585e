#pragma once

#include <map>
#include <string>
#include <vector>

#include "plkit/model.hpp"
#include "plkit/pseudolabel.hpp"
#include "plkit/synth_eval.hpp"

namespace plkit::io {

// Annotation files are a COCO subset:
//   images:      [{id, width, height, file_name?}]
//   annotations: [{image_id, category_id, bbox: [x, y, w, h]}]
//   categories:  [{id, name}]
//   weak_labels: [{image_id, category_ids: [...]}]   (extension block)
// Category ids map to class indices by ascending id. Numeric image ids
// normalize to their decimal strings. Images named in weak_labels become
// weakly-annotated records; all others are fully annotated, with image
// flags derived from their annotations. Parse failures throw FormatError
// with the byte offset; content problems throw ValidationError listing
// every offending record.
Dataset load_annotations(const std::string& path);

// Inverse of load_annotations over consistent datasets (category ids are
// written as class indices). Background instances have no COCO shape and
// throw ValidationError.
void write_annotations(const std::string& path, const Dataset& dataset);

// Detection files: [{image_id, bbox: [x, y, w, h], scores: [...],
// objectness?}]. Every scores vector must have length category_count.
std::map<std::string, std::vector<Detection>> load_detections(
    const std::string& path, std::size_t category_count);

void write_detections(
    const std::string& path,
    const std::map<std::string, std::vector<Detection>>& detections);

// Pseudo-label files are annotation-shaped with two extra fields:
//   images:      [{id, strategy_tag}]                 (one per set, in order)
//   annotations: [{image_id, strategy_tag, category_id, bbox, score}]
// Sets are keyed by (image id, strategy tag), so empty sets survive the
// round trip.
std::vector<PseudoLabelSet> load_pseudo_labels(const std::string& path);
void write_pseudo_labels(const std::string& path,
                         const std::vector<PseudoLabelSet>& sets);

// Report and table rendering. All numbers use shortest round-trip
// formatting and objects use sorted keys, so equal values give equal bytes.
std::string quality_report_json(const QualityReport& report);
std::string quality_report_csv(const QualityReport& report);
std::string comparison_json(const std::vector<StrategySummary>& rows);
std::string comparison_csv(const std::vector<StrategySummary>& rows);

// Plain text file transport; both throw IoError on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace plkit::io
