#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <string>

#include "plkit/errors.hpp"
#include "plkit/io.hpp"

using namespace plkit;
namespace fs = std::filesystem;

namespace {

std::string scratch_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "plkit_io_tests";
  fs::create_directories(dir);
  return (dir / name).string();
}

Dataset sample_dataset() {
  Dataset ds;
  ds.categories = {"cat", "dog"};

  ImageRecord full;
  full.image_id = "full-1";
  full.width = 640;
  full.height = 480;
  full.full_annotations = {Instance::foreground(0, Box(10, 20, 40, 60)),
                           Instance::foreground(1, Box(100, 100, 200, 180))};
  full.weak_labels = WeakLabels({1, 1});
  ds.records.push_back(full);

  ImageRecord weak;
  weak.image_id = "weak-1";
  weak.width = 320;
  weak.height = 240;
  weak.weak_labels = WeakLabels({0, 1});
  ds.records.push_back(weak);

  ImageRecord blank;
  blank.image_id = "weak-empty";
  blank.width = 64;
  blank.height = 64;
  blank.weak_labels = WeakLabels(std::size_t{2});
  ds.records.push_back(blank);

  return ds;
}

}  // namespace

TEST_CASE("annotations survive a write/load round trip") {
  const Dataset ds = sample_dataset();
  const std::string path = scratch_path("roundtrip.json");
  io::write_annotations(path, ds);
  const Dataset back = io::load_annotations(path);
  CHECK(back == ds);

  // equal datasets serialize to identical bytes
  const std::string again = scratch_path("roundtrip2.json");
  io::write_annotations(again, back);
  CHECK(io::read_text_file(path) == io::read_text_file(again));
}

TEST_CASE("category ids order classes and image ids normalize") {
  const std::string path = scratch_path("handwritten.json");
  io::write_text_file(path, R"({
    "categories": [{"id": 3, "name": "dog"}, {"id": 1, "name": "cat"}],
    "images": [{"id": 7, "width": 100, "height": 80}],
    "annotations": [{"image_id": 7, "category_id": 3, "bbox": [10, 20, 30, 40]}]
  })");
  const Dataset ds = io::load_annotations(path);
  REQUIRE(ds.categories.size() == 2);
  CHECK(ds.categories[0] == "cat");
  CHECK(ds.categories[1] == "dog");
  REQUIRE(ds.records.size() == 1);
  const ImageRecord& r = ds.records[0];
  CHECK(r.image_id == "7");
  REQUIRE(r.is_fully_annotated());
  REQUIRE(r.full_annotations->size() == 1);
  const Instance& inst = (*r.full_annotations)[0];
  CHECK(inst.class_id == 1);
  CHECK(*inst.box == Box(10, 20, 40, 60));
  CHECK(r.weak_labels.flags == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("weak label blocks turn records weak") {
  const std::string path = scratch_path("weak.json");
  io::write_text_file(path, R"({
    "categories": [{"id": 1, "name": "cat"}],
    "images": [{"id": "a", "width": 10, "height": 10},
               {"id": "b", "width": 10, "height": 10}],
    "annotations": [{"image_id": "a", "category_id": 1, "bbox": [0, 0, 5, 5]}],
    "weak_labels": [{"image_id": "b", "category_ids": [1]}]
  })");
  const Dataset ds = io::load_annotations(path);
  REQUIRE(ds.records.size() == 2);
  CHECK(ds.records[0].is_fully_annotated());
  CHECK(!ds.records[1].is_fully_annotated());
  CHECK(ds.records[1].weak_labels.flags == std::vector<std::uint8_t>{1});
}

TEST_CASE("malformed json reports the parse failure") {
  const std::string path = scratch_path("broken.json");
  io::write_text_file(path, "{\"categories\": [");
  CHECK_THROWS_AS(io::load_annotations(path), FormatError);
  io::write_text_file(path, "[1, 2, 3]");
  CHECK_THROWS_AS(io::load_annotations(path), FormatError);
}

TEST_CASE("content problems are collected, not truncated") {
  const std::string path = scratch_path("invalid.json");
  io::write_text_file(path, R"({
    "categories": [{"id": 1, "name": "cat"}],
    "images": [{"id": "a", "width": 10, "height": 10},
               {"id": "a", "width": 10, "height": 10}],
    "annotations": [
      {"image_id": "ghost", "category_id": 1, "bbox": [0, 0, 5, 5]},
      {"image_id": "a", "category_id": 9, "bbox": [0, 0, 5, 5]},
      {"image_id": "a", "category_id": 1, "bbox": [0, 0, 5]}
    ]
  })");
  try {
    io::load_annotations(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() >= 4);  // dup image, ghost, bad class, bad bbox
  }
}

TEST_CASE("weak labels cannot coexist with annotations") {
  const std::string path = scratch_path("conflict.json");
  io::write_text_file(path, R"({
    "categories": [{"id": 1, "name": "cat"}],
    "images": [{"id": "a", "width": 10, "height": 10}],
    "annotations": [{"image_id": "a", "category_id": 1, "bbox": [0, 0, 5, 5]}],
    "weak_labels": [{"image_id": "a", "category_ids": [1]}]
  })");
  CHECK_THROWS_AS(io::load_annotations(path), ValidationError);
}

TEST_CASE("background instances have no file shape") {
  Dataset ds;
  ds.categories = {"cat"};
  ImageRecord r;
  r.image_id = "a";
  r.width = 10;
  r.height = 10;
  r.weak_labels = WeakLabels(std::size_t{1});
  r.full_annotations = {Instance::background()};
  ds.records.push_back(r);
  CHECK_THROWS_AS(io::write_annotations(scratch_path("bg.json"), ds),
                  ValidationError);
}

TEST_CASE("detections round trip with optional objectness") {
  std::map<std::string, std::vector<Detection>> dets;
  const Detection d1{Box(1, 2, 11, 22), {0.25, 0.5}, 0.75};
  const Detection d2{Box(0, 0, 5, 5), {1.0, 0.0}, std::nullopt};
  dets["img"] = {d1, d2};
  const std::string path = scratch_path("dets.json");
  io::write_detections(path, dets);
  const auto back = io::load_detections(path, 2);
  CHECK(back == dets);
  CHECK_THROWS_AS(io::load_detections(path, 3), ValidationError);

  io::write_text_file(path, R"({"not": "an array"})");
  CHECK_THROWS_AS(io::load_detections(path, 2), FormatError);
}

TEST_CASE("pseudo label sets keep their keys through files") {
  std::vector<PseudoLabelSet> sets(3);
  sets[0].image_id = "a";
  sets[0].strategy_tag = "rps";
  sets[0].labels = {{0, Box(0, 0, 4, 4), 0.5}, {1, Box(1, 1, 6, 6), 0.25}};
  sets[1].image_id = "a";
  sets[1].strategy_tag = "rps#2";
  sets[2].image_id = "b";
  sets[2].strategy_tag = "rps";  // empty set must survive
  const std::string path = scratch_path("pseudo.json");
  io::write_pseudo_labels(path, sets);
  const auto back = io::load_pseudo_labels(path);
  CHECK(back == sets);
}

TEST_CASE("pseudo label files reject duplicates and bad scores") {
  const std::string path = scratch_path("pseudo_bad.json");
  io::write_text_file(path, R"({
    "images": [{"id": "a", "strategy_tag": "rps"},
               {"id": "a", "strategy_tag": "rps"}],
    "annotations": []
  })");
  CHECK_THROWS_AS(io::load_pseudo_labels(path), ValidationError);
  io::write_text_file(path, R"({
    "images": [{"id": "a", "strategy_tag": "rps"}],
    "annotations": [{"image_id": "a", "strategy_tag": "rps",
                     "category_id": 0, "bbox": [0, 0, 2, 2], "score": 1.5}]
  })");
  CHECK_THROWS_AS(io::load_pseudo_labels(path), ValidationError);
}

TEST_CASE("quality reports render frozen csv and labeled json") {
  QualityReport rep;
  rep.iou_thr = 0.5;
  rep.tp = 3;
  rep.fp = 1;
  rep.fn = 2;
  rep.precision = 0.75;
  rep.recall = 0.6;
  rep.f1 = 2.0 * 0.75 * 0.6 / 1.35;
  rep.mean_matched_iou = 0.8;
  rep.matched_score_mean = 0.9;
  rep.per_class = {{2, 1, 0}, {1, 0, 2}};
  const std::string csv = io::quality_report_csv(rep);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header ==
        "iou_thr,tp,fp,fn,precision,recall,f1,mean_matched_iou,"
        "matched_score_mean,metric");
  CHECK(csv.find("pseudo_label_quality_proxy") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(io::quality_report_json(rep));
  CHECK(j.at("metric") == "pseudo_label_quality_proxy");
  CHECK(j.at("tp") == 3);
  CHECK(j.at("precision") == 0.75);
  CHECK(j.at("per_class").size() == 2);
  CHECK(j.at("per_class")[0].at("tp") == 2);

  // rendering is a pure function of the report
  CHECK(io::quality_report_json(rep) == io::quality_report_json(rep));
  CHECK(io::quality_report_csv(rep) == io::quality_report_csv(rep));
}

TEST_CASE("comparison tables render one row per strategy") {
  std::vector<StrategySummary> rows(2);
  rows[0].name = "rps";
  rows[0].trials = 8;
  rows[0].precision = {0.5, 0.125};
  rows[0].recall = {0.75, 0.0625};
  rows[1].name = "top1";
  rows[1].trials = 8;
  const std::string csv = io::comparison_csv(rows);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header ==
        "strategy,trials,precision_mean,precision_stddev,recall_mean,"
        "recall_stddev,f1_mean,f1_stddev,mean_matched_iou_mean,"
        "mean_matched_iou_stddev,matched_score_mean_mean,"
        "matched_score_mean_stddev");
  CHECK(csv.find("rps,8,0.5,0.125,0.75,0.0625") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(io::comparison_json(rows));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 2);
  CHECK(j[0].at("name") == "rps");
  CHECK(j[0].at("precision").at("mean") == 0.5);
  CHECK(j[1].at("name") == "top1");
}

TEST_CASE("text transport reports io failures") {
  CHECK_THROWS_AS(io::read_text_file(scratch_path("missing.txt")), IoError);
  CHECK_THROWS_AS(
      io::write_text_file("/nonexistent-dir-zz/out.txt", "x"), IoError);
  const std::string path = scratch_path("plain.txt");
  io::write_text_file(path, "two\nlines\n");
  CHECK(io::read_text_file(path) == "two\nlines\n");
}
