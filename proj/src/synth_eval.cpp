#include "plkit/synth_eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "plkit/errors.hpp"
#include "plkit/format.hpp"
#include "plkit/parallel.hpp"
#include "plkit/prob.hpp"

namespace plkit {
namespace {

// Stream tags separating the detector draws from the strategy draws.
constexpr std::uint64_t kDetectorStream = 0xD37EC704ull;
constexpr std::uint64_t kStrategyStream = 0x57247E61ull;

void check_scene_config(const SceneConfig& cfg) {
  std::vector<std::string> v;
  if (cfg.width < 1 || cfg.height < 1) {
    v.push_back("canvas " + std::to_string(cfg.width) + "x" +
                std::to_string(cfg.height) + " is empty");
  }
  if (cfg.instance_count.lo < 0 ||
      cfg.instance_count.hi < cfg.instance_count.lo) {
    v.push_back("instance count range [" +
                std::to_string(cfg.instance_count.lo) + "," +
                std::to_string(cfg.instance_count.hi) + "] is invalid");
  }
  if (cfg.class_count < 1) v.push_back("class count must be positive");
  if (cfg.box_size.lo < 1 || cfg.box_size.hi < cfg.box_size.lo) {
    v.push_back("box size range [" + std::to_string(cfg.box_size.lo) + "," +
                std::to_string(cfg.box_size.hi) + "] is invalid");
  }
  if (cfg.box_size.hi > cfg.width || cfg.box_size.hi > cfg.height) {
    v.push_back("box size " + std::to_string(cfg.box_size.hi) +
                " exceeds the canvas");
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

void check_noise(const DetectorNoise& noise) {
  std::vector<std::string> v;
  if (!(noise.localization_sigma >= 0.0) ||
      !std::isfinite(noise.localization_sigma)) {
    v.push_back("localization sigma must be finite and >= 0");
  }
  if (!(noise.miss_rate >= 0.0 && noise.miss_rate <= 1.0)) {
    v.push_back("miss rate " + format_double(noise.miss_rate) +
                " outside [0,1]");
  }
  if (!(noise.duplicate_rate >= 0.0 && noise.duplicate_rate <= 1.0)) {
    v.push_back("duplicate rate " + format_double(noise.duplicate_rate) +
                " outside [0,1]");
  }
  if (!(noise.false_positive_rate >= 0.0) ||
      !std::isfinite(noise.false_positive_rate)) {
    v.push_back("false positive rate must be finite and >= 0");
  }
  if (!std::isfinite(noise.score_slope) || !std::isfinite(noise.score_offset)) {
    v.push_back("score calibration must be finite");
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

}  // namespace

ImageRecord generate_scene(const SceneConfig& cfg, const std::string& image_id,
                           rng::Source& rng) {
  check_scene_config(cfg);
  ImageRecord record;
  record.image_id = image_id;
  record.width = cfg.width;
  record.height = cfg.height;
  record.weak_labels = WeakLabels(cfg.class_count);

  const std::uint64_t count_span =
      static_cast<std::uint64_t>(cfg.instance_count.hi -
                                 cfg.instance_count.lo) + 1;
  const std::size_t count =
      static_cast<std::size_t>(cfg.instance_count.lo) +
      static_cast<std::size_t>(rng.bounded(count_span));
  const std::uint64_t size_span =
      static_cast<std::uint64_t>(cfg.box_size.hi - cfg.box_size.lo) + 1;

  std::vector<Instance> placed;
  placed.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    bool ok = false;
    for (std::size_t attempt = 0; attempt < kPlacementRetryBudget; ++attempt) {
      const std::size_t cls =
          static_cast<std::size_t>(rng.bounded(cfg.class_count));
      const int w = cfg.box_size.lo + static_cast<int>(rng.bounded(size_span));
      const int h = cfg.box_size.lo + static_cast<int>(rng.bounded(size_span));
      const int x = static_cast<int>(
          rng.bounded(static_cast<std::uint64_t>(cfg.width - w) + 1));
      const int y = static_cast<int>(
          rng.bounded(static_cast<std::uint64_t>(cfg.height - h) + 1));
      const Box b(x, y, x + w, y + h);
      if (!cfg.overlap_allowed) {
        bool crowded = false;
        for (const Instance& other : placed) {
          if (iou(b, *other.box) >= 0.3) {
            crowded = true;
            break;
          }
        }
        if (crowded) continue;
      }
      placed.push_back(Instance::foreground(static_cast<int>(cls), b));
      record.weak_labels.set(cls);
      ok = true;
      break;
    }
    if (!ok) {
      throw GenerationError("could not place instance " + std::to_string(i) +
                            " of " + std::to_string(count) + " within " +
                            std::to_string(kPlacementRetryBudget) +
                            " attempts");
    }
  }
  record.full_annotations = std::move(placed);
  return record;
}

namespace {

Detection jittered_detection(const Instance& inst, const ImageRecord& record,
                             const DetectorNoise& noise, std::size_t c,
                             rng::Source& sub) {
  const Box& gt = *inst.box;
  const double jx1 = gt.x1 + sub.normal(0.0, noise.localization_sigma);
  const double jy1 = gt.y1 + sub.normal(0.0, noise.localization_sigma);
  const double jx2 = gt.x2 + sub.normal(0.0, noise.localization_sigma);
  const double jy2 = gt.y2 + sub.normal(0.0, noise.localization_sigma);
  const double w = static_cast<double>(record.width);
  const double h = static_cast<double>(record.height);
  const Box box(std::clamp(std::min(jx1, jx2), 0.0, w),
                std::clamp(std::min(jy1, jy2), 0.0, h),
                std::clamp(std::max(jx1, jx2), 0.0, w),
                std::clamp(std::max(jy1, jy2), 0.0, h));
  const double quality = clamp_prob(iou(box, gt));
  const double score =
      sigmoid(noise.score_slope * logit(quality) + noise.score_offset);
  Detection d{box, std::vector<double>(c, 0.0), std::nullopt};
  d.class_scores[static_cast<std::size_t>(inst.class_id)] = score;
  return d;
}

}  // namespace

std::vector<Detection> simulate_detector(const ImageRecord& record,
                                         const DetectorNoise& noise,
                                         rng::Source& rng) {
  check_noise(noise);
  if (!record.full_annotations) {
    throw ValidationError({"image '" + record.image_id +
                           "' has no annotations to simulate from"});
  }
  const std::size_t c = record.weak_labels.size();
  for (const Instance& inst : *record.full_annotations) {
    if (inst.is_foreground() &&
        (inst.class_id < 0 || static_cast<std::size_t>(inst.class_id) >= c)) {
      throw ValidationError({"image '" + record.image_id +
                             "' has an instance with class id " +
                             std::to_string(inst.class_id) + " outside [0," +
                             std::to_string(c) + ")"});
    }
  }

  const std::uint64_t base = rng.next_u64();
  std::vector<Detection> dets;
  for (std::size_t i = 0; i < record.full_annotations->size(); ++i) {
    const Instance& inst = (*record.full_annotations)[i];
    if (!inst.is_foreground()) continue;
    rng::Mt64 sub(rng::derive_seed(base, {0, i}));
    if (sub.uniform() <= noise.miss_rate) continue;
    dets.push_back(jittered_detection(inst, record, noise, c, sub));
    if (sub.uniform() <= noise.duplicate_rate) {
      dets.push_back(jittered_detection(inst, record, noise, c, sub));
    }
  }

  if (c > 0) {
    rng::Mt64 fp(rng::derive_seed(base, {1}));
    const int spurious = fp.poisson(noise.false_positive_rate);
    const double w = static_cast<double>(record.width);
    const double h = static_cast<double>(record.height);
    for (int f = 0; f < spurious; ++f) {
      const double xa = w * fp.uniform();
      const double xb = w * fp.uniform();
      const double ya = h * fp.uniform();
      const double yb = h * fp.uniform();
      const Box box(std::min(xa, xb), std::min(ya, yb), std::max(xa, xb),
                    std::max(ya, yb));
      const std::size_t cls = static_cast<std::size_t>(fp.bounded(c));
      const double score = 0.5 * fp.uniform();
      Detection d{box, std::vector<double>(c, 0.0), std::nullopt};
      d.class_scores[cls] = score;
      dets.push_back(std::move(d));
    }
  }
  return dets;
}

QualityReport match_and_score(const PseudoLabelSet& pseudo,
                              const ImageRecord& record, double iou_thr) {
  if (!record.full_annotations) {
    throw ValidationError({"image '" + record.image_id +
                           "' has no annotations to match against"});
  }
  if (!(iou_thr > 0.0 && iou_thr <= 1.0)) {
    throw ValidationError({"iou threshold " + format_double(iou_thr) +
                           " outside (0,1]"});
  }
  const std::size_t c = record.weak_labels.size();
  for (const PseudoLabel& pl : pseudo.labels) {
    if (pl.class_id < 0 || static_cast<std::size_t>(pl.class_id) >= c) {
      throw ValidationError({"pseudo label class id " +
                             std::to_string(pl.class_id) + " outside [0," +
                             std::to_string(c) + ")"});
    }
  }

  QualityReport report;
  report.iou_thr = iou_thr;
  report.per_class.resize(c);
  double sum_iou = 0.0;
  double sum_score = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<const Box*> gt;
    for (const Instance& inst : *record.full_annotations) {
      if (inst.is_foreground() &&
          static_cast<std::size_t>(inst.class_id) == k) {
        gt.push_back(&*inst.box);
      }
    }
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < pseudo.labels.size(); ++i) {
      if (static_cast<std::size_t>(pseudo.labels[i].class_id) == k) {
        order.push_back(i);
      }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return pseudo.labels[a].score > pseudo.labels[b].score;
                     });
    std::vector<char> matched(gt.size(), 0);
    for (const std::size_t i : order) {
      double best_iou = 0.0;
      std::size_t best = gt.size();
      for (std::size_t g = 0; g < gt.size(); ++g) {
        if (matched[g]) continue;
        const double v = iou(pseudo.labels[i].box, *gt[g]);
        if (v > best_iou) {
          best_iou = v;
          best = g;
        }
      }
      if (best != gt.size() && best_iou >= iou_thr) {
        matched[best] = 1;
        report.per_class[k].tp += 1;
        sum_iou += best_iou;
        sum_score += pseudo.labels[i].score;
      } else {
        report.per_class[k].fp += 1;
      }
    }
    report.per_class[k].fn = gt.size() - report.per_class[k].tp;
  }
  for (const ClassCounts& cc : report.per_class) {
    report.tp += cc.tp;
    report.fp += cc.fp;
    report.fn += cc.fn;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 1.0
                    : static_cast<double>(num) / static_cast<double>(den);
  };
  report.precision = ratio(report.tp, report.tp + report.fp);
  report.recall = ratio(report.tp, report.tp + report.fn);
  report.f1 = report.precision + report.recall > 0.0
                  ? 2.0 * report.precision * report.recall /
                        (report.precision + report.recall)
                  : 0.0;
  if (report.tp > 0) {
    report.mean_matched_iou = sum_iou / static_cast<double>(report.tp);
    report.matched_score_mean = sum_score / static_cast<double>(report.tp);
  }
  return report;
}

namespace {

struct TrialPartial {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double sum_iou = 0.0;
  double sum_score = 0.0;
};

MetricStat stat_over(const std::vector<double>& xs) {
  MetricStat s;
  for (const double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (const double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

std::vector<StrategySummary> compare_impl(
    const Dataset& dataset,
    const std::function<std::vector<Detection>(const ImageRecord&)>& detect,
    const std::vector<NamedStrategy>& strategies, std::size_t trials,
    double iou_thr, std::uint64_t seed) {
  if (trials == 0) throw ValidationError({"trial count must be positive"});
  std::vector<std::string> problems;
  for (const ImageRecord& r : dataset.records) {
    if (!r.full_annotations) {
      problems.push_back("image '" + r.image_id + "' has no annotations");
    }
    for (auto& p : validate_record(r, dataset.category_count())) {
      problems.push_back(std::move(p));
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));

  const std::size_t images = dataset.records.size();
  const std::size_t cells = strategies.size() * trials;
  // partials[image * cells + strategy * trials + trial]
  std::vector<TrialPartial> partials(images * cells);
  parallel_for(images, [&](std::size_t img) {
    const ImageRecord& record = dataset.records[img];
    const std::vector<Detection> dets = detect(record);
    for (std::size_t s = 0; s < strategies.size(); ++s) {
      for (std::size_t t = 0; t < trials; ++t) {
        rng::Mt64 strat_rng(rng::derive_seed(
            seed, {rng::fnv1a(record.image_id), t, s, kStrategyStream}));
        PseudoLabelSet set = run_strategy(strategies[s].spec, dets,
                                          record.weak_labels, strat_rng);
        const QualityReport rep = match_and_score(set, record, iou_thr);
        TrialPartial& p = partials[img * cells + s * trials + t];
        p.tp = rep.tp;
        p.fp = rep.fp;
        p.fn = rep.fn;
        p.sum_iou = rep.mean_matched_iou * static_cast<double>(rep.tp);
        p.sum_score = rep.matched_score_mean * static_cast<double>(rep.tp);
      }
    }
  });

  std::vector<StrategySummary> out;
  out.reserve(strategies.size());
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    std::vector<double> precision(trials), recall(trials), f1(trials),
        mean_iou(trials), mean_score(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      TrialPartial total;
      for (std::size_t img = 0; img < images; ++img) {
        const TrialPartial& p = partials[img * cells + s * trials + t];
        total.tp += p.tp;
        total.fp += p.fp;
        total.fn += p.fn;
        total.sum_iou += p.sum_iou;
        total.sum_score += p.sum_score;
      }
      const auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 1.0
                        : static_cast<double>(num) / static_cast<double>(den);
      };
      precision[t] = ratio(total.tp, total.tp + total.fp);
      recall[t] = ratio(total.tp, total.tp + total.fn);
      f1[t] = precision[t] + recall[t] > 0.0
                  ? 2.0 * precision[t] * recall[t] / (precision[t] + recall[t])
                  : 0.0;
      mean_iou[t] =
          total.tp > 0 ? total.sum_iou / static_cast<double>(total.tp) : 0.0;
      mean_score[t] =
          total.tp > 0 ? total.sum_score / static_cast<double>(total.tp) : 0.0;
    }
    StrategySummary row;
    row.name = strategies[s].name;
    row.trials = trials;
    row.precision = stat_over(precision);
    row.recall = stat_over(recall);
    row.f1 = stat_over(f1);
    row.mean_matched_iou = stat_over(mean_iou);
    row.matched_score_mean = stat_over(mean_score);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::vector<StrategySummary> compare_strategies(
    const Dataset& dataset, const DetectorNoise& noise,
    const std::vector<NamedStrategy>& strategies, std::size_t trials,
    double iou_thr, std::uint64_t seed) {
  check_noise(noise);
  return compare_impl(
      dataset,
      [&](const ImageRecord& record) {
        rng::Mt64 det_rng(rng::derive_seed(
            seed, {rng::fnv1a(record.image_id), kDetectorStream}));
        return simulate_detector(record, noise, det_rng);
      },
      strategies, trials, iou_thr, seed);
}

std::vector<StrategySummary> compare_strategies(
    const Dataset& dataset,
    const std::map<std::string, std::vector<Detection>>& detections,
    const std::vector<NamedStrategy>& strategies, std::size_t trials,
    double iou_thr, std::uint64_t seed) {
  return compare_impl(
      dataset,
      [&](const ImageRecord& record) {
        const auto it = detections.find(record.image_id);
        return it == detections.end() ? std::vector<Detection>{} : it->second;
      },
      strategies, trials, iou_thr, seed);
}

}  // namespace plkit
