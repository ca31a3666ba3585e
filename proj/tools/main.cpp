#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plkit/em_oracle.hpp"
#include "plkit/errors.hpp"
#include "plkit/format.hpp"
#include "plkit/io.hpp"
#include "plkit/model.hpp"
#include "plkit/pseudolabel.hpp"
#include "plkit/rng.hpp"
#include "plkit/synth_eval.hpp"

namespace {

using namespace plkit;

// Stream tags keeping the per-command rng derivations disjoint.
constexpr std::uint64_t kGenerateStream = 0x6E5A7E01ull;
constexpr std::uint64_t kSceneStream = 0x5CE4E02ull;
constexpr std::uint64_t kDetectorStream = 0xDE7EC03ull;
constexpr std::uint64_t kSubsampleStream = 0x5AB5A04ull;
constexpr std::uint64_t kInstanceStream = 0x1257A05ull;
constexpr std::uint64_t kEstimatorStream = 0xE571A06ull;

struct NoiseFlags {
  double sigma = 2.0;
  double miss = 0.1;
  double fp = 1.0;
  double dup = 0.1;
  double slope = 1.0;
  double offset = 0.0;

  DetectorNoise to_noise() const {
    DetectorNoise n;
    n.localization_sigma = sigma;
    n.score_slope = slope;
    n.score_offset = offset;
    n.false_positive_rate = fp;
    n.miss_rate = miss;
    n.duplicate_rate = dup;
    return n;
  }
};

void add_noise_flags(CLI::App* cmd, NoiseFlags& nf) {
  cmd->add_option("--noise-sigma", nf.sigma, "Corner jitter stddev in pixels");
  cmd->add_option("--noise-miss", nf.miss, "Miss probability per instance");
  cmd->add_option("--noise-fp", nf.fp, "Poisson rate of false boxes per image");
  cmd->add_option("--noise-dup", nf.dup, "Duplicate probability per emitted box");
  cmd->add_option("--noise-slope", nf.slope, "Score calibration slope");
  cmd->add_option("--noise-offset", nf.offset, "Score calibration offset");
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

Dataset synthetic_dataset(std::size_t scenes, int classes,
                          std::uint64_t seed) {
  SceneConfig cfg;
  cfg.class_count = classes;
  Dataset ds;
  for (int k = 0; k < classes; ++k) {
    ds.categories.push_back("class-" + std::to_string(k));
  }
  for (std::size_t i = 0; i < scenes; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "scene-%06zu", i);
    rng::Mt64 scene_rng(rng::derive_seed(seed, {i, kSceneStream}));
    ds.records.push_back(generate_scene(cfg, id, scene_rng));
  }
  return ds;
}

struct GenerateArgs {
  std::string annotations, detections, out;
  std::string strategy = "rps";
  double tau = 0.9;
  double iou_thr = 0.5;
  std::size_t b_prime = 1;
  std::uint64_t seed = 0;
};

int run_generate(const GenerateArgs& a) {
  if (a.b_prime == 0) {
    throw ValidationError({"--b-prime must be positive"});
  }
  const Dataset ds = io::load_annotations(a.annotations);
  const auto dets = io::load_detections(a.detections, ds.category_count());
  StrategySpec spec;
  spec.kind = parse_strategy(a.strategy);
  spec.tau = a.tau;
  spec.iou_thr = a.iou_thr;
  const std::string tag_base = strategy_name(spec.kind);

  static const std::vector<Detection> kNoDetections;
  std::vector<PseudoLabelSet> sets;
  for (const ImageRecord& record : ds.records) {
    const auto it = dets.find(record.image_id);
    const std::vector<Detection>& image_dets =
        it == dets.end() ? kNoDetections : it->second;
    for (std::size_t pass = 0; pass < a.b_prime; ++pass) {
      rng::Mt64 rng(rng::derive_seed(
          a.seed, {rng::fnv1a(record.image_id), pass, kGenerateStream}));
      PseudoLabelSet set =
          run_strategy(spec, image_dets, record.weak_labels, rng);
      set.image_id = record.image_id;
      set.strategy_tag = a.b_prime == 1
                             ? tag_base
                             : tag_base + "#" + std::to_string(pass);
      sets.push_back(std::move(set));
    }
  }
  io::write_pseudo_labels(a.out, sets);
  return 0;
}

struct EvaluateArgs {
  std::string annotations, pseudo, out, csv;
  double iou_thr = 0.5;
};

int run_evaluate(const EvaluateArgs& a) {
  const Dataset ds = io::load_annotations(a.annotations);
  const auto sets = io::load_pseudo_labels(a.pseudo);
  std::map<std::string, const ImageRecord*> by_id;
  for (const ImageRecord& r : ds.records) by_id[r.image_id] = &r;

  QualityReport total;
  total.iou_thr = a.iou_thr;
  total.per_class.resize(ds.category_count());
  double sum_iou = 0.0;
  double sum_score = 0.0;
  for (const PseudoLabelSet& set : sets) {
    const auto it = by_id.find(set.image_id);
    if (it == by_id.end()) {
      throw ValidationError({"pseudo labels reference unknown image '" +
                             set.image_id + "'"});
    }
    const QualityReport rep = match_and_score(set, *it->second, a.iou_thr);
    total.tp += rep.tp;
    total.fp += rep.fp;
    total.fn += rep.fn;
    sum_iou += rep.mean_matched_iou * static_cast<double>(rep.tp);
    sum_score += rep.matched_score_mean * static_cast<double>(rep.tp);
    for (std::size_t k = 0; k < rep.per_class.size(); ++k) {
      total.per_class[k].tp += rep.per_class[k].tp;
      total.per_class[k].fp += rep.per_class[k].fp;
      total.per_class[k].fn += rep.per_class[k].fn;
    }
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 1.0
                    : static_cast<double>(num) / static_cast<double>(den);
  };
  total.precision = ratio(total.tp, total.tp + total.fp);
  total.recall = ratio(total.tp, total.tp + total.fn);
  total.f1 = total.precision + total.recall > 0.0
                 ? 2.0 * total.precision * total.recall /
                       (total.precision + total.recall)
                 : 0.0;
  if (total.tp > 0) {
    total.mean_matched_iou = sum_iou / static_cast<double>(total.tp);
    total.matched_score_mean = sum_score / static_cast<double>(total.tp);
  }

  const std::string json = io::quality_report_json(total);
  if (a.out.empty()) {
    std::cout << json;
  } else {
    io::write_text_file(a.out, json);
  }
  if (!a.csv.empty()) {
    io::write_text_file(a.csv, io::quality_report_csv(total));
  }
  return 0;
}

struct CompareArgs {
  std::string annotations, detections, out, json;
  std::size_t scenes = 20;
  int classes = 3;
  std::size_t trials = 20;
  double tau = 0.9;
  double iou_thr = 0.5;
  std::uint64_t seed = 0;
  NoiseFlags noise;
};

int run_compare(const CompareArgs& a) {
  std::vector<NamedStrategy> strategies;
  strategies.push_back(
      {"rps", StrategySpec{Strategy::rps, a.tau, a.iou_thr}});
  strategies.push_back({"threshold@" + format_double(a.tau),
                        StrategySpec{Strategy::threshold, a.tau, a.iou_thr}});
  strategies.push_back({"top1", StrategySpec{Strategy::top1, a.tau, a.iou_thr}});

  std::vector<StrategySummary> rows;
  if (a.annotations.empty() != a.detections.empty()) {
    throw ValidationError(
        {"--annotations and --detections must be given together"});
  }
  if (!a.annotations.empty()) {
    const Dataset ds = io::load_annotations(a.annotations);
    const auto dets = io::load_detections(a.detections, ds.category_count());
    rows = compare_strategies(ds, dets, strategies, a.trials, a.iou_thr,
                              a.seed);
  } else {
    const Dataset ds = synthetic_dataset(a.scenes, a.classes, a.seed);
    rows = compare_strategies(ds, a.noise.to_noise(), strategies, a.trials,
                              a.iou_thr, a.seed);
  }

  io::write_text_file(a.out, io::comparison_csv(rows));
  std::string json_path = a.json;
  if (json_path.empty()) {
    json_path = a.out;
    const std::string suffix = ".csv";
    if (json_path.size() >= suffix.size() &&
        json_path.compare(json_path.size() - suffix.size(), suffix.size(),
                          suffix) == 0) {
      json_path.resize(json_path.size() - suffix.size());
    }
    json_path += ".json";
  }
  io::write_text_file(json_path, io::comparison_json(rows));
  return 0;
}

struct EmStudyArgs {
  std::string out;
  std::size_t n = 8;
  std::size_t samples = 100000;
  std::size_t trials = 5;
  double lambda_u = 2.0;
  std::uint64_t seed = 0;
};

int run_em_study(const EmStudyArgs& a) {
  if (a.trials == 0) throw ValidationError({"--trials must be positive"});
  if (a.samples == 0) throw ValidationError({"--samples must be positive"});
  em::LossWeights weights;
  weights.lambda_u = a.lambda_u;

  std::vector<std::size_t> grid;
  for (const std::size_t s : {std::size_t{100}, std::size_t{1000},
                              std::size_t{10000}, std::size_t{100000}}) {
    if (s <= a.samples) grid.push_back(s);
  }
  if (grid.empty() || grid.back() < a.samples) grid.push_back(a.samples);

  std::vector<std::string> header = {"instance", "exact_q", "max_q",
                                     "max_mask", "threshold_q"};
  for (const std::size_t s : grid) {
    header.push_back("mc_" + std::to_string(s));
    header.push_back("rel_err_" + std::to_string(s));
  }
  std::string table = csv_join(header);

  std::vector<double> exact_values;
  for (std::size_t i = 0; i < a.trials; ++i) {
    rng::Mt64 inst_rng(rng::derive_seed(a.seed, {i, kInstanceStream}));
    em::ProposalPosterior prior, model;
    for (std::size_t j = 0; j < a.n; ++j) {
      prior.fg_prob.push_back(inst_rng.uniform());
    }
    for (std::size_t j = 0; j < a.n; ++j) {
      model.fg_prob.push_back(inst_rng.uniform());
    }

    const double exact = em::exact_Q(prior, model, weights);
    exact_values.push_back(exact);
    const em::MaxQResult max_q = em::max_Q(prior, model, false, weights);
    const em::ThresholdAssignment thr = em::threshold_assignment(prior, 0.9);

    std::vector<std::string> row = {std::to_string(i), format_double(exact),
                                    format_double(max_q.value),
                                    std::to_string(max_q.argmax.fg_mask)};
    if (thr.in_B) {
      const double tq =
          em::posterior_prob(thr.assignment, prior) *
          em::assignment_loglik(thr.assignment, model, std::nullopt, weights);
      row.push_back(format_double(tq));
    } else {
      row.push_back("");
    }
    for (const std::size_t s : grid) {
      rng::Mt64 mc_rng(rng::derive_seed(a.seed, {i, s, kEstimatorStream}));
      const double mc = em::mc_Q(prior, model, s, mc_rng, weights);
      row.push_back(format_double(mc));
      row.push_back(format_double(std::abs(mc - exact) / std::abs(exact)));
    }
    table += csv_join(row);
  }

  std::vector<std::string> footer = {
      "joint", format_double(em::joint_objective({}, exact_values, weights))};
  footer.resize(header.size());
  table += csv_join(footer);

  if (a.out.empty()) {
    std::cout << table;
  } else {
    io::write_text_file(a.out, table);
  }
  return 0;
}

struct SynthArgs {
  std::string out;
  std::size_t scenes = 20;
  int classes = 3;
  std::size_t k = 512;
  std::uint64_t seed = 0;
  NoiseFlags noise;
};

int run_synth(const SynthArgs& a) {
  if (a.k == 0) throw ValidationError({"--k must be positive"});
  const Dataset ds = synthetic_dataset(a.scenes, a.classes, a.seed);
  const DetectorNoise noise = a.noise.to_noise();

  std::map<std::string, std::vector<Detection>> dets;
  for (const ImageRecord& record : ds.records) {
    rng::Mt64 det_rng(rng::derive_seed(
        a.seed, {rng::fnv1a(record.image_id), kDetectorStream}));
    std::vector<Detection> image_dets =
        simulate_detector(record, noise, det_rng);
    if (image_dets.size() > a.k) {
      // Uniform subsample without replacement, original order kept.
      rng::Mt64 sub_rng(rng::derive_seed(
          a.seed, {rng::fnv1a(record.image_id), kSubsampleStream}));
      std::vector<std::size_t> idx(image_dets.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (std::size_t i = 0; i < a.k; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(sub_rng.bounded(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(a.k);
      std::sort(idx.begin(), idx.end());
      std::vector<Detection> kept;
      kept.reserve(a.k);
      for (const std::size_t i : idx) kept.push_back(std::move(image_dets[i]));
      image_dets = std::move(kept);
    }
    dets[record.image_id] = std::move(image_dets);
  }

  io::write_annotations(a.out + ".annotations.json", ds);
  io::write_detections(a.out + ".detections.json", dets);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Pseudo-label toolkit: strategy generation, evaluation, and estimator "
      "studies over detection data"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand(
      "generate", "Apply a pseudo-label strategy to detections");
  generate->add_option("--annotations", gen.annotations, "Annotation JSON")
      ->required();
  generate->add_option("--detections", gen.detections, "Detection JSON")
      ->required();
  generate->add_option("--out", gen.out, "Output pseudo-label JSON")
      ->required();
  generate->add_option("--strategy", gen.strategy, "rps, threshold, or top1");
  generate->add_option("--tau", gen.tau, "Threshold strategy cutoff");
  generate->add_option("--iou-thr", gen.iou_thr, "Suppression IoU threshold");
  generate->add_option("--b-prime", gen.b_prime, "Label sets per image");
  generate->add_option("--seed", gen.seed, "Global seed");

  EvaluateArgs eval;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score pseudo labels against full annotations");
  evaluate->add_option("--annotations", eval.annotations, "Annotation JSON")
      ->required();
  evaluate->add_option("--pseudo", eval.pseudo, "Pseudo-label JSON")
      ->required();
  evaluate->add_option("--out", eval.out, "Report JSON (stdout when absent)");
  evaluate->add_option("--csv", eval.csv, "Also write the report as CSV");
  evaluate->add_option("--iou-thr", eval.iou_thr, "Match IoU threshold");

  CompareArgs cmp;
  CLI::App* compare = app.add_subcommand(
      "compare", "Compare strategies on synthetic scenes or given files");
  compare->add_option("--out", cmp.out, "Comparison CSV")->required();
  compare->add_option("--json", cmp.json, "JSON mirror path");
  compare->add_option("--annotations", cmp.annotations,
                      "Annotation JSON (file mode)");
  compare->add_option("--detections", cmp.detections,
                      "Detection JSON (file mode)");
  compare->add_option("--scenes", cmp.scenes, "Synthetic scene count");
  compare->add_option("--classes", cmp.classes, "Synthetic class count");
  compare->add_option("--trials", cmp.trials, "Trials per strategy");
  compare->add_option("--tau", cmp.tau, "Threshold strategy cutoff");
  compare->add_option("--iou-thr", cmp.iou_thr, "Match IoU threshold");
  compare->add_option("--seed", cmp.seed, "Global seed");
  add_noise_flags(compare, cmp.noise);

  EmStudyArgs em_args;
  CLI::App* em_study = app.add_subcommand(
      "em-study", "Exact vs sampled objective table on random instances");
  em_study->add_option("--out", em_args.out, "Table CSV (stdout when absent)");
  em_study->add_option("--n", em_args.n, "Proposals per instance");
  em_study->add_option("--samples", em_args.samples, "Largest sample size");
  em_study->add_option("--trials", em_args.trials, "Random instances");
  em_study->add_option("--lambda-u", em_args.lambda_u,
                       "Weak-term weight in the joint footer");
  em_study->add_option("--seed", em_args.seed, "Global seed");

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Write a synthetic dataset and simulated detections");
  synth_cmd->add_option("--out", synth.out, "Output path base")->required();
  synth_cmd->add_option("--scenes", synth.scenes, "Scene count");
  synth_cmd->add_option("--classes", synth.classes, "Class count");
  synth_cmd->add_option("--k", synth.k, "Max detections kept per image");
  synth_cmd->add_option("--seed", synth.seed, "Global seed");
  add_noise_flags(synth_cmd, synth.noise);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (generate->parsed()) return run_generate(gen);
    if (evaluate->parsed()) return run_evaluate(eval);
    if (compare->parsed()) return run_compare(cmp);
    if (em_study->parsed()) return run_em_study(em_args);
    if (synth_cmd->parsed()) return run_synth(synth);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
