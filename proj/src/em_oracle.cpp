#include "plkit/em_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plkit/errors.hpp"
#include "plkit/format.hpp"
#include "plkit/kernels.hpp"
#include "plkit/prob.hpp"

namespace plkit::em {
namespace {

constexpr std::size_t kChunk = 4096;
// Masks live in a 64-bit word outside the exact-enumeration regime.
constexpr std::size_t kMaskBits = 64;

void check_count(std::size_t n, std::size_t cap) {
  if (n < 1 || n > cap) {
    throw ValidationError({"proposal count " + std::to_string(n) +
                           " outside [1," + std::to_string(cap) + "]"});
  }
}

void check_posterior(const ProposalPosterior& m, const char* who) {
  std::vector<std::string> v;
  for (const double p : m.fg_prob) {
    if (!(p >= 0.0 && p <= 1.0)) {
      v.push_back(std::string(who) + " probability " + format_double(p) +
                  " outside [0,1]");
      break;
    }
  }
  if (m.coord && m.coord->size() != m.fg_prob.size()) {
    v.push_back(std::string(who) + " has " + std::to_string(m.coord->size()) +
                " boxes for " + std::to_string(m.fg_prob.size()) +
                " proposals");
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

void check_weights(const LossWeights& w) {
  if (!(w.lambda1 >= 0.0) || !(w.lambda2 >= 0.0) || !(w.lambda_u >= 0.0)) {
    throw ValidationError({"negative or non-finite loss weight"});
  }
}

void check_assignment(const Assignment& t, std::size_t n) {
  if (t.size != n) {
    throw ValidationError({"assignment over " + std::to_string(t.size) +
                           " proposals, expected " + std::to_string(n)});
  }
  if (n < kMaskBits && (t.fg_mask >> n) != 0) {
    throw ValidationError({"assignment mask has bits beyond proposal " +
                           std::to_string(n - 1)});
  }
}

double l1_distance(const Box& a, const Box& b) {
  return std::fabs(a.x1 - b.x1) + std::fabs(a.y1 - b.y1) +
         std::fabs(a.x2 - b.x2) + std::fabs(a.y2 - b.y2);
}

struct Terms {
  std::vector<double> on;
  std::vector<double> off;
};

// Per-proposal factors of the assignment probability under m.
Terms prob_terms(const ProposalPosterior& m) {
  Terms t;
  t.on.resize(m.size());
  t.off.resize(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double p = clamp_prob(m.fg_prob[j]);
    t.on[j] = p;
    t.off[j] = 1.0 - p;
  }
  return t;
}

// Per-proposal addends of the assignment log-likelihood under m. The box
// penalty folds into the foreground addend so batched and per-assignment
// evaluation share one expression.
Terms loglik_terms(const ProposalPosterior& m,
                   const std::optional<std::vector<Box>>& coords_gt,
                   const LossWeights& w) {
  const bool with_boxes = coords_gt.has_value() && m.coord.has_value();
  if (coords_gt && coords_gt->size() != m.size()) {
    throw ValidationError({"reference box count " +
                           std::to_string(coords_gt->size()) +
                           " does not match " + std::to_string(m.size()) +
                           " proposals"});
  }
  Terms t;
  t.on.resize(m.size());
  t.off.resize(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double p = clamp_prob(m.fg_prob[j]);
    double on = std::log(p);
    if (with_boxes) {
      on -= w.lambda2 * l1_distance((*coords_gt)[j], (*m.coord)[j]);
    }
    t.on[j] = on;
    t.off[j] = std::log(1.0 - p);
  }
  return t;
}

double fold_product(std::uint64_t mask, const Terms& t) {
  double acc = 1.0;
  for (std::size_t j = 0; j < t.on.size(); ++j) {
    acc = acc * (((mask >> j) & 1u) ? t.on[j] : t.off[j]);
  }
  return acc;
}

double fold_sum(std::uint64_t mask, const Terms& t) {
  double acc = 0.0;
  for (std::size_t j = 0; j < t.on.size(); ++j) {
    acc = acc + (((mask >> j) & 1u) ? t.on[j] : t.off[j]);
  }
  return acc;
}

double marginal_or_throw(const ProposalPosterior& prior_m) {
  const double marginal = exact_weak_prob(prior_m);
  if (marginal < kProbEpsilon) {
    throw DegeneratePosteriorError(
        "prior puts no mass on foreground assignments (marginal " +
        format_double(marginal) + ")");
  }
  return marginal;
}

}  // namespace

AssignmentRange::AssignmentRange(std::size_t n) : n_(n) {
  check_count(n, kMaxExactProposals);
  end_mask_ = std::uint64_t{1} << n;
}

double assignment_prob(const Assignment& t, const ProposalPosterior& m) {
  check_posterior(m, "model");
  check_count(m.size(), kMaskBits);
  check_assignment(t, m.size());
  return fold_product(t.fg_mask, prob_terms(m));
}

double exact_weak_prob(const ProposalPosterior& m) {
  check_posterior(m, "model");
  check_count(m.size(), kMaxExactProposals);
  const std::size_t n = m.size();
  const Terms t = prob_terms(m);
  const std::uint64_t end = std::uint64_t{1} << n;
  std::vector<double> buf(std::min<std::uint64_t>(kChunk, end - 1));
  double total = 0.0;
  for (std::uint64_t base = 1; base < end; base += kChunk) {
    const std::size_t count =
        static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, end - base));
    kernels::ops().select_product_many(static_cast<std::uint32_t>(base), count,
                                       t.on.data(), t.off.data(),
                                       static_cast<int>(n), buf.data());
    for (std::size_t i = 0; i < count; ++i) total += buf[i];
  }
  return total;
}

double closed_form_weak_prob(const ProposalPosterior& m) {
  check_posterior(m, "model");
  check_count(m.size(), kMaskBits);
  double none = 1.0;
  for (const double p : m.fg_prob) none *= 1.0 - clamp_prob(p);
  return 1.0 - none;
}

double supervised_loglik(double pred_prob, const Box& pred_box, int gt_class,
                         const std::optional<Box>& gt_box,
                         const LossWeights& w) {
  check_weights(w);
  std::vector<std::string> v;
  if (!(pred_prob >= 0.0 && pred_prob <= 1.0)) {
    v.push_back("predicted probability " + format_double(pred_prob) +
                " outside [0,1]");
  }
  if (gt_class != 0 && gt_class != 1) {
    v.push_back("class " + std::to_string(gt_class) + " is not 0 or 1");
  }
  if (gt_class == 1 && !gt_box) {
    v.push_back("foreground target without a box");
  }
  if (!v.empty()) throw ValidationError(std::move(v));

  const double p = clamp_prob(pred_prob);
  const double ce = gt_class == 1 ? -std::log(p) : -std::log(1.0 - p);
  const double box = gt_class == 1 ? l1_distance(*gt_box, pred_box) : 0.0;
  return -(w.lambda1 * ce + w.lambda2 * box);
}

double assignment_loglik(const Assignment& t, const ProposalPosterior& m,
                         const std::optional<std::vector<Box>>& coords_gt,
                         const LossWeights& w) {
  check_weights(w);
  check_posterior(m, "model");
  check_count(m.size(), kMaskBits);
  check_assignment(t, m.size());
  return fold_sum(t.fg_mask, loglik_terms(m, coords_gt, w));
}

double posterior_prob(const Assignment& t, const ProposalPosterior& prior_m) {
  check_posterior(prior_m, "prior");
  check_count(prior_m.size(), kMaxExactProposals);
  check_assignment(t, prior_m.size());
  const double marginal = marginal_or_throw(prior_m);
  return fold_product(t.fg_mask, prob_terms(prior_m)) / marginal;
}

namespace {

void check_pair(const ProposalPosterior& prior_m,
                const ProposalPosterior& model_m) {
  check_posterior(prior_m, "prior");
  check_posterior(model_m, "model");
  if (prior_m.size() != model_m.size()) {
    throw ValidationError({"prior has " + std::to_string(prior_m.size()) +
                           " proposals, model has " +
                           std::to_string(model_m.size())});
  }
}

}  // namespace

double exact_Q(const ProposalPosterior& prior_m,
               const ProposalPosterior& model_m, const LossWeights& w) {
  check_weights(w);
  check_pair(prior_m, model_m);
  check_count(prior_m.size(), kMaxExactProposals);
  const std::size_t n = prior_m.size();
  const double marginal = marginal_or_throw(prior_m);
  const Terms prior_t = prob_terms(prior_m);
  const Terms model_t = loglik_terms(model_m, prior_m.coord, w);

  const std::uint64_t end = std::uint64_t{1} << n;
  std::vector<double> pbuf(std::min<std::uint64_t>(kChunk, end - 1));
  std::vector<double> lbuf(pbuf.size());
  double q = 0.0;
  for (std::uint64_t base = 1; base < end; base += kChunk) {
    const std::size_t count =
        static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, end - base));
    kernels::ops().select_product_many(static_cast<std::uint32_t>(base), count,
                                       prior_t.on.data(), prior_t.off.data(),
                                       static_cast<int>(n), pbuf.data());
    kernels::ops().select_sum_many(static_cast<std::uint32_t>(base), count,
                                   model_t.on.data(), model_t.off.data(),
                                   static_cast<int>(n), lbuf.data());
    for (std::size_t i = 0; i < count; ++i) {
      q += (pbuf[i] / marginal) * lbuf[i];
    }
  }
  return q;
}

Assignment posterior_sample(const ProposalPosterior& prior_m,
                            rng::Source& rng) {
  check_posterior(prior_m, "prior");
  check_count(prior_m.size(), kMaskBits);
  const std::size_t n = prior_m.size();
  // Raw probabilities so certain endpoints stay certain; the budget guards
  // the degenerate all-background prior.
  for (std::size_t attempt = 0; attempt < kRejectionBudget; ++attempt) {
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform() <= prior_m.fg_prob[j]) mask |= std::uint64_t{1} << j;
    }
    if (mask != 0) return Assignment{mask, n};
  }
  throw DegeneratePosteriorError(
      "no foreground assignment drawn within " +
      std::to_string(kRejectionBudget) + " attempts");
}

double mc_Q(const ProposalPosterior& prior_m, const ProposalPosterior& model_m,
            std::size_t sample_count, rng::Source& rng,
            const LossWeights& w) {
  check_weights(w);
  check_pair(prior_m, model_m);
  if (sample_count == 0) {
    throw ValidationError({"sample count must be positive"});
  }
  const Terms model_t = loglik_terms(model_m, prior_m.coord, w);
  double acc = 0.0;
  for (std::size_t s = 0; s < sample_count; ++s) {
    const Assignment t = posterior_sample(prior_m, rng);
    acc += fold_sum(t.fg_mask, model_t);
  }
  return acc / static_cast<double>(sample_count);
}

MaxQResult max_Q(const ProposalPosterior& prior_m,
                 const ProposalPosterior& model_m, bool posterior_only,
                 const LossWeights& w) {
  check_weights(w);
  check_pair(prior_m, model_m);
  check_count(prior_m.size(), kMaxExactProposals);
  const std::size_t n = prior_m.size();
  const double marginal = marginal_or_throw(prior_m);
  const Terms prior_t = prob_terms(prior_m);
  const Terms model_t = loglik_terms(model_m, prior_m.coord, w);

  const std::uint64_t end = std::uint64_t{1} << n;
  std::vector<double> pbuf(std::min<std::uint64_t>(kChunk, end - 1));
  std::vector<double> lbuf(pbuf.size());
  double best_key = -std::numeric_limits<double>::infinity();
  MaxQResult best;
  for (std::uint64_t base = 1; base < end; base += kChunk) {
    const std::size_t count =
        static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, end - base));
    kernels::ops().select_product_many(static_cast<std::uint32_t>(base), count,
                                       prior_t.on.data(), prior_t.off.data(),
                                       static_cast<int>(n), pbuf.data());
    kernels::ops().select_sum_many(static_cast<std::uint32_t>(base), count,
                                   model_t.on.data(), model_t.off.data(),
                                   static_cast<int>(n), lbuf.data());
    for (std::size_t i = 0; i < count; ++i) {
      const double value = (pbuf[i] / marginal) * lbuf[i];
      const double key = posterior_only ? pbuf[i] : value;
      if (key > best_key) {
        best_key = key;
        best.value = value;
        best.argmax = Assignment{base + i, n};
      }
    }
  }
  return best;
}

ThresholdAssignment threshold_assignment(const ProposalPosterior& prior_m,
                                         double p_t) {
  check_posterior(prior_m, "prior");
  check_count(prior_m.size(), kMaskBits);
  if (!(p_t > 0.0 && p_t < 1.0)) {
    throw ValidationError({"confidence threshold " + format_double(p_t) +
                           " outside (0,1)"});
  }
  ThresholdAssignment out;
  out.assignment.size = prior_m.size();
  for (std::size_t j = 0; j < prior_m.size(); ++j) {
    if (prior_m.fg_prob[j] >= p_t) {
      out.assignment.fg_mask |= std::uint64_t{1} << j;
    }
  }
  out.in_B = out.assignment.fg_mask != 0;
  return out;
}

double joint_objective(const std::vector<double>& sup_terms,
                       const std::vector<double>& weak_q_terms,
                       const LossWeights& w) {
  check_weights(w);
  double sup = 0.0;
  for (const double t : sup_terms) sup += t;
  double weak = 0.0;
  for (const double t : weak_q_terms) weak += t;
  return sup + w.lambda_u * weak;
}

}  // namespace plkit::em
