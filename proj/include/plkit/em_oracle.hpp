#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <vector>

#include "plkit/geometry.hpp"
#include "plkit/rng.hpp"

namespace plkit::em {

// Exact enumeration is limited to ~10^6 label assignments.
inline constexpr std::size_t kMaxExactProposals = 20;
// posterior_sample gives up after this many rejected all-background draws.
inline constexpr std::size_t kRejectionBudget = 10000;

// Per-proposal foreground probabilities under one model, plus optional
// per-proposal predicted boxes.
struct ProposalPosterior {
  std::vector<double> fg_prob;
  std::optional<std::vector<Box>> coord;

  std::size_t size() const { return fg_prob.size(); }
};

// A joint foreground/background labeling of N proposals. Bit j of fg_mask
// is proposal j.
struct Assignment {
  std::uint64_t fg_mask = 0;
  std::size_t size = 0;

  bool is_foreground(std::size_t j) const { return (fg_mask >> j) & 1u; }

  bool operator==(const Assignment&) const = default;
};

// The assignments with at least one foreground proposal, in ascending
// bit-pattern order: masks 1 .. 2^N - 1. Usable as a range.
class AssignmentRange {
 public:
  explicit AssignmentRange(std::size_t n);  // throws ValidationError off-cap

  class iterator {
   public:
    using value_type = Assignment;
    using difference_type = std::ptrdiff_t;
    using iterator_category = std::forward_iterator_tag;

    iterator() = default;
    iterator(std::uint64_t mask, std::size_t n) : mask_(mask), n_(n) {}

    Assignment operator*() const { return Assignment{mask_, n_}; }
    iterator& operator++() { ++mask_; return *this; }
    iterator operator++(int) { iterator t = *this; ++mask_; return t; }
    bool operator==(const iterator&) const = default;

   private:
    std::uint64_t mask_ = 0;
    std::size_t n_ = 0;
  };

  iterator begin() const { return iterator(1, n_); }
  iterator end() const { return iterator(end_mask_, n_); }
  std::uint64_t count() const { return end_mask_ - 1; }

 private:
  std::size_t n_;
  std::uint64_t end_mask_;  // 2^n
};

inline AssignmentRange enumerate_assignments(std::size_t n) {
  return AssignmentRange(n);
}

struct LossWeights {
  double lambda1 = 1.0;   // classification term
  double lambda2 = 1.0;   // box term
  double lambda_u = 2.0;  // weakly-annotated term in the joint objective
};

// P(t | I) under m: product over proposals of p_j (foreground bit) or 1-p_j,
// with probabilities clamped away from {0,1}.
double assignment_prob(const Assignment& t, const ProposalPosterior& m);

// P(image label positive) = sum of assignment_prob over every assignment
// with at least one foreground bit. Computed by enumeration; agrees with
// closed_form_weak_prob to ~1e-12 (independence identity).
double exact_weak_prob(const ProposalPosterior& m);
double closed_form_weak_prob(const ProposalPosterior& m);  // 1 - prod(1-p_j)

// Negated supervised loss for one proposal: -(lambda1 * binary cross-entropy
// + lambda2 * sum of absolute corner differences). The box term is 0 for
// background, which carries no box. Throws ValidationError when gt_class=1
// without a box or gt_class is not 0/1.
double supervised_loglik(double pred_prob, const Box& pred_box, int gt_class,
                         const std::optional<Box>& gt_box,
                         const LossWeights& w = {});

// log P(t | I) under m: sum of log p_j / log(1-p_j) per t's bits, plus, when
// both coords_gt and m.coord are present, -lambda2 * L1(coords_gt[j],
// m.coord[j]) for each foreground j.
double assignment_loglik(const Assignment& t, const ProposalPosterior& m,
                         const std::optional<std::vector<Box>>& coords_gt =
                             std::nullopt,
                         const LossWeights& w = {});

// Posterior over foreground-containing assignments under prior_m:
// assignment_prob / exact marginal. Throws DegeneratePosteriorError when the
// marginal has no mass.
double posterior_prob(const Assignment& t, const ProposalPosterior& prior_m);

// Exact expected model log-likelihood under the prior's conditional
// posterior: sum over all foreground-containing t of
// posterior_prob(t) * assignment_loglik(t, model_m).
double exact_Q(const ProposalPosterior& prior_m,
               const ProposalPosterior& model_m, const LossWeights& w = {});

// One draw from the conditional posterior: independent Bernoulli bits,
// rejecting all-background outcomes. Throws DegeneratePosteriorError once
// kRejectionBudget consecutive draws come up empty.
Assignment posterior_sample(const ProposalPosterior& prior_m,
                            rng::Source& rng);

// Monte-Carlo estimate of exact_Q from sample_count posterior draws.
double mc_Q(const ProposalPosterior& prior_m, const ProposalPosterior& model_m,
            std::size_t sample_count, rng::Source& rng,
            const LossWeights& w = {});

struct MaxQResult {
  double value = 0.0;  // posterior_prob(argmax) * assignment_loglik(argmax)
  Assignment argmax;
};

// Single-term approximation of exact_Q. Scans every foreground-containing
// assignment; by default maximizes posterior * loglik, with posterior_only
// it instead picks the posterior mode (value still reported as the product).
// Ties broken by ascending bit pattern.
MaxQResult max_Q(const ProposalPosterior& prior_m,
                 const ProposalPosterior& model_m, bool posterior_only = false,
                 const LossWeights& w = {});

struct ThresholdAssignment {
  Assignment assignment;
  bool in_B = false;  // false when no probability reached the threshold
};

// Deterministic assignment: foreground iff prior probability >= p_t.
// Throws ValidationError unless 0 < p_t < 1.
ThresholdAssignment threshold_assignment(const ProposalPosterior& prior_m,
                                         double p_t = 0.9);

// Joint objective over the two splits: sum of supervised terms plus
// lambda_u times the sum of weak-image Q terms.
double joint_objective(const std::vector<double>& sup_terms,
                       const std::vector<double>& weak_q_terms,
                       const LossWeights& w = {});

}  // namespace plkit::em
