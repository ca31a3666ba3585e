#pragma once

#include <cstddef>
#include <vector>

#include "plkit/matrix.hpp"
#include "plkit/model.hpp"
#include "plkit/rng.hpp"

namespace plkit {

// Raw detector head outputs for one image: objectness logits (length N) and
// per-proposal class logits (N x C). Both pre-softmax.
struct ProposalScores {
  std::vector<double> objectness;
  Matrix class_logits;
};

struct WslConfig {
  std::size_t k_subsample = 512;  // proposals kept for the objectness softmax
};

// Softened-max image probability for one class from that class's proposal
// logits: sum_j softmax(l)_j * sigmoid(l_j). The result is a convex
// combination of the per-proposal sigmoids and is clamped into their
// [min, max] envelope to keep that bound exact under rounding. Throws
// ValidationError on empty or non-finite input.
double wsl_image_prob(const std::vector<double>& class_logits_single);

// Image-label distribution from both heads: uniformly subsamples
// min(k_subsample, N) proposals without replacement, softmaxes objectness
// over the sampled set into weights w, row-softmaxes each sampled row of
// class_logits into q, and returns p_k = sum_j w_j q_jk. Sums to 1 over
// classes. Subsampling is a no-op (and rng untouched) when k_subsample >= N;
// sampled indices are accumulated in ascending order so the value depends
// only on the chosen set.
std::vector<double> wsl_image_prob_rpn(const ProposalScores& scores,
                                       const WslConfig& cfg, rng::Source& rng);

// Multi-label binary cross-entropy between per-class image probabilities and
// 0/1 flags, averaged over classes. Probabilities are clamped away from
// {0,1} before the logs. Throws ValidationError on length mismatch.
double wsl_loss(const std::vector<double>& image_probs,
                const WeakLabels& labels);

// FC layer mapping the C-dim label vector to D attention channels.
struct AttentionParams {
  Matrix weight;             // D x C
  std::vector<double> bias;  // D
};

// Channel gating: sigmoid(weight * flags + bias) ⊙ feature.
// Throws ValidationError on dimension mismatch.
std::vector<double> label_attention_forward(const std::vector<double>& feature,
                                            const WeakLabels& labels,
                                            const AttentionParams& params);

struct AttentionGrads {
  std::vector<double> feature;  // length D
  Matrix weight;                // D x C
  std::vector<double> bias;     // length D
};

// Analytic gradients of label_attention_forward contracted with
// upstream_grad g: with a = sigmoid(weight*flags + bias),
//   d/dfeature = g ⊙ a
//   d/dbias    = g ⊙ feature ⊙ a ⊙ (1-a)
//   d/dweight[d][k] = (d/dbias)[d] * flags[k]
AttentionGrads label_attention_backward(const std::vector<double>& feature,
                                        const WeakLabels& labels,
                                        const AttentionParams& params,
                                        const std::vector<double>& upstream_grad);

}  // namespace plkit
