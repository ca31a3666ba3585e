#include "plkit/wsl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plkit/errors.hpp"
#include "plkit/prob.hpp"

namespace plkit {
namespace {

void check_finite(const std::vector<double>& v, const char* what) {
  for (const double x : v) {
    if (!std::isfinite(x)) {
      throw ValidationError({std::string("non-finite ") + what});
    }
  }
}

// Numerically safe softmax over values picked out by indices; the result is
// aligned with indices.
std::vector<double> softmax_at(const std::vector<double>& logits,
                               const std::vector<std::size_t>& indices) {
  double max_logit = logits[indices.front()];
  for (const std::size_t i : indices) max_logit = std::max(max_logit, logits[i]);
  std::vector<double> w(indices.size());
  double denom = 0.0;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    w[j] = std::exp(logits[indices[j]] - max_logit);
    denom += w[j];
  }
  for (double& x : w) x /= denom;
  return w;
}

std::vector<double> softmax_row(const double* row, std::size_t c) {
  double max_logit = row[0];
  for (std::size_t k = 1; k < c; ++k) max_logit = std::max(max_logit, row[k]);
  std::vector<double> q(c);
  double denom = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    q[k] = std::exp(row[k] - max_logit);
    denom += q[k];
  }
  for (double& x : q) x /= denom;
  return q;
}

}  // namespace

double wsl_image_prob(const std::vector<double>& class_logits_single) {
  if (class_logits_single.empty()) {
    throw ValidationError({"empty proposal logit vector"});
  }
  check_finite(class_logits_single, "proposal logit");
  std::vector<std::size_t> all(class_logits_single.size());
  std::iota(all.begin(), all.end(), 0);
  const auto w = softmax_at(class_logits_single, all);
  double p = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t j = 0; j < class_logits_single.size(); ++j) {
    const double s = sigmoid(class_logits_single[j]);
    p += w[j] * s;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  // The value is a convex combination of the sigmoids; pin the bound against
  // rounding, then keep the result inside (0,1) at saturated logits.
  p = std::clamp(p, lo, hi);
  return clamp_prob(p);
}

std::vector<double> wsl_image_prob_rpn(const ProposalScores& scores,
                                       const WslConfig& cfg,
                                       rng::Source& rng) {
  const std::size_t n = scores.objectness.size();
  std::vector<std::string> v;
  if (n == 0) v.push_back("no proposals");
  if (scores.class_logits.rows != n) {
    v.push_back("class logit rows " + std::to_string(scores.class_logits.rows) +
                " do not match " + std::to_string(n) + " objectness entries");
  }
  if (scores.class_logits.cols == 0) v.push_back("no classes");
  if (cfg.k_subsample == 0) v.push_back("subsample size 0");
  if (!v.empty()) throw ValidationError(std::move(v));
  check_finite(scores.objectness, "objectness logit");
  check_finite(scores.class_logits.data, "class logit");

  std::vector<std::size_t> chosen(n);
  std::iota(chosen.begin(), chosen.end(), 0);
  if (cfg.k_subsample < n) {
    // Partial Fisher-Yates, then ascending order so the accumulation below
    // depends only on the chosen set.
    for (std::size_t i = 0; i < cfg.k_subsample; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
      std::swap(chosen[i], chosen[j]);
    }
    chosen.resize(cfg.k_subsample);
    std::sort(chosen.begin(), chosen.end());
  }

  const auto w = softmax_at(scores.objectness, chosen);
  const std::size_t c = scores.class_logits.cols;
  std::vector<double> p(c, 0.0);
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    const auto q = softmax_row(scores.class_logits.row(chosen[j]), c);
    for (std::size_t k = 0; k < c; ++k) p[k] += w[j] * q[k];
  }
  return p;
}

double wsl_loss(const std::vector<double>& image_probs,
                const WeakLabels& labels) {
  if (image_probs.size() != labels.size()) {
    throw ValidationError({"probability vector length " +
                           std::to_string(image_probs.size()) +
                           " does not match " + std::to_string(labels.size()) +
                           " labels"});
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < image_probs.size(); ++k) {
    const double p = clamp_prob(image_probs[k]);
    loss -= labels.is_set(k) ? std::log(p) : std::log(1.0 - p);
  }
  return loss / static_cast<double>(image_probs.size());
}

namespace {

void check_attention_dims(const std::vector<double>& feature,
                          const WeakLabels& labels,
                          const AttentionParams& params) {
  std::vector<std::string> v;
  const std::size_t d = feature.size();
  if (params.weight.rows != d) {
    v.push_back("weight rows " + std::to_string(params.weight.rows) +
                " do not match feature length " + std::to_string(d));
  }
  if (params.bias.size() != d) {
    v.push_back("bias length " + std::to_string(params.bias.size()) +
                " does not match feature length " + std::to_string(d));
  }
  if (params.weight.cols != labels.size()) {
    v.push_back("weight cols " + std::to_string(params.weight.cols) +
                " do not match " + std::to_string(labels.size()) + " labels");
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

std::vector<double> attention_map(const std::vector<double>& feature,
                                  const WeakLabels& labels,
                                  const AttentionParams& params) {
  std::vector<double> a(feature.size());
  for (std::size_t d = 0; d < feature.size(); ++d) {
    double z = params.bias[d];
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (labels.is_set(k)) z += params.weight(d, k);
    }
    a[d] = sigmoid(z);
  }
  return a;
}

}  // namespace

std::vector<double> label_attention_forward(const std::vector<double>& feature,
                                            const WeakLabels& labels,
                                            const AttentionParams& params) {
  check_attention_dims(feature, labels, params);
  auto a = attention_map(feature, labels, params);
  for (std::size_t d = 0; d < feature.size(); ++d) a[d] *= feature[d];
  return a;
}

AttentionGrads label_attention_backward(
    const std::vector<double>& feature, const WeakLabels& labels,
    const AttentionParams& params, const std::vector<double>& upstream_grad) {
  check_attention_dims(feature, labels, params);
  if (upstream_grad.size() != feature.size()) {
    throw ValidationError({"upstream gradient length " +
                           std::to_string(upstream_grad.size()) +
                           " does not match feature length " +
                           std::to_string(feature.size())});
  }
  const auto a = attention_map(feature, labels, params);
  AttentionGrads g;
  g.feature.resize(feature.size());
  g.bias.resize(feature.size());
  g.weight = Matrix(params.weight.rows, params.weight.cols);
  for (std::size_t d = 0; d < feature.size(); ++d) {
    g.feature[d] = upstream_grad[d] * a[d];
    g.bias[d] = upstream_grad[d] * feature[d] * a[d] * (1.0 - a[d]);
    for (std::size_t k = 0; k < labels.size(); ++k) {
      g.weight(d, k) = labels.is_set(k) ? g.bias[d] : 0.0;
    }
  }
  return g;
}

}  // namespace plkit
