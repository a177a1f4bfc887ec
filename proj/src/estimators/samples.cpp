#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "common.hpp"

namespace impactfrac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

ExposureSample::ExposureSample(MatrixXd values, std::optional<VectorXd> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  if (values_.rows() < 2) fail(ErrorCode::DegenerateSample, "need at least two observations");
  if (values_.cols() < 1) fail(ErrorCode::DimensionMismatch, "sample has no exposure columns");
  if (!values_.allFinite()) fail(ErrorCode::InvalidArgument, "exposure values must be finite");
  if (weights_) {
    if (weights_->size() != values_.rows()) {
      fail(ErrorCode::DimensionMismatch, "weight vector length differs from the number of rows");
    }
    if (!weights_->allFinite() || !(weights_->array() > 0.0).all()) {
      fail(ErrorCode::InvalidArgument, "weights must be finite and strictly positive");
    }
  }
}

ExposureSample ExposureSample::scalar(std::span<const double> values) {
  MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  return ExposureSample(std::move(m));
}

double ExposureSample::total_weight() const {
  if (!weights_) return static_cast<double>(size());
  return numerics::exact_sum(std::span<const double>(weights_->data(), weights_->size()));
}

bool ExposureSample::non_uniform_weights() const {
  if (!weights_) return false;
  return weights_->maxCoeff() != weights_->minCoeff();
}

std::vector<double> ExposureSample::normalized_weights() const {
  const auto n = static_cast<std::size_t>(size());
  if (!weights_ || !non_uniform_weights()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  const double total = total_weight();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = (*weights_)[static_cast<Eigen::Index>(i)] / total;
  return w;
}

SummaryStats SummaryStats::from_sample(const ExposureSample& sample) {
  const auto w = sample.normalized_weights();
  const auto k = sample.dimension();
  const auto& x = sample.values();
  SummaryStats s;
  s.mean.resize(k);
  s.cov.resize(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    numerics::ExactSum acc;
    for (Eigen::Index i = 0; i < x.rows(); ++i) acc.add(w[static_cast<std::size_t>(i)] * x(i, j));
    s.mean[j] = acc.result();
  }
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      numerics::ExactSum acc;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        acc.add(w[static_cast<std::size_t>(i)] * (x(i, a) - s.mean[a]) * (x(i, b) - s.mean[b]));
      }
      s.cov(a, b) = s.cov(b, a) = acc.result();
    }
  }
  s.n = sample.total_weight();
  return s;
}

SummaryStats SummaryStats::scalar(double mean, double sd, double n) {
  SummaryStats s{VectorXd::Constant(1, mean), MatrixXd::Constant(1, 1, sd * sd), n};
  if (!(sd >= 0.0)) fail(ErrorCode::InvalidArgument, "sd must be >= 0");
  s.validate();
  return s;
}

void SummaryStats::validate() const {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    fail(ErrorCode::DimensionMismatch, "covariance must be k x k with k = dim(mean)");
  }
  if (!mean.allFinite() || !cov.allFinite()) fail(ErrorCode::InvalidArgument, "moments must be finite");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
    fail(ErrorCode::InvalidArgument, "covariance must be symmetric");
  }
  if ((cov.diagonal().array() < 0.0).any()) fail(ErrorCode::InvalidArgument, "variances must be >= 0");
  if (!(n >= 2.0)) fail(ErrorCode::DegenerateSample, "sample size must be at least 2");
}

std::string_view to_string(Quantity q) { return q == Quantity::PAF ? "PAF" : "PIF"; }

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Empirical: return "empirical";
    case Method::Approximate: return "approximate";
    case Method::ApproximatePaperSD: return "approximate-paper-sd";
    case Method::Standard: return "standard";
    case Method::Mixture: return "mixture";
    case Method::DiscreteOracle: return "discrete-oracle";
  }
  return "unknown";
}

std::string_view to_string(ApproximateMode m) {
  return m == ApproximateMode::TaylorVariance ? "taylor-variance" : "paper-sd";
}

ApproximateMode parse_approximate_mode(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "taylor-variance" || s == "taylor" || s == "taylorvariance") {
    return ApproximateMode::TaylorVariance;
  }
  if (s == "paper-sd" || s == "papersd") return ApproximateMode::PaperSD;
  fail(ErrorCode::InvalidArgument, "unknown approximate mode '" + std::string(name) + "'");
}

}  // namespace impactfrac
