#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tweetpol/matrix.hpp"
#include "tweetpol/polarity.hpp"

// Linear support vector machines solved in the dual by coordinate descent,
// Platt sigmoid calibration and one-vs-one pairwise coupling.
//
// Both the classifier and the regressor append a constant 1 feature to every
// sample, so the bias is part of the regularized weight vector and the dual
// has box constraints only.
namespace tweetpol::svm {

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct BinarySvmConfig {
  double C = 1.0;
  // Multipliers on C for the +1 and -1 classes.
  double positive_weight = 1.0;
  double negative_weight = 1.0;
  double tolerance = 1e-6;
  int max_epochs = 1000;
  std::uint64_t seed = 42;
};

struct BinarySvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double C = 1.0;

  bool operator==(const BinarySvmModel&) const = default;
};

struct BinarySvmSolution {
  BinarySvmModel model;
  std::vector<double> alpha;  // dual variables, alpha_i in [0, C_i]
  int epochs = 0;
  double max_violation = 0.0;  // projected-gradient violation at exit
};

inline double decision(const BinarySvmModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size())
    throw Error("decision: input has " + std::to_string(x.size()) + " features, model expects " +
                std::to_string(model.weights.size()));
  double s = model.bias;
  for (std::size_t k = 0; k < x.size(); ++k) s += model.weights[k] * x[k];
  return s;
}

namespace detail {

inline void check_finite(const Matrix& X, const char* who) {
  if (!X.all_finite()) throw Error(std::string(who) + ": non-finite feature value");
}

inline void shuffle(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
}

// Augmented inner product <(x,1), w~>.
inline double augmented_dot(std::span<const double> x, const std::vector<double>& w) {
  double s = w.back();
  for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * x[k];
  return s;
}

inline void augmented_axpy(double a, std::span<const double> x, std::vector<double>& w) {
  for (std::size_t k = 0; k < x.size(); ++k) w[k] += a * x[k];
  w.back() += a;
}

}  // namespace detail

// L1-hinge soft-margin dual:
//   max_a  sum a_i - 1/2 || sum a_i y_i (x_i, 1) ||^2,   0 <= a_i <= C_i.
// Stops once every projected gradient is below config.tolerance.
inline BinarySvmSolution solve_binary_svm(const Matrix& X, std::span<const int> y,
                                          const BinarySvmConfig& config = {}) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (y.size() != n) throw Error("train_binary_svm: label count does not match sample count");
  if (!(config.C > 0.0)) throw Error("train_binary_svm: C must be positive");
  if (n < 2) throw Error("train_binary_svm: need at least 2 samples");
  detail::check_finite(X, "train_binary_svm");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1)
      has_pos = true;
    else if (v == -1)
      has_neg = true;
    else
      throw Error("train_binary_svm: labels must be -1 or +1");
  }
  if (!has_pos || !has_neg) throw Error("train_binary_svm: both classes must be present");

  std::vector<double> upper(n), qdiag(n);
  for (std::size_t i = 0; i < n; ++i) {
    upper[i] = config.C * (y[i] > 0 ? config.positive_weight : config.negative_weight);
    auto xi = X.row(i);
    qdiag[i] = std::inner_product(xi.begin(), xi.end(), xi.begin(), 1.0);
  }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> w(d + 1, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  auto projected_gradient = [&](std::size_t i) {
    double g = y[i] * detail::augmented_dot(X.row(i), w) - 1.0;
    if (alpha[i] <= 0.0) return std::min(g, 0.0);
    if (alpha[i] >= upper[i]) return std::max(g, 0.0);
    return g;
  };

  BinarySvmSolution sol;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    detail::shuffle(order, rng);
    double worst = 0.0;
    for (std::size_t i : order) {
      double g = y[i] * detail::augmented_dot(X.row(i), w) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0)
        pg = std::min(g, 0.0);
      else if (alpha[i] >= upper[i])
        pg = std::max(g, 0.0);
      worst = std::max(worst, std::abs(pg));
      if (pg != 0.0) {
        double old = alpha[i];
        alpha[i] = std::clamp(old - g / qdiag[i], 0.0, upper[i]);
        detail::augmented_axpy((alpha[i] - old) * y[i], X.row(i), w);
      }
    }
    sol.epochs = epoch + 1;
    if (worst < config.tolerance) break;
  }

  double violation = 0.0;
  for (std::size_t i = 0; i < n; ++i) violation = std::max(violation, std::abs(projected_gradient(i)));

  sol.max_violation = violation;
  sol.alpha = std::move(alpha);
  sol.model.bias = w.back();
  w.pop_back();
  sol.model.weights = std::move(w);
  sol.model.C = config.C;
  return sol;
}

inline BinarySvmModel train_binary_svm(const Matrix& X, std::span<const int> y,
                                       const BinarySvmConfig& config = {}) {
  return solve_binary_svm(X, y, config).model;
}

// ---------------------------------------------------------------------------
// Epsilon-insensitive support vector regression.

struct SvrConfig {
  double C = 1.0;
  double epsilon = 0.1;
  double tolerance = 1e-6;
  int max_epochs = 1000;
  std::uint64_t seed = 42;
};

struct SvrModel {
  std::vector<double> weights;
  double bias = 0.0;
  double epsilon = 0.1;
  double C = 1.0;

  bool operator==(const SvrModel&) const = default;
};

struct SvrSolution {
  SvrModel model;
  std::vector<double> beta;  // signed dual variables in [-C, C]
  int epochs = 0;
  double max_violation = 0.0;
};

inline double predict(const SvrModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size())
    throw Error("svr predict: input has " + std::to_string(x.size()) +
                " features, model expects " + std::to_string(model.weights.size()));
  double s = model.bias;
  for (std::size_t k = 0; k < x.size(); ++k) s += model.weights[k] * x[k];
  return s;
}

// Dual of  1/2 ||w~||^2 + C sum max(0, |w~.(x_i,1) - t_i| - eps):
//   min_b  1/2 b'Qb - t'b + eps ||b||_1,   -C <= b_i <= C.
inline SvrSolution solve_svr(const Matrix& X, std::span<const double> t, const SvrConfig& config = {}) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (t.size() != n) throw Error("train_svr: target count does not match sample count");
  if (n < 2) throw Error("train_svr: need at least 2 samples");
  if (!(config.C > 0.0) || !(config.epsilon >= 0.0)) throw Error("train_svr: invalid C or epsilon");
  detail::check_finite(X, "train_svr");
  for (double v : t)
    if (!std::isfinite(v)) throw Error("train_svr: non-finite target");

  const double C = config.C;
  const double eps = config.epsilon;
  std::vector<double> qdiag(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = X.row(i);
    qdiag[i] = std::inner_product(xi.begin(), xi.end(), xi.begin(), 1.0);
  }
  std::vector<double> beta(n, 0.0);
  std::vector<double> w(d + 1, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  auto violation_at = [&](std::size_t i, double g) {
    double gp = g + eps, gn = g - eps;
    double b = beta[i];
    if (b == 0.0) {
      if (gp < 0.0) return -gp;
      if (gn > 0.0) return gn;
      return 0.0;
    }
    if (b >= C) return std::max(gp, 0.0);
    if (b <= -C) return std::max(-gn, 0.0);
    return b > 0.0 ? std::abs(gp) : std::abs(gn);
  };

  SvrSolution sol;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    detail::shuffle(order, rng);
    double worst = 0.0;
    for (std::size_t i : order) {
      double g = detail::augmented_dot(X.row(i), w) - t[i];
      worst = std::max(worst, violation_at(i, g));
      double h = qdiag[i];
      double gp = g + eps, gn = g - eps;
      double old = beta[i];
      double step;
      if (gp < h * old)
        step = -gp / h;
      else if (gn > h * old)
        step = -gn / h;
      else
        step = -old;
      beta[i] = std::clamp(old + step, -C, C);
      double delta = beta[i] - old;
      if (delta != 0.0) detail::augmented_axpy(delta, X.row(i), w);
    }
    sol.epochs = epoch + 1;
    if (worst < config.tolerance) break;
  }

  double violation = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    violation = std::max(violation, violation_at(i, detail::augmented_dot(X.row(i), w) - t[i]));
  sol.max_violation = violation;
  sol.beta = std::move(beta);
  sol.model.bias = w.back();
  w.pop_back();
  sol.model.weights = std::move(w);
  sol.model.epsilon = eps;
  sol.model.C = C;
  return sol;
}

inline SvrModel train_svr(const Matrix& X, std::span<const double> t, const SvrConfig& config = {}) {
  return solve_svr(X, t, config).model;
}

// ---------------------------------------------------------------------------
// Platt scaling: P(y = +1 | d) = 1 / (1 + exp(A d + B)).

struct PlattParams {
  double A = 0.0;
  double B = 0.0;

  bool operator==(const PlattParams&) const = default;
};

inline double platt_probability(const PlattParams& p, double decision_value) {
  double f = p.A * decision_value + p.B;
  // Evaluated on the branch that cannot overflow.
  if (f >= 0.0) {
    double e = std::exp(-f);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(f));
}

struct PlattTargets {
  double high = 0.0;
  double low = 0.0;
};

inline PlattTargets platt_targets(std::span<const int> labels) {
  double pos = 0, neg = 0;
  for (int l : labels) (l > 0 ? pos : neg) += 1.0;
  return {(pos + 1.0) / (pos + 2.0), 1.0 / (neg + 2.0)};
}

// Cross-entropy of the sigmoid against the smoothed targets.
inline double platt_nll(std::span<const double> decisions, std::span<const int> labels,
                        const PlattParams& p) {
  auto tg = platt_targets(labels);
  double f = 0.0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    double t = labels[i] > 0 ? tg.high : tg.low;
    double z = decisions[i] * p.A + p.B;
    if (z >= 0.0)
      f += t * z + std::log1p(std::exp(-z));
    else
      f += (t - 1.0) * z + std::log1p(std::exp(z));
  }
  return f;
}

// Newton's method with backtracking on the smoothed-target likelihood.
// `nll_trace`, when given, receives the objective after every accepted step
// (the starting value first).
inline PlattParams fit_platt(std::span<const double> decisions, std::span<const int> labels,
                             std::vector<double>* nll_trace = nullptr) {
  if (decisions.size() != labels.size()) throw Error("fit_platt: length mismatch");
  double pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(decisions[i])) throw Error("fit_platt: non-finite decision value");
    if (labels[i] == 1)
      pos += 1;
    else if (labels[i] == -1)
      neg += 1;
    else
      throw Error("fit_platt: labels must be -1 or +1");
  }
  if (pos == 0 || neg == 0) throw Error("fit_platt: both labels must be present");

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;  // Hessian ridge
  constexpr double kGradTol = 1e-10;

  auto tg = platt_targets(labels);
  PlattParams p{0.0, std::log((neg + 1.0) / (pos + 1.0))};
  double fval = platt_nll(decisions, labels, p);
  if (nll_trace) nll_trace->push_back(fval);

  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      double d = decisions[i];
      double t = labels[i] > 0 ? tg.high : tg.low;
      double prob = platt_probability(p, d);
      double w = prob * (1.0 - prob);
      h11 += d * d * w;
      h22 += w;
      h21 += d * w;
      double r = t - prob;
      g1 += d * r;
      g2 += r;
    }
    if (std::abs(g1) < kGradTol && std::abs(g2) < kGradTol) break;

    double det = h11 * h22 - h21 * h21;
    double dA = -(h22 * g1 - h21 * g2) / det;
    double dB = -(-h21 * g1 + h11 * g2) / det;
    double gd = g1 * dA + g2 * dB;

    double step = 1.0;
    bool accepted = false;
    while (step >= kMinStep) {
      PlattParams trial{p.A + step * dA, p.B + step * dB};
      double nf = platt_nll(decisions, labels, trial);
      if (nf < fval + 1e-4 * step * gd) {
        p = trial;
        fval = nf;
        accepted = true;
        break;
      }
      step /= 2.0;
    }
    if (!accepted) break;
    if (nll_trace) nll_trace->push_back(fval);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Pairwise coupling.

// Objective  sum_{i<j} (r_ji p_i - r_ij p_j)^2  written as p'Qp.
inline std::vector<double> coupling_matrix(const Matrix& r) {
  const std::size_t k = r.rows();
  std::vector<double> Q(k * k, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      if (j == t) continue;
      Q[t * k + t] += r(j, t) * r(j, t);
      Q[t * k + j] = -r(j, t) * r(t, j);
    }
  }
  return Q;
}

inline double coupling_objective(const Matrix& r, std::span<const double> p) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = i + 1; j < r.rows(); ++j) {
      double v = r(j, i) * p[i] - r(i, j) * p[j];
      s += v * v;
    }
  return s;
}

namespace detail {

// Gaussian elimination with partial pivoting; returns false when singular.
inline bool solve_dense(std::vector<double> A, std::vector<double> b, std::size_t n,
                        std::vector<double>& x) {
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
    if (std::abs(A[piv * n + c]) < 1e-300) return false;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(A[c * n + k], A[piv * n + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      double f = A[r * n + c] / A[c * n + c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) A[r * n + k] -= f * A[c * n + k];
      b[r] -= f * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= A[c * n + k] * x[k];
    x[c] = s / A[c * n + c];
  }
  return true;
}

}  // namespace detail

struct CouplingOptions {
  double tolerance = 1e-10;
  int max_iterations = 1000;
};

// Second method of Wu, Lin and Weng: minimizes p'Qp subject to sum p = 1.
// Starts from the solution of the bordered KKT system and runs the
// fixed-point sweep until max_t |(Qp)_t - p'Qp| < tolerance.
// r(i, j) approximates P(class i | class i or j); the diagonal is ignored.
inline std::vector<double> couple_pairwise(const Matrix& r, const CouplingOptions& opt = {}) {
  const std::size_t k = r.rows();
  if (k == 0 || r.cols() != k) throw Error("couple_pairwise: r must be a non-empty square matrix");
  if (k == 1) return {1.0};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j && !(r(i, j) >= 0.0 && r(i, j) <= 1.0))
        throw Error("couple_pairwise: pairwise probabilities must lie in [0, 1]");

  const auto Q = coupling_matrix(r);
  std::vector<double> p(k, 1.0 / static_cast<double>(k));

  {
    const std::size_t m = k + 1;
    std::vector<double> A(m * m, 0.0), b(m, 0.0), x;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) A[i * m + j] = Q[i * k + j];
      A[i * m + k] = 1.0;
      A[k * m + i] = 1.0;
    }
    b[k] = 1.0;
    if (detail::solve_dense(A, b, m, x)) {
      bool ok = true;
      for (std::size_t i = 0; i < k; ++i) ok = ok && std::isfinite(x[i]) && x[i] >= 0.0;
      if (ok) std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k), p.begin());
    }
  }

  std::vector<double> Qp(k);
  double residual = 0.0;
  for (int iter = 0; iter <= opt.max_iterations; ++iter) {
    double pQp = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      Qp[t] = 0.0;
      for (std::size_t j = 0; j < k; ++j) Qp[t] += Q[t * k + j] * p[j];
      pQp += p[t] * Qp[t];
    }
    residual = 0.0;
    for (std::size_t t = 0; t < k; ++t) residual = std::max(residual, std::abs(Qp[t] - pQp));
    if (residual < opt.tolerance) {
      double s = std::accumulate(p.begin(), p.end(), 0.0);
      for (double& v : p) v = std::max(v, 0.0) / s;
      return p;
    }
    if (iter == opt.max_iterations) break;
    for (std::size_t t = 0; t < k; ++t) {
      double qtt = Q[t * k + t];
      if (qtt <= 0.0) continue;
      double diff = (-Qp[t] + pQp) / qtt;
      p[t] += diff;
      pQp = (pQp + diff * (diff * qtt + 2.0 * Qp[t])) / (1.0 + diff) / (1.0 + diff);
      for (std::size_t j = 0; j < k; ++j) {
        Qp[j] = (Qp[j] + diff * Q[t * k + j]) / (1.0 + diff);
        p[j] /= (1.0 + diff);
      }
    }
  }
  throw ConvergenceError("couple_pairwise did not converge", residual);
}

// ---------------------------------------------------------------------------
// One-vs-one multiclass SVM with coupled probabilities.

// Per-feature z-scoring with training statistics. Constant features keep a
// unit scale.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& X) {
    Standardizer s;
    const std::size_t n = X.rows(), d = X.cols();
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    if (n == 0) return s;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) s.mean[k] += X(i, k);
    for (double& m : s.mean) m /= static_cast<double>(n);
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        double c = X(i, k) - s.mean[k];
        var[k] += c * c;
      }
    for (std::size_t k = 0; k < d; ++k) {
      double sd = std::sqrt(var[k] / static_cast<double>(n));
      s.scale[k] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
  }

  static Standardizer identity(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }

  std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != mean.size())
      throw Error("standardizer: input has " + std::to_string(x.size()) +
                  " features, expected " + std::to_string(mean.size()));
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean[k]) / scale[k];
    return out;
  }

  Matrix apply(const Matrix& X) const {
    Matrix out;
    for (std::size_t i = 0; i < X.rows(); ++i) out.push_row(apply(X.row(i)));
    return out;
  }

  bool operator==(const Standardizer&) const = default;
};

struct OvoConfig {
  double C = 1.0;
  std::vector<double> class_weights;  // empty: all 1
  bool standardize = true;
  double tolerance = 1e-6;
  int max_epochs = 1000;
  std::uint64_t seed = 42;
};

// Pairwise probability used for a pair whose classes were not both seen.
inline constexpr double kSkippedPairProbability = 0.5;
// Calibrated pairwise probabilities are kept away from 0 and 1.
inline constexpr double kMinPairProbability = 1e-7;

struct PairModel {
  std::size_t first = 0;   // labelled +1
  std::size_t second = 0;  // labelled -1
  bool trained = false;
  BinarySvmModel svm;
  PlattParams platt;

  bool operator==(const PairModel&) const = default;
};

struct OvoModel {
  std::size_t num_classes = kNumClasses;
  std::size_t num_features = 0;
  Standardizer scaler;
  std::vector<PairModel> pairs;  // (0,1), (0,2), ..., (k-2,k-1)

  std::size_t trained_pairs() const {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [](const PairModel& p) { return p.trained; }));
  }

  bool operator==(const OvoModel&) const = default;
};

// Labels are class indices in [0, num_classes). Each pair is trained on the
// samples of its two classes (first = +1) and calibrated on its own
// in-sample decision values.
inline OvoModel train_ovo(const Matrix& X, std::span<const std::size_t> labels,
                          std::size_t num_classes = kNumClasses, const OvoConfig& config = {}) {
  if (labels.size() != X.rows()) throw Error("train_ovo: label count does not match sample count");
  if (num_classes < 2) throw Error("train_ovo: need at least 2 classes");
  detail::check_finite(X, "train_ovo");
  std::vector<std::size_t> counts(num_classes, 0);
  for (auto l : labels) {
    if (l >= num_classes) throw Error("train_ovo: label out of range");
    ++counts[l];
  }
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    throw Error("train_ovo: fewer than 2 classes present in the training data");
  if (!config.class_weights.empty() && config.class_weights.size() != num_classes)
    throw Error("train_ovo: class_weights must have one entry per class");

  OvoModel model;
  model.num_classes = num_classes;
  model.num_features = X.cols();
  model.scaler = config.standardize ? Standardizer::fit(X) : Standardizer::identity(X.cols());
  const Matrix Z = model.scaler.apply(X);

  auto weight = [&](std::size_t c) { return config.class_weights.empty() ? 1.0 : config.class_weights[c]; };

  std::size_t pair_index = 0;
  for (std::size_t a = 0; a < num_classes; ++a) {
    for (std::size_t b = a + 1; b < num_classes; ++b, ++pair_index) {
      PairModel pm;
      pm.first = a;
      pm.second = b;
      if (counts[a] > 0 && counts[b] > 0) {
        Matrix sub;
        std::vector<int> y;
        for (std::size_t i = 0; i < Z.rows(); ++i) {
          if (labels[i] == a || labels[i] == b) {
            sub.push_row(Z.row(i));
            y.push_back(labels[i] == a ? 1 : -1);
          }
        }
        BinarySvmConfig bc;
        bc.C = config.C;
        bc.positive_weight = weight(a);
        bc.negative_weight = weight(b);
        bc.tolerance = config.tolerance;
        bc.max_epochs = config.max_epochs;
        bc.seed = config.seed + 0x9E3779B97F4A7C15ULL * (pair_index + 1);
        pm.svm = train_binary_svm(sub, y, bc);
        std::vector<double> dec(sub.rows());
        for (std::size_t i = 0; i < sub.rows(); ++i) dec[i] = decision(pm.svm, sub.row(i));
        pm.platt = fit_platt(dec, y);
        pm.trained = true;
      }
      model.pairs.push_back(std::move(pm));
    }
  }
  return model;
}

// Matrix of pairwise probabilities r(i, j) = P(i | i or j) for one sample.
inline Matrix pairwise_probabilities(const OvoModel& model, std::span<const double> x) {
  if (x.size() != model.num_features)
    throw Error("predict_proba: input has " + std::to_string(x.size()) +
                " features, model expects " + std::to_string(model.num_features));
  auto z = model.scaler.apply(x);
  Matrix r(model.num_classes, model.num_classes, 0.0);
  for (const auto& pm : model.pairs) {
    double p = kSkippedPairProbability;
    if (pm.trained) {
      p = platt_probability(pm.platt, decision(pm.svm, z));
      p = std::clamp(p, kMinPairProbability, 1.0 - kMinPairProbability);
    }
    r(pm.first, pm.second) = p;
    r(pm.second, pm.first) = 1.0 - p;
  }
  return r;
}

inline std::vector<double> predict_proba(const OvoModel& model, std::span<const double> x) {
  return couple_pairwise(pairwise_probabilities(model, x));
}

inline ClassDistribution predict_distribution(const OvoModel& model, std::span<const double> x) {
  if (model.num_classes != kNumClasses) throw Error("predict_distribution: model is not 4-class");
  auto p = predict_proba(model, x);
  ClassDistribution d;
  std::copy(p.begin(), p.end(), d.probabilities.begin());
  return d;
}

inline std::size_t predict_class(const OvoModel& model, std::span<const double> x) {
  auto p = predict_proba(model, x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

// ---------------------------------------------------------------------------
// Serialization.

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json to_json(const SvrModel& m) {
  return {{"weights", m.weights}, {"bias", m.bias}, {"epsilon", m.epsilon}, {"C", m.C}};
}

inline SvrModel svr_from_json(const nlohmann::json& j) {
  SvrModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.epsilon = j.at("epsilon").get<double>();
  m.C = j.at("C").get<double>();
  return m;
}

inline nlohmann::json to_json(const OvoModel& m) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : m.pairs) {
    nlohmann::json jp{{"first", p.first}, {"second", p.second}, {"trained", p.trained}};
    if (p.trained) {
      jp["weights"] = p.svm.weights;
      jp["bias"] = p.svm.bias;
      jp["C"] = p.svm.C;
      jp["platt_A"] = p.platt.A;
      jp["platt_B"] = p.platt.B;
    }
    pairs.push_back(std::move(jp));
  }
  return {{"format_version", kModelFormatVersion},
          {"num_classes", m.num_classes},
          {"num_features", m.num_features},
          {"scaler_mean", m.scaler.mean},
          {"scaler_scale", m.scaler.scale},
          {"pairs", std::move(pairs)}};
}

inline OvoModel ovo_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != kModelFormatVersion)
    throw Error("unsupported OvO model format version");
  OvoModel m;
  m.num_classes = j.at("num_classes").get<std::size_t>();
  m.num_features = j.at("num_features").get<std::size_t>();
  m.scaler.mean = j.at("scaler_mean").get<std::vector<double>>();
  m.scaler.scale = j.at("scaler_scale").get<std::vector<double>>();
  for (const auto& jp : j.at("pairs")) {
    PairModel p;
    p.first = jp.at("first").get<std::size_t>();
    p.second = jp.at("second").get<std::size_t>();
    p.trained = jp.at("trained").get<bool>();
    if (p.trained) {
      p.svm.weights = jp.at("weights").get<std::vector<double>>();
      p.svm.bias = jp.at("bias").get<double>();
      p.svm.C = jp.at("C").get<double>();
      p.platt.A = jp.at("platt_A").get<double>();
      p.platt.B = jp.at("platt_B").get<double>();
    }
    m.pairs.push_back(std::move(p));
  }
  if (m.pairs.size() != m.num_classes * (m.num_classes - 1) / 2)
    throw Error("OvO model has the wrong number of pair models");
  return m;
}

}  // namespace tweetpol::svm
