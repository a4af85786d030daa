#pragma once

// Regularized logistic regression baseline. Continuous features are z-scored
// with population statistics; categorical features are dummy-encoded against
// the most frequent category. The objective is mean negative log-likelihood
// plus (l2/2) * ||coefficients||^2 with the intercept unpenalized, minimized
// by Newton steps with step halving.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "glassgam/common.hpp"
#include "glassgam/dataset.hpp"

namespace glassgam {

struct ContinuousScaler {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;  // population; 0 encodes a constant column (output 0)
};

struct DummyGroup {
  std::string name;
  std::string reference;
  std::vector<std::string> categories;  // one indicator column per entry
};

struct Encoding {
  // One entry per dataset column, in schema order.
  struct Term {
    bool categorical = false;
    std::size_t index = 0;  // into scalers or groups
  };
  std::vector<Term> terms;
  std::vector<ContinuousScaler> scalers;
  std::vector<DummyGroup> groups;
  std::vector<std::string> column_names;
  std::size_t n_cols = 0;
};

struct DesignMatrix {
  std::vector<double> values;  // row-major n_rows x n_cols
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  Encoding encoding;
};

namespace detail {

inline void encode_continuous(const ContinuousScaler& sc, double v, double* out) {
  *out = sc.sd > 0.0 ? (v - sc.mean) / sc.sd : 0.0;
}

}  // namespace detail

// Builds the design matrix and remembers the encoding so later datasets (or
// single rows) can be mapped into the same column space. Reference categories
// default to the most frequent category (ties to the lowest code) and can be
// overridden per column. Unseen categories at prediction time encode as all
// zeros, the same as the reference.
inline DesignMatrix dummy_encode(const Dataset& d,
                                 const std::map<std::string, std::string>& reference_overrides =
                                     {}) {
  if (d.n_rows == 0) throw ValueError("dummy_encode: dataset has no rows");
  if (has_missing(d)) throw ValueError("dummy_encode requires an imputed dataset");
  DesignMatrix dm;
  Encoding& enc = dm.encoding;
  for (std::size_t f = 0; f < d.schema.size(); ++f) {
    const auto& sc = d.schema[f];
    if (sc.kind == ColumnKind::continuous) {
      const auto& col = d.continuous_col(f);
      double mean = 0.0;
      for (const double v : col) mean += v;
      mean /= static_cast<double>(col.size());
      double var = 0.0;
      for (const double v : col) var += (v - mean) * (v - mean);
      var /= static_cast<double>(col.size());
      enc.terms.push_back({false, enc.scalers.size()});
      enc.scalers.push_back({sc.name, mean, std::sqrt(var)});
      enc.column_names.push_back(sc.name);
    } else {
      const auto& col = d.categorical_col(f);
      std::vector<std::size_t> counts(col.labels.size(), 0);
      for (const std::int32_t c : col.codes) ++counts[static_cast<std::size_t>(c)];
      std::size_t ref = 0;
      for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[ref]) ref = c;
      }
      const auto it = reference_overrides.find(sc.name);
      if (it != reference_overrides.end()) {
        const std::int32_t code = col.code_of(it->second);
        if (code == kMissingCode) {
          throw ValueError("dummy_encode: reference category '" + it->second +
                           "' not found in column '" + sc.name + "'");
        }
        ref = static_cast<std::size_t>(code);
      }
      DummyGroup group;
      group.name = sc.name;
      group.reference = col.labels[ref];
      for (std::size_t c = 0; c < col.labels.size(); ++c) {
        if (c == ref) continue;
        group.categories.push_back(col.labels[c]);
        enc.column_names.push_back(sc.name + "=" + col.labels[c]);
      }
      enc.terms.push_back({true, enc.groups.size()});
      enc.groups.push_back(std::move(group));
    }
  }
  enc.n_cols = enc.column_names.size();

  dm.n_rows = d.n_rows;
  dm.n_cols = enc.n_cols;
  dm.values.assign(dm.n_rows * dm.n_cols, 0.0);
  std::size_t col_at = 0;
  for (std::size_t f = 0; f < d.schema.size(); ++f) {
    const auto& term = enc.terms[f];
    if (!term.categorical) {
      const auto& sc = enc.scalers[term.index];
      const auto& col = d.continuous_col(f);
      for (std::size_t r = 0; r < dm.n_rows; ++r) {
        detail::encode_continuous(sc, col[r], &dm.values[r * dm.n_cols + col_at]);
      }
      ++col_at;
    } else {
      const auto& group = enc.groups[term.index];
      const auto& col = d.categorical_col(f);
      // category label -> indicator column offset within this group
      std::map<std::string, std::size_t> offset;
      for (std::size_t k = 0; k < group.categories.size(); ++k) {
        offset[group.categories[k]] = col_at + k;
      }
      for (std::size_t r = 0; r < dm.n_rows; ++r) {
        const auto& label = col.labels[static_cast<std::size_t>(col.codes[r])];
        const auto it = offset.find(label);
        if (it != offset.end()) dm.values[r * dm.n_cols + it->second] = 1.0;
      }
      col_at += group.categories.size();
    }
  }
  return dm;
}

// ---------------------------------------------------------------------------
// Fitting

struct LogregOptions {
  double l2 = 1e-4;
  double tol = 1e-8;  // max-norm of the gradient at the solution
  int max_iters = 100;
};

struct LinearModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  Encoding encoding;
  double l2 = 0.0;
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = 0.0;
};

namespace detail {

// In-place Cholesky solve of the (SPD) Newton system; retries with growing
// diagonal jitter when the factorization stalls numerically.
inline bool cholesky_solve(std::vector<double> A, std::vector<double> b, std::size_t k,
                           std::vector<double>& x) {
  for (double jitter = 0.0; jitter <= 1e-4; jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0) {
    std::vector<double> L(A);
    if (jitter > 0.0) {
      for (std::size_t i = 0; i < k; ++i) L[i * k + i] += jitter;
    }
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double sum = L[i * k + j];
        for (std::size_t p = 0; p < j; ++p) sum -= L[i * k + p] * L[j * k + p];
        if (i == j) {
          if (sum <= 0.0) {
            ok = false;
            break;
          }
          L[i * k + i] = std::sqrt(sum);
        } else {
          L[i * k + j] = sum / L[j * k + j];
        }
      }
    }
    if (!ok) continue;
    std::vector<double> y(k);
    for (std::size_t i = 0; i < k; ++i) {
      double sum = b[i];
      for (std::size_t p = 0; p < i; ++p) sum -= L[i * k + p] * y[p];
      y[i] = sum / L[i * k + i];
    }
    x.assign(k, 0.0);
    for (std::size_t ii = k; ii-- > 0;) {
      double sum = y[ii];
      for (std::size_t p = ii + 1; p < k; ++p) sum -= L[p * k + ii] * x[p];
      x[ii] = sum / L[ii * k + ii];
    }
    return true;
  }
  return false;
}

}  // namespace detail

inline LinearModel fit_logreg(const DesignMatrix& dm, std::span<const int> labels,
                              const LogregOptions& opts = {}) {
  if (labels.size() != dm.n_rows) throw ValueError("fit_logreg: labels length mismatch");
  if (dm.n_rows == 0) throw ValueError("fit_logreg: no rows");
  if (opts.l2 < 0.0) throw ConfigError("fit_logreg: l2 must be non-negative");
  std::size_t n_pos = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw ValueError("fit_logreg: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(y);
  }
  if (n_pos == 0 || n_pos == labels.size()) {
    throw ValueError("fit_logreg requires both classes to be present");
  }

  const std::size_t n = dm.n_rows;
  const std::size_t k = dm.n_cols + 1;  // beta[0] is the intercept
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> beta(k, 0.0);

  auto objective = [&](const std::vector<double>& b, std::vector<double>& probs) {
    double nll = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double s = b[0];
      const double* row = &dm.values[r * dm.n_cols];
      for (std::size_t c = 0; c < dm.n_cols; ++c) s += b[c + 1] * row[c];
      const double p = std::clamp(sigmoid(s), 1e-15, 1.0 - 1e-15);
      probs[r] = p;
      nll -= labels[r] == 1 ? std::log(p) : std::log(1.0 - p);
    }
    nll *= inv_n;
    double penalty = 0.0;
    for (std::size_t c = 1; c < k; ++c) penalty += b[c] * b[c];
    return nll + 0.5 * opts.l2 * penalty;
  };

  LinearModel out;
  out.encoding = dm.encoding;
  out.l2 = opts.l2;

  std::vector<double> probs(n), grad(k), hess(k * k), step(k), trial(k), trial_probs(n);
  double loss = objective(beta, probs);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hess.begin(), hess.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double e = probs[r] - static_cast<double>(labels[r]);
      const double w = probs[r] * (1.0 - probs[r]);
      const double* row = &dm.values[r * dm.n_cols];
      grad[0] += e;
      hess[0] += w;
      for (std::size_t c = 0; c < dm.n_cols; ++c) {
        grad[c + 1] += e * row[c];
        hess[(c + 1) * k] += w * row[c];  // intercept column, lower triangle
        for (std::size_t c2 = 0; c2 <= c; ++c2) {
          hess[(c + 1) * k + (c2 + 1)] += w * row[c] * row[c2];
        }
      }
    }
    for (std::size_t c = 0; c < k; ++c) grad[c] *= inv_n;
    for (std::size_t c = 1; c < k; ++c) grad[c] += opts.l2 * beta[c];
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double h = hess[i * k + j] * inv_n;
        if (i == j && i >= 1) h += opts.l2;
        hess[i * k + j] = h;
        hess[j * k + i] = h;
      }
    }
    double gnorm = 0.0;
    for (const double g : grad) gnorm = std::max(gnorm, std::abs(g));
    out.final_grad_norm = gnorm;
    out.iterations = iter;
    if (gnorm <= opts.tol) {
      out.converged = true;
      break;
    }
    if (!detail::cholesky_solve(hess, grad, k, step)) break;
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      for (std::size_t c = 0; c < k; ++c) trial[c] = beta[c] - scale * step[c];
      const double trial_loss = objective(trial, trial_probs);
      if (trial_loss <= loss) {
        beta = trial;
        probs = trial_probs;
        loss = trial_loss;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
  }
  if (!out.converged) {
    // final gradient check after the last accepted step
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double e = probs[r] - static_cast<double>(labels[r]);
      const double* row = &dm.values[r * dm.n_cols];
      grad[0] += e;
      for (std::size_t c = 0; c < dm.n_cols; ++c) grad[c + 1] += e * row[c];
    }
    for (std::size_t c = 0; c < k; ++c) grad[c] *= inv_n;
    for (std::size_t c = 1; c < k; ++c) grad[c] += opts.l2 * beta[c];
    double gnorm = 0.0;
    for (const double g : grad) gnorm = std::max(gnorm, std::abs(g));
    out.final_grad_norm = gnorm;
    out.converged = gnorm <= opts.tol;
  }
  out.intercept = beta[0];
  out.coefficients.assign(beta.begin() + 1, beta.end());
  return out;
}

// ---------------------------------------------------------------------------
// Prediction

namespace detail {

inline void encode_dataset_row(const Encoding& enc, const Dataset& d, std::size_t r,
                               std::vector<double>& row_out) {
  row_out.assign(enc.n_cols, 0.0);
  std::size_t col_at = 0;
  for (const auto& term : enc.terms) {
    if (!term.categorical) {
      const auto& sc = enc.scalers[term.index];
      const std::size_t f = d.col_index(sc.name);
      encode_continuous(sc, d.continuous_col(f)[r], &row_out[col_at]);
      ++col_at;
    } else {
      const auto& group = enc.groups[term.index];
      const std::size_t f = d.col_index(group.name);
      const auto& col = d.categorical_col(f);
      const auto& label = col.labels[static_cast<std::size_t>(col.codes[r])];
      for (std::size_t c = 0; c < group.categories.size(); ++c) {
        if (group.categories[c] == label) {
          row_out[col_at + c] = 1.0;
          break;
        }
      }
      col_at += group.categories.size();
    }
  }
}

}  // namespace detail

inline std::vector<double> predict_logreg(const LinearModel& m, const Dataset& d) {
  if (has_missing(d)) throw ValueError("predict_logreg requires an imputed dataset");
  std::vector<double> out(d.n_rows);
  std::vector<double> row;
  for (std::size_t r = 0; r < d.n_rows; ++r) {
    detail::encode_dataset_row(m.encoding, d, r, row);
    double s = m.intercept;
    for (std::size_t c = 0; c < m.encoding.n_cols; ++c) s += m.coefficients[c] * row[c];
    out[r] = sigmoid(s);
  }
  return out;
}

}  // namespace glassgam
