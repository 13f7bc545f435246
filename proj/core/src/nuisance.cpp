#include "regret/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "regret/types.hpp"

namespace regret {

double floor_probability(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

std::vector<double> ProbabilityModel::predict_all(const ObservationalDataset& data) const {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict(data.x(i));
  return out;
}

double LogisticModel::logit(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(coef_.size())) {
    throw DataError("dimension mismatch: model expects " + std::to_string(coef_.size()) +
                    " covariates, got " + std::to_string(x.size()));
  }
  double eta = intercept_;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    eta += coef_[jj] * (x[j] - mean_[jj]) / scale_[jj];
  }
  return eta;
}

double LogisticModel::predict(std::span<const double> x) const {
  return floor_probability(1.0 / (1.0 + std::exp(-logit(x))));
}

double HistogramModel::predict(std::span<const double> x) const {
  if (column_ >= x.size()) throw DataError("dimension mismatch: histogram score column out of range");
  const double s = x[column_];
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), s);
  return probs_[static_cast<std::size_t>(it - edges_.begin())];
}

Learner parse_learner(const std::string& name) {
  if (name == "logistic") return Learner::logistic;
  if (name == "histogram") return Learner::histogram;
  throw ConfigError("unknown learner '" + name + "'");
}

namespace {

std::vector<double> equal_mass_edges(std::vector<double> values, std::size_t bins) {
  std::vector<double> edges;
  if (values.empty() || bins < 2) return edges;
  std::sort(values.begin(), values.end());
  for (std::size_t b = 1; b < bins; ++b) {
    const std::size_t k = b * values.size() / bins;
    const double e = values[std::min(k, values.size() - 1)];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  return edges;
}

ModelPtr fit_logistic(const RowMatrix& x, std::span<const std::uint8_t> labels,
                      const ClassifierConfig& config) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const double nd = static_cast<double>(n);

  Eigen::VectorXd mean = x.colwise().mean().transpose();
  Eigen::VectorXd scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double var = (x.col(j).array() - mean[j]).square().sum() / nd;
    scale[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j) {
    design.col(j + 1) = (x.col(j).array() - mean[j]) / scale[j];
  }
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)];

  const double penalty = config.l2_penalty.value_or(1.0 / nd);
  if (!(penalty >= 0.0)) throw ConfigError("l2_penalty must be nonnegative");
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(p + 1);
  mask[0] = 0.0;

  auto loss = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = design * beta;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // log(1 + e^eta) - y * eta, computed stably
      const double e = eta[i];
      s += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y[i] * e;
    }
    return s / nd + 0.5 * penalty * beta.cwiseProduct(mask).squaredNorm();
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  const double ybar = y.mean();
  beta[0] = std::log(ybar / (1.0 - ybar));

  int iter = 0;
  bool converged = false;
  double current = loss(beta);
  for (; iter < config.max_iter; ++iter) {
    const Eigen::VectorXd eta = design * beta;
    const Eigen::VectorXd prob = (1.0 + (-eta.array()).exp()).inverse().matrix();
    const Eigen::VectorXd wts = prob.array() * (1.0 - prob.array());
    Eigen::VectorXd grad = design.transpose() * (prob - y) / nd + penalty * beta.cwiseProduct(mask);
    if (grad.norm() < config.tol) {
      converged = true;
      break;
    }
    Eigen::MatrixXd hess = design.transpose() * wts.asDiagonal() * design / nd;
    hess.diagonal() += penalty * mask;
    hess.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    double t = 1.0;
    Eigen::VectorXd next = beta - step;
    double next_loss = loss(next);
    for (int halvings = 0; halvings < 40 && !(next_loss <= current); ++halvings) {
      t *= 0.5;
      next = beta - t * step;
      next_loss = loss(next);
    }
    if (!(next_loss <= current)) break;
    beta = next;
    current = next_loss;
  }

  return std::make_shared<LogisticModel>(beta.tail(p), beta[0], std::move(mean), std::move(scale),
                                         iter, converged);
}

ModelPtr fit_histogram(const RowMatrix& x, std::span<const std::uint8_t> labels,
                       const ClassifierConfig& config) {
  if (config.score_column >= static_cast<std::size_t>(x.cols())) {
    throw DataError("dimension mismatch: histogram score column out of range");
  }
  const auto col = static_cast<Eigen::Index>(config.score_column);
  std::vector<double> scores(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) scores[static_cast<std::size_t>(i)] = x(i, col);
  std::vector<double> edges = equal_mass_edges(scores, std::max<std::size_t>(config.bins, 1));
  std::vector<double> ones(edges.size() + 1, 0.0), counts(edges.size() + 1, 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), scores[i]) -
                                            edges.begin());
    counts[b] += 1.0;
    ones[b] += labels[i];
  }
  std::vector<double> probs(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    probs[b] = floor_probability((ones[b] + 1.0) / (counts[b] + 2.0));
  }
  return std::make_shared<HistogramModel>(config.score_column, std::move(edges), std::move(probs));
}

RowMatrix gather_rows(const ObservationalDataset& data, const std::vector<std::size_t>& rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.dim()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = data.features().row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

ModelPtr fit_on(const ObservationalDataset& data, const std::vector<std::size_t>& rows,
                const std::vector<std::uint8_t>& labels, const ClassifierConfig& config) {
  return fit_classifier(gather_rows(data, rows), labels, config);
}

// x augmented with indicators for every kept level but the first.
std::map<int, LevelModels> fit_pooled_levels(const ObservationalDataset& train,
                                             const std::map<int, std::vector<std::size_t>>& by_level,
                                             const std::vector<int>& kept, const ClassifierConfig& config) {
  const std::size_t p = train.dim();
  const std::size_t extra = kept.size() - 1;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> slot;  // indicator position per row, or extra for the reference level
  for (std::size_t k = 0; k < kept.size(); ++k) {
    for (std::size_t i : by_level.at(kept[k])) {
      rows.push_back(i);
      slot.push_back(k == 0 ? extra : k - 1);
    }
  }
  auto augmented = [&](const std::vector<std::size_t>& which) {
    RowMatrix x = RowMatrix::Zero(static_cast<Eigen::Index>(which.size()), static_cast<Eigen::Index>(p + extra));
    for (std::size_t r = 0; r < which.size(); ++r) {
      const std::size_t i = rows[which[r]];
      const auto xi = train.x(i);
      for (std::size_t j = 0; j < p; ++j) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = xi[j];
      if (slot[which[r]] < extra) {
        x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p + slot[which[r]])) = 1.0;
      }
    }
    return x;
  };
  std::vector<std::size_t> all_idx(rows.size()), treated_idx;
  std::vector<std::uint8_t> dl(rows.size()), yl;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    all_idx[r] = r;
    dl[r] = static_cast<std::uint8_t>(train.d(rows[r]));
    if (dl[r] == 1) {
      treated_idx.push_back(r);
      yl.push_back(static_cast<std::uint8_t>(train.y(rows[r])));
    }
  }
  const ModelPtr e1 = fit_classifier(augmented(all_idx), dl, config);
  const ModelPtr mu1 = fit_classifier(augmented(treated_idx), yl, config);

  auto at_level = [p, extra](ModelPtr model, std::size_t k) {
    return std::make_shared<FunctionModel>([model, p, extra, k](std::span<const double> x) {
      std::vector<double> z(p + extra, 0.0);
      std::copy(x.begin(), x.end(), z.begin());
      if (k > 0) z[p + k - 1] = 1.0;
      return model->predict(z);
    });
  };
  std::map<int, LevelModels> out;
  for (std::size_t k = 0; k < kept.size(); ++k) out[kept[k]] = LevelModels{at_level(e1, k), at_level(mu1, k)};
  return out;
}

}  // namespace

ModelPtr fit_classifier(const RowMatrix& x, std::span<const std::uint8_t> labels,
                        const ClassifierConfig& config) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw DataError("dimension mismatch: " + std::to_string(x.rows()) + " rows vs " +
                    std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = labels.size();
  std::size_t positives = 0;
  for (auto l : labels) {
    if (l > 1) throw DataError("classifier labels must be binary");
    positives += l;
  }
  if (n < 2 || positives == 0 || positives == n) {
    return std::make_shared<ConstantModel>(floor_probability((static_cast<double>(positives) + 1.0) /
                                                             (static_cast<double>(n) + 2.0)));
  }
  switch (config.learner) {
    case Learner::histogram:
      return fit_histogram(x, labels, config);
    case Learner::logistic:
    default:
      return fit_logistic(x, labels, config);
  }
}

std::size_t ProximalFrequencies::bin(double score) const {
  return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), score) - edges.begin());
}

namespace {

ProximalFrequencies fit_proximal(const ObservationalDataset& train, const ModelPtr& mu1,
                                 const std::vector<std::size_t>& treated) {
  std::vector<double> scores;
  scores.reserve(treated.size());
  for (std::size_t i : treated) scores.push_back(mu1->predict(train.x(i)));

  ProximalFrequencies out;
  out.edges = equal_mass_edges(scores, kProximalBins);
  const std::size_t bins = out.edges.size() + 1;

  int max_w = 0, max_z = 0;
  for (std::size_t i : treated) {
    max_w = std::max(max_w, train.w(i));
    max_z = std::max(max_z, train.z(i));
  }
  const auto nw = static_cast<std::size_t>(max_w + 1);
  const auto nz = static_cast<std::size_t>(max_z + 1);
  std::vector<std::vector<double>> joint(bins, std::vector<double>(nw * nz, 0.0));
  for (std::size_t k = 0; k < treated.size(); ++k) {
    const std::size_t i = treated[k];
    const auto w = static_cast<std::size_t>(train.w(i));
    const auto z = static_cast<std::size_t>(train.z(i));
    joint[out.bin(scores[k])][w * nz + z] += 1.0;
  }

  out.ratio_min.assign(bins, 0.0);
  out.ratio_max.assign(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    std::vector<double> mw(nw, 0.0), mz(nz, 0.0);
    double total = 0.0;
    for (std::size_t w = 0; w < nw; ++w)
      for (std::size_t z = 0; z < nz; ++z) {
        const double c = joint[b][w * nz + z];
        mw[w] += c;
        mz[z] += c;
        total += c;
      }
    bool any = false;
    double lo = 0.0, hi = 0.0;
    for (std::size_t w = 0; w < nw; ++w)
      for (std::size_t z = 0; z < nz; ++z) {
        const double c = joint[b][w * nz + z];
        if (c < static_cast<double>(kMinProximalCell)) continue;
        const double r = c * total / (mw[w] * mz[z]);
        lo = any ? std::min(lo, r) : r;
        hi = any ? std::max(hi, r) : r;
        any = true;
      }
    if (!any) {
      throw NumericError("proximal cell count below threshold in mu1 stratum " + std::to_string(b) +
                         " (need >= " + std::to_string(kMinProximalCell) + " rows per (w,z) cell)");
    }
    out.ratio_min[b] = lo;
    out.ratio_max[b] = hi;
  }
  return out;
}

}  // namespace

NuisanceModels fit_nuisances(const ObservationalDataset& train, const CausalAssumption& assumption,
                             const ClassifierConfig& config) {
  NuisanceModels out;

  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::uint8_t> d_labels(train.size());
  std::vector<std::size_t> treated;
  std::vector<std::uint8_t> y_labels;
  for (std::size_t i = 0; i < train.size(); ++i) {
    d_labels[i] = static_cast<std::uint8_t>(train.d(i));
    if (train.d(i) == 1) {
      treated.push_back(i);
      y_labels.push_back(static_cast<std::uint8_t>(train.y(i)));
    }
  }
  if (treated.empty()) throw DataError("cannot identify mu1: no d=1 rows in the training sample");

  out.e1 = fit_on(train, all, d_labels, config);
  out.mu1 = fit_on(train, treated, y_labels, config);

  const bool levels = std::holds_alternative<InstrumentalVariable>(assumption) ||
                      std::holds_alternative<ProximalTreatment>(assumption);
  if (levels) {
    if (!train.has_z()) throw DataError("assumption " + describe(assumption) + " needs an instrument column");
    std::map<int, std::vector<std::size_t>> by_level;
    for (std::size_t i = 0; i < train.size(); ++i) by_level[train.z(i)].push_back(i);
    std::vector<int> kept;
    for (const auto& [level, rows] : by_level) {
      if (rows.size() < kMinLevelRows) {
        out.warnings.push_back("instrument level " + std::to_string(level) + " has " +
                               std::to_string(rows.size()) + " rows (< " + std::to_string(kMinLevelRows) +
                               "); dropped");
      } else {
        kept.push_back(level);
      }
    }
    if (config.pooled_levels && kept.size() > 1) {
      out.per_level = fit_pooled_levels(train, by_level, kept, config);
    } else {
      for (int level : kept) {
        const auto& rows = by_level[level];
        std::vector<std::uint8_t> dl;
        std::vector<std::size_t> tr;
        std::vector<std::uint8_t> yl;
        for (std::size_t i : rows) {
          dl.push_back(static_cast<std::uint8_t>(train.d(i)));
          if (train.d(i) == 1) {
            tr.push_back(i);
            yl.push_back(static_cast<std::uint8_t>(train.y(i)));
          }
        }
        out.per_level[level] = LevelModels{fit_on(train, rows, dl, config), fit_on(train, tr, yl, config)};
      }
    }
    if (out.per_level.empty()) throw DataError("instrument level with zero support: no level has enough rows");
  }

  if (std::holds_alternative<ProximalTreatmentOutcome>(assumption)) {
    if (!train.has_z() || !train.has_w()) {
      throw DataError("assumption proximal_tw needs both z and w columns");
    }
    out.proximal = fit_proximal(train, out.mu1, treated);
  }
  return out;
}

}  // namespace regret
