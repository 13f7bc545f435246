#include "regret/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Cholesky>

#include "regret/parallel.hpp"
#include "regret/quadrature.hpp"

namespace regret {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double dot_x(const Eigen::VectorXd& w, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += w[static_cast<Eigen::Index>(j)] * x[j];
  return s;
}

Eigen::VectorXd uniform_weights(std::mt19937_64& rng, std::size_t dim, std::size_t fan_in) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(dim));
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = unif(rng) * scale;
  return w;
}

/// E[min(1, L m)] for L ~ Uniform(a, b).
double expected_clipped_scale(double m, double a, double b) {
  if (b - a <= 0.0) return std::min(1.0, a * m);
  if (m <= 0.0) return 0.0;
  if (b * m <= 1.0) return m * 0.5 * (a + b);
  if (a * m >= 1.0) return 1.0;
  const double c = 1.0 / m;
  return (0.5 * m * (c * c - a * a) + (b - c)) / (b - a);
}

/// Gaussian pair (a, b) = (U.w1, U.w2) for U ~ N(0, I) as weighted nodes.
struct PairRule {
  std::vector<double> a, b, w;
};

PairRule pair_rule(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2, int order) {
  const double s11 = w1.squaredNorm();
  const double s22 = w2.squaredNorm();
  const double s12 = w1.dot(w2);
  PairRule rule;
  if (s11 == 0.0 && s22 == 0.0) {
    rule.a = {0.0};
    rule.b = {0.0};
    rule.w = {1.0};
    return rule;
  }
  const double l00 = std::sqrt(s11);
  const double l10 = l00 > 0.0 ? s12 / l00 : 0.0;
  const double l11 = std::sqrt(std::max(s22 - l10 * l10, 0.0));
  const QuadratureRule gh = gauss_hermite_normal(order);
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
      rule.a.push_back(l00 * gh.nodes[i]);
      rule.b.push_back(l10 * gh.nodes[i] + l11 * gh.nodes[j]);
      rule.w.push_back(gh.weights[i] * gh.weights[j]);
    }
  }
  return rule;
}

}  // namespace

WorldMode parse_world_mode(const std::string& name) {
  if (name == "msm") return WorldMode::msm;
  if (name == "iv") return WorldMode::iv;
  throw ConfigError("unknown world mode '" + name + "'");
}

std::string to_string(WorldMode m) { return m == WorldMode::msm ? "msm" : "iv"; }

void WorldConfig::validate() const {
  if (v_dim < 1 || u_dim < 1 || z_levels < 1) throw ConfigError("world dimensions must be positive");
  if (!(lambda >= 1.0)) throw ConfigError("world lambda must be >= 1");
  if (!(confounder_strength >= 0.0)) throw ConfigError("confounder_strength must be nonnegative");
  if (lambda_star_range) {
    if (!(lambda_star_range->lower > 0.0 && lambda_star_range->lower <= lambda_star_range->upper)) {
      throw ConfigError("lambda_star range must satisfy 0 < lower <= upper");
    }
  }
}

SyntheticWorld::SyntheticWorld(WorldConfig config) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(derive_seed(config_.seed, 0x3017));
  const std::size_t v = config_.v_dim, u = config_.u_dim;
  w_pi0_ = uniform_weights(rng, v + u, v + u);
  w_pi_ = uniform_weights(rng, v, v);
  w_mu1_ = uniform_weights(rng, v + u, v + u);
  w_z_.resize(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(config_.z_levels));
  for (Eigen::Index k = 0; k < w_z_.cols(); ++k) w_z_.col(k) = uniform_weights(rng, v, v);
  const auto ui = static_cast<Eigen::Index>(u);
  w_pi0_.tail(ui) *= config_.confounder_strength;
  w_mu1_.tail(ui) *= config_.confounder_strength;
}

Interval SyntheticWorld::lambda_star_range() const {
  if (config_.lambda_star_range) return *config_.lambda_star_range;
  return {1.0 / config_.lambda, config_.lambda};
}

double SyntheticWorld::proposed_policy(std::span<const double> x) const { return sigmoid(dot_x(w_pi_, x)); }

Eigen::VectorXd SyntheticWorld::instrument_probs(std::span<const double> x) const {
  Eigen::VectorXd logits(w_z_.cols());
  for (Eigen::Index k = 0; k < w_z_.cols(); ++k) logits[k] = dot_x(w_z_.col(k), x);
  const double mx = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - mx).exp();
  return p / p.sum();
}

double SyntheticWorld::status_quo_index(std::span<const double> x, int z) const {
  return dot_x(w_pi0_, x) + config_.beta0 * z;
}
double SyntheticWorld::outcome1_index(std::span<const double> x, int z) const {
  return dot_x(w_mu1_, x) + config_.beta1 * z;
}

OracleSample SyntheticWorld::generate(std::size_t n, std::uint64_t seed) const {
  if (n < 1) throw ConfigError("sample size must be >= 1");
  const std::size_t v = config_.v_dim, u = config_.u_dim;
  const auto vi = static_cast<Eigen::Index>(v);
  const auto ui = static_cast<Eigen::Index>(u);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Interval ls = lambda_star_range();

  DatasetColumns cols;
  for (std::size_t j = 0; j < v; ++j) cols.x_names.push_back("x_" + std::to_string(j));
  cols.x.resize(static_cast<Eigen::Index>(n), vi);
  cols.d.resize(n);
  cols.pi1.resize(n);
  cols.t = std::vector<std::uint8_t>(n);
  cols.y.resize(n);
  cols.z = std::vector<int>(n);
  cols.z_name = "z";
  if (config_.with_proxy_w) {
    cols.w = std::vector<int>(n);
    cols.w_name = "w";
  }

  std::vector<std::uint8_t> y1s(n);
  std::size_t clipped = 0;
  Eigen::VectorXd uvec(ui);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < vi; ++j) cols.x(ii, j) = normal(rng);
    for (Eigen::Index j = 0; j < ui; ++j) uvec[j] = normal(rng);
    const std::span<const double> x(cols.x.data() + i * v, v);

    const Eigen::VectorXd gamma = instrument_probs(x);
    const double r = unif(rng);
    int z = 0;
    double acc = gamma[0];
    while (r >= acc && z + 1 < gamma.size()) acc += gamma[++z];

    const double p0 = sigmoid(status_quo_index(x, z) + uvec.dot(w_pi0_.tail(ui)));
    const int d = unif(rng) < p0 ? 1 : 0;
    const double p = proposed_policy(x);
    const int t = unif(rng) < p ? 1 : 0;
    const double m1 = sigmoid(outcome1_index(x, z) + uvec.dot(w_mu1_.tail(ui)));
    // In iv mode Y(1) does not depend on D given (V, Z); U confounds both.
    double m0 = m1;
    const double lambda_star = ls.lower + (ls.upper - ls.lower) * unif(rng);
    if (config_.mode == WorldMode::msm) {
      m0 = lambda_star * m1;
      if (m0 > 1.0) {
        m0 = 1.0;
        ++clipped;
      }
    }
    const int y1 = unif(rng) < (d == 1 ? m1 : m0) ? 1 : 0;

    cols.d[i] = static_cast<std::uint8_t>(d);
    cols.pi1[i] = p;
    (*cols.t)[i] = static_cast<std::uint8_t>(t);
    cols.y[i] = d == 1 ? static_cast<std::int8_t>(y1) : kMissing;
    (*cols.z)[i] = z;
    if (config_.with_proxy_w) (*cols.w)[i] = unif(rng) < sigmoid(2.0 * uvec[0]) ? 1 : 0;
    y1s[i] = static_cast<std::uint8_t>(y1);
  }
  return OracleSample{ObservationalDataset(std::move(cols)), std::move(y1s), clipped};
}

TrueNuisances SyntheticWorld::truth(int quadrature_order) const {
  const auto ui = static_cast<Eigen::Index>(config_.u_dim);
  auto world = std::make_shared<const SyntheticWorld>(*this);
  auto r1 = std::make_shared<const PairRule>(pair_rule(w_pi0_.tail(ui), w_mu1_.tail(ui), quadrature_order));
  const Interval ls = lambda_star_range();
  const bool msm = config_.mode == WorldMode::msm;

  // E_U[pi0] and E_U[pi0 mu1] at level z.
  auto level_moments = [world, r1](std::span<const double> x, int z) {
    const double s0 = world->status_quo_index(x, z);
    const double s1 = world->outcome1_index(x, z);
    double e = 0.0, em = 0.0;
    for (std::size_t k = 0; k < r1->w.size(); ++k) {
      const double p0 = sigmoid(s0 + r1->a[k]);
      e += r1->w[k] * p0;
      em += r1->w[k] * p0 * sigmoid(s1 + r1->b[k]);
    }
    return std::pair<double, double>{e, em};
  };
  auto marginal = [world, level_moments](std::span<const double> x) {
    const Eigen::VectorXd g = world->instrument_probs(x);
    double e = 0.0, em = 0.0;
    for (Eigen::Index z = 0; z < g.size(); ++z) {
      const auto [ez, emz] = level_moments(x, static_cast<int>(z));
      e += g[z] * ez;
      em += g[z] * emz;
    }
    return std::pair<double, double>{e, em};
  };

  TrueNuisances out;
  out.models.e1 = std::make_shared<FunctionModel>([marginal](std::span<const double> x) { return marginal(x).first; });
  out.models.mu1 = std::make_shared<FunctionModel>([marginal](std::span<const double> x) {
    const auto [e, em] = marginal(x);
    return em / e;
  });
  for (int z = 0; z < static_cast<int>(config_.z_levels); ++z) {
    out.models.per_level[z] = LevelModels{
        std::make_shared<FunctionModel>([level_moments, z](std::span<const double> x) { return level_moments(x, z).first; }),
        std::make_shared<FunctionModel>([level_moments, z](std::span<const double> x) {
          const auto [e, em] = level_moments(x, z);
          return em / e;
        })};
  }
  out.mu0 = std::make_shared<FunctionModel>([world, r1, ls, msm](std::span<const double> x) {
    const Eigen::VectorXd g = world->instrument_probs(x);
    double e0 = 0.0, num = 0.0;
    for (Eigen::Index zi = 0; zi < g.size(); ++zi) {
      const int z = static_cast<int>(zi);
      const double s0 = world->status_quo_index(x, z);
      const PairRule& rule = *r1;
      const double s = world->outcome1_index(x, z);
      for (std::size_t k = 0; k < rule.w.size(); ++k) {
        const double q0 = 1.0 - sigmoid(s0 + rule.a[k]);
        const double m = sigmoid(s + rule.b[k]);
        const double m0 = msm ? expected_clipped_scale(m, ls.lower, ls.upper) : m;
        e0 += g[zi] * rule.w[k] * q0;
        num += g[zi] * rule.w[k] * q0 * m0;
      }
    }
    return num / e0;
  });
  out.pi1 = std::make_shared<FunctionModel>([world](std::span<const double> x) { return world->proposed_policy(x); });
  return out;
}

VStatTable oracle_table(const OracleSample& sample) {
  const auto& data = sample.data;
  if (!data.has_t()) throw DataError("oracle table needs realized proposed actions t");
  std::vector<std::uint8_t> t(data.size()), d(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    t[i] = static_cast<std::uint8_t>(data.t(i));
    d[i] = static_cast<std::uint8_t>(data.d(i));
  }
  return VStatTable::from_counts(t, d, sample.y1);
}

double oracle_regret(const OracleSample& sample, const PerformanceMeasure& m) {
  return delta_value(oracle_table(sample), m);
}

OracleSample healthcare_sample(const HealthcareConfig& config) {
  if (config.n < 10) throw ConfigError("healthcare sample needs n >= 10");
  if (!(config.threshold_quantile > 0.0 && config.threshold_quantile < 1.0)) {
    throw ConfigError("threshold_quantile must lie in (0, 1)");
  }
  const std::size_t n_fit = static_cast<std::size_t>(std::ceil(static_cast<double>(config.n) * 0.4 / 0.6));
  const std::size_t total = n_fit + config.n;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  constexpr int p = 6;
  RowMatrix x(static_cast<Eigen::Index>(total), p);
  std::vector<double> log_cost(total), enroll_logit(total);
  std::vector<std::uint8_t> y1(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double age = 20.0 + 70.0 * unif(rng);
    const double female = unif(rng) < 0.6 ? 1.0 : 0.0;
    const double black = unif(rng) < 0.3 ? 1.0 : 0.0;
    const double severity = normal(rng);  // unobserved
    std::poisson_distribution<int> chronic_d(std::exp(-0.2 + 0.02 * (age - 50.0) + 0.2 * black + 0.4 * severity));
    const double chronic = chronic_d(rng);
    const double log_prior = 7.0 + 0.3 * chronic + 0.3 * severity + 0.5 * normal(rng) - 0.2 * black;
    std::poisson_distribution<int> rx_d(std::exp(0.5 + 0.2 * chronic));
    const double rx = rx_d(rng);
    x.row(ii) << age, female, black, chronic, log_prior, rx;

    log_cost[i] = 6.5 + 0.35 * chronic + 0.4 * (log_prior - 7.0) + 0.05 * rx + 0.6 * severity + 0.4 * normal(rng);
    const double risk = -1.6 + 0.45 * chronic + 0.015 * (age - 50.0) + 0.2 * black + 0.9 * severity;
    y1[i] = unif(rng) < 1.0 / (1.0 + std::exp(-risk)) ? 1 : 0;
    enroll_logit[i] = 0.5 * chronic + 0.2 * (log_prior - 7.0) + 0.1 * rx + 0.8 * severity + 0.3 * normal(rng);
  }

  // Status quo: intercept chosen so ~18% of the observational rows enroll.
  auto rate = [&](double c) {
    double s = 0.0;
    for (std::size_t i = n_fit; i < total; ++i) s += 1.0 / (1.0 + std::exp(-(c + enroll_logit[i])));
    return s / static_cast<double>(config.n);
  };
  double lo = -20.0, hi = 20.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) < 0.18 ? lo : hi) = mid;
  }
  const double intercept = 0.5 * (lo + hi);

  // Linear cost model fit on the first 40%.
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n_fit), p + 1);
  Eigen::VectorXd target(static_cast<Eigen::Index>(n_fit));
  for (std::size_t i = 0; i < n_fit; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    design(ii, 0) = 1.0;
    design.row(ii).tail(p) = x.row(ii);
    target[ii] = log_cost[i];
  }
  const Eigen::VectorXd beta = (design.transpose() * design).ldlt().solve(design.transpose() * target);

  std::vector<double> pred(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    const auto ii = static_cast<Eigen::Index>(n_fit + i);
    pred[i] = beta[0] + x.row(ii).dot(beta.tail(p));
  }
  const double threshold = quantile(pred, config.threshold_quantile);

  DatasetColumns cols;
  cols.x_names = {"x_age", "x_female", "x_black", "x_chronic", "x_log_prior_cost", "x_rx"};
  cols.x = x.bottomRows(static_cast<Eigen::Index>(config.n));
  cols.d.resize(config.n);
  cols.pi1.resize(config.n);
  cols.t = std::vector<std::uint8_t>(config.n);
  cols.y.resize(config.n);
  cols.group = std::vector<std::string>(config.n);
  cols.group_name = "group";

  std::vector<std::uint8_t> y1s(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    const std::size_t src = n_fit + i;
    const int d = unif(rng) < 1.0 / (1.0 + std::exp(-(intercept + enroll_logit[src]))) ? 1 : 0;
    const int t = pred[i] >= threshold ? 1 : 0;
    cols.d[i] = static_cast<std::uint8_t>(d);
    cols.pi1[i] = t;
    (*cols.t)[i] = static_cast<std::uint8_t>(t);
    cols.y[i] = d == 1 ? static_cast<std::int8_t>(y1[src]) : kMissing;
    const bool black = x(static_cast<Eigen::Index>(src), 2) > 0.5;
    const bool senior = x(static_cast<Eigen::Index>(src), 0) >= 65.0;
    (*cols.group)[i] = std::string(black ? "black" : "white") + (senior ? "_ge65" : "_lt65");
    y1s[i] = y1[src];
  }
  return OracleSample{ObservationalDataset(std::move(cols)), std::move(y1s), 0};
}

}  // namespace regret
