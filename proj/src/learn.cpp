#include "swo/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "swo/errors.hpp"
#include "swo/text.hpp"

namespace swo {

namespace {

// log(1 + exp(t)) without overflow
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_labels(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw DimensionMismatch("x and y have different row counts");
  if (x.cols() == 0) throw DimensionMismatch("design matrix has no columns");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 1.0) {
      pos = true;
    } else if (y(i) == -1.0) {
      neg = true;
    } else {
      throw InvalidProblem("labels must be +1 or -1");
    }
  }
  if (!pos || !neg) throw SingleClassData("training data needs both labels");
}

double l1_norm(const Eigen::VectorXd& theta) {
  return theta.size() > 1 ? theta.tail(theta.size() - 1).lpNorm<1>() : 0.0;
}

void soft_threshold(Eigen::VectorXd& theta, double amount) {
  for (Eigen::Index j = 1; j < theta.size(); ++j) {
    const double v = theta(j);
    theta(j) = v > amount ? v - amount : (v < -amount ? v + amount : 0.0);
  }
}

// largest eigenvalue of X^T X by power iteration
double gram_spectral_norm(const Eigen::MatrixXd& x) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(x.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd w = x.transpose() * (x * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(norm - lambda) <= 1e-12 * norm) return norm;
    lambda = norm;
  }
  return lambda;
}

Eigen::VectorXd smooth_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& theta, const TrainConfig& cfg) {
  Eigen::VectorXd g = cfg.c * objective::logistic_loss_gradient(x, y, theta);
  if (cfg.lambda2 != 0.0) {
    g -= cfg.lambda2 *
         objective::smoothed_welfare_gradient(x, y, theta, cfg.swf, cfg.kappa, cfg.utility);
  }
  return g;
}

double softmin_temperature(const UtilityParams& params) { return 0.01 * params.scale(); }

LinearModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TrainConfig& cfg,
                FitReport* report, std::vector<std::string> names) {
  cfg.validate();
  check_labels(x, y);
  if (!names.empty() && names.size() != static_cast<std::size_t>(x.cols())) {
    throw DimensionMismatch("feature name count differs from column count");
  }

  const double lipschitz = std::max(cfg.c * gram_spectral_norm(x) / 4.0, 1e-12);
  const double max_step = cfg.step_scale / lipschitz;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(x.cols());
  double value = objective::total(x, y, theta, cfg);
  if (!std::isfinite(value)) throw NonFiniteLoss("objective is not finite at theta = 0");

  FitReport local;
  local.objective_trace.push_back(value);
  double step = max_step;
  std::size_t quiet = 0;
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    ++local.iterations;
    const Eigen::VectorXd grad = smooth_gradient(x, y, theta, cfg);
    if (!grad.allFinite()) throw NonFiniteLoss("gradient is not finite");

    // halve the step until the objective does not increase
    step = std::min(max_step, 1.25 * step);
    Eigen::VectorXd candidate;
    double cand_value = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      candidate = theta - step * grad;
      soft_threshold(candidate, step * cfg.lambda1);
      cand_value = objective::total(x, y, candidate, cfg);
      if (std::isfinite(cand_value) && cand_value <= value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      local.converged = true;  // no descent step left at machine precision
      break;
    }
    const double decrease = value - cand_value;
    theta = std::move(candidate);
    value = cand_value;
    local.objective_trace.push_back(value);
    if (decrease <= cfg.tolerance * std::max(1.0, std::abs(value))) {
      if (++quiet >= 5) {
        local.converged = true;
        break;
      }
    } else {
      quiet = 0;
    }
  }
  if (!std::isfinite(value)) throw NonFiniteLoss("objective diverged");

  if (report) *report = std::move(local);
  LinearModel model;
  model.theta = std::move(theta);
  model.feature_names = std::move(names);
  model.config = cfg;
  return model;
}

}  // namespace

// ---------------------------------------------------------------------------

void UtilityParams::validate() const {
  const double tp = g_pos + b_pos, fn = -g_pos + b_pos;
  const double tn = -g_neg + b_neg, fp = g_neg + b_neg;
  if (!(tp > fn)) throw InvalidSpec("utility params: u(TP) must exceed u(FN)");
  if (!(tn > fp)) throw InvalidSpec("utility params: u(TN) must exceed u(FP)");
}

double UtilityParams::scale() const {
  const double outcomes[] = {g_pos + b_pos, -g_pos + b_pos, -g_neg + b_neg, g_neg + b_neg};
  const auto [lo, hi] = std::minmax_element(std::begin(outcomes), std::end(outcomes));
  return *hi - *lo;
}

double outcome_utility(int y, int y_hat, const UtilityParams& params) {
  if ((y != 1 && y != -1) || (y_hat != 1 && y_hat != -1)) {
    throw InvalidProblem("labels must be +1 or -1");
  }
  return params.slope(y) * y_hat + params.intercept(y);
}

void TrainConfig::validate() const {
  if (!(c > 0.0)) throw InvalidSpec("C must be > 0");
  if (!(lambda1 >= 0.0)) throw InvalidSpec("lambda1 must be >= 0");
  if (!(lambda2 >= 0.0)) throw InvalidSpec("lambda2 must be >= 0");
  if (!(kappa > 0.0)) throw InvalidSpec("kappa must be > 0");
  if (!(step_scale > 0.0)) throw InvalidSpec("step scale must be > 0");
  if (lambda2 > 0.0) {
    swf.validate();
    if (swf.family == SwfFamily::Leximax || swf.family == SwfFamily::KalaiSmorodinsky) {
      throw UnsupportedFamily("in-processing needs a scalar SWF with a supergradient");
    }
  }
  utility.validate();
}

// ---------------------------------------------------------------------------

namespace objective {

double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& theta) {
  const Eigen::VectorXd z = x * theta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += softplus(-y(i) * z(i));
  return s;
}

Eigen::VectorXd logistic_loss_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& theta) {
  const Eigen::VectorXd z = x * theta;
  Eigen::VectorXd w(z.size());
  // d/dz log(1 + exp(-y z)) = -y sigmoid(-y z)
  for (Eigen::Index i = 0; i < z.size(); ++i) w(i) = -y(i) * sigmoid(-y(i) * z(i));
  return x.transpose() * w;
}

Eigen::VectorXd smoothed_utilities(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& theta, double kappa,
                                   const UtilityParams& params) {
  const Eigen::VectorXd z = x * theta;
  Eigen::VectorXd u(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const int label = y(i) > 0 ? 1 : -1;
    u(i) = params.slope(label) * std::tanh(kappa * z(i)) + params.intercept(label);
  }
  return u;
}

double smoothed_welfare(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& theta, const SwfSpec& swf, double kappa,
                        const UtilityParams& params) {
  const Eigen::VectorXd u = smoothed_utilities(x, y, theta, kappa, params);
  if (swf.family == SwfFamily::Maximin) {
    const double t = softmin_temperature(params);
    const double lo = u.minCoeff();
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += std::exp(-(u(i) - lo) / t);
    return lo - t * std::log(s);
  }
  return evaluate(swf, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
}

Eigen::VectorXd smoothed_welfare_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& theta, const SwfSpec& swf,
                                          double kappa, const UtilityParams& params) {
  const Eigen::VectorXd z = x * theta;
  const Eigen::VectorXd u = smoothed_utilities(x, y, theta, kappa, params);
  Eigen::VectorXd dw_du(u.size());
  if (swf.family == SwfFamily::Maximin) {
    const double t = softmin_temperature(params);
    const double lo = u.minCoeff();
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      dw_du(i) = std::exp(-(u(i) - lo) / t);
      s += dw_du(i);
    }
    dw_du /= s;
  } else {
    const auto g = welfare_gradient(swf, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
    for (Eigen::Index i = 0; i < u.size(); ++i) dw_du(i) = g[static_cast<std::size_t>(i)];
  }
  // du_i/dz_i = g_{y_i} kappa (1 - tanh^2(kappa z_i))
  Eigen::VectorXd w(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const int label = y(i) > 0 ? 1 : -1;
    const double th = std::tanh(kappa * z(i));
    w(i) = dw_du(i) * params.slope(label) * kappa * (1.0 - th * th);
  }
  return x.transpose() * w;
}

double total(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
             const TrainConfig& config) {
  double v = config.c * logistic_loss(x, y, theta) + config.lambda1 * l1_norm(theta);
  if (config.lambda2 != 0.0) {
    v -= config.lambda2 * smoothed_welfare(x, y, theta, config.swf, config.kappa, config.utility);
  }
  return v;
}

}  // namespace objective

// ---------------------------------------------------------------------------

LinearModel train_standard(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const TrainConfig& config, FitReport* report,
                           std::vector<std::string> feature_names) {
  TrainConfig cfg = config;
  cfg.lambda2 = 0.0;
  return fit(x, y, cfg, report, std::move(feature_names));
}

LinearModel train_in_processing(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const TrainConfig& config, FitReport* report,
                                std::vector<std::string> feature_names) {
  if (config.lambda2 == 0.0) return train_standard(x, y, config, report, std::move(feature_names));
  return fit(x, y, config, report, std::move(feature_names));
}

double predict_prob(const LinearModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.theta.size()) {
    throw DimensionMismatch("feature vector has " + std::to_string(x.size()) + " entries, model has " +
                            std::to_string(model.theta.size()));
  }
  return sigmoid(model.theta.dot(x));
}

int classify(const LinearModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return predict_prob(model, x) > model.threshold ? 1 : -1;
}

ModelEvaluation evaluate_model(const LinearModel& model, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, const UtilityParams& params) {
  if (x.rows() != y.size()) throw DimensionMismatch("x and y have different row counts");
  ModelEvaluation ev;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd row = x.row(i).transpose();
    const double prob = predict_prob(model, row);
    const int pred = prob > model.threshold ? 1 : -1;
    const int label = y(i) > 0 ? 1 : -1;
    ev.probabilities.push_back(prob);
    ev.predictions.push_back(pred);
    ev.utilities.push_back(outcome_utility(label, pred, params));
    correct += pred == label;
  }
  ev.accuracy = x.rows() ? static_cast<double>(correct) / static_cast<double>(x.rows()) : 0.0;
  return ev;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
constexpr std::string_view kModelMagic = "swo-linear-model v1";
}

std::string format_train_config(const TrainConfig& c) {
  using text::format_double;
  std::string out;
  out += "c=" + format_double(c.c);
  out += " lambda1=" + format_double(c.lambda1);
  out += " lambda2=" + format_double(c.lambda2);
  out += " swf=" + c.swf.to_string();
  out += " kappa=" + format_double(c.kappa);
  out += " max_iter=" + std::to_string(c.max_iter);
  out += " step_scale=" + format_double(c.step_scale);
  out += " tolerance=" + format_double(c.tolerance);
  out += " seed=" + std::to_string(c.seed);
  out += " g_pos=" + format_double(c.utility.g_pos);
  out += " g_neg=" + format_double(c.utility.g_neg);
  out += " b_pos=" + format_double(c.utility.b_pos);
  out += " b_neg=" + format_double(c.utility.b_neg);
  return out;
}

TrainConfig parse_train_config(std::string_view content) {
  TrainConfig c;
  for (auto item : text::split_whitespace(content)) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("train config: expected key=value, got '" + std::string(item) + "'");
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    try {
      if (key == "c") c.c = text::parse_double(value);
      else if (key == "lambda1") c.lambda1 = text::parse_double(value);
      else if (key == "lambda2") c.lambda2 = text::parse_double(value);
      else if (key == "swf") c.swf = SwfSpec::parse(value);
      else if (key == "kappa") c.kappa = text::parse_double(value);
      else if (key == "max_iter") c.max_iter = static_cast<std::size_t>(text::parse_int(value));
      else if (key == "step_scale") c.step_scale = text::parse_double(value);
      else if (key == "tolerance") c.tolerance = text::parse_double(value);
      else if (key == "seed") c.seed = std::stoull(std::string(value));
      else if (key == "g_pos") c.utility.g_pos = text::parse_double(value);
      else if (key == "g_neg") c.utility.g_neg = text::parse_double(value);
      else if (key == "b_pos") c.utility.b_pos = text::parse_double(value);
      else if (key == "b_neg") c.utility.b_neg = text::parse_double(value);
      else throw ConfigError("train config: unknown key '" + std::string(key) + "'");
    } catch (const std::invalid_argument& e) {
      throw ConfigError("train config: " + std::string(e.what()));
    }
  }
  return c;
}

std::string format_model(const LinearModel& model) {
  std::ostringstream os;
  os << kModelMagic << '\n';
  os << "threshold " << text::format_double(model.threshold) << '\n';
  os << "labels +1 -1\n";
  os << "config " << format_train_config(model.config) << '\n';
  os << "features " << model.theta.size() << '\n';
  for (Eigen::Index j = 0; j < model.theta.size(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const std::string name = idx < model.feature_names.size() ? model.feature_names[idx]
                                                              : "f" + std::to_string(j);
    os << name << ' ' << text::format_double(model.theta(j)) << '\n';
  }
  return os.str();
}

LinearModel parse_model(std::string_view content) {
  const auto lines = text::split(content, '\n');
  if (lines.empty() || text::trim(lines[0]) != kModelMagic) {
    throw ConfigError("model: missing '" + std::string(kModelMagic) + "' header");
  }
  LinearModel model;
  std::size_t i = 1;
  std::size_t count = 0;
  bool have_features = false;
  try {
    for (; i < lines.size() && !have_features; ++i) {
      const auto line = text::trim(lines[i]);
      if (line.empty()) continue;
      const auto space = line.find(' ');
      const auto key = line.substr(0, space);
      const auto rest = space == std::string_view::npos ? std::string_view{} : line.substr(space + 1);
      if (key == "threshold") {
        model.threshold = text::parse_double(rest);
      } else if (key == "labels") {
        if (text::trim(rest) != "+1 -1") throw ConfigError("model: unsupported label convention");
      } else if (key == "config") {
        model.config = parse_train_config(rest);
      } else if (key == "features") {
        count = static_cast<std::size_t>(text::parse_int(rest));
        have_features = true;
      } else {
        throw ConfigError("model: unexpected key '" + std::string(key) + "'");
      }
    }
    if (!have_features) throw ConfigError("model: missing features block");
    model.theta.resize(static_cast<Eigen::Index>(count));
    std::size_t j = 0;
    for (; i < lines.size() && j < count; ++i) {
      const auto line = text::trim(lines[i]);
      if (line.empty()) continue;
      const auto space = line.rfind(' ');
      if (space == std::string_view::npos) throw ConfigError("model: bad feature line");
      model.feature_names.emplace_back(line.substr(0, space));
      model.theta(static_cast<Eigen::Index>(j++)) = text::parse_double(line.substr(space + 1));
    }
    if (j != count) throw ConfigError("model: expected " + std::to_string(count) + " weights");
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model: " + std::string(e.what()));
  }
  return model;
}

}  // namespace swo
