#pragma once

// L1-regularized logistic regression and its welfare-regularized variant.
//
//   standard:      min  C sum_i log(1 + exp(-y_i <theta, x_i>)) + lambda1 |theta|_1
//   in-processing: min  (the above) - lambda2 W(u~(theta))
//
// with u~_i = g_{y_i} tanh(kappa <theta, x_i>) + b_{y_i} standing in for the
// hard-label utility g_{y_i} yhat_i + b_{y_i}. The intercept (feature 0) is
// never penalized.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "swo/swf.hpp"

namespace swo {

/// Outcome utility u(y, yhat) = g_y yhat + b_y with labels in {+1, -1}.
struct UtilityParams {
  double g_pos = 0.25;
  double g_neg = -0.25;
  double b_pos = 0.5;
  double b_neg = 0.25;

  double slope(int y) const { return y == 1 ? g_pos : g_neg; }
  double intercept(int y) const { return y == 1 ? b_pos : b_neg; }

  /// Requires u(TP) > u(FN) and u(TN) > u(FP).
  void validate() const;
  /// max - min over the four outcomes.
  double scale() const;

  friend bool operator==(const UtilityParams&, const UtilityParams&) = default;
};

double outcome_utility(int y, int y_hat, const UtilityParams& params = {});

struct TrainConfig {
  double c = 1.0;
  double lambda1 = 1e-4;
  double lambda2 = 0.0;
  SwfSpec swf{SwfFamily::Utilitarian};
  double kappa = 5.0;
  std::size_t max_iter = 2000;
  /// Initial step is step_scale / L, L the Lipschitz estimate of the loss gradient.
  double step_scale = 1.0;
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
  UtilityParams utility{};

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct LinearModel {
  Eigen::VectorXd theta;
  double threshold = 0.5;
  std::vector<std::string> feature_names;
  TrainConfig config{};

  std::size_t dimension() const { return static_cast<std::size_t>(theta.size()); }
};

struct FitReport {
  std::vector<double> objective_trace;  // accepted iterates, starting at theta = 0
  std::size_t iterations = 0;
  bool converged = false;
};

/// Proximal gradient descent from theta = 0. Throws SingleClassData when one
/// label is missing and NonFiniteLoss if the objective diverges.
LinearModel train_standard(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const TrainConfig& config, FitReport* report = nullptr,
                           std::vector<std::string> feature_names = {});

/// Same optimizer with the smoothed welfare term. lambda2 = 0 takes exactly
/// the train_standard path.
LinearModel train_in_processing(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const TrainConfig& config, FitReport* report = nullptr,
                                std::vector<std::string> feature_names = {});

double predict_prob(const LinearModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
/// +1 iff predict_prob > threshold.
int classify(const LinearModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

struct ModelEvaluation {
  double accuracy = 0.0;
  std::vector<double> probabilities;
  std::vector<int> predictions;
  std::vector<double> utilities;
};

ModelEvaluation evaluate_model(const LinearModel& model, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, const UtilityParams& params = {});

// Pieces of the objective, exposed for gradient checks.
namespace objective {

double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& theta);
Eigen::VectorXd logistic_loss_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& theta);

/// Surrogate utilities u~_i.
Eigen::VectorXd smoothed_utilities(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& theta, double kappa,
                                   const UtilityParams& params);
/// W(u~(theta)); maximin is replaced by a softmin at temperature 0.01 * params.scale().
double smoothed_welfare(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& theta, const SwfSpec& swf, double kappa,
                        const UtilityParams& params);
Eigen::VectorXd smoothed_welfare_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& theta, const SwfSpec& swf,
                                          double kappa, const UtilityParams& params);

/// Full training objective.
double total(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
             const TrainConfig& config);

}  // namespace objective

/// Versioned text record; doubles are written round-trip exact.
std::string format_model(const LinearModel& model);
LinearModel parse_model(std::string_view text);

/// `key=value` list covering every TrainConfig field.
std::string format_train_config(const TrainConfig& config);
TrainConfig parse_train_config(std::string_view text);

}  // namespace swo
