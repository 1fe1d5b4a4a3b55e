#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tad/targets.hpp"

namespace tad {

// Fitted dependency model G: standardized linear response clipped to g_clip.
struct TadModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double lambda = 0.0;
  Eigen::VectorXd feat_mean;
  Eigen::VectorXd feat_std;
  FeatureConfig feature_config = FeatureConfig::AttnProbs;
  TargetStrategy target_strategy = TargetStrategy::Binary;
  std::pair<double, double> g_clip{0.0, 1.0};

  Eigen::Index dimension() const { return weights.size(); }

  // Unclipped linear response.
  double response(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

void validate(const TadModel& model);

struct FitOptions {
  double lambda = 0.0;
  double std_floor = 1e-8;
  FeatureConfig feature_config = FeatureConfig::AttnProbs;
  TargetStrategy target_strategy = TargetStrategy::Binary;
  std::pair<double, double> g_clip{0.0, 1.0};
};

// Stacks example features into a row-major design matrix.
Eigen::MatrixXd design_matrix(std::span<const TrainingExample> examples);

TadModel fit_ridge(std::span<const TrainingExample> examples, const FitOptions& options);

double predict_g(const TadModel& model, const Eigen::Ref<const Eigen::VectorXd>& features);

struct CvReport {
  std::vector<double> grid;
  std::vector<double> mean_score;  // per grid entry, averaged over folds
  std::vector<std::vector<double>> fold_scores;
  double chosen_lambda = 0.0;
  int folds = 0;
};

// Scores a candidate model on the held-out trace ids of one fold.
using FoldScorer =
    std::function<double(const TadModel& model, std::span<const std::string> heldout_ids)>;

// Trace ids in first-appearance order, assigned to folds round-robin.
std::vector<int> assign_folds(std::span<const TrainingExample> examples, int folds,
                              std::vector<std::string>* ordered_ids = nullptr);

// k-fold selection of lambda. Folds split by trace id; the lambda with the
// highest mean score wins, ties going to the smallest lambda.
CvReport cross_validate(std::span<const TrainingExample> examples, std::span<const double> grid,
                        int folds, const FoldScorer& scorer, FitOptions base = {});

// Default L2 grid.
inline const std::vector<double> kDefaultLambdaGrid{10.0, 1.0, 0.1, 0.01, 0.001, 0.0001};

std::string format_model(const TadModel& model);
TadModel parse_model(const std::string& text);

void save_model(const TadModel& model, const std::string& path, const CvReport* cv = nullptr);
TadModel load_model(const std::string& path);

}  // namespace tad
