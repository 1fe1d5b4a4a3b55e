#include "tad/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tad/errors.hpp"
#include "tad/io.hpp"
#include "tad/ridge.hpp"

namespace tad {

using nlohmann::json;

namespace {

constexpr int kModelVersion = 1;

}  // namespace

double TadModel::response(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return bias + ((x.array() - feat_mean.array()) / feat_std.array()).matrix().dot(weights);
}

void validate(const TadModel& m) {
  if (m.feat_mean.size() != m.weights.size() || m.feat_std.size() != m.weights.size()) {
    throw ValidationError("model: weights, feat_mean and feat_std lengths differ");
  }
  if (!(m.lambda >= 0.0)) throw ValidationError("model: lambda must be >= 0");
  if (!((m.feat_std.array() > 0.0).all())) {
    throw ValidationError("model: feat_std entries must be positive");
  }
  if (!(m.g_clip.first <= m.g_clip.second)) {
    throw ValidationError("model: g_clip lower bound exceeds upper bound");
  }
  if (!m.weights.allFinite() || !m.feat_mean.allFinite() || !m.feat_std.allFinite() ||
      !std::isfinite(m.bias)) {
    throw ValidationError("model: non-finite parameter");
  }
}

Eigen::MatrixXd design_matrix(std::span<const TrainingExample> examples) {
  if (examples.empty()) return {};
  const Eigen::Index d = examples.front().features.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(examples.size()), d);
  for (std::size_t r = 0; r < examples.size(); ++r) {
    X.row(static_cast<Eigen::Index>(r)) = examples[r].features.transpose();
  }
  return X;
}

TadModel fit_ridge(std::span<const TrainingExample> examples, const FitOptions& opt) {
  if (examples.empty()) throw ValidationError("fit_ridge: no training examples");
  if (!(opt.lambda >= 0.0)) throw ValidationError("fit_ridge: lambda must be >= 0");
  if (!(opt.std_floor > 0.0)) throw ValidationError("fit_ridge: std_floor must be > 0");
  const Eigen::Index d = examples.front().features.size();
  Eigen::VectorXd y(static_cast<Eigen::Index>(examples.size()));
  for (std::size_t r = 0; r < examples.size(); ++r) {
    const auto& e = examples[r];
    if (e.features.size() != d) {
      throw ValidationError("fit_ridge: example " + std::to_string(r) + " (trace '" +
                            e.trace_id + "') has feature length " +
                            std::to_string(e.features.size()) + ", expected " +
                            std::to_string(d));
    }
    if (!e.features.allFinite() || !std::isfinite(e.target)) {
      throw ValidationError("fit_ridge: non-finite value in example " + std::to_string(r) +
                            " (trace '" + e.trace_id + "')");
    }
    y(static_cast<Eigen::Index>(r)) = e.target;
  }
  const Eigen::MatrixXd X = design_matrix(examples);
  const auto sol = ridge_fit(X, y, opt.lambda, opt.std_floor);

  TadModel m;
  m.weights = sol.weights;
  m.bias = sol.bias;
  m.lambda = opt.lambda;
  m.feat_mean = sol.mean;
  m.feat_std = sol.scale;
  m.feature_config = opt.feature_config;
  m.target_strategy = opt.target_strategy;
  m.g_clip = opt.g_clip;
  return m;
}

double predict_g(const TadModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.dimension()) {
    throw ValidationError("predict_g: feature length " + std::to_string(x.size()) +
                          " does not match model dimension " +
                          std::to_string(model.dimension()));
  }
  return std::clamp(model.response(x), model.g_clip.first, model.g_clip.second);
}

std::vector<int> assign_folds(std::span<const TrainingExample> examples, int folds,
                              std::vector<std::string>* ordered_ids) {
  std::map<std::string, int> fold_of;
  std::vector<std::string> ids;
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    auto [it, inserted] = fold_of.emplace(e.trace_id, 0);
    if (inserted) {
      it->second = static_cast<int>(ids.size() % static_cast<std::size_t>(folds));
      ids.push_back(e.trace_id);
    }
    out.push_back(it->second);
  }
  if (ordered_ids) *ordered_ids = std::move(ids);
  return out;
}

CvReport cross_validate(std::span<const TrainingExample> examples, std::span<const double> grid,
                        int folds, const FoldScorer& scorer, FitOptions base) {
  if (folds < 2) throw ValidationError("cross_validate: folds must be >= 2");
  if (grid.empty()) throw ValidationError("cross_validate: empty lambda grid");
  std::vector<std::string> ids;
  const auto fold = assign_folds(examples, folds, &ids);
  if (ids.size() < static_cast<std::size_t>(folds)) {
    throw ValidationError("cross_validate: " + std::to_string(ids.size()) +
                          " traces cannot fill " + std::to_string(folds) + " folds");
  }

  std::vector<std::vector<TrainingExample>> train(folds);
  std::vector<std::vector<std::string>> heldout(folds);
  for (std::size_t r = 0; r < examples.size(); ++r) {
    for (int f = 0; f < folds; ++f) {
      if (fold[r] != f) train[f].push_back(examples[r]);
    }
  }
  for (std::size_t k = 0; k < ids.size(); ++k) {
    heldout[k % static_cast<std::size_t>(folds)].push_back(ids[k]);
  }

  CvReport report;
  report.grid.assign(grid.begin(), grid.end());
  report.folds = folds;
  for (double lambda : grid) {
    base.lambda = lambda;
    std::vector<double> scores;
    for (int f = 0; f < folds; ++f) {
      const TadModel model = fit_ridge(train[f], base);
      scores.push_back(scorer(model, heldout[f]));
    }
    double sum = 0.0;
    for (double s : scores) sum += s;
    report.mean_score.push_back(sum / folds);
    report.fold_scores.push_back(std::move(scores));
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < report.grid.size(); ++k) {
    const double a = report.mean_score[k], b = report.mean_score[best];
    if (a > b || (a == b && report.grid[k] < report.grid[best])) best = k;
  }
  report.chosen_lambda = report.grid[best];
  return report;
}

namespace {

json model_json(const TadModel& m) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); };
  return json{{"version", kModelVersion},
              {"lambda", m.lambda},
              {"weights", vec(m.weights)},
              {"bias", m.bias},
              {"feat_mean", vec(m.feat_mean)},
              {"feat_std", vec(m.feat_std)},
              {"feature_config", to_string(m.feature_config)},
              {"target_strategy", to_string(m.target_strategy)},
              {"g_clip", {m.g_clip.first, m.g_clip.second}}};
}

template <typename T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("model file: missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("model file: field '") + key + "' has the wrong type");
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string format_model(const TadModel& m) { return model_json(m).dump() + "\n"; }

TadModel parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("model file: record is not an object");
  const int version = field<int>(j, "version");
  if (version != kModelVersion) {
    throw ParseError("model file: unsupported version " + std::to_string(version));
  }
  TadModel m;
  m.lambda = field<double>(j, "lambda");
  m.weights = to_vector(field<std::vector<double>>(j, "weights"));
  m.bias = field<double>(j, "bias");
  m.feat_mean = to_vector(field<std::vector<double>>(j, "feat_mean"));
  m.feat_std = to_vector(field<std::vector<double>>(j, "feat_std"));
  try {
    m.feature_config = parse_feature_config(field<std::string>(j, "feature_config"));
    m.target_strategy = parse_target_strategy(field<std::string>(j, "target_strategy"));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  const auto clip = field<std::vector<double>>(j, "g_clip");
  if (clip.size() != 2) throw ParseError("model file: field 'g_clip' must have two entries");
  m.g_clip = {clip[0], clip[1]};
  try {
    validate(m);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  return m;
}

void save_model(const TadModel& model, const std::string& path, const CvReport* cv) {
  validate(model);
  json j = model_json(model);
  if (cv) {
    j["cv"] = {{"grid", cv->grid},
               {"mean_score", cv->mean_score},
               {"folds", cv->folds},
               {"chosen_lambda", cv->chosen_lambda}};
  }
  io::write_file_atomic(path, j.dump() + "\n");
}

TadModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace tad
