#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include "support.hpp"
#include "tad/errors.hpp"
#include "tad/regressor.hpp"

using namespace tad;
using tad::test::ScratchDir;

namespace {

std::vector<TrainingExample> random_examples(std::mt19937_64& rng, int n, int d, int traces,
                                             Eigen::VectorXd* truth = nullptr) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return gauss(rng); });
  if (truth) *truth = w;
  std::vector<TrainingExample> ex;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index j) {
      return 3.0 * gauss(rng) + static_cast<double>(j);
    });
    ex.push_back({x, w.dot(x) + 0.7 + 0.1 * gauss(rng), "tr" + std::to_string(i % traces),
                  2 + i / traces});
  }
  return ex;
}

}  // namespace

TEST_CASE("exactly determined system is reproduced") {
  std::vector<TrainingExample> ex{{Eigen::Vector2d(1, 0), 1.0, "a", 2},
                                  {Eigen::Vector2d(0, 1), 2.0, "b", 2}};
  FitOptions opt;
  opt.lambda = 0.0;
  opt.g_clip = {-10.0, 10.0};
  const auto m = fit_ridge(ex, opt);
  CHECK(m.response(ex[0].features) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.response(ex[1].features) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(predict_g(m, ex[1].features) == doctest::Approx(2.0).epsilon(1e-12));

  opt.g_clip = {0.0, 1.0};
  const auto clipped = fit_ridge(ex, opt);
  CHECK(predict_g(clipped, ex[0].features) == doctest::Approx(1.0));
  CHECK(predict_g(clipped, ex[1].features) == 1.0);
}

TEST_CASE("fit_ridge matches a dense normal-equation oracle") {
  std::mt19937_64 rng(21);
  const auto ex = random_examples(rng, 500, 20, 50);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (const auto& e : ex) {
    X.emplace_back(e.features.begin(), e.features.end());
    y.push_back(e.target);
  }
  FitOptions opt;
  opt.lambda = 0.1;
  const auto m = fit_ridge(ex, opt);
  const auto oracle = test::dense_ridge(X, y, 0.1);
  for (int j = 0; j < 20; ++j) CHECK(std::fabs(m.weights(j) - oracle.weights[j]) < 1e-8);
  CHECK(std::fabs(m.bias - oracle.bias) < 1e-8);
}

TEST_CASE("lambda = 0 equals ordinary least squares") {
  std::mt19937_64 rng(4);
  const auto ex = random_examples(rng, 200, 6, 20);
  const Eigen::MatrixXd X = design_matrix(ex);
  Eigen::VectorXd y(static_cast<Eigen::Index>(ex.size()));
  for (std::size_t i = 0; i < ex.size(); ++i) y(static_cast<Eigen::Index>(i)) = ex[i].target;
  // OLS on raw features with an intercept column via QR.
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A << Eigen::VectorXd::Ones(X.rows()), X;
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(y);

  const auto m = fit_ridge(ex, FitOptions{});
  // Standardized weight w_j corresponds to raw slope w_j / sd_j.
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    CHECK(std::fabs(m.weights(j) / m.feat_std(j) - beta(j + 1)) < 1e-8);
  }
  for (Eigen::Index i = 0; i < X.rows(); i += 17) {
    CHECK(std::fabs(m.response(X.row(i).transpose()) - A.row(i).dot(beta)) < 1e-8);
  }
}

TEST_CASE("constant column gets zero weight under a penalty") {
  std::mt19937_64 rng(8);
  auto ex = random_examples(rng, 100, 3, 10);
  for (auto& e : ex) e.features(1) = 0.3;
  FitOptions opt;
  opt.lambda = 0.01;
  const auto m = fit_ridge(ex, opt);
  CHECK(m.weights(1) == 0.0);
  CHECK(m.feat_std(1) == opt.std_floor);
  // Also at lambda = 0 the minimum-norm solution leaves it at zero.
  const auto m0 = fit_ridge(ex, FitOptions{});
  CHECK(std::fabs(m0.weights(1)) < 1e-12);
}

TEST_CASE("fit_ridge errors") {
  CHECK_THROWS_AS(fit_ridge({}, FitOptions{}), ValidationError);
  std::vector<TrainingExample> ex{{Eigen::Vector2d(1, 0), 1.0, "a", 2},
                                  {Eigen::Vector3d(0, 1, 2), 2.0, "b", 2}};
  CHECK_THROWS_AS(fit_ridge(ex, FitOptions{}), ValidationError);
  ex[1].features = Eigen::Vector2d(0, std::nan(""));
  CHECK_THROWS_AS(fit_ridge(ex, FitOptions{}), ValidationError);
  ex[1].features = Eigen::Vector2d(0, 1);
  ex[1].target = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(fit_ridge(ex, FitOptions{}), ValidationError);
}

TEST_CASE("predict_g") {
  TadModel m;
  m.weights = Eigen::VectorXd::Zero(3);
  m.feat_mean = Eigen::VectorXd::Zero(3);
  m.feat_std = Eigen::VectorXd::Ones(3);
  m.bias = 0.5;
  CHECK(predict_g(m, Eigen::Vector3d(9, -4, 2)) == 0.5);
  m.bias = 1.2;
  CHECK(predict_g(m, Eigen::Vector3d(0, 0, 0)) == 1.0);
  m.bias = -0.2;
  CHECK(predict_g(m, Eigen::Vector3d(0, 0, 0)) == 0.0);
  CHECK_THROWS_AS(predict_g(m, Eigen::Vector2d(0, 0)), ValidationError);
}

TEST_CASE("shrinkage is monotone over the default grid") {
  std::mt19937_64 rng(13);
  const auto ex = random_examples(rng, 300, 10, 30);
  std::vector<double> grid = kDefaultLambdaGrid;
  std::sort(grid.begin(), grid.end());
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    FitOptions opt;
    opt.lambda = lambda;
    const double norm = fit_ridge(ex, opt).weights.norm();
    CHECK(norm <= previous);
    previous = norm;
  }
}

TEST_CASE("fitting is bit-deterministic") {
  std::mt19937_64 rng(1);
  const auto ex = random_examples(rng, 250, 8, 25);
  FitOptions opt;
  opt.lambda = 0.01;
  CHECK(format_model(fit_ridge(ex, opt)) == format_model(fit_ridge(ex, opt)));
}

TEST_CASE("folds are assigned by trace") {
  std::mt19937_64 rng(2);
  const auto ex = random_examples(rng, 120, 3, 17);
  std::vector<std::string> ids;
  const auto fold = assign_folds(ex, 5, &ids);
  CHECK(ids.size() == 17);
  std::map<std::string, std::set<int>> folds_of;
  for (std::size_t i = 0; i < ex.size(); ++i) folds_of[ex[i].trace_id].insert(fold[i]);
  for (const auto& [id, f] : folds_of) CHECK(f.size() == 1);

  // Scorer sees each held-out trace exactly once per lambda, never one used in training.
  std::map<std::string, int> seen;
  const FoldScorer scorer = [&](const TadModel&, std::span<const std::string> heldout) {
    for (const auto& id : heldout) ++seen[id];
    return 0.0;
  };
  cross_validate(ex, std::vector<double>{1.0}, 5, scorer);
  CHECK(seen.size() == 17);
  for (const auto& [id, count] : seen) CHECK(count == 1);
}

TEST_CASE("cross_validate selection rules") {
  std::mt19937_64 rng(6);
  const auto ex = random_examples(rng, 100, 4, 20);
  const FoldScorer constant = [](const TadModel&, std::span<const std::string>) { return 0.3; };

  auto report = cross_validate(ex, kDefaultLambdaGrid, 5, constant);
  CHECK(report.grid.size() == 6);
  CHECK(report.mean_score.size() == 6);
  CHECK(report.folds == 5);
  CHECK(report.chosen_lambda == 0.0001);  // tie -> smallest

  report = cross_validate(ex, std::vector<double>{0.5}, 5, constant);
  CHECK(report.chosen_lambda == 0.5);

  // Scorer preferring a specific lambda.
  const FoldScorer likes_one = [](const TadModel& m, std::span<const std::string>) {
    return -std::fabs(std::log10(m.lambda));
  };
  report = cross_validate(ex, kDefaultLambdaGrid, 5, likes_one);
  CHECK(report.chosen_lambda == 1.0);

  CHECK_THROWS_AS(cross_validate(ex, kDefaultLambdaGrid, 1, constant), ValidationError);
  CHECK_THROWS_AS(cross_validate(ex, kDefaultLambdaGrid, 21, constant), ValidationError);
}

TEST_CASE("model file round trip") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1e3);
  ScratchDir dir;
  for (int rep = 0; rep < 25; ++rep) {
    TadModel m;
    const int d = 1 + rep % 9;
    m.weights = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return gauss(rng); });
    m.feat_mean = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return gauss(rng); });
    m.feat_std = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return 1e-8 + std::fabs(gauss(rng)); });
    m.bias = gauss(rng) * 1e-7 + 1.0 / 3.0;
    m.lambda = std::fabs(gauss(rng));
    m.feature_config = static_cast<FeatureConfig>(rep % 3);
    m.target_strategy = static_cast<TargetStrategy>(rep % 3);
    m.g_clip = {0.0, 1.0 - 1e-17 * rep};
    const auto path = dir.file("m" + std::to_string(rep) + ".json");
    save_model(m, path);
    const auto back = load_model(path);
    CHECK(back.weights == m.weights);
    CHECK(back.feat_mean == m.feat_mean);
    CHECK(back.feat_std == m.feat_std);
    CHECK(back.bias == m.bias);
    CHECK(back.lambda == m.lambda);
    CHECK(back.feature_config == m.feature_config);
    CHECK(back.target_strategy == m.target_strategy);
    CHECK(back.g_clip == m.g_clip);
  }
}

TEST_CASE("model file errors") {
  const std::string good =
      R"({"version":1,"lambda":0.1,"weights":[1.0],"bias":0.5,"feat_mean":[0.0],)"
      R"("feat_std":[1.0],"feature_config":"attn_probs","target_strategy":"binary","g_clip":[0,1]})";
  CHECK_NOTHROW(parse_model(good));
  try {
    parse_model(R"({"version":1,"lambda":0.1,"weights":[1.0],"bias":0.5,"feat_mean":[0.0],)"
                R"("feature_config":"attn_probs","target_strategy":"binary","g_clip":[0,1]})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("feat_std") != std::string::npos);
  }
  std::string v2 = good;
  v2.replace(v2.find("\"version\":1"), 11, "\"version\":2");
  CHECK_THROWS_AS(parse_model(v2), ParseError);
  CHECK_THROWS_AS(parse_model("{oops"), ParseError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), IoError);
}
