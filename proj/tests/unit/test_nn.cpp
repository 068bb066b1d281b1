#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ginv/errors.hpp"
#include "ginv/nn.hpp"
#include "oracles.hpp"

using namespace ginv;

namespace {

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Central differences of loss() with respect to every entry of params.
double max_gradient_error(const std::vector<Parameter*>& params, const std::function<double()>& loss,
                          const std::function<void()>& analytic) {
  for (Parameter* p : params) p->zero_grad();
  analytic();
  double worst = 0.0;
  const double h = 1e-5;
  for (Parameter* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double orig = p->value(i);
      p->value(i) = orig + h;
      const double up = loss();
      p->value(i) = orig - h;
      const double down = loss();
      p->value(i) = orig;
      worst = std::max(worst, relative_error(p->grad(i), (up - down) / (2 * h)));
    }
  }
  return worst;
}

}  // namespace

TEST(Autodiff, ReluSumGradient) {
  Parameter x("x", (Mat(1, 2) << 1.0, -1.0).finished());
  Tape t;
  t.backward(t.sum(t.relu(t.param(x))));
  EXPECT_DOUBLE_EQ(x.grad(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(x.grad(0, 1), 0.0);
}

TEST(Autodiff, SoftmaxCrossEntropySymmetricGradient) {
  Parameter z("z", Mat::Zero(1, 2));
  Tape t;
  Var loss = t.softmax_cross_entropy(t.param(z), {0});
  EXPECT_NEAR(loss.scalar(), std::log(2.0), 1e-15);
  t.backward(loss);
  EXPECT_DOUBLE_EQ(z.grad(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(z.grad(0, 1), 0.5);
}

TEST(Autodiff, ShapeErrors) {
  Tape t;
  Var a = t.constant(Mat::Zero(2, 3));
  Var b = t.constant(Mat::Zero(2, 3));
  EXPECT_THROW(t.matmul(a, b), ShapeMismatch);
  EXPECT_THROW(t.add(a, t.constant(Mat::Zero(3, 3))), ShapeMismatch);
  EXPECT_THROW(t.softmax_cross_entropy(a, {0}), ShapeMismatch);
  EXPECT_THROW(t.backward(a), ShapeMismatch);
  EXPECT_THROW(t.slice_rows(a, 1, 2), ShapeMismatch);
}

TEST(Autodiff, EveryOpMatchesFiniteDifferences) {
  auto rng = RngStream::derive(4, {});
  auto random = [&](int r, int c) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
    return m;
  };
  Parameter a("a", random(4, 3)), b("b", random(3, 2)), bias("bias", random(1, 2)), c("c", random(4, 2));
  auto s = std::make_shared<SpMat>(4, 4);
  s->insert(0, 1) = 0.5;
  s->insert(2, 3) = -1.5;
  s->insert(3, 3) = 2.0;
  s->insert(1, 0) = 1.0;
  auto build = [&](Tape& t) {
    Var h = t.add(t.matmul(t.param(a), t.param(b)), t.param(bias));
    Var g = t.concat_cols(t.spmm(s, h), t.scale(t.param(c), 0.7));
    Var r = t.relu(t.sub(g, t.constant(Mat::Constant(4, 4, 0.05))));
    Var n1 = t.sum(t.row_l2_norms(t.slice_rows(g, 1, 2)));
    Var n2 = t.l2_norm(r);
    Var ce = t.softmax_cross_entropy(g, {0, 3, 2, 1});
    return t.add(t.add(ce, t.mean(r)), t.add(n1, t.scale(n2, 0.3)));
  };
  std::vector<Parameter*> params{&a, &b, &bias, &c};
  double err = max_gradient_error(
      params, [&] { Tape t; return build(t).scalar(); },
      [&] { Tape t; t.backward(build(t)); });
  EXPECT_LT(err, 1e-4);
}

TEST(Autodiff, TwoLayerMlpMatchesFiniteDifferences) {
  auto rng = RngStream::derive(5, {});
  Mlp mlp("mlp", {6, 8, 3}, rng);
  Mat x(10, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  std::vector<int> y{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  std::vector<Parameter*> params;
  mlp.collect(params);
  auto build = [&](Tape& t) { return t.softmax_cross_entropy(mlp.forward(t, t.constant(x)), y); };
  double err = max_gradient_error(
      params, [&] { Tape t; return build(t).scalar(); },
      [&] { Tape t; t.backward(build(t)); });
  EXPECT_LT(err, 1e-4);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Parameter p("p", (Mat(1, 2) << 1.0, 1.0).finished());
  p.grad = (Mat(1, 2) << 0.3, -2.0).finished();
  Adam adam(AdamOptions{0.1});
  adam.step({&p});
  EXPECT_NEAR(p.value(0, 0), 0.9, 1e-6);
  EXPECT_NEAR(p.value(0, 1), 1.1, 1e-6);
  EXPECT_EQ(p.grad(0, 0), 0.0);
}

TEST(Metrics, MatthewsCorrelation) {
  EXPECT_DOUBLE_EQ(matthews_corrcoef({{3, 1}, {1, 3}}), 0.5);
  EXPECT_DOUBLE_EQ(matthews_corrcoef({{4, 0}, {4, 0}}), 0.0);
  EXPECT_DOUBLE_EQ(matthews_corrcoef({{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}), 1.0);
  Mat logits(4, 2);
  logits << 1, 0, 0, 1, 2, 1, 0, 3;
  auto m = evaluate_logits(logits, {0, 1, 0, 1}, 2);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.mcc, 1.0);
}

TEST(Metrics, TiesGoToLowestClass) {
  Mat logits(2, 3);
  logits << 1, 1, 0, 0, 2, 2;
  EXPECT_EQ(predict(logits), (std::vector<int>{0, 1}));
}

namespace {

struct ToyTask {
  Mat x;
  std::vector<int> y_train, y_val;
};

ToyTask separable(int n, std::uint64_t seed) {
  auto rng = RngStream::derive(seed, {});
  ToyTask t;
  t.x.resize(2 * n, 4);
  for (int i = 0; i < 2 * n; ++i) {
    const int label = i % 2;
    for (int c = 0; c < 4; ++c) t.x(i, c) = rng.normal() * 0.3 + (c == label ? 2.0 : 0.0);
    (i < n ? t.y_train : t.y_val).push_back(label);
  }
  return t;
}

TrainResult run_toy(const ToyTask& task, Mlp& mlp, int epochs) {
  TrainProblem prob;
  mlp.collect(prob.params);
  prob.logits = [&](Tape& t) { return mlp.forward(t, t.constant(task.x)); };
  prob.train_labels = task.y_train;
  prob.val_labels = task.y_val;
  prob.num_classes = 2;
  return train(prob, TrainOptions{epochs, 0.01, 0.0, 3});
}

}  // namespace

TEST(Train, SeparableReachesFullTrainAccuracy) {
  auto task = separable(40, 1);
  auto rng = RngStream::derive(2, {});
  Mlp mlp("clf", {4, 2}, rng);
  auto result = run_toy(task, mlp, 200);
  double best_train = 0.0;
  for (const auto& r : result.history) best_train = std::max(best_train, r.train_accuracy);
  EXPECT_DOUBLE_EQ(best_train, 1.0);
  EXPECT_EQ(result.history.size(), 200u);
}

TEST(Train, EarlyStoppingRestoresBestEpochParameters) {
  auto task = separable(30, 9);
  // Overlapping classes so validation accuracy moves around.
  for (Eigen::Index i = 0; i < task.x.rows(); ++i) task.x.row(i) *= 0.15;
  auto rng_a = RngStream::derive(6, {});
  Mlp a("clf", {4, 5, 2}, rng_a);
  auto result = run_toy(task, a, 60);
  ASSERT_GE(result.best_epoch, 1);
  double best = -1.0;
  int first_best = 0;
  for (const auto& r : result.history)
    if (r.val_accuracy > best) best = r.val_accuracy, first_best = r.epoch;
  EXPECT_EQ(result.best_epoch, first_best);
  // Epoch e starts from the parameters after e - 1 updates.
  auto rng_b = RngStream::derive(6, {});
  Mlp b("clf", {4, 5, 2}, rng_b);
  std::vector<Parameter*> replay;
  b.collect(replay);
  Adam adam(AdamOptions{0.01});
  for (int e = 1; e < result.best_epoch; ++e) {
    Tape t;
    Var all = b.forward(t, t.constant(task.x));
    Var ce = t.softmax_cross_entropy(t.slice_rows(all, 0, static_cast<Eigen::Index>(task.y_train.size())),
                                     task.y_train);
    t.backward(ce);
    adam.step(replay);
  }
  std::vector<Parameter*> pa, pb;
  a.collect(pa);
  b.collect(pb);
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value) << pa[i]->name;
}

TEST(Train, DeterministicHistory) {
  auto task = separable(20, 3);
  auto r1 = RngStream::derive(8, {});
  auto r2 = RngStream::derive(8, {});
  Mlp a("clf", {4, 6, 2}, r1), b("clf", {4, 6, 2}, r2);
  auto ha = run_toy(task, a, 30).history;
  auto hb = run_toy(task, b, 30).history;
  ASSERT_EQ(ha.size(), hb.size());
  for (std::size_t i = 0; i < ha.size(); ++i) {
    EXPECT_EQ(ha[i].train_loss, hb[i].train_loss);
    EXPECT_EQ(ha[i].val_accuracy, hb[i].val_accuracy);
  }
}

TEST(Train, NonFiniteLossIsReported) {
  auto task = separable(10, 3);
  task.x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  auto rng = RngStream::derive(8, {});
  Mlp mlp("clf", {4, 2}, rng);
  EXPECT_THROW(run_toy(task, mlp, 5), NonFiniteLoss);
}

TEST(GinBaseline, PredictionsInvariantToRelabeling) {
  std::mt19937_64 gen(12);
  std::vector<Graph> graphs, relabeled;
  for (int i = 0; i < 5; ++i) {
    Graph g = oracle::random_graph(gen, 12, 0.3, 0);
    std::vector<VertexId> perm(g.n());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    graphs.push_back(g);
    relabeled.push_back(g.permuted(perm));
  }
  auto rng = RngStream::derive(1, {});
  GinBaseline model(1, 16, 2, 0, 3, rng);
  Tape t1, t2;
  Mat a = model.logits(t1, make_graph_batch(graphs, 0)).value();
  Mat b = model.logits(t2, make_graph_batch(relabeled, 0)).value();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(predict(a), predict(b));
}

TEST(GinBaseline, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(13);
  std::vector<Graph> graphs;
  for (int i = 0; i < 4; ++i) graphs.push_back(oracle::random_graph(gen, 7, 0.4, 2));
  auto batch = make_graph_batch(graphs, 2);
  auto rng = RngStream::derive(2, {});
  GinBaseline model(2, 5, 2, 1, 2, rng);
  std::vector<int> y{0, 1, 1, 0};
  auto build = [&](Tape& t) { return t.softmax_cross_entropy(model.logits(t, batch), y); };
  double err = max_gradient_error(
      model.parameters(), [&] { Tape t; return build(t).scalar(); },
      [&] { Tape t; t.backward(build(t)); });
  EXPECT_LT(err, 1e-4);
}

TEST(TrainConfig, GridAndParsing) {
  TrainConfig c;
  EXPECT_EQ(c.grid().size(), 3u * 4u * 2u * 2u);
  c.reduced_grid = true;
  EXPECT_EQ(c.grid().size(), 1u);
  auto j = nlohmann::json::parse(R"({"epochs": 10, "learning_rate": 0.05, "hidden": [8, 16], "seeds": 2})");
  auto p = parse_train_config(j);
  EXPECT_EQ(p.epochs, 10);
  EXPECT_EQ(p.learning_rates, std::vector<double>{0.05});
  EXPECT_EQ(p.hidden.size(), 2u);
  EXPECT_THROW(parse_train_config(nlohmann::json::parse(R"({"hidden": []})")), ConfigError);
  EXPECT_THROW(parse_train_config(nlohmann::json::parse(R"({"hiden": 3})")), ConfigError);
  auto back = parse_train_config(nlohmann::json::parse(train_config_to_json(p).dump()));
  EXPECT_EQ(train_config_to_json(back).dump(), train_config_to_json(p).dump());
}
