#include "dcc/gradsuite.hpp"

#include <random>

#include "dcc/coattention.hpp"
#include "dcc/comparator.hpp"
#include "dcc/model.hpp"
#include "dcc/similarity.hpp"
#include "dcc/tape.hpp"

namespace dcc {

namespace {

Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng, double lo,
                     double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t = Tensor::zeros(std::move(shape));
  for (Eigen::Index i = 0; i < t.v.size(); ++i) t.v[i] = dist(rng);
  return t;
}

// Scalar probe of an op: loss = sum(out * w) for fixed random weights, so the
// whole Jacobian is exercised.
using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

double check_builder(const Builder& build, const std::vector<Tensor>& point,
                     std::mt19937_64& rng, double eps, bool corrupt) {
  Eigen::ArrayXd w;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& p : point) leaves.push_back(tape.leaf(p));
    Var out = build(tape, leaves);
    w = Eigen::ArrayXd::NullaryExpr(
        static_cast<Eigen::Index>(tape.value(out).size()),
        [&](Eigen::Index) { return std::uniform_real_distribution<double>(
                                -1.0, 1.0)(rng); });
  }
  auto f = [&](const std::vector<Tensor>& pt) {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& p : pt) leaves.push_back(tape.leaf(p));
    Var out = build(tape, leaves);
    return (tape.value(out).v * w).sum();
  };
  std::vector<Eigen::ArrayXd> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& p : point) leaves.push_back(tape.leaf(p));
    Var out = build(tape, leaves);
    Var loss = sum_all(
        tape, mul(tape, out, tape.constant(Tensor(tape.value(out).shape, w))));
    tape.backward(loss);
    for (Var l : leaves) analytic.push_back(tape.grad(l));
  }
  if (corrupt && !analytic.empty() && analytic[0].size() > 0)
    analytic[0][0] += 1.0;
  return fd_check(f, point, analytic, eps).max_rel_error;
}

struct SuiteContext {
  std::vector<BlockReport>& out;
  std::string only;
  bool corrupt;
  double eps;
  std::mt19937_64 rng{424242};

  void block(const std::string& name, double tol,
             const std::function<double(std::mt19937_64&)>& run) {
    if (!only.empty() && name.find(only) == std::string::npos) return;
    BlockReport r;
    r.name = name;
    r.tolerance = tol;
    r.max_rel_error = run(rng);
    r.pass = r.max_rel_error < tol;
    out.push_back(r);
  }
};

ModelConfig tiny_config() {
  ModelConfig mc;
  mc.classes = 3;
  mc.encoder.input_side = 8;
  mc.encoder.stages = {{StemStage::Conv, 2, 2}, {StemStage::Pool, 0, 1}};
  mc.comparator.hidden = 3;
  mc.comparator.glimpses = 1;
  mc.comparator.dropout = 0.0;
  mc.comparator.glimpse.K = 2;
  mc.encoder.derive_output();  // 2 channels, M = 2
  return mc;
}

double check_model(DccModel& model, const Episode& ep, double eps,
                   bool corrupt) {
  std::mt19937_64 dummy(0);
  std::vector<Tensor> point;
  for (const auto& name : model.params().names())
    point.push_back(model.params().at(name));
  auto load = [&](const std::vector<Tensor>& pt) {
    std::size_t i = 0;
    for (const auto& name : model.params().names())
      model.params().at(name).v = pt[i++].v;
  };
  model.params().zero_grads();
  EpisodeResult er = model.episode_loss(ep, /*training=*/false, dummy, true);
  (void)er;
  std::vector<Eigen::ArrayXd> analytic;
  for (const auto& name : model.params().names())
    analytic.push_back(model.params().grad(name));
  if (corrupt) analytic[0][0] += 1.0;
  auto f = [&](const std::vector<Tensor>& pt) {
    load(pt);
    std::mt19937_64 r2(0);
    return model.episode_loss(ep, false, r2, false).loss;
  };
  double err = fd_check(f, point, analytic, eps).max_rel_error;
  load(point);
  return err;
}

}  // namespace

std::vector<BlockReport> run_gradient_suite(double eps, const std::string& only,
                                            bool corrupt) {
  std::vector<BlockReport> reports;
  SuiteContext ctx{reports, only, corrupt, eps};
  const double kOpTol = 1e-4;

  auto op_block = [&](const std::string& name, Builder build,
                      std::vector<Tensor> point) {
    ctx.block("op." + name, kOpTol, [&](std::mt19937_64& rng) {
      return check_builder(build, point, rng, ctx.eps, ctx.corrupt);
    });
  };

  auto& rng = ctx.rng;
  auto rnd = [&](std::vector<int> s, double lo = -1.0, double hi = 1.0) {
    return random_tensor(std::move(s), rng, lo, hi);
  };

  op_block("matmul",
           [](Tape& t, const std::vector<Var>& v) {
             return matmul(t, v[0], v[1]);
           },
           {rnd({3, 4}), rnd({4, 2})});
  op_block("softmax_rows",
           [](Tape& t, const std::vector<Var>& v) {
             return softmax_rows(t, v[0]);
           },
           {rnd({3, 5})});
  op_block("add",
           [](Tape& t, const std::vector<Var>& v) { return add(t, v[0], v[1]); },
           {rnd({3, 3}), rnd({3, 3})});
  op_block("sub",
           [](Tape& t, const std::vector<Var>& v) { return sub(t, v[0], v[1]); },
           {rnd({4}), rnd({4})});
  op_block("mul",
           [](Tape& t, const std::vector<Var>& v) { return mul(t, v[0], v[1]); },
           {rnd({3, 3}), rnd({3, 3})});
  op_block("div",
           [](Tape& t, const std::vector<Var>& v) { return div(t, v[0], v[1]); },
           {rnd({3, 3}), rnd({3, 3}, 0.5, 2.0)});
  op_block("scale",
           [](Tape& t, const std::vector<Var>& v) { return scale(t, v[0], 2.5); },
           {rnd({4})});
  op_block("tanh",
           [](Tape& t, const std::vector<Var>& v) { return tanh_op(t, v[0]); },
           {rnd({5})});
  op_block("sigmoid",
           [](Tape& t, const std::vector<Var>& v) { return sigmoid(t, v[0]); },
           {rnd({5})});
  op_block("exp",
           [](Tape& t, const std::vector<Var>& v) { return exp_op(t, v[0]); },
           {rnd({5})});
  op_block("log",
           [](Tape& t, const std::vector<Var>& v) { return log_op(t, v[0]); },
           {rnd({5}, 0.2, 2.0)});
  op_block("abs",
           [](Tape& t, const std::vector<Var>& v) { return abs_op(t, v[0]); },
           {rnd({5}, 0.3, 1.0)});
  op_block("reciprocal",
           [](Tape& t, const std::vector<Var>& v) {
             return reciprocal(t, v[0]);
           },
           {rnd({5}, 0.5, 2.0)});
  op_block("clamp_min",
           [](Tape& t, const std::vector<Var>& v) {
             return clamp_min(t, v[0], 0.0);
           },
           {rnd({5}, 0.2, 1.0)});
  op_block("transpose",
           [](Tape& t, const std::vector<Var>& v) { return transpose(t, v[0]); },
           {rnd({3, 5})});
  op_block("reshape",
           [](Tape& t, const std::vector<Var>& v) {
             return reshape(t, v[0], {5, 3});
           },
           {rnd({3, 5})});
  op_block("concat",
           [](Tape& t, const std::vector<Var>& v) {
             return concat(t, {v[0], v[1]});
           },
           {rnd({3}), rnd({2, 2})});
  op_block("row_of",
           [](Tape& t, const std::vector<Var>& v) { return row_of(t, v[0], 1); },
           {rnd({3, 4})});
  op_block("select",
           [](Tape& t, const std::vector<Var>& v) { return select(t, v[0], 2); },
           {rnd({5})});
  op_block("mul_scalar",
           [](Tape& t, const std::vector<Var>& v) {
             return mul_scalar(t, v[0], v[1]);
           },
           {rnd({3, 3}), rnd({1})});
  op_block("div_scalar",
           [](Tape& t, const std::vector<Var>& v) {
             return div_scalar(t, v[0], v[1]);
           },
           {rnd({3, 3}), rnd({1}, 0.5, 2.0)});
  op_block("scalar_axpy",
           [](Tape& t, const std::vector<Var>& v) {
             return scalar_axpy(t, Tensor::vec({-1.5, -0.5, 0.5, 1.5}), v[0],
                                v[1]);
           },
           {rnd({1}), rnd({1})});
  op_block("sub_outer",
           [](Tape& t, const std::vector<Var>& v) {
             return sub_outer(t, Tensor::vec({0, 1, 2, 3, 4}), v[0]);
           },
           {rnd({3})});
  op_block("row_sum",
           [](Tape& t, const std::vector<Var>& v) { return row_sum(t, v[0]); },
           {rnd({3, 4})});
  op_block("col_sum",
           [](Tape& t, const std::vector<Var>& v) { return col_sum(t, v[0]); },
           {rnd({3, 4})});
  op_block("sum_all",
           [](Tape& t, const std::vector<Var>& v) { return sum_all(t, v[0]); },
           {rnd({3, 4})});
  op_block("normalize_rows",
           [](Tape& t, const std::vector<Var>& v) {
             return normalize_rows(t, v[0]);
           },
           {rnd({3, 4}, 0.2, 1.0)});
  op_block("unfold",
           [](Tape& t, const std::vector<Var>& v) {
             return unfold(t, v[0], 3, 2, 1);
           },
           {rnd({2, 5, 5})});
  op_block("avgpool2",
           [](Tape& t, const std::vector<Var>& v) { return avgpool2(t, v[0]); },
           {rnd({2, 4, 4})});
  op_block("spp_max",
           [](Tape& t, const std::vector<Var>& v) {
             return spp_max(t, v[0], 3);
           },
           {rnd({2, 9})});

  // co-attention: scalar of the summaries w.r.t. W_L, Q_a, Q_b
  ctx.block("coattention.wl", kOpTol, [&](std::mt19937_64& r) {
    std::vector<Tensor> point = {random_tensor({2, 2}, r, -1, 1),
                                 random_tensor({2, 9}, r, -1, 1),
                                 random_tensor({2, 9}, r, -1, 1)};
    Builder build = [](Tape& t, const std::vector<Var>& v) {
      FeatureVar qa{2, 3, v[1]}, qb{2, 3, v[2]};
      CoAttentionVars co = co_attend(t, qa, qb, v[0]);
      return concat(t, {co.Z_a, co.Z_b});
    };
    return check_builder(build, point, r, ctx.eps, ctx.corrupt);
  });

  // glimpse read: scalar of G_t w.r.t. raw vector and summary, away from the
  // |delta^| kink at 0
  ctx.block("glimpse", kOpTol, [&](std::mt19937_64& r) {
    std::vector<Tensor> point = {Tensor::vec({0.2, -0.3, 0.7}),
                                 random_tensor({2, 9}, r, -1, 1)};
    GlimpseConfig cfg;
    Builder build = [cfg](Tape& t, const std::vector<Var>& v) {
      GlimpseVars p = unpack_glimpse(t, v[0], 3, 3, cfg.K);
      FilterbankVars fb = filterbanks(t, p, cfg);
      return extract_glimpse(t, p, fb, v[1], 2, 3);
    };
    return check_builder(build, point, r, ctx.eps, ctx.corrupt);
  });

  // comparator: scalar of h_T w.r.t. every parameter and both summaries
  ctx.block("comparator", kOpTol, [&](std::mt19937_64& r) {
    ComparatorConfig cfg;
    cfg.hidden = 3;
    cfg.glimpses = 2;
    cfg.dropout = 0.0;
    ParamStore store;
    std::mt19937_64 init(7);
    init_comparator_params(cfg, 2, store, init);
    std::vector<Tensor> point;
    for (const auto& n : store.names()) point.push_back(store.at(n));
    point.push_back(random_tensor({2, 4}, r, -1, 1));  // Z_a, M=2
    point.push_back(random_tensor({2, 4}, r, -1, 1));  // Z_b
    auto names = store.names();
    auto run = [&](const std::vector<Tensor>& pt, std::vector<Eigen::ArrayXd>* grads) {
      std::size_t i = 0;
      for (const auto& n : names) store.at(n).v = pt[i++].v;
      Tape tape;
      ParamBinding binding(tape, store);
      Var za = tape.leaf(pt[names.size()]);
      Var zb = tape.leaf(pt[names.size() + 1]);
      CompareResult res = compare(tape, za, zb, cfg, 2, 2, binding);
      Var loss = sum_all(tape, tanh_op(tape, res.h_final));
      if (grads) {
        store.zero_grads();
        tape.backward(loss);
        binding.collect_grads();
        grads->clear();
        for (const auto& n : names) grads->push_back(store.grad(n));
        grads->push_back(tape.grad(za));
        grads->push_back(tape.grad(zb));
      }
      return tape.value(loss).v[0];
    };
    std::vector<Eigen::ArrayXd> analytic;
    run(point, &analytic);
    if (ctx.corrupt) analytic[0][0] += 1.0;
    auto f = [&](const std::vector<Tensor>& pt) { return run(pt, nullptr); };
    return fd_check(f, point, analytic, ctx.eps).max_rel_error;
  });

  // similarity head: episode-style loss w.r.t. head weights
  ctx.block("head", kOpTol, [&](std::mt19937_64& r) {
    ParamStore store;
    std::mt19937_64 init(11);
    init_head_params(4, 3, store, init);
    std::vector<std::string> names = store.names();
    std::vector<Tensor> point;
    for (const auto& n : names) point.push_back(store.at(n));
    std::vector<Tensor> embeds = {random_tensor({4}, r, -1, 1),
                                  random_tensor({4}, r, -1, 1),
                                  random_tensor({4}, r, -1, 1)};
    auto run = [&](const std::vector<Tensor>& pt,
                   std::vector<Eigen::ArrayXd>* grads) {
      std::size_t i = 0;
      for (const auto& n : names) store.at(n).v = pt[i++].v;
      Tape tape;
      ParamBinding binding(tape, store);
      std::vector<Var> scores;
      for (const auto& e : embeds)
        scores.push_back(score(tape, tape.constant(e), binding));
      Var probs = class_probs(tape, scores, binding);
      Var loss = cross_entropy(tape, probs, 1);
      if (grads) {
        store.zero_grads();
        tape.backward(loss);
        binding.collect_grads();
        grads->clear();
        for (const auto& n : names) grads->push_back(store.grad(n));
      }
      return tape.value(loss).v[0];
    };
    std::vector<Eigen::ArrayXd> analytic;
    run(point, &analytic);
    if (ctx.corrupt) analytic[0][0] += 1.0;
    auto f = [&](const std::vector<Tensor>& pt) { return run(pt, nullptr); };
    return fd_check(f, point, analytic, ctx.eps).max_rel_error;
  });

  // end-to-end tiny model
  ctx.block("end_to_end", 1e-3, [&](std::mt19937_64& r) {
    DccModel model(tiny_config(), 99);
    Episode ep;
    ep.unknown = random_tensor({3, 8, 8}, r, 0.1, 0.9);
    for (int j = 0; j < 3; ++j)
      ep.references.push_back(random_tensor({3, 8, 8}, r, 0.1, 0.9));
    ep.true_index = 1;
    return check_model(model, ep, ctx.eps, ctx.corrupt);
  });

  return reports;
}

bool all_pass(const std::vector<BlockReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

}  // namespace dcc
