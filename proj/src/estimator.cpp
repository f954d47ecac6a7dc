#include "posegu/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "posegu/error.hpp"
#include "posegu/rng.hpp"

namespace posegu {

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw ConfigError("activation must be relu or tanh, got '" + s + "'");
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("optimizer must be adam or sgd, got '" + s + "'");
}

Precision precision_from_string(const std::string& s) {
  if (s == "float64") return Precision::kFloat64;
  if (s == "float32") return Precision::kFloat32;
  throw ConfigError("precision must be float64 or float32, got '" + s + "'");
}

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }
std::string to_string(OptimizerKind o) { return o == OptimizerKind::kAdam ? "adam" : "sgd"; }
std::string to_string(Precision p) { return p == Precision::kFloat64 ? "float64" : "float32"; }

// ---------------------------------------------------------------------------
// ResidualMlp

template <typename T>
ResidualMlp<T>::ResidualMlp(const ModelShape& shape) : shape_(shape) {
  if (shape.joints < 1 || shape.hidden < 1 || shape.blocks < 0) {
    throw ConfigError("model needs joints >= 1, hidden >= 1, blocks >= 0");
  }
  std::size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    layers_.push_back({std::move(name), rows, cols, offset});
    offset += static_cast<std::size_t>(rows) * cols + rows;
  };
  add("input", shape.hidden, shape.input_size());
  for (int b = 0; b < shape.blocks; ++b) {
    add("block" + std::to_string(b) + ".fc1", shape.hidden, shape.hidden);
    add("block" + std::to_string(b) + ".fc2", shape.hidden, shape.hidden);
  }
  add("output", shape.output_size(), shape.hidden);
  params_.assign(offset, T(0));
}

template <typename T>
typename ResidualMlp<T>::WeightMap ResidualMlp<T>::weight(int layer) {
  const auto& l = layers_[layer];
  return WeightMap(params_.data() + l.offset, l.rows, l.cols);
}

template <typename T>
typename ResidualMlp<T>::ConstWeightMap ResidualMlp<T>::weight(int layer) const {
  const auto& l = layers_[layer];
  return ConstWeightMap(params_.data() + l.offset, l.rows, l.cols);
}

template <typename T>
typename ResidualMlp<T>::BiasMap ResidualMlp<T>::bias(int layer) {
  const auto& l = layers_[layer];
  return BiasMap(params_.data() + l.offset + static_cast<std::size_t>(l.rows) * l.cols, l.rows);
}

template <typename T>
typename ResidualMlp<T>::ConstBiasMap ResidualMlp<T>::bias(int layer) const {
  const auto& l = layers_[layer];
  return ConstBiasMap(params_.data() + l.offset + static_cast<std::size_t>(l.rows) * l.cols,
                      l.rows);
}

template <typename T>
void ResidualMlp<T>::initialize(std::uint64_t seed) {
  Rng rng = make_rng(seed, 0, rng_tag::kInit);
  std::fill(params_.begin(), params_.end(), T(0));
  for (int i = 0; i < layer_count(); ++i) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layers_[i].cols));
    auto w = weight(i);
    // Row-major fill keeps the draw order equal to the storage order.
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) w(r, c) = static_cast<T>(uniform(rng, -bound, bound));
    }
  }
}

template <typename T>
template <typename U>
ResidualMlp<U> ResidualMlp<T>::cast() const {
  ResidualMlp<U> out(shape_);
  auto dst = out.parameters();
  for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

template <typename Derived>
auto activate(const Eigen::MatrixBase<Derived>& pre, Activation a) {
  using T = typename Derived::Scalar;
  using M = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  if (a == Activation::kRelu) return M(pre.cwiseMax(T(0)));
  return M(pre.array().tanh().matrix());
}

// d act / d pre, given the pre-activation and the activation output.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> activation_slope(
    const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& pre,
    const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& out, Activation a) {
  if (a == Activation::kRelu) return (pre.array() > T(0)).template cast<T>().matrix();
  return (T(1) - out.array().square()).matrix();
}

template <typename T>
struct ForwardCache {
  using Matrix = typename ResidualMlp<T>::Matrix;
  Matrix pre_in, h_in;
  // Per block: input h, fc1 pre/out, fc2 pre/out.
  std::vector<Matrix> h, p1, z1, p2, z2;
  Matrix h_last;
  Matrix output;  // scaled, mm
};

template <typename T>
void run_forward(const ResidualMlp<T>& model, const typename ResidualMlp<T>::Matrix& x,
                 ForwardCache<T>& c) {
  const auto& s = model.shape();
  if (x.rows() != s.input_size()) {
    throw DimensionError("network input has " + std::to_string(x.rows()) + " rows, expected " +
                         std::to_string(s.input_size()));
  }
  c.pre_in.noalias() = model.weight(0) * x;
  c.pre_in.colwise() += model.bias(0);
  c.h_in = activate(c.pre_in, s.activation);
  c.h.resize(s.blocks);
  c.p1.resize(s.blocks);
  c.z1.resize(s.blocks);
  c.p2.resize(s.blocks);
  c.z2.resize(s.blocks);
  const typename ResidualMlp<T>::Matrix* h = &c.h_in;
  for (int b = 0; b < s.blocks; ++b) {
    const int l1 = 1 + 2 * b, l2 = 2 + 2 * b;
    c.h[b] = *h;
    c.p1[b].noalias() = model.weight(l1) * c.h[b];
    c.p1[b].colwise() += model.bias(l1);
    c.z1[b] = activate(c.p1[b], s.activation);
    c.p2[b].noalias() = model.weight(l2) * c.z1[b];
    c.p2[b].colwise() += model.bias(l2);
    c.z2[b] = activate(c.p2[b], s.activation);
    c.h_last = c.h[b] + c.z2[b];
    h = &c.h_last;
  }
  if (s.blocks == 0) c.h_last = c.h_in;
  const int lo = model.layer_count() - 1;
  c.output.noalias() = model.weight(lo) * c.h_last;
  c.output.colwise() += model.bias(lo);
  c.output *= static_cast<T>(s.output_scale);
  if (!c.output.allFinite()) {
    throw NumericalError("training divergence: network produced non-finite activations");
  }
}

}  // namespace

template <typename T>
typename ResidualMlp<T>::Matrix forward_batch(const ResidualMlp<T>& model,
                                              const typename ResidualMlp<T>::Matrix& inputs) {
  ForwardCache<T> cache;
  run_forward(model, inputs, cache);
  return std::move(cache.output);
}

template <typename T>
double loss_and_gradient(const ResidualMlp<T>& model,
                         const typename ResidualMlp<T>::Matrix& inputs,
                         const typename ResidualMlp<T>::Matrix& targets,
                         std::span<const double> coeffs, ResidualMlp<T>& grad) {
  using Matrix = typename ResidualMlp<T>::Matrix;
  const auto& s = model.shape();
  if (targets.rows() != s.output_size() || targets.cols() != inputs.cols() ||
      static_cast<Eigen::Index>(coeffs.size()) != inputs.cols()) {
    throw DimensionError("loss_and_gradient: batch shapes disagree");
  }
  ForwardCache<T> c;
  run_forward(model, inputs, c);

  const double per_coord = 1.0 / static_cast<double>(s.output_size());
  Matrix diff = c.output - targets;
  double loss = 0.0;
  for (Eigen::Index j = 0; j < diff.cols(); ++j) {
    loss += coeffs[j] * per_coord * diff.col(j).template cast<double>().squaredNorm();
    // d loss / d (W_out h + b_out) = scale * d loss / d output
    diff.col(j) *= static_cast<T>(2.0 * coeffs[j] * per_coord * s.output_scale);
  }
  if (!std::isfinite(loss)) throw NumericalError("training divergence: non-finite loss");

  if (grad.parameters().size() != model.parameters().size()) grad = ResidualMlp<T>(s);
  const int lo = model.layer_count() - 1;
  grad.weight(lo).noalias() = diff * c.h_last.transpose();
  grad.bias(lo) = diff.rowwise().sum();
  Matrix dh = model.weight(lo).transpose() * diff;
  for (int b = s.blocks - 1; b >= 0; --b) {
    const int l1 = 1 + 2 * b, l2 = 2 + 2 * b;
    Matrix dp2 = dh.cwiseProduct(activation_slope<T>(c.p2[b], c.z2[b], s.activation));
    grad.weight(l2).noalias() = dp2 * c.z1[b].transpose();
    grad.bias(l2) = dp2.rowwise().sum();
    Matrix dz1 = model.weight(l2).transpose() * dp2;
    Matrix dp1 = dz1.cwiseProduct(activation_slope<T>(c.p1[b], c.z1[b], s.activation));
    grad.weight(l1).noalias() = dp1 * c.h[b].transpose();
    grad.bias(l1) = dp1.rowwise().sum();
    dh.noalias() += model.weight(l1).transpose() * dp1;
  }
  Matrix dp0 = dh.cwiseProduct(activation_slope<T>(c.pre_in, c.h_in, s.activation));
  grad.weight(0).noalias() = dp0 * inputs.transpose();
  grad.bias(0) = dp0.rowwise().sum();
  return loss;
}

// ---------------------------------------------------------------------------
// Pose-level helpers

namespace {

template <typename T>
typename ResidualMlp<T>::Matrix input_matrix(std::span<const PosePair> pairs,
                                             const InputNormalization& norm, int joints) {
  typename ResidualMlp<T>::Matrix x(2 * joints, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i].input;
    if (p.joint_count() != joints) throw DimensionError("2D pose joint count does not match model");
    for (int j = 0; j < joints; ++j) {
      x(2 * j, i) = static_cast<T>((p.joints(j, 0) - norm.cx) / norm.scale_u);
      x(2 * j + 1, i) = static_cast<T>((p.joints(j, 1) - norm.cy) / norm.scale_v);
    }
  }
  return x;
}

template <typename T>
typename ResidualMlp<T>::Matrix target_matrix(std::span<const PosePair> pairs, int joints) {
  typename ResidualMlp<T>::Matrix y(3 * joints, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i].target;
    if (p.joint_count() != joints) throw DimensionError("3D pose joint count does not match model");
    for (int j = 0; j < joints; ++j) {
      for (int k = 0; k < 3; ++k) y(3 * j + k, i) = static_cast<T>(p.joints(j, k));
    }
  }
  return y;
}

Pose3D column_to_pose(const Eigen::VectorXd& col, int joints) {
  Pose3D p{Rows3(joints, 3)};
  for (int j = 0; j < joints; ++j) {
    for (int k = 0; k < 3; ++k) p.joints(j, k) = col(3 * j + k);
  }
  return p;
}

std::vector<double> gt_weights(std::span<const PosePair> gt, std::span<const PosePair> generated,
                               const HistogramMap& gt_hist, const HistogramMap& gen_hist,
                               const CrmConfig& crm) {
  std::vector<double> w(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const Pose2D& at = crm.weight_source == WeightSource::kGtBatch
                           ? gt[i].input
                           : generated[i % generated.size()].input;
    w[i] = cips_weight(at, gt_hist, gen_hist, crm);
  }
  return w;
}

}  // namespace

Pose3D forward(const EstimatorModel& model, const Pose2D& normalized) {
  const int J = model.shape().joints;
  if (normalized.joint_count() != J) throw DimensionError("forward: pose joint count mismatch");
  Eigen::MatrixXd x(2 * J, 1);
  for (int j = 0; j < J; ++j) {
    x(2 * j, 0) = normalized.joints(j, 0);
    x(2 * j + 1, 0) = normalized.joints(j, 1);
  }
  return column_to_pose(forward_batch(model, x).col(0), J);
}

Pose3D predict(const EstimatorModel& model, const Pose2D& pixels) {
  return forward(model, normalize_input(pixels, model.shape().normalization));
}

std::vector<Pose3D> predict(const EstimatorModel& model, std::span<const PosePair> pairs) {
  const int J = model.shape().joints;
  std::vector<Pose3D> out;
  out.reserve(pairs.size());
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < pairs.size(); start += kChunk) {
    const auto chunk = pairs.subspan(start, std::min(kChunk, pairs.size() - start));
    const Eigen::MatrixXd y =
        forward_batch(model, input_matrix<double>(chunk, model.shape().normalization, J));
    for (Eigen::Index i = 0; i < y.cols(); ++i) out.push_back(column_to_pose(y.col(i), J));
  }
  return out;
}

LossGradient backward(const EstimatorModel& model, std::span<const PosePair> generated,
                      std::span<const PosePair> gt, const HistogramMap& gt_hist,
                      const HistogramMap& gen_hist, const CrmConfig& crm, double lambda_co) {
  if (generated.empty() || gt.empty()) throw DataError("backward: empty batch");
  if (crm.weight_source == WeightSource::kGeneratedBatch && generated.size() != gt.size()) {
    throw DimensionError("backward: paired batches must have equal size");
  }
  const int J = model.shape().joints;
  const auto& norm = model.shape().normalization;
  const auto w = gt_weights(gt, generated, gt_hist, gen_hist, crm);
  const std::size_t ng = generated.size(), nt = gt.size();

  Eigen::MatrixXd x(2 * J, ng + nt), y(3 * J, ng + nt);
  x << input_matrix<double>(generated, norm, J), input_matrix<double>(gt, norm, J);
  y << target_matrix<double>(generated, J), target_matrix<double>(gt, J);
  std::vector<double> coeffs(ng + nt);
  for (std::size_t i = 0; i < ng; ++i) coeffs[i] = 1.0 / static_cast<double>(ng);
  for (std::size_t i = 0; i < nt; ++i) coeffs[ng + i] = lambda_co * w[i] / static_cast<double>(nt);

  LossGradient out{{}, EstimatorModel(model.shape())};
  out.loss.total = loss_and_gradient(model, x, y, coeffs, out.gradient);
  out.loss = evaluate_loss(model, generated, gt, gt_hist, gen_hist, crm, lambda_co);
  return out;
}

LossTerms evaluate_loss(const EstimatorModel& model, std::span<const PosePair> generated,
                        std::span<const PosePair> gt, const HistogramMap& gt_hist,
                        const HistogramMap& gen_hist, const CrmConfig& crm, double lambda_co) {
  LossTerms t;
  if (!generated.empty()) {
    const auto pred = predict(model, generated);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += pose_loss(pred[i], generated[i].target);
    t.generated = sum / static_cast<double>(pred.size());
  }
  if (!gt.empty()) {
    const auto pred = predict(model, gt);
    const auto w = gt_weights(gt, generated, gt_hist, gen_hist, crm);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += w[i] * pose_loss(pred[i], gt[i].target);
    t.counterfactual = sum / static_cast<double>(pred.size());
  }
  t.total = total_loss(t.generated, t.counterfactual, lambda_co);
  return t;
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train.learning_rate must be finite and >= 0");
  }
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (!(gt_fraction > 0.0 && gt_fraction <= 1.0)) {
    throw ConfigError("train.gt_fraction must lie in (0, 1]");
  }
  if (!(lambda_co >= 0.0) || !std::isfinite(lambda_co)) {
    throw ConfigError("train.lambda_co must be finite and >= 0");
  }
  if (hidden < 1) throw ConfigError("train.hidden must be >= 1");
  if (blocks < 0) throw ConfigError("train.blocks must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train.beta1 and train.beta2 must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("train.adam_epsilon must be > 0");
}

EstimatorModel make_model(const TrainConfig& cfg, int joints, const InputNormalization& norm) {
  ModelShape shape;
  shape.joints = joints;
  shape.hidden = cfg.hidden;
  shape.blocks = cfg.blocks;
  shape.activation = cfg.activation;
  shape.normalization = norm;
  EstimatorModel m(shape);
  m.initialize(cfg.rng_seed);
  return m;
}

namespace {

template <typename T>
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, std::size_t n) : cfg_(cfg), m_(n, T(0)), v_(n, T(0)) {}

  void step(std::span<T> params, std::span<const T> grad) {
    const T lr = static_cast<T>(cfg_.learning_rate);
    if (cfg_.optimizer == OptimizerKind::kSgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
      return;
    }
    ++t_;
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const T c1 = static_cast<T>(1.0 - std::pow(cfg_.beta1, t_));
    const T c2 = static_cast<T>(1.0 - std::pow(cfg_.beta2, t_));
    const T eps = static_cast<T>(cfg_.adam_epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (T(1) - b1) * grad[i];
      v_[i] = b2 * v_[i] + (T(1) - b2) * grad[i] * grad[i];
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<T> m_, v_;
  int t_ = 0;
};

template <typename T>
typename ResidualMlp<T>::Matrix gather(const typename ResidualMlp<T>::Matrix& all,
                                       std::span<const std::size_t> idx) {
  typename ResidualMlp<T>::Matrix out(all.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(i) = all.col(idx[i]);
  return out;
}

template <typename T>
TrainResult train_impl(const EstimatorModel& initial, std::span<const PosePair> generated,
                       std::span<const PosePair> gt, const std::vector<double>& weights,
                       const HistogramMap& gt_hist, const HistogramMap& gen_hist,
                       const TrainConfig& cfg, const CrmConfig& crm) {
  using Matrix = typename ResidualMlp<T>::Matrix;
  const int J = initial.shape().joints;
  const auto& norm = initial.shape().normalization;
  const bool use_gt = cfg.lambda_co != 0.0;

  const Matrix xg = input_matrix<T>(generated, norm, J), yg = target_matrix<T>(generated, J);
  Matrix xt, yt;
  if (use_gt) {
    xt = input_matrix<T>(gt, norm, J);
    yt = target_matrix<T>(gt, J);
  }

  ResidualMlp<T> model = initial.template cast<T>();
  ResidualMlp<T> grad(model.shape());
  Optimizer<T> opt(cfg, model.parameters().size());
  Rng gen_rng = make_rng(cfg.rng_seed, 0, rng_tag::kShuffleGenerated);
  Rng gt_rng = make_rng(cfg.rng_seed, 0, rng_tag::kShuffleGt);

  std::vector<std::size_t> gen_order(generated.size()), gt_order(gt.size());
  std::iota(gen_order.begin(), gen_order.end(), std::size_t{0});
  std::iota(gt_order.begin(), gt_order.end(), std::size_t{0});
  std::size_t gt_cursor = gt_order.size();

  TrainResult result;
  auto record = [&](int epoch) {
    const EstimatorModel snapshot = model.template cast<double>();
    LossTerms l = evaluate_loss(snapshot, generated, use_gt ? gt : std::span<const PosePair>{},
                                gt_hist, gen_hist, crm, cfg.lambda_co);
    if (!std::isfinite(l.total)) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch));
    }
    result.trace.push_back({epoch, l});
  };
  record(0);

  const std::size_t B = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(gen_order.begin(), gen_order.end(), gen_rng);
    for (std::size_t start = 0; start < gen_order.size(); start += B) {
      const std::size_t nb = std::min(B, gen_order.size() - start);
      const std::span<const std::size_t> gen_idx(gen_order.data() + start, nb);
      std::vector<double> coeffs(nb, 1.0 / static_cast<double>(nb));
      Matrix x, y;
      if (use_gt) {
        std::vector<std::size_t> gt_idx;
        gt_idx.reserve(nb);
        while (gt_idx.size() < nb) {
          if (gt_cursor == gt_order.size()) {
            std::shuffle(gt_order.begin(), gt_order.end(), gt_rng);
            gt_cursor = 0;
          }
          gt_idx.push_back(gt_order[gt_cursor++]);
        }
        x.resize(xg.rows(), 2 * nb);
        y.resize(yg.rows(), 2 * nb);
        x << gather<T>(xg, gen_idx), gather<T>(xt, gt_idx);
        y << gather<T>(yg, gen_idx), gather<T>(yt, gt_idx);
        for (std::size_t i = 0; i < nb; ++i) {
          const double w = crm.weight_source == WeightSource::kGtBatch
                               ? weights[gt_idx[i]]
                               : cips_weight(generated[gen_idx[i]].input, gt_hist, gen_hist, crm);
          coeffs.push_back(cfg.lambda_co * w / static_cast<double>(nb));
        }
      } else {
        x = gather<T>(xg, gen_idx);
        y = gather<T>(yg, gen_idx);
      }
      double loss;
      try {
        loss = loss_and_gradient(model, x, y, coeffs, grad);
      } catch (const NumericalError&) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch));
      }
      (void)loss;
      opt.step(model.parameters(), grad.parameters());
    }
    record(epoch);
  }
  result.model = model.template cast<double>();
  return result;
}

}  // namespace

TrainResult train(const EstimatorModel& initial, std::span<const PosePair> generated,
                  std::span<const PosePair> gt, const HistogramMap& gt_hist,
                  const HistogramMap& gen_hist, const TrainConfig& cfg, const CrmConfig& crm) {
  cfg.validate();
  crm.validate();
  if (generated.empty()) throw DataError("train: generated dataset is empty");
  if (gt.empty() && cfg.lambda_co != 0.0) {
    throw DataError("train: ground-truth sample is empty but lambda_co is not 0");
  }
  std::vector<double> weights;
  if (cfg.lambda_co != 0.0) weights = gt_weights(gt, generated, gt_hist, gen_hist, crm);
  if (cfg.precision == Precision::kFloat32) {
    return train_impl<float>(initial, generated, gt, weights, gt_hist, gen_hist, cfg, crm);
  }
  return train_impl<double>(initial, generated, gt, weights, gt_hist, gen_hist, cfg, crm);
}

// ---------------------------------------------------------------------------
// Checkpoints

nlohmann::json checkpoint_to_json(const EstimatorModel& model, const std::string& topology_digest) {
  const auto& s = model.shape();
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers()) {
    layers.push_back({{"name", l.name}, {"rows", l.rows}, {"cols", l.cols}, {"offset", l.offset}});
  }
  nlohmann::json params = nlohmann::json::array();
  for (double p : model.parameters()) params.push_back(p);
  return {{"format", "posegu-checkpoint"},
          {"version", kCheckpointVersion},
          {"topology", topology_digest},
          {"joints", s.joints},
          {"hidden", s.hidden},
          {"blocks", s.blocks},
          {"activation", to_string(s.activation)},
          {"output_scale", s.output_scale},
          {"normalization",
           {{"cx", s.normalization.cx},
            {"cy", s.normalization.cy},
            {"scale_u", s.normalization.scale_u},
            {"scale_v", s.normalization.scale_v}}},
          {"layers", std::move(layers)},
          {"parameters", std::move(params)}};
}

EstimatorModel checkpoint_from_json(const nlohmann::json& doc, std::string* topology_digest) {
  try {
    if (doc.at("format").get<std::string>() != "posegu-checkpoint") {
      throw DataError("not a checkpoint file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
    }
    ModelShape s;
    s.joints = doc.at("joints").get<int>();
    s.hidden = doc.at("hidden").get<int>();
    s.blocks = doc.at("blocks").get<int>();
    s.activation = activation_from_string(doc.at("activation").get<std::string>());
    s.output_scale = doc.at("output_scale").get<double>();
    const auto& n = doc.at("normalization");
    s.normalization = {n.at("cx").get<double>(), n.at("cy").get<double>(),
                       n.at("scale_u").get<double>(), n.at("scale_v").get<double>()};
    EstimatorModel m(s);
    const auto& params = doc.at("parameters");
    if (params.size() != m.parameters().size()) {
      throw DimensionError("checkpoint holds " + std::to_string(params.size()) +
                           " parameters, architecture needs " +
                           std::to_string(m.parameters().size()));
    }
    auto dst = m.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) dst[i] = params[i].get<double>();
    if (topology_digest) *topology_digest = doc.at("topology").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

template class ResidualMlp<float>;
template class ResidualMlp<double>;
template ResidualMlp<float> ResidualMlp<double>::cast<float>() const;
template ResidualMlp<double> ResidualMlp<float>::cast<double>() const;
template ResidualMlp<double> ResidualMlp<double>::cast<double>() const;
template ResidualMlp<double>::Matrix forward_batch(const ResidualMlp<double>&,
                                                   const ResidualMlp<double>::Matrix&);
template ResidualMlp<float>::Matrix forward_batch(const ResidualMlp<float>&,
                                                  const ResidualMlp<float>::Matrix&);
template double loss_and_gradient(const ResidualMlp<double>&, const ResidualMlp<double>::Matrix&,
                                  const ResidualMlp<double>::Matrix&, std::span<const double>,
                                  ResidualMlp<double>&);
template double loss_and_gradient(const ResidualMlp<float>&, const ResidualMlp<float>::Matrix&,
                                  const ResidualMlp<float>::Matrix&, std::span<const double>,
                                  ResidualMlp<float>&);

}  // namespace posegu
