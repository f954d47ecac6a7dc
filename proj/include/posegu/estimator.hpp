#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "posegu/camera.hpp"
#include "posegu/crm.hpp"

namespace posegu {

enum class Activation { kRelu, kTanh };
enum class OptimizerKind { kAdam, kSgd };
enum class Precision { kFloat64, kFloat32 };

Activation activation_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);
Precision precision_from_string(const std::string& s);
std::string to_string(Activation a);
std::string to_string(OptimizerKind o);
std::string to_string(Precision p);

struct ModelShape {
  int joints = 17;
  int hidden = 256;
  int blocks = 2;
  Activation activation = Activation::kRelu;
  // Network outputs are multiplied by this many millimetres.
  double output_scale = 1000.0;
  InputNormalization normalization;

  int input_size() const { return 2 * joints; }
  int output_size() const { return 3 * joints; }
};

// Residual multilayer perceptron lifting a normalized 2D pose to a
// root-relative 3D pose:
//
//   h = act(W_in x + b_in)
//   h = h + act(W_b2 act(W_b1 h + b_b1) + b_b2)      (once per block)
//   y = output_scale * (W_out h + b_out)
//
// All parameters live in one flat buffer. Layer order is input,
// block0.fc1, block0.fc2, block1.fc1, ..., output; each layer stores its
// weight row-major (out x in) followed by its bias.
template <typename T>
class ResidualMlp {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using WeightMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstWeightMap =
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using BiasMap = Eigen::Map<Vector>;
  using ConstBiasMap = Eigen::Map<const Vector>;

  struct LayerInfo {
    std::string name;
    int rows;
    int cols;
    std::size_t offset;
  };

  ResidualMlp() = default;
  // Zero parameters.
  explicit ResidualMlp(const ModelShape& shape);

  const ModelShape& shape() const { return shape_; }
  const std::vector<LayerInfo>& layers() const { return layers_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }

  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }

  WeightMap weight(int layer);
  ConstWeightMap weight(int layer) const;
  BiasMap bias(int layer);
  ConstBiasMap bias(int layer) const;

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  void initialize(std::uint64_t seed);

  template <typename U>
  ResidualMlp<U> cast() const;

 private:
  ModelShape shape_;
  std::vector<LayerInfo> layers_;
  // Fixed base alignment keeps Eigen's vectorised reductions over the
  // layer maps independent of where the heap places the buffer.
  std::vector<T, Eigen::aligned_allocator<T>> params_;
};

using EstimatorModel = ResidualMlp<double>;

// Column-per-sample input matrix (2J x B) of normalized coordinates.
template <typename T>
typename ResidualMlp<T>::Matrix forward_batch(const ResidualMlp<T>& model,
                                              const typename ResidualMlp<T>::Matrix& inputs);

// Sum over samples s of coeffs[s] * mean_sq(pred_s - targets_s); gradient
// with respect to every parameter is written into `grad` (resized to the
// model shape). Returns the loss.
template <typename T>
double loss_and_gradient(const ResidualMlp<T>& model,
                         const typename ResidualMlp<T>::Matrix& inputs,
                         const typename ResidualMlp<T>::Matrix& targets,
                         std::span<const double> coeffs, ResidualMlp<T>& grad);

// Single pose through the network. `normalized` is already mapped by
// normalize_input; the result is root-relative, mm.
Pose3D forward(const EstimatorModel& model, const Pose2D& normalized);

// Normalizes pixel coordinates with the model's own normalization first.
Pose3D predict(const EstimatorModel& model, const Pose2D& pixels);
std::vector<Pose3D> predict(const EstimatorModel& model, std::span<const PosePair> pairs);

struct LossTerms {
  double generated = 0.0;       // L_P on the generated batch
  double counterfactual = 0.0;  // L_co on the ground-truth batch
  double total = 0.0;           // L_P + lambda_co * L_co
};

struct LossGradient {
  LossTerms loss;
  EstimatorModel gradient;
};

// Exact gradient of L_P(generated) + lambda_co * L_co(gt). Importance
// weights are constants. With weight_source = generated_batch the batches
// pair up index-wise and must have equal size.
LossGradient backward(const EstimatorModel& model, std::span<const PosePair> generated,
                      std::span<const PosePair> gt, const HistogramMap& gt_hist,
                      const HistogramMap& gen_hist, const CrmConfig& crm, double lambda_co);

// Same loss without the gradient.
LossTerms evaluate_loss(const EstimatorModel& model, std::span<const PosePair> generated,
                        std::span<const PosePair> gt, const HistogramMap& gt_hist,
                        const HistogramMap& gen_hist, const CrmConfig& crm, double lambda_co);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 30;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t rng_seed = 0;
  double gt_fraction = 0.25;
  double lambda_co = 1.0;
  int hidden = 256;
  int blocks = 2;
  Activation activation = Activation::kRelu;
  Precision precision = Precision::kFloat64;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

struct EpochLoss {
  int epoch = 0;
  LossTerms loss;
};

struct TrainResult {
  EstimatorModel model;
  std::vector<EpochLoss> trace;  // entry 0 is the untrained model
};

// A model of the configured shape with seeded initial weights.
EstimatorModel make_model(const TrainConfig& cfg, int joints, const InputNormalization& norm);

// Each step draws one batch from `generated` (shuffled every epoch) and an
// equally sized batch from `gt` (cycled, reshuffled when exhausted) and
// takes one optimizer step on their summed loss. An epoch is one pass over
// `generated`. The trace holds full-data losses after every epoch.
// `gt` may be empty only when lambda_co is 0. Throws NumericalError naming
// the epoch if the loss stops being finite.
TrainResult train(const EstimatorModel& initial, std::span<const PosePair> generated,
                  std::span<const PosePair> gt, const HistogramMap& gt_hist,
                  const HistogramMap& gen_hist, const TrainConfig& cfg, const CrmConfig& crm);

// Versioned JSON checkpoint.
inline constexpr int kCheckpointVersion = 1;
nlohmann::json checkpoint_to_json(const EstimatorModel& model, const std::string& topology_digest);
EstimatorModel checkpoint_from_json(const nlohmann::json& doc, std::string* topology_digest);

}  // namespace posegu
