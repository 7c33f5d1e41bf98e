#pragma once

// Decoupled node classifier: a two-layer MLP whose output is propagated by
// EMP, trained end to end with softmax cross-entropy and Adam. Gradients are
// obtained by unrolling the K EMP steps in reverse.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "egnn/dataset.hpp"
#include "egnn/emp.hpp"
#include "egnn/graph.hpp"
#include "egnn/matrix.hpp"

namespace egnn {

/// Input features kept in compressed rows; bag-of-words inputs are mostly
/// zeros and the first layer is a sparse-dense product.
struct SparseRows {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  static SparseRows from_dense(const Matrix& m);
};

struct MlpModel {
  Matrix w1;  // d_in x H
  Matrix b1;  // 1 x H
  Matrix w2;  // H x C
  Matrix b2;  // 1 x C

  std::size_t input_dim() const { return w1.rows(); }
  std::size_t hidden_dim() const { return w1.cols(); }
  std::size_t num_classes() const { return w2.cols(); }
  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  /// Glorot-uniform weights, zero biases.
  static MlpModel init(std::size_t input_dim, std::size_t hidden, std::size_t classes, std::mt19937_64& rng);

  /// Parameters in the order w1, b1, w2, b2 (row-major each).
  std::vector<double> flatten() const;
  void assign(std::span<const double> params);
  /// Hash of shapes and parameter bits.
  std::uint64_t fingerprint() const;
  bool all_finite() const;
};

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  std::size_t K = 10;
  double lambda1 = 3.0;
  double lambda2 = 3.0;
  Penalty mode = Penalty::L21;
  std::size_t epochs = 1000;
  std::size_t patience = 100;
  std::uint64_t seed = 0;
  std::size_t hidden = 64;
  std::optional<double> gamma;
  std::optional<double> beta;

  /// Throws InputError for lr <= 0, epochs == 0, dropout outside [0, 1) or
  /// an invalid propagation setting.
  void validate() const;
  EmpConfig emp_config() const;
};

/// Everything the backward pass needs from one forward pass.
struct Tape {
  std::uint64_t model_fingerprint = 0;
  bool train_mode = false;
  SparseRows input;        // features after input dropout
  Matrix hidden_pre;       // X W1 + b1
  Matrix hidden_scale;     // dropout multipliers (0 or 1/(1-p)); empty when off
  Matrix hidden;           // relu(hidden_pre) after dropout
  Matrix mlp_out;          // EMP input
  EmpConfig emp;
  std::vector<Matrix> zbar;  // Zbar of each EMP step
  Matrix logits;
};

struct Forward {
  Matrix logits;
  Tape tape;
};

/// logits = EMP(MLP(features)). Dropout is applied only when `train_mode`
/// is set, drawing from `rng` (required then).
Forward forward(const MlpModel& model, const SparseRows& features, const NormalizedOperators& ops,
                const EmpConfig& emp, double dropout, bool train_mode, std::mt19937_64* rng = nullptr);
Forward forward(const MlpModel& model, const Dataset& data, const NormalizedOperators& ops, const TrainConfig& cfg,
                bool train_mode, std::mt19937_64* rng = nullptr);

/// Mean cross-entropy over masked nodes plus weight_decay/2 * (||W1||^2 + ||W2||^2).
double loss(const Matrix& logits, std::span<const int> labels, const Mask& mask, const MlpModel& model,
            double weight_decay);
double cross_entropy(const Matrix& logits, std::span<const int> labels, const Mask& mask);
/// d cross_entropy / d logits.
Matrix cross_entropy_grad(const Matrix& logits, std::span<const int> labels, const Mask& mask);

/// Reverse pass through the EMP steps recorded on the tape: maps dL/dlogits
/// to dL/d(MLP output).
Matrix emp_backward(const Tape& tape, const NormalizedOperators& ops, const Matrix& grad_logits);
/// Reverse pass through the MLP: flat gradient (flatten() order) from
/// dL/d(MLP output), without weight decay.
std::vector<double> mlp_backward(const MlpModel& model, const Tape& tape, const Matrix& grad_out);

/// Full gradient of loss(). Throws InputError when the tape was not
/// recorded from `model` in its current state.
std::vector<double> backward(const MlpModel& model, const Tape& tape, const NormalizedOperators& ops,
                             std::span<const int> labels, const Mask& mask, double weight_decay);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;

  explicit AdamState(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
};

/// One bias-corrected Adam update (beta1 0.9, beta2 0.999, eps 1e-8).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr);

/// Fraction of masked nodes whose argmax logit (lowest index on ties)
/// equals the label. Throws InputError for an empty mask.
double accuracy(const Matrix& logits, std::span<const int> labels, const Mask& mask);
double evaluate(const MlpModel& model, const Dataset& data, const NormalizedOperators& ops, const TrainConfig& cfg,
                const Mask& mask);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // training-mode loss the gradient was taken of
  double val_loss = 0.0;    // evaluation mode
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainReport {
  TrainConfig config;
  std::string dataset;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct TrainResult {
  MlpModel model;  // parameters at the best validation epoch
  TrainReport report;
};

/// Called after every epoch with the evaluation-mode logits of the updated
/// model.
using EpochObserver = std::function<void(std::size_t epoch, const MlpModel& model, const Matrix& eval_logits)>;

TrainResult train(const Dataset& data, const NormalizedOperators& ops, const TrainConfig& cfg,
                  const EpochObserver& observer = {});

std::string to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);
std::string to_json(const TrainReport& report);

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model, const TrainConfig& cfg);
struct Checkpoint {
  MlpModel model;
  TrainConfig config;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace egnn
