#include "egnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "egnn/error.hpp"
#include "egnn/kernels.hpp"

namespace egnn {

using nlohmann::json;

SparseRows SparseRows::from_dense(const Matrix& m) {
  SparseRows s;
  s.rows = m.rows();
  s.cols = m.cols();
  s.row_ptr.reserve(m.rows() + 1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        s.col_idx.push_back(j);
        s.values.push_back(m(i, j));
      }
    }
    s.row_ptr.push_back(s.values.size());
  }
  return s;
}

// ---- model -------------------------------------------------------------------

MlpModel MlpModel::init(std::size_t input_dim, std::size_t hidden, std::size_t classes, std::mt19937_64& rng) {
  if (input_dim == 0 || hidden == 0 || classes == 0) throw InputError("MlpModel: dimensions must be positive");
  auto glorot = [&rng](std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix w(fan_in, fan_out);
    for (double& v : w.values()) v = u(rng);
    return w;
  };
  MlpModel m;
  m.w1 = glorot(input_dim, hidden);
  m.b1 = Matrix(1, hidden);
  m.w2 = glorot(hidden, classes);
  m.b2 = Matrix(1, classes);
  return m;
}

std::vector<double> MlpModel::flatten() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (const Matrix* m : {&w1, &b1, &w2, &b2}) p.insert(p.end(), m->values().begin(), m->values().end());
  return p;
}

void MlpModel::assign(std::span<const double> params) {
  if (params.size() != parameter_count())
    throw InputError("MlpModel::assign: expected " + std::to_string(parameter_count()) + " parameters, got " +
                     std::to_string(params.size()));
  std::size_t offset = 0;
  for (Matrix* m : {&w1, &b1, &w2, &b2}) {
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(offset), m->size(), m->values().begin());
    offset += m->size();
  }
}

std::uint64_t MlpModel::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const Matrix* m : {&w1, &b1, &w2, &b2}) {
    const std::size_t shape[2] = {m->rows(), m->cols()};
    mix(shape, sizeof shape);
    mix(m->data(), m->size() * sizeof(double));
  }
  return h;
}

bool MlpModel::all_finite() const {
  return w1.all_finite() && b1.all_finite() && w2.all_finite() && b2.all_finite();
}

// ---- configuration -------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(std::isfinite(lr) && lr > 0.0)) throw InputError("TrainConfig: lr must be > 0");
  if (!(std::isfinite(weight_decay) && weight_decay >= 0.0)) throw InputError("TrainConfig: weight_decay must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InputError("TrainConfig: dropout must lie in [0, 1)");
  if (epochs == 0) throw InputError("TrainConfig: epochs must be >= 1");
  if (hidden == 0) throw InputError("TrainConfig: hidden must be >= 1");
  (void)emp_config();
}

EmpConfig TrainConfig::emp_config() const {
  if (gamma || beta) {
    const Stepsizes d = default_stepsizes(lambda2);
    return EmpConfig::with_stepsizes(lambda1, lambda2, gamma.value_or(d.gamma), beta.value_or(d.beta), K, mode);
  }
  return EmpConfig::make(lambda1, lambda2, K, mode);
}

// ---- forward -------------------------------------------------------------------

Forward forward(const MlpModel& model, const SparseRows& features, const NormalizedOperators& ops,
                const EmpConfig& emp, double dropout, bool train_mode, std::mt19937_64* rng) {
  if (features.cols != model.input_dim())
    throw InputError("forward: features have " + std::to_string(features.cols) + " columns, model expects " +
                     std::to_string(model.input_dim()));
  if (features.rows != ops.num_nodes())
    throw InputError("forward: " + std::to_string(features.rows) + " feature rows for a graph of " +
                     std::to_string(ops.num_nodes()) + " nodes");
  const bool drop = train_mode && dropout > 0.0;
  if (drop && rng == nullptr) throw InputError("forward: training-mode dropout needs a random generator");
  const auto& k = simd::active();
  const std::size_t n = features.rows, h = model.hidden_dim(), c = model.num_classes();
  const double keep_scale = drop ? 1.0 / (1.0 - dropout) : 1.0;

  Forward out;
  Tape& t = out.tape;
  t.model_fingerprint = model.fingerprint();
  t.train_mode = train_mode;
  t.emp = emp;

  if (drop) {
    t.input.rows = features.rows;
    t.input.cols = features.cols;
    t.input.row_ptr.assign(1, 0);
    t.input.col_idx.reserve(features.values.size());
    t.input.values.reserve(features.values.size());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = features.row_ptr[i]; p < features.row_ptr[i + 1]; ++p) {
        if (std::generate_canonical<double, 53>(*rng) >= dropout) {
          t.input.col_idx.push_back(features.col_idx[p]);
          t.input.values.push_back(features.values[p] * keep_scale);
        }
      }
      t.input.row_ptr.push_back(t.input.values.size());
    }
  } else {
    t.input = features;
  }

  t.hidden_pre = Matrix(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = t.hidden_pre.row(i).data();
    std::copy(model.b1.values().begin(), model.b1.values().end(), row);
    for (std::size_t p = t.input.row_ptr[i]; p < t.input.row_ptr[i + 1]; ++p)
      k.axpy(h, t.input.values[p], model.w1.row(t.input.col_idx[p]).data(), row);
  }
  t.hidden = Matrix(n, h);
  k.relu(t.hidden.size(), t.hidden_pre.data(), t.hidden.data());
  if (drop) {
    t.hidden_scale = Matrix(n, h);
    for (double& s : t.hidden_scale.values()) s = std::generate_canonical<double, 53>(*rng) >= dropout ? keep_scale : 0.0;
    for (std::size_t q = 0; q < t.hidden.size(); ++q) t.hidden.data()[q] *= t.hidden_scale.data()[q];
  }

  t.mlp_out = Matrix(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = t.mlp_out.row(i).data();
    std::copy(model.b2.values().begin(), model.b2.values().end(), row);
    for (std::size_t j = 0; j < h; ++j) {
      const double v = t.hidden(i, j);
      if (v != 0.0) k.axpy(c, v, model.w2.row(j).data(), row);
    }
  }
  if (!t.mlp_out.all_finite()) throw NumericError("forward: non-finite MLP output");

  EmpState state = EmpState::initial(t.mlp_out, ops.num_edges());
  EmpWorkspace ws;
  t.zbar.reserve(emp.iterations);
  for (std::size_t s = 0; s < emp.iterations; ++s) {
    emp_step_inplace(state, t.mlp_out, ops, emp, ws);
    t.zbar.push_back(emp.pure_aggregation ? Matrix() : ws.zbar);
  }
  t.logits = std::move(state.f);
  out.logits = t.logits;
  return out;
}

Forward forward(const MlpModel& model, const Dataset& data, const NormalizedOperators& ops, const TrainConfig& cfg,
                bool train_mode, std::mt19937_64* rng) {
  return forward(model, SparseRows::from_dense(data.features), ops, cfg.emp_config(), cfg.dropout, train_mode, rng);
}

// ---- loss ------------------------------------------------------------------------

namespace {

void check_labels(const Matrix& logits, std::span<const int> labels, const Mask& mask, const char* who) {
  if (labels.size() != logits.rows() || mask.size() != logits.rows())
    throw InputError(std::string(who) + ": labels/mask length does not match the logits");
  if (mask_count(mask) == 0) throw InputError(std::string(who) + ": empty mask");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (mask[i] && (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= logits.cols()))
      throw InputError(std::string(who) + ": label out of range at node " + std::to_string(i));
}

double log_sum_exp(std::span<const double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double v : row) s += std::exp(v - mx);
  return mx + std::log(s);
}

}  // namespace

double cross_entropy(const Matrix& logits, std::span<const int> labels, const Mask& mask) {
  check_labels(logits, labels, mask, "cross_entropy");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i)
    if (mask[i]) total += log_sum_exp(logits.row(i)) - logits(i, static_cast<std::size_t>(labels[i]));
  return total / static_cast<double>(mask_count(mask));
}

Matrix cross_entropy_grad(const Matrix& logits, std::span<const int> labels, const Mask& mask) {
  check_labels(logits, labels, mask, "cross_entropy_grad");
  const double inv = 1.0 / static_cast<double>(mask_count(mask));
  Matrix g(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    const double lse = log_sum_exp(logits.row(i));
    for (std::size_t c = 0; c < logits.cols(); ++c) g(i, c) = std::exp(logits(i, c) - lse) * inv;
    g(i, static_cast<std::size_t>(labels[i])) -= inv;
  }
  return g;
}

double loss(const Matrix& logits, std::span<const int> labels, const Mask& mask, const MlpModel& model,
            double weight_decay) {
  const auto& k = simd::active();
  const double reg = k.sum_squares(model.w1.size(), model.w1.data()) + k.sum_squares(model.w2.size(), model.w2.data());
  return cross_entropy(logits, labels, mask) + 0.5 * weight_decay * reg;
}

// ---- backward ------------------------------------------------------------------

Matrix emp_backward(const Tape& tape, const NormalizedOperators& ops, const Matrix& grad_logits) {
  const EmpConfig& cfg = tape.emp;
  if (!grad_logits.same_shape(tape.mlp_out)) throw InputError("emp_backward: gradient shape mismatch");
  if (tape.zbar.size() != cfg.iterations) throw InputError("emp_backward: tape does not hold every EMP step");
  const auto& k = simd::active();
  const std::size_t n = grad_logits.rows(), d = grad_logits.cols(), m = ops.num_edges();
  const double gamma = cfg.gamma, lambda1 = cfg.lambda1;
  const IncidenceMatrix& delta = ops.delta_tilde;

  Matrix g_f = grad_logits;  // dL/dF^{s+1}
  Matrix g_z(m, d);          // dL/dZ^{s+1}
  Matrix g_out(n, d);
  Matrix g_y(n, d), g_fbar(n, d);

  for (std::size_t s = cfg.iterations; s-- > 0;) {
    if (cfg.pure_aggregation) {
      g_f = ops.a_tilde.multiply(g_f);
      continue;
    }
    // F' = Y - gamma D^T Z'
    g_y = g_f;
    delta.apply_add(-gamma, g_f, g_z);

    // Z' = prox(Zbar): g_z becomes dL/dZbar
    const Matrix& zbar = tape.zbar[s];
    if (cfg.mode == Penalty::L1) {
      for (std::size_t q = 0; q < g_z.size(); ++q)
        if (!(std::fabs(zbar.data()[q]) < lambda1)) g_z.data()[q] = 0.0;
    } else {
      for (std::size_t l = 0; l < m; ++l) {
        const double* zr = zbar.row(l).data();
        double* gr = g_z.row(l).data();
        const double r = std::sqrt(k.sum_squares(d, zr));
        if (r < lambda1) continue;
        if (r == 0.0) {
          std::fill(gr, gr + d, 0.0);
          continue;
        }
        // (lambda1/r) (I - u u^T) g with u = zbar/r
        const double proj = k.dot(d, zr, gr) / (r * r);
        for (std::size_t c = 0; c < d; ++c) gr[c] = (lambda1 / r) * (gr[c] - proj * zr[c]);
      }
    }

    // Zbar = Z + beta D Fbar
    g_fbar.fill(0.0);
    delta.apply_transpose_add(cfg.beta, g_z, g_fbar);

    // Fbar = Y - gamma D^T Z
    k.axpy(g_y.size(), 1.0, g_fbar.data(), g_y.data());
    delta.apply_add(-gamma, g_fbar, g_z);

    // Y = gamma X + M F
    k.axpy(g_out.size(), gamma, g_y.data(), g_out.data());
    if (cfg.fast_path) {
      g_f.fill(0.0);
      ops.a_tilde.multiply_add(1.0 - gamma, g_y, g_f);
    } else {
      k.scale(g_f.size(), 1.0 - gamma, g_y.data(), g_f.data());
      ops.l_tilde.multiply_add(-gamma * cfg.lambda2, g_y, g_f);
    }
  }
  // F^0 = X
  k.axpy(g_out.size(), 1.0, g_f.data(), g_out.data());
  return g_out;
}

std::vector<double> mlp_backward(const MlpModel& model, const Tape& tape, const Matrix& grad_out) {
  const auto& k = simd::active();
  const std::size_t n = grad_out.rows(), h = model.hidden_dim(), c = model.num_classes();
  if (grad_out.cols() != c || tape.hidden.rows() != n) throw InputError("mlp_backward: shape mismatch");

  Matrix g_w1(model.w1.rows(), h), g_b1(1, h), g_w2(h, c), g_b2(1, c);
  Matrix g_hidden(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    const double* go = grad_out.row(i).data();
    k.axpy(c, 1.0, go, g_b2.data());
    for (std::size_t j = 0; j < h; ++j) {
      const double hv = tape.hidden(i, j);
      if (hv != 0.0) k.axpy(c, hv, go, g_w2.row(j).data());
      g_hidden(i, j) = k.dot(c, go, model.w2.row(j).data());
    }
  }
  for (std::size_t q = 0; q < g_hidden.size(); ++q) {
    double g = tape.hidden_pre.data()[q] > 0.0 ? g_hidden.data()[q] : 0.0;
    if (!tape.hidden_scale.empty()) g *= tape.hidden_scale.data()[q];
    g_hidden.data()[q] = g;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* gh = g_hidden.row(i).data();
    k.axpy(h, 1.0, gh, g_b1.data());
    for (std::size_t p = tape.input.row_ptr[i]; p < tape.input.row_ptr[i + 1]; ++p)
      k.axpy(h, tape.input.values[p], gh, g_w1.row(tape.input.col_idx[p]).data());
  }

  std::vector<double> grad;
  grad.reserve(model.parameter_count());
  for (const Matrix* m : {&g_w1, &g_b1, &g_w2, &g_b2}) grad.insert(grad.end(), m->values().begin(), m->values().end());
  return grad;
}

std::vector<double> backward(const MlpModel& model, const Tape& tape, const NormalizedOperators& ops,
                             std::span<const int> labels, const Mask& mask, double weight_decay) {
  if (tape.model_fingerprint != model.fingerprint())
    throw InputError("backward: tape was recorded from different model parameters");
  const Matrix g_logits = cross_entropy_grad(tape.logits, labels, mask);
  const Matrix g_out = emp_backward(tape, ops, g_logits);
  std::vector<double> grad = mlp_backward(model, tape, g_out);
  if (weight_decay != 0.0) {
    const auto& k = simd::active();
    k.axpy(model.w1.size(), weight_decay, model.w1.data(), grad.data());
    const std::size_t off = model.w1.size() + model.b1.size();
    k.axpy(model.w2.size(), weight_decay, model.w2.data(), grad.data() + off);
  }
  return grad;
}

// ---- optimizer -----------------------------------------------------------------

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw InputError("adam_step: size mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
    params[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + eps);
  }
}

// ---- evaluation ------------------------------------------------------------------

double accuracy(const Matrix& logits, std::span<const int> labels, const Mask& mask) {
  check_labels(logits, labels, mask, "accuracy");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    if (best == static_cast<std::size_t>(labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask_count(mask));
}

double evaluate(const MlpModel& model, const Dataset& data, const NormalizedOperators& ops, const TrainConfig& cfg,
                const Mask& mask) {
  return accuracy(forward(model, data, ops, cfg, false).logits, data.labels, mask);
}

TrainResult train(const Dataset& data, const NormalizedOperators& ops, const TrainConfig& cfg,
                  const EpochObserver& observer) {
  cfg.validate();
  data.validate();
  if (ops.num_nodes() != data.num_nodes()) throw InputError("train: operators do not match the dataset graph");
  for (const auto* m : {&data.train_mask, &data.val_mask, &data.test_mask})
    if (mask_count(*m) == 0) throw InputError("train: dataset '" + data.name + "' has an empty split");

  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  result.report.config = cfg;
  result.report.dataset = data.name;
  MlpModel model = MlpModel::init(data.features.cols(), cfg.hidden, data.num_classes, rng);
  const SparseRows x = SparseRows::from_dense(data.features);
  const EmpConfig emp = cfg.emp_config();
  AdamState adam(model.parameter_count());
  std::vector<double> params = model.flatten();

  result.model = model;
  double best_val = -1.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Forward fw = forward(model, x, ops, emp, cfg.dropout, true, &rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss(fw.logits, data.labels, data.train_mask, model, cfg.weight_decay);
    const std::vector<double> grad = backward(model, fw.tape, ops, data.labels, data.train_mask, cfg.weight_decay);
    adam_step(params, grad, adam, cfg.lr);
    model.assign(params);
    if (!model.all_finite()) throw NumericError("train: non-finite parameters after epoch " + std::to_string(epoch));

    const Matrix eval_logits = forward(model, x, ops, emp, 0.0, false).logits;
    rec.val_loss = cross_entropy(eval_logits, data.labels, data.val_mask);
    rec.train_accuracy = accuracy(eval_logits, data.labels, data.train_mask);
    rec.val_accuracy = accuracy(eval_logits, data.labels, data.val_mask);
    result.report.epochs.push_back(rec);
    if (observer) observer(epoch, model, eval_logits);

    if (rec.val_accuracy > best_val || (rec.val_accuracy == best_val && rec.val_loss < best_val_loss)) {
      best_val = rec.val_accuracy;
      best_val_loss = rec.val_loss;
      best_epoch = epoch;
      result.model = model;
    } else if (epoch - best_epoch >= cfg.patience) {
      break;
    }
  }
  result.report.best_epoch = best_epoch;
  result.report.best_val_accuracy = best_val;
  result.report.test_accuracy = evaluate(result.model, data, ops, cfg, data.test_mask);
  return result;
}

// ---- serialization -------------------------------------------------------------

namespace {

json config_json(const TrainConfig& cfg) {
  json j;
  j["lr"] = cfg.lr;
  j["weight_decay"] = cfg.weight_decay;
  j["dropout"] = cfg.dropout;
  j["K"] = cfg.K;
  j["lambda1"] = cfg.lambda1;
  j["lambda2"] = cfg.lambda2;
  j["mode"] = std::string(to_string(cfg.mode));
  j["epochs"] = cfg.epochs;
  j["patience"] = cfg.patience;
  j["seed"] = cfg.seed;
  j["hidden"] = cfg.hidden;
  j["gamma"] = cfg.gamma ? json(*cfg.gamma) : json(nullptr);
  j["beta"] = cfg.beta ? json(*cfg.beta) : json(nullptr);
  return j;
}

TrainConfig config_from(const json& j) {
  TrainConfig cfg;
  cfg.lr = j.at("lr").get<double>();
  cfg.weight_decay = j.at("weight_decay").get<double>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.K = j.at("K").get<std::size_t>();
  cfg.lambda1 = j.at("lambda1").get<double>();
  cfg.lambda2 = j.at("lambda2").get<double>();
  cfg.mode = parse_penalty(j.at("mode").get<std::string>());
  cfg.epochs = j.at("epochs").get<std::size_t>();
  cfg.patience = j.at("patience").get<std::size_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.hidden = j.at("hidden").get<std::size_t>();
  if (j.contains("gamma") && !j["gamma"].is_null()) cfg.gamma = j["gamma"].get<double>();
  if (j.contains("beta") && !j["beta"].is_null()) cfg.beta = j["beta"].get<double>();
  return cfg;
}

json matrix_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

}  // namespace

std::string to_json(const TrainConfig& cfg) { return config_json(cfg).dump(2); }

TrainConfig train_config_from_json(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw InputError(std::string("train config JSON: ") + e.what());
  }
}

std::string to_json(const TrainReport& report) {
  json j;
  j["dataset"] = report.dataset;
  j["config"] = config_json(report.config);
  j["seed"] = report.config.seed;
  j["best_epoch"] = report.best_epoch;
  j["best_val_accuracy"] = report.best_val_accuracy;
  j["test_accuracy"] = report.test_accuracy;
  json epochs = json::array();
  for (const auto& e : report.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.val_loss},
                      {"train_accuracy", e.train_accuracy},
                      {"val_accuracy", e.val_accuracy}});
  j["epochs"] = std::move(epochs);
  return j.dump(2);
}

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model, const TrainConfig& cfg) {
  json j;
  j["format"] = "egnn-mlp-checkpoint";
  j["version"] = 1;
  j["config"] = config_json(cfg);
  j["w1"] = matrix_json(model.w1);
  j["b1"] = matrix_json(model.b1);
  j["w2"] = matrix_json(model.w2);
  j["b2"] = matrix_json(model.b2);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write checkpoint '" + path.string() + "'");
  out << j.dump() << '\n';
  if (!out) throw InputError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open checkpoint '" + path.string() + "'");
  try {
    const json j = json::parse(in);
    if (j.value("format", "") != "egnn-mlp-checkpoint") throw InputError(path.string() + ": not a model checkpoint");
    Checkpoint c;
    c.config = config_from(j.at("config"));
    c.model.w1 = matrix_from(j.at("w1"));
    c.model.b1 = matrix_from(j.at("b1"));
    c.model.w2 = matrix_from(j.at("w2"));
    c.model.b2 = matrix_from(j.at("b2"));
    const auto h = c.model.w1.cols(), cl = c.model.w2.cols();
    if (c.model.b1.size() != h || c.model.w2.rows() != h || c.model.b2.size() != cl)
      throw InputError(path.string() + ": inconsistent parameter shapes");
    return c;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace egnn
