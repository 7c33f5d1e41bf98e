#include "egnn/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "egnn/error.hpp"
#include "egnn/kernels.hpp"

namespace egnn {

std::vector<double> edge_difference_norms(const Matrix& f, const NormalizedOperators& ops) {
  if (f.rows() != ops.num_nodes()) throw InputError("edge_difference_norms: signal rows do not match the graph");
  Matrix diff;
  ops.delta_tilde.apply(f, diff);
  const auto& k = simd::active();
  std::vector<double> norms(diff.rows());
  for (std::size_t l = 0; l < diff.rows(); ++l) norms[l] = std::sqrt(k.sum_squares(diff.cols(), diff.row(l).data()));
  return norms;
}

EdgeDiagnostics edge_diagnostics(const Matrix& f, const NormalizedOperators& ops, std::span<const int> labels,
                                 double threshold) {
  if (labels.size() != ops.num_nodes()) throw InputError("edge_diagnostics: one label per node required");
  if (!(threshold > 0.0)) throw InputError("edge_diagnostics: threshold must be > 0");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> norms = edge_difference_norms(f, ops);
  EdgeDiagnostics d;
  d.threshold = threshold;
  double sum_correct = 0.0, sum_wrong = 0.0;
  std::size_t below = 0;
  for (std::size_t l = 0; l < norms.size(); ++l) {
    const bool wrong = labels[ops.delta_tilde.tail(l)] != labels[ops.delta_tilde.head(l)];
    const bool sparse = norms[l] < threshold;
    below += sparse ? 1 : 0;
    if (wrong) {
      ++d.wrong_edges;
      sum_wrong += norms[l];
      d.sparse_wrong += sparse ? 1 : 0;
    } else {
      ++d.correct_edges;
      sum_correct += norms[l];
      d.sparse_correct += sparse ? 1 : 0;
    }
  }
  d.mean_correct = d.correct_edges ? sum_correct / static_cast<double>(d.correct_edges) : nan;
  d.mean_wrong = d.wrong_edges ? sum_wrong / static_cast<double>(d.wrong_edges) : nan;
  d.smoothness_ratio = (d.correct_edges && d.wrong_edges && d.mean_correct > 0.0) ? d.mean_wrong / d.mean_correct : nan;
  d.sparsity_ratio = norms.empty() ? nan : static_cast<double>(below) / static_cast<double>(norms.size());
  return d;
}

std::string to_json(const EdgeDiagnostics& d) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("undef"); };
  nlohmann::json j;
  j["correct_edges"] = d.correct_edges;
  j["wrong_edges"] = d.wrong_edges;
  j["mean_norm_correct"] = num(d.mean_correct);
  j["mean_norm_wrong"] = num(d.mean_wrong);
  j["smoothness_ratio"] = num(d.smoothness_ratio);
  j["threshold"] = d.threshold;
  j["sparsity_ratio"] = num(d.sparsity_ratio);
  j["sparse_correct_edges"] = d.sparse_correct;
  j["sparse_wrong_edges"] = d.sparse_wrong;
  return j.dump(2);
}

}  // namespace egnn
