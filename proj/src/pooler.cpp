// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/pooler.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "masc/errors.hpp"
#include "masc/tensor_store.hpp"

namespace masc {
namespace {

using Eigen::Index;
using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void expect_vec(const Eigen::VectorXf& v, Index n, const char* what) {
  if (v.size() != n)
    throw DimensionError(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(n));
  if (!v.allFinite()) throw DataError(std::string(what) + " contains non-finite values");
}

void expect_mat(const RowMatrixF& m, Index rows, Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols)
    throw DimensionError(std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  if (!m.allFinite()) throw DataError(std::string(what) + " contains non-finite values");
}

Eigen::VectorXd layer_norm(const Eigen::VectorXd& x, const LayerNormParams& p, double eps) {
  const double mean = x.mean();
  const Eigen::VectorXd centered = x.array() - mean;
  const double var = centered.squaredNorm() / static_cast<double>(x.size());
  const Eigen::VectorXd normed = centered / std::sqrt(var + eps);
  return normed.cwiseProduct(p.scale.cast<double>()) + p.offset.cast<double>();
}

double activate(double x, Activation act) {
  switch (act) {
    case Activation::GeluTanh: {
      const double c = std::sqrt(2.0 / std::numbers::pi);
      return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
    }
    case Activation::GeluErf:
      return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
  }
  return x;
}

const char* activation_name(Activation a) { return a == Activation::GeluTanh ? "gelu_tanh" : "gelu"; }

Activation parse_activation(const std::string& s) {
  if (s == "gelu_tanh" || s == "gelu_pytorch_tanh") return Activation::GeluTanh;
  if (s == "gelu") return Activation::GeluErf;
  throw SchemaError("unknown pooler activation '" + s + "'");
}

Eigen::VectorXf load_vector(const std::filesystem::path& dir, const char* name) {
  Tensor t = load_tensor(dir / (std::string(name) + ".mten"));
  // Leading singleton axes are allowed, e.g. a [1, 1, D] probe.
  for (std::size_t i = 0; i + 1 < t.shape.size(); ++i) {
    if (t.shape[i] != 1) throw SchemaError(std::string(name) + " must be a vector");
  }
  return Eigen::Map<const Eigen::VectorXf>(t.data.data(), static_cast<Index>(t.data.size()));
}

RowMatrixF load_matrix(const std::filesystem::path& dir, const char* name) {
  Tensor t = load_tensor(dir / (std::string(name) + ".mten"));
  if (t.shape.size() != 2) throw SchemaError(std::string(name) + " must be a rank-2 tensor");
  return Eigen::Map<const RowMatrixF>(t.data.data(), t.shape[0], t.shape[1]);
}

void save_vector(const std::filesystem::path& dir, const char* name, const Eigen::VectorXf& v) {
  Tensor t;
  t.name = name;
  t.shape = {v.size()};
  t.data.assign(v.data(), v.data() + v.size());
  save_tensor(dir / (std::string(name) + ".mten"), t);
}

void save_matrix(const std::filesystem::path& dir, const char* name, const RowMatrixF& m) {
  Tensor t;
  t.name = name;
  t.shape = {m.rows(), m.cols()};
  t.data.assign(m.data(), m.data() + m.size());
  save_tensor(dir / (std::string(name) + ".mten"), t);
}

}  // namespace

void PoolerHead::validate() const {
  const Index d = dim();
  if (d < 1) throw DimensionError("pooler probe is empty");
  if (num_heads < 1 || d % num_heads != 0)
    throw DimensionError("D=" + std::to_string(d) + " not divisible by num_heads=" + std::to_string(num_heads));
  if (!(layer_norm_eps > 0.0)) throw SchemaError("layer_norm_eps must be positive");
  expect_vec(probe, d, "probe");
  expect_mat(q_weight, d, d, "q_weight");
  expect_mat(k_weight, d, d, "k_weight");
  expect_mat(v_weight, d, d, "v_weight");
  expect_mat(out_weight, d, d, "out_weight");
  expect_vec(q_bias, d, "q_bias");
  expect_vec(k_bias, d, "k_bias");
  expect_vec(v_bias, d, "v_bias");
  expect_vec(out_bias, d, "out_bias");
  if (pre_norm) {
    expect_vec(pre_norm->scale, d, "pre_norm_scale");
    expect_vec(pre_norm->offset, d, "pre_norm_offset");
  }
  expect_vec(post_norm.scale, d, "norm_scale");
  expect_vec(post_norm.offset, d, "norm_offset");
  const Index h = hidden_dim();
  if (h < 1) throw DimensionError("pooler hidden_dim must be positive");
  expect_mat(fc1_weight, h, d, "fc1_weight");
  expect_vec(fc1_bias, h, "fc1_bias");
  expect_mat(fc2_weight, d, h, "fc2_weight");
  expect_vec(fc2_bias, d, "fc2_bias");
}

PoolerHead PoolerHead::load(const std::filesystem::path& dir) {
  const auto config_path = dir / "head.json";
  std::ifstream in(config_path);
  if (!in) throw MissingAssetError({config_path.string()});
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(config_path.string() + ": " + e.what());
  }

  PoolerHead head;
  try {
    head.num_heads = config.at("num_heads").get<int>();
    head.layer_norm_eps = config.value("layer_norm_eps", 1e-6);
    head.activation = parse_activation(config.value("activation", std::string("gelu_tanh")));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(config_path.string() + ": " + e.what());
  }

  head.probe = load_vector(dir, "probe");
  if (std::filesystem::exists(dir / "in_proj_weight.mten")) {
    // Packed [3D, D] query/key/value projection as exported by PyTorch.
    const RowMatrixF packed = load_matrix(dir, "in_proj_weight");
    const Eigen::VectorXf packed_bias = load_vector(dir, "in_proj_bias");
    const Index d = head.dim();
    expect_mat(packed, 3 * d, d, "in_proj_weight");
    expect_vec(packed_bias, 3 * d, "in_proj_bias");
    head.q_weight = packed.topRows(d);
    head.k_weight = packed.middleRows(d, d);
    head.v_weight = packed.bottomRows(d);
    head.q_bias = packed_bias.head(d);
    head.k_bias = packed_bias.segment(d, d);
    head.v_bias = packed_bias.tail(d);
  } else {
    head.q_weight = load_matrix(dir, "q_weight");
    head.k_weight = load_matrix(dir, "k_weight");
    head.v_weight = load_matrix(dir, "v_weight");
    head.q_bias = load_vector(dir, "q_bias");
    head.k_bias = load_vector(dir, "k_bias");
    head.v_bias = load_vector(dir, "v_bias");
  }
  head.out_weight = load_matrix(dir, "out_weight");
  head.out_bias = load_vector(dir, "out_bias");
  if (std::filesystem::exists(dir / "pre_norm_scale.mten"))
    head.pre_norm = LayerNormParams{load_vector(dir, "pre_norm_scale"), load_vector(dir, "pre_norm_offset")};
  head.post_norm = LayerNormParams{load_vector(dir, "norm_scale"), load_vector(dir, "norm_offset")};
  head.fc1_weight = load_matrix(dir, "fc1_weight");
  head.fc1_bias = load_vector(dir, "fc1_bias");
  head.fc2_weight = load_matrix(dir, "fc2_weight");
  head.fc2_bias = load_vector(dir, "fc2_bias");
  head.validate();
  return head;
}

void PoolerHead::save(const std::filesystem::path& dir) const {
  validate();
  std::filesystem::create_directories(dir);
  const nlohmann::json config = {
      {"num_heads", num_heads},
      {"layer_norm_eps", layer_norm_eps},
      {"activation", activation_name(activation)},
      {"dim", dim()},
      {"hidden_dim", hidden_dim()},
  };
  write_file_atomic(dir / "head.json", config.dump(2) + "\n");
  save_vector(dir, "probe", probe);
  save_matrix(dir, "q_weight", q_weight);
  save_matrix(dir, "k_weight", k_weight);
  save_matrix(dir, "v_weight", v_weight);
  save_matrix(dir, "out_weight", out_weight);
  save_vector(dir, "q_bias", q_bias);
  save_vector(dir, "k_bias", k_bias);
  save_vector(dir, "v_bias", v_bias);
  save_vector(dir, "out_bias", out_bias);
  if (pre_norm) {
    save_vector(dir, "pre_norm_scale", pre_norm->scale);
    save_vector(dir, "pre_norm_offset", pre_norm->offset);
  }
  save_vector(dir, "norm_scale", post_norm.scale);
  save_vector(dir, "norm_offset", post_norm.offset);
  save_matrix(dir, "fc1_weight", fc1_weight);
  save_vector(dir, "fc1_bias", fc1_bias);
  save_matrix(dir, "fc2_weight", fc2_weight);
  save_vector(dir, "fc2_bias", fc2_bias);
}

PoolTrace attention_pool_trace(const PatchGrid& grid, const PoolerHead& head, const PatchMask* suppress) {
  const Index d = head.dim();
  if (grid.dim() != d)
    throw DimensionError("pooler expects D=" + std::to_string(d) + ", grid has D=" + std::to_string(grid.dim()));
  const Index n = grid.size();
  if (suppress && static_cast<Index>(suppress->size()) != n)
    throw DimensionError("suppression mask has " + std::to_string(suppress->size()) +
                         " cells but grid has N=" + std::to_string(n));
  if (suppress && suppress->count() == suppress->size())
    throw EmptyBackgroundError("every patch is suppressed; nothing left to pool");

  RowMatrixD x = grid.tokens().cast<double>();
  if (head.pre_norm) {
    for (Index j = 0; j < n; ++j) x.row(j) = layer_norm(x.row(j).transpose(), *head.pre_norm, head.layer_norm_eps);
  }

  const Index heads = head.num_heads;
  const Index dh = d / heads;
  const Eigen::MatrixXd wk = head.k_weight.cast<double>();
  const Eigen::MatrixXd wv = head.v_weight.cast<double>();
  const Eigen::VectorXd bk = head.k_bias.cast<double>();
  const Eigen::VectorXd bv = head.v_bias.cast<double>();
  const Eigen::VectorXd q = head.q_weight.cast<double>() * head.probe.cast<double>() + head.q_bias.cast<double>();
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  // <q_h, Wk_h x + bk_h> = x . (Wk_h^T q_h) + q_h . bk_h, so keys are never
  // materialised. Likewise sum_j a_j (Wv_h x_j + bv_h) = Wv_h xbar + (sum a) bv_h.
  Eigen::MatrixXd key_query(d, heads);
  Eigen::VectorXd key_offset(heads);
  for (Index h = 0; h < heads; ++h) {
    const auto qh = q.segment(h * dh, dh);
    key_query.col(h) = wk.middleRows(h * dh, dh).transpose() * qh;
    key_offset(h) = qh.dot(bk.segment(h * dh, dh));
  }
  Eigen::MatrixXd logits = (x * key_query).transpose();  // heads x N
  for (Index h = 0; h < heads; ++h) logits.row(h) = (logits.row(h).array() + key_offset(h)) * inv_sqrt_dh;

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (suppress) {
    for (Index j = 0; j < n; ++j) {
      if ((*suppress)[static_cast<std::size_t>(j)]) logits.col(j).setConstant(kNegInf);
    }
  }

  PoolTrace trace;
  trace.weights.resize(heads, n);
  trace.context.resize(d);
  for (Index h = 0; h < heads; ++h) {
    const double top = logits.row(h).maxCoeff();
    double total = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double e = std::exp(logits(h, j) - top);
      trace.weights(h, j) = e;
      total += e;
    }
    trace.weights.row(h) /= total;

    Eigen::VectorXd xbar = Eigen::VectorXd::Zero(d);
    double weight_sum = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double a = trace.weights(h, j);
      if (a == 0.0) continue;
      xbar += a * x.row(j).transpose();
      weight_sum += a;
    }
    trace.context.segment(h * dh, dh) = wv.middleRows(h * dh, dh) * xbar + weight_sum * bv.segment(h * dh, dh);
  }

  trace.attended = head.out_weight.cast<double>() * trace.context + head.out_bias.cast<double>();
  const Eigen::VectorXd normed = layer_norm(trace.attended, head.post_norm, head.layer_norm_eps);
  Eigen::VectorXd hidden = head.fc1_weight.cast<double>() * normed + head.fc1_bias.cast<double>();
  for (Index i = 0; i < hidden.size(); ++i) hidden(i) = activate(hidden(i), head.activation);
  trace.pooled = trace.attended + head.fc2_weight.cast<double>() * hidden + head.fc2_bias.cast<double>();
  return trace;
}

Eigen::VectorXf attention_pool(const PatchGrid& grid, const PoolerHead& head) {
  return attention_pool_trace(grid, head, nullptr).pooled.cast<float>();
}

Eigen::VectorXf attention_pool(const PatchGrid& grid, const PoolerHead& head, const PatchMask& suppress) {
  return attention_pool_trace(grid, head, &suppress).pooled.cast<float>();
}

}  // namespace masc
