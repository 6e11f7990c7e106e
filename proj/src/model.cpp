// Copyright 2026 The EPF Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "epf/model.hpp"

#include <cmath>
#include <string>

#include "epf/error.hpp"
#include "epf/kernels.hpp"

namespace epf {

namespace {

constexpr const char* kGateNames[4] = {"i", "f", "o", "g"};

// Pointers to the gate tensors in i, f, o, g order.
struct GateRefs {
  const Tensor2* w[4];
  const Tensor2* u[4];
  const Tensor2* b[4];
};

GateRefs gates(const LstmLayerParams& p) {
  return {{&p.w_i, &p.w_f, &p.w_o, &p.w_g},
          {&p.u_i, &p.u_f, &p.u_o, &p.u_g},
          {&p.b_i, &p.b_f, &p.b_o, &p.b_g}};
}

struct MutGateRefs {
  Tensor2* w[4];
  Tensor2* u[4];
  Tensor2* b[4];
};

MutGateRefs gates(LstmLayerParams& p) {
  return {{&p.w_i, &p.w_f, &p.w_o, &p.w_g},
          {&p.u_i, &p.u_f, &p.u_o, &p.u_g},
          {&p.b_i, &p.b_f, &p.b_o, &p.b_g}};
}

// Scratch buffers reused across the steps of one pass.
struct Scratch {
  std::vector<double> z[4];
  std::vector<double> products;

  explicit Scratch(std::size_t hidden) {
    for (auto& v : z) v.assign(hidden, 0.0);
  }
};

// One LSTM step. Writes gate activations, c, tanh(c) and h into the output
// spans. When order_invariant is set, input projections are summed in a
// canonical order so that permuting input features (together with weight
// columns) is bit-exact.
void cell_forward(const LstmLayerParams& p, const double* x, const double* h_prev,
                  const double* c_prev, bool order_invariant, Scratch& s, double* i_out,
                  double* f_out, double* o_out, double* g_out, double* c_out, double* tanh_c_out,
                  double* h_out) {
  const std::size_t hidden = p.hidden_size;
  const std::size_t in = p.input_size;
  const GateRefs gr = gates(p);
  for (int k = 0; k < 4; ++k) {
    double* z = s.z[k].data();
    const Tensor2& w = *gr.w[k];
    const Tensor2& b = *gr.b[k];
    for (std::size_t r = 0; r < hidden; ++r) {
      const double wx = order_invariant
                            ? kernels::dot_order_invariant(w.row_ptr(r), x, in, s.products)
                            : kernels::dot(w.row_ptr(r), x, in);
      z[r] = b(r, 0) + wx;
    }
    if (h_prev != nullptr) kernels::gemv(gr.u[k]->flat().data(), hidden, hidden, h_prev, z);
  }
  for (std::size_t r = 0; r < hidden; ++r) {
    const double ig = stable_sigmoid(s.z[0][r]);
    const double fg = stable_sigmoid(s.z[1][r]);
    const double og = stable_sigmoid(s.z[2][r]);
    const double gg = std::tanh(s.z[3][r]);
    const double cp = c_prev != nullptr ? c_prev[r] : 0.0;
    const double c = fg * cp + ig * gg;
    const double tc = std::tanh(c);
    i_out[r] = ig;
    f_out[r] = fg;
    o_out[r] = og;
    g_out[r] = gg;
    c_out[r] = c;
    tanh_c_out[r] = tc;
    h_out[r] = og * tc;
  }
}

void run_layer(const LstmLayerParams& p, LayerTrace& tr, bool order_invariant) {
  Scratch s(p.hidden_size);
  const std::size_t hidden = p.hidden_size;
  for (std::size_t t = 0; t < tr.steps; ++t) {
    const std::size_t off = t * hidden;
    const double* h_prev = t == 0 ? nullptr : tr.h.data() + off - hidden;
    const double* c_prev = t == 0 ? nullptr : tr.c.data() + off - hidden;
    cell_forward(p, tr.x.data() + t * p.input_size, h_prev, c_prev, order_invariant, s,
                 tr.i.data() + off, tr.f.data() + off, tr.o.data() + off, tr.g.data() + off,
                 tr.c.data() + off, tr.tanh_c.data() + off, tr.h.data() + off);
  }
}

// BPTT through one layer. dh_seq holds the upstream gradient on every step's
// output h (steps x hidden). If dx_seq is non-null it receives the gradient on
// every step's input (steps x input).
void layer_backward(const LstmLayerParams& p, const LayerTrace& tr,
                    std::span<const double> dh_seq, LstmLayerParams& g, double* dx_seq) {
  const std::size_t hidden = p.hidden_size;
  const std::size_t in = p.input_size;
  const GateRefs pr = gates(p);
  const MutGateRefs gr = gates(g);

  std::vector<double> dh_next(hidden, 0.0), dc_next(hidden, 0.0);
  std::vector<double> dz[4];
  for (auto& v : dz) v.assign(hidden, 0.0);

  for (std::size_t t = tr.steps; t-- > 0;) {
    const std::size_t off = t * hidden;
    const double* ig = tr.i.data() + off;
    const double* fg = tr.f.data() + off;
    const double* og = tr.o.data() + off;
    const double* gg = tr.g.data() + off;
    const double* tc = tr.tanh_c.data() + off;
    const double* c_prev = t == 0 ? nullptr : tr.c.data() + off - hidden;

    for (std::size_t r = 0; r < hidden; ++r) {
      const double dh = dh_seq[off + r] + dh_next[r];
      const double dc = dc_next[r] + dh * og[r] * (1.0 - tc[r] * tc[r]);
      const double d_o = dh * tc[r];
      const double d_i = dc * gg[r];
      const double d_g = dc * ig[r];
      const double d_f = c_prev != nullptr ? dc * c_prev[r] : 0.0;
      dz[0][r] = d_i * ig[r] * (1.0 - ig[r]);
      dz[1][r] = d_f * fg[r] * (1.0 - fg[r]);
      dz[2][r] = d_o * og[r] * (1.0 - og[r]);
      dz[3][r] = d_g * (1.0 - gg[r] * gg[r]);
      dc_next[r] = dc * fg[r];
    }

    const double* x = tr.x.data() + t * in;
    const double* h_prev = t == 0 ? nullptr : tr.h.data() + off - hidden;
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (int k = 0; k < 4; ++k) {
      const double* d = dz[k].data();
      kernels::axpy(1.0, d, gr.b[k]->flat().data(), hidden);
      kernels::rank1(gr.w[k]->flat().data(), hidden, in, d, x);
      if (h_prev != nullptr) {
        kernels::rank1(gr.u[k]->flat().data(), hidden, hidden, d, h_prev);
        kernels::gemv_t(pr.u[k]->flat().data(), hidden, hidden, d, dh_next.data());
      }
      if (dx_seq != nullptr) {
        kernels::gemv_t(pr.w[k]->flat().data(), hidden, in, d, dx_seq + t * in);
      }
    }
  }
}

void check_window(const ModelParams& params, std::span<const FeatureDay> window) {
  if (window.empty()) throw ContractError("forward: empty window");
  const std::size_t m = params.input_size();
  for (const FeatureDay& day : window) {
    if (day.x.rows() != window.front().x.rows()) {
      throw DimensionError("forward: inconsistent feature counts in window", day.x.rows(),
                           day.x.cols(), window.front().x.rows(), window.front().x.cols());
    }
    if (day.x.rows() != m || day.x.cols() != kHoursPerDay) {
      throw DimensionError("forward: feature-day shape does not match model input", day.x.rows(),
                           day.x.cols(), m, kHoursPerDay);
    }
  }
}

ForwardTrace forward_impl(const ModelParams& params, std::span<const FeatureDay> window,
                          DropoutMasks masks) {
  check_window(params, window);
  const std::size_t m = params.input_size();
  const std::size_t hidden = params.hidden_size();
  const std::size_t steps = window.size() * kHoursPerDay;
  if (!masks.after_layer1.empty() && masks.after_layer1.size() != steps * hidden) {
    throw ContractError("forward: layer-1 dropout mask has wrong size");
  }
  if (!masks.after_layer2.empty() && masks.after_layer2.size() != steps * hidden) {
    throw ContractError("forward: layer-2 dropout mask has wrong size");
  }

  ForwardTrace tr;
  tr.layer1.resize(m, hidden, steps);
  for (std::size_t d = 0; d < window.size(); ++d) {
    const Tensor2& x = window[d].x;
    for (std::size_t hour = 0; hour < kHoursPerDay; ++hour) {
      double* dst = tr.layer1.x.data() + (d * kHoursPerDay + hour) * m;
      for (std::size_t f = 0; f < m; ++f) dst[f] = x(f, hour);
    }
  }
  run_layer(params.layer1, tr.layer1, /*order_invariant=*/true);

  tr.layer2.resize(hidden, params.layer2.hidden_size, steps);
  if (masks.after_layer1.empty()) {
    tr.layer2.x = tr.layer1.h;
  } else {
    kernels::hadamard(tr.layer1.h.data(), masks.after_layer1.data(), tr.layer2.x.data(),
                      steps * hidden);
  }
  run_layer(params.layer2, tr.layer2, /*order_invariant=*/false);

  const std::size_t h2 = params.layer2.hidden_size;
  auto last = tr.layer2.h_at(steps - 1);
  tr.head_input.assign(last.begin(), last.end());
  if (!masks.after_layer2.empty()) {
    const double* mask = masks.after_layer2.data() + (steps - 1) * h2;
    for (std::size_t r = 0; r < h2; ++r) tr.head_input[r] *= mask[r];
  }
  for (std::size_t k = 0; k < kOutputSize; ++k) {
    tr.prediction[k] = params.b_y(k, 0) + kernels::dot(params.w_y.row_ptr(k), tr.head_input.data(), h2);
  }
  tr.masks = std::move(masks);
  return tr;
}

std::vector<double> draw_mask(std::size_t n, double rate, SeededRng& rng) {
  std::vector<double> mask(n);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& v : mask) v = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

void check_layer_shapes(const LstmLayerParams& p, const char* layer) {
  const auto fail = [&](const std::string& tensor, const Tensor2& t, std::size_t r,
                        std::size_t c) {
    if (t.rows() != r || t.cols() != c) {
      throw ContractError(std::string(layer) + "." + tensor + " has shape " + t.shape_string() +
                          ", expected " + std::to_string(r) + "x" + std::to_string(c));
    }
  };
  const GateRefs gr = gates(p);
  for (int k = 0; k < 4; ++k) {
    fail(std::string("W_") + kGateNames[k], *gr.w[k], p.hidden_size, p.input_size);
    fail(std::string("U_") + kGateNames[k], *gr.u[k], p.hidden_size, p.hidden_size);
    fail(std::string("b_") + kGateNames[k], *gr.b[k], p.hidden_size, 1);
  }
}

template <typename Params, typename View>
std::vector<View> tensors_impl(Params& p) {
  std::vector<View> out;
  out.reserve(26);
  const auto add_layer = [&](auto& layer, const char* prefix, LayerId id) {
    auto g = gates(layer);
    for (int k = 0; k < 4; ++k) out.push_back({std::string(prefix) + ".W_" + kGateNames[k], id, g.w[k]});
    for (int k = 0; k < 4; ++k) out.push_back({std::string(prefix) + ".U_" + kGateNames[k], id, g.u[k]});
    for (int k = 0; k < 4; ++k) out.push_back({std::string(prefix) + ".b_" + kGateNames[k], id, g.b[k]});
  };
  add_layer(p.layer1, "layer1", LayerId::layer1);
  add_layer(p.layer2, "layer2", LayerId::layer2);
  out.push_back({"dense.W_y", LayerId::dense, &p.w_y});
  out.push_back({"dense.b_y", LayerId::dense, &p.b_y});
  return out;
}

}  // namespace

void LayerTrace::resize(std::size_t in, std::size_t hidden, std::size_t n) {
  input_size = in;
  hidden_size = hidden;
  steps = n;
  x.assign(n * in, 0.0);
  for (auto* v : {&i, &f, &o, &g, &c, &tanh_c, &h}) v->assign(n * hidden, 0.0);
}

LstmLayerParams LstmLayerParams::zeros(std::size_t input_size, std::size_t hidden_size) {
  LstmLayerParams p;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  for (Tensor2* t : {&p.w_i, &p.w_f, &p.w_o, &p.w_g}) *t = Tensor2(hidden_size, input_size);
  for (Tensor2* t : {&p.u_i, &p.u_f, &p.u_o, &p.u_g}) *t = Tensor2(hidden_size, hidden_size);
  for (Tensor2* t : {&p.b_i, &p.b_f, &p.b_o, &p.b_g}) *t = Tensor2(hidden_size, 1);
  return p;
}

void LstmLayerParams::check_shapes() const { check_layer_shapes(*this, "layer"); }

ModelParams ModelParams::zeros(std::size_t input_size, std::size_t hidden_size,
                               double dropout_rate) {
  ModelParams p;
  p.layer1 = LstmLayerParams::zeros(input_size, hidden_size);
  p.layer2 = LstmLayerParams::zeros(hidden_size, hidden_size);
  p.w_y = Tensor2(kOutputSize, hidden_size);
  p.b_y = Tensor2(kOutputSize, 1);
  p.dropout_rate = dropout_rate;
  return p;
}

std::size_t ModelParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& v : tensors(*this)) n += v.tensor->size();
  return n;
}

void ModelParams::validate() const {
  check_layer_shapes(layer1, "layer1");
  check_layer_shapes(layer2, "layer2");
  if (layer2.input_size != layer1.hidden_size) {
    throw ContractError("layer2.input_size must equal layer1.hidden_size");
  }
  if (w_y.rows() != kOutputSize || w_y.cols() != layer2.hidden_size) {
    throw ContractError("dense.W_y has shape " + w_y.shape_string() + ", expected 24x" +
                        std::to_string(layer2.hidden_size));
  }
  if (b_y.rows() != kOutputSize || b_y.cols() != 1) {
    throw ContractError("dense.b_y has shape " + b_y.shape_string() + ", expected 24x1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ContractError("dropout_rate must lie in [0, 1)");
  }
  for (const auto& v : tensors(*this)) {
    if (!v.tensor->all_finite()) throw ContractError(v.name + " contains non-finite values");
  }
}

std::vector<TensorView> tensors(ModelParams& p) { return tensors_impl<ModelParams, TensorView>(p); }

std::vector<ConstTensorView> tensors(const ModelParams& p) {
  return tensors_impl<const ModelParams, ConstTensorView>(p);
}

ModelGrads zeros_like(const ModelParams& p) {
  ModelGrads g = ModelParams::zeros(p.layer1.input_size, p.layer1.hidden_size, p.dropout_rate);
  if (p.layer2.hidden_size != p.layer1.hidden_size) {
    g.layer2 = LstmLayerParams::zeros(p.layer2.input_size, p.layer2.hidden_size);
    g.w_y = Tensor2(kOutputSize, p.layer2.hidden_size);
  }
  return g;
}

std::vector<double> flatten(const ModelParams& p) {
  std::vector<double> out;
  out.reserve(p.parameter_count());
  for (const auto& v : tensors(p)) {
    auto f = v.tensor->flat();
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

void unflatten(std::span<const double> flat, ModelParams& p) {
  if (flat.size() != p.parameter_count()) {
    throw ContractError("unflatten: expected " + std::to_string(p.parameter_count()) +
                        " values, got " + std::to_string(flat.size()));
  }
  std::size_t pos = 0;
  for (auto& v : tensors(p)) {
    auto dst = v.tensor->flat();
    std::copy(flat.begin() + pos, flat.begin() + pos + dst.size(), dst.begin());
    pos += dst.size();
  }
}

void require_same_shapes(const ModelParams& a, const ModelParams& b, const char* what) {
  const auto va = tensors(a);
  const auto vb = tensors(b);
  for (std::size_t k = 0; k < va.size(); ++k) {
    if (!va[k].tensor->same_shape(*vb[k].tensor)) {
      throw ContractError(std::string(what) + ": shape mismatch on " + va[k].name + " (" +
                          va[k].tensor->shape_string() + " vs " + vb[k].tensor->shape_string() +
                          ")");
    }
  }
}

HiddenState lstm_cell_step(const LstmLayerParams& params, std::span<const double> x,
                           const HiddenState& prev) {
  if (x.size() != params.input_size) {
    throw DimensionError("lstm_cell_step: input", x.size(), 1, params.input_size, 1);
  }
  if (prev.h.size() != params.hidden_size || prev.c.size() != params.hidden_size) {
    throw DimensionError("lstm_cell_step: state", prev.h.size(), 1, params.hidden_size, 1);
  }
  const std::size_t n = params.hidden_size;
  Scratch s(n);
  std::vector<double> i(n), f(n), o(n), g(n), tc(n);
  HiddenState next = HiddenState::zeros(n);
  cell_forward(params, x.data(), prev.h.data(), prev.c.data(), false, s, i.data(), f.data(),
               o.data(), g.data(), next.c.data(), tc.data(), next.h.data());
  return next;
}

ModelParams init_params(const ModelSpec& spec, SeededRng& rng) {
  if (spec.input_size < 1 || spec.hidden_size < 1) {
    throw ConfigError("init_params: input_size and hidden_size must be >= 1");
  }
  ModelParams p = ModelParams::zeros(spec.input_size, spec.hidden_size, spec.dropout_rate);
  const auto glorot = [&](Tensor2& t) {
    const double fan_in = double(t.cols());
    const double fan_out = double(t.rows());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.flat()) v = rng.uniform(-limit, limit);
  };
  for (auto& v : tensors(p)) {
    const bool is_bias = v.name.find(".b_") != std::string::npos;
    if (!is_bias) glorot(*v.tensor);
  }
  for (LstmLayerParams* layer : {&p.layer1, &p.layer2}) {
    for (double& v : layer->b_f.flat()) v = 1.0;
  }
  p.validate();
  return p;
}

ForwardTrace forward(const ModelParams& params, std::span<const FeatureDay> window, Mode mode,
                     SeededRng* rng) {
  DropoutMasks masks;
  if (mode == Mode::train && params.dropout_rate > 0.0) {
    if (rng == nullptr) throw ContractError("forward: train mode with dropout requires an rng");
    check_window(params, window);
    const std::size_t n = window.size() * kHoursPerDay * params.hidden_size();
    masks.after_layer1 = draw_mask(n, params.dropout_rate, *rng);
    masks.after_layer2 = draw_mask(n, params.dropout_rate, *rng);
  }
  return forward_impl(params, window, std::move(masks));
}

ForwardTrace forward_with_masks(const ModelParams& params, std::span<const FeatureDay> window,
                                DropoutMasks masks) {
  return forward_impl(params, window, std::move(masks));
}

PriceVector predict(const ModelParams& params, std::span<const FeatureDay> window) {
  return forward_impl(params, window, {}).prediction;
}

void backward_accumulate(const ModelParams& params, const ForwardTrace& trace,
                         std::span<const double> dloss_dprediction, ModelGrads& grads) {
  if (dloss_dprediction.size() != kOutputSize) {
    throw ContractError("backward: loss gradient must have 24 entries");
  }
  const std::size_t hidden = params.hidden_size();
  const std::size_t h2 = params.layer2.hidden_size;
  const std::size_t steps = trace.steps();
  if (steps == 0 || trace.layer1.input_size != params.input_size() ||
      trace.layer1.hidden_size != hidden || trace.layer2.hidden_size != h2 ||
      trace.layer2.steps != steps || trace.head_input.size() != h2) {
    throw ContractError("backward: trace was not produced with these parameters");
  }
  require_same_shapes(params, grads, "backward");

  // Dense head.
  for (std::size_t k = 0; k < kOutputSize; ++k) grads.b_y(k, 0) += dloss_dprediction[k];
  kernels::rank1(grads.w_y.flat().data(), kOutputSize, h2, dloss_dprediction.data(),
                 trace.head_input.data());
  std::vector<double> dh2(steps * h2, 0.0);
  double* dh_last = dh2.data() + (steps - 1) * h2;
  kernels::gemv_t(params.w_y.flat().data(), kOutputSize, h2, dloss_dprediction.data(), dh_last);
  if (!trace.masks.after_layer2.empty()) {
    const double* mask = trace.masks.after_layer2.data() + (steps - 1) * h2;
    for (std::size_t r = 0; r < h2; ++r) dh_last[r] *= mask[r];
  }

  std::vector<double> dx2(steps * hidden, 0.0);
  layer_backward(params.layer2, trace.layer2, dh2, grads.layer2, dx2.data());
  if (!trace.masks.after_layer1.empty()) {
    kernels::hadamard(dx2.data(), trace.masks.after_layer1.data(), dx2.data(), dx2.size());
  }
  layer_backward(params.layer1, trace.layer1, dx2, grads.layer1, nullptr);
}

ModelGrads backward(const ModelParams& params, const ForwardTrace& trace,
                    std::span<const double> dloss_dprediction) {
  ModelGrads g = zeros_like(params);
  backward_accumulate(params, trace, dloss_dprediction, g);
  return g;
}

}  // namespace epf
