#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nestor/types.hpp"

namespace nestor {

enum class ProcessingType : uint8_t { Inference, Training };
enum class LayerKind : uint8_t { Conv2D, FC, Pool2D, Norm };
enum class Activation : uint8_t { None, ReLU, Sigmoid, Tanh };

// Phases of one layer's computation. A training pass runs FW for every layer,
// then BW+WG per layer back to front (BW skipped for layer 1, pools have no WG).
enum class Phase : uint8_t { FW, BW, WG, PoolFW, PoolBW };

inline constexpr const char* phase_name(Phase p) {
  switch (p) {
    case Phase::FW: return "FW";
    case Phase::BW: return "BW";
    case Phase::WG: return "WG";
    case Phase::PoolFW: return "PoolFW";
    case Phase::PoolBW: return "PoolBW";
  }
  return "?";
}

struct Shape3 {
  int64_t h = 1, w = 1, c = 1;
  int64_t elements() const { return h * w * c; }
  bool operator==(const Shape3&) const = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::Conv2D;
  std::string name;
  Shape3 in_shape;
  int64_t out_channels = 0;  // conv/fc; pools preserve channels
  int kernel_h = 1, kernel_w = 1;
  int pad_h = 0, pad_w = 0;
  int stride_u = 1, stride_v = 1;
  Activation activation = Activation::None;
  int residual_from = -1;  // layer index whose output is added to this one's

  int64_t out_h() const {
    if (kind == LayerKind::FC || kind == LayerKind::Norm) return 1;
    return (in_shape.h + 2 * pad_h - kernel_h) / stride_u + 1;
  }
  int64_t out_w() const {
    if (kind == LayerKind::FC || kind == LayerKind::Norm) return 1;
    return (in_shape.w + 2 * pad_w - kernel_w) / stride_v + 1;
  }
  Shape3 out_shape() const {
    switch (kind) {
      case LayerKind::Conv2D: return {out_h(), out_w(), out_channels};
      case LayerKind::FC: return {1, 1, out_channels};
      case LayerKind::Pool2D: return {out_h(), out_w(), in_shape.c};
      case LayerKind::Norm: return in_shape;
    }
    return in_shape;
  }
};

struct NetworkSpec {
  ProcessingType processing = ProcessingType::Inference;
  Shape3 input_shape;
  int64_t output_shape = 0;  // element count of the final layer's output
  int64_t batch = 1;
  std::vector<LayerSpec> layers;

  bool training() const { return processing == ProcessingType::Training; }
  int64_t norm_layer_count() const {
    int64_t n = 0;
    for (const auto& l : layers)
      if (l.kind == LayerKind::Norm) n++;
    return n;
  }
};

struct ParseError : std::runtime_error {
  int line = 0, column = 0;
  ParseError(std::string msg, int line_, int col_)
      : std::runtime_error(std::move(msg)), line(line_), column(col_) {}
};

// One loop-nest workload. Bounds follow the canonical nest of types.hpp; the
// training-phase nests are remapped onto the same seven dimensions so that a
// single mapper/evaluator path serves all phases:
//   WG: (N,M,C,R,S,E,F) = (C, M, N, E*U, F*V, R, S), strides (1,1)
//       input  = batch/channel-transposed padded X
//       filter = dY upsampled by the layer stride
//   BW: (N, C, M, R, S, H_in, W_in), strides (1,1)
//       input  = dY upsampled and re-padded
//       filter = 180-degree-rotated, channel-transposed W
struct IntraLayerWorkload {
  int layer_index = 0;
  Phase phase = Phase::FW;
  Bounds7 bounds;
  Stride2 strides;
  bool has_filter = true;  // pooling moves no filter data
  double input_zero_fraction = 0.0;
  double filter_zero_fraction = 0.0;
  int sequence_position = 0;

  uint64_t macs() const { return bounds.product(); }

  // Extents of the input window actually consumed by the nest.
  uint64_t input_rows() const {
    return (bounds[Dim::E] - 1) * strides.u + bounds[Dim::R];
  }
  uint64_t input_cols() const {
    return (bounds[Dim::F] - 1) * strides.v + bounds[Dim::S];
  }
  uint64_t input_elements() const {
    return bounds[Dim::N] * bounds[Dim::C] * input_rows() * input_cols();
  }
  uint64_t filter_elements() const {
    if (!has_filter) return 0;
    return bounds[Dim::M] * bounds[Dim::C] * bounds[Dim::R] * bounds[Dim::S];
  }
  uint64_t output_elements() const {
    return bounds[Dim::N] * bounds[Dim::M] * bounds[Dim::E] * bounds[Dim::F];
  }
  uint64_t tensor_elements(Tensor t) const {
    switch (t) {
      case Tensor::Inputs: return input_elements();
      case Tensor::Filters: return filter_elements();
      case Tensor::Outputs: return output_elements();
    }
    return 0;
  }
};

enum class PreprocessKind : uint8_t { Pad, Upsample, RotateTranspose, ElementwiseAdd };

inline constexpr const char* preprocess_kind_name(PreprocessKind k) {
  switch (k) {
    case PreprocessKind::Pad: return "pad";
    case PreprocessKind::Upsample: return "upsample";
    case PreprocessKind::RotateTranspose: return "rotate_transpose";
    case PreprocessKind::ElementwiseAdd: return "elementwise_add";
  }
  return "?";
}

// A data-marshalling step run between layer workloads (padding, upsampling,
// filter rotation, residual addition). nonzero_elements is derived from shape
// arithmetic alone: structural zeros need no knowledge of the data values.
struct PreprocessOp {
  PreprocessKind kind = PreprocessKind::Pad;
  int layer_index = 0;
  Tensor target = Tensor::Inputs;   // which operand of the consuming workload
  uint64_t in_elements = 0;
  uint64_t out_elements = 0;
  uint64_t nonzero_elements = 0;
  int sequence_position = 0;  // position of the workload this op precedes
  std::string note;
};

inline double structural_zero_fraction(const PreprocessOp& op) {
  if (op.out_elements == 0) return 0.0;
  return static_cast<double>(op.out_elements - op.nonzero_elements) /
         static_cast<double>(op.out_elements);
}

// Forward activations kept resident between a layer's FW and its WG.
struct ActivationCacheEntry {
  int layer_index = 0;
  uint64_t elements = 0;
  int created_at = 0;  // sequence position of the layer's FW workload
  int freed_at = 0;    // sequence position of the layer's WG workload
  uint64_t bytes(int precision_bits) const { return elements * (precision_bits / 8); }
};

struct InterLayerWork {
  std::vector<PreprocessOp> preprocess;
  std::vector<ActivationCacheEntry> cache_entries;
};

namespace detail {

inline std::pair<int, int> line_col_of(const std::string& text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); i++) {
    if (text[i] == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
  }
  return {line, col};
}

inline Shape3 shape_from_json(const nlohmann::json& j, const char* what) {
  if (j.is_number_integer()) return {1, 1, j.get<int64_t>()};
  if (j.is_array() && j.size() == 3)
    return {j[0].get<int64_t>(), j[1].get<int64_t>(), j[2].get<int64_t>()};
  if (j.is_array() && j.size() == 2) return {j[0].get<int64_t>(), j[1].get<int64_t>(), 1};
  throw ParseError(std::string(what) + ": expected [h, w, c] or a flat count", 0, 0);
}

inline std::pair<int, int> int_pair(const nlohmann::json& j, const char* what) {
  if (j.is_number_integer()) return {j.get<int>(), j.get<int>()};
  if (j.is_array() && j.size() == 2) return {j[0].get<int>(), j[1].get<int>()};
  throw ParseError(std::string(what) + ": expected [a, b] or a scalar", 0, 0);
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "ReLU" || s == "relu") return Activation::ReLU;
  if (s == "Sigmoid" || s == "sigmoid") return Activation::Sigmoid;
  if (s == "Tanh" || s == "tanh") return Activation::Tanh;
  if (s == "None" || s == "none" || s.empty()) return Activation::None;
  throw ParseError("unknown activation: " + s, 0, 0);
}

}  // namespace detail

// Parses a task description document:
//   { "network_parameters": {processing_type, input_shape, output_shape, batch_size},
//     "network_model": [ {"layer": "conv2d", "out_channel": .., "kernel_size": ..,
//                         "padding": .., "stride": .., "activation": ..}, ... ] }
// Layer in_shape fields are optional after the first layer and validated when given.
inline NetworkSpec parse_network(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, col] = detail::line_col_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("task syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what(),
                     line, col);
  }

  NetworkSpec net;
  if (!doc.contains("network_parameters") || !doc.contains("network_model"))
    throw ParseError("task must contain network_parameters and network_model", 0, 0);

  const auto& params = doc["network_parameters"];
  std::string pt = params.value("processing_type", "Inference");
  if (pt == "Training" || pt == "training")
    net.processing = ProcessingType::Training;
  else if (pt == "Inference" || pt == "inference")
    net.processing = ProcessingType::Inference;
  else
    throw ParseError("processing_type must be Training or Inference, got " + pt, 0, 0);

  if (!params.contains("input_shape"))
    throw ParseError("network_parameters.input_shape missing", 0, 0);
  net.input_shape = detail::shape_from_json(params["input_shape"], "input_shape");
  net.output_shape = params.value("output_shape", int64_t{0});
  net.batch = params.value("batch_size", int64_t{1});
  if (net.batch < 1) throw ParseError("batch_size must be >= 1", 0, 0);

  const auto& model = doc["network_model"];
  if (!model.is_array() || model.empty())
    throw ParseError("network_model must be a non-empty layer array", 0, 0);

  Shape3 cur = net.input_shape;
  int index = 0;
  for (const auto& jl : model) {
    LayerSpec l;
    std::string kind = jl.value("layer", jl.value("type", std::string()));
    if (kind.empty()) throw ParseError("layer " + std::to_string(index) + ": missing kind", 0, 0);
    l.name = jl.value("name", kind + "_" + std::to_string(index));

    if (jl.contains("in_shape")) {
      Shape3 declared = detail::shape_from_json(jl["in_shape"], "in_shape");
      Shape3 expect = cur;
      if (kind == "fc") expect = {1, 1, cur.elements()};
      if (declared != expect && declared.elements() != expect.elements())
        throw ParseError("layer " + std::to_string(index) + " (" + l.name +
                             "): in_shape mismatch with previous layer output",
                         0, 0);
    }

    if (kind == "conv2d") {
      l.kind = LayerKind::Conv2D;
      l.in_shape = cur;
      if (!jl.contains("out_channel"))
        throw ParseError("conv2d layer " + std::to_string(index) + ": out_channel missing", 0, 0);
      l.out_channels = jl["out_channel"].get<int64_t>();
      std::tie(l.kernel_h, l.kernel_w) = detail::int_pair(jl.at("kernel_size"), "kernel_size");
      if (jl.contains("padding"))
        std::tie(l.pad_h, l.pad_w) = detail::int_pair(jl["padding"], "padding");
      if (jl.contains("stride"))
        std::tie(l.stride_u, l.stride_v) = detail::int_pair(jl["stride"], "stride");
      if (jl.contains("activation"))
        l.activation = detail::activation_from_string(jl["activation"].get<std::string>());
    } else if (kind == "pool2d") {
      l.kind = LayerKind::Pool2D;
      l.in_shape = cur;
      l.out_channels = cur.c;
      std::tie(l.kernel_h, l.kernel_w) = detail::int_pair(jl.at("kernel_size"), "kernel_size");
      if (jl.contains("stride"))
        std::tie(l.stride_u, l.stride_v) = detail::int_pair(jl["stride"], "stride");
      else
        l.stride_u = l.kernel_h, l.stride_v = l.kernel_w;
    } else if (kind == "fc") {
      l.kind = LayerKind::FC;
      l.in_shape = {1, 1, cur.elements()};
      if (!jl.contains("out_channel"))
        throw ParseError("fc layer " + std::to_string(index) + ": out_channel missing", 0, 0);
      l.out_channels = jl["out_channel"].get<int64_t>();
      if (jl.contains("activation"))
        l.activation = detail::activation_from_string(jl["activation"].get<std::string>());
    } else if (kind == "norm" || kind == "dropout" || kind == "lrn") {
      l.kind = LayerKind::Norm;
      l.in_shape = cur;
      l.out_channels = cur.c;
    } else {
      throw ParseError("layer " + std::to_string(index) + ": unsupported kind " + kind, 0, 0);
    }

    if (jl.contains("residual_from")) {
      l.residual_from = jl["residual_from"].get<int>();
      if (l.residual_from < 0 || l.residual_from >= index)
        throw ParseError("layer " + std::to_string(index) + ": residual_from must name an earlier layer", 0, 0);
    }

    if (l.kind == LayerKind::Conv2D || l.kind == LayerKind::Pool2D) {
      if (l.stride_u < 1 || l.stride_v < 1)
        throw ParseError("layer " + std::to_string(index) + ": stride must be >= 1", 0, 0);
      if (l.kernel_h < 1 || l.kernel_w < 1)
        throw ParseError("layer " + std::to_string(index) + ": kernel must be >= 1", 0, 0);
      if (l.kernel_h > l.in_shape.h + 2 * l.pad_h || l.kernel_w > l.in_shape.w + 2 * l.pad_w)
        throw ParseError("layer " + std::to_string(index) + ": kernel exceeds padded input extent", 0, 0);
      if (l.pad_h >= l.kernel_h || l.pad_w >= l.kernel_w)
        throw ParseError("layer " + std::to_string(index) + ": padding must be smaller than the kernel", 0, 0);
    }
    if ((l.kind == LayerKind::Conv2D || l.kind == LayerKind::FC) && l.out_channels < 1)
      throw ParseError("layer " + std::to_string(index) + ": out_channel must be >= 1", 0, 0);

    cur = l.out_shape();
    net.layers.push_back(std::move(l));
    index++;
  }

  if (net.output_shape != 0 && cur.elements() != net.output_shape)
    throw ParseError("output_shape (" + std::to_string(net.output_shape) +
                         ") does not match final layer output (" +
                         std::to_string(cur.elements()) + ")",
                     0, 0);
  return net;
}

namespace detail {

inline IntraLayerWorkload fw_workload(const NetworkSpec& net, int li) {
  const LayerSpec& l = net.layers[li];
  IntraLayerWorkload w;
  w.layer_index = li;
  w.strides = {static_cast<uint32_t>(l.stride_u), static_cast<uint32_t>(l.stride_v)};
  Bounds7& b = w.bounds;
  b[Dim::N] = net.batch;
  b[Dim::R] = l.kernel_h;
  b[Dim::S] = l.kernel_w;
  b[Dim::E] = l.out_h();
  b[Dim::F] = l.out_w();
  if (l.kind == LayerKind::Pool2D) {
    w.phase = Phase::PoolFW;
    w.has_filter = false;
    b[Dim::M] = l.in_shape.c;
    b[Dim::C] = 1;
  } else {
    w.phase = Phase::FW;
    b[Dim::M] = l.out_channels;
    b[Dim::C] = l.in_shape.c;
  }
  return w;
}

inline IntraLayerWorkload wg_workload(const NetworkSpec& net, int li) {
  const LayerSpec& l = net.layers[li];
  IntraLayerWorkload w;
  w.layer_index = li;
  w.phase = Phase::WG;
  w.strides = {1, 1};
  Bounds7& b = w.bounds;
  b[Dim::N] = l.in_shape.c;
  b[Dim::M] = l.out_channels;
  b[Dim::C] = net.batch;
  b[Dim::R] = l.out_h() * l.stride_u;
  b[Dim::S] = l.out_w() * l.stride_v;
  b[Dim::E] = l.kernel_h;
  b[Dim::F] = l.kernel_w;
  return w;
}

inline IntraLayerWorkload bw_workload(const NetworkSpec& net, int li) {
  const LayerSpec& l = net.layers[li];
  IntraLayerWorkload w;
  w.layer_index = li;
  w.strides = {1, 1};
  Bounds7& b = w.bounds;
  b[Dim::N] = net.batch;
  b[Dim::R] = l.kernel_h;
  b[Dim::S] = l.kernel_w;
  if (l.kind == LayerKind::Pool2D) {
    w.phase = Phase::PoolBW;
    w.has_filter = false;
    b[Dim::M] = l.in_shape.c;
    b[Dim::C] = 1;
    b[Dim::E] = l.out_h();
    b[Dim::F] = l.out_w();
    w.strides = {static_cast<uint32_t>(l.stride_u), static_cast<uint32_t>(l.stride_v)};
  } else {
    w.phase = Phase::BW;
    b[Dim::M] = l.in_shape.c;
    b[Dim::C] = l.out_channels;
    b[Dim::E] = l.in_shape.h;
    b[Dim::F] = l.in_shape.w;
  }
  return w;
}

}  // namespace detail

// Expands a network into per-layer, per-phase loop-nest workloads in execution
// order. Inference: FW per layer. Training: all FW, then per layer from last to
// first BW followed by WG; layer 1 has no BW; pool layers have no WG.
inline std::vector<IntraLayerWorkload> generate_intra_workloads(const NetworkSpec& net) {
  std::vector<IntraLayerWorkload> out;
  const int L = static_cast<int>(net.layers.size());
  for (int i = 0; i < L; i++) {
    if (net.layers[i].kind == LayerKind::Norm) continue;
    out.push_back(detail::fw_workload(net, i));
  }
  if (net.training()) {
    for (int i = L - 1; i >= 0; i--) {
      const LayerSpec& l = net.layers[i];
      if (l.kind == LayerKind::Norm) continue;
      if (i > 0) out.push_back(detail::bw_workload(net, i));
      if (l.kind != LayerKind::Pool2D) out.push_back(detail::wg_workload(net, i));
    }
  }
  for (size_t i = 0; i < out.size(); i++) out[i].sequence_position = static_cast<int>(i);
  return out;
}

// Preprocessing steps and activation-cache entries for a network, keyed by the
// sequence positions of the workload list above.
inline InterLayerWork generate_inter_workloads(const NetworkSpec& net) {
  InterLayerWork work;
  auto workloads = generate_intra_workloads(net);

  auto position_of = [&](int layer, Phase ph) -> int {
    for (const auto& w : workloads)
      if (w.layer_index == layer && w.phase == ph) return w.sequence_position;
    return -1;
  };

  auto push = [&](PreprocessOp op) { work.preprocess.push_back(std::move(op)); };

  for (auto& w : workloads) {
    const LayerSpec& l = net.layers[w.layer_index];
    const uint64_t n = net.batch;
    const uint64_t hc = l.in_shape.c, oc = l.out_channels;
    const uint64_t H = l.in_shape.h, W = l.in_shape.w;
    const uint64_t E = l.out_h(), F = l.out_w();
    const uint64_t R = l.kernel_h, S = l.kernel_w;
    const uint64_t U = l.stride_u, V = l.stride_v;

    switch (w.phase) {
      case Phase::FW: {
        if (l.pad_h > 0 || l.pad_w > 0) {
          PreprocessOp op;
          op.kind = PreprocessKind::Pad;
          op.layer_index = w.layer_index;
          op.target = Tensor::Inputs;
          op.in_elements = n * hc * H * W;
          op.out_elements = n * hc * (H + 2 * l.pad_h) * (W + 2 * l.pad_w);
          op.nonzero_elements = op.in_elements;
          op.sequence_position = w.sequence_position;
          op.note = l.name + " FW input padding";
          w.input_zero_fraction = structural_zero_fraction(op);
          push(std::move(op));
        }
        if (l.residual_from >= 0) {
          PreprocessOp op;
          op.kind = PreprocessKind::ElementwiseAdd;
          op.layer_index = w.layer_index;
          op.target = Tensor::Outputs;
          op.in_elements = n * static_cast<uint64_t>(l.out_shape().elements());
          op.out_elements = op.in_elements;
          op.nonzero_elements = op.out_elements;
          op.sequence_position = w.sequence_position;
          op.note = l.name + " residual add";
          push(std::move(op));
        }
        break;
      }
      case Phase::WG: {
        // dW = pad(X) * upsample(dY): X padded out to the aligned extent the
        // remapped nest consumes; dY becomes the (zero-laden) filter.
        const uint64_t ph2 = E * U + R - 1, pw2 = F * V + S - 1;
        if (ph2 > H || pw2 > W) {
          PreprocessOp op;
          op.kind = PreprocessKind::Pad;
          op.layer_index = w.layer_index;
          op.target = Tensor::Inputs;
          op.in_elements = n * hc * H * W;
          op.out_elements = n * hc * ph2 * pw2;
          op.nonzero_elements = op.in_elements;
          op.sequence_position = w.sequence_position;
          op.note = l.name + " WG input padding";
          w.input_zero_fraction = structural_zero_fraction(op);
          push(std::move(op));
        }
        {
          PreprocessOp op;
          op.kind = PreprocessKind::Upsample;
          op.layer_index = w.layer_index;
          op.target = Tensor::Filters;
          op.in_elements = n * oc * E * F;
          op.out_elements = n * oc * (E * U) * (F * V);
          op.nonzero_elements = op.in_elements;
          op.sequence_position = w.sequence_position;
          op.note = l.name + " WG gradient upsampling";
          w.filter_zero_fraction = structural_zero_fraction(op);
          push(std::move(op));
        }
        break;
      }
      case Phase::BW: {
        // dX = pad(upsample(dY)) * rot180(W^T). The padded extent is H+R-1;
        // nonzero gradient rows always land inside it (padding < kernel).
        {
          PreprocessOp up;
          up.kind = PreprocessKind::Upsample;
          up.layer_index = w.layer_index;
          up.target = Tensor::Inputs;
          up.in_elements = n * oc * E * F;
          up.out_elements = n * oc * (E * U) * (F * V);
          up.nonzero_elements = up.in_elements;
          up.sequence_position = w.sequence_position;
          up.note = l.name + " BW gradient upsampling";
          push(std::move(up));

          const uint64_t bh = H + R - 1, bw = W + S - 1;
          PreprocessOp pad;
          pad.kind = PreprocessKind::Pad;
          pad.layer_index = w.layer_index;
          pad.target = Tensor::Inputs;
          pad.in_elements = n * oc * (E * U) * (F * V);
          pad.out_elements = n * oc * bh * bw;
          pad.nonzero_elements = n * oc * E * F;
          pad.sequence_position = w.sequence_position;
          pad.note = l.name + " BW gradient padding";
          w.input_zero_fraction = structural_zero_fraction(pad);
          push(std::move(pad));
        }
        {
          PreprocessOp rt;
          rt.kind = PreprocessKind::RotateTranspose;
          rt.layer_index = w.layer_index;
          rt.target = Tensor::Filters;
          rt.in_elements = oc * hc * R * S;
          rt.out_elements = rt.in_elements;
          rt.nonzero_elements = rt.in_elements;
          rt.sequence_position = w.sequence_position;
          rt.note = l.name + " BW filter rotation/transpose";
          push(std::move(rt));
        }
        if (l.residual_from >= 0) {
          PreprocessOp op;
          op.kind = PreprocessKind::ElementwiseAdd;
          op.layer_index = w.layer_index;
          op.target = Tensor::Outputs;
          op.in_elements = n * static_cast<uint64_t>(l.out_shape().elements());
          op.out_elements = op.in_elements;
          op.nonzero_elements = op.out_elements;
          op.sequence_position = w.sequence_position;
          op.note = l.name + " residual gradient add";
          push(std::move(op));
        }
        break;
      }
      case Phase::PoolFW:
      case Phase::PoolBW:
        break;
    }
  }

  if (net.training()) {
    for (int i = 0; i < static_cast<int>(net.layers.size()); i++) {
      const LayerSpec& l = net.layers[i];
      if (l.kind != LayerKind::Conv2D && l.kind != LayerKind::FC) continue;
      ActivationCacheEntry e;
      e.layer_index = i;
      e.elements = static_cast<uint64_t>(net.batch) * l.in_shape.elements();
      e.created_at = position_of(i, Phase::FW);
      e.freed_at = position_of(i, Phase::WG);
      work.cache_entries.push_back(e);
    }
  }
  return work;
}

// Per-workload structural zero fractions, recomputed the same way
// generate_inter_workloads assigns them (handy when only workloads are needed).
inline std::vector<IntraLayerWorkload> generate_workloads_with_zeros(const NetworkSpec& net) {
  auto ws = generate_intra_workloads(net);
  auto inter = generate_inter_workloads(net);
  for (const auto& op : inter.preprocess) {
    if (op.kind == PreprocessKind::ElementwiseAdd || op.kind == PreprocessKind::RotateTranspose)
      continue;
    for (auto& w : ws) {
      if (w.sequence_position != op.sequence_position) continue;
      double f = structural_zero_fraction(op);
      if (op.target == Tensor::Inputs) w.input_zero_fraction = f;
      if (op.target == Tensor::Filters) w.filter_zero_fraction = f;
    }
  }
  return ws;
}

}  // namespace nestor
