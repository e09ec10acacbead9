// Copyright 2026 The Spanfield Authors.
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

#include "spanfield/model/model.h"

#include <string>
#include <utility>

#include "spanfield/errors.h"
#include "spanfield/numeric/ops.h"
#include "spanfield/random.h"

namespace spanfield {

InputBatch InputBatch::FromWindows(std::span<const PackedWindow* const> windows) {
  InputBatch batch;
  if (windows.empty()) return batch;
  batch.batch = static_cast<int64_t>(windows.size());
  batch.length = windows.front()->length();
  for (const PackedWindow* w : windows) {
    if (w->length() != batch.length) {
      throw DimensionError("batch mixes window lengths " + std::to_string(batch.length) +
                           " and " + std::to_string(w->length()));
    }
    batch.token_ids.insert(batch.token_ids.end(), w->token_ids.begin(), w->token_ids.end());
    batch.segment_ids.insert(batch.segment_ids.end(), w->segment_ids.begin(),
                             w->segment_ids.end());
    batch.position_ids.insert(batch.position_ids.end(), w->position_ids.begin(),
                              w->position_ids.end());
    batch.pad_mask.insert(batch.pad_mask.end(), w->pad_mask.begin(), w->pad_mask.end());
  }
  return batch;
}

InputBatch InputBatch::FromWindow(const PackedWindow& window) {
  const PackedWindow* one[] = {&window};
  return FromWindows(one);
}

namespace {

std::string LayerName(int64_t layer, const char* leaf) {
  return "encoder." + std::to_string(layer) + "." + leaf;
}

template <typename T>
void AddInPlace(NumArray<T>* a, const NumArray<T>& b) {
  T* pa = a->data();
  const T* pb = b.data();
  for (int64_t i = 0; i < a->size(); ++i) pa[i] += pb[i];
}

template <typename T>
NumArray<T> ZerosLike(const NumArray<T>& a) {
  return NumArray<T>(a.shape());
}

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <typename T>
void InitTensor(ParamTensor<T>* tensor, double stddev, Rng* rng) {
  if (EndsWith(tensor->name, ".gain")) {
    tensor->value.Fill(T(1));
  } else if (EndsWith(tensor->name, "bias")) {
    tensor->value.SetZero();
  } else {
    for (T& v : tensor->value.values()) v = static_cast<T>(rng->TruncatedNormal(stddev));
  }
}

// Per-layer parameter handles, looked up once per pass.
template <typename T>
struct LayerParams {
  ParamTensor<T>* qkv_weight;
  ParamTensor<T>* query_bias;
  ParamTensor<T>* value_bias;
  ParamTensor<T>* out_weight;
  ParamTensor<T>* out_bias;
  ParamTensor<T>* attn_gain;
  ParamTensor<T>* attn_bias;
  ParamTensor<T>* in_weight;
  ParamTensor<T>* in_bias;
  ParamTensor<T>* ff_out_weight;
  ParamTensor<T>* ff_out_bias;
  ParamTensor<T>* ff_gain;
  ParamTensor<T>* ff_bias;

  LayerParams(ParamStore<T>& p, int64_t i)
      : qkv_weight(&p.Get(LayerName(i, "attention.qkv_weight"))),
        query_bias(&p.Get(LayerName(i, "attention.query_bias"))),
        value_bias(&p.Get(LayerName(i, "attention.value_bias"))),
        out_weight(&p.Get(LayerName(i, "attention.out_weight"))),
        out_bias(&p.Get(LayerName(i, "attention.out_bias"))),
        attn_gain(&p.Get(LayerName(i, "attention_ln.gain"))),
        attn_bias(&p.Get(LayerName(i, "attention_ln.bias"))),
        in_weight(&p.Get(LayerName(i, "ff.in_weight"))),
        in_bias(&p.Get(LayerName(i, "ff.in_bias"))),
        ff_out_weight(&p.Get(LayerName(i, "ff.out_weight"))),
        ff_out_bias(&p.Get(LayerName(i, "ff.out_bias"))),
        ff_gain(&p.Get(LayerName(i, "ff_ln.gain"))),
        ff_bias(&p.Get(LayerName(i, "ff_ln.bias"))) {}

  AttentionWeights<T> attention() const {
    return {qkv_weight->value, query_bias->value, value_bias->value, out_weight->value,
            out_bias->value};
  }
  AttentionGrads<T> attention_grads() const {
    return {&qkv_weight->grad, &query_bias->grad, &value_bias->grad, &out_weight->grad,
            &out_bias->grad};
  }
};

template <typename T>
struct EmbedCache {
  LayerNormCache<T> ln;
  std::vector<uint8_t> keep;
};

template <typename T>
struct LayerCache {
  AttentionCache<T> attention;
  std::vector<uint8_t> attention_keep;
  LayerNormCache<T> attention_ln;
  NumArray<T> attended;  // output of the attention sub-block
  NumArray<T> ff_pre;
  NumArray<T> ff_act;
  std::vector<uint8_t> ff_keep;
  LayerNormCache<T> ff_ln;
};

template <typename T>
struct SpanHeadCache {
  NumArray<T> conv_pre;
  NumArray<T> conv_act;
  NumArray<T> mlp_pre;
  NumArray<T> mlp_act;
};

// Dropout site ids: 0 for embeddings, 1 + 2i and 2 + 2i for layer i.
template <typename T>
void MaybeDropout(NumArray<T>* x, const ModelConfig& config, const ForwardOptions& options,
                  uint64_t site, std::vector<uint8_t>* keep) {
  if (!options.train || config.dropout_rate <= 0.0) return;
  *keep = DropoutInPlace(x, config.dropout_rate, DeriveSeed(options.dropout_seed, site));
}

template <typename T>
NumArray<T> EmbedImpl(const ParamStore<T>& p, const ModelConfig& config, const InputBatch& batch,
                      const ForwardOptions& options, EmbedCache<T>* cache) {
  NumArray<T> sum = EmbeddingLookup(p.Get("embeddings.token").value,
                                    std::span<const int32_t>(batch.token_ids));
  AddInPlace(&sum, EmbeddingLookup(p.Get("embeddings.segment").value,
                                   std::span<const int32_t>(batch.segment_ids)));
  AddInPlace(&sum, EmbeddingLookup(p.Get("embeddings.position").value,
                                   std::span<const int32_t>(batch.position_ids)));
  sum.Reshape({batch.batch, batch.length, config.hidden_size});
  NumArray<T> out = LayerNormForward(sum, p.Get("embeddings.ln.gain").value,
                                     p.Get("embeddings.ln.bias").value,
                                     static_cast<T>(config.layer_norm_eps),
                                     cache ? &cache->ln : nullptr);
  std::vector<uint8_t> keep;
  MaybeDropout(&out, config, options, 0, cache ? &cache->keep : &keep);
  return out;
}

template <typename T>
NumArray<T> LayerForward(ParamStore<T>& p, const ModelConfig& config, int64_t layer,
                         const NumArray<T>& x, std::span<const uint8_t> pad_mask,
                         const ForwardOptions& options, LayerCache<T>* cache) {
  const LayerParams<T> lp(p, layer);
  const T eps = static_cast<T>(config.layer_norm_eps);
  std::vector<uint8_t> scratch_keep;

  NumArray<T> a = MultiHeadSelfAttention(x, lp.attention(), static_cast<int>(config.num_heads),
                                         pad_mask, cache ? &cache->attention : nullptr);
  MaybeDropout(&a, config, options, 1 + 2 * layer, cache ? &cache->attention_keep : &scratch_keep);
  AddInPlace(&a, x);
  NumArray<T> attended = LayerNormForward(a, lp.attn_gain->value, lp.attn_bias->value, eps,
                                          cache ? &cache->attention_ln : nullptr);

  NumArray<T> pre = LinearForward(attended, lp.in_weight->value, lp.in_bias->value);
  NumArray<T> act = GeluForward(pre);
  NumArray<T> f = LinearForward(act, lp.ff_out_weight->value, lp.ff_out_bias->value);
  MaybeDropout(&f, config, options, 2 + 2 * layer, cache ? &cache->ff_keep : &scratch_keep);
  AddInPlace(&f, attended);
  NumArray<T> out = LayerNormForward(f, lp.ff_gain->value, lp.ff_bias->value, eps,
                                     cache ? &cache->ff_ln : nullptr);
  if (cache != nullptr) {
    cache->attended = std::move(attended);
    cache->ff_pre = std::move(pre);
    cache->ff_act = std::move(act);
  }
  return out;
}

template <typename T>
NumArray<T> LayerBackward(ParamStore<T>& p, const ModelConfig& config, int64_t layer,
                          const LayerCache<T>& cache, const NumArray<T>& dout) {
  const LayerParams<T> lp(p, layer);
  const double rate = config.dropout_rate;

  NumArray<T> ds2 = ZerosLike(dout);
  LayerNormBackward(cache.ff_ln, lp.ff_gain->value, dout, &ds2, &lp.ff_gain->grad,
                    &lp.ff_bias->grad);
  NumArray<T> dattended = ds2;
  NumArray<T>& df = ds2;
  if (!cache.ff_keep.empty()) DropoutBackwardInPlace(&df, cache.ff_keep, rate);
  NumArray<T> dact = ZerosLike(cache.ff_act);
  LinearBackward(cache.ff_act, lp.ff_out_weight->value, df, &dact, &lp.ff_out_weight->grad,
                 &lp.ff_out_bias->grad);
  NumArray<T> dpre = ZerosLike(cache.ff_pre);
  GeluBackward(cache.ff_pre, dact, &dpre);
  LinearBackward(cache.attended, lp.in_weight->value, dpre, &dattended, &lp.in_weight->grad,
                 &lp.in_bias->grad);

  NumArray<T> ds1 = ZerosLike(dout);
  LayerNormBackward(cache.attention_ln, lp.attn_gain->value, dattended, &ds1,
                    &lp.attn_gain->grad, &lp.attn_bias->grad);
  NumArray<T> dx = ds1;
  NumArray<T>& da = ds1;
  if (!cache.attention_keep.empty()) DropoutBackwardInPlace(&da, cache.attention_keep, rate);
  MultiHeadSelfAttentionBackward(cache.attention, lp.attention(), da, &dx, lp.attention_grads());
  return dx;
}

template <typename T>
NumArray<T> SpanHeadImpl(const ParamStore<T>& p, const ModelConfig& config,
                         const NumArray<T>& hidden, SpanHeadCache<T>* cache) {
  SpanHeadCache<T> local;
  SpanHeadCache<T>& c = cache ? *cache : local;
  const NumArray<T>* z = &hidden;
  if (config.use_conv) {
    c.conv_pre = Conv1dSameForward(hidden, p.Get("span.conv.kernels").value,
                                   p.Get("span.conv.bias").value);
    c.conv_act = ReluForward(c.conv_pre);
    z = &c.conv_act;
  }
  if (config.mlp_hidden > 0) {
    c.mlp_pre = LinearForward(*z, p.Get("span.mlp.weight").value, p.Get("span.mlp.bias").value);
    c.mlp_act = ReluForward(c.mlp_pre);
    z = &c.mlp_act;
  }
  return LinearForward(*z, p.Get("span.classifier.weight").value,
                       p.Get("span.classifier.bias").value);
}

// [B, H] rows at position 0 of every sequence.
template <typename T>
NumArray<T> GatherRows(const NumArray<T>& hidden, std::span<const int64_t> flat_positions) {
  const int64_t h = hidden.dim(-1);
  NumArray<T> out({static_cast<int64_t>(flat_positions.size()), h});
  for (size_t r = 0; r < flat_positions.size(); ++r) {
    std::copy_n(hidden.data() + flat_positions[r] * h, h, out.data() + r * h);
  }
  return out;
}

template <typename T>
void ScatterAddRows(const NumArray<T>& rows, std::span<const int64_t> flat_positions,
                    NumArray<T>* hidden_grad) {
  const int64_t h = hidden_grad->dim(-1);
  for (size_t r = 0; r < flat_positions.size(); ++r) {
    T* dst = hidden_grad->data() + flat_positions[r] * h;
    const T* src = rows.data() + r * h;
    for (int64_t k = 0; k < h; ++k) dst[k] += src[k];
  }
}

std::vector<int64_t> ClsPositions(int64_t batch, int64_t length) {
  std::vector<int64_t> rows(batch);
  for (int64_t b = 0; b < batch; ++b) rows[b] = b * length;
  return rows;
}

}  // namespace

template <typename T>
Model<T>::Model(const ModelConfig& config) : config_(config) {
  config_.Validate();
  const int64_t h = config_.hidden_size;
  const int64_t v = config_.vocab_size;
  params_.Add("embeddings.token", {v, h});
  params_.Add("embeddings.segment", {kNumSegments, h});
  params_.Add("embeddings.position", {config_.max_position, h});
  params_.Add("embeddings.ln.gain", {h});
  params_.Add("embeddings.ln.bias", {h});
  for (int64_t i = 0; i < config_.num_layers; ++i) {
    params_.Add(LayerName(i, "attention.qkv_weight"), {h, 3 * h});
    params_.Add(LayerName(i, "attention.query_bias"), {h});
    params_.Add(LayerName(i, "attention.value_bias"), {h});
    params_.Add(LayerName(i, "attention.out_weight"), {h, h});
    params_.Add(LayerName(i, "attention.out_bias"), {h});
    params_.Add(LayerName(i, "attention_ln.gain"), {h});
    params_.Add(LayerName(i, "attention_ln.bias"), {h});
    params_.Add(LayerName(i, "ff.in_weight"), {h, config_.ff_size});
    params_.Add(LayerName(i, "ff.in_bias"), {config_.ff_size});
    params_.Add(LayerName(i, "ff.out_weight"), {config_.ff_size, h});
    params_.Add(LayerName(i, "ff.out_bias"), {h});
    params_.Add(LayerName(i, "ff_ln.gain"), {h});
    params_.Add(LayerName(i, "ff_ln.bias"), {h});
  }
  int64_t features = h;
  if (config_.use_conv) {
    params_.Add("span.conv.kernels", {config_.conv_width, h, config_.conv_filters});
    params_.Add("span.conv.bias", {config_.conv_filters});
    features = config_.conv_filters;
  }
  if (config_.mlp_hidden > 0) {
    params_.Add("span.mlp.weight", {features, config_.mlp_hidden});
    params_.Add("span.mlp.bias", {config_.mlp_hidden});
    features = config_.mlp_hidden;
  }
  params_.Add("span.classifier.weight", {features, kNumSpanClasses});
  params_.Add("span.classifier.bias", {kNumSpanClasses});
  params_.Add("nsp.weight", {h, 2});
  params_.Add("nsp.bias", {2});
  params_.Add("mlm.weight", {h, v});
  params_.Add("mlm.bias", {v});
  InitializeWeights(0);
}

template <typename T>
void Model<T>::InitializeWeights(uint64_t seed) {
  Rng rng(seed);
  for (auto& tensor : params_.tensors()) InitTensor(&tensor, config_.init_stddev, &rng);
}

template <typename T>
void Model<T>::InitializeSpanHead(uint64_t seed) {
  Rng rng(seed);
  for (auto& tensor : params_.tensors()) {
    if (tensor.name.rfind("span.", 0) == 0) InitTensor(&tensor, config_.init_stddev, &rng);
  }
}

template <typename T>
ParameterCensus Model<T>::Census() const {
  ParameterCensus census;
  for (const auto& tensor : params_.tensors()) {
    const int64_t n = tensor.value.size();
    const std::string& name = tensor.name;
    if (name.rfind("embeddings.", 0) == 0) {
      census.embeddings += n;
    } else if (name.rfind("encoder.", 0) == 0) {
      census.encoder += n;
    } else if (name.rfind("span.", 0) == 0) {
      census.span_head += n;
    } else if (name.rfind("nsp.", 0) == 0) {
      census.nsp_head += n;
    } else {
      census.mlm_head += n;
    }
    census.total += n;
  }
  return census;
}

template <typename T>
NumArray<T> Model<T>::Embed(const InputBatch& batch) const {
  return EmbedImpl<T>(params_, config_, batch, ForwardOptions{}, nullptr);
}

template <typename T>
NumArray<T> Model<T>::EncoderForward(const NumArray<T>& embedded,
                                     std::span<const uint8_t> pad_mask) const {
  // The layer helpers take a mutable store for gradient access; inference
  // only reads values.
  auto& p = const_cast<ParamStore<T>&>(params_);
  NumArray<T> x = embedded;
  for (int64_t i = 0; i < config_.num_layers; ++i) {
    x = LayerForward<T>(p, config_, i, x, pad_mask, ForwardOptions{}, nullptr);
  }
  return x;
}

template <typename T>
NumArray<T> Model<T>::Encode(const InputBatch& batch) const {
  return EncoderForward(Embed(batch), batch.pad_mask);
}

template <typename T>
NumArray<T> Model<T>::SpanHeadForward(const NumArray<T>& hidden) const {
  return SpanHeadImpl<T>(params_, config_, hidden, nullptr);
}

template <typename T>
NumArray<T> Model<T>::NspForward(const NumArray<T>& hidden) const {
  const auto rows = ClsPositions(hidden.dim(0), hidden.dim(1));
  return LinearForward(GatherRows(hidden, rows), params_.Get("nsp.weight").value,
                       params_.Get("nsp.bias").value);
}

template <typename T>
NumArray<T> Model<T>::MlmForward(const NumArray<T>& hidden) const {
  return LinearForward(hidden, params_.Get("mlm.weight").value, params_.Get("mlm.bias").value);
}

template <typename T>
struct Tape<T>::State {
  Model<T>* model;
  InputBatch batch;
  ForwardOptions options;
  EmbedCache<T> embed;
  std::vector<LayerCache<T>> layers;
  NumArray<T> hidden;
  NumArray<T> dhidden;
  SpanHeadCache<T> span;
  bool span_ran = false;
  NumArray<T> nsp_input;
  std::vector<int64_t> mlm_positions;
  NumArray<T> mlm_input;
};

template <typename T>
Tape<T>::Tape(Model<T>* model, const InputBatch& batch, const ForwardOptions& options)
    : state_(std::make_unique<State>()) {
  State& s = *state_;
  s.model = model;
  s.batch = batch;
  s.options = options;
  const ModelConfig& config = model->config();
  NumArray<T> x = EmbedImpl<T>(model->params(), config, batch, options, &s.embed);
  s.layers.resize(config.num_layers);
  for (int64_t i = 0; i < config.num_layers; ++i) {
    x = LayerForward<T>(model->params(), config, i, x, batch.pad_mask, options, &s.layers[i]);
  }
  s.hidden = std::move(x);
  s.dhidden = ZerosLike(s.hidden);
}

template <typename T>
Tape<T>::~Tape() = default;

template <typename T>
const NumArray<T>& Tape<T>::hidden() const {
  return state_->hidden;
}

template <typename T>
NumArray<T> Tape<T>::SpanLogits() {
  State& s = *state_;
  s.span_ran = true;
  return SpanHeadImpl<T>(s.model->params(), s.model->config(), s.hidden, &s.span);
}

template <typename T>
void Tape<T>::BackwardSpan(const NumArray<T>& dlogits) {
  State& s = *state_;
  if (!s.span_ran) throw Error("BackwardSpan before SpanLogits");
  const ModelConfig& config = s.model->config();
  ParamStore<T>& p = s.model->params();
  const NumArray<T>* z = &s.hidden;
  if (config.use_conv) z = &s.span.conv_act;
  const NumArray<T>* z_cls = config.mlp_hidden > 0 ? &s.span.mlp_act : z;

  auto& cls_w = p.Get("span.classifier.weight");
  auto& cls_b = p.Get("span.classifier.bias");
  NumArray<T> dz = ZerosLike(*z_cls);
  LinearBackward(*z_cls, cls_w.value, dlogits, &dz, &cls_w.grad, &cls_b.grad);
  if (config.mlp_hidden > 0) {
    auto& w = p.Get("span.mlp.weight");
    auto& b = p.Get("span.mlp.bias");
    NumArray<T> dpre = ZerosLike(s.span.mlp_pre);
    ReluBackward(s.span.mlp_pre, dz, &dpre);
    NumArray<T> dz_in = ZerosLike(*z);
    LinearBackward(*z, w.value, dpre, &dz_in, &w.grad, &b.grad);
    dz = std::move(dz_in);
  }
  if (config.use_conv) {
    auto& k = p.Get("span.conv.kernels");
    auto& b = p.Get("span.conv.bias");
    NumArray<T> dconv = ZerosLike(s.span.conv_pre);
    ReluBackward(s.span.conv_pre, dz, &dconv);
    Conv1dSameBackward(s.hidden, k.value, dconv, &s.dhidden, &k.grad, &b.grad);
  } else {
    AddInPlace(&s.dhidden, dz);
  }
}

template <typename T>
NumArray<T> Tape<T>::NspLogits() {
  State& s = *state_;
  const auto rows = ClsPositions(s.batch.batch, s.batch.length);
  s.nsp_input = GatherRows(s.hidden, rows);
  const ParamStore<T>& p = s.model->params();
  return LinearForward(s.nsp_input, p.Get("nsp.weight").value, p.Get("nsp.bias").value);
}

template <typename T>
void Tape<T>::BackwardNsp(const NumArray<T>& dlogits) {
  State& s = *state_;
  if (s.nsp_input.empty()) throw Error("BackwardNsp before NspLogits");
  auto& w = s.model->params().Get("nsp.weight");
  auto& b = s.model->params().Get("nsp.bias");
  NumArray<T> dcls = ZerosLike(s.nsp_input);
  LinearBackward(s.nsp_input, w.value, dlogits, &dcls, &w.grad, &b.grad);
  ScatterAddRows(dcls, std::span<const int64_t>(ClsPositions(s.batch.batch, s.batch.length)),
                 &s.dhidden);
}

template <typename T>
NumArray<T> Tape<T>::MlmLogits(std::span<const int64_t> flat_positions) {
  State& s = *state_;
  for (int64_t pos : flat_positions) {
    if (pos < 0 || pos >= s.batch.batch * s.batch.length) {
      throw DimensionError("masked position " + std::to_string(pos) + " outside the batch");
    }
  }
  s.mlm_positions.assign(flat_positions.begin(), flat_positions.end());
  s.mlm_input = GatherRows(s.hidden, flat_positions);
  const ParamStore<T>& p = s.model->params();
  return LinearForward(s.mlm_input, p.Get("mlm.weight").value, p.Get("mlm.bias").value);
}

template <typename T>
void Tape<T>::BackwardMlm(const NumArray<T>& dlogits) {
  State& s = *state_;
  auto& w = s.model->params().Get("mlm.weight");
  auto& b = s.model->params().Get("mlm.bias");
  NumArray<T> drows = ZerosLike(s.mlm_input);
  LinearBackward(s.mlm_input, w.value, dlogits, &drows, &w.grad, &b.grad);
  ScatterAddRows(drows, std::span<const int64_t>(s.mlm_positions), &s.dhidden);
}

template <typename T>
void Tape<T>::Backward() {
  State& s = *state_;
  const ModelConfig& config = s.model->config();
  ParamStore<T>& p = s.model->params();
  NumArray<T> d = std::move(s.dhidden);
  for (int64_t i = config.num_layers - 1; i >= 0; --i) {
    d = LayerBackward<T>(p, config, i, s.layers[i], d);
  }
  if (!s.embed.keep.empty()) DropoutBackwardInPlace(&d, s.embed.keep, config.dropout_rate);
  NumArray<T> dsum = ZerosLike(d);
  LayerNormBackward(s.embed.ln, p.Get("embeddings.ln.gain").value, d, &dsum,
                    &p.Get("embeddings.ln.gain").grad, &p.Get("embeddings.ln.bias").grad);
  dsum.Reshape({s.batch.batch * s.batch.length, config.hidden_size});
  EmbeddingBackward(std::span<const int32_t>(s.batch.token_ids), dsum,
                    &p.Get("embeddings.token").grad);
  EmbeddingBackward(std::span<const int32_t>(s.batch.segment_ids), dsum,
                    &p.Get("embeddings.segment").grad);
  EmbeddingBackward(std::span<const int32_t>(s.batch.position_ids), dsum,
                    &p.Get("embeddings.position").grad);
  s.dhidden = ZerosLike(s.hidden);
}

template <typename T>
T SpanLoss(const NumArray<T>& logits, std::span<const int32_t> labels,
           std::span<const T> class_weights, NumArray<T>* dlogits) {
  const int64_t rows = logits.size() / kNumSpanClasses;
  if (static_cast<int64_t>(labels.size()) != rows || logits.dim(-1) != kNumSpanClasses) {
    throw DimensionError("span loss: logits " + ShapeToString(logits.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
  }
  const NumArray<T> flat = logits.Reshaped({rows, kNumSpanClasses});
  if (dlogits == nullptr) {
    return CrossEntropyLoss(flat, labels, class_weights, kIgnoreLabel);
  }
  NumArray<T> grad({rows, kNumSpanClasses});
  const T loss = CrossEntropyLoss(flat, labels, class_weights, kIgnoreLabel, &grad);
  grad.Reshape(logits.shape());
  *dlogits = std::move(grad);
  return loss;
}

template class Model<float>;
template class Model<double>;
template class Tape<float>;
template class Tape<double>;
template float SpanLoss<float>(const NumArray<float>&, std::span<const int32_t>,
                               std::span<const float>, NumArray<float>*);
template double SpanLoss<double>(const NumArray<double>&, std::span<const int32_t>,
                                 std::span<const double>, NumArray<double>*);

}  // namespace spanfield
