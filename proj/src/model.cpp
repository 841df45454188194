#include "svga/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace svga {

Variant variant_from_string(const std::string& s) {
  if (s == "det") return Variant::det;
  if (s == "stoch") return Variant::stoch;
  if (s == "noreg") return Variant::noreg;
  throw std::invalid_argument("unknown variant: " + s + " (expected det|stoch|noreg)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::det: return "det";
    case Variant::stoch: return "stoch";
    case Variant::noreg: return "noreg";
  }
  return "?";
}

bool ModelParams::all_finite() const {
  for (const Mat* m : {&w1, &w2, &wx, &wy, &w1s, &w2s}) {
    if (m->size() > 0 && !m->allFinite()) return false;
  }
  for (const Vec* v : {&b1, &b2, &bx, &by, &b1s, &b2s}) {
    if (v->size() > 0 && !v->allFinite()) return false;
  }
  return true;
}

ParamGrads zero_grads_like(const ModelParams& p) {
  ParamGrads g;
  g.w1 = Mat::Zero(p.w1.rows(), p.w1.cols());
  g.b1 = Vec::Zero(p.b1.size());
  g.w2 = Mat::Zero(p.w2.rows(), p.w2.cols());
  g.b2 = Vec::Zero(p.b2.size());
  g.wx = Mat::Zero(p.wx.rows(), p.wx.cols());
  g.bx = Vec::Zero(p.bx.size());
  g.wy = Mat::Zero(p.wy.rows(), p.wy.cols());
  g.by = Vec::Zero(p.by.size());
  if (p.has_sigma_head()) {
    g.w1s = Mat::Zero(p.w1s.rows(), p.w1s.cols());
    g.b1s = Vec::Zero(p.b1s.size());
    g.w2s = Mat::Zero(p.w2s.rows(), p.w2s.cols());
    g.b2s = Vec::Zero(p.b2s.size());
  }
  return g;
}

namespace {

Mat glorot(index_t rows, index_t cols, index_t fan_in, index_t fan_out, Rng& rng) {
  const real_t limit = std::sqrt(real_t(6) / static_cast<real_t>(fan_in + fan_out));
  Mat m(rows, cols);
  for (index_t i = 0; i < rows; ++i) {
    for (index_t j = 0; j < cols; ++j) {
      m(i, j) = static_cast<real_t>(rng.uniform(-limit, limit));
    }
  }
  return m;
}

}  // namespace

ModelParams init_params(index_t n, index_t d, index_t m, index_t c, Variant variant,
                        std::uint64_t seed) {
  if (n <= 0 || d <= 0 || m <= 0 || c < 0) {
    throw std::invalid_argument("init_params: dimensions must be positive (c may be 0)");
  }
  Rng rng = Rng::stream(seed, RngStream::init);
  ModelParams p;
  p.w1 = glorot(n, d, n, d, rng);
  p.b1 = Vec::Zero(d);
  p.w2 = glorot(d, d, d, d, rng);
  p.b2 = Vec::Zero(d);
  p.wx = glorot(m, d, d, m, rng);
  p.bx = Vec::Zero(m);
  p.wy = glorot(c, d, d, c, rng);
  p.by = Vec::Zero(c);
  if (variant == Variant::stoch) {
    p.w1s = glorot(n, d, n, d, rng);
    p.b1s = Vec::Zero(d);
    p.w2s = glorot(d, d, d, d, rng);
    p.b2s = Vec::Zero(d);
  }
  return p;
}

namespace {

EncoderCache encode_head(const Mat& w1, const Vec& b1, const Mat& w2, const Vec& b2,
                         const NormalizedAdjacency& a, const TrainConfig& config,
                         bool training, bool normalize, Rng& rng) {
  EncoderCache cache;
  Mat h1pre = spmm(a.csr, w1);  // A * I * W1 with the identity elided
  h1pre.rowwise() += b1.transpose();
  cache.h1 = relu(h1pre);
  cache.drop = dropout(cache.h1, config.dropout, training, rng);
  cache.h2pre = spmm(a.csr, cache.drop.out);
  Mat epre = cache.h2pre * w2;
  epre.rowwise() += b2.transpose();
  if (normalize) {
    cache.norm = row_unit_normalize(epre);
    cache.e = cache.norm.out;
    cache.normalized = true;
  } else {
    cache.e = std::move(epre);
  }
  if (!cache.e.allFinite()) throw NumericalError("non-finite encoder output");
  return cache;
}

}  // namespace

EncoderCache encode(const ModelParams& params, const NormalizedAdjacency& a,
                    const TrainConfig& config, bool training, Rng& rng) {
  return encode_head(params.w1, params.b1, params.w2, params.b2, a, config, training,
                     config.unit_norm, rng);
}

ForwardState encode_stochastic(const ModelParams& params, const NormalizedAdjacency& a,
                               const TrainConfig& config, bool training, Rng& dropout_rng,
                               Rng& sample_rng) {
  if (!params.has_sigma_head()) {
    throw std::invalid_argument("encode_stochastic requires a sigma head");
  }
  const index_t r = config.rank();
  if (r > config.d) throw std::invalid_argument("rank r must not exceed d");
  if (config.beta <= 0) throw std::invalid_argument("beta must be positive");

  ForwardState s;
  s.enc = encode_head(params.w1, params.b1, params.w2, params.b2, a, config, training,
                      config.unit_norm, dropout_rng);
  // The covariance factor parameterizes spread, not position: never normalized.
  s.enc_sigma = encode_head(params.w1s, params.b1s, params.w2s, params.b2s, a, config,
                            training, false, dropout_rng);
  s.u = s.enc.e;
  s.v = s.enc_sigma.e.leftCols(r);

  const index_t n = s.u.rows();
  const index_t d = s.u.cols();
  Mat m1(n, d);
  for (index_t i = 0; i < n; ++i) {
    for (index_t j = 0; j < d; ++j) m1(i, j) = static_cast<real_t>(sample_rng.normal());
  }
  s.m2.resize(r, d);
  for (index_t i = 0; i < r; ++i) {
    for (index_t j = 0; j < d; ++j) s.m2(i, j) = static_cast<real_t>(sample_rng.normal());
  }
  s.z = s.u + std::sqrt(config.beta) * m1 + s.v * s.m2;
  return s;
}

Mat decode_features(const ModelParams& params, const Mat& z) {
  check_shape(z.cols() == params.wx.cols(), "decode_features");
  Mat xhat = z * params.wx.transpose();
  xhat.rowwise() += params.bx.transpose();
  return xhat;
}

Mat decode_labels(const ModelParams& params, const Mat& z) {
  check_shape(z.cols() == params.wy.cols(), "decode_labels");
  Mat yhat = z * params.wy.transpose();
  yhat.rowwise() += params.by.transpose();
  return yhat;
}

ForwardState forward(const ModelParams& params, const NormalizedAdjacency& a,
                     const TrainConfig& config, bool training, Rng& dropout_rng,
                     Rng& sample_rng) {
  ForwardState s;
  if (config.variant == Variant::stoch) {
    s = encode_stochastic(params, a, config, training, dropout_rng, sample_rng);
  } else {
    s.enc = encode(params, a, config, training, dropout_rng);
    s.z = s.enc.e;
  }
  s.xhat = decode_features(params, s.z);
  if (params.wy.rows() > 0) s.yhat = decode_labels(params, s.z);
  return s;
}

EncoderGrads encoder_backward(const EncoderCache& cache, const NormalizedAdjacency& a,
                              const Mat& w2, const Mat& gbar_e) {
  EncoderGrads g;
  Mat gbar_epre =
      cache.normalized ? row_unit_normalize_backward(gbar_e, cache.norm) : gbar_e;
  g.w2 = cache.h2pre.transpose() * gbar_epre;
  g.b2 = colsum(gbar_epre);
  Mat gbar_h2pre = gbar_epre * w2.transpose();
  Mat gbar_h1d = spmm(a.csr, gbar_h2pre);  // A is symmetric
  Mat gbar_h1 = dropout_backward(gbar_h1d, cache.drop);
  Mat gbar_h1pre = relu_backward(gbar_h1, cache.h1);
  g.w1 = spmm(a.csr, gbar_h1pre);
  g.b1 = colsum(gbar_h1pre);
  return g;
}

namespace {

void write_tensor(std::ofstream& out, const std::string& name, index_t rows, index_t cols,
                  const real_t* data) {
  const std::uint32_t name_len = static_cast<std::uint32_t>(name.size());
  out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
  out.write(name.data(), name_len);
  const std::uint64_t r = rows, c = cols;
  out.write(reinterpret_cast<const char*>(&r), sizeof(r));
  out.write(reinterpret_cast<const char*>(&c), sizeof(c));
  for (index_t i = 0; i < rows * cols; ++i) {
    const double v = static_cast<double>(data[i]);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
}

struct TensorRef {
  std::string name;
  const Mat* mat = nullptr;
  const Vec* vec = nullptr;
};

std::vector<TensorRef> tensor_order(const ModelParams& p) {
  std::vector<TensorRef> t = {
      {"W1", &p.w1, nullptr}, {"b1", nullptr, &p.b1}, {"W2", &p.w2, nullptr},
      {"b2", nullptr, &p.b2}, {"Wx", &p.wx, nullptr}, {"bx", nullptr, &p.bx},
      {"Wy", &p.wy, nullptr}, {"by", nullptr, &p.by},
  };
  if (p.has_sigma_head()) {
    t.push_back({"W1s", &p.w1s, nullptr});
    t.push_back({"b1s", nullptr, &p.b1s});
    t.push_back({"W2s", &p.w2s, nullptr});
    t.push_back({"b2s", nullptr, &p.b2s});
  }
  return t;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write("SVGA1", 5);
  for (const auto& t : tensor_order(params)) {
    if (t.mat) {
      write_tensor(out, t.name, t.mat->rows(), t.mat->cols(), t.mat->data());
    } else {
      write_tensor(out, t.name, 1, t.vec->size(), t.vec->data());
    }
  }
  if (!out) throw DataError("checkpoint write failed: " + path);
}

namespace {

bool read_tensor(std::ifstream& in, std::string& name, Mat& values) {
  std::uint32_t name_len = 0;
  if (!in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len))) return false;
  if (name_len > 64) throw DataError("checkpoint: implausible tensor name length");
  name.resize(name_len);
  in.read(name.data(), name_len);
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in) throw DataError("checkpoint: truncated tensor header");
  values.resize(static_cast<index_t>(rows), static_cast<index_t>(cols));
  for (std::uint64_t i = 0; i < rows * cols; ++i) {
    double v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
      throw DataError("checkpoint: truncated tensor data");
    }
    values.data()[i] = static_cast<real_t>(v);
  }
  return true;
}

}  // namespace

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[5] = {};
  in.read(magic, 5);
  if (!in || std::memcmp(magic, "SVGA1", 5) != 0) {
    throw DataError("bad checkpoint magic in " + path);
  }
  ModelParams p;
  std::string name;
  Mat values;
  while (read_tensor(in, name, values)) {
    if (name == "W1") p.w1 = values;
    else if (name == "b1") p.b1 = values.row(0).transpose();
    else if (name == "W2") p.w2 = values;
    else if (name == "b2") p.b2 = values.row(0).transpose();
    else if (name == "Wx") p.wx = values;
    else if (name == "bx") p.bx = values.row(0).transpose();
    else if (name == "Wy") p.wy = values;
    else if (name == "by") p.by = values.row(0).transpose();
    else if (name == "W1s") p.w1s = values;
    else if (name == "b1s") p.b1s = values.row(0).transpose();
    else if (name == "W2s") p.w2s = values;
    else if (name == "b2s") p.b2s = values.row(0).transpose();
    else throw DataError("checkpoint: unknown tensor " + name);
  }
  if (p.w1.size() == 0 || p.wx.size() == 0) {
    throw DataError("checkpoint missing required tensors: " + path);
  }
  return p;
}

}  // namespace svga
