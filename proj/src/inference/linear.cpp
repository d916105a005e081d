#include "affect/inference/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"
#include "affect/core/random.hpp"
#include "affect/simd/kernels.hpp"

namespace affect::inference {

namespace {

constexpr const char* kModelMagic = "AFMDL1";

void check_params(const std::vector<std::string>& classes, Shape shape, const Matrix& w,
                  const std::vector<double>& b) {
  if (classes.size() < 2) throw ConfigError("a linear model needs at least two classes");
  std::set<std::string> unique;
  for (const auto& c : classes) {
    if (c.empty()) throw ConfigError("class names must be non-empty");
    if (!unique.insert(c).second) throw ConfigError("duplicate class name '" + c + "'");
  }
  if (shape.size() == 0) throw ConfigError("model input shape must be non-empty");
  if (w.rows() != classes.size() || w.cols() != shape.size() || b.size() != classes.size()) {
    throw ShapeError("model parameters do not match " + std::to_string(classes.size()) + " classes x " +
                     std::to_string(shape.size()) + " features");
  }
  for (double v : w.values()) {
    if (!std::isfinite(v)) throw DataError("model weights contain a non-finite value");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw DataError("model bias contains a non-finite value");
  }
}

// Training set in canonical order with class indices resolved.
struct Prepared {
  std::vector<const LabeledExample*> examples;
  std::vector<std::size_t> cls;
  std::vector<double> weights;
  double weight_sum = 0.0;
};

std::uint64_t content_hash(const LabeledExample& e) {
  const auto values = e.features.values();
  std::uint64_t h = fnv1a(std::as_bytes(values));
  return fnv1a(std::as_bytes(std::span<const char>(e.label.data(), e.label.size())), h);
}

// Adds the weighted loss (and optionally gradient) of examples[idx[0..n)]
// without normalization.
double accumulate(const LinearModel& model, const Prepared& p, std::span<const std::size_t> idx,
                  LossGradient* grad) {
  const std::size_t k = model.n_classes();
  double loss = 0.0;
  std::vector<double> logits(k);
  for (std::size_t i : idx) {
    const auto x = p.examples[i]->features.values();
    for (std::size_t c = 0; c < k; ++c) logits[c] = simd::dot(model.weights().row(c), x) + model.bias()[c];
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - m);
    const double lse = m + std::log(z);
    const double w = p.weights[i];
    loss += w * (lse - logits[p.cls[i]]);
    if (grad != nullptr) {
      for (std::size_t c = 0; c < k; ++c) {
        const double coef = w * (std::exp(logits[c] - lse) - (c == p.cls[i] ? 1.0 : 0.0));
        simd::axpy(coef, x, grad->grad_weights.row(c));
        grad->grad_bias[c] += coef;
      }
    }
  }
  return loss;
}

LossGradient batch_gradient(const LinearModel& model, const Prepared& p, std::span<const std::size_t> idx) {
  LossGradient g;
  g.grad_weights = Matrix(model.n_classes(), model.n_features());
  g.grad_bias.assign(model.n_classes(), 0.0);
  double wsum = 0.0;
  for (std::size_t i : idx) wsum += p.weights[i];
  g.loss = accumulate(model, p, idx, &g);
  if (wsum > 0.0) {
    g.loss /= wsum;
    for (double& v : g.grad_weights.values()) v /= wsum;
    for (double& v : g.grad_bias) v /= wsum;
  }
  return g;
}

Prepared prepare(std::span<const LabeledExample> data, std::span<const double> sample_weights,
                 const std::vector<std::string>& classes, Shape shape) {
  if (!sample_weights.empty() && sample_weights.size() != data.size()) {
    throw ShapeError("got " + std::to_string(sample_weights.size()) + " sample weights for " +
                     std::to_string(data.size()) + " examples");
  }
  Prepared p;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& e = data[i];
    if (e.features.shape() != shape) {
      throw ShapeError("example " + std::to_string(i) + " has shape " + e.features.shape().to_string() +
                       ", expected " + shape.to_string());
    }
    for (double v : e.features.values()) {
      if (!std::isfinite(v)) throw DataError("example " + std::to_string(i) + " has a non-finite feature");
    }
    const auto it = std::find(classes.begin(), classes.end(), e.label);
    if (it == classes.end()) throw DataError("example " + std::to_string(i) + " has unknown label '" + e.label + "'");
    const double w = sample_weights.empty() ? 1.0 : sample_weights[i];
    if (!std::isfinite(w) || w < 0.0) throw DataError("sample weights must be finite and non-negative");
    p.examples.push_back(&e);
    p.cls.push_back(static_cast<std::size_t>(it - classes.begin()));
    p.weights.push_back(w);
    p.weight_sum += w;
  }
  if (!(p.weight_sum > 0.0)) throw DataError("sample weights sum to zero");
  return p;
}

// First and second moment estimates for every weight and bias.
class AdamState {
 public:
  AdamState(std::size_t n_weights, std::size_t n_bias)
      : mw_(n_weights, 0.0), vw_(n_weights, 0.0), mb_(n_bias, 0.0), vb_(n_bias, 0.0) {}

  void step(double lr, std::span<const double> gw, std::span<double> w, std::span<const double> gb,
            std::span<double> b) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    update(lr, c1, c2, gw, w, mw_, vw_);
    update(lr, c1, c2, gb, b, mb_, vb_);
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  static void update(double lr, double c1, double c2, std::span<const double> g, std::span<double> x,
                     std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  }

  std::size_t t_ = 0;
  std::vector<double> mw_, vw_, mb_, vb_;
};

}  // namespace

std::string_view to_string(Optimizer o) { return o == Optimizer::kAdam ? "adam" : "sgd"; }

Optimizer parse_optimizer(std::string_view text) {
  if (text == "adam") return Optimizer::kAdam;
  if (text == "sgd") return Optimizer::kSgd;
  throw ConfigError("optimizer must be adam or sgd, got '" + std::string(text) + "'");
}

LinearModel::LinearModel(std::vector<std::string> class_order, Shape input_shape)
    : LinearModel(class_order, input_shape, Matrix(class_order.size(), input_shape.size()),
                  std::vector<double>(class_order.size(), 0.0)) {}

LinearModel::LinearModel(std::vector<std::string> class_order, Shape input_shape, Matrix weights,
                         std::vector<double> bias)
    : classes_(std::move(class_order)), input_shape_(input_shape), weights_(std::move(weights)),
      bias_(std::move(bias)) {
  check_params(classes_, input_shape_, weights_, bias_);
}

std::vector<double> LinearModel::logits(std::span<const double> x) const {
  if (x.size() != n_features()) {
    throw ShapeError("model expects " + std::to_string(n_features()) + " features, got " + std::to_string(x.size()));
  }
  std::vector<double> out(n_classes());
  for (std::size_t c = 0; c < n_classes(); ++c) out[c] = simd::dot(weights_.row(c), x) + bias_[c];
  return out;
}

ClassScores LinearModel::predict(const Matrix& input) const {
  const auto l = logits(input.values());
  return ClassScores(classes_, softmax(l));
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (!(lr_decay_factor > 0.0) || lr_decay_factor > 1.0) throw ConfigError("lr_decay_factor must lie in (0, 1]");
  if (lr_decay_every < 1) throw ConfigError("lr_decay_every must be at least 1");
}

LossGradient loss_and_gradient(const LinearModel& model, std::span<const LabeledExample> batch,
                               std::span<const double> weights) {
  if (batch.empty()) throw DataError("empty batch");
  const Prepared p = prepare(batch, weights, model.class_order(), model.input_shape());
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return batch_gradient(model, p, idx);
}

LinearModel train_linear(std::span<const LabeledExample> data, const TrainConfig& cfg,
                         std::span<const double> sample_weights, TrainStats* stats) {
  cfg.validate();
  if (data.empty()) throw DataError("no training examples");
  std::vector<std::string> labels;
  labels.reserve(data.size());
  for (const auto& e : data) labels.push_back(e.label);
  const auto classes = class_order_of(labels);
  const Shape shape = data.front().features.shape();
  if (shape.size() == 0) throw ShapeError("training features are empty");
  const Prepared given = prepare(data, sample_weights, classes, shape);

  // Canonical order: content hash, then label, values and weight so that
  // equal keys only ever tie between interchangeable examples.
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::uint64_t> hashes(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) hashes[i] = content_hash(data[i]);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
    if (data[a].label != data[b].label) return data[a].label < data[b].label;
    const auto va = data[a].features.values();
    const auto vb = data[b].features.values();
    if (!std::equal(va.begin(), va.end(), vb.begin())) {
      return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
    }
    return given.weights[a] < given.weights[b];
  });
  Prepared p;
  p.weight_sum = given.weight_sum;
  for (std::size_t i : perm) {
    p.examples.push_back(given.examples[i]);
    p.cls.push_back(given.cls[i]);
    p.weights.push_back(given.weights[i]);
  }

  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto full_loss = [&](const LinearModel& m) { return accumulate(m, p, all, nullptr) / p.weight_sum; };

  LinearModel model(classes, shape);
  LinearModel best = model;
  double best_loss = full_loss(model);
  TrainStats st;
  st.initial_loss = best_loss;

  Rng rng(cfg.seed);
  AdamState adam(model.n_features() * model.n_classes(), model.n_classes());
  std::vector<std::size_t> order = all;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr =
        cfg.learning_rate * std::pow(cfg.lr_decay_factor, static_cast<double>((epoch - 1) / cfg.lr_decay_every));
    rng.shuffle(order);
    bool finite = true;
    for (std::size_t start = 0; start < order.size() && finite; start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const auto g = batch_gradient(model, p, std::span<const std::size_t>(order).subspan(start, end - start));
      if (cfg.optimizer == Optimizer::kSgd) {
        simd::axpy(-lr, g.grad_weights.values(), model.weights().values());
        for (std::size_t c = 0; c < model.n_classes(); ++c) model.bias()[c] -= lr * g.grad_bias[c];
      } else {
        adam.step(lr, g.grad_weights.values(), model.weights().values(), g.grad_bias, model.bias());
      }
      finite = std::all_of(model.bias().begin(), model.bias().end(), [](double v) { return std::isfinite(v); }) &&
               std::isfinite(simd::sum_squares(model.weights().values()));
    }
    if (!finite) break;
    const double l = full_loss(model);
    if (l < best_loss) {
      best_loss = l;
      best = model;
      st.best_epoch = epoch;
    }
  }
  st.final_loss = best_loss;
  if (stats != nullptr) *stats = st;
  return best;
}

std::vector<std::uint8_t> encode_model(const LinearModel& m) {
  io::ByteWriter w;
  w.magic(kModelMagic);
  w.u32(static_cast<std::uint32_t>(m.n_classes()));
  w.u32(static_cast<std::uint32_t>(m.n_features()));
  w.u32(static_cast<std::uint32_t>(m.input_shape().rows));
  w.u32(static_cast<std::uint32_t>(m.input_shape().cols));
  for (const auto& c : m.class_order()) w.short_string(c);
  for (double v : m.weights().values()) w.f64(v);
  for (double v : m.bias()) w.f64(v);
  return w.take();
}

LinearModel decode_model(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "AFMDL1");
  r.expect_magic(kModelMagic);
  const std::size_t k = r.u32();
  const std::size_t f = r.u32();
  const Shape shape{r.u32(), r.u32()};
  if (shape.size() != f) throw FormatError("AFMDL1: input shape " + shape.to_string() + " does not hold " +
                                           std::to_string(f) + " features");
  if (k > r.remaining()) throw FormatError("AFMDL1: class count exceeds file size");
  std::vector<std::string> classes;
  for (std::size_t i = 0; i < k; ++i) classes.push_back(r.short_string());
  if (r.remaining() != (k * f + k) * 8) throw FormatError("AFMDL1: parameter block has the wrong size");
  Matrix w(k, f);
  for (double& v : w.values()) v = r.f64();
  std::vector<double> b(k);
  for (double& v : b) v = r.f64();
  try {
    return LinearModel(std::move(classes), shape, std::move(w), std::move(b));
  } catch (const Error& e) {
    throw FormatError(std::string("AFMDL1: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const LinearModel& m) { io::write_file(path, encode_model(m)); }

LinearModel load_model(const std::filesystem::path& path) { return decode_model(io::read_file(path)); }

}  // namespace affect::inference
