#include "dmimo/nn.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace dmimo::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSoftplus: return "softplus";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

std::string to_string(OutputTransform t) {
  switch (t) {
    case OutputTransform::kSoftmax: return "softmax";
    case OutputTransform::kTanh: return "tanh";
    case OutputTransform::kIdentity: return "identity";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "softplus") return Activation::kSoftplus;
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

OutputTransform output_from_string(const std::string& s) {
  if (s == "softmax") return OutputTransform::kSoftmax;
  if (s == "tanh") return OutputTransform::kTanh;
  if (s == "identity") return OutputTransform::kIdentity;
  throw std::invalid_argument("unknown output transform '" + s + "'");
}

void DenseNetworkSpec::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("network needs input and output widths");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("layer widths must be >= 1");
  if (activations.size() != widths.size() - 2)
    throw std::invalid_argument("need exactly one activation per hidden layer");
}

std::size_t DenseNetworkSpec::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    n += static_cast<std::size_t>(widths[l]) * widths[l + 1] + widths[l + 1];
  return n;
}

Parameters Parameters::zeros_like(const Parameters& shape) {
  Parameters p;
  for (const auto& l : shape.layers)
    p.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  return p;
}

std::size_t Parameters::size() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

bool Parameters::all_finite() const {
  for (const auto& l : layers)
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

double Parameters::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.weights.squaredNorm() + l.bias.squaredNorm();
  return s;
}

Parameters& Parameters::operator+=(const Parameters& other) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weights += other.layers[i].weights;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

Parameters& Parameters::operator*=(double scale) {
  for (auto& l : layers) {
    l.weights *= scale;
    l.bias *= scale;
  }
  return *this;
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  for (const auto& l : layers) {
    out.insert(out.end(), l.weights.data(), l.weights.data() + l.weights.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void Parameters::unflatten(const std::vector<double>& values) {
  if (values.size() != size()) throw std::invalid_argument("flat parameter size mismatch");
  std::size_t at = 0;
  for (auto& l : layers) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(at), l.weights.size(), l.weights.data());
    at += static_cast<std::size_t>(l.weights.size());
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(at), l.bias.size(), l.bias.data());
    at += static_cast<std::size_t>(l.bias.size());
  }
}

namespace {

Eigen::MatrixXd apply(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kSoftplus:
      // log(1 + e^z) without overflow.
      return z.unaryExpr([](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); });
    case Activation::kTanh:
      return z.array().tanh().matrix();
    case Activation::kIdentity:
      return z;
  }
  throw std::logic_error("unknown activation");
}

// d activation / dz, elementwise, given z and the activation value.
Eigen::MatrixXd derivative(Activation a, const Eigen::MatrixXd& z, const Eigen::MatrixXd& value) {
  switch (a) {
    case Activation::kRelu:
      return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::kSoftplus:
      return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case Activation::kTanh:
      return (1.0 - value.array().square()).matrix();
    case Activation::kIdentity:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  }
  throw std::logic_error("unknown activation");
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double shift = z.col(j).maxCoeff();
    out.col(j) = (z.col(j).array() - shift).exp().matrix();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

}  // namespace

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) { return softmax_columns(logits); }

Eigen::VectorXd log_softmax_gradient(const Eigen::VectorXd& probabilities, int action) {
  if (action < 0 || action >= probabilities.size())
    throw std::out_of_range("action index out of range");
  Eigen::VectorXd g = -probabilities;
  g(action) += 1.0;
  return g;
}

DenseNetwork::DenseNetwork(DenseNetworkSpec spec, Rng& rng) : spec_(std::move(spec)) {
  spec_.validate();
  for (std::size_t l = 0; l + 1 < spec_.widths.size(); ++l) {
    const int in = spec_.widths[l];
    const int out = spec_.widths[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = dist(rng);
    params_.layers.push_back(std::move(layer));
  }
}

DenseNetwork::DenseNetwork(DenseNetworkSpec spec, Parameters params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  if (params_.layers.size() + 1 != spec_.widths.size())
    throw std::invalid_argument("parameter layer count does not match spec");
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    const auto& layer = params_.layers[l];
    if (layer.weights.rows() != spec_.widths[l + 1] || layer.weights.cols() != spec_.widths[l] ||
        layer.bias.size() != spec_.widths[l + 1])
      throw std::invalid_argument("parameter shapes do not match spec");
  }
}

Eigen::MatrixXd DenseNetwork::forward(const Eigen::MatrixXd& input, ForwardCache* cache) const {
  if (input.rows() != spec_.input_width())
    throw std::invalid_argument("input width " + std::to_string(input.rows()) +
                                " does not match network input " +
                                std::to_string(spec_.input_width()));
  if (cache) {
    cache->activations.clear();
    cache->pre_activations.clear();
    cache->activations.push_back(input);
  }
  Eigen::MatrixXd a = input;
  const std::size_t n = params_.layers.size();
  for (std::size_t l = 0; l < n; ++l) {
    const auto& layer = params_.layers[l];
    Eigen::MatrixXd z = layer.weights * a;
    z.colwise() += layer.bias;
    if (l + 1 < n) {
      a = apply(spec_.activations[l], z);
    } else {
      switch (spec_.output) {
        case OutputTransform::kSoftmax: a = softmax_columns(z); break;
        case OutputTransform::kTanh: a = z.array().tanh().matrix(); break;
        case OutputTransform::kIdentity: a = z; break;
      }
    }
    if (cache) {
      cache->pre_activations.push_back(std::move(z));
      cache->activations.push_back(a);
    }
  }
  return a;
}

Eigen::VectorXd DenseNetwork::forward(const Eigen::VectorXd& input) const {
  return forward(Eigen::MatrixXd(input), nullptr).col(0);
}

Gradients DenseNetwork::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_gradient,
                                 Eigen::MatrixXd* input_gradient) const {
  const Eigen::MatrixXd& y = cache.activations.back();
  if (output_gradient.rows() != y.rows() || output_gradient.cols() != y.cols())
    throw std::invalid_argument("output gradient shape mismatch");
  Eigen::MatrixXd dz;
  switch (spec_.output) {
    case OutputTransform::kSoftmax: {
      // J^T g = y * (g - <y, g>) per column.
      const Eigen::RowVectorXd inner = (y.array() * output_gradient.array()).colwise().sum();
      dz = (y.array() * (output_gradient.rowwise() - inner).array()).matrix();
      break;
    }
    case OutputTransform::kTanh:
      dz = (output_gradient.array() * (1.0 - y.array().square())).matrix();
      break;
    case OutputTransform::kIdentity:
      dz = output_gradient;
      break;
  }
  return backward_from_logits(cache, dz, input_gradient);
}

Gradients DenseNetwork::backward_from_logits(const ForwardCache& cache,
                                             const Eigen::MatrixXd& logit_gradient,
                                             Eigen::MatrixXd* input_gradient) const {
  const std::size_t n = params_.layers.size();
  if (cache.pre_activations.size() != n || cache.activations.size() != n + 1)
    throw std::invalid_argument("forward cache does not belong to this network");
  if (logit_gradient.rows() != spec_.output_width() ||
      logit_gradient.cols() != cache.activations.front().cols())
    throw std::invalid_argument("logit gradient shape mismatch");

  Gradients grads = Parameters::zeros_like(params_);
  Eigen::MatrixXd dz = logit_gradient;
  for (std::size_t l = n; l-- > 0;) {
    const Eigen::MatrixXd& a_prev = cache.activations[l];
    grads.layers[l].weights.noalias() = dz * a_prev.transpose();
    grads.layers[l].bias = dz.rowwise().sum();
    Eigen::MatrixXd da = params_.layers[l].weights.transpose() * dz;
    if (l == 0) {
      if (input_gradient) *input_gradient = std::move(da);
    } else {
      dz = (da.array() * derivative(spec_.activations[l - 1], cache.pre_activations[l - 1],
                                    cache.activations[l]).array())
               .matrix();
    }
  }
  return grads;
}

Adam::Adam(const Parameters& shape, double learning_rate, double beta1, double beta2,
           double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      m_(Parameters::zeros_like(shape)),
      v_(Parameters::zeros_like(shape)) {}

void Adam::step(Parameters& params, const Gradients& grads, Direction direction) {
  if (!grads.all_finite()) throw std::invalid_argument("Adam step received non-finite gradients");
  if (grads.layers.size() != params.layers.size() || m_.layers.size() != params.layers.size())
    throw std::invalid_argument("Adam state does not match parameter shapes");
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  const double sign = direction == Direction::kAscend ? 1.0 : -1.0;
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    p.array() += sign * learning_rate_ * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon_);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weights, grads.layers[l].weights, m_.layers[l].weights, v_.layers[l].weights);
    update(params.layers[l].bias, grads.layers[l].bias, m_.layers[l].bias, v_.layers[l].bias);
  }
}

void soft_update(Parameters& target, const Parameters& live, double tau) {
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].weights = tau * live.layers[l].weights + (1.0 - tau) * target.layers[l].weights;
    target.layers[l].bias = tau * live.layers[l].bias + (1.0 - tau) * target.layers[l].bias;
  }
}

void save_network(std::ostream& out, const DenseNetwork& network) {
  const auto& spec = network.spec();
  out << "dmimo-dense-network 1\nwidths";
  for (int w : spec.widths) out << ' ' << w;
  out << "\nactivations";
  for (auto a : spec.activations) out << ' ' << to_string(a);
  out << "\noutput " << to_string(spec.output) << '\n';
  out << std::setprecision(17);
  for (const auto& layer : network.parameters().layers) {
    out << "layer " << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) out << (c ? " " : "") << layer.weights(r, c);
      out << '\n';
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << (r ? " " : "") << layer.bias(r);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing network");
}

DenseNetwork load_network(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word)
      throw std::runtime_error("network file: expected '" + word + "', got '" + got + "'");
  };
  expect("dmimo-dense-network");
  int version = 0;
  in >> version;
  if (version != 1) throw std::runtime_error("network file: unsupported version");

  DenseNetworkSpec spec;
  expect("widths");
  std::string token;
  while (in >> token && token != "activations") spec.widths.push_back(std::stoi(token));
  if (token != "activations") throw std::runtime_error("network file: missing activations");
  while (in >> token && token != "output") spec.activations.push_back(activation_from_string(token));
  if (token != "output") throw std::runtime_error("network file: missing output");
  in >> token;
  spec.output = output_from_string(token);
  spec.validate();

  Parameters params;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    expect("layer");
    Eigen::Index rows = 0, cols = 0;
    in >> rows >> cols;
    if (rows != spec.widths[l + 1] || cols != spec.widths[l])
      throw std::runtime_error("network file: layer shape mismatch");
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) in >> layer.weights(r, c);
    for (Eigen::Index r = 0; r < rows; ++r) in >> layer.bias(r);
    if (!in) throw std::runtime_error("network file: truncated parameters");
    params.layers.push_back(std::move(layer));
  }
  return DenseNetwork(std::move(spec), std::move(params));
}

}  // namespace dmimo::nn
