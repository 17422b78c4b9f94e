#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "dmimo/rng.hpp"

namespace dmimo::nn {

enum class Activation { kRelu, kSoftplus, kTanh, kIdentity };
enum class OutputTransform { kSoftmax, kTanh, kIdentity };

std::string to_string(Activation a);
std::string to_string(OutputTransform t);
Activation activation_from_string(const std::string& s);
OutputTransform output_from_string(const std::string& s);

struct DenseNetworkSpec {
  std::vector<int> widths;              // input, hidden..., output
  std::vector<Activation> activations;  // one per hidden layer
  OutputTransform output = OutputTransform::kIdentity;

  void validate() const;
  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
  std::size_t parameter_count() const;

  friend bool operator==(const DenseNetworkSpec&, const DenseNetworkSpec&) = default;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
};

// Weights and biases of every layer; gradients and Adam moments share the layout.
struct Parameters {
  std::vector<DenseLayer> layers;

  static Parameters zeros_like(const Parameters& shape);
  std::size_t size() const;
  bool all_finite() const;
  double squared_norm() const;
  Parameters& operator+=(const Parameters& other);
  Parameters& operator*=(double scale);
  // Flattened view in layer order: weights (column-major) then bias.
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& values);
};

using Gradients = Parameters;

// Columns of the input matrix are independent samples.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;      // [0] = input, [l+1] = output of layer l
  std::vector<Eigen::MatrixXd> pre_activations;  // affine output of layer l
};

class DenseNetwork {
 public:
  DenseNetwork() = default;
  // Glorot-uniform weights, zero biases.
  DenseNetwork(DenseNetworkSpec spec, Rng& rng);
  DenseNetwork(DenseNetworkSpec spec, Parameters params);

  const DenseNetworkSpec& spec() const { return spec_; }
  const Parameters& parameters() const { return params_; }
  Parameters& parameters() { return params_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, ForwardCache* cache = nullptr) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;

  // Gradients of sum_j <output_gradient[:, j], output[:, j]> with respect to the
  // parameters, summed over the batch. Optionally also the input gradient.
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& output_gradient,
                     Eigen::MatrixXd* input_gradient = nullptr) const;
  // Same, starting from the gradient at the final affine output (before the output
  // transform). For a softmax head this is where (one_hot(a) - pi) applies.
  Gradients backward_from_logits(const ForwardCache& cache, const Eigen::MatrixXd& logit_gradient,
                                 Eigen::MatrixXd* input_gradient = nullptr) const;

 private:
  DenseNetworkSpec spec_;
  Parameters params_;
};

// Gradient of ln softmax(z)[action] with respect to the logits z.
Eigen::VectorXd log_softmax_gradient(const Eigen::VectorXd& probabilities, int action);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

enum class Direction { kAscend, kDescend };

class Adam {
 public:
  Adam() = default;
  explicit Adam(const Parameters& shape, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  // Throws std::invalid_argument on non-finite gradients.
  void step(Parameters& params, const Gradients& grads, Direction direction);

  double learning_rate() const { return learning_rate_; }
  long steps() const { return steps_; }
  const Parameters& first_moment() const { return m_; }
  const Parameters& second_moment() const { return v_; }

 private:
  double learning_rate_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  long steps_ = 0;
  Parameters m_;
  Parameters v_;
};

// target <- tau * live + (1 - tau) * target
void soft_update(Parameters& target, const Parameters& live, double tau);

// Plain-text format:
//   dmimo-dense-network 1
//   widths <w0> <w1> ... <wL>
//   activations <name> ...        (one per hidden layer)
//   output <softmax|tanh|identity>
//   then per layer: "layer <out> <in>", <out> rows of <in> weights, one bias row.
// Values are written with 17 significant digits so a round trip is exact.
void save_network(std::ostream& out, const DenseNetwork& network);
DenseNetwork load_network(std::istream& in);

}  // namespace dmimo::nn
