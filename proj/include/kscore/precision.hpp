#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>
#include <Eigen/Dense>

namespace kscore {

// --- scalar activations ----------------------------------------------------

double softplus(double x);
double softplus_inverse(double y);
double sigmoid(double x);

/// Exact GeLU x * Phi(x) with Phi the standard normal CDF (via erf).
double gelu(double x);
double gelu_derivative(double x);

/// Positivity floor added to softplus-decoded Cholesky diagonals.
inline constexpr double kDiagFloor = 1e-6;

/// Decodes raw packed Cholesky rows: off-diagonal slots pass through,
/// diagonal slots map through softplus(u) + kDiagFloor.
Eigen::MatrixXd decode_chol_rows(const Eigen::MatrixXd& raw, int d);

// --- reverse-mode tape -----------------------------------------------------

/// Minimal reverse-mode record over the fixed vocabulary the training losses
/// need: affine layers, GeLU, the Cholesky decode, and the two fused loss
/// heads. Values are dense matrices; rows index the batch. Nodes are created
/// in topological order, so backward() is a single reverse sweep.
class Tape {
 public:
  /// Leaf without gradient (inputs, fixed data).
  int constant(Eigen::MatrixXd value);
  /// Leaf with gradient (parameters).
  int leaf(Eigen::MatrixXd value);
  /// X * W^T + 1 b^T with X (B x in), W (out x in), b (out x 1).
  int affine(int x, int w, int b);
  int gelu(int x);
  /// softplus + floor on the packed-diagonal slots of each row.
  int chol_decode(int x, int d);
  /// Terminal-time implicit score-matching loss of the kernel model whose
  /// per-center packed Cholesky factors are the rows of `decoded`:
  /// mean_b [ 2 * (pi^-1 Lap pi)(x_b) - |grad log pi(x_b)|^2 ].
  int ism_terminal_loss(int decoded, Eigen::MatrixXd centers, Eigen::MatrixXd batch);
  /// mean_b || scale_b * out_b + xi_b ||^2  (the variance-weighted DSM
  /// residual with scale_b = beta * sqrt(s_b), xi_b the noise draw).
  int scaled_residual_loss(int net_out, Eigen::MatrixXd xi, Eigen::VectorXd scale);
  /// sum of squared entries (test utility).
  int sum_squares(int x);

  const Eigen::MatrixXd& value(int node) const;
  double scalar_value(int node) const;

  /// Reverse sweep seeded with d(loss)/d(loss) = 1. The node must be scalar.
  void backward(int loss_node);
  /// Gradient of the last backward() target w.r.t. the given node.
  const Eigen::MatrixXd& grad(int node) const;

 private:
  enum class Op { kConstant, kLeaf, kAffine, kGelu, kCholDecode, kIsmLoss, kScaledResidual, kSumSquares };

  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;  // input node ids
    int d = 0;                   // space dimension for kCholDecode/kIsmLoss
    int cache = -1;              // index into fused-op caches
    Eigen::MatrixXd val;
    Eigen::MatrixXd grad;
  };

  struct IsmCache {
    Eigen::MatrixXd centers;  // N x d
    Eigen::MatrixXd batch;    // B x d
    Eigen::MatrixXd sigma;    // B x N softmax weights, saved by forward
  };
  struct ResidualCache {
    Eigen::MatrixXd xi;
    Eigen::VectorXd scale;
  };

  int push(Node node);
  bool backward_ran_ = false;
  std::vector<Node> nodes_;
  std::vector<IsmCache> ism_caches_;
  std::vector<ResidualCache> residual_caches_;
};

// --- multilayer perceptron --------------------------------------------------

/// Dense MLP with GeLU hidden activations and identity output, parameters in
/// one flat vector laid out per layer as row-major W then b.
struct Mlp {
  std::vector<int> widths;
  Eigen::VectorXd params;

  static Mlp with_widths(std::vector<int> widths);
  /// He-style fan-in scaled uniform weights, zero biases.
  static Mlp initialized(std::vector<int> widths, std::uint64_t seed);

  int n_layers() const { return static_cast<int>(widths.size()) - 1; }
  int n_params() const;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  weight(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  /// Forward pass over rows of X (batch x widths.front()).
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  /// Tape forward; appends one leaf per W and b in layout order to `leaves`.
  int tape_forward(Tape& tape, int input_node, std::vector<int>& leaves) const;
  /// Flattens tape leaf gradients back into params layout.
  Eigen::VectorXd gather_grad(const Tape& tape, const std::vector<int>& leaves) const;
};

// --- precision providers ----------------------------------------------------

/// Maps points to packed lower-triangular Cholesky factors of local
/// precision matrices, Gamma(z) = L(z) L(z)^T.
class PrecisionProvider {
 public:
  virtual ~PrecisionProvider() = default;
  virtual std::string kind() const = 0;
  virtual int dim() const = 0;
  virtual const Eigen::VectorXd& params() const = 0;
  virtual void set_params(const Eigen::VectorXd& p) = 0;
  /// Decoded packed Cholesky rows at the query points (N x d(d+1)/2).
  virtual Eigen::MatrixXd decode_chol(const Eigen::MatrixXd& points) const = 0;
  /// Tape forward ending at the decoded node; appends parameter leaves.
  virtual int tape_decode(Tape& tape, const Eigen::MatrixXd& points,
                          std::vector<int>& leaves) const = 0;
  virtual Eigen::VectorXd gather_grad(const Tape& tape,
                                      const std::vector<int>& leaves) const = 0;
  virtual std::unique_ptr<PrecisionProvider> clone() const = 0;
};

/// Gamma(z) for a single point. Table providers answer only at their own
/// centers; the MLP answers anywhere.
Eigen::MatrixXd provider_precision(const PrecisionProvider& provider,
                                   const Eigen::VectorXd& z);

/// One raw packed Cholesky row per kernel center. Positional: decode_chol
/// expects exactly the centers it was built for, in order.
class TableProvider : public PrecisionProvider {
 public:
  TableProvider(Eigen::MatrixXd centers, Eigen::VectorXd raw_params);
  /// Raw rows chosen so the decoded Gamma is approximately (beta^2 s0)^-1 I,
  /// i.e. a mild isotropic KDE at bandwidth time s0.
  static TableProvider initialized(const Eigen::MatrixXd& centers, double beta,
                                   double s0 = 0.01);

  std::string kind() const override { return "table"; }
  int dim() const override { return d_; }
  const Eigen::VectorXd& params() const override { return params_; }
  void set_params(const Eigen::VectorXd& p) override;
  Eigen::MatrixXd decode_chol(const Eigen::MatrixXd& points) const override;
  int tape_decode(Tape& tape, const Eigen::MatrixXd& points,
                  std::vector<int>& leaves) const override;
  Eigen::VectorXd gather_grad(const Tape& tape,
                              const std::vector<int>& leaves) const override;
  std::unique_ptr<PrecisionProvider> clone() const override;

  const Eigen::MatrixXd& centers() const { return centers_; }
  int num_centers() const { return static_cast<int>(centers_.rows()); }

 private:
  Eigen::MatrixXd centers_;
  Eigen::VectorXd params_;  // N x packed_size(d), row-major
  int d_;
};

/// psi(z): R^d -> R^{d(d+1)/2} feedforward net feeding the Cholesky decode.
class MlpProvider : public PrecisionProvider {
 public:
  MlpProvider(int d, Mlp mlp);
  /// Five GeLU hidden layers of the given width by default.
  static MlpProvider initialized(int d, std::uint64_t seed, int hidden_width = 64,
                                 int hidden_layers = 5);

  std::string kind() const override { return "mlp"; }
  int dim() const override { return d_; }
  const Eigen::VectorXd& params() const override { return mlp_.params; }
  void set_params(const Eigen::VectorXd& p) override;
  Eigen::MatrixXd decode_chol(const Eigen::MatrixXd& points) const override;
  int tape_decode(Tape& tape, const Eigen::MatrixXd& points,
                  std::vector<int>& leaves) const override;
  Eigen::VectorXd gather_grad(const Tape& tape,
                              const std::vector<int>& leaves) const override;
  std::unique_ptr<PrecisionProvider> clone() const override;

  const Mlp& mlp() const { return mlp_; }

 private:
  int d_;
  Mlp mlp_;
};

}  // namespace kscore
