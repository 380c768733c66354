#include "kscore/precision.hpp"

#include <cmath>
#include <stdexcept>

#include "kscore/core_math.hpp"
#include "kscore/rng.hpp"

namespace kscore {

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double softplus_inverse(double y) {
  if (y > 30.0) return y;
  if (!(y > 0.0)) throw std::domain_error("softplus_inverse: y must be > 0");
  return std::log(std::expm1(y));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double gelu(double x) {
  return x * 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
}

double gelu_derivative(double x) {
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  const double Phi = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  return Phi + x * phi;
}

Eigen::MatrixXd decode_chol_rows(const Eigen::MatrixXd& raw, int d) {
  if (raw.cols() != packed_size(d))
    throw std::invalid_argument("decode_chol_rows: column count != d(d+1)/2");
  if (!raw.allFinite())
    throw std::invalid_argument("decode_chol_rows: non-finite raw parameters");
  Eigen::MatrixXd out = raw;
  for (int r = 0; r < d; ++r) {
    const int j = packed_diag_index(r);
    out.col(j) = raw.col(j).unaryExpr([](double u) { return softplus(u) + kDiagFloor; });
  }
  return out;
}

// --- Tape -------------------------------------------------------------------

int Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::constant(Eigen::MatrixXd value) {
  Node n;
  n.op = Op::kConstant;
  n.val = std::move(value);
  return push(std::move(n));
}

int Tape::leaf(Eigen::MatrixXd value) {
  Node n;
  n.op = Op::kLeaf;
  n.val = std::move(value);
  return push(std::move(n));
}

int Tape::affine(int x, int w, int b) {
  Node n;
  n.op = Op::kAffine;
  n.a = x;
  n.b = w;
  n.c = b;
  n.val = nodes_[x].val * nodes_[w].val.transpose();
  n.val.rowwise() += nodes_[b].val.col(0).transpose();
  return push(std::move(n));
}

int Tape::gelu(int x) {
  Node n;
  n.op = Op::kGelu;
  n.a = x;
  n.val = nodes_[x].val.unaryExpr([](double v) { return kscore::gelu(v); });
  return push(std::move(n));
}

int Tape::chol_decode(int x, int d) {
  Node n;
  n.op = Op::kCholDecode;
  n.a = x;
  n.d = d;
  n.val = decode_chol_rows(nodes_[x].val, d);
  return push(std::move(n));
}

int Tape::ism_terminal_loss(int decoded, Eigen::MatrixXd centers, Eigen::MatrixXd batch) {
  const int N = static_cast<int>(centers.rows());
  const int B = static_cast<int>(batch.rows());
  const int d = static_cast<int>(centers.cols());
  if (B < 1) throw std::domain_error("ism_terminal_loss: empty batch");
  const Eigen::MatrixXd& Ld = nodes_[decoded].val;
  if (Ld.rows() != N || Ld.cols() != packed_size(d))
    throw std::invalid_argument("ism_terminal_loss: decoded shape mismatch");

  std::vector<Eigen::MatrixXd> L(N);
  Eigen::VectorXd half_log_det(N), trace(N);
  for (int i = 0; i < N; ++i) {
    L[i] = unpack_lower(Ld.row(i).transpose(), d);
    double acc = 0.0;
    for (int r = 0; r < d; ++r) acc += std::log(L[i](r, r));
    half_log_det[i] = acc;
    trace[i] = L[i].squaredNorm();  // tr(L L^T)
  }
  const double c0 = 0.5 * d * kLogTwoPi + std::log(static_cast<double>(N));

  IsmCache cache;
  cache.sigma.resize(B, N);
  Eigen::VectorXd y(N), gsq(N);
  Eigen::MatrixXd g(d, N);
  double loss = 0.0;
  for (int b = 0; b < B; ++b) {
    for (int i = 0; i < N; ++i) {
      const Eigen::VectorXd u = (batch.row(b) - centers.row(i)).transpose();
      const Eigen::VectorXd w = L[i].transpose() * u;
      y[i] = -0.5 * w.squaredNorm() + half_log_det[i] - c0;
      g.col(i) = -(L[i] * w);
      gsq[i] = g.col(i).squaredNorm();
    }
    const double m = y.maxCoeff();
    Eigen::VectorXd sig = (y.array() - m).exp();
    sig /= sig.sum();
    cache.sigma.row(b) = sig.transpose();
    const Eigen::VectorXd s = g * sig;
    const double R = sig.dot(gsq - trace);
    loss += 2.0 * R - s.squaredNorm();
  }
  loss /= B;

  cache.centers = std::move(centers);
  cache.batch = std::move(batch);
  ism_caches_.push_back(std::move(cache));

  Node n;
  n.op = Op::kIsmLoss;
  n.a = decoded;
  n.d = d;
  n.cache = static_cast<int>(ism_caches_.size()) - 1;
  n.val = Eigen::MatrixXd::Constant(1, 1, loss);
  return push(std::move(n));
}

int Tape::scaled_residual_loss(int net_out, Eigen::MatrixXd xi, Eigen::VectorXd scale) {
  const Eigen::MatrixXd& out = nodes_[net_out].val;
  const int B = static_cast<int>(out.rows());
  if (xi.rows() != B || xi.cols() != out.cols() || scale.size() != B)
    throw std::invalid_argument("scaled_residual_loss: shape mismatch");
  double loss = 0.0;
  for (int b = 0; b < B; ++b)
    loss += (scale[b] * out.row(b) + xi.row(b)).squaredNorm();
  loss /= B;

  residual_caches_.push_back(ResidualCache{std::move(xi), std::move(scale)});
  Node n;
  n.op = Op::kScaledResidual;
  n.a = net_out;
  n.cache = static_cast<int>(residual_caches_.size()) - 1;
  n.val = Eigen::MatrixXd::Constant(1, 1, loss);
  return push(std::move(n));
}

int Tape::sum_squares(int x) {
  Node n;
  n.op = Op::kSumSquares;
  n.a = x;
  n.val = Eigen::MatrixXd::Constant(1, 1, nodes_[x].val.squaredNorm());
  return push(std::move(n));
}

const Eigen::MatrixXd& Tape::value(int node) const { return nodes_.at(node).val; }

double Tape::scalar_value(int node) const {
  const Eigen::MatrixXd& v = nodes_.at(node).val;
  if (v.size() != 1) throw std::logic_error("scalar_value: node is not scalar");
  return v(0, 0);
}

const Eigen::MatrixXd& Tape::grad(int node) const {
  if (!backward_ran_) throw std::logic_error("grad: backward has not run");
  return nodes_.at(node).grad;
}

namespace {
void ensure_grad(Eigen::MatrixXd& g, const Eigen::MatrixXd& like) {
  if (g.size() == 0) g = Eigen::MatrixXd::Zero(like.rows(), like.cols());
}
}  // namespace

void Tape::backward(int loss_node) {
  if (nodes_.at(loss_node).val.size() != 1)
    throw std::logic_error("backward: target node is not scalar");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[loss_node].grad = Eigen::MatrixXd::Constant(1, 1, 1.0);
  backward_ran_ = true;

  for (int id = loss_node; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    switch (n.op) {
      case Op::kConstant:
      case Op::kLeaf:
        break;
      case Op::kAffine: {
        Node& x = nodes_[n.a];
        Node& w = nodes_[n.b];
        Node& bias = nodes_[n.c];
        ensure_grad(x.grad, x.val);
        ensure_grad(w.grad, w.val);
        ensure_grad(bias.grad, bias.val);
        x.grad.noalias() += n.grad * w.val;
        w.grad.noalias() += n.grad.transpose() * x.val;
        bias.grad.col(0).noalias() += n.grad.colwise().sum().transpose();
        break;
      }
      case Op::kGelu: {
        Node& x = nodes_[n.a];
        ensure_grad(x.grad, x.val);
        x.grad.array() +=
            n.grad.array() * x.val.unaryExpr([](double v) { return gelu_derivative(v); }).array();
        break;
      }
      case Op::kCholDecode: {
        Node& x = nodes_[n.a];
        ensure_grad(x.grad, x.val);
        Eigen::MatrixXd pass = n.grad;
        for (int r = 0; r < n.d; ++r) {
          const int j = packed_diag_index(r);
          pass.col(j).array() *=
              x.val.col(j).unaryExpr([](double u) { return sigmoid(u); }).array();
        }
        x.grad += pass;
        break;
      }
      case Op::kIsmLoss: {
        Node& dec = nodes_[n.a];
        ensure_grad(dec.grad, dec.val);
        const IsmCache& cache = ism_caches_[n.cache];
        const int N = static_cast<int>(cache.centers.rows());
        const int B = static_cast<int>(cache.batch.rows());
        const int d = n.d;
        const double seed = n.grad(0, 0) / B;

        std::vector<Eigen::MatrixXd> L(N);
        Eigen::VectorXd trace(N);
        for (int i = 0; i < N; ++i) {
          L[i] = unpack_lower(dec.val.row(i).transpose(), d);
          trace[i] = L[i].squaredNorm();
        }
        std::vector<Eigen::MatrixXd> grad_L(N, Eigen::MatrixXd::Zero(d, d));
        Eigen::MatrixXd w_buf(d, N), g_buf(d, N), u_buf(d, N);
        Eigen::VectorXd gsq(N), a(N);
        for (int b = 0; b < B; ++b) {
          const auto sig = cache.sigma.row(b);
          for (int i = 0; i < N; ++i) {
            u_buf.col(i) = (cache.batch.row(b) - cache.centers.row(i)).transpose();
            w_buf.col(i) = L[i].transpose() * u_buf.col(i);
            g_buf.col(i) = -(L[i] * w_buf.col(i));
            gsq[i] = g_buf.col(i).squaredNorm();
          }
          const Eigen::VectorXd s = g_buf * sig.transpose();
          for (int i = 0; i < N; ++i)
            a[i] = 2.0 * (gsq[i] - trace[i]) - 2.0 * s.dot(g_buf.col(i));
          const double a_mean = sig.dot(a);
          for (int i = 0; i < N; ++i) {
            const double sig_i = sig[i];
            if (sig_i == 0.0) continue;
            const double y_bar = seed * sig_i * (a[i] - a_mean);
            const Eigen::VectorXd g_bar = seed * (4.0 * sig_i * g_buf.col(i) - 2.0 * sig_i * s);
            const double t_bar = seed * (-2.0 * sig_i);
            const Eigen::VectorXd w_bar =
                -y_bar * w_buf.col(i) - L[i].transpose() * g_bar;
            Eigen::MatrixXd& G = grad_L[i];
            G.noalias() += u_buf.col(i) * w_bar.transpose();
            G.noalias() -= g_bar * w_buf.col(i).transpose();
            G += 2.0 * t_bar * L[i];
            for (int r = 0; r < d; ++r) G(r, r) += y_bar / L[i](r, r);
          }
        }
        for (int i = 0; i < N; ++i) {
          int k = 0;
          for (int r = 0; r < d; ++r)
            for (int c = 0; c <= r; ++c) dec.grad(i, k++) += grad_L[i](r, c);
        }
        break;
      }
      case Op::kScaledResidual: {
        Node& out = nodes_[n.a];
        ensure_grad(out.grad, out.val);
        const ResidualCache& cache = residual_caches_[n.cache];
        const int B = static_cast<int>(out.val.rows());
        const double seed = n.grad(0, 0) / B;
        for (int b = 0; b < B; ++b)
          out.grad.row(b) += seed * 2.0 * cache.scale[b] *
                             (cache.scale[b] * out.val.row(b) + cache.xi.row(b));
        break;
      }
      case Op::kSumSquares: {
        Node& x = nodes_[n.a];
        ensure_grad(x.grad, x.val);
        x.grad += 2.0 * n.grad(0, 0) * x.val;
        break;
      }
    }
  }
}

// --- Mlp ---------------------------------------------------------------------

Mlp Mlp::with_widths(std::vector<int> w) {
  Mlp mlp;
  mlp.widths = std::move(w);
  if (mlp.widths.size() < 2) throw std::invalid_argument("Mlp: need >= 2 widths");
  mlp.params = Eigen::VectorXd::Zero(mlp.n_params());
  return mlp;
}

Mlp Mlp::initialized(std::vector<int> w, std::uint64_t seed) {
  Mlp mlp = with_widths(std::move(w));
  Rng rng = Rng(seed).split(streams::kInit);
  int off = 0;
  for (int l = 0; l < mlp.n_layers(); ++l) {
    const int in = mlp.widths[l], out = mlp.widths[l + 1];
    const double bound = std::sqrt(6.0 / in);
    for (int k = 0; k < out * in; ++k) mlp.params[off + k] = rng.uniform(-bound, bound);
    off += out * in + out;  // biases stay zero
  }
  return mlp;
}

int Mlp::n_params() const {
  int total = 0;
  for (int l = 0; l < n_layers(); ++l) total += widths[l + 1] * (widths[l] + 1);
  return total;
}

namespace {
int layer_offset(const std::vector<int>& widths, int layer) {
  int off = 0;
  for (int l = 0; l < layer; ++l) off += widths[l + 1] * (widths[l] + 1);
  return off;
}
}  // namespace

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
Mlp::weight(int layer) const {
  const int off = layer_offset(widths, layer);
  return {params.data() + off, widths[layer + 1], widths[layer]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  const int off = layer_offset(widths, layer) + widths[layer + 1] * widths[layer];
  return {params.data() + off, widths[layer + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (int l = 0; l < n_layers(); ++l) {
    h = (h * weight(l).transpose()).rowwise() + bias(l).transpose();
    if (l + 1 < n_layers())
      h = h.unaryExpr([](double v) { return kscore::gelu(v); });
  }
  return h;
}

int Mlp::tape_forward(Tape& tape, int input_node, std::vector<int>& leaves) const {
  int h = input_node;
  for (int l = 0; l < n_layers(); ++l) {
    const int w_node = tape.leaf(weight(l));
    const int b_node = tape.leaf(bias(l));
    leaves.push_back(w_node);
    leaves.push_back(b_node);
    h = tape.affine(h, w_node, b_node);
    if (l + 1 < n_layers()) h = tape.gelu(h);
  }
  return h;
}

Eigen::VectorXd Mlp::gather_grad(const Tape& tape, const std::vector<int>& leaves) const {
  if (static_cast<int>(leaves.size()) != 2 * n_layers())
    throw std::invalid_argument("Mlp::gather_grad: leaf count mismatch");
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(n_params());
  int off = 0;
  for (int l = 0; l < n_layers(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    const Eigen::MatrixXd& wg = tape.grad(leaves[2 * l]);
    const Eigen::MatrixXd& bg = tape.grad(leaves[2 * l + 1]);
    if (wg.size() != 0)
      for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c) flat[off + r * in + c] = wg(r, c);
    if (bg.size() != 0)
      for (int r = 0; r < out; ++r) flat[off + out * in + r] = bg(r, 0);
    off += out * (in + 1);
  }
  return flat;
}

// --- TableProvider ------------------------------------------------------------

TableProvider::TableProvider(Eigen::MatrixXd centers, Eigen::VectorXd raw_params)
    : centers_(std::move(centers)),
      params_(std::move(raw_params)),
      d_(static_cast<int>(centers_.cols())) {
  if (params_.size() != centers_.rows() * packed_size(d_))
    throw std::invalid_argument("TableProvider: params size != N * d(d+1)/2");
}

TableProvider TableProvider::initialized(const Eigen::MatrixXd& centers, double beta,
                                         double s0) {
  const int d = static_cast<int>(centers.cols());
  const int N = static_cast<int>(centers.rows());
  const int nl = packed_size(d);
  const double diag = 1.0 / (beta * std::sqrt(s0));  // L = diag * I
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(N * nl);
  for (int i = 0; i < N; ++i)
    for (int r = 0; r < d; ++r)
      raw[i * nl + packed_diag_index(r)] = softplus_inverse(diag - kDiagFloor);
  return TableProvider(centers, raw);
}

void TableProvider::set_params(const Eigen::VectorXd& p) {
  if (p.size() != params_.size())
    throw std::invalid_argument("TableProvider::set_params: size mismatch");
  params_ = p;
}

Eigen::MatrixXd TableProvider::decode_chol(const Eigen::MatrixXd& points) const {
  if (points.rows() != centers_.rows() || points.cols() != d_)
    throw std::invalid_argument(
        "TableProvider::decode_chol: table provider is positional, query its own centers");
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
      raw(params_.data(), centers_.rows(), packed_size(d_));
  return decode_chol_rows(raw, d_);
}

int TableProvider::tape_decode(Tape& tape, const Eigen::MatrixXd& points,
                               std::vector<int>& leaves) const {
  if (points.rows() != centers_.rows() || points.cols() != d_)
    throw std::invalid_argument(
        "TableProvider::tape_decode: table provider is positional, query its own centers");
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
      raw(params_.data(), centers_.rows(), packed_size(d_));
  const int raw_node = tape.leaf(raw);
  leaves.push_back(raw_node);
  return tape.chol_decode(raw_node, d_);
}

Eigen::VectorXd TableProvider::gather_grad(const Tape& tape,
                                           const std::vector<int>& leaves) const {
  if (leaves.size() != 1)
    throw std::invalid_argument("TableProvider::gather_grad: expected one leaf");
  const Eigen::MatrixXd& g = tape.grad(leaves[0]);
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(params_.size());
  if (g.size() != 0) {
    const int nl = packed_size(d_);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < nl; ++j) flat[i * nl + j] = g(i, j);
  }
  return flat;
}

std::unique_ptr<PrecisionProvider> TableProvider::clone() const {
  return std::make_unique<TableProvider>(*this);
}

// --- MlpProvider ---------------------------------------------------------------

MlpProvider::MlpProvider(int d, Mlp mlp) : d_(d), mlp_(std::move(mlp)) {
  if (mlp_.widths.front() != d || mlp_.widths.back() != packed_size(d))
    throw std::invalid_argument("MlpProvider: widths must run d -> d(d+1)/2");
}

MlpProvider MlpProvider::initialized(int d, std::uint64_t seed, int hidden_width,
                                     int hidden_layers) {
  std::vector<int> widths;
  widths.push_back(d);
  for (int l = 0; l < hidden_layers; ++l) widths.push_back(hidden_width);
  widths.push_back(packed_size(d));
  return MlpProvider(d, Mlp::initialized(std::move(widths), seed));
}

void MlpProvider::set_params(const Eigen::VectorXd& p) {
  if (p.size() != mlp_.params.size())
    throw std::invalid_argument("MlpProvider::set_params: size mismatch");
  mlp_.params = p;
}

Eigen::MatrixXd MlpProvider::decode_chol(const Eigen::MatrixXd& points) const {
  return decode_chol_rows(mlp_.forward(points), d_);
}

int MlpProvider::tape_decode(Tape& tape, const Eigen::MatrixXd& points,
                             std::vector<int>& leaves) const {
  const int input = tape.constant(points);
  const int out = mlp_.tape_forward(tape, input, leaves);
  return tape.chol_decode(out, d_);
}

Eigen::VectorXd MlpProvider::gather_grad(const Tape& tape,
                                         const std::vector<int>& leaves) const {
  return mlp_.gather_grad(tape, leaves);
}

std::unique_ptr<PrecisionProvider> MlpProvider::clone() const {
  return std::make_unique<MlpProvider>(*this);
}

// --- free functions --------------------------------------------------------------

Eigen::MatrixXd provider_precision(const PrecisionProvider& provider,
                                   const Eigen::VectorXd& z) {
  if (z.size() != provider.dim())
    throw std::invalid_argument("provider_precision: dimension mismatch");
  if (const auto* table = dynamic_cast<const TableProvider*>(&provider)) {
    for (int i = 0; i < table->num_centers(); ++i) {
      if ((table->centers().row(i).transpose() - z).norm() == 0.0) {
        const int nl = packed_size(provider.dim());
        const Eigen::VectorXd raw = table->params().segment(i * nl, nl);
        Eigen::MatrixXd one_row = raw.transpose();
        const Eigen::MatrixXd dec = decode_chol_rows(one_row, provider.dim());
        return cholesky_to_precision(dec.row(0).transpose(), provider.dim());
      }
    }
    throw std::invalid_argument("provider_precision: point is not a table center");
  }
  const Eigen::MatrixXd dec = provider.decode_chol(z.transpose());
  return cholesky_to_precision(dec.row(0).transpose(), provider.dim());
}

}  // namespace kscore
