#include "mglm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mglm {

namespace {

// C[m,n] += A[m,k] * B[k,n]. i-k-j order so the inner loop streams rows of B.
void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// C[m,k] += A[m,n] * B^T where B is [k,n]; BT is the materialized [n,k] transpose.
void matmul_accT(const double* a, const double* bt, double* c, int m, int n, int k) {
  matmul_acc(a, bt, c, m, n, k);
}

std::vector<double> transpose(const double* b, int rows, int cols) {
  std::vector<double> bt(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) bt[static_cast<size_t>(j) * rows + i] = b[static_cast<size_t>(i) * cols + j];
  return bt;
}

constexpr double kLayerNormEps = 1e-5;

}  // namespace

int Graph::push(Tensor value, std::function<void(Graph&)> back) {
  Node n;
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Graph::check_id(int id) const {
  if (id < 0 || id >= size()) throw std::invalid_argument("Graph: node id out of range");
}

int Graph::input(Tensor v) { return push(std::move(v), {}); }

int Graph::param(Parameter& p) {
  int id = push(p.value, {});
  nodes_.back().bound = &p;
  return id;
}

int Graph::matmul(int a, int b) {
  check_id(a);
  check_id(b);
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.shape[1] != B.shape[0])
    throw std::invalid_argument("matmul: incompatible shapes " + A.shape_str() + " x " + B.shape_str());
  int m = A.shape[0], k = A.shape[1], n = B.shape[1];
  Tensor out = Tensor::zeros({m, n});
  matmul_acc(A.data.data(), B.data.data(), out.data.data(), m, k, n);
  int me = push(std::move(out), {});
  nodes_[static_cast<size_t>(me)].back = [a, b, m, k, n, me](Graph& g) {
    const Tensor& dC = g.grad(me);
    const Tensor& A2 = g.value(a);
    const Tensor& B2 = g.value(b);
    // dA += dC * B^T
    std::vector<double> bt = transpose(B2.data.data(), k, n);
    matmul_accT(dC.data.data(), bt.data(), g.grad_mut(a).data.data(), m, n, k);
    // dB += A^T * dC
    std::vector<double> at = transpose(A2.data.data(), m, k);
    matmul_acc(at.data(), dC.data.data(), g.grad_mut(b).data.data(), k, m, n);
  };
  return me;
}

int Graph::add(int a, int b) {
  check_id(a);
  check_id(b);
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) throw std::invalid_argument("add: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
  Tensor out = A;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += B.data[i];
  int me = push(std::move(out), {});
  nodes_[static_cast<size_t>(me)].back = [a, b, me](Graph& g) {
    const Tensor& d = g.grad(me);
    Tensor& da = g.grad_mut(a);
    Tensor& db = g.grad_mut(b);
    for (size_t i = 0; i < d.data.size(); ++i) {
      da.data[i] += d.data[i];
      db.data[i] += d.data[i];
    }
  };
  return me;
}

int Graph::add_rowvec(int x, int bias) {
  check_id(x);
  check_id(bias);
  const Tensor& X = value(x);
  const Tensor& B = value(bias);
  if (X.rank() != 2 || B.rank() != 1 || B.shape[0] != X.shape[1])
    throw std::invalid_argument("add_rowvec: shape mismatch");
  int m = X.shape[0], n = X.shape[1];
  Tensor out = X;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) += B.data[static_cast<size_t>(j)];
  int me = push(std::move(out), {});
  nodes_[static_cast<size_t>(me)].back = [x, bias, m, n, me](Graph& g) {
    const Tensor& d = g.grad(me);
    Tensor& dx = g.grad_mut(x);
    Tensor& db = g.grad_mut(bias);
    for (size_t i = 0; i < d.data.size(); ++i) dx.data[i] += d.data[i];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) db.data[static_cast<size_t>(j)] += d.at(i, j);
  };
  return me;
}

int Graph::relu(int x) {
  check_id(x);
  Tensor out = value(x);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  int me = push(std::move(out), {});
  nodes_[static_cast<size_t>(me)].back = [x, me](Graph& g) {
    const Tensor& d = g.grad(me);
    const Tensor& X = g.value(x);
    Tensor& dx = g.grad_mut(x);
    for (size_t i = 0; i < d.data.size(); ++i)
      if (X.data[i] > 0.0) dx.data[i] += d.data[i];
  };
  return me;
}

int Graph::layer_norm(int x, int gamma, int beta) {
  check_id(x);
  check_id(gamma);
  check_id(beta);
  const Tensor& X = value(x);
  const Tensor& G = value(gamma);
  const Tensor& B = value(beta);
  if (X.rank() != 2 || G.rank() != 1 || B.rank() != 1 || G.shape[0] != X.shape[1] || B.shape[0] != X.shape[1])
    throw std::invalid_argument("layer_norm: shape mismatch");
  int m = X.shape[0], n = X.shape[1];
  Tensor out = Tensor::zeros({m, n});
  std::vector<double> inv_std(static_cast<size_t>(m));
  std::vector<double> mean(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += X.at(i, j);
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      double d = X.at(i, j) - mu;
      var += d * d;
    }
    var /= n;
    double is = 1.0 / std::sqrt(var + kLayerNormEps);
    mean[static_cast<size_t>(i)] = mu;
    inv_std[static_cast<size_t>(i)] = is;
    for (int j = 0; j < n; ++j)
      out.at(i, j) = (X.at(i, j) - mu) * is * G.data[static_cast<size_t>(j)] + B.data[static_cast<size_t>(j)];
  }
  int me = push(std::move(out), {});
  nodes_[static_cast<size_t>(me)].back = [x, gamma, beta, m, n, me, mean, inv_std](Graph& g) {
    const Tensor& d = g.grad(me);
    const Tensor& X2 = g.value(x);
    const Tensor& G2 = g.value(gamma);
    Tensor& dx = g.grad_mut(x);
    Tensor& dg = g.grad_mut(gamma);
    Tensor& db = g.grad_mut(beta);
    for (int i = 0; i < m; ++i) {
      double mu = mean[static_cast<size_t>(i)];
      double is = inv_std[static_cast<size_t>(i)];
      double sum_dyg = 0.0, sum_dyg_xhat = 0.0;
      for (int j = 0; j < n; ++j) {
        double xhat = (X2.at(i, j) - mu) * is;
        double dyg = d.at(i, j) * G2.data[static_cast<size_t>(j)];
        sum_dyg += dyg;
        sum_dyg_xhat += dyg * xhat;
        dg.data[static_cast<size_t>(j)] += d.at(i, j) * xhat;
        db.data[static_cast<size_t>(j)] += d.at(i, j);
      }
      for (int j = 0; j < n; ++j) {
        double xhat = (X2.at(i, j) - mu) * is;
        double dyg = d.at(i, j) * G2.data[static_cast<size_t>(j)];
        dx.at(i, j) += is * (dyg - (sum_dyg + xhat * sum_dyg_xhat) / n);
      }
    }
  };
  return me;
}

int Graph::attention_core(int q, int k, int v, int num_heads) {
  check_id(q);
  check_id(k);
  check_id(v);
  const Tensor& Q = value(q);
  const Tensor& K = value(k);
  const Tensor& V = value(v);
  if (Q.rank() != 2 || !Q.same_shape(K) || !Q.same_shape(V))
    throw std::invalid_argument("attention_core: q/k/v must share shape [T,d]");
  int T = Q.shape[0], d = Q.shape[1];
  if (num_heads <= 0 || d % num_heads != 0)
    throw std::invalid_argument("attention_core: head count must divide model dim");
  int dh = d / num_heads;
  double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor out = Tensor::zeros({T, d});
  // Attention probabilities per head, cached for backward: [h][T*T].
  auto probs = std::make_shared<std::vector<std::vector<double>>>(static_cast<size_t>(num_heads));
  for (int h = 0; h < num_heads; ++h) {
    int off = h * dh;
    std::vector<double>& A = (*probs)[static_cast<size_t>(h)];
    A.assign(static_cast<size_t>(T) * T, 0.0);
    for (int i = 0; i < T; ++i) {
      double mx = -1e300;
      for (int j = 0; j < T; ++j) {
        double s = 0.0;
        for (int c = 0; c < dh; ++c) s += Q.at(i, off + c) * K.at(j, off + c);
        s *= inv_scale;
        A[static_cast<size_t>(i) * T + j] = s;
        mx = std::max(mx, s);
      }
      double z = 0.0;
      for (int j = 0; j < T; ++j) {
        double e = std::exp(A[static_cast<size_t>(i) * T + j] - mx);
        A[static_cast<size_t>(i) * T + j] = e;
        z += e;
      }
      for (int j = 0; j < T; ++j) A[static_cast<size_t>(i) * T + j] /= z;
      for (int j = 0; j < T; ++j) {
        double a = A[static_cast<size_t>(i) * T + j];
        for (int c = 0; c < dh; ++c) out.at(i, off + c) += a * V.at(j, off + c);
      }
    }
  }
  int me = push(std::move(out), {});
  nodes_[static_cast<size_t>(me)].back = [q, k, v, num_heads, T, dh, inv_scale, probs, me](Graph& g) {
    const Tensor& dO = g.grad(me);
    const Tensor& Q2 = g.value(q);
    const Tensor& K2 = g.value(k);
    const Tensor& V2 = g.value(v);
    Tensor& dQ = g.grad_mut(q);
    Tensor& dK = g.grad_mut(k);
    Tensor& dV = g.grad_mut(v);
    std::vector<double> dA(static_cast<size_t>(T) * T);
    for (int h = 0; h < num_heads; ++h) {
      int off = h * dh;
      const std::vector<double>& A = (*probs)[static_cast<size_t>(h)];
      // dV += A^T dO_h ; dA = dO_h V_h^T
      for (int i = 0; i < T; ++i) {
        for (int j = 0; j < T; ++j) {
          double a = A[static_cast<size_t>(i) * T + j];
          double s = 0.0;
          for (int c = 0; c < dh; ++c) {
            dV.at(j, off + c) += a * dO.at(i, off + c);
            s += dO.at(i, off + c) * V2.at(j, off + c);
          }
          dA[static_cast<size_t>(i) * T + j] = s;
        }
      }
      // Softmax backward per row, then dQ/dK through the scaled dot products.
      for (int i = 0; i < T; ++i) {
        double dot = 0.0;
        for (int j = 0; j < T; ++j) dot += dA[static_cast<size_t>(i) * T + j] * A[static_cast<size_t>(i) * T + j];
        for (int j = 0; j < T; ++j) {
          double ds = A[static_cast<size_t>(i) * T + j] * (dA[static_cast<size_t>(i) * T + j] - dot) * inv_scale;
          if (ds == 0.0) continue;
          for (int c = 0; c < dh; ++c) {
            dQ.at(i, off + c) += ds * K2.at(j, off + c);
            dK.at(j, off + c) += ds * Q2.at(i, off + c);
          }
        }
      }
    }
  };
  return me;
}

int Graph::embed_rows(int tok_table, int pos_table, int chan_table,
                       const std::vector<int>& tokens, const std::vector<int>& channels) {
  check_id(tok_table);
  check_id(pos_table);
  check_id(chan_table);
  const Tensor& TK = value(tok_table);
  const Tensor& PS = value(pos_table);
  const Tensor& CH = value(chan_table);
  if (TK.rank() != 2 || PS.rank() != 2 || CH.rank() != 2 || TK.shape[1] != PS.shape[1] || TK.shape[1] != CH.shape[1])
    throw std::invalid_argument("embed_rows: embedding tables must agree on dim");
  if (tokens.size() != channels.size()) throw std::invalid_argument("embed_rows: tokens/channels length mismatch");
  int T = static_cast<int>(tokens.size());
  int d = TK.shape[1];
  if (T > PS.shape[0])
    throw std::runtime_error("embed_rows: sequence length " + std::to_string(T) +
                             " exceeds position capacity " + std::to_string(PS.shape[0]));
  Tensor out = Tensor::zeros({T, d});
  for (int i = 0; i < T; ++i) {
    int tk = tokens[static_cast<size_t>(i)];
    int ch = channels[static_cast<size_t>(i)];
    if (tk < 0 || tk >= TK.shape[0]) throw std::invalid_argument("embed_rows: token id out of range");
    if (ch < 0 || ch >= CH.shape[0]) throw std::invalid_argument("embed_rows: channel id out of range");
    for (int j = 0; j < d; ++j) out.at(i, j) = TK.at(tk, j) + PS.at(i, j) + CH.at(ch, j);
  }
  int me = push(std::move(out), {});
  nodes_[static_cast<size_t>(me)].back = [tok_table, pos_table, chan_table, tokens, channels, d, me](Graph& g) {
    const Tensor& dO = g.grad(me);
    Tensor& dT = g.grad_mut(tok_table);
    Tensor& dP = g.grad_mut(pos_table);
    Tensor& dC = g.grad_mut(chan_table);
    int T = static_cast<int>(tokens.size());
    for (int i = 0; i < T; ++i) {
      for (int j = 0; j < d; ++j) {
        double dv = dO.at(i, j);
        dT.at(tokens[static_cast<size_t>(i)], j) += dv;
        dP.at(i, j) += dv;
        dC.at(channels[static_cast<size_t>(i)], j) += dv;
      }
    }
  };
  return me;
}

int Graph::sum(int x) {
  check_id(x);
  double s = 0.0;
  for (double v : value(x).data) s += v;
  int me = push(Tensor::scalar(s), {});
  nodes_[static_cast<size_t>(me)].back = [x, me](Graph& g) {
    double d = g.grad(me).data[0];
    Tensor& dx = g.grad_mut(x);
    for (double& v : dx.data) v += d;
  };
  return me;
}

int Graph::dot(int a, int b) {
  check_id(a);
  check_id(b);
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) throw std::invalid_argument("dot: shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < A.data.size(); ++i) s += A.data[i] * B.data[i];
  int me = push(Tensor::scalar(s), {});
  nodes_[static_cast<size_t>(me)].back = [a, b, me](Graph& g) {
    double d = g.grad(me).data[0];
    const Tensor& A2 = g.value(a);
    const Tensor& B2 = g.value(b);
    Tensor& da = g.grad_mut(a);
    Tensor& db = g.grad_mut(b);
    for (size_t i = 0; i < A2.data.size(); ++i) {
      da.data[i] += d * B2.data[i];
      db.data[i] += d * A2.data[i];
    }
  };
  return me;
}

int Graph::weighted_nll_rows(int logits, const std::vector<uint8_t>& banned,
                             const std::vector<std::vector<RowTarget>>& targets, double scale) {
  check_id(logits);
  const Tensor& X = value(logits);
  if (X.rank() != 2) throw std::invalid_argument("weighted_nll_rows: logits must be [T,V]");
  int T = X.shape[0], V = X.shape[1];
  if (static_cast<int>(banned.size()) != V) throw std::invalid_argument("weighted_nll_rows: banned mask size mismatch");
  if (static_cast<int>(targets.size()) != T) throw std::invalid_argument("weighted_nll_rows: targets size mismatch");

  // Softmax probabilities per row over the allowed support, cached for backward.
  auto probs = std::make_shared<Tensor>(Tensor::zeros({T, V}));
  double loss = 0.0;
  for (int i = 0; i < T; ++i) {
    double mx = -1e300;
    for (int j = 0; j < V; ++j)
      if (!banned[static_cast<size_t>(j)]) mx = std::max(mx, X.at(i, j));
    double z = 0.0;
    for (int j = 0; j < V; ++j) {
      if (banned[static_cast<size_t>(j)]) continue;
      double e = std::exp(X.at(i, j) - mx);
      probs->at(i, j) = e;
      z += e;
    }
    double log_z = std::log(z) + mx;
    for (int j = 0; j < V; ++j) probs->at(i, j) /= z;
    for (const RowTarget& t : targets[static_cast<size_t>(i)]) {
      if (t.index < 0 || t.index >= V) throw std::invalid_argument("weighted_nll_rows: target index out of range");
      if (banned[static_cast<size_t>(t.index)]) throw std::invalid_argument("weighted_nll_rows: target on banned column");
      if (t.weight < 0.0) throw std::invalid_argument("weighted_nll_rows: negative weight");
      loss += t.weight * (log_z - X.at(i, t.index));
    }
  }
  loss *= scale;
  int me = push(Tensor::scalar(loss), {});
  nodes_[static_cast<size_t>(me)].back = [logits, targets, probs, scale, T, V, me](Graph& g) {
    double d = g.grad(me).data[0] * scale;
    Tensor& dx = g.grad_mut(logits);
    for (int i = 0; i < T; ++i) {
      double wsum = 0.0;
      for (const RowTarget& t : targets[static_cast<size_t>(i)]) wsum += t.weight;
      if (wsum != 0.0)
        for (int j = 0; j < V; ++j) dx.at(i, j) += d * wsum * probs->at(i, j);
      for (const RowTarget& t : targets[static_cast<size_t>(i)]) dx.at(i, t.index) -= d * t.weight;
    }
  };
  return me;
}

void Graph::backward(int node, bool accumulate_into_params) {
  check_id(node);
  if (value(node).numel() != 1) throw std::invalid_argument("backward: loss node must be scalar");
  for (Node& n : nodes_) {
    if (n.grad.shape != n.value.shape)
      n.grad = Tensor::zeros(n.value.shape);
    else
      n.grad.fill(0.0);
  }
  nodes_[static_cast<size_t>(node)].grad.data[0] = 1.0;
  for (int i = node; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.back) n.back(*this);
  }
  if (accumulate_into_params) add_param_grads();
}

void Graph::add_param_grads() {
  for (Node& n : nodes_) {
    if (!n.bound) continue;
    if (n.grad.shape != n.value.shape) continue;  // backward not run
    Tensor& pg = n.bound->grad;
    for (size_t i = 0; i < pg.data.size(); ++i) pg.data[i] += n.grad.data[i];
  }
}

}  // namespace mglm
