#include "hoigaze/nd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hoigaze/errors.hpp"

namespace hoigaze::nd {
namespace {

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t n = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Graph* graph_of(std::initializer_list<Var> vars) {
  Graph* g = nullptr;
  for (Var v : vars) {
    if (v.graph == nullptr) throw UsageError("Var is not bound to a graph");
    if (g != nullptr && g != v.graph) throw UsageError("Vars belong to different graphs");
    g = v.graph;
  }
  return g;
}

bool any_requires(Graph* g, std::initializer_list<Var> vars) {
  for (Var v : vars) {
    if (g->requires_grad(v)) return true;
  }
  return false;
}

void require_same_shape(const char* op, const NdArray& a, const NdArray& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_rank(const char* op, const NdArray& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(a.shape()));
  }
}

// Raw kernel shared by axis_product and matmul.
void contract_forward(const double* x, const double* m, double* out, AxisSplit s, std::size_t p,
                      bool transpose_m) {
  if (s.inner == 1) {
    // Contracting the last axis: each row of x times the matrix.
    for (std::size_t o = 0; o < s.outer; ++o) {
      const double* xo = x + o * s.n;
      double* yo = out + o * p;
      if (transpose_m) {
        for (std::size_t j = 0; j < p; ++j) {
          const double* mj = m + j * s.n;
          double acc = 0.0;
          for (std::size_t k = 0; k < s.n; ++k) acc += xo[k] * mj[k];
          yo[j] = acc;
        }
      } else {
        for (std::size_t k = 0; k < s.n; ++k) {
          const double c = xo[k];
          const double* mk = m + k * p;
          for (std::size_t j = 0; j < p; ++j) yo[j] += c * mk[j];
        }
      }
    }
    return;
  }
  for (std::size_t o = 0; o < s.outer; ++o) {
    const double* xo = x + o * s.n * s.inner;
    double* yo = out + o * p * s.inner;
    for (std::size_t k = 0; k < s.n; ++k) {
      const double* xk = xo + k * s.inner;
      for (std::size_t j = 0; j < p; ++j) {
        const double c = transpose_m ? m[j * s.n + k] : m[k * p + j];
        if (c == 0.0) continue;
        double* yj = yo + j * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) yj[i] += c * xk[i];
      }
    }
  }
}

// Row t holds the zero-padded kernel-3 neighbourhood of frame t, laid out
// as (channel, tap).
std::vector<double> unfold_columns(const double* x, std::size_t cin, std::size_t steps) {
  const std::size_t width = cin * 3;
  std::vector<double> col(steps * width, 0.0);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t src = t + k;
        if (src == 0 || src > steps) continue;
        col[t * width + c * 3 + k] = x[c * steps + src - 1];
      }
  return col;
}

// Gradients of contract_forward's last-axis path.
void contract_last_axis_backward(Graph* g, Var x, Var m, const double* u, AxisSplit s, std::size_t p,
                                 bool transpose_m) {
  const double* xv = g->value(x).data().data();
  const double* mv = g->value(m).data().data();
  if (g->requires_grad(x)) {
    double* gx = g->grad_buffer(x).data().data();
    for (std::size_t o = 0; o < s.outer; ++o) {
      const double* uo = u + o * p;
      double* go = gx + o * s.n;
      if (transpose_m) {
        for (std::size_t j = 0; j < p; ++j) {
          const double c = uo[j];
          const double* mj = mv + j * s.n;
          for (std::size_t k = 0; k < s.n; ++k) go[k] += c * mj[k];
        }
      } else {
        for (std::size_t k = 0; k < s.n; ++k) {
          const double* mk = mv + k * p;
          double acc = 0.0;
          for (std::size_t j = 0; j < p; ++j) acc += uo[j] * mk[j];
          go[k] += acc;
        }
      }
    }
  }
  if (g->requires_grad(m)) {
    double* gm = g->grad_buffer(m).data().data();
    for (std::size_t o = 0; o < s.outer; ++o) {
      const double* xo = xv + o * s.n;
      const double* uo = u + o * p;
      if (transpose_m) {
        for (std::size_t j = 0; j < p; ++j) {
          const double c = uo[j];
          double* gj = gm + j * s.n;
          for (std::size_t k = 0; k < s.n; ++k) gj[k] += c * xo[k];
        }
      } else {
        for (std::size_t k = 0; k < s.n; ++k) {
          const double c = xo[k];
          double* gk = gm + k * p;
          for (std::size_t j = 0; j < p; ++j) gk[j] += c * uo[j];
        }
      }
    }
  }
}

}  // namespace

Var add(Var a, Var b) {
  Graph* g = graph_of({a, b});
  const NdArray& av = g->value(a);
  const NdArray& bv = g->value(b);
  require_same_shape("add", av, bv);
  NdArray out = av;
  out.add_scaled(bv);
  return g->record(std::move(out), any_requires(g, {a, b}), [g, a, b](const NdArray& up) {
    if (g->requires_grad(a)) g->grad_buffer(a).add_scaled(up);
    if (g->requires_grad(b)) g->grad_buffer(b).add_scaled(up);
  });
}

Var mul(Var a, Var b) {
  Graph* g = graph_of({a, b});
  const NdArray& av = g->value(a);
  const NdArray& bv = g->value(b);
  require_same_shape("mul", av, bv);
  NdArray out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return g->record(std::move(out), any_requires(g, {a, b}), [g, a, b](const NdArray& up) {
    const NdArray& av = g->value(a);
    const NdArray& bv = g->value(b);
    if (g->requires_grad(a)) {
      NdArray& ga = g->grad_buffer(a);
      for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i] * bv[i];
    }
    if (g->requires_grad(b)) {
      NdArray& gb = g->grad_buffer(b);
      for (std::size_t i = 0; i < up.size(); ++i) gb[i] += up[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Graph* g = graph_of({a});
  NdArray out = g->value(a);
  for (double& v : out.data()) v *= factor;
  return g->record(std::move(out), g->requires_grad(a),
                   [g, a, factor](const NdArray& up) { g->grad_buffer(a).add_scaled(up, factor); });
}

Var tanh(Var a) {
  Graph* g = graph_of({a});
  NdArray out = g->value(a);
  for (double& v : out.data()) v = std::tanh(v);
  const std::size_t self = g->node_count();
  return g->record(std::move(out), g->requires_grad(a), [g, a, self](const NdArray& up) {
    const NdArray& y = g->value(Var{g, self});
    NdArray& ga = g->grad_buffer(a);
    for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i] * (1.0 - y[i] * y[i]);
  });
}

Var sum(Var a) {
  Graph* g = graph_of({a});
  double total = 0.0;
  for (double v : g->value(a).data()) total += v;
  return g->record(NdArray({1}, {total}), g->requires_grad(a), [g, a](const NdArray& up) {
    NdArray& ga = g->grad_buffer(a);
    for (double& v : ga.data()) v += up[0];
  });
}

Var reshape(Var a, Shape shape) {
  Graph* g = graph_of({a});
  NdArray out = g->value(a).reshaped(std::move(shape));
  return g->record(std::move(out), g->requires_grad(a), [g, a](const NdArray& up) {
    NdArray& ga = g->grad_buffer(a);
    for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i];
  });
}

Var transpose(Var a) {
  Graph* g = graph_of({a});
  const NdArray& av = g->value(a);
  require_rank("transpose", av, 2);
  const std::size_t r = av.dim(0), c = av.dim(1);
  NdArray out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = av.at(i, j);
  return g->record(std::move(out), g->requires_grad(a), [g, a, r, c](const NdArray& up) {
    NdArray& ga = g->grad_buffer(a);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga.at(i, j) += up.at(j, i);
  });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Graph* g = parts.front().graph;
  const Shape& first = g->value(parts.front()).shape();
  Shape out_shape = first;
  out_shape.at(axis) = 0;
  bool needs_grad = false;
  for (Var p : parts) {
    if (p.graph != g) throw UsageError("concat: Vars belong to different graphs");
    const Shape& s = g->value(p).shape();
    if (s.size() != first.size()) throw ShapeError("concat: rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) {
        throw ShapeError("concat: axis " + std::to_string(d) + " mismatch " + shape_string(s) +
                         " vs " + shape_string(first));
      }
    }
    out_shape[axis] += s[axis];
    needs_grad = needs_grad || g->requires_grad(p);
  }
  const AxisSplit os = split_at(out_shape, axis);
  NdArray out(out_shape);
  std::size_t offset = 0;
  for (Var p : parts) {
    const NdArray& pv = g->value(p);
    const std::size_t len = pv.dim(axis);
    for (std::size_t o = 0; o < os.outer; ++o) {
      std::copy_n(pv.data().data() + o * len * os.inner, len * os.inner,
                  out.data().data() + (o * os.n + offset) * os.inner);
    }
    offset += len;
  }
  return g->record(std::move(out), needs_grad, [g, parts, axis, os](const NdArray& up) {
    std::size_t offset = 0;
    for (Var p : parts) {
      const std::size_t len = g->value(p).dim(axis);
      if (g->requires_grad(p)) {
        NdArray& gp = g->grad_buffer(p);
        for (std::size_t o = 0; o < os.outer; ++o) {
          const double* src = up.data().data() + (o * os.n + offset) * os.inner;
          double* dst = gp.data().data() + o * len * os.inner;
          for (std::size_t i = 0; i < len * os.inner; ++i) dst[i] += src[i];
        }
      }
      offset += len;
    }
  });
}

Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t length) {
  Graph* g = graph_of({a});
  const NdArray& av = g->value(a);
  const AxisSplit s = split_at(av.shape(), axis);
  if (length == 0 || begin + length > s.n) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + length) + ") outside axis of length " +
                     std::to_string(s.n));
  }
  Shape out_shape = av.shape();
  out_shape[axis] = length;
  NdArray out(out_shape);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(av.data().data() + (o * s.n + begin) * s.inner, length * s.inner,
                out.data().data() + o * length * s.inner);
  }
  return g->record(std::move(out), g->requires_grad(a),
                   [g, a, s, begin, length](const NdArray& up) {
                     NdArray& ga = g->grad_buffer(a);
                     for (std::size_t o = 0; o < s.outer; ++o) {
                       const double* src = up.data().data() + o * length * s.inner;
                       double* dst = ga.data().data() + (o * s.n + begin) * s.inner;
                       for (std::size_t i = 0; i < length * s.inner; ++i) dst[i] += src[i];
                     }
                   });
}

Var axis_product(Var x, Var m, std::size_t axis, bool transpose_m) {
  Graph* g = graph_of({x, m});
  const NdArray& xv = g->value(x);
  const NdArray& mv = g->value(m);
  require_rank("axis_product matrix", mv, 2);
  const AxisSplit s = split_at(xv.shape(), axis);
  const std::size_t contracted = transpose_m ? mv.dim(1) : mv.dim(0);
  const std::size_t p = transpose_m ? mv.dim(0) : mv.dim(1);
  if (contracted != s.n) {
    throw ShapeError("axis_product: axis " + std::to_string(axis) + " of " +
                     shape_string(xv.shape()) + " does not match matrix " +
                     shape_string(mv.shape()));
  }
  Shape out_shape = xv.shape();
  out_shape[axis] = p;
  NdArray out(out_shape);
  contract_forward(xv.data().data(), mv.data().data(), out.data().data(), s, p, transpose_m);

  return g->record(std::move(out), any_requires(g, {x, m}),
                   [g, x, m, s, p, transpose_m](const NdArray& up) {
                     const NdArray& xv = g->value(x);
                     const NdArray& mv = g->value(m);
                     const double* u = up.data().data();
                     if (s.inner == 1) {
                       contract_last_axis_backward(g, x, m, u, s, p, transpose_m);
                       return;
                     }
                     if (g->requires_grad(x)) {
                       double* gx = g->grad_buffer(x).data().data();
                       for (std::size_t o = 0; o < s.outer; ++o) {
                         for (std::size_t k = 0; k < s.n; ++k) {
                           double* gk = gx + (o * s.n + k) * s.inner;
                           for (std::size_t j = 0; j < p; ++j) {
                             const double c = transpose_m ? mv[j * s.n + k] : mv[k * p + j];
                             const double* uj = u + (o * p + j) * s.inner;
                             for (std::size_t i = 0; i < s.inner; ++i) gk[i] += c * uj[i];
                           }
                         }
                       }
                     }
                     if (g->requires_grad(m)) {
                       double* gm = g->grad_buffer(m).data().data();
                       for (std::size_t o = 0; o < s.outer; ++o) {
                         for (std::size_t k = 0; k < s.n; ++k) {
                           const double* xk = xv.data().data() + (o * s.n + k) * s.inner;
                           for (std::size_t j = 0; j < p; ++j) {
                             const double* uj = u + (o * p + j) * s.inner;
                             double acc = 0.0;
                             for (std::size_t i = 0; i < s.inner; ++i) acc += xk[i] * uj[i];
                             if (transpose_m) {
                               gm[j * s.n + k] += acc;
                             } else {
                               gm[k * p + j] += acc;
                             }
                           }
                         }
                       }
                     }
                   });
}

Var matmul(Var a, Var b) {
  Graph* g = graph_of({a, b});
  const NdArray& av = g->value(a);
  const NdArray& bv = g->value(b);
  require_rank("matmul", av, 2);
  require_rank("matmul", bv, 2);
  if (av.dim(1) != bv.dim(0)) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_string(av.shape()) + " x " +
                     shape_string(bv.shape()));
  }
  // a (m x k) applied to axis 0 of b (k x n).
  return axis_product(b, a, 0, true);
}

Var conv1d(Var input, Var kernel, Var bias) {
  Graph* g = graph_of({input, kernel, bias});
  const NdArray& xv = g->value(input);
  const NdArray& kv = g->value(kernel);
  const NdArray& bv = g->value(bias);
  require_rank("conv1d input", xv, 2);
  require_rank("conv1d kernel", kv, 3);
  if (kv.dim(2) != 3) throw ShapeError("conv1d: kernel width must be 3");
  const std::size_t cin = xv.dim(0), steps = xv.dim(1), cout = kv.dim(0);
  if (kv.dim(1) != cin) {
    throw ShapeError("conv1d: input has " + std::to_string(cin) + " channels, kernel expects " +
                     std::to_string(kv.dim(1)));
  }
  if (bv.shape() != Shape{cout}) throw ShapeError("conv1d: bias must have shape [C_out]");

  // y[o, t] = b[o] + sum over (c, k) of w[o, c, k] * col[t, (c, k)]
  const std::size_t width = cin * 3;
  const std::vector<double> col = unfold_columns(xv.data().data(), cin, steps);
  std::vector<double> wt(width * cout);
  const double* w = kv.data().data();
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t r = 0; r < width; ++r) wt[r * cout + o] = w[o * width + r];

  std::vector<double> yt(steps * cout);
  for (std::size_t t = 0; t < steps; ++t) {
    double* yrow = yt.data() + t * cout;
    for (std::size_t o = 0; o < cout; ++o) yrow[o] = bv[o];
    const double* crow = col.data() + t * width;
    for (std::size_t r = 0; r < width; ++r) {
      const double c = crow[r];
      if (c == 0.0) continue;
      const double* wrow = wt.data() + r * cout;
      for (std::size_t o = 0; o < cout; ++o) yrow[o] += c * wrow[o];
    }
  }
  NdArray out({cout, steps});
  double* y = out.data().data();
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t o = 0; o < cout; ++o) y[o * steps + t] = yt[t * cout + o];

  return g->record(std::move(out), any_requires(g, {input, kernel, bias}),
                   [g, input, kernel, bias, cin, cout, steps, width](const NdArray& up) {
                     const double* u = up.data().data();
                     if (g->requires_grad(kernel)) {
                       const std::vector<double> col = unfold_columns(g->value(input).data().data(), cin, steps);
                       double* gw = g->grad_buffer(kernel).data().data();
                       for (std::size_t o = 0; o < cout; ++o) {
                         double* grow = gw + o * width;
                         for (std::size_t t = 0; t < steps; ++t) {
                           const double c = u[o * steps + t];
                           const double* crow = col.data() + t * width;
                           for (std::size_t r = 0; r < width; ++r) grow[r] += c * crow[r];
                         }
                       }
                     }
                     if (g->requires_grad(input)) {
                       const double* w = g->value(kernel).data().data();
                       std::vector<double> gcol(steps * width, 0.0);
                       for (std::size_t t = 0; t < steps; ++t) {
                         double* grow = gcol.data() + t * width;
                         for (std::size_t o = 0; o < cout; ++o) {
                           const double c = u[o * steps + t];
                           const double* wrow = w + o * width;
                           for (std::size_t r = 0; r < width; ++r) grow[r] += c * wrow[r];
                         }
                       }
                       double* gx = g->grad_buffer(input).data().data();
                       for (std::size_t t = 0; t < steps; ++t)
                         for (std::size_t c = 0; c < cin; ++c)
                           for (std::size_t k = 0; k < 3; ++k) {
                             const std::size_t src = t + k;  // padded index, x position src - 1
                             if (src == 0 || src > steps) continue;
                             gx[c * steps + src - 1] += gcol[t * width + c * 3 + k];
                           }
                     }
                     if (g->requires_grad(bias)) {
                       NdArray& gb = g->grad_buffer(bias);
                       for (std::size_t o = 0; o < cout; ++o) {
                         double acc = 0.0;
                         for (std::size_t t = 0; t < steps; ++t) acc += u[o * steps + t];
                         gb[o] += acc;
                       }
                     }
                   });
}

Var layer_norm(Var input, Var gain, Var offset, double epsilon) {
  Graph* g = graph_of({input, gain, offset});
  const NdArray& xv = g->value(input);
  require_rank("layer_norm", xv, 2);
  const std::size_t channels = xv.dim(0), steps = xv.dim(1);
  if (g->value(gain).shape() != Shape{channels} || g->value(offset).shape() != Shape{channels}) {
    throw ShapeError("layer_norm: gain/offset must have shape [" + std::to_string(channels) + "]");
  }
  const NdArray& gv = g->value(gain);
  const NdArray& bv = g->value(offset);

  NdArray normalised({channels, steps});
  std::vector<double> inv_std(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    double mean = 0.0;
    for (std::size_t c = 0; c < channels; ++c) mean += xv.at(c, t);
    mean /= static_cast<double>(channels);
    double var = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const double d = xv.at(c, t) - mean;
      var += d * d;
    }
    var /= static_cast<double>(channels);
    inv_std[t] = 1.0 / std::sqrt(var + epsilon);
    for (std::size_t c = 0; c < channels; ++c) normalised.at(c, t) = (xv.at(c, t) - mean) * inv_std[t];
  }
  NdArray out({channels, steps});
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t t = 0; t < steps; ++t) out.at(c, t) = gv[c] * normalised.at(c, t) + bv[c];

  return g->record(
      std::move(out), any_requires(g, {input, gain, offset}),
      [g, input, gain, offset, channels, steps, normalised = std::move(normalised),
       inv_std = std::move(inv_std)](const NdArray& up) {
        const NdArray& gv = g->value(gain);
        if (g->requires_grad(gain)) {
          NdArray& gg = g->grad_buffer(gain);
          for (std::size_t c = 0; c < channels; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < steps; ++t) acc += up.at(c, t) * normalised.at(c, t);
            gg[c] += acc;
          }
        }
        if (g->requires_grad(offset)) {
          NdArray& gb = g->grad_buffer(offset);
          for (std::size_t c = 0; c < channels; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < steps; ++t) acc += up.at(c, t);
            gb[c] += acc;
          }
        }
        if (g->requires_grad(input)) {
          NdArray& gx = g->grad_buffer(input);
          const double inv_c = 1.0 / static_cast<double>(channels);
          for (std::size_t t = 0; t < steps; ++t) {
            double sum_d = 0.0, sum_dx = 0.0;
            for (std::size_t c = 0; c < channels; ++c) {
              const double d = up.at(c, t) * gv[c];
              sum_d += d;
              sum_dx += d * normalised.at(c, t);
            }
            for (std::size_t c = 0; c < channels; ++c) {
              const double d = up.at(c, t) * gv[c];
              gx.at(c, t) += inv_std[t] * (d - inv_c * sum_d - normalised.at(c, t) * inv_c * sum_dx);
            }
          }
        }
      });
}

Var softmax(Var a, std::size_t axis) {
  Graph* g = graph_of({a});
  const NdArray& av = g->value(a);
  const AxisSplit s = split_at(av.shape(), axis);
  NdArray out(av.shape());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.n * s.inner + i;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < s.n; ++k) peak = std::max(peak, av[base + k * s.inner]);
      double total = 0.0;
      for (std::size_t k = 0; k < s.n; ++k) {
        const double e = std::exp(av[base + k * s.inner] - peak);
        out[base + k * s.inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < s.n; ++k) out[base + k * s.inner] /= total;
    }
  }
  const std::size_t self = g->node_count();
  return g->record(std::move(out), g->requires_grad(a), [g, a, s, self](const NdArray& up) {
    const NdArray& y = g->value(Var{g, self});
    NdArray& ga = g->grad_buffer(a);
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.n * s.inner + i;
        double dot = 0.0;
        for (std::size_t k = 0; k < s.n; ++k) dot += y[base + k * s.inner] * up[base + k * s.inner];
        for (std::size_t k = 0; k < s.n; ++k) {
          const std::size_t idx = base + k * s.inner;
          ga[idx] += y[idx] * (up[idx] - dot);
        }
      }
    }
  });
}

Var dropout(Var a, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return a;
  Graph* g = graph_of({a});
  const NdArray& av = g->value(a);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  NdArray mask(av.shape());
  NdArray out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) {
    mask[i] = uniform(rng) >= rate ? keep_scale : 0.0;
    out[i] = av[i] * mask[i];
  }
  return g->record(std::move(out), g->requires_grad(a),
                   [g, a, mask = std::move(mask)](const NdArray& up) {
                     NdArray& ga = g->grad_buffer(a);
                     for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i] * mask[i];
                   });
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels) {
  Graph* g = graph_of({logits});
  const NdArray& lv = g->value(logits);
  require_rank("softmax_cross_entropy", lv, 2);
  const std::size_t classes = lv.dim(0), steps = lv.dim(1);
  if (labels.size() != steps) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(steps) + " columns");
  }
  NdArray probs({classes, steps});
  double loss = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    if (labels[t] >= classes) throw UsageError("softmax_cross_entropy: label out of range");
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes; ++c) peak = std::max(peak, lv.at(c, t));
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) total += std::exp(lv.at(c, t) - peak);
    const double log_total = std::log(total);
    for (std::size_t c = 0; c < classes; ++c) probs.at(c, t) = std::exp(lv.at(c, t) - peak - log_total);
    loss -= lv.at(labels[t], t) - peak - log_total;
  }
  loss /= static_cast<double>(steps);
  std::vector<std::size_t> label_copy(labels.begin(), labels.end());
  return g->record(NdArray({1}, {loss}), g->requires_grad(logits),
                   [g, logits, classes, steps, probs = std::move(probs),
                    label_copy = std::move(label_copy)](const NdArray& up) {
                     NdArray& gl = g->grad_buffer(logits);
                     const double f = up[0] / static_cast<double>(steps);
                     for (std::size_t t = 0; t < steps; ++t) {
                       for (std::size_t c = 0; c < classes; ++c) {
                         const double target = c == label_copy[t] ? 1.0 : 0.0;
                         gl.at(c, t) += f * (probs.at(c, t) - target);
                       }
                     }
                   });
}

Var weighted_squared_error(Var pred, const NdArray& target, std::span<const double> weights) {
  Graph* g = graph_of({pred});
  const NdArray& pv = g->value(pred);
  require_rank("weighted_squared_error", pv, 2);
  require_same_shape("weighted_squared_error", pv, target);
  const std::size_t dims = pv.dim(0), steps = pv.dim(1);
  if (weights.size() != steps) throw ShapeError("weighted_squared_error: one weight per column");
  double loss = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    double sq = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = pv.at(d, t) - target.at(d, t);
      sq += diff * diff;
    }
    loss += weights[t] * sq;
  }
  loss /= static_cast<double>(steps);
  std::vector<double> w(weights.begin(), weights.end());
  return g->record(NdArray({1}, {loss}), g->requires_grad(pred),
                   [g, pred, target, dims, steps, w = std::move(w)](const NdArray& up) {
                     const NdArray& pv = g->value(pred);
                     NdArray& gp = g->grad_buffer(pred);
                     const double f = 2.0 * up[0] / static_cast<double>(steps);
                     for (std::size_t d = 0; d < dims; ++d)
                       for (std::size_t t = 0; t < steps; ++t)
                         gp.at(d, t) += f * w[t] * (pv.at(d, t) - target.at(d, t));
                   });
}

Var unit_columns(Var a, const NdArray& fallback, double min_norm, std::size_t* fallback_count) {
  Graph* g = graph_of({a});
  const NdArray& av = g->value(a);
  require_rank("unit_columns", av, 2);
  require_same_shape("unit_columns", av, fallback);
  const std::size_t dims = av.dim(0), steps = av.dim(1);
  NdArray out({dims, steps});
  std::vector<double> norms(steps);
  std::size_t replaced = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    double sq = 0.0;
    for (std::size_t d = 0; d < dims; ++d) sq += av.at(d, t) * av.at(d, t);
    norms[t] = std::sqrt(sq);
    if (norms[t] < min_norm) {
      norms[t] = 0.0;
      ++replaced;
      for (std::size_t d = 0; d < dims; ++d) out.at(d, t) = fallback.at(d, t);
    } else {
      for (std::size_t d = 0; d < dims; ++d) out.at(d, t) = av.at(d, t) / norms[t];
    }
  }
  if (fallback_count != nullptr) *fallback_count = replaced;
  const std::size_t self = g->node_count();
  return g->record(std::move(out), g->requires_grad(a),
                   [g, a, self, dims, steps, norms = std::move(norms)](const NdArray& up) {
                     const NdArray& y = g->value(Var{g, self});
                     NdArray& ga = g->grad_buffer(a);
                     for (std::size_t t = 0; t < steps; ++t) {
                       if (norms[t] == 0.0) continue;
                       double dot = 0.0;
                       for (std::size_t d = 0; d < dims; ++d) dot += y.at(d, t) * up.at(d, t);
                       for (std::size_t d = 0; d < dims; ++d)
                         ga.at(d, t) += (up.at(d, t) - y.at(d, t) * dot) / norms[t];
                     }
                   });
}

}  // namespace hoigaze::nd
