#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lea/errors.hpp"
#include "lea/rng.hpp"
#include "lea/tensor.hpp"

namespace lea::numeric {

// Reverse-mode tape over dense 2-D tensors. A tape lives for one training
// step: record the forward computation, call backward(loss) once, read
// parameter gradients, discard. Nodes are recorded in execution order, so
// walking them in reverse is a valid topological order and visits each
// node exactly once.
template <typename Real>
class TapeT {
  public:
    struct Var {
        std::size_t i = static_cast<std::size_t>(-1);
    };

    TapeT() = default;
    TapeT(const TapeT&) = delete;
    TapeT& operator=(const TapeT&) = delete;

    const TensorT<Real>& val(Var x) const { return node(x).val; }
    const TensorT<Real>& grad(Var x) const { return node(x).grad; }
    std::size_t size() const { return nodes_.size(); }

    // Leaf bound to an external parameter: after backward(), the node's
    // gradient is accumulated into the parameter's grad slot.
    Var leaf(ParamT<Real>& p) {
        Var v = push(p.value);
        nodes_.back().bound = &p;
        return v;
    }

    // Leaf with no gradient flow.
    Var constant(TensorT<Real> t) { return push(std::move(t)); }

    // C = op(A) . op(B), where op transposes when the flag is set.
    Var matmul(Var a, Var b, bool ta = false, bool tb = false) {
        TensorT<Real> c = mm(val(a), val(b), ta, tb);
        Var out = push(std::move(c));
        record(out, [this, a, b, out, ta, tb] {
            const TensorT<Real>& dc = grad(out);
            const TensorT<Real>& av = val(a);
            const TensorT<Real>& bv = val(b);
            if (!ta && !tb) {
                add_into(mut_grad(a), mm(dc, bv, false, true));
                add_into(mut_grad(b), mm(av, dc, true, false));
            } else if (!ta && tb) {
                add_into(mut_grad(a), mm(dc, bv, false, false));
                add_into(mut_grad(b), mm(dc, av, true, false));
            } else if (ta && !tb) {
                add_into(mut_grad(a), mm(bv, dc, false, true));
                add_into(mut_grad(b), mm(av, dc, false, false));
            } else {
                add_into(mut_grad(a), mm(bv, dc, true, true));
                add_into(mut_grad(b), mm(dc, av, true, true));
            }
        });
        return out;
    }

    Var add(Var a, Var b) {
        check_same_shape("add", val(a), val(b));
        TensorT<Real> y = val(a);
        const auto& bv = val(b).v;
        for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += bv[i];
        Var out = push(std::move(y));
        record(out, [this, a, b, out] {
            add_into(mut_grad(a), grad(out));
            add_into(mut_grad(b), grad(out));
        });
        return out;
    }

    // x: n x d, row: 1 x d, broadcast over rows (bias add).
    Var add_rowvec(Var x, Var row) {
        const TensorT<Real>& xv = val(x);
        const TensorT<Real>& rv = val(row);
        if (rv.rows != 1 || rv.cols != xv.cols)
            throw ContractViolation("add_rowvec: shape mismatch " +
                                    xv.shape_str() + " vs " + rv.shape_str());
        TensorT<Real> y = xv;
        for (std::size_t i = 0; i < y.rows; ++i)
            for (std::size_t j = 0; j < y.cols; ++j) y.at(i, j) += rv.at(0, j);
        Var out = push(std::move(y));
        record(out, [this, x, row, out] {
            const TensorT<Real>& dy = grad(out);
            add_into(mut_grad(x), dy);
            TensorT<Real>& dr = mut_grad(row);
            for (std::size_t i = 0; i < dy.rows; ++i)
                for (std::size_t j = 0; j < dy.cols; ++j)
                    dr.at(0, j) += dy.at(i, j);
        });
        return out;
    }

    Var mul(Var a, Var b) {
        check_same_shape("mul", val(a), val(b));
        TensorT<Real> y = val(a);
        const auto& bv = val(b).v;
        for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] *= bv[i];
        Var out = push(std::move(y));
        record(out, [this, a, b, out] {
            const TensorT<Real>& dy = grad(out);
            TensorT<Real>& da = mut_grad(a);
            TensorT<Real>& db = mut_grad(b);
            const auto& av = val(a).v;
            const auto& bv2 = val(b).v;
            for (std::size_t i = 0; i < dy.v.size(); ++i) {
                da.v[i] += dy.v[i] * bv2[i];
                db.v[i] += dy.v[i] * av[i];
            }
        });
        return out;
    }

    Var scalar_scale(Var x, Real c) {
        TensorT<Real> y = val(x);
        for (Real& e : y.v) e *= c;
        Var out = push(std::move(y));
        record(out, [this, x, out, c] {
            const TensorT<Real>& dy = grad(out);
            TensorT<Real>& dx = mut_grad(x);
            for (std::size_t i = 0; i < dy.v.size(); ++i)
                dx.v[i] += c * dy.v[i];
        });
        return out;
    }

    Var softmax_rows(Var x) {
        TensorT<Real> y = val(x);
        for (std::size_t i = 0; i < y.rows; ++i) {
            Real m = y.at(i, 0);
            for (std::size_t j = 1; j < y.cols; ++j)
                m = std::max(m, y.at(i, j));
            Real s = 0;
            for (std::size_t j = 0; j < y.cols; ++j) {
                y.at(i, j) = std::exp(y.at(i, j) - m);
                s += y.at(i, j);
            }
            for (std::size_t j = 0; j < y.cols; ++j) y.at(i, j) /= s;
        }
        Var out = push(std::move(y));
        record(out, [this, x, out] {
            const TensorT<Real>& yv = val(out);
            const TensorT<Real>& dy = grad(out);
            TensorT<Real>& dx = mut_grad(x);
            for (std::size_t i = 0; i < yv.rows; ++i) {
                Real dot = 0;
                for (std::size_t j = 0; j < yv.cols; ++j)
                    dot += dy.at(i, j) * yv.at(i, j);
                for (std::size_t j = 0; j < yv.cols; ++j)
                    dx.at(i, j) += yv.at(i, j) * (dy.at(i, j) - dot);
            }
        });
        return out;
    }

    // Row-wise normalization with affine parameters gamma, beta (1 x d).
    Var layer_norm(Var x, Var gamma, Var beta, Real eps = Real(1e-12)) {
        const TensorT<Real>& xv = val(x);
        const TensorT<Real>& gv = val(gamma);
        const TensorT<Real>& bv = val(beta);
        if (gv.rows != 1 || gv.cols != xv.cols || bv.rows != 1 ||
            bv.cols != xv.cols)
            throw ContractViolation("layer_norm: shape mismatch " +
                                    xv.shape_str() + " vs gamma " +
                                    gv.shape_str() + ", beta " +
                                    bv.shape_str());
        const std::size_t n = xv.rows, d = xv.cols;
        auto xhat = std::make_shared<TensorT<Real>>(n, d);
        auto inv_std = std::make_shared<std::vector<Real>>(n);
        TensorT<Real> y(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            Real mean = 0;
            for (std::size_t j = 0; j < d; ++j) mean += xv.at(i, j);
            mean /= static_cast<Real>(d);
            Real var = 0;
            for (std::size_t j = 0; j < d; ++j) {
                Real c = xv.at(i, j) - mean;
                var += c * c;
            }
            var /= static_cast<Real>(d);
            Real is = Real(1) / std::sqrt(var + eps);
            (*inv_std)[i] = is;
            for (std::size_t j = 0; j < d; ++j) {
                Real h = (xv.at(i, j) - mean) * is;
                xhat->at(i, j) = h;
                y.at(i, j) = gv.at(0, j) * h + bv.at(0, j);
            }
        }
        Var out = push(std::move(y));
        record(out, [this, x, gamma, beta, out, xhat, inv_std] {
            const TensorT<Real>& dy = grad(out);
            const TensorT<Real>& gv2 = val(gamma);
            TensorT<Real>& dx = mut_grad(x);
            TensorT<Real>& dg = mut_grad(gamma);
            TensorT<Real>& db = mut_grad(beta);
            const std::size_t n = dy.rows, d = dy.cols;
            for (std::size_t i = 0; i < n; ++i) {
                Real mean_g = 0, mean_gh = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    Real gj = dy.at(i, j) * gv2.at(0, j);
                    mean_g += gj;
                    mean_gh += gj * xhat->at(i, j);
                    dg.at(0, j) += dy.at(i, j) * xhat->at(i, j);
                    db.at(0, j) += dy.at(i, j);
                }
                mean_g /= static_cast<Real>(d);
                mean_gh /= static_cast<Real>(d);
                for (std::size_t j = 0; j < d; ++j) {
                    Real gj = dy.at(i, j) * gv2.at(0, j);
                    dx.at(i, j) += (*inv_std)[i] *
                                   (gj - mean_g - xhat->at(i, j) * mean_gh);
                }
            }
        });
        return out;
    }

    // Exact GeLU: x * Phi(x) with the Gaussian CDF.
    Var gelu(Var x) {
        TensorT<Real> y = val(x);
        for (Real& e : y.v) e = e * phi_cdf(e);
        Var out = push(std::move(y));
        record(out, [this, x, out] {
            const TensorT<Real>& dy = grad(out);
            TensorT<Real>& dx = mut_grad(x);
            const auto& xv = val(x).v;
            for (std::size_t i = 0; i < dy.v.size(); ++i) {
                Real z = xv[i];
                Real pdf = std::exp(Real(-0.5) * z * z) *
                           Real(0.3989422804014326779);  // 1/sqrt(2*pi)
                dx.v[i] += dy.v[i] * (phi_cdf(z) + z * pdf);
            }
        });
        return out;
    }

    // Inverted dropout with a mask derived purely from mask_seed, so a
    // fixed (seed, layer, step) key reproduces the mask bit for bit.
    // Identity in evaluation mode.
    Var dropout(Var x, double p, std::uint64_t mask_seed, bool train) {
        if (p < 0.0 || p >= 1.0)
            throw ConfigError("dropout: p must be in [0,1), got " +
                              std::to_string(p));
        if (!train || p == 0.0) return x;
        SplitMix64 rng(mask_seed);
        auto mask = std::make_shared<std::vector<Real>>(val(x).numel());
        const Real keep_scale = Real(1) / static_cast<Real>(1.0 - p);
        TensorT<Real> y = val(x);
        for (std::size_t i = 0; i < y.v.size(); ++i) {
            Real m = rng.next_unit() >= p ? keep_scale : Real(0);
            (*mask)[i] = m;
            y.v[i] *= m;
        }
        Var out = push(std::move(y));
        record(out, [this, x, out, mask] {
            const TensorT<Real>& dy = grad(out);
            TensorT<Real>& dx = mut_grad(x);
            for (std::size_t i = 0; i < dy.v.size(); ++i)
                dx.v[i] += dy.v[i] * (*mask)[i];
        });
        return out;
    }

    // Mean over the given rows (e.g. non-pad positions) -> 1 x d.
    Var mean_over_mask(Var x, std::vector<std::size_t> rows) {
        const TensorT<Real>& xv = val(x);
        if (rows.empty())
            throw ContractViolation("mean_over_mask: empty row selection");
        for (std::size_t r : rows)
            if (r >= xv.rows)
                throw ContractViolation(
                    "mean_over_mask: row " + std::to_string(r) +
                    " out of range for " + xv.shape_str());
        TensorT<Real> y(1, xv.cols);
        for (std::size_t r : rows)
            for (std::size_t j = 0; j < xv.cols; ++j)
                y.at(0, j) += xv.at(r, j);
        const Real inv = Real(1) / static_cast<Real>(rows.size());
        for (Real& e : y.v) e *= inv;
        Var out = push(std::move(y));
        auto rows_sh = std::make_shared<std::vector<std::size_t>>(std::move(rows));
        record(out, [this, x, out, rows_sh, inv] {
            const TensorT<Real>& dy = grad(out);
            TensorT<Real>& dx = mut_grad(x);
            for (std::size_t r : *rows_sh)
                for (std::size_t j = 0; j < dy.cols; ++j)
                    dx.at(r, j) += dy.at(0, j) * inv;
        });
        return out;
    }

    // Row gather: out row i = table row ids[i]; gradients scatter-add
    // into the selected rows only.
    Var embedding_lookup(Var table, std::vector<int> ids) {
        const TensorT<Real>& tv = val(table);
        for (int id : ids)
            if (id < 0 || static_cast<std::size_t>(id) >= tv.rows)
                throw ContractViolation("embedding_lookup: id " +
                                        std::to_string(id) +
                                        " out of range for " + tv.shape_str());
        TensorT<Real> y(ids.size(), tv.cols);
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = 0; j < tv.cols; ++j)
                y.at(i, j) = tv.at(static_cast<std::size_t>(ids[i]), j);
        Var out = push(std::move(y));
        auto ids_sh = std::make_shared<std::vector<int>>(std::move(ids));
        record(out, [this, table, out, ids_sh] {
            const TensorT<Real>& dy = grad(out);
            TensorT<Real>& dt = mut_grad(table);
            for (std::size_t i = 0; i < ids_sh->size(); ++i)
                for (std::size_t j = 0; j < dy.cols; ++j)
                    dt.at(static_cast<std::size_t>((*ids_sh)[i]), j) +=
                        dy.at(i, j);
        });
        return out;
    }

    // Column-wise concatenation of same-height blocks (head merge).
    Var concat_cols(const std::vector<Var>& parts) {
        if (parts.empty())
            throw ContractViolation("concat_cols: no inputs");
        std::size_t rows = val(parts[0]).rows, cols = 0;
        for (Var p : parts) {
            if (val(p).rows != rows)
                throw ContractViolation("concat_cols: row mismatch " +
                                        val(parts[0]).shape_str() + " vs " +
                                        val(p).shape_str());
            cols += val(p).cols;
        }
        TensorT<Real> y(rows, cols);
        std::size_t off = 0;
        for (Var p : parts) {
            const TensorT<Real>& pv = val(p);
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < pv.cols; ++j)
                    y.at(i, off + j) = pv.at(i, j);
            off += pv.cols;
        }
        Var out = push(std::move(y));
        auto parts_sh = std::make_shared<std::vector<Var>>(parts);
        record(out, [this, out, parts_sh] {
            const TensorT<Real>& dy = grad(out);
            std::size_t off2 = 0;
            for (Var p : *parts_sh) {
                TensorT<Real>& dp = mut_grad(p);
                for (std::size_t i = 0; i < dp.rows; ++i)
                    for (std::size_t j = 0; j < dp.cols; ++j)
                        dp.at(i, j) += dy.at(i, off2 + j);
                off2 += dp.cols;
            }
        });
        return out;
    }

    Var reshape(Var x, std::size_t rows, std::size_t cols) {
        const TensorT<Real>& xv = val(x);
        if (rows * cols != xv.numel())
            throw ContractViolation("reshape: cannot view " + xv.shape_str() +
                                    " as [" + std::to_string(rows) + "x" +
                                    std::to_string(cols) + "]");
        TensorT<Real> y(rows, cols);
        y.v = xv.v;
        Var out = push(std::move(y));
        record(out, [this, x, out] {
            const TensorT<Real>& dy = grad(out);
            TensorT<Real>& dx = mut_grad(x);
            for (std::size_t i = 0; i < dy.v.size(); ++i) dx.v[i] += dy.v[i];
        });
        return out;
    }

    // Numerically stable softmax cross-entropy for one 1 x C logit row.
    Var cross_entropy(Var logits, std::size_t label) {
        const TensorT<Real>& lv = val(logits);
        if (lv.rows != 1 || label >= lv.cols)
            throw ContractViolation("cross_entropy: need 1xC logits, got " +
                                    lv.shape_str() + " with label " +
                                    std::to_string(label));
        Real m = lv.v[0];
        for (Real e : lv.v) m = std::max(m, e);
        Real s = 0;
        for (Real e : lv.v) s += std::exp(e - m);
        Real loss = m + std::log(s) - lv.v[label];
        Var out = push(TensorT<Real>::scalar(loss));
        record(out, [this, logits, out, label] {
            const TensorT<Real>& lv2 = val(logits);
            TensorT<Real>& dl = mut_grad(logits);
            Real dLoss = grad(out).v[0];
            Real m2 = lv2.v[0];
            for (Real e : lv2.v) m2 = std::max(m2, e);
            Real s2 = 0;
            for (Real e : lv2.v) s2 += std::exp(e - m2);
            for (std::size_t j = 0; j < lv2.cols; ++j) {
                Real p = std::exp(lv2.v[j] - m2) / s2;
                dl.v[j] += dLoss * (p - (j == label ? Real(1) : Real(0)));
            }
        });
        return out;
    }

    // Escape hatch for tests: arbitrary forward with a caller-supplied
    // backward rule.
    using CustomForward =
        std::function<TensorT<Real>(const std::vector<const TensorT<Real>*>&)>;
    using CustomBackward = std::function<void(
        const TensorT<Real>& out_grad,
        const std::vector<const TensorT<Real>*>& inputs,
        const std::vector<TensorT<Real>*>& input_grads)>;

    Var custom(const std::vector<Var>& inputs, CustomForward fwd,
               CustomBackward bwd) {
        std::vector<const TensorT<Real>*> in_vals;
        for (Var v : inputs) in_vals.push_back(&val(v));
        Var out = push(fwd(in_vals));
        auto inputs_sh = std::make_shared<std::vector<Var>>(inputs);
        auto bwd_sh = std::make_shared<CustomBackward>(std::move(bwd));
        record(out, [this, out, inputs_sh, bwd_sh] {
            std::vector<const TensorT<Real>*> ins;
            std::vector<TensorT<Real>*> grads;
            for (Var v : *inputs_sh) {
                ins.push_back(&val(v));
                grads.push_back(&mut_grad(v));
            }
            (*bwd_sh)(grad(out), ins, grads);
        });
        return out;
    }

    // Reverse pass from a scalar loss; accumulates into bound parameters.
    void backward(Var loss) {
        if (backward_done_)
            throw ContractViolation(
                "backward: called twice on one tape without reset");
        if (val(loss).numel() != 1)
            throw ContractViolation("backward: loss must be scalar, got " +
                                    val(loss).shape_str());
        backward_done_ = true;
        nodes_[loss.i].grad.v[0] = Real(1);
        for (std::size_t i = loss.i + 1; i-- > 0;) {
            if (nodes_[i].back) nodes_[i].back();
        }
        for (std::size_t i = 0; i <= loss.i; ++i) {
            if (nodes_[i].bound)
                add_into(nodes_[i].bound->grad, nodes_[i].grad);
        }
    }

  private:
    struct Node {
        TensorT<Real> val;
        TensorT<Real> grad;
        std::function<void()> back;
        ParamT<Real>* bound = nullptr;
    };

    std::vector<Node> nodes_;
    bool backward_done_ = false;

    const Node& node(Var x) const {
        if (x.i >= nodes_.size())
            throw ContractViolation("tape: invalid variable handle");
        return nodes_[x.i];
    }

    Var push(TensorT<Real> t) {
        Node n;
        n.grad = TensorT<Real>(t.rows, t.cols);
        n.val = std::move(t);
        nodes_.push_back(std::move(n));
        return Var{nodes_.size() - 1};
    }

    void record(Var out, std::function<void()> back) {
        nodes_[out.i].back = std::move(back);
    }

    TensorT<Real>& mut_grad(Var x) { return nodes_[x.i].grad; }

    static Real phi_cdf(Real x) {
        return Real(0.5) *
               (Real(1) + std::erf(x * Real(0.70710678118654752440)));
    }

    static void add_into(TensorT<Real>& dst, const TensorT<Real>& src) {
        check_same_shape("grad-accumulate", dst, src);
        for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
    }

    static TensorT<Real> mm(const TensorT<Real>& a, const TensorT<Real>& b,
                            bool ta, bool tb) {
        const std::size_t m = ta ? a.cols : a.rows;
        const std::size_t k = ta ? a.rows : a.cols;
        const std::size_t kb = tb ? b.cols : b.rows;
        const std::size_t n = tb ? b.rows : b.cols;
        if (k != kb)
            throw ContractViolation(
                std::string("matmul: inner dimension mismatch ") +
                (ta ? "T" : "") + a.shape_str() + " vs " + (tb ? "T" : "") +
                b.shape_str());
        TensorT<Real> c(m, n);
        if (!ta && !tb) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    Real av = a.at(i, p);
                    if (av == Real(0)) continue;
                    const Real* brow = &b.v[p * b.cols];
                    Real* crow = &c.v[i * n];
                    for (std::size_t j = 0; j < n; ++j)
                        crow[j] += av * brow[j];
                }
        } else if (!ta && tb) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const Real* arow = &a.v[i * a.cols];
                    const Real* brow = &b.v[j * b.cols];
                    Real s = 0;
                    for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
                    c.at(i, j) = s;
                }
        } else if (ta && !tb) {
            for (std::size_t p = 0; p < k; ++p) {
                const Real* arow = &a.v[p * a.cols];
                const Real* brow = &b.v[p * b.cols];
                for (std::size_t i = 0; i < m; ++i) {
                    Real av = arow[i];
                    if (av == Real(0)) continue;
                    Real* crow = &c.v[i * n];
                    for (std::size_t j = 0; j < n; ++j)
                        crow[j] += av * brow[j];
                }
            }
        } else {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    Real s = 0;
                    for (std::size_t p = 0; p < k; ++p)
                        s += a.at(p, i) * b.at(j, p);
                    c.at(i, j) = s;
                }
        }
        return c;
    }
};

using Tape = TapeT<double>;

struct GradCheckReport {
    std::size_t coords_checked = 0;
    std::size_t tensors_covered = 0;
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// Central-difference verification of analytic gradients. `eval_loss`
// computes the scalar loss from current parameter values (forward only);
// `compute_grads` zeroes grads and runs forward+backward once. Coordinates
// are sampled so every parameter tensor contributes at least one.
template <typename EvalLoss, typename ComputeGrads>
GradCheckReport gradient_check(const std::vector<Param*>& params,
                               EvalLoss&& eval_loss,
                               ComputeGrads&& compute_grads,
                               double step = 1e-5,
                               std::size_t min_coords = 200,
                               std::uint64_t seed = 0) {
    if (params.empty())
        throw ContractViolation("gradient_check: no parameters");
    for (Param* p : params) p->zero_grad();
    compute_grads();
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (Param* p : params) analytic.push_back(p->grad);

    std::size_t total = 0;
    for (Param* p : params) total += p->value.numel();
    SplitMix64 rng(seed);

    std::vector<std::vector<std::size_t>> picks(params.size());
    std::size_t planned = 0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        std::size_t numel = params[t]->value.numel();
        std::size_t want = std::max<std::size_t>(
            1, (min_coords * numel + total - 1) / total);
        want = std::min(want, numel);
        std::set<std::size_t> chosen;
        while (chosen.size() < want)
            chosen.insert(static_cast<std::size_t>(rng.next_below(numel)));
        picks[t].assign(chosen.begin(), chosen.end());
        planned += want;
    }
    // Top up round-robin if rounding left us short.
    std::size_t t = 0;
    while (planned < std::min(min_coords, total)) {
        std::size_t numel = params[t]->value.numel();
        if (picks[t].size() < numel) {
            std::size_t idx;
            do {
                idx = static_cast<std::size_t>(rng.next_below(numel));
            } while (std::find(picks[t].begin(), picks[t].end(), idx) !=
                     picks[t].end());
            picks[t].push_back(idx);
            ++planned;
        }
        t = (t + 1) % params.size();
    }

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Param* p = params[pi];
        if (!picks[pi].empty()) ++report.tensors_covered;
        for (std::size_t idx : picks[pi]) {
            const double saved = p->value.v[idx];
            p->value.v[idx] = saved + step;
            const double f_plus = eval_loss();
            p->value.v[idx] = saved - step;
            const double f_minus = eval_loss();
            p->value.v[idx] = saved;
            const double g_num = (f_plus - f_minus) / (2.0 * step);
            const double g_ana = analytic[pi].v[idx];
            const double denom =
                std::max({std::fabs(g_ana), std::fabs(g_num), 1e-8});
            const double rel = std::fabs(g_ana - g_num) / denom;
            ++report.coords_checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = p->name;
                report.worst_index = idx;
                report.worst_analytic = g_ana;
                report.worst_numeric = g_num;
            }
        }
    }
    return report;
}

}  // namespace lea::numeric
