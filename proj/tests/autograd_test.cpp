// Tests for the reverse-mode tape: per-primitive gradients against central
// differences, structural invariants (softmax row sums, layer-norm stats),
// dropout mask behaviour, and the contract checks that guard misuse.
#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lea/autograd.hpp"
#include "lea/errors.hpp"
#include "lea/rng.hpp"
#include "lea/tensor.hpp"

namespace {

using lea::ConfigError;
using lea::ContractViolation;
using lea::SplitMix64;
using lea::numeric::GradCheckReport;
using lea::numeric::gradient_check;
using lea::numeric::Param;
using lea::numeric::Tape;
using lea::numeric::Tensor;

Tensor random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed,
                     double scale = 1.0) {
    Tensor t(rows, cols);
    SplitMix64 rng(seed);
    for (double& x : t.v) x = (2.0 * rng.next_unit() - 1.0) * scale;
    return t;
}

// Reduce an arbitrary variable to a scalar with fixed random weights so the
// loss is sensitive to every coordinate: loss = sum(w .* y).
Tape::Var weighted_sum(Tape& t, Tape::Var y, const Tensor& w) {
    Tape::Var wv = t.constant(w);
    Tape::Var prod = t.mul(y, wv);
    Tensor ones_row(1, t.val(prod).rows, 1.0);
    Tensor ones_col(t.val(prod).cols, 1, 1.0);
    Tape::Var left = t.matmul(t.constant(ones_row), prod);
    return t.matmul(left, t.constant(ones_col));
}

// Run gradient_check over a graph builder, checking every coordinate.
template <typename Build>
GradCheckReport check_graph(std::vector<Param*> params, Build&& build) {
    auto eval_loss = [&]() {
        Tape t;
        return t.val(build(t)).v[0];
    };
    auto compute_grads = [&]() {
        Tape t;
        t.backward(build(t));
    };
    std::size_t total = 0;
    for (Param* p : params) total += p->value.numel();
    return gradient_check(params, eval_loss, compute_grads, 1e-5, total, 99);
}

TEST(Autograd, SumLossGradientIsAllOnes) {
    Param x("x", random_tensor(3, 4, 7));
    auto build = [&](Tape& t) {
        Tape::Var xv = t.leaf(x);
        Tensor w(3, 4, 1.0);
        return weighted_sum(t, xv, w);
    };
    x.zero_grad();
    Tape t;
    t.backward(build(t));
    for (double g : x.grad.v) EXPECT_DOUBLE_EQ(g, 1.0);
}

TEST(Autograd, QuadraticLossGradientEqualsParameter) {
    Param x("x", random_tensor(2, 5, 11));
    x.zero_grad();
    Tape t;
    Tape::Var xv = t.leaf(x);
    Tape::Var sq = t.mul(xv, xv);
    Tape::Var half = t.scalar_scale(sq, 0.5);
    Tensor w(2, 5, 1.0);
    t.backward(weighted_sum(t, half, w));
    for (std::size_t i = 0; i < x.value.numel(); ++i)
        EXPECT_DOUBLE_EQ(x.grad.v[i], x.value.v[i]);
}

TEST(Autograd, MatmulIdentityPreservesValues) {
    Tensor eye(3, 3);
    for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
    Tensor x = random_tensor(3, 6, 21);
    Tape t;
    Tape::Var y = t.matmul(t.constant(eye), t.constant(x));
    ASSERT_EQ(t.val(y).rows, 3u);
    ASSERT_EQ(t.val(y).cols, 6u);
    for (std::size_t i = 0; i < x.numel(); ++i)
        EXPECT_EQ(t.val(y).v[i], x.v[i]);
}

TEST(Autograd, GradCheckMatmulAllTransposeCombos) {
    struct Case {
        bool ta, tb;
        std::size_t ar, ac, br, bc;
    };
    const Case cases[] = {
        {false, false, 3, 4, 4, 5},
        {false, true, 3, 4, 5, 4},
        {true, false, 4, 3, 4, 5},
        {true, true, 4, 3, 5, 4},
    };
    for (const Case& c : cases) {
        Param a("a", random_tensor(c.ar, c.ac, 31));
        Param b("b", random_tensor(c.br, c.bc, 32));
        Tensor w = random_tensor(3, 5, 33);
        auto build = [&](Tape& t) {
            Tape::Var y = t.matmul(t.leaf(a), t.leaf(b), c.ta, c.tb);
            return weighted_sum(t, y, w);
        };
        GradCheckReport rep = check_graph({&a, &b}, build);
        EXPECT_LE(rep.max_rel_err, 1e-4)
            << "ta=" << c.ta << " tb=" << c.tb << " worst=" << rep.worst_param
            << "[" << rep.worst_index << "] analytic=" << rep.worst_analytic
            << " numeric=" << rep.worst_numeric;
    }
}

TEST(Autograd, GradCheckAddAndAddRowvecAndScale) {
    Param a("a", random_tensor(4, 3, 41));
    Param b("b", random_tensor(4, 3, 42));
    Param row("row", random_tensor(1, 3, 43));
    Tensor w = random_tensor(4, 3, 44);
    auto build = [&](Tape& t) {
        Tape::Var s = t.add(t.leaf(a), t.leaf(b));
        Tape::Var shifted = t.add_rowvec(s, t.leaf(row));
        Tape::Var scaled = t.scalar_scale(shifted, -1.75);
        return weighted_sum(t, scaled, w);
    };
    GradCheckReport rep = check_graph({&a, &b, &row}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4) << rep.worst_param;
}

TEST(Autograd, GradCheckHadamardProduct) {
    Param a("a", random_tensor(3, 4, 51));
    Param b("b", random_tensor(3, 4, 52));
    Tensor w = random_tensor(3, 4, 53);
    auto build = [&](Tape& t) {
        return weighted_sum(t, t.mul(t.leaf(a), t.leaf(b)), w);
    };
    GradCheckReport rep = check_graph({&a, &b}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4) << rep.worst_param;
}

TEST(Autograd, GradCheckSoftmaxRows) {
    Param x("x", random_tensor(4, 6, 61, 2.0));
    Tensor w = random_tensor(4, 6, 62);
    auto build = [&](Tape& t) {
        return weighted_sum(t, t.softmax_rows(t.leaf(x)), w);
    };
    GradCheckReport rep = check_graph({&x}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4)
        << rep.worst_param << " " << rep.worst_analytic << " vs "
        << rep.worst_numeric;
}

TEST(Autograd, GradCheckLayerNorm) {
    Param x("x", random_tensor(3, 8, 71, 2.0));
    Param gamma("gamma", random_tensor(1, 8, 72));
    Param beta("beta", random_tensor(1, 8, 73));
    Tensor w = random_tensor(3, 8, 74);
    auto build = [&](Tape& t) {
        Tape::Var y = t.layer_norm(t.leaf(x), t.leaf(gamma), t.leaf(beta));
        return weighted_sum(t, y, w);
    };
    GradCheckReport rep = check_graph({&x, &gamma, &beta}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4) << rep.worst_param;
}

TEST(Autograd, GradCheckGelu) {
    Param x("x", random_tensor(3, 5, 81, 3.0));
    Tensor w = random_tensor(3, 5, 82);
    auto build = [&](Tape& t) { return weighted_sum(t, t.gelu(t.leaf(x)), w); };
    GradCheckReport rep = check_graph({&x}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4)
        << rep.worst_analytic << " vs " << rep.worst_numeric;
}

TEST(Autograd, GradCheckDropoutTrainMode) {
    Param x("x", random_tensor(5, 6, 91));
    Tensor w = random_tensor(5, 6, 92);
    auto build = [&](Tape& t) {
        Tape::Var y = t.dropout(t.leaf(x), 0.4, 0xd20u, true);
        return weighted_sum(t, y, w);
    };
    GradCheckReport rep = check_graph({&x}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4);
}

TEST(Autograd, GradCheckMeanOverMaskAndEmbedding) {
    Param table("table", random_tensor(7, 5, 101));
    Tensor w = random_tensor(1, 5, 102);
    auto build = [&](Tape& t) {
        Tape::Var rowsv = t.embedding_lookup(t.leaf(table), {0, 3, 3, 6, 1});
        Tape::Var pooled = t.mean_over_mask(rowsv, {0, 1, 2, 4});
        return weighted_sum(t, pooled, w);
    };
    GradCheckReport rep = check_graph({&table}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4) << rep.worst_param;
}

TEST(Autograd, GradCheckConcatAndReshape) {
    Param a("a", random_tensor(3, 2, 111));
    Param b("b", random_tensor(3, 4, 112));
    Tensor w = random_tensor(2, 9, 113);
    auto build = [&](Tape& t) {
        Tape::Var cat = t.concat_cols({t.leaf(a), t.leaf(b)});
        Tape::Var flat = t.reshape(cat, 2, 9);
        return weighted_sum(t, flat, w);
    };
    GradCheckReport rep = check_graph({&a, &b}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4) << rep.worst_param;
}

TEST(Autograd, GradCheckCrossEntropy) {
    Param logits("logits", random_tensor(1, 5, 121, 2.0));
    auto build = [&](Tape& t) {
        return t.cross_entropy(t.leaf(logits), 2);
    };
    GradCheckReport rep = check_graph({&logits}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4)
        << rep.worst_analytic << " vs " << rep.worst_numeric;
}

TEST(Autograd, GradCheckCompositeGraph) {
    // A miniature block chaining most primitives end to end.
    Param wq("wq", random_tensor(6, 6, 131, 0.5));
    Param wk("wk", random_tensor(6, 6, 132, 0.5));
    Param gamma("gamma", random_tensor(1, 6, 133));
    Param beta("beta", random_tensor(1, 6, 134));
    Param head("head", random_tensor(6, 3, 135, 0.5));
    Tensor x = random_tensor(4, 6, 136);
    auto build = [&](Tape& t) {
        Tape::Var xv = t.constant(x);
        Tape::Var q = t.matmul(xv, t.leaf(wq));
        Tape::Var k = t.matmul(xv, t.leaf(wk));
        Tape::Var scores = t.scalar_scale(t.matmul(q, k, false, true),
                                          1.0 / std::sqrt(6.0));
        Tape::Var attn = t.softmax_rows(scores);
        Tape::Var mixed = t.matmul(attn, xv);
        Tape::Var normed =
            t.layer_norm(t.mul(t.gelu(mixed), mixed), t.leaf(gamma),
                         t.leaf(beta));
        Tape::Var pooled = t.mean_over_mask(normed, {0, 1, 3});
        Tape::Var logits = t.matmul(pooled, t.leaf(head));
        return t.cross_entropy(logits, 1);
    };
    GradCheckReport rep =
        check_graph({&wq, &wk, &gamma, &beta, &head}, build);
    EXPECT_LE(rep.max_rel_err, 1e-4)
        << rep.worst_param << "[" << rep.worst_index
        << "] analytic=" << rep.worst_analytic
        << " numeric=" << rep.worst_numeric;
    EXPECT_EQ(rep.coords_checked,
              wq.value.numel() + wk.value.numel() + gamma.value.numel() +
                  beta.value.numel() + head.value.numel());
}

TEST(Autograd, ReusedLeafAccumulatesGradient) {
    Param x("x", random_tensor(2, 3, 141));
    x.zero_grad();
    Tape t;
    Tape::Var xv = t.leaf(x);
    Tape::Var doubled = t.add(xv, xv);
    Tensor w(2, 3, 1.0);
    t.backward(weighted_sum(t, doubled, w));
    for (double g : x.grad.v) EXPECT_DOUBLE_EQ(g, 2.0);
}

TEST(Autograd, SoftmaxRowsSumToOneWithinTolerance) {
    Tensor x = random_tensor(8, 16, 151, 5.0);
    Tape t;
    const Tensor& y = t.val(t.softmax_rows(t.constant(x)));
    for (std::size_t i = 0; i < y.rows; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < y.cols; ++j) {
            s += y.at(i, j);
            EXPECT_GE(y.at(i, j), 0.0);
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Autograd, SoftmaxMaskedEntriesAreExactlyZero) {
    Tensor x(2, 4);
    x.at(0, 0) = 1.0;
    x.at(0, 1) = -1e30;
    x.at(0, 2) = 2.0;
    x.at(0, 3) = -1e30;
    x.at(1, 0) = -1e30;
    x.at(1, 1) = 0.5;
    x.at(1, 2) = -0.5;
    x.at(1, 3) = 0.25;
    Tape t;
    const Tensor& y = t.val(t.softmax_rows(t.constant(x)));
    EXPECT_EQ(y.at(0, 1), 0.0);
    EXPECT_EQ(y.at(0, 3), 0.0);
    EXPECT_EQ(y.at(1, 0), 0.0);
    EXPECT_NEAR(y.at(0, 0) + y.at(0, 2), 1.0, 1e-12);
}

TEST(Autograd, LayerNormOutputCenteredAndUnitVariance) {
    Tensor x = random_tensor(6, 32, 161, 3.0);
    Tensor gamma(1, 32, 1.0);
    Tensor beta(1, 32, 0.0);
    Tape t;
    const Tensor& y = t.val(
        t.layer_norm(t.constant(x), t.constant(gamma), t.constant(beta)));
    for (std::size_t i = 0; i < y.rows; ++i) {
        double mean = 0;
        for (std::size_t j = 0; j < y.cols; ++j) mean += y.at(i, j);
        mean /= static_cast<double>(y.cols);
        double var = 0;
        for (std::size_t j = 0; j < y.cols; ++j) {
            double c = y.at(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(y.cols);
        EXPECT_NEAR(mean, 0.0, 1e-9);
        EXPECT_NEAR(var, 1.0, 1e-6);
    }
}

TEST(Autograd, DropoutEvalModeIsIdentity) {
    Tensor x = random_tensor(4, 5, 171);
    Tape t;
    Tape::Var xv = t.constant(x);
    Tape::Var y = t.dropout(xv, 0.5, 42, /*train=*/false);
    EXPECT_EQ(y.i, xv.i);  // no node added, bitwise the same values
    Tape::Var z = t.dropout(xv, 0.0, 42, /*train=*/true);
    EXPECT_EQ(z.i, xv.i);
}

TEST(Autograd, DropoutTrainScalesSurvivorsAndIsDeterministic) {
    const double p = 0.4;
    Tensor x(1, 2000, 1.0);
    Tape t1;
    const Tensor& y1 = t1.val(t1.dropout(t1.constant(x), p, 77, true));
    Tape t2;
    const Tensor& y2 = t2.val(t2.dropout(t2.constant(x), p, 77, true));
    std::size_t kept = 0;
    for (std::size_t i = 0; i < y1.numel(); ++i) {
        EXPECT_EQ(y1.v[i], y2.v[i]);  // same seed, same mask
        if (y1.v[i] != 0.0) {
            EXPECT_DOUBLE_EQ(y1.v[i], 1.0 / (1.0 - p));
            ++kept;
        }
    }
    const double keep_rate = static_cast<double>(kept) / 2000.0;
    EXPECT_NEAR(keep_rate, 1.0 - p, 0.05);

    Tape t3;
    const Tensor& y3 = t3.val(t3.dropout(t3.constant(x), p, 78, true));
    std::size_t diff = 0;
    for (std::size_t i = 0; i < y1.numel(); ++i)
        if (y1.v[i] != y3.v[i]) ++diff;
    EXPECT_GT(diff, 0u);  // a different seed keys a different mask
}

TEST(Autograd, DropoutRejectsProbabilityOutOfRange) {
    Tape t;
    Tape::Var x = t.constant(Tensor(2, 2, 1.0));
    EXPECT_THROW(t.dropout(x, 1.0, 0, true), ConfigError);
    EXPECT_THROW(t.dropout(x, -0.1, 0, true), ConfigError);
    EXPECT_NO_THROW(t.dropout(x, 0.999, 0, true));
}

TEST(Autograd, BackwardTwiceThrowsContractViolation) {
    Param x("x", random_tensor(2, 2, 181));
    Tape t;
    Tensor w(2, 2, 1.0);
    Tape::Var loss = weighted_sum(t, t.leaf(x), w);
    t.backward(loss);
    EXPECT_THROW(t.backward(loss), ContractViolation);
}

TEST(Autograd, BackwardOnNonScalarThrows) {
    Tape t;
    Tape::Var x = t.constant(Tensor(2, 3, 1.0));
    EXPECT_THROW(t.backward(x), ContractViolation);
}

TEST(Autograd, ShapeMismatchReportsBothShapes) {
    Tape t;
    Tape::Var a = t.constant(Tensor(2, 3, 1.0));
    Tape::Var b = t.constant(Tensor(3, 2, 1.0));
    try {
        t.add(a, b);
        FAIL() << "add of mismatched shapes must throw";
    } catch (const ContractViolation& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
        EXPECT_NE(msg.find("[3x2]"), std::string::npos) << msg;
    }
    try {
        t.matmul(a, a);  // inner dims 3 vs 2
        FAIL() << "matmul with mismatched inner dims must throw";
    } catch (const ContractViolation& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    }
}

TEST(Autograd, EmbeddingLookupValidatesIds) {
    Tape t;
    Tape::Var table = t.constant(random_tensor(4, 3, 191));
    EXPECT_THROW(t.embedding_lookup(table, {0, 4}), ContractViolation);
    EXPECT_THROW(t.embedding_lookup(table, {-1}), ContractViolation);
}

TEST(Autograd, EmbeddingLookupScatterAddsRepeatedIds) {
    Param table("table", Tensor(4, 3, 0.5));
    table.zero_grad();
    Tape t;
    Tape::Var rows = t.embedding_lookup(t.leaf(table), {1, 1, 3});
    Tensor w(3, 3, 1.0);
    t.backward(weighted_sum(t, rows, w));
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_DOUBLE_EQ(table.grad.at(0, j), 0.0);
        EXPECT_DOUBLE_EQ(table.grad.at(1, j), 2.0);  // used twice
        EXPECT_DOUBLE_EQ(table.grad.at(2, j), 0.0);
        EXPECT_DOUBLE_EQ(table.grad.at(3, j), 1.0);
    }
}

TEST(Autograd, MeanOverMaskValidatesRows) {
    Tape t;
    Tape::Var x = t.constant(Tensor(3, 2, 1.0));
    EXPECT_THROW(t.mean_over_mask(x, {}), ContractViolation);
    EXPECT_THROW(t.mean_over_mask(x, {0, 3}), ContractViolation);
}

TEST(Autograd, ReshapeChecksElementCountAndKeepsOrder) {
    Tape t;
    Tensor x(2, 3);
    for (std::size_t i = 0; i < 6; ++i) x.v[i] = static_cast<double>(i);
    Tape::Var xv = t.constant(x);
    EXPECT_THROW(t.reshape(xv, 4, 2), ContractViolation);
    const Tensor& y = t.val(t.reshape(xv, 3, 2));
    for (std::size_t i = 0; i < 6; ++i)
        EXPECT_EQ(y.v[i], static_cast<double>(i));
}

TEST(Autograd, CrossEntropyKnownValues) {
    {
        Tape t;
        Tensor logits(1, 2, 0.0);
        double loss = t.val(t.cross_entropy(t.constant(logits), 0)).v[0];
        EXPECT_NEAR(loss, std::log(2.0), 1e-15);
    }
    {
        Param logits("logits", Tensor(1, 2));
        logits.value.at(0, 0) = std::log(3.0);
        logits.value.at(0, 1) = 0.0;
        logits.zero_grad();
        Tape t;
        Tape::Var loss = t.cross_entropy(t.leaf(logits), 0);
        EXPECT_NEAR(t.val(loss).v[0], std::log(4.0 / 3.0), 1e-15);
        t.backward(loss);
        EXPECT_NEAR(logits.grad.at(0, 0), -0.25, 1e-12);
        EXPECT_NEAR(logits.grad.at(0, 1), 0.25, 1e-12);
    }
    {
        Tape t;
        Tape::Var logits = t.constant(Tensor(1, 2, 0.0));
        EXPECT_THROW(t.cross_entropy(logits, 2), ContractViolation);
    }
}

TEST(Autograd, CorruptedBackwardIsCaughtByGradientCheck) {
    // A custom op whose backward deliberately overstates the gradient by
    // 10%: the checker must flag it far above the acceptance threshold.
    Param x("x", random_tensor(3, 3, 201));
    Tensor w = random_tensor(3, 3, 202);
    auto build = [&](Tape& t) {
        Tape::Var xv = t.leaf(x);
        Tape::Var bad = t.custom(
            {xv},
            [](const std::vector<const Tensor*>& ins) { return *ins[0]; },
            [](const Tensor& dy, const std::vector<const Tensor*>&,
               const std::vector<Tensor*>& grads) {
                for (std::size_t i = 0; i < dy.numel(); ++i)
                    grads[0]->v[i] += 1.1 * dy.v[i];
            });
        return weighted_sum(t, bad, w);
    };
    GradCheckReport rep = check_graph({&x}, build);
    EXPECT_GT(rep.max_rel_err, 1e-2);
    EXPECT_EQ(rep.worst_param, "x");
}

TEST(Autograd, GradientCheckRequiresParameters) {
    EXPECT_THROW(gradient_check(
                     {}, []() { return 0.0; }, []() {}),
                 ContractViolation);
}

TEST(Autograd, GradientCheckSamplesEveryTensor) {
    // One big and one tiny tensor: the tiny one must still be probed.
    Param big("big", random_tensor(20, 20, 211));
    Param tiny("tiny", random_tensor(1, 1, 212));
    Tensor wb = random_tensor(20, 20, 213);
    auto build = [&](Tape& t) {
        Tape::Var s = weighted_sum(t, t.leaf(big), wb);
        Tape::Var s2 = weighted_sum(t, t.leaf(tiny), Tensor(1, 1, 3.0));
        return t.add(s, s2);
    };
    auto eval_loss = [&]() {
        Tape t;
        return t.val(build(t)).v[0];
    };
    auto compute_grads = [&]() {
        Tape t;
        t.backward(build(t));
    };
    GradCheckReport rep =
        gradient_check({&big, &tiny}, eval_loss, compute_grads, 1e-5, 16, 5);
    EXPECT_GE(rep.coords_checked, 16u);
    EXPECT_LE(rep.max_rel_err, 1e-4);
}

TEST(Autograd, Float32TapeCompilesAndRuns) {
    using TapeF = lea::numeric::TapeT<float>;
    using TensorF = lea::numeric::TensorT<float>;
    lea::numeric::ParamT<float> x("x", TensorF(2, 3, 0.5f));
    x.zero_grad();
    TapeF t;
    TapeF::Var xv = t.leaf(x);
    TapeF::Var y = t.gelu(t.scalar_scale(xv, 2.0f));
    TensorF ones_row(1, 2, 1.0f);
    TensorF ones_col(3, 1, 1.0f);
    TapeF::Var loss =
        t.matmul(t.matmul(t.constant(ones_row), y), t.constant(ones_col));
    t.backward(loss);
    EXPECT_EQ(t.val(loss).numel(), 1u);
    for (float g : x.grad.v) {
        EXPECT_TRUE(std::isfinite(g));
        EXPECT_NE(g, 0.0f);
    }
}

}  // namespace
