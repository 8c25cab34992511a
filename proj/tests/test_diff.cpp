#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "pcc/diff/checkpoint.hpp"
#include "pcc/diff/ops.hpp"
#include "pcc/error.hpp"
#include "pcc/harness/gradcheck.hpp"

using namespace pcc;
using namespace pcc::diff;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::BadArgument;
}

Tensor<double> mat(std::size_t r, std::size_t c, std::vector<double> v) {
  return Tensor<double>({r, c}, std::move(v));
}

}  // namespace

TEST_CASE("tensor shape contract") {
  Tensor<float> t(2, 3, 1.5f);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.size() == 6);
  CHECK(kind_of([] { Tensor<float>({2, 2}, std::vector<float>(3)); }) ==
        ErrorKind::ShapeMismatch);
  Tensor<float> u({2, 3, 4}, std::vector<float>(24));
  CHECK(u.rows() == 6);
  CHECK(u.cols() == 4);
}

TEST_CASE("linear examples") {
  Tape<double> t;
  const auto x = t.leaf(mat(2, 2, {1, 2, 3, 4}));
  const auto eye = t.leaf(mat(2, 2, {1, 0, 0, 1}));
  const auto zero = t.leaf(mat(1, 2, {0, 0}));
  CHECK(linear(x, eye, zero).value() == x.value());
  const auto y = linear(t.leaf(mat(1, 1, {2})), t.leaf(mat(1, 1, {3})), t.leaf(mat(1, 1, {1})));
  CHECK(y.value()[0] == 7.0);
  CHECK(kind_of([&] { linear(x, t.leaf(mat(3, 1, {1, 2, 3})), zero); }) ==
        ErrorKind::ShapeMismatch);
}

TEST_CASE("linear matches a naive triple loop") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1, 1);
  Tensor<float> x(4, 8), w(8, 3), b(1, 3);
  for (auto* m : {&x, &w, &b})
    for (auto& v : m->data()) v = u(rng);
  Tape<float> t(Mode::Eval, false);
  const auto y = linear(t.constant(x), t.constant(w), t.constant(b));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = b[j];
      for (std::size_t k = 0; k < 8; ++k) s += double(x.at(i, k)) * w.at(k, j);
      CHECK(std::abs(y.value().at(i, j) - s) < 1e-6);
    }
}

TEST_CASE("elementwise and reduction examples") {
  Tape<double> t;
  const auto sm = softmax_rows(t.leaf(mat(1, 4, {3, 3, 3, 3})));
  for (const double v : sm.value().data()) CHECK(v == doctest::Approx(0.25));

  const auto mp = max_rows(t.leaf(mat(2, 2, {1, 5, 3, 2})));
  CHECK(mp.value() == mat(1, 2, {3, 5}));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 3);
  Tensor<double> x(10, 5);
  for (auto& v : x.data()) v = n(rng) + 4;
  const auto rows = softmax_rows(t.leaf(x));
  for (std::size_t i = 0; i < 10; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 5; ++j) s += rows.value().at(i, j);
    CHECK(std::abs(s - 1) < 1e-6);
  }

  const auto r = relu(t.leaf(mat(1, 3, {-1, 0, 2})));
  CHECK(r.value() == mat(1, 3, {0, 0, 2}));
  const auto c = concat_cols<double>(std::vector{t.leaf(mat(1, 2, {1, 2})), t.leaf(mat(1, 1, {3}))});
  CHECK(c.value() == mat(1, 3, {1, 2, 3}));
  CHECK(sub(t.leaf(mat(1, 2, {3, 4})), t.leaf(mat(1, 2, {1, 1}))).value() == mat(1, 2, {2, 3}));
  CHECK(scale(t.leaf(mat(1, 2, {3, 4})), 0.5).value() == mat(1, 2, {1.5, 2}));
  CHECK(segment_max(t.leaf(mat(4, 1, {1, 7, 3, 2})), 2).value() == mat(2, 1, {7, 3}));
}

TEST_CASE("batchnorm training output has zero mean and unit variance") {
  std::mt19937_64 rng(4);
  std::normal_distribution<float> n(2, 5);
  Tensor<float> x(32, 6);
  for (auto& v : x.data()) v = n(rng);
  Parameter<float> rm{"rm", Tensor<float>(1, 6, 0.0f), {}, false};
  Parameter<float> rv{"rv", Tensor<float>(1, 6, 1.0f), {}, false};
  Tape<float> t(Mode::Train, false);
  const auto y = batchnorm(t.constant(x), t.constant(Tensor<float>(1, 6, 1.0f)),
                           t.constant(Tensor<float>(1, 6, 0.0f)), rm, rv);
  for (std::size_t c = 0; c < 6; ++c) {
    double m = 0, v = 0;
    for (std::size_t r = 0; r < 32; ++r) m += y.value().at(r, c);
    m /= 32;
    for (std::size_t r = 0; r < 32; ++r) v += std::pow(y.value().at(r, c) - m, 2);
    v /= 32;
    CHECK(std::abs(m) < 1e-5);
    CHECK(std::abs(v - 1) < 1e-4);  // eps = 1e-5 in the denominator
  }
  // Running statistics moved towards the batch statistics.
  CHECK(rm.value[0] != 0.0f);

  Tape<float> one(Mode::Train, false);
  CHECK(kind_of([&] {
          batchnorm(one.constant(Tensor<float>(1, 6, 1.0f)),
                    one.constant(Tensor<float>(1, 6, 1.0f)),
                    one.constant(Tensor<float>(1, 6, 0.0f)), rm, rv);
        }) == ErrorKind::DegenerateBatch);
  Tape<float> ev(Mode::Eval, false);
  CHECK_NOTHROW(batchnorm(ev.constant(Tensor<float>(1, 6, 1.0f)),
                          ev.constant(Tensor<float>(1, 6, 1.0f)),
                          ev.constant(Tensor<float>(1, 6, 0.0f)), rm, rv));
}

TEST_CASE("backward examples") {
  Tape<double> t;
  const auto x = t.leaf(mat(2, 3, {1, 2, 3, 4, 5, 6}));
  t.backward(sum(x));
  for (const double g : t.grad(x)) CHECK(g == 1.0);

  Tape<double> nt;
  const auto y = nt.leaf(mat(2, 1, {1, 2}));
  CHECK(kind_of([&] { nt.backward(y); }) == ErrorKind::NonScalarLoss);
}

TEST_CASE("chamfer gradient of a single point") {
  // Both directions contribute (x - t)^2, so d/dx = 4 (x - t).
  Tape<double> t;
  const auto x = t.leaf(mat(1, 3, {0.5, -1.0, 2.0}));
  const auto target = t.constant(mat(1, 3, {0.0, 1.0, 1.5}));
  const auto loss = chamfer_l2(x, target);
  CHECK(loss.value()[0] == doctest::Approx(2 * (0.25 + 4 + 0.25)));
  t.backward(loss);
  const auto g = t.grad(x);
  CHECK(g[0] == doctest::Approx(4 * 0.5));
  CHECK(g[1] == doctest::Approx(4 * -2.0));
  CHECK(g[2] == doctest::Approx(4 * 0.5));
}

TEST_CASE("chamfer gradient sums both directions") {
  // a0 is nearest to b0 and b1 is nearest to a0 as well.
  Tape<double> t;
  const auto a = t.leaf(mat(2, 3, {0, 0, 0, 10, 0, 0}));
  const auto b = t.constant(mat(2, 3, {1, 0, 0, 2, 0, 0}));
  t.backward(chamfer_l2(a, b));
  const auto g = t.grad(a);
  // a->b: a0 pairs b0 (residual -1), a1 pairs b1 (residual 8); /2
  // b->a: b0 and b1 both pair a0 (residuals -1, -2); /2
  CHECK(g[0] == doctest::Approx(2 * -1.0 / 2 + (2 * -1.0 + 2 * -2.0) / 2));
  CHECK(g[3] == doctest::Approx(2 * 8.0 / 2));
}

TEST_CASE("non-finite op outputs are rejected") {
  Tape<double> t;
  const auto x = t.leaf(mat(1, 1, {1e308}));
  CHECK(kind_of([&] { scale(x, 1e10); }) == ErrorKind::NonFinite);
  CHECK(kind_of([&] { t.leaf(mat(1, 1, {std::nan("")})); }) == ErrorKind::NonFinite);
}

TEST_CASE("every primitive op passes the finite-difference check") {
  const char* ops[] = {"matmul", "matmul_nt", "linear", "add", "sub", "scale",
                       "add_row", "relu", "softmax_rows", "batchnorm_train",
                       "batchnorm_eval", "max_rows", "segment_max", "concat_cols",
                       "concat_rows", "slice_cols", "gather_rows", "reshape",
                       "sum", "chamfer_l2"};
  for (const char* op : ops) {
    const auto r = harness::gradcheck(op);
    INFO(op << " max_abs " << r.max_abs_err << " max_rel " << r.max_rel_err);
    CHECK(r.trials == 10);
    CHECK(r.ok());
  }
}

TEST_CASE("parameter gradients accumulate across tapes") {
  ParamStore<double> store(1);
  auto& w = store.constant("w", 1, 2, 1.0, true);
  for (int i = 0; i < 2; ++i) {
    Tape<double> t;
    t.backward(sum(t.parameter(w)));
  }
  CHECK(w.grad[0] == 2.0);
  store.scale_grad(0.5);
  CHECK(w.grad[1] == 1.0);
  store.zero_grad();
  CHECK(w.grad[0] == 0.0);
  // Eval tapes do not touch gradients.
  Tape<double> ev(Mode::Eval, false);
  CHECK_NOTHROW(sum(ev.parameter(w)));
}

TEST_CASE("adam examples") {
  AdamConfig cfg;
  std::vector<float> p{1.0f, -2.0f};
  AdamMoments<float> st;
  const std::vector<float> zero{0.0f, 0.0f};
  adam_update<float>(p, zero, st, 1, cfg);
  CHECK(p == std::vector<float>{1.0f, -2.0f});
  CHECK(st.m == std::vector<float>{0.0f, 0.0f});
  CHECK(st.v == std::vector<float>{0.0f, 0.0f});

  std::vector<float> q{0.0f, 0.0f};
  AdamMoments<float> s2;
  const std::vector<float> g{3.0f, -0.5f};
  adam_update<float>(q, g, s2, 1, cfg);
  // Bias-corrected first step moves each coordinate by ~lr against g.
  CHECK(q[0] == doctest::Approx(-1e-3).epsilon(1e-3));
  CHECK(q[1] == doctest::Approx(1e-3).epsilon(1e-3));

  std::vector<float> bad(3);
  CHECK(kind_of([&] { adam_update<float>(bad, g, s2, 2, cfg); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("adam minimises x^2") {
  AdamConfig cfg;
  cfg.lr = 0.1;
  std::vector<double> x{5.0};
  AdamMoments<double> st;
  for (std::uint64_t step = 1; step <= 100; ++step) {
    const std::vector<double> g{2 * x[0]};
    adam_update<double>(x, g, st, step, cfg);
  }
  CHECK(std::abs(x[0]) < 0.5);
}

TEST_CASE("adam step skips buffers") {
  ParamStore<float> store(3);
  auto& w = store.weight("w", 2, 2);
  auto& buf = store.constant("buf", 1, 2, 1.0f, false);
  const auto before = w.value;
  Tape<float> t;
  t.backward(sum(t.parameter(w)));
  Adam<float> adam({});
  adam.step(store);
  CHECK(w.value != before);
  CHECK(buf.value == Tensor<float>(1, 2, 1.0f));
}

TEST_CASE("parameter init is uniform in the fan-in bound and seeded") {
  ParamStore<float> a(42), b(42), c(43);
  const auto& wa = a.weight("w", 16, 8);
  const auto& wb = b.weight("w", 16, 8);
  const auto& wc = c.weight("w", 16, 8);
  CHECK(wa.value == wb.value);
  CHECK(wa.value != wc.value);
  for (const float v : wa.value.data()) CHECK(std::abs(v) <= 0.25f);
}

TEST_CASE("checkpoint round trip and errors") {
  ParamStore<float> store(5);
  store.weight("layer.weight", 3, 4);
  store.bias("layer.bias", 3, 4);
  store.constant("bn.running_var", 1, 4, 1.0f, false);
  const auto ckpt = snapshot(store, R"({"k":1})");
  const auto bytes = encode_checkpoint(ckpt);
  const auto back = decode_checkpoint(bytes);
  CHECK(back.config == ckpt.config);
  REQUIRE(back.tensors.size() == 3);
  CHECK(back.tensors[0].value == store.all()[0].value);
  CHECK(encode_checkpoint(back) == bytes);

  ParamStore<float> other(6);
  other.weight("layer.weight", 3, 4);
  other.bias("layer.bias", 3, 4);
  other.constant("bn.running_var", 1, 4, 0.0f, false);
  restore(other, back);
  CHECK(other.all()[0].value == store.all()[0].value);
  CHECK(other.all()[2].value == store.all()[2].value);

  ParamStore<float> wrong(7);
  wrong.weight("layer.weight", 4, 4);
  CHECK(kind_of([&] { restore(wrong, back); }) == ErrorKind::ConfigMismatch);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK(kind_of([&] { decode_checkpoint(bad); }) == ErrorKind::BadMagic);
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  CHECK(kind_of([&] { decode_checkpoint(cut); }) == ErrorKind::TruncatedFile);
  CHECK(kind_of([&] { decode_checkpoint({}); }) == ErrorKind::TruncatedFile);
  auto ver = bytes;
  ver[4] = 9;
  CHECK(kind_of([&] { decode_checkpoint(ver); }) == ErrorKind::ConfigMismatch);

  const auto path = std::filesystem::temp_directory_path() / "pcc_test.ckpt";
  write_checkpoint(path, ckpt);
  CHECK(encode_checkpoint(read_checkpoint(path)) == bytes);
  std::filesystem::remove(path);
}
