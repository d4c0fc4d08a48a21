#include "doctest.h"

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "spikeenc/codecs.hpp"
#include "spikeenc/photoreceptor.hpp"
#include "spikeenc/snn.hpp"

using namespace spikeenc;

namespace {

using Model = SnnModel<double>;

Model identity_model(int n, double theta = 1.0) {
  Model m;
  DenseLayer<double> l;
  l.weights = MatrixX<double>::Identity(n, n);
  l.bias = VectorX<double>::Zero(n);
  l.threshold = theta;
  m.layers.push_back(l);
  return m;
}

SpikeSample<double> binary_sample(int inputs, int steps, int label, std::mt19937_64& rng, double p = 0.4) {
  std::bernoulli_distribution d(p);
  SpikeSample<double> s;
  s.frames = MatrixX<double>::NullaryExpr(inputs, steps, [&] { return d(rng) ? 1.0 : 0.0; });
  s.label = label;
  return s;
}

// Two classes that light disjoint halves of the input.
SpikeDataset<double> separable(int items, int inputs, int steps, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(0.8), off(0.05);
  SpikeDataset<double> data;
  for (int k = 0; k < items; ++k) {
    SpikeSample<double> s;
    s.label = k % 2;
    s.frames.resize(inputs, steps);
    for (int i = 0; i < inputs; ++i)
      for (int t = 0; t < steps; ++t) s.frames(i, t) = ((i < inputs / 2) == (s.label == 0) ? on(rng) : off(rng)) ? 1 : 0;
    data.push_back(std::move(s));
  }
  return data;
}

std::vector<LabeledImage> toy_images(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> noise(0, 40);
  std::vector<LabeledImage> out;
  for (int k = 0; k < n; ++k) {
    const int label = k % 2;
    std::vector<std::uint8_t> px(8 * 8);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) px[y * 8 + x] = static_cast<std::uint8_t>(((x < 4) == (label == 0) ? 200 : 20) + noise(rng));
    out.push_back({RawImage(8, 8, 1, px), label});
  }
  return out;
}

}  // namespace

TEST_CASE("forward: silent input and identity pass-through") {
  const std::vector<int> sizes{6, 5, 3};
  const auto m = Model::initialized(sizes, 3);
  CHECK(m.input_size() == 6);
  CHECK(m.class_count() == 3);
  CHECK(m.parameter_count() == 6 * 5 + 5 + 5 * 3 + 3);
  CHECK(forward(m, MatrixX<double>(MatrixX<double>::Zero(6, 10))).isZero());

  std::mt19937_64 rng(1);
  const auto s = binary_sample(4, 12, 0, rng);
  const VectorX<double> counts = forward(identity_model(4), s.frames);
  CHECK(counts.isApprox(s.frames.rowwise().sum()));
}

TEST_CASE("forward matches the scalar simulator") {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    const std::vector<int> sizes{7, 6, 4, 3};
    auto m = Model::initialized(sizes, seed, 1.0, 1.0, 2.0);
    m.layers[1].threshold = 0.7;
    m.layers[0].bias.setConstant(0.05);
    const auto s = binary_sample(7, 20, 0, rng);
    const auto net = gradcheck::to_net(m);
    for (bool relaxed : {false, true}) {
      const auto expect = oracle::simulate(net, gradcheck::to_input(s.frames), relaxed);
      const VectorX<double> got = forward(m, s.frames, relaxed ? FiringMode::Relaxed : FiringMode::Hard);
      for (int k = 0; k < 3; ++k) CHECK(got[k] == doctest::Approx(expect[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("surrogate derivative is a rectangle of width 1/slope") {
  CHECK(surrogate_derivative(1.0, 1.0, 2.0) == 2.0);
  CHECK(surrogate_derivative(1.25, 1.0, 2.0) == 2.0);
  CHECK(surrogate_derivative(0.75, 1.0, 2.0) == 2.0);
  CHECK(surrogate_derivative(1.26, 1.0, 2.0) == 0.0);
  CHECK(surrogate_derivative(-5.0, 1.0, 2.0) == 0.0);
}

TEST_CASE("relaxed-mode gradients match central differences") {
  for (unsigned seed = 1; seed <= 6; ++seed) {
    const std::vector<int> sizes{4, 4, 2};  // 30 parameters
    auto m = Model::initialized(sizes, seed, 1.0, 0.3, 1.5);
    m.layers[0].bias.setConstant(0.1);
    const auto batch = gradcheck::random_batch(4, 6, 3, 2, seed);
    const auto r = gradcheck::check(m, batch);
    CHECK(r.parameters <= 64);
    CHECK(r.numeric_norm > 1e-6);
    CHECK(r.relative_error <= 1e-4);
  }
}

TEST_CASE("loss_and_grad: silent input, uniform logits") {
  const std::vector<int> sizes{5, 3, 2};
  const auto m = Model::initialized(sizes, 9);
  SpikeDataset<double> batch{{MatrixX<double>::Zero(5, 8), 0}, {MatrixX<double>::Zero(5, 8), 1}};
  const auto r = loss_and_grad(m, batch);
  CHECK(r.grad.weights[0].isZero());
  CHECK(r.loss == doctest::Approx(std::log(2.0)));
  CHECK(r.correct == 1);  // tie goes to class 0

  SpikeDataset<double> bad{{MatrixX<double>::Zero(5, 8), 2}};
  CHECK_THROWS_AS(loss_and_grad(m, bad), Error);
  CHECK_THROWS_AS(loss_and_grad(m, SpikeDataset<double>{}), Error);
  SpikeDataset<double> wrong{{MatrixX<double>::Zero(4, 8), 0}};
  CHECK_THROWS_AS(loss_and_grad(m, wrong), Error);
}

TEST_CASE("cross_entropy matches the scalar reference") {
  VectorX<double> logits(3);
  logits << 3, 0, 12;
  for (int k = 0; k < 3; ++k)
    CHECK(cross_entropy<double>(logits, k) == doctest::Approx(oracle::cross_entropy({3, 0, 12}, k)));
}

TEST_CASE("train: zero epochs, determinism and a separable toy") {
  const auto data = separable(40, 8, 12, 5);
  const std::vector<int> sizes{8, 8, 2};
  TrainConfig tc;
  tc.batch_size = 8;
  tc.learning_rate = 0.1;

  auto untouched = Model::initialized(sizes, 2);
  const auto before = untouched;
  tc.epochs = 0;
  CHECK(train(untouched, data, tc).empty());
  CHECK(untouched.layers[0].weights == before.layers[0].weights);
  CHECK(untouched.layers[1].bias == before.layers[1].bias);

  tc.epochs = 50;
  auto a = Model::initialized(sizes, 2);
  auto b = Model::initialized(sizes, 2);
  const auto ha = train(a, data, tc);
  const auto hb = train(b, data, tc);
  CHECK(ha.size() == 50);
  CHECK(ha.back().epoch == 50);
  CHECK(a.layers[0].weights == b.layers[0].weights);
  for (std::size_t e = 0; e < ha.size(); ++e) CHECK(ha[e].loss == hb[e].loss);
  CHECK(evaluate(a, data) == 1.0);
  CHECK(evaluate(a, separable(20, 8, 12, 77)) == 1.0);

  tc.batch_size = 41;
  CHECK_THROWS_AS(train(a, data, tc), Error);
  tc.batch_size = 4;
  tc.learning_rate = 0;
  CHECK_THROWS_AS(train(a, data, tc), Error);
  tc.learning_rate = 0.1;
  CHECK_THROWS_AS(train(a, SpikeDataset<double>{}, tc), Error);
}

TEST_CASE("evaluate: hand-computed accuracy and ties") {
  const auto m = identity_model(2);
  auto sample = [](std::initializer_list<double> a, std::initializer_list<double> b, int label) {
    SpikeSample<double> s;
    s.frames.resize(2, static_cast<Eigen::Index>(a.size()));
    int t = 0;
    for (double v : a) s.frames(0, t++) = v;
    t = 0;
    for (double v : b) s.frames(1, t++) = v;
    s.label = label;
    return s;
  };
  SpikeDataset<double> data{
      sample({1, 1, 1}, {0, 0, 0}, 0),  // predicts 0: hit
      sample({0, 0, 0}, {1, 1, 0}, 1),  // predicts 1: hit
      sample({1, 0, 0}, {1, 0, 0}, 1),  // tie -> 0: miss
      sample({1, 1, 0}, {1, 0, 0}, 1),  // predicts 0: miss
      sample({0, 0, 0}, {0, 0, 0}, 0),  // silent tie -> 0: hit
  };
  CHECK(evaluate(m, data) == doctest::Approx(0.6));
  CHECK(predict(m, data[2].frames) == 0);

  SpikeDataset<double> constant(7, sample({1, 1, 1}, {0, 0, 0}, 0));
  CHECK(evaluate(m, constant) == 1.0);
  CHECK_THROWS_AS(evaluate(m, SpikeDataset<double>{}), Error);
}

TEST_CASE("scaling weights, biases and thresholds together leaves hard-mode counts unchanged") {
  std::mt19937_64 rng(4);
  const std::vector<int> sizes{6, 5, 3};
  const auto m = Model::initialized(sizes, 4, 1.0, 1.0, 2.0);
  for (double k : {0.25, 2.0, 8.0}) {
    Model scaled = m;
    for (auto& l : scaled.layers) {
      l.weights *= k;
      l.bias *= k;
      l.threshold *= k;
    }
    for (int trial = 0; trial < 5; ++trial) {
      const auto s = binary_sample(6, 16, 0, rng);
      CHECK(forward(m, s.frames) == forward(scaled, s.frames));
    }
  }
}

TEST_CASE("to_frames and encode_dataset") {
  EncoderConfig cfg;
  cfg.time_steps = 8;
  const RawImage img(3, 2, 3, {255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30, 40, 50, 60, 70, 80, 90});
  const auto spikes = encode_photoreceptor(img, ChannelSet::Rgb, cfg);
  const auto frames = to_frames<double>(spikes);
  CHECK(frames.rows() == 18);
  CHECK(frames.cols() == 8);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 3; ++x)
        for (int t = 0; t < 8; ++t) CHECK(frames(c * 6 + y * 3 + x, t) == (spikes(c, t, y, x) ? 1.0 : 0.0));

  const std::vector<LabeledImage> items{{img, 1}, {img, 0}};
  const auto data = encode_dataset<double>(items, ChannelSet::Rgb, cfg);
  REQUIRE(data.size() == 2);
  CHECK(data[0].label == 1);
  CHECK(data[0].frames == data[1].frames);

  cfg.codec = Codec::Rate;
  cfg.seed = 3;
  const auto rate = encode_dataset<float>(items, ChannelSet::Rgb, cfg);
  CHECK(rate[0].frames != rate[1].frames);  // per-item generator streams
  CHECK(encode_dataset<float>(items, ChannelSet::Rgb, cfg)[1].frames == rate[1].frames);
  CHECK(derive_item_seed(3, 0) != derive_item_seed(3, 1));
}

TEST_CASE("prepare_desk_images") {
  const std::vector<LabeledImage> items{{RawImage::filled(32, 32, 3, 100), 4}};
  const auto out = prepare_desk_images(items, true, true);
  CHECK(out[0].image.width() == 16);
  CHECK(out[0].image.channels() == 1);
  CHECK(out[0].image.at(3, 3) == 100);
  CHECK(out[0].label == 4);
  CHECK(prepare_desk_images(items, false, false)[0].image == items[0].image);
}

TEST_CASE("checkpoint round trip and corruption") {
  const std::vector<int> sizes{5, 4, 3};
  auto m = Model::initialized(sizes, 8, 0.9, 1.7);
  m.layers[1].bias.setRandom();
  const Bytes file = save_checkpoint(m);
  const auto back = load_checkpoint(file);
  CHECK(back.surrogate_slope == 1.7);
  REQUIRE(back.layers.size() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(back.layers[l].weights == m.layers[l].weights);
    CHECK(back.layers[l].bias == m.layers[l].bias);
    CHECK(back.layers[l].threshold == m.layers[l].threshold);
  }

  auto code = [](const Bytes& b) {
    try {
      load_checkpoint(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  Bytes magic = file;
  magic[3] = '2';
  CHECK(code(magic) == ErrorCode::BadMagic);
  Bytes version = file;
  version[4] = 9;
  CHECK(code(version) == ErrorCode::VersionMismatch);
  CHECK(code(Bytes(file.begin(), file.end() - 3)) == ErrorCode::LengthMismatch);
  Bytes longer = file;
  longer.push_back(0);
  CHECK(code(longer) == ErrorCode::LengthMismatch);
}

TEST_CASE("compare_codecs on a toy problem") {
  const auto train_images = toy_images(24, 1);
  const auto test_images = toy_images(10, 2);
  ComparisonSetup setup;
  setup.hidden = {6};
  setup.train.epochs = 3;
  setup.train.batch_size = 8;
  setup.train.time_steps = 8;
  const std::vector<Codec> codecs{Codec::If, Codec::Rate, Codec::If};
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto rows = compare_codecs(train_images, test_images, codecs, seeds, setup);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].accuracies == rows[2].accuracies);
  CHECK(rows[1].codec == Codec::Rate);
  for (const auto& r : rows) {
    CHECK(r.seeds == seeds);
    CHECK(r.accuracies.size() == 2);
    for (double a : r.accuracies) CHECK((a >= 0.0 && a <= 1.0));
    CHECK(r.mean == doctest::Approx((r.accuracies[0] + r.accuracies[1]) / 2));
  }
  const auto csv = comparison_csv(rows);
  CHECK(csv.rfind("codec,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  CHECK_THROWS_AS(compare_codecs(train_images, {}, codecs, seeds, setup), Error);
  CHECK_THROWS_AS(compare_codecs(train_images, test_images, {}, seeds, setup), Error);
}

TEST_CASE("history_csv") {
  const std::vector<EpochRecord> h{{1, 0.5, 0.25}, {2, 0.25, 0.75}};
  CHECK(history_csv(h) == "epoch,loss,accuracy\n1,0.5,0.25\n2,0.25,0.75\n");
}
