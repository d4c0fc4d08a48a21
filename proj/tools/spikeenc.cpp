// spikeenc command-line front end: encode, decode, stats, raster, bench,
// train and compare. Exit codes: 0 ok, 1 data error, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spikeenc/analysis.hpp"
#include "spikeenc/codecs.hpp"
#include "spikeenc/io.hpp"
#include "spikeenc/photoreceptor.hpp"
#include "spikeenc/snn.hpp"

namespace fs = std::filesystem;
using namespace spikeenc;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kTrainFiles{"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin",
                                           "data_batch_4.bin", "data_batch_5.bin"};
const std::string kTestFile = "test_batch.bin";

struct EncoderFlags {
  std::string codec = "if";
  std::string channels;  // empty: rgb for colour input, gray for grayscale
  int steps = 256;
  double theta = 1.0;
  double leak = 1.0;
  double u0 = 0.0;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App& app, bool with_channels = true) {
    app.add_option("--codec", codec, "if | lif | rate | ttfs")->capture_default_str();
    if (with_channels) app.add_option("--channels", channels, "gray | rgb | rgbl | lms | lab | yuv");
    app.add_option("--steps", steps, "time steps T")->capture_default_str();
    app.add_option("--theta", theta, "firing threshold")->capture_default_str();
    app.add_option("--leak", leak, "LIF leak factor in (0, 1]")->capture_default_str();
    app.add_option("--u0", u0, "initial membrane potential")->capture_default_str();
    seed_opt = app.add_option("--seed", seed, "generator seed (required for rate)");
  }

  EncoderConfig config() const {
    EncoderConfig c;
    const auto parsed = parse_codec(codec);
    if (!parsed) throw UsageError("unknown codec '" + codec + "'");
    c.codec = *parsed;
    c.time_steps = steps;
    c.threshold = theta;
    c.leak_factor = leak;
    c.initial_potential = u0;
    c.seed = seed;
    if (c.codec == Codec::Rate && seed_opt->count() == 0) throw UsageError("--seed is required for the rate codec");
    try {
      c.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return c;
  }

  ChannelSet channel_set(const RawImage& image) const {
    if (channels.empty()) return image.channels() == 1 ? ChannelSet::Gray : ChannelSet::Rgb;
    const auto set = parse_channel_set(channels);
    if (!set) throw UsageError("unknown channel set '" + channels + "'");
    return *set;
  }
};

bool is_ppm(const Bytes& bytes) { return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'); }

// A PPM/PGM file gives one image; anything else is read as a CIFAR-10 batch.
std::vector<LabeledImage> load_images(const fs::path& path, std::size_t limit) {
  const Bytes bytes = read_file(path);
  if (is_ppm(bytes)) return {{read_ppm(bytes), 0}};
  auto items = read_cifar10_batch(bytes);
  if (limit != 0 && items.size() > limit) items.resize(limit);
  return items;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
}

std::vector<PixelRef> parse_pixels(const std::string& text) {
  std::vector<PixelRef> refs;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.empty()) continue;
    PixelRef p;
    char a = 0, b = 0;
    std::istringstream in(item);
    if (!(in >> p.x >> a >> p.y >> b >> p.c) || a != ',' || b != ',' || !(in >> std::ws).eof())
      throw UsageError("bad pixel '" + item + "' (expected x,y,c)");
    refs.push_back(p);
  }
  if (refs.empty()) throw UsageError("--pixels selects nothing");
  return refs;
}

std::vector<Codec> parse_codecs(const std::vector<std::string>& names) {
  std::vector<Codec> codecs;
  for (const auto& n : names) {
    const auto c = parse_codec(n);
    if (!c) throw UsageError("unknown codec '" + n + "'");
    codecs.push_back(*c);
  }
  return codecs;
}

struct DeskFlags {
  std::string dir;
  std::vector<int> classes{0, 1};
  std::size_t limit = 1000;
  std::size_t test_limit = 200;
  bool full_resolution = false;
  std::string channels = "gray";
  std::vector<int> hidden = ComparisonSetup{}.hidden;
  double gain = ComparisonSetup{}.init_gain;
  double slope = ComparisonSetup{}.surrogate_slope;
  TrainConfig train;

  void add(CLI::App& app) {
    app.add_option("dir", dir, "directory holding the CIFAR-10 binary batches")->required()->check(CLI::ExistingDirectory);
    app.add_option("--classes", classes, "CIFAR-10 class ids to keep")->delimiter(',')->capture_default_str();
    app.add_option("--limit", limit, "training images (0 = all)")->capture_default_str();
    app.add_option("--test-limit", test_limit, "test images (0 = all)")->capture_default_str();
    app.add_flag("--full-resolution", full_resolution, "skip the 2x2 downsample");
    app.add_option("--channels", channels, "channel set")->capture_default_str();
    app.add_option("--hidden", hidden, "hidden layer widths")->delimiter(',')->capture_default_str();
    app.add_option("--gain", gain, "weight initialization gain")->capture_default_str();
    app.add_option("--slope", slope, "surrogate gradient slope")->capture_default_str();
    app.add_option("--epochs", train.epochs, "training epochs")->capture_default_str();
    app.add_option("--lr", train.learning_rate, "SGD learning rate")->capture_default_str();
    app.add_option("--batch", train.batch_size, "minibatch size")->capture_default_str();
    app.add_option("--steps", train.time_steps, "time steps T")->capture_default_str();
  }

  ChannelSet channel_set() const {
    const auto set = parse_channel_set(channels);
    if (!set) throw UsageError("unknown channel set '" + channels + "'");
    return *set;
  }

  std::vector<LabeledImage> load(std::span<const std::string> files, std::size_t n) const {
    std::vector<std::string> present;
    for (const auto& f : files)
      if (fs::exists(fs::path(dir) / f)) present.push_back(f);
    if (present.empty()) throw Error(ErrorCode::Io, "no CIFAR-10 batches found in " + dir);
    auto images = remap_labels(load_cifar10(dir, present, classes, n), classes);
    return prepare_desk_images(images, channel_set() == ChannelSet::Gray, !full_resolution);
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Spike encoding toolkit"};
  app.require_subcommand(1);

  // encode
  auto* encode = app.add_subcommand("encode", "encode a PPM/PGM image or a CIFAR-10 batch into spike containers");
  std::string enc_in, enc_out;
  std::size_t enc_limit = 0;
  EncoderFlags enc;
  encode->add_option("input", enc_in, "image (.ppm/.pgm) or CIFAR-10 batch")->required()->check(CLI::ExistingFile);
  encode->add_option("-o,--output", enc_out, "container path, or directory for a batch")->required();
  encode->add_option("--limit", enc_limit, "encode only the first N batch images");
  enc.add(*encode);
  encode->callback([&] {
    const auto config = enc.config();
    const auto items = load_images(enc_in, enc_limit);
    if (items.size() == 1 && is_ppm(read_file(enc_in))) {
      write_file(enc_out, write_spike_container(encode_photoreceptor(items[0].image, enc.channel_set(items[0].image), config)));
      return;
    }
    fs::create_directories(enc_out);
    for (std::size_t i = 0; i < items.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "%05zu.spk", i);
      const auto& img = items[i].image;
      write_file(fs::path(enc_out) / name, write_spike_container(encode_photoreceptor(img, enc.channel_set(img), config)));
    }
  });

  // decode
  auto* decode = app.add_subcommand("decode", "reconstruct an image from a spike container");
  std::string dec_in, dec_out, dec_mode = "count";
  decode->add_option("input", dec_in, "spike container")->required()->check(CLI::ExistingFile);
  decode->add_option("-o,--output", dec_out, "output .ppm/.pgm")->required();
  decode->add_option("--mode", dec_mode, "count | ttfs")->check(CLI::IsMember({"count", "ttfs"}))->capture_default_str();
  decode->callback([&] {
    const auto spikes = read_spike_container(read_file(dec_in));
    auto planes = dec_mode == "count" ? decode_count(spikes) : decode_ttfs(spikes);
    if (planes.size() > 3) planes.resize(3);  // RGBL: the colour planes
    if (planes.size() != 1 && planes.size() != 3)
      throw Error(ErrorCode::ShapeMismatch, "cannot write a " + std::to_string(planes.size()) + "-channel image");
    write_file(dec_out, write_ppm(to_image(planes)));
  });

  // stats
  auto* stats = app.add_subcommand("stats", "per-channel spike statistics as CSV");
  std::string st_in, st_out;
  stats->add_option("input", st_in, "spike container")->required()->check(CLI::ExistingFile);
  stats->add_option("-o,--output", st_out, "CSV path (default stdout)");
  stats->callback([&] {
    const auto spikes = read_spike_container(read_file(st_in));
    std::ostringstream csv;
    csv << "channel,label,total_spikes,mean_count_rate,population_rate\n";
    const auto rows = channel_stats(spikes);
    for (std::size_t c = 0; c < rows.size(); ++c)
      csv << c << ',' << to_string(rows[c].label) << ',' << rows[c].total_spikes << ',' << rows[c].mean_count_rate
          << ',' << rows[c].population_rate << '\n';
    emit(csv.str(), st_out);
  });

  // raster
  auto* raster = app.add_subcommand("raster", "SVG raster plot of selected pixels");
  std::string ra_in, ra_out, ra_pixels;
  raster->add_option("input", ra_in, "spike container")->required()->check(CLI::ExistingFile);
  raster->add_option("--pixels", ra_pixels, "selection \"x,y,c;x,y,c;...\"")->required();
  raster->add_option("-o,--output", ra_out, "output .svg")->required();
  raster->callback([&] {
    const auto selection = parse_pixels(ra_pixels);
    write_text(ra_out, write_raster_svg(read_spike_container(read_file(ra_in)), selection));
  });

  // bench
  auto* bench = app.add_subcommand("bench", "time the encoder and report operation counts as CSV");
  std::vector<std::string> be_in;
  std::string be_out;
  int be_reps = 5;
  std::size_t be_limit = 0;
  EncoderFlags be;
  bench->add_option("inputs", be_in, "images or CIFAR-10 batches")->required()->check(CLI::ExistingFile);
  bench->add_option("--reps", be_reps, "repetitions; the first is a warm-up")->capture_default_str();
  bench->add_option("--limit", be_limit, "images per batch file (0 = all)");
  bench->add_option("-o,--output", be_out, "CSV path (default stdout)");
  be.add(*bench);
  bench->callback([&] {
    const auto config = be.config();
    std::vector<RawImage> images;
    for (const auto& path : be_in)
      for (auto& item : load_images(path, be_limit)) images.push_back(std::move(item.image));
    if (images.empty()) throw Error(ErrorCode::EmptyDataset, "no images");
    const ChannelSet set = be.channel_set(images.front());
    const auto report = bench_encode(config, set, images, be_reps);
    emit(cost_report_csv_header() + "\n" + cost_report_csv_row(config, set, images.size(), be_reps, report) + "\n",
         be_out);
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "train the reference SNN on encoded CIFAR-10 images");
  DeskFlags tr;
  std::string tr_codec = "if", tr_out, tr_history;
  double tr_theta = 1.0;
  std::uint64_t tr_seed = 1;
  tr.add(*train_cmd);
  train_cmd->add_option("--codec", tr_codec, "encoder codec")->capture_default_str();
  train_cmd->add_option("--theta", tr_theta, "encoder threshold")->capture_default_str();
  train_cmd->add_option("--seed", tr_seed, "initialization, shuffling and rate seed")->capture_default_str();
  train_cmd->add_option("-o,--output", tr_out, "checkpoint path")->required();
  train_cmd->add_option("--history", tr_history, "per-epoch CSV path (default stdout)");
  train_cmd->callback([&] {
    const auto codec = parse_codecs({tr_codec}).front();
    EncoderConfig enc;
    enc.codec = codec;
    enc.time_steps = tr.train.time_steps;
    enc.threshold = tr_theta;
    enc.seed = tr_seed;
    tr.train.seed = tr_seed;
    try {
      enc.validate();
      tr.train.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const ChannelSet set = tr.channel_set();
    const auto images = tr.load(kTrainFiles, tr.limit);
    const auto data = encode_dataset<double>(images, set, enc);
    std::vector<int> sizes{static_cast<int>(data.front().frames.rows())};
    sizes.insert(sizes.end(), tr.hidden.begin(), tr.hidden.end());
    sizes.push_back(static_cast<int>(tr.classes.size()));
    auto model = SnnModel<double>::initialized(sizes, tr_seed, 1.0, tr.slope, tr.gain);
    const auto history = train(model, data, tr.train);
    write_file(tr_out, save_checkpoint(model));
    emit(history_csv(history), tr_history);
    if (fs::exists(fs::path(tr.dir) / kTestFile)) {
      enc.seed = derive_item_seed(tr_seed, ~std::size_t{0});
      const auto test = encode_dataset<double>(tr.load({&kTestFile, 1}, tr.test_limit), set, enc);
      std::cerr << "test accuracy " << evaluate(model, test) << " on " << test.size() << " images\n";
    }
  });

  // compare
  auto* compare = app.add_subcommand("compare", "train one network per codec and seed; CSV of test accuracies");
  DeskFlags co;
  std::vector<std::string> co_codecs{"if", "rate"};
  std::vector<std::uint64_t> co_seeds{1, 2, 3};
  double co_theta = 1.0;
  std::string co_out;
  co.add(*compare);
  compare->add_option("--codecs", co_codecs, "codecs to compare")->delimiter(',')->capture_default_str();
  compare->add_option("--seeds", co_seeds, "seeds")->delimiter(',')->capture_default_str();
  compare->add_option("--theta", co_theta, "encoder threshold")->capture_default_str();
  compare->add_option("-o,--output", co_out, "CSV path (default stdout)");
  compare->callback([&] {
    ComparisonSetup setup;
    setup.channels = co.channel_set();
    setup.encoder.threshold = co_theta;
    setup.hidden = co.hidden;
    setup.init_gain = co.gain;
    setup.surrogate_slope = co.slope;
    setup.train = co.train;
    try {
      setup.encoder.validate();
      setup.train.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const auto codecs = parse_codecs(co_codecs);
    if (co_seeds.empty()) throw UsageError("--seeds is empty");
    const auto train_images = co.load(kTrainFiles, co.limit);
    const auto test_images = co.load({&kTestFile, 1}, co.test_limit);
    const auto rows = compare_codecs(train_images, test_images, codecs, co_seeds, setup);
    emit(comparison_csv(rows), co_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
