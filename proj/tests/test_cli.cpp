#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "spikeenc/analysis.hpp"
#include "spikeenc/io.hpp"
#include "spikeenc/snn.hpp"

namespace fs = std::filesystem;
using namespace spikeenc;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("spikeenc_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

int cli(const std::string& args, const std::string& stdout_to = "/dev/null") {
  const std::string cmd = std::string("\"") + SPIKEENC_CLI + "\" " + args + " > \"" + stdout_to + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RawImage random_image(int w, int h, int channels, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * channels);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng());
  return RawImage(w, h, channels, px);
}

std::vector<LabeledImage> cifar_like(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> noise(0, 60);
  std::vector<LabeledImage> out;
  for (int k = 0; k < n; ++k) {
    const int label = k % 3;  // class 2 is filtered out by --classes 0,1
    std::vector<std::uint8_t> px(32 * 32 * 3);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        for (int c = 0; c < 3; ++c)
          px[(y * 32 + x) * 3 + c] = static_cast<std::uint8_t>((y < 16) == (label == 0) ? 180 + noise(rng) : noise(rng));
    out.push_back({RawImage(32, 32, 3, px), label});
  }
  return out;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("encode writes one container with the requested channels") {
  Sandbox box;
  const RawImage img = random_image(6, 5, 3, 1);
  write_file(box / "img.ppm", write_ppm(img));
  REQUIRE(cli("encode " + box / "img.ppm" + " --channels rgbl --codec if --steps 256 -o " + box / "img.spk") == 0);
  const auto spikes = read_spike_container(read_file(box / "img.spk"));
  CHECK(spikes.channels() == 4);
  CHECK(spikes.time_steps() == 256);
  CHECK(spikes.provenance().channel_set == ChannelSetId(ChannelSet::Rgbl));

  write_file(box / "black.ppm", write_ppm(RawImage::filled(4, 4, 3, 0)));
  REQUIRE(cli("encode " + box / "black.ppm" + " --codec if -o " + box / "x.spk") == 0);
  CHECK(read_spike_container(read_file(box / "x.spk")).spike_count() == 0);
}

TEST_CASE("rate encoding needs a seed and is reproducible") {
  Sandbox box;
  write_file(box / "img.ppm", write_ppm(random_image(5, 5, 3, 2)));
  CHECK(cli("encode " + box / "img.ppm" + " --codec rate -o " + box / "r.spk") == 2);
  REQUIRE(cli("encode " + box / "img.ppm" + " --codec rate --seed 7 -o " + box / "a.spk") == 0);
  REQUIRE(cli("encode " + box / "img.ppm" + " --codec rate --seed 7 -o " + box / "b.spk") == 0);
  CHECK(slurp(box / "a.spk") == slurp(box / "b.spk"));
}

TEST_CASE("usage and data errors map to exit codes 2 and 1") {
  Sandbox box;
  write_file(box / "img.ppm", write_ppm(random_image(3, 3, 1, 3)));
  CHECK(cli("") == 2);
  CHECK(cli("encode " + box / "img.ppm" + " --bogus -o " + box / "x.spk") == 2);
  CHECK(cli("encode " + box / "img.ppm" + " --codec nope -o " + box / "x.spk") == 2);
  CHECK(cli("encode " + box / "img.ppm" + " --theta 0 -o " + box / "x.spk") == 2);
  CHECK(cli("encode " + box / "img.ppm" + " --channels rgb -o " + box / "x.spk") == 1);  // not a colour image
  write_text(box / "bad.ppm", "P6\n2 2\n255\nxx");
  CHECK(cli("encode " + box / "bad.ppm" + " -o " + box / "x.spk") == 1);
  CHECK(cli("decode " + box / "img.ppm" + " -o " + box / "y.ppm") == 1);
  CHECK(cli("stats " + box / "img.ppm") == 1);
}

TEST_CASE("decode reconstructs within one gray level") {
  Sandbox box;
  for (int ch : {1, 3}) {
    const RawImage img = random_image(7, 4, ch, 4 + ch);
    write_file(box / "img.ppm", write_ppm(img));
    REQUIRE(cli("encode " + box / "img.ppm" + " -o " + box / "img.spk") == 0);
    REQUIRE(cli("decode " + box / "img.spk" + " -o " + box / "out.ppm") == 0);
    const RawImage back = read_ppm(read_file(box / "out.ppm"));
    REQUIRE(back.channels() == ch);
    for (std::size_t i = 0; i < img.pixels().size(); ++i) CHECK(std::abs(back.pixels()[i] - img.pixels()[i]) <= 1);

    REQUIRE(cli("encode " + box / "img.ppm" + " --codec ttfs -o " + box / "t.spk") == 0);
    REQUIRE(cli("decode " + box / "t.spk" + " --mode ttfs -o " + box / "t.ppm") == 0);
    const RawImage tt = read_ppm(read_file(box / "t.ppm"));
    for (std::size_t i = 0; i < img.pixels().size(); ++i) CHECK(std::abs(tt.pixels()[i] - img.pixels()[i]) <= 1);
  }
  CHECK(cli("decode " + box / "img.spk" + " --mode ttfs -o " + box / "z.ppm") == 1);  // multi-spike trains

  write_file(box / "black.ppm", write_ppm(RawImage::filled(3, 3, 3, 0)));
  REQUIRE(cli("encode " + box / "black.ppm" + " --channels rgbl -o " + box / "k.spk") == 0);
  REQUIRE(cli("decode " + box / "k.spk" + " -o " + box / "k.ppm") == 0);
  CHECK(read_ppm(read_file(box / "k.ppm")) == RawImage::filled(3, 3, 3, 0));
}

TEST_CASE("stats, raster and bench") {
  Sandbox box;
  const RawImage img = random_image(4, 4, 3, 9);
  write_file(box / "img.ppm", write_ppm(img));
  REQUIRE(cli("encode " + box / "img.ppm" + " --steps 16 -o " + box / "img.spk") == 0);
  REQUIRE(cli("stats " + box / "img.spk", box / "stats.csv") == 0);
  const std::string csv = slurp(box / "stats.csv");
  CHECK(lines(csv) == 4);
  const auto spikes = read_spike_container(read_file(box / "img.spk"));
  const auto expected = channel_stats(spikes);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  for (const auto& row : expected) {
    std::getline(in, line);
    CHECK(line.find("," + std::to_string(row.total_spikes) + ",") != std::string::npos);
  }

  write_file(box / "black.ppm", write_ppm(RawImage::filled(2, 2, 1, 0)));
  REQUIRE(cli("encode " + box / "black.ppm" + " -o " + box / "k.spk") == 0);
  REQUIRE(cli("stats " + box / "k.spk", box / "k.csv") == 0);
  CHECK(slurp(box / "k.csv").find("0,GRAY,0,0,0\n") != std::string::npos);

  REQUIRE(cli("raster " + box / "img.spk" + " --pixels \"0,0,0;3,3,2\" -o " + box / "r.svg") == 0);
  const std::string svg = slurp(box / "r.svg");
  std::size_t ticks = 0;
  for (auto p = svg.find("class=\"spike\""); p != std::string::npos; p = svg.find("class=\"spike\"", p + 1)) ++ticks;
  CHECK(ticks == static_cast<std::size_t>(spikes.pixel_spike_count(0, 0, 0) + spikes.pixel_spike_count(2, 3, 3)));
  CHECK(cli("raster " + box / "img.spk" + " --pixels \"9,0,0\" -o " + box / "r.svg") == 1);
  CHECK(cli("raster " + box / "img.spk" + " --pixels \"0;0\" -o " + box / "r.svg") == 2);

  REQUIRE(cli("bench " + box / "img.ppm" + " --reps 4 --steps 8", box / "bench.csv") == 0);
  const std::string bench = slurp(box / "bench.csv");
  CHECK(lines(bench) == 2);
  CHECK(bench.find("if,rgb,1,4,3,") != std::string::npos);
}

TEST_CASE("CIFAR batches: encode, train and compare") {
  Sandbox box;
  const auto train_items = cifar_like(60, 1);
  const auto test_items = cifar_like(15, 2);
  fs::create_directories(box.dir / "cifar");
  write_file(box.dir / "cifar" / "data_batch_1.bin", write_cifar10_batch(train_items));
  write_file(box.dir / "cifar" / "test_batch.bin", write_cifar10_batch(test_items));
  const std::string data = box / "cifar";

  REQUIRE(cli("encode " + data + "/test_batch.bin --limit 5 --steps 8 -o " + box / "enc") == 0);
  CHECK(std::distance(fs::directory_iterator(box.dir / "enc"), fs::directory_iterator{}) == 5);
  CHECK(read_spike_container(read_file(box / "enc/00004.spk")).channels() == 3);

  const std::string common = " --epochs 3 --steps 8 --hidden 8 --batch 10";
  REQUIRE(cli("train " + data + common + " -o " + box / "m.snn --history " + box / "h.csv") == 0);
  const auto model = load_checkpoint(read_file(box / "m.snn"));
  CHECK(model.input_size() == 16 * 16);
  CHECK(model.class_count() == 2);
  CHECK(lines(slurp(box / "h.csv")) == 4);
  REQUIRE(cli("train " + data + common + " -o " + box / "m2.snn --history " + box / "h2.csv") == 0);
  CHECK(slurp(box / "m.snn") == slurp(box / "m2.snn"));

  REQUIRE(cli("compare " + data + common + " --codecs if,rate,ttfs --seeds 1,2", box / "cmp.csv") == 0);
  const std::string table = slurp(box / "cmp.csv");
  CHECK(lines(table) == 4);
  CHECK(table.find("\nrate,1;2,") != std::string::npos);
  REQUIRE(cli("compare " + data + common + " --codecs if,rate,ttfs --seeds 1,2", box / "cmp2.csv") == 0);
  CHECK(table == slurp(box / "cmp2.csv"));

  CHECK(cli("compare " + data + common + " --codecs if,bogus") == 2);
  CHECK(cli("train " + box / "enc" + common + " -o " + box / "x.snn") == 1);  // no batches there
}
