#include "spikeenc/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace spikeenc {

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// PPM

namespace {

class HeaderCursor {
 public:
  explicit HeaderCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number(const char* what) {
    skip_space_and_comments();
    const std::size_t begin = pos_;
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFul) throw Error(ErrorCode::MalformedHeader, std::string(what) + " too large");
      ++pos_;
    }
    if (pos_ == begin) throw Error(ErrorCode::MalformedHeader, std::string("expected ") + what);
    return value;
  }

  /// Exactly one whitespace byte separates the header from the raster.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw Error(ErrorCode::MalformedHeader, "missing whitespace after maxval");
    ++pos_;
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

RawImage read_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw Error(ErrorCode::MalformedHeader, "expected binary P5 or P6 magic");
  const int channels = bytes[1] == '6' ? 3 : 1;
  HeaderCursor cursor(bytes.subspan(2));
  const auto width = cursor.number("width");
  const auto height = cursor.number("height");
  const auto maxval = cursor.number("maxval");
  if (width == 0 || height == 0) throw Error(ErrorCode::MalformedHeader, "zero image dimension");
  if (maxval != 255)
    throw Error(ErrorCode::UnsupportedMaxval, "maxval " + std::to_string(maxval) + " (only 255 is supported)");
  cursor.end_of_header();

  const std::size_t offset = 2 + cursor.position();
  const std::size_t needed = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - offset < needed)
    throw Error(ErrorCode::TruncatedPayload, "expected " + std::to_string(needed) + " raster bytes, found " +
                                                 std::to_string(bytes.size() - offset));
  const auto raster = bytes.subspan(offset, needed);
  return RawImage(static_cast<int>(width), static_cast<int>(height), channels,
                  std::vector<std::uint8_t>(raster.begin(), raster.end()));
}

Bytes write_ppm(const RawImage& image) {
  const std::string header = std::string(image.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), image.pixels().begin(), image.pixels().end());
  return out;
}

// ---------------------------------------------------------------------------
// CIFAR-10

std::vector<LabeledImage> read_cifar10_batch(std::span<const std::uint8_t> bytes) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0)
    throw Error(ErrorCode::BadRecordCount,
                std::to_string(bytes.size()) + " bytes is not a whole number of 3073-byte records");
  constexpr int side = 32;
  constexpr std::size_t plane = side * side;
  std::vector<LabeledImage> images;
  images.reserve(bytes.size() / kCifarRecordBytes);
  for (std::size_t offset = 0; offset < bytes.size(); offset += kCifarRecordBytes) {
    const auto record = bytes.subspan(offset, kCifarRecordBytes);
    if (record[0] >= kCifarClasses)
      throw Error(ErrorCode::BadLabel, "label " + std::to_string(record[0]) + " in record " +
                                           std::to_string(offset / kCifarRecordBytes));
    std::vector<std::uint8_t> pixels(plane * 3);
    for (std::size_t i = 0; i < plane; ++i)
      for (std::size_t c = 0; c < 3; ++c) pixels[i * 3 + c] = record[1 + c * plane + i];
    images.push_back({RawImage(side, side, 3, std::move(pixels)), record[0]});
  }
  return images;
}

Bytes write_cifar10_batch(std::span<const LabeledImage> images) {
  constexpr std::size_t plane = 32 * 32;
  Bytes out;
  out.reserve(images.size() * kCifarRecordBytes);
  for (const auto& item : images) {
    if (item.image.width() != 32 || item.image.height() != 32 || item.image.channels() != 3)
      throw Error(ErrorCode::ShapeMismatch, "CIFAR-10 records are 32x32x3");
    if (item.label < 0 || item.label >= kCifarClasses) throw Error(ErrorCode::BadLabel, "label out of range");
    out.push_back(static_cast<std::uint8_t>(item.label));
    const auto px = item.image.pixels();
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < plane; ++i) out.push_back(px[i * 3 + c]);
  }
  return out;
}

std::vector<LabeledImage> load_cifar10(const std::filesystem::path& dir, std::span<const std::string> files,
                                       std::span<const int> classes, std::size_t limit) {
  std::vector<LabeledImage> result;
  for (const auto& name : files) {
    for (auto& item : read_cifar10_batch(read_file(dir / name))) {
      if (!classes.empty() && std::find(classes.begin(), classes.end(), item.label) == classes.end()) continue;
      result.push_back(std::move(item));
      if (limit != 0 && result.size() == limit) return result;
    }
  }
  return result;
}

std::vector<LabeledImage> remap_labels(std::vector<LabeledImage> images, std::span<const int> classes) {
  for (auto& item : images) {
    const auto it = std::find(classes.begin(), classes.end(), item.label);
    if (it == classes.end()) throw Error(ErrorCode::BadLabel, "label " + std::to_string(item.label) + " not selected");
    item.label = static_cast<int>(it - classes.begin());
  }
  return images;
}

// ---------------------------------------------------------------------------
// Spike container

namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'P', 'K', '1'};

template <typename T>
void put_le(Bytes& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(bytes[offset + i]) << (8 * i));
  return value;
}

}  // namespace

std::size_t SpikeContainerHeader::payload_bytes() const {
  const std::uint64_t bits = static_cast<std::uint64_t>(channels) * time_steps * width * height;
  return static_cast<std::size_t>((bits + 7) / 8);
}

Bytes write_spike_container(const SpikeTensor& spikes) {
  const auto& config = spikes.provenance().config;
  Bytes out(std::begin(kMagic), std::end(kMagic));
  out.reserve(kContainerHeaderBytes + (spikes.bits().size() + 7) / 8);
  put_le<std::uint16_t>(out, kContainerVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(spikes.channels()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(spikes.time_steps()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(spikes.width()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(spikes.height()));
  out.push_back(spikes.provenance().channel_set.code());
  out.push_back(static_cast<std::uint8_t>(config.codec));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(std::llround(config.threshold * 1000.0)));
  put_le<std::uint64_t>(out, config.seed);
  out.insert(out.end(), 8, 0);

  const auto bits = spikes.bits();
  const std::size_t payload_start = out.size();
  out.resize(payload_start + (bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out[payload_start + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  return out;
}

SpikeContainerHeader read_container_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw Error(ErrorCode::BadMagic, "not a SPK1 spike container");
  if (bytes.size() < kContainerHeaderBytes)
    throw Error(ErrorCode::LengthMismatch, "container shorter than its header");
  SpikeContainerHeader h;
  h.version = get_le<std::uint16_t>(bytes, 4);
  if (h.version != kContainerVersion)
    throw Error(ErrorCode::VersionMismatch, "container version " + std::to_string(h.version));
  h.channels = get_le<std::uint32_t>(bytes, 6);
  h.time_steps = get_le<std::uint32_t>(bytes, 10);
  h.width = get_le<std::uint32_t>(bytes, 14);
  h.height = get_le<std::uint32_t>(bytes, 18);
  h.channel_set = bytes[22];
  h.codec = bytes[23];
  h.threshold_milli = get_le<std::uint32_t>(bytes, 24);
  h.seed = get_le<std::uint64_t>(bytes, 28);
  if (h.channels == 0 || h.time_steps == 0 || h.width == 0 || h.height == 0)
    throw Error(ErrorCode::MalformedHeader, "zero dimension in container header");
  if (h.codec > static_cast<std::uint8_t>(Codec::Ttfs))
    throw Error(ErrorCode::MalformedHeader, "unknown codec id " + std::to_string(h.codec));
  if (h.threshold_milli == 0) throw Error(ErrorCode::MalformedHeader, "zero threshold");
  if (bytes.size() != kContainerHeaderBytes + h.payload_bytes())
    throw Error(ErrorCode::LengthMismatch, "payload is " + std::to_string(bytes.size() - kContainerHeaderBytes) +
                                               " bytes, header implies " + std::to_string(h.payload_bytes()));
  return h;
}

SpikeTensor read_spike_container(std::span<const std::uint8_t> bytes) {
  const SpikeContainerHeader h = read_container_header(bytes);
  const ChannelSetId set = ChannelSetId::from_code(h.channel_set);
  auto labels = set.labels();
  if (labels.size() != h.channels)
    throw Error(ErrorCode::MalformedHeader, "channel set implies " + std::to_string(labels.size()) +
                                                " channels, header says " + std::to_string(h.channels));

  EncoderConfig config;
  config.codec = static_cast<Codec>(h.codec);
  config.time_steps = static_cast<int>(h.time_steps);
  config.threshold = h.threshold_milli / 1000.0;
  config.seed = h.seed;

  const std::size_t count = static_cast<std::size_t>(h.channels) * h.time_steps * h.width * h.height;
  const auto payload = bytes.subspan(kContainerHeaderBytes);
  std::vector<std::uint8_t> bits(count);
  for (std::size_t i = 0; i < count; ++i) bits[i] = (payload[i / 8] >> (i % 8)) & 1u;
  return SpikeTensor(static_cast<int>(h.channels), static_cast<int>(h.time_steps), static_cast<int>(h.width),
                     static_cast<int>(h.height), std::move(bits), std::move(labels), Provenance{config, set});
}

// ---------------------------------------------------------------------------
// Event list

std::string export_event_list(const SpikeTensor& spikes) {
  std::string out = "t,x,y,c,p\n";
  for (int t = 0; t < spikes.time_steps(); ++t)
    for (int c = 0; c < spikes.channels(); ++c)
      for (int y = 0; y < spikes.height(); ++y)
        for (int x = 0; x < spikes.width(); ++x)
          if (spikes(c, t, y, x)) {
            out += std::to_string(t + 1);
            out += ',';
            out += std::to_string(x);
            out += ',';
            out += std::to_string(y);
            out += ',';
            out += std::to_string(c);
            out += ",1\n";
          }
  return out;
}

SpikeTensor parse_event_list(std::string_view csv, const SpikeTensor& shape) {
  std::vector<std::uint8_t> bits(shape.bits().size(), 0);
  std::size_t line_no = 0;
  while (!csv.empty()) {
    const auto eol = csv.find('\n');
    std::string_view line = csv.substr(0, eol);
    csv = eol == std::string_view::npos ? std::string_view{} : csv.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (line_no == 1) {
      if (line != "t,x,y,c,p") throw Error(ErrorCode::MalformedHeader, "event list header must be t,x,y,c,p");
      continue;
    }
    if (line.empty()) continue;
    long fields[5] = {};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int f = 0; f < 5; ++f) {
      auto [next, ec] = std::from_chars(p, end, fields[f]);
      if (ec != std::errc{} || (f < 4 && (next == end || *next != ',')) || (f == 4 && next != end))
        throw Error(ErrorCode::MalformedHeader, "bad event on line " + std::to_string(line_no));
      p = next + 1;
    }
    const long t = fields[0] - 1, x = fields[1], y = fields[2], c = fields[3];
    if (t < 0 || t >= shape.time_steps() || x < 0 || x >= shape.width() || y < 0 || y >= shape.height() || c < 0 ||
        c >= shape.channels() || fields[4] != 1)
      throw Error(ErrorCode::OutOfBounds, "event on line " + std::to_string(line_no) + " outside the tensor");
    bits[shape.index(static_cast<int>(c), static_cast<int>(t), static_cast<int>(y), static_cast<int>(x))] = 1;
  }
  return SpikeTensor(shape.channels(), shape.time_steps(), shape.width(), shape.height(), std::move(bits),
                     shape.labels(), shape.provenance());
}

// ---------------------------------------------------------------------------
// Raster SVG

namespace {

std::string fixed(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << v;
  return s.str();
}

}  // namespace

std::string write_raster_svg(const SpikeTensor& spikes, std::span<const PixelRef> selection) {
  if (selection.empty()) throw Error(ErrorCode::InvalidArgument, "raster needs at least one pixel");
  for (const auto& px : selection)
    if (px.x < 0 || px.x >= spikes.width() || px.y < 0 || px.y >= spikes.height() || px.c < 0 ||
        px.c >= spikes.channels())
      throw Error(ErrorCode::OutOfBounds, "pixel (" + std::to_string(px.x) + "," + std::to_string(px.y) + "," +
                                              std::to_string(px.c) + ") outside the tensor");

  const int steps = spikes.time_steps();
  const double left = 130.0, top = 30.0, lane_h = 28.0, right = 20.0, bottom = 50.0;
  const double step_w = std::clamp(800.0 / steps, 1.0, 24.0);
  const double plot_w = step_w * steps;
  const double width = left + plot_w + right;
  const double height = top + lane_h * static_cast<double>(selection.size()) + bottom;
  const auto step_x = [&](int step) { return left + (step - 0.5) * step_w; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fixed(width) << "\" height=\""
      << fixed(height) << "\" viewBox=\"0 0 " << fixed(width) << ' ' << fixed(height) << "\">\n"
      << "<desc>spike raster: " << selection.size() << " lanes, " << steps << " steps, codec "
      << to_string(spikes.provenance().config.codec) << "</desc>\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fixed(width) << "\" height=\"" << fixed(height)
      << "\" fill=\"white\"/>\n"
      << "<g font-family=\"monospace\" font-size=\"11\">\n";

  for (std::size_t lane = 0; lane < selection.size(); ++lane) {
    const auto& px = selection[lane];
    const double y_mid = top + lane_h * (static_cast<double>(lane) + 0.5);
    svg << "<text x=\"6\" y=\"" << fixed(y_mid + 4) << "\">(" << px.x << ',' << px.y << ',' << px.c << ") "
        << to_string(spikes.labels()[px.c]) << "</text>\n"
        << "<line class=\"lane\" x1=\"" << fixed(left) << "\" y1=\"" << fixed(y_mid) << "\" x2=\""
        << fixed(left + plot_w) << "\" y2=\"" << fixed(y_mid) << "\" stroke=\"#cccccc\"/>\n";
    for (int t = 0; t < steps; ++t)
      if (spikes(px.c, t, px.y, px.x))
        svg << "<line class=\"spike\" data-lane=\"" << lane << "\" data-step=\"" << t + 1 << "\" x1=\""
            << fixed(step_x(t + 1)) << "\" y1=\"" << fixed(y_mid - lane_h * 0.35) << "\" x2=\""
            << fixed(step_x(t + 1)) << "\" y2=\"" << fixed(y_mid + lane_h * 0.35)
            << "\" stroke=\"black\" stroke-width=\"" << fixed(std::max(1.0, step_w * 0.4)) << "\"/>\n";
  }

  const double axis_y = top + lane_h * static_cast<double>(selection.size()) + 6;
  svg << "<line class=\"axis\" x1=\"" << fixed(left) << "\" y1=\"" << fixed(axis_y) << "\" x2=\""
      << fixed(left + plot_w) << "\" y2=\"" << fixed(axis_y) << "\" stroke=\"black\"/>\n";
  const int label_every = std::max(1, (steps + 15) / 16);
  for (int step = 1; step <= steps; ++step) {
    if (step != 1 && step != steps && step % label_every != 0) continue;
    svg << "<text class=\"tick\" x=\"" << fixed(step_x(step)) << "\" y=\"" << fixed(axis_y + 14)
        << "\" text-anchor=\"middle\">" << step << "</text>\n";
  }
  svg << "<text x=\"" << fixed(left + plot_w / 2) << "\" y=\"" << fixed(axis_y + 32)
      << "\" text-anchor=\"middle\">time step</text>\n"
      << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace spikeenc
