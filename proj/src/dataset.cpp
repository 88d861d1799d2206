#include "hdc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hdc/error.hpp"
#include "hdc/random.hpp"

namespace hdc {

namespace {

constexpr double kPairTiltRadians = 2.0 * 3.14159265358979323846 / 180.0;
constexpr double kMinSeparationRadians = 25.0 * 3.14159265358979323846 / 180.0;
constexpr double kBaselineActivation = 0.08;
constexpr double kActivationLogSigma = 0.8;
constexpr double kGainLogSigma = 0.5;
constexpr double kSharedWeight = 1.0;
constexpr double kRecruitBlend = 0.95;

using Vec3 = std::array<double, 3>;

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 random_unit(RandomSource& rng) {
  return normalized({rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()});
}

// Rotate v by `angle` toward a direction perpendicular to it.
Vec3 tilt(const Vec3& v, double angle, bool flip) {
  // Perpendicular axis: pick the basis vector least aligned with v.
  Vec3 e = {1.0, 0.0, 0.0};
  if (std::abs(v[1]) < std::abs(v[0])) e = {0.0, 1.0, 0.0};
  if (std::abs(v[2]) < std::abs(v[0]) && std::abs(v[2]) < std::abs(v[1])) e = {0.0, 0.0, 1.0};
  const Vec3 perp = normalized(cross3(v, e));
  const double s = std::sin(flip ? -angle : angle);
  const double c = std::cos(angle);
  return normalized({c * v[0] + s * perp[0], c * v[1] + s * perp[1], c * v[2] + s * perp[2]});
}

void validate(const GenConfig& c) {
  require(c.n_gestures >= 1 && c.n_positions >= 1 && c.n_reps >= 1 && c.windows_per_rep >= 1 &&
              c.n_channels >= 1,
          "all dataset counts must be at least 1");
  require(c.position_distortion >= 0.0 && c.position_distortion <= 1.0,
          "position_distortion must lie in [0, 1]");
  for (const auto& [a, b] : c.paired_positions) {
    require(a >= 0 && a < c.n_positions && b >= 0 && b < c.n_positions && a != b,
            "paired_positions entries must name two distinct valid positions");
  }
}

// Sprinkle 8-12 active channels with log-normal amplitudes onto `pattern`.
void add_active_channels(std::vector<double>& pattern, double weight, int n_channels,
                         RandomSource& rng) {
  const int max_active = std::min(12, n_channels);
  const int min_active = std::min(8, n_channels);
  const int n_active =
      min_active + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_active - min_active + 1)));
  std::vector<int> channels(static_cast<std::size_t>(n_channels));
  for (int ch = 0; ch < n_channels; ++ch) channels[static_cast<std::size_t>(ch)] = ch;
  for (int i = 0; i < n_active; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_channels - i)));
    std::swap(channels[static_cast<std::size_t>(i)], channels[static_cast<std::size_t>(j)]);
    pattern[static_cast<std::size_t>(channels[static_cast<std::size_t>(i)])] +=
        weight * std::exp(kActivationLogSigma * rng.next_gaussian());
  }
}

std::vector<std::vector<double>> gesture_patterns(const GenConfig& c, const RandomSource& root) {
  const RandomSource gestures = root.child(1);

  // Postural muscle tone common to every gesture: holding the arm up recruits
  // the same support muscles no matter what the hand does. This is what makes
  // different gestures correlate instead of landing orthogonal to each other.
  std::vector<double> shared(static_cast<std::size_t>(c.n_channels), 0.0);
  RandomSource shared_rng = root.child(5);
  add_active_channels(shared, kSharedWeight, c.n_channels, shared_rng);

  std::vector<std::vector<double>> patterns;
  patterns.reserve(static_cast<std::size_t>(c.n_gestures));
  for (int g = 0; g < c.n_gestures; ++g) {
    RandomSource rng = gestures.child(static_cast<std::uint64_t>(g));
    std::vector<double> pattern(static_cast<std::size_t>(c.n_channels), kBaselineActivation);
    for (int ch = 0; ch < c.n_channels; ++ch) {
      pattern[static_cast<std::size_t>(ch)] += shared[static_cast<std::size_t>(ch)];
    }
    if (g > 0) {  // gesture 0 is rest: baseline + postural tone only
      add_active_channels(pattern, 1.0, c.n_channels, rng);
    }
    patterns.push_back(std::move(pattern));
  }
  return patterns;
}

struct PositionWarp {
  int shift = 0;
  int gesture_offset = 0;
  std::vector<double> gains;
};

std::vector<PositionWarp> position_warps(const GenConfig& c, const RandomSource& root) {
  const RandomSource warp = root.child(2);
  std::vector<PositionWarp> warps(static_cast<std::size_t>(c.n_positions));
  for (int p = 0; p < c.n_positions; ++p) {
    RandomSource rng = warp.child(static_cast<std::uint64_t>(p));
    auto& w = warps[static_cast<std::size_t>(p)];
    // Full-range rotation: each arm position remaps the electrode ring to an
    // arbitrary offset, so at full strength two positions share no channel
    // alignment at all.
    w.shift = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(c.n_channels)));
    w.gains.resize(static_cast<std::size_t>(c.n_channels));
    for (auto& gain : w.gains) gain = std::exp(kGainLogSigma * rng.next_gaussian());
    // Recruitment remap: raising or rotating the arm changes which muscles
    // produce a given wrist gesture, so at position p gesture g partially
    // takes on the recruitment pattern of another gesture. This is the source
    // of cross-position aliasing: the same class looks like a different class
    // from another position's point of view. Offset 0 would mean "no remap",
    // so draw from 1..G-1 to make every position alias.
    w.gesture_offset =
        c.n_gestures < 2
            ? 0
            : 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(c.n_gestures - 1)));
  }
  // Near-duplicate arm positions deform the signal almost identically: same
  // electrode alignment, same gain profile. What still differs is which
  // muscles substitute for which, so the pair keeps distinct gesture offsets;
  // with equal offsets the pair would present the same remapped classes and
  // merging their contexts would cost nothing.
  for (const auto& [a, b] : c.paired_positions) {
    auto& wb = warps[static_cast<std::size_t>(b)];
    const auto& wa = warps[static_cast<std::size_t>(a)];
    wb.shift = wa.shift;
    wb.gains = wa.gains;
    if (c.n_gestures >= 3 && wb.gesture_offset == wa.gesture_offset) {
      wb.gesture_offset = 1 + wb.gesture_offset % (c.n_gestures - 1);
    }
  }
  return warps;
}

std::vector<double> warped_pattern(const std::vector<std::vector<double>>& patterns, int g,
                                   const PositionWarp& warp, double strength) {
  const auto& base = patterns[static_cast<std::size_t>(g)];
  const auto& mix =
      patterns[static_cast<std::size_t>((g + warp.gesture_offset) % static_cast<int>(patterns.size()))];
  const int n = static_cast<int>(base.size());
  std::vector<double> out(base.size());
  for (int ch = 0; ch < n; ++ch) {
    const int src = ((ch - warp.shift) % n + n) % n;
    const double displaced = (1.0 - kRecruitBlend) * base[static_cast<std::size_t>(src)] +
                             kRecruitBlend * mix[static_cast<std::size_t>(ch)];
    // The gain hits the whole channel, undistorted part included: tissue
    // filtering between muscle and electrode does not care which fraction of
    // the activity kept its original recruitment. Exponent scales with
    // strength so the warp stays an exact identity at zero.
    const double gain = std::pow(warp.gains[static_cast<std::size_t>(ch)], strength);
    out[static_cast<std::size_t>(ch)] =
        gain * ((1.0 - strength) * base[static_cast<std::size_t>(ch)] + strength * displaced);
  }
  return out;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

nlohmann::json config_to_json(const GenConfig& c) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : c.paired_positions) pairs.push_back({a, b});
  return {
      {"n_gestures", c.n_gestures},
      {"n_positions", c.n_positions},
      {"n_reps", c.n_reps},
      {"windows_per_rep", c.windows_per_rep},
      {"n_channels", c.n_channels},
      {"emg_noise_sigma", c.emg_noise_sigma},
      {"position_distortion", c.position_distortion},
      {"accel_noise_sigma", c.accel_noise_sigma},
      {"paired_positions", pairs},
      {"seed", c.seed},
  };
}

GenConfig config_from_json(const nlohmann::json& j) {
  GenConfig c;
  c.n_gestures = j.value("n_gestures", c.n_gestures);
  c.n_positions = j.value("n_positions", c.n_positions);
  c.n_reps = j.value("n_reps", c.n_reps);
  c.windows_per_rep = j.value("windows_per_rep", c.windows_per_rep);
  c.n_channels = j.value("n_channels", c.n_channels);
  c.emg_noise_sigma = j.value("emg_noise_sigma", c.emg_noise_sigma);
  c.position_distortion = j.value("position_distortion", c.position_distortion);
  c.accel_noise_sigma = j.value("accel_noise_sigma", c.accel_noise_sigma);
  c.seed = j.value("seed", c.seed);
  if (j.contains("paired_positions")) {
    c.paired_positions.clear();
    for (const auto& pair : j.at("paired_positions")) {
      c.paired_positions.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    }
  }
  return c;
}

}  // namespace

std::vector<Vec3> position_orientations(const GenConfig& config) {
  validate(config);
  const RandomSource orient = RandomSource(config.seed).child(3);

  // Second pair members reuse the first member's anchor. Chains collapse to
  // their root so (0,4),(4,7) puts 0, 4 and 7 on one shared anchor.
  std::vector<int> anchor_of(static_cast<std::size_t>(config.n_positions), -1);
  for (const auto& [a, b] : config.paired_positions) {
    if (anchor_of[static_cast<std::size_t>(b)] < 0 && a != b) {
      anchor_of[static_cast<std::size_t>(b)] = a;
    }
  }
  for (int p = 0; p < config.n_positions; ++p) {
    int root = p;
    int hops = 0;
    while (anchor_of[static_cast<std::size_t>(root)] >= 0 && hops++ <= config.n_positions) {
      root = anchor_of[static_cast<std::size_t>(root)];
    }
    if (root != p) anchor_of[static_cast<std::size_t>(p)] = root;
  }

  std::vector<Vec3> anchors(static_cast<std::size_t>(config.n_positions));
  std::vector<bool> has_anchor(static_cast<std::size_t>(config.n_positions), false);
  RandomSource rng = orient.child(0);
  for (int p = 0; p < config.n_positions; ++p) {
    if (anchor_of[static_cast<std::size_t>(p)] >= 0) continue;
    Vec3 candidate{};
    for (int attempt = 0; attempt < 1000; ++attempt) {
      candidate = random_unit(rng);
      bool separated = true;
      for (int q = 0; q < p; ++q) {
        if (!has_anchor[static_cast<std::size_t>(q)]) continue;
        if (std::acos(std::clamp(dot3(candidate, anchors[static_cast<std::size_t>(q)]), -1.0, 1.0)) <
            kMinSeparationRadians) {
          separated = false;
          break;
        }
      }
      if (separated) break;
    }
    anchors[static_cast<std::size_t>(p)] = candidate;
    has_anchor[static_cast<std::size_t>(p)] = true;
  }

  std::vector<Vec3> orientations(static_cast<std::size_t>(config.n_positions));
  for (int p = 0; p < config.n_positions; ++p) {
    const int anchor = anchor_of[static_cast<std::size_t>(p)];
    if (anchor < 0) {
      const bool paired_root =
          std::any_of(config.paired_positions.begin(), config.paired_positions.end(),
                      [&](const auto& pr) { return pr.first == p; });
      orientations[static_cast<std::size_t>(p)] =
          paired_root ? tilt(anchors[static_cast<std::size_t>(p)], kPairTiltRadians, false)
                      : anchors[static_cast<std::size_t>(p)];
    } else {
      orientations[static_cast<std::size_t>(p)] =
          tilt(anchors[static_cast<std::size_t>(anchor)], kPairTiltRadians, true);
    }
  }
  return orientations;
}

Dataset generate(const GenConfig& config) {
  validate(config);
  const RandomSource root(config.seed);
  const auto patterns = gesture_patterns(config, root);
  const auto warps = position_warps(config, root);
  const auto orientations = position_orientations(config);
  const RandomSource noise = root.child(4);

  Dataset ds;
  ds.config = config;
  ds.windows.reserve(static_cast<std::size_t>(config.n_gestures) * config.n_positions *
                     config.n_reps * config.windows_per_rep);

  for (int p = 0; p < config.n_positions; ++p) {
    const RandomSource pos_rng = noise.child(static_cast<std::uint64_t>(p));
    for (int g = 0; g < config.n_gestures; ++g) {
      const std::vector<double> pattern = warped_pattern(
          patterns, g, warps[static_cast<std::size_t>(p)], config.position_distortion);
      const RandomSource gest_rng = pos_rng.child(static_cast<std::uint64_t>(g));
      for (int r = 0; r < config.n_reps; ++r) {
        const RandomSource rep_rng = gest_rng.child(static_cast<std::uint64_t>(r));
        for (int w = 0; w < config.windows_per_rep; ++w) {
          RandomSource rng = rep_rng.child(static_cast<std::uint64_t>(w));
          FeatureWindow window;
          window.position = p;
          window.gesture = g;
          window.repetition = r;
          window.window_index = w;
          window.mav.resize(static_cast<std::size_t>(config.n_channels));
          for (int ch = 0; ch < config.n_channels; ++ch) {
            window.mav[static_cast<std::size_t>(ch)] =
                pattern[static_cast<std::size_t>(ch)] *
                std::exp(config.emg_noise_sigma * rng.next_gaussian());
          }
          for (int axis = 0; axis < 3; ++axis) {
            window.accel[static_cast<std::size_t>(axis)] =
                orientations[static_cast<std::size_t>(p)][static_cast<std::size_t>(axis)] +
                config.accel_noise_sigma * rng.next_gaussian();
          }
          ds.windows.push_back(std::move(window));
        }
      }
    }
  }
  return ds;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

void save(const Dataset& dataset, const std::string& path) {
  const int channels = dataset.config.n_channels;
  std::ostringstream table;
  table << "position\tgesture\trepetition\twindow_index";
  for (int ch = 0; ch < channels; ++ch) table << "\tmav_" << ch;
  table << "\tacc_x\tacc_y\tacc_z\n";
  for (const auto& w : dataset.windows) {
    require(static_cast<int>(w.mav.size()) == channels, "window channel count mismatch on save");
    table << w.position << '\t' << w.gesture << '\t' << w.repetition << '\t' << w.window_index;
    for (double v : w.mav) table << '\t' << format_value(v);
    for (double v : w.accel) table << '\t' << format_value(v);
    table << '\n';
  }
  const std::string text = table.str();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(DataError::Kind::Io, "cannot open dataset file for writing: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw DataError(DataError::Kind::Io, "failed writing dataset file: " + path);

  char checksum[24];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
  nlohmann::json manifest = {
      {"format", "hdc-dataset"},
      {"version", 1},
      {"config", config_to_json(dataset.config)},
      {"n_windows", dataset.windows.size()},
      {"n_channels", channels},
      {"checksum_fnv1a64", checksum},
  };
  std::ofstream mout(path + ".manifest.json", std::ios::binary);
  if (!mout) throw DataError(DataError::Kind::Io, "cannot write manifest for: " + path);
  mout << manifest.dump(2) << "\n";
}

Dataset load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::Io, "cannot open dataset file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  Dataset ds;
  bool have_manifest = false;
  const std::string manifest_path = path + ".manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream min(manifest_path, std::ios::binary);
    nlohmann::json manifest;
    try {
      min >> manifest;
      ds.config = config_from_json(manifest.at("config"));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataError::Kind::MalformedFile,
                      std::string("malformed manifest: ") + e.what());
    }
    char checksum[24];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
    if (manifest.value("checksum_fnv1a64", "") != checksum) {
      throw DataError(DataError::Kind::ChecksumMismatch,
                      "dataset checksum does not match manifest: " + path);
    }
    have_manifest = true;
  }

  std::istringstream lines(text);
  std::string header;
  if (!std::getline(lines, header)) {
    throw DataError(DataError::Kind::MalformedFile, "dataset file is empty: " + path);
  }

  std::vector<std::string> columns;
  {
    std::istringstream hs(header);
    std::string name;
    while (std::getline(hs, name, '\t')) columns.push_back(name);
  }
  if (columns.size() < 8 || columns[0] != "position" || columns[1] != "gesture" ||
      columns[2] != "repetition" || columns[3] != "window_index") {
    throw DataError(DataError::Kind::MissingColumns, "dataset header missing label columns");
  }
  const int channels = static_cast<int>(columns.size()) - 7;
  for (int ch = 0; ch < channels; ++ch) {
    if (columns[static_cast<std::size_t>(4 + ch)] != "mav_" + std::to_string(ch)) {
      throw DataError(DataError::Kind::MissingColumns, "dataset header missing MAV columns");
    }
  }
  if (columns[columns.size() - 3] != "acc_x" || columns[columns.size() - 2] != "acc_y" ||
      columns.back() != "acc_z") {
    throw DataError(DataError::Kind::MissingColumns, "dataset header missing accelerometer columns");
  }
  if (!have_manifest) ds.config.n_channels = channels;
  if (have_manifest && ds.config.n_channels != channels) {
    throw DataError(DataError::Kind::MalformedFile, "manifest channel count disagrees with table");
  }

  const std::size_t expected_fields = columns.size();
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    FeatureWindow w;
    w.mav.reserve(static_cast<std::size_t>(channels));
    std::istringstream ls(line);
    std::string field;
    std::size_t index = 0;
    try {
      while (std::getline(ls, field, '\t')) {
        if (index == 0) w.position = std::stoi(field);
        else if (index == 1) w.gesture = std::stoi(field);
        else if (index == 2) w.repetition = std::stoi(field);
        else if (index == 3) w.window_index = std::stoi(field);
        else if (index < 4 + static_cast<std::size_t>(channels)) w.mav.push_back(std::stod(field));
        else if (index < expected_fields) w.accel[index - 4 - static_cast<std::size_t>(channels)] = std::stod(field);
        ++index;
      }
    } catch (const std::exception&) {
      throw DataError(DataError::Kind::MalformedFile,
                      "unparsable value at line " + std::to_string(line_no));
    }
    if (index != expected_fields) {
      throw DataError(DataError::Kind::MalformedFile,
                      "truncated row at line " + std::to_string(line_no));
    }
    ds.windows.push_back(std::move(w));
  }
  return ds;
}

}  // namespace hdc
