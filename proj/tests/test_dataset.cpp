#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hdc/dataset.hpp"
#include "hdc/error.hpp"

using hdc::DataError;
using hdc::Dataset;
using hdc::GenConfig;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hdc_test_" + std::to_string(static_cast<unsigned>(::getpid())) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
}

GenConfig small_config() {
  GenConfig cfg;
  cfg.n_gestures = 4;
  cfg.n_positions = 5;
  cfg.n_reps = 2;
  cfg.windows_per_rep = 6;
  cfg.n_channels = 8;
  cfg.seed = 77;
  cfg.paired_positions = {{0, 4}};
  return cfg;
}

double angle_deg(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  return std::acos(std::clamp(d, -1.0, 1.0)) * 180.0 / 3.14159265358979323846;
}

}  // namespace

TEST_CASE("default config yields the full protocol grid") {
  GenConfig cfg;
  const Dataset ds = hdc::generate(cfg);
  CHECK(ds.windows.size() == 13u * 8u * 3u * 80u);  // 24960
  CHECK(ds.config == cfg);

  // protocol ordering: position, then gesture, then repetition, then window
  const auto& w0 = ds.windows[0];
  CHECK(w0.position == 0);
  CHECK(w0.gesture == 0);
  CHECK(w0.repetition == 0);
  CHECK(w0.window_index == 0);
  CHECK(ds.windows[79].window_index == 79);
  CHECK(ds.windows[80].repetition == 1);
  CHECK(ds.windows.back().position == 7);
  CHECK(ds.windows.back().gesture == 12);

  for (std::size_t i = 0; i < ds.windows.size(); i += 997) {
    const auto& w = ds.windows[i];
    REQUIRE(w.mav.size() == 64);
    for (double v : w.mav) REQUIRE(v >= 0.0);
  }
}

TEST_CASE("generation is deterministic in the config") {
  const GenConfig cfg = small_config();
  const Dataset a = hdc::generate(cfg);
  const Dataset b = hdc::generate(cfg);
  REQUIRE(a.windows.size() == b.windows.size());
  for (std::size_t i = 0; i < a.windows.size(); ++i) {
    CHECK(a.windows[i].mav == b.windows[i].mav);
    CHECK(a.windows[i].accel == b.windows[i].accel);
  }

  GenConfig other = cfg;
  other.seed = 78;
  const Dataset c = hdc::generate(other);
  CHECK(c.windows[0].mav != a.windows[0].mav);
}

TEST_CASE("accelerometer readings stay near the unit sphere") {
  GenConfig cfg = small_config();
  cfg.accel_noise_sigma = 0.01;
  const Dataset ds = hdc::generate(cfg);
  int near = 0;
  for (const auto& w : ds.windows) {
    const double norm = std::sqrt(w.accel[0] * w.accel[0] + w.accel[1] * w.accel[1] +
                                  w.accel[2] * w.accel[2]);
    near += std::abs(norm - 1.0) < 0.06;
  }
  CHECK(near >= static_cast<int>(ds.windows.size() * 99 / 100));
}

TEST_CASE("position orientations separate except for declared pairs") {
  GenConfig cfg;
  const auto orients = hdc::position_orientations(cfg);
  REQUIRE(orients.size() == 8);
  for (const auto& o : orients) {
    const double norm = std::sqrt(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (std::size_t i = 0; i < orients.size(); ++i) {
    for (std::size_t j = i + 1; j < orients.size(); ++j) {
      const double deg = angle_deg(orients[i], orients[j]);
      if (i == 0 && j == 4) {
        CHECK(deg < 4.5);  // two 2-degree tilts of a shared anchor
        CHECK(deg > 0.0);
      } else {
        CHECK(deg >= 25.0 - 1e-9);
      }
    }
  }
}

TEST_CASE("save then load round trips") {
  const TempDir tmp;
  const GenConfig cfg = small_config();
  const Dataset ds = hdc::generate(cfg);
  const std::string path = tmp.file("ds.tsv");
  hdc::save(ds, path);
  CHECK(std::filesystem::exists(path + ".manifest.json"));

  const Dataset back = hdc::load(path);
  CHECK(back.config == cfg);
  REQUIRE(back.windows.size() == ds.windows.size());
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    const auto& a = ds.windows[i];
    const auto& b = back.windows[i];
    CHECK(a.position == b.position);
    CHECK(a.gesture == b.gesture);
    CHECK(a.repetition == b.repetition);
    CHECK(a.window_index == b.window_index);
    REQUIRE(a.mav.size() == b.mav.size());
    for (std::size_t c = 0; c < a.mav.size(); ++c) {
      CHECK(b.mav[c] == doctest::Approx(a.mav[c]).epsilon(1e-5));
    }
    for (int axis = 0; axis < 3; ++axis) {
      CHECK(b.accel[static_cast<std::size_t>(axis)] ==
            doctest::Approx(a.accel[static_cast<std::size_t>(axis)]).epsilon(1e-5));
    }
  }
}

TEST_CASE("saving twice writes identical bytes") {
  const TempDir tmp;
  const Dataset ds = hdc::generate(small_config());
  hdc::save(ds, tmp.file("a.tsv"));
  hdc::save(ds, tmp.file("b.tsv"));
  CHECK(slurp(tmp.file("a.tsv")) == slurp(tmp.file("b.tsv")));
  CHECK(slurp(tmp.file("a.tsv.manifest.json")) == slurp(tmp.file("b.tsv.manifest.json")));
}

TEST_CASE("corrupted table fails the checksum") {
  const TempDir tmp;
  const std::string path = tmp.file("ds.tsv");
  hdc::save(hdc::generate(small_config()), path);

  std::string bytes = slurp(path);
  const std::size_t pos = bytes.size() / 2;
  bytes[pos] = bytes[pos] == '1' ? '2' : '1';
  spit(path, bytes);

  CHECK_THROWS_AS(hdc::load(path), DataError);
  try {
    hdc::load(path);
  } catch (const DataError& e) {
    CHECK(e.kind() == DataError::Kind::ChecksumMismatch);
  }
}

TEST_CASE("malformed tables raise distinct kinds") {
  const TempDir tmp;
  const std::string path = tmp.file("ds.tsv");
  hdc::save(hdc::generate(small_config()), path);
  const std::string good = slurp(path);

  SUBCASE("truncated row without a manifest") {
    const std::size_t cut = good.rfind('\t');
    spit(path, good.substr(0, cut));
    std::filesystem::remove(path + ".manifest.json");
    try {
      hdc::load(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind() == DataError::Kind::MalformedFile);
    }
  }

  SUBCASE("missing column") {
    std::filesystem::remove(path + ".manifest.json");
    std::string mangled = good;
    const std::size_t at = mangled.find("acc_x");
    mangled.replace(at, 5, "acc_q");
    spit(path, mangled);
    try {
      hdc::load(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind() == DataError::Kind::MissingColumns);
    }
  }

  SUBCASE("unparsable value") {
    std::filesystem::remove(path + ".manifest.json");
    std::string mangled = good;
    const std::size_t cut = mangled.rfind('\t');
    mangled.replace(cut + 1, mangled.size() - cut - 1, "xyz\n");
    spit(path, mangled);
    try {
      hdc::load(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind() == DataError::Kind::MalformedFile);
    }
  }

  SUBCASE("malformed manifest") {
    spit(path + ".manifest.json", "{not json");
    try {
      hdc::load(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind() == DataError::Kind::MalformedFile);
    }
  }

  SUBCASE("missing file") {
    try {
      hdc::load(tmp.file("nope.tsv"));
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind() == DataError::Kind::Io);
    }
  }
}

TEST_CASE("loading without a manifest assumes the default config") {
  const TempDir tmp;
  const std::string path = tmp.file("ds.tsv");
  GenConfig cfg = small_config();
  cfg.n_channels = 64;  // must match the default for the bare-table path
  hdc::save(hdc::generate(cfg), path);
  std::filesystem::remove(path + ".manifest.json");
  const Dataset ds = hdc::load(path);
  CHECK(ds.config == GenConfig{});
  CHECK(ds.windows.size() == 4u * 5u * 2u * 6u);
}

TEST_CASE("config validation") {
  GenConfig cfg = small_config();
  cfg.position_distortion = 1.5;
  CHECK_THROWS_AS(hdc::generate(cfg), hdc::ContractViolation);
  cfg.position_distortion = -0.1;
  CHECK_THROWS_AS(hdc::generate(cfg), hdc::ContractViolation);

  cfg = small_config();
  cfg.n_gestures = 0;
  CHECK_THROWS_AS(hdc::generate(cfg), hdc::ContractViolation);

  cfg = small_config();
  cfg.paired_positions = {{0, 0}};
  CHECK_THROWS_AS(hdc::generate(cfg), hdc::ContractViolation);
  cfg.paired_positions = {{0, 9}};
  CHECK_THROWS_AS(hdc::generate(cfg), hdc::ContractViolation);
  cfg.paired_positions = {{-1, 2}};
  CHECK_THROWS_AS(hdc::generate(cfg), hdc::ContractViolation);
}

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(hdc::fnv1a64("", 0) == 0xcbf29ce484222325ULL);
  CHECK(hdc::fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(hdc::fnv1a64("foobar", 6) == 0x85944171f73967e8ULL);
}
