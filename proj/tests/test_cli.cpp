#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() /
          ("hdc_cli_" + std::to_string(static_cast<unsigned>(::getpid())) + "_" +
           std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run_cli(const std::string& args, const std::string& stdout_path = "") {
  std::string cmd = std::string(HDC_CLI_PATH) + " " + args;
  cmd += stdout_path.empty() ? " >/dev/null" : " >" + stdout_path;
  cmd += " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// small enough to keep every invocation under a second
const char* kGenConfig = R"({
  "n_gestures": 4, "n_positions": 2, "n_reps": 2, "windows_per_rep": 10,
  "n_channels": 8, "paired_positions": [], "seed": 3
})";
const char* kTrainConfig = R"({"dim": 2000})";

struct Workbench {
  Workspace ws;
  std::string dataset;

  Workbench() {
    write_file(ws.path("gen.json"), kGenConfig);
    write_file(ws.path("train.json"), kTrainConfig);
    dataset = ws.path("data.tsv");
    REQUIRE(run_cli("datagen --config " + ws.path("gen.json") + " --out " + dataset) == 0);
  }
};

}  // namespace

TEST_CASE("datagen writes byte-identical datasets for one config") {
  const Workspace ws;
  write_file(ws.path("gen.json"), kGenConfig);
  CHECK(run_cli("datagen --config " + ws.path("gen.json") + " --out " + ws.path("a.tsv")) == 0);
  CHECK(run_cli("datagen --config " + ws.path("gen.json") + " --out " + ws.path("b.tsv")) == 0);
  CHECK(slurp(ws.path("a.tsv")) == slurp(ws.path("b.tsv")));
  CHECK(slurp(ws.path("a.tsv.manifest.json")) == slurp(ws.path("b.tsv.manifest.json")));

  // the --seed flag overrides the config seed
  CHECK(run_cli("datagen --config " + ws.path("gen.json") + " --seed 9 --out " +
                ws.path("c.tsv")) == 0);
  CHECK(slurp(ws.path("a.tsv")) != slurp(ws.path("c.tsv")));
}

TEST_CASE("train, eval and footprint round trip through the shell") {
  const Workbench wb;
  const std::string model = wb.ws.path("m.hdcm");
  REQUIRE(run_cli("train --arch ctx-ortho --dataset " + wb.dataset + " --model " + model +
                  " --config " + wb.ws.path("train.json") + " --seed 1 --out " +
                  wb.ws.path("train.json.out")) == 0);
  CHECK(fs::exists(model));

  const json train_report = json::parse(slurp(wb.ws.path("train.json.out")));
  CHECK(train_report.at("command") == "train");
  CHECK(train_report.at("result").at("n_windows") == 4 * 2 * 2 * 10);
  CHECK(train_report.at("result").at("n_samples") == 4 * 2 * 2 * 6);

  // training data evaluates nearly perfectly
  REQUIRE(run_cli("eval --model " + model + " --dataset " + wb.dataset + " --out " +
                  wb.ws.path("eval.json")) == 0);
  const json eval_report = json::parse(slurp(wb.ws.path("eval.json")));
  const double acc = eval_report.at("result").at("overall_accuracy").get<double>();
  CHECK(acc > 0.9);
  CHECK(acc <= 1.0);
  CHECK(eval_report.at("result").at("n_samples") == 96);

  // eval with no --out prints the payload on stdout
  REQUIRE(run_cli("eval --model " + model + " --dataset " + wb.dataset,
                  wb.ws.path("stdout.json")) == 0);
  const json from_stdout = json::parse(slurp(wb.ws.path("stdout.json")));
  CHECK(from_stdout.at("result").at("overall_accuracy").get<double>() == acc);

  REQUIRE(run_cli("footprint --model " + model + " --out " + wb.ws.path("fp.json")) == 0);
  const json fp = json::parse(slurp(wb.ws.path("fp.json")));
  const auto result = fp.at("result");
  CHECK(result.at("total_bits").get<long long>() ==
        result.at("prototype_bits").get<long long>() +
            result.at("position_model_bits").get<long long>());
  CHECK(result.at("prototype_bits") == 4 * 2000);

  REQUIRE(run_cli("footprint --model " + model + " --count-memories --out " +
                  wb.ws.path("fpm.json")) == 0);
  const json fpm = json::parse(slurp(wb.ws.path("fpm.json")));
  CHECK(fpm.at("result").at("item_memory_bits") == 8 * 2000);
  CHECK(fpm.at("result").at("context_memory_bits") == 2 * 2000);
}

TEST_CASE("crossval reports a sane accuracy and echoes its config") {
  const Workbench wb;
  REQUIRE(run_cli("crossval --arch dual --dataset " + wb.dataset +
                  " --folds 3 --seed 1 --config " + wb.ws.path("train.json") + " --out " +
                  wb.ws.path("cv.json")) == 0);
  const json report = json::parse(slurp(wb.ws.path("cv.json")));
  CHECK(report.at("command") == "crossval");
  CHECK(report.at("config").at("arch") == "dual");
  CHECK(report.at("config").at("folds") == 3);
  CHECK(report.at("config").at("granularity") == "sample");
  CHECK(report.at("config").at("train").at("dim") == 2000);
  const double acc = report.at("result").at("overall_accuracy").get<double>();
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(report.at("result").at("fold_accuracies").size() == 3);
}

TEST_CASE("crossval output is byte-identical across thread counts") {
  const Workbench wb;
  for (int threads : {1, 2, 8}) {
    REQUIRE(run_cli("crossval --arch ctx-cim --dataset " + wb.dataset +
                    " --folds 3 --seed 1 --config " + wb.ws.path("train.json") +
                    " --threads " + std::to_string(threads) + " --out " +
                    wb.ws.path("cv" + std::to_string(threads) + ".json")) == 0);
  }
  const std::string one = slurp(wb.ws.path("cv1.json"));
  CHECK(one == slurp(wb.ws.path("cv2.json")));
  CHECK(one == slurp(wb.ws.path("cv8.json")));
}

TEST_CASE("margin-sim emits the full grid in both formats") {
  const Workspace ws;
  write_file(ws.path("margin.json"),
             R"({"dim": 500, "n_classes": 4, "context_counts": [1, 3],
                 "d0_grid": [0.1, 0.2], "n_trials": 1, "seed": 5})");

  for (int threads : {1, 2, 8}) {
    REQUIRE(run_cli("margin-sim --config " + ws.path("margin.json") + " --threads " +
                    std::to_string(threads) + " --out " +
                    ws.path("m" + std::to_string(threads) + ".csv")) == 0);
  }
  const std::string csv = slurp(ws.path("m1.csv"));
  CHECK(csv == slurp(ws.path("m2.csv")));
  CHECK(csv == slurp(ws.path("m8.csv")));

  std::istringstream lines(csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 1 + 2 * 2 * 2);
  CHECK(rows[0] == "n_contexts,d0,mode,d_retrieve,d_wrong,margin,stderr");

  REQUIRE(run_cli("margin-sim --config " + ws.path("margin.json") + " --format json --out " +
                  ws.path("m.json")) == 0);
  const json out = json::parse(slurp(ws.path("m.json")));
  CHECK(out.at("command") == "margin-sim");
  CHECK(out.at("result").size() == 8);
  CHECK(out.at("result").at(0).at("n_contexts") == 1);
  CHECK(out.at("config").at("n_classes") == 4);
}

TEST_CASE("update rejects dual models but extends the others") {
  const Workbench wb;
  const std::string direct = wb.ws.path("direct.hdcm");
  REQUIRE(run_cli("train --arch direct --dataset " + wb.dataset + " --model " + direct +
                  " --config " + wb.ws.path("train.json") + " --seed 1") == 0);
  CHECK(run_cli("update --model " + direct + " --dataset " + wb.dataset + " --model-out " +
                wb.ws.path("updated.hdcm") + " --out " + wb.ws.path("up.json")) == 0);
  const json up = json::parse(slurp(wb.ws.path("up.json")));
  // every sample was added twice: once in training, once in the update
  CHECK(up.at("result").at("n_added_total") == 2 * 96);
  CHECK(fs::exists(wb.ws.path("updated.hdcm")));

  const std::string dual = wb.ws.path("dual.hdcm");
  REQUIRE(run_cli("train --arch dual --dataset " + wb.dataset + " --model " + dual +
                  " --config " + wb.ws.path("train.json") + " --seed 1") == 0);
  CHECK(run_cli("update --model " + dual + " --dataset " + wb.dataset) == 3);
}

TEST_CASE("context-matrix tabulates the position geometry") {
  const Workspace ws;
  write_file(ws.path("gen8.json"),
             R"({"n_gestures": 2, "n_positions": 8, "n_reps": 1, "windows_per_rep": 6,
                 "n_channels": 8, "seed": 6})");
  const std::string dataset = ws.path("d8.tsv");
  REQUIRE(run_cli("datagen --config " + ws.path("gen8.json") + " --out " + dataset) == 0);

  write_file(ws.path("cm.json"), R"({"dim": 2000})");
  REQUIRE(run_cli("context-matrix --dataset " + dataset + " --seed 2 --config " +
                  ws.path("cm.json") + " --out " + ws.path("cm.out.json")) == 0);
  const json out = json::parse(slurp(ws.path("cm.out.json")));
  const auto distances = out.at("result").at("distances");
  REQUIRE(distances.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(distances.at(i).at(i).get<double>() == 0.0);
  }
  // the generator keeps its default {0, 4} pairing: nearly shared contexts
  CHECK(distances.at(0).at(4).get<double>() <
        distances.at(0).at(1).get<double>());

  REQUIRE(run_cli("context-matrix --dataset " + dataset + " --seed 2 --config " +
                  ws.path("cm.json") + " --format csv --out " + ws.path("cm.csv")) == 0);
  const std::string csv = slurp(ws.path("cm.csv"));
  CHECK(csv.rfind("position,p0,p1,", 0) == 0);
}

TEST_CASE("failures map to distinct exit codes") {
  const Workbench wb;

  SUBCASE("usage errors exit 1") {
    CHECK(run_cli("train --no-such-flag") == 1);
    CHECK(run_cli("train --arch warp --dataset " + wb.dataset) == 1);
    CHECK(run_cli("nonsense-command") == 1);

    write_file(wb.ws.path("bad.json"), R"({"dim": 2000, "wat": 1})");
    CHECK(run_cli("crossval --arch direct --dataset " + wb.dataset + " --config " +
                  wb.ws.path("bad.json")) == 1);

    write_file(wb.ws.path("notjson.json"), "{nope");
    CHECK(run_cli("train --arch direct --dataset " + wb.dataset + " --config " +
                  wb.ws.path("notjson.json")) == 1);
  }

  SUBCASE("data errors exit 2") {
    CHECK(run_cli("crossval --arch direct --dataset " + wb.ws.path("missing.tsv")) == 2);

    write_file(wb.ws.path("corrupt.hdcm"), "HDCMgarbage");
    CHECK(run_cli("eval --model " + wb.ws.path("corrupt.hdcm") + " --dataset " + wb.dataset) ==
          2);
  }

  SUBCASE("contract violations exit 3") {
    CHECK(run_cli("crossval --arch direct --dataset " + wb.dataset + " --folds 1 --config " +
                  wb.ws.path("train.json")) == 3);
  }
}
