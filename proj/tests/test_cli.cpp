#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "acceptance.hpp"
#include "cli.hpp"
#include "vmrd/closed_forms.hpp"
#include "vmrd/csv.hpp"
#include "vmrd/infotheory.hpp"
#include "vmrd/problem_io.hpp"
#include "vmrd/solver.hpp"

using namespace vmrd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

class Scratch {
 public:
  Scratch() {
    dir_ = fs::temp_directory_path() / ("vmrd_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool close12(double printed, double exact) { return std::abs(printed - exact) <= 1e-11 * std::abs(exact) + 1e-300; }

}  // namespace

TEST_CASE("count") {
  Scratch tmp;
  const std::string rr = tmp.write("rr.json", problem_to_json(repeat_request_embedding(0.5)));
  const Outcome o = run({"count", rr});
  CHECK(o.code == cli::kOk);
  CHECK(o.out == "4096\n");
  CHECK(run({"count", "--problem", rr}).out == "4096\n");

  const Outcome capped = run({"count", rr, "--cap", "100"});
  CHECK(capped.code == cli::kCapError);
  CHECK(capped.out.empty());
  CHECK(!capped.err.empty());
}

TEST_CASE("solve writes one CSV row") {
  Scratch tmp;
  const ProblemSpec s = binary_hamming_problem(0.5);
  const std::string bh = tmp.write("bh.json", problem_to_json(s));

  const Outcome zero = run({"solve", bh, "--lambda-d", "0", "--lambda-g", "0"});
  REQUIRE(zero.code == cli::kOk);
  const CsvTable t = parse_csv(zero.out);
  CHECK(t.header.size() == 7);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][2] == 0.0);
  CHECK(t.rows[0][3] == 0.5);
  CHECK(t.rows[0][6] == 1.0);

  // Every printed number agrees with the library to 12 significant digits.
  const RdcPoint p = ba_solve(compute_pair_metrics(s, full_codetree_set(s)), 1.7, 0.0);
  const CsvTable u = parse_csv(run({"solve", bh, "--lambda-d", "1.7", "--lambda-g", "0"}).out);
  CHECK(close12(u.rows[0][0], 1.7));
  CHECK(close12(u.rows[0][2], p.rate));
  CHECK(close12(u.rows[0][3], p.distortion));
  CHECK(u.rows[0][5] == p.iterations);
}

TEST_CASE("usage and input errors") {
  Scratch tmp;
  const std::string bh = tmp.write("bh.json", problem_to_json(binary_hamming_problem(0.5)));

  const Outcome missing = run({"solve", bh, "--lambda-d", "1"});
  CHECK(missing.code == cli::kInputError);
  CHECK(missing.err.find("Usage") != std::string::npos);

  CHECK(run({}).code == cli::kInputError);
  CHECK(run({"frobnicate"}).code == cli::kInputError);
  CHECK(run({"count", tmp.path("absent.json")}).code == cli::kInputError);

  // Two broken invariants, one line each.
  ProblemSpec bad = binary_hamming_problem(0.5);
  bad.source.px = Eigen::Vector2d(0.3, 0.3);
  bad.metrics.d[1] = -1.0;
  const Outcome invalid = run({"count", tmp.write("bad.json", problem_to_json(bad))});
  CHECK(invalid.code == cli::kInputError);
  CHECK(invalid.err.find("source.px") != std::string::npos);
  CHECK(invalid.err.find("distortion") != std::string::npos);
  CHECK(std::count(invalid.err.begin(), invalid.err.end(), '\n') >= 2);

  CHECK(run({"count", tmp.write("junk.json", "{not json")}).code == cli::kInputError);
  CHECK(run({"target", bh}).code == cli::kInputError);
  // An omitted target is slack.
  CHECK(run({"target", bh, "--target-d", "0.1"}).code == cli::kOk);
}

TEST_CASE("infeasible target and unconverged solve") {
  Scratch tmp;
  const std::string bh = tmp.write("bh.json", problem_to_json(binary_hamming_problem(0.5)));
  CHECK(run({"target", bh, "--target-d", "0.1", "--target-g", "0"}).code == cli::kOk);
  const std::string rr = tmp.write("rr.json", problem_to_json(repeat_request_embedding(0.5)));
  const Outcome slow = run({"solve", rr, "--lambda-d", "6", "--lambda-g", "1", "--max-iter", "1"});
  CHECK(slow.code == cli::kNumericalError);
  const std::string ff = tmp.write("ff.json", problem_to_json(feedforward_embedding(0.25, 0.25)));
  CHECK(run({"target", ff, "--target-d", "0.1", "--target-g", "0"}).code == cli::kOk);
  ProblemSpec costly = binary_hamming_problem(0.5);
  costly.metrics.gamma.setOnes();
  const std::string c = tmp.write("costly.json", problem_to_json(costly));
  const Outcome inf = run({"target", c, "--target-d", "0.1", "--target-g", "0.5"});
  CHECK(inf.code == cli::kInputError);
  CHECK(inf.err.find("cost target") != std::string::npos);
}

TEST_CASE("target matches the closed form") {
  Scratch tmp;
  const std::string ff = tmp.write("ff.json", problem_to_json(feedforward_embedding(0.25, 0.25)));
  const Outcome o = run({"target", ff, "--target-d", "0.1", "--target-g", "0"});
  REQUIRE(o.code == cli::kOk);
  const CsvTable t = parse_csv(o.out);
  CHECK(std::abs(t.rows[0][2] - 0.342282) < 1e-2);
  CHECK(t.rows[0][3] <= 0.1 + 1e-9);
}

TEST_CASE("surface output is deterministic") {
  Scratch tmp;
  const std::string ff = tmp.write("ff.json", problem_to_json(feedforward_embedding(0.25, 0.25)));
  const std::vector<std::string> args{"surface", ff, "--grid", "0.5", "8", "5", "--grid", "0.25", "1", "3"};
  const Outcome a = run(args), b = run(args);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const Outcome c = run(threaded);
  REQUIRE(a.code == cli::kOk);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const CsvTable t = parse_csv(a.out);
  CHECK(t.rows.size() == 15);
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    CHECK(std::make_pair(t.rows[k - 1][0], t.rows[k - 1][1]) < std::make_pair(t.rows[k][0], t.rows[k][1]));
  }
  const Outcome single = run({"surface", ff, "--grid", "1", "4", "3", "--lambda-g", "0.5"});
  CHECK(parse_csv(single.out).rows.size() == 3);
  CHECK(run({"surface", ff, "--grid", "1", "4"}).code == cli::kInputError);
}

TEST_CASE("reduce prints a distribution over ordinals") {
  Scratch tmp;
  const std::string rr = tmp.write("rr.json", problem_to_json(repeat_request_embedding(0.5)));
  const Outcome o = run({"reduce", rr, "--lambda-d", "4", "--lambda-g", "1"});
  REQUIRE(o.code == cli::kOk);
  const CsvTable t = parse_csv(o.out);
  CHECK(t.header == std::vector<std::string>{"codetree_ordinal", "probability"});
  CHECK(t.rows.size() <= 5);
  double total = 0.0;
  for (const auto& r : t.rows) {
    CHECK(r[0] >= 0.0);
    CHECK(r[0] < 4096.0);
    total += r[1];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(o.err.find("support") != std::string::npos);
}

TEST_CASE("restricted codetree sets") {
  Scratch tmp;
  const std::string rr = tmp.write("rr.json", problem_to_json(repeat_request_embedding(0.5)));
  const std::string list = tmp.write("trees.txt", "0\n5\n4095\n");
  const Outcome o = run({"solve", rr, "--lambda-d", "2", "--lambda-g", "0", "--codetrees", list});
  CHECK(o.code == cli::kOk);
  // A restricted set sidesteps the enumeration cap.
  CHECK(run({"solve", rr, "--lambda-d", "2", "--lambda-g", "0", "--codetrees", list, "--cap", "10"}).code ==
        cli::kOk);
  CHECK(run({"solve", rr, "--lambda-d", "2", "--lambda-g", "0", "--codetrees", tmp.write("x.txt", "9999\n")})
            .code == cli::kInputError);
}

TEST_CASE("closed forms") {
  const Outcome ff = run({"closed-form", "feedforward-example", "--p", "0.25", "--q", "0.25", "--target-d", "0.1"});
  CHECK(ff.code == cli::kOk);
  const CsvTable a = parse_csv(ff.out);
  CHECK(a.header == std::vector<std::string>{"rate"});
  CHECK(std::abs(a.rows[0][0] - 0.342282) < 1e-6);

  const CsvTable b = parse_csv(run({"closed-form", "repeat-request", "--epsilon", "0.5", "--target-d", "0.1"}).out);
  CHECK(b.header == std::vector<std::string>{"rate", "min_sufficient_cost"});
  CHECK(std::abs(b.rows[0][0] - 0.007262) < 1e-6);
  CHECK(b.rows[0][1] == 0.5);

  const CsvTable c = parse_csv(run({"closed-form", "classic-binary", "--p", "0.5", "--target-d", "0.1"}).out);
  CHECK(std::abs(c.rows[0][0] - 0.531004) < 1e-6);

  CHECK(run({"closed-form", "nonsense", "--p", "0.5", "--target-d", "0.1"}).code == cli::kInputError);
  CHECK(run({"closed-form", "classic-binary", "--p", "0.9", "--target-d", "0.1"}).code == cli::kInputError);
}

TEST_CASE("simulate") {
  Scratch tmp;
  const std::string bh = tmp.write("bh.json", problem_to_json(binary_hamming_problem(0.5)));
  const std::vector<std::string> args{"simulate", bh, "--target-d", "0.2", "--target-g", "0",
                                      "--m", "8", "--trials", "50", "--seed", "4"};
  const Outcome a = run(args);
  REQUIRE(a.code == cli::kOk);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "4"});
  CHECK(run(threaded).out == a.out);
  const CsvTable t = parse_csv(a.out);
  CHECK(t.header.size() == 9);
  CHECK(t.rows[0][1] == 8);
  CHECK(t.rows[0][2] == 50);
  CHECK(t.rows[0][8] == 4);
  CHECK(std::abs(t.rows[0][0] - (1.0 - binary_entropy(0.2))) < 1e-3);

  CHECK(run({"simulate", bh, "--target-d", "0.2", "--target-g", "0", "--rate", "0.5", "--m", "64"}).code ==
        cli::kCapError);
}

TEST_CASE("--out writes the file instead of stdout") {
  Scratch tmp;
  const std::string bh = tmp.write("bh.json", problem_to_json(binary_hamming_problem(0.5)));
  const std::string dest = tmp.path("out.csv");
  const Outcome o = run({"solve", bh, "--lambda-d", "1", "--lambda-g", "0", "--out", dest});
  CHECK(o.code == cli::kOk);
  CHECK(o.out.empty());
  CHECK(slurp(dest) == run({"solve", bh, "--lambda-d", "1", "--lambda-g", "0"}).out);
}

TEST_CASE("selftest runs the fast criteria") {
  const Outcome o = run({"selftest"});
  CHECK(o.code == cli::kOk);
  for (int id : {1, 2, 4, 5, 6, 7, 9}) {
    CHECK(o.out.find("criterion " + std::to_string(id) + " ") != std::string::npos);
  }
  CHECK(o.out.find("criterion 3 ") == std::string::npos);
  CHECK(o.out.find("criterion 8 ") == std::string::npos);
}

TEST_CASE("a wrong reference value fails the suite") {
  tools::AcceptanceOptions opt;
  opt.fast_only = true;
  opt.reference.example1_rate = 0.36;
  const auto results = tools::run_acceptance(opt);
  CHECK_FALSE(tools::all_passed(results));
  for (const auto& r : results) {
    if (r.id == 2) CHECK_FALSE(r.pass);
    if (r.id == 1) CHECK(r.pass);
  }
}
