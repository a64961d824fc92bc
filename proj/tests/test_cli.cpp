/*
 * Copyright 2026 The pihte Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "pihte/cli.hpp"
#include "pihte/errors.hpp"

using namespace pihte;
using nlohmann::json;

namespace {

const std::string kFixtures = PIHTE_FIXTURE_DIR;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "pihte");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

// A scratch file under the temp directory, removed with the object.
struct TempFile {
  std::filesystem::path path;
  TempFile(const std::string& name, const std::string& text)
      : path(std::filesystem::temp_directory_path() / ("pihte_test_" + name)) {
    std::ofstream(path) << text;
  }
  ~TempFile() { std::filesystem::remove(path); }
  std::string str() const { return path.string(); }
};

std::string napkin_data(std::size_t rows) {
  const Run r = run({"simulate", "--graph", fixture("napkin.graph"), "--rows", std::to_string(rows), "--seed", "3"});
  REQUIRE(r.code == kExitOk);
  return r.out;
}

// Sets an environment variable for the lifetime of the object.
struct ScopedEnv {
  std::string name;
  ScopedEnv(const std::string& n, const std::string& value) : name(n) { setenv(n.c_str(), value.c_str(), 1); }
  ~ScopedEnv() { unsetenv(name.c_str()); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("analyze chain-7") {
    const Run r = run({"analyze", "--graph", fixture("chain7.graph"), "--estimand-file", fixture("chain7.est")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("hw=1 w=6") != std::string::npos);
    CHECK(r.out.find("depth 1") != std::string::npos);
  }

  TEST_CASE("analyze napkin as JSON") {
    const Run r = run({"analyze", "--graph", fixture("napkin.graph"), "--estimand-file", fixture("napkin.est"),
                       "--format", "json"});
    REQUIRE(r.code == kExitOk);
    const json j = json::parse(r.out);
    CHECK(j["depth"] == 2);
    for (const auto& lv : j["levels"]) CHECK(lv["hyperwidth"] == 1);
  }

  TEST_CASE("analyze with a decomposition file") {
    const Run r = run({"analyze", "--graph", fixture("cone_cloud.graph"), "--estimand-file",
                       fixture("cone_cloud.est"), "--decomposition", fixture("cone_cloud_hw2.td")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("hw=2 w=14") != std::string::npos);
  }

  TEST_CASE("malformed estimand exits with an input error") {
    const Run r = run({"analyze", "--graph", fixture("napkin.graph"), "--estimand", "sum[W](P(Y|X,W) P(W)"});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("position 20") != std::string::npos);
  }

  TEST_CASE("input errors") {
    CHECK(run({}).code == kExitInput);
    CHECK(run({"analyze", "--graph", fixture("missing.graph"), "--estimand", "P(A)"}).code == kExitInput);
    CHECK(run({"estimate", "--format", "table"}).code == kExitInput);
    CHECK(run({"bench", "--graph", fixture("chain99.graph"), "--estimand-file", fixture("chain99.est"), "--sizes",
               ""})
              .code == kExitInput);
    CHECK(run({"estimate", "--graph", fixture("napkin.graph"), "--estimand-file", fixture("napkin.est")}).code ==
          kExitInput);
  }

  TEST_CASE("estimate napkin") {
    const TempFile data("napkin.csv", napkin_data(400));
    const Run r = run({"estimate", "--graph", fixture("napkin.graph"), "--estimand-file", fixture("napkin.est"),
                       "--data", data.str(), "--no-timing"});
    REQUIRE(r.code == kExitOk);
    const json j = json::parse(r.out);
    CHECK(j["outcome"] == json({"Y"}));
    CHECK(j["do_vars"] == json({"X"}));
    CHECK(j["result"]["scope"] == json({"R", "X", "Y"}));
    CHECK(j["renormalized"] == true);
    const Run again = run({"estimate", "--graph", fixture("napkin.graph"), "--estimand-file", fixture("napkin.est"),
                           "--data", data.str(), "--no-timing"});
    CHECK(again.out == r.out);
  }

  TEST_CASE("estimate with an intervention") {
    const TempFile data("napkin_do.csv", napkin_data(400));
    const Run r = run({"estimate", "--graph", fixture("napkin.graph"), "--estimand-file", fixture("napkin.est"),
                       "--data", data.str(), "--do", "X=1", "--no-timing"});
    REQUIRE(r.code == kExitOk);
    const json j = json::parse(r.out);
    CHECK(j["do_assignment"]["X"] == 1);
    for (const auto& row : j["result"]["rows"]) CHECK(row[1] == 1);
    CHECK(run({"estimate", "--graph", fixture("napkin.graph"), "--estimand-file", fixture("napkin.est"), "--data",
               data.str(), "--do", "X"})
              .code == kExitInput);
  }

  TEST_CASE("estimate as CSV") {
    const TempFile data("napkin_csv.csv", napkin_data(100));
    const Run r = run({"estimate", "--graph", fixture("napkin.graph"), "--estimand-file", fixture("napkin.est"),
                       "--data", data.str(), "--format", "csv"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("samples,time,max_table_size,t,density\n100,", 0) == 0);
  }

  TEST_CASE("nonzero over zero exits with a numeric error") {
    const TempFile graph("ab.graph", "var A 2\nvar B 2\n");
    const TempFile data("ab.csv", "A,B\n0,0\n1,0\n");
    const Run r = run({"estimate", "--graph", graph.str(), "--estimand", "P(A) / P(B)", "--data", data.str()});
    CHECK(r.code == kExitNumeric);
  }

  TEST_CASE("entry caps exit with a resource error") {
    const TempFile data("chain7_cap.csv", run({"simulate", "--graph", fixture("chain7.graph"), "--rows", "200",
                                               "--dist", "uniform"})
                                              .out);
    const std::vector<std::string> base = {"estimate", "--graph", fixture("chain7.graph"), "--estimand-file",
                                           fixture("chain7.est"), "--data", data.str()};
    auto capped = base;
    capped.insert(capped.end(), {"--max-entries", "20"});
    CHECK(run(capped).code == kExitResource);
    {
      const ScopedEnv env("PIHTE_MAX_ENTRIES", "20");
      CHECK(run(base).code == kExitResource);
    }
    CHECK(run(base).code == kExitOk);
  }

  TEST_CASE("oracle on random instances") {
    const Run r = run({"oracle", "--random", "100"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("agreed 100") != std::string::npos);
  }

  TEST_CASE("oracle tolerance zero reports a mismatch") {
    const TempFile data("napkin_oracle.csv", napkin_data(500));
    const std::vector<std::string> base = {"oracle", "--graph", fixture("napkin.graph"), "--estimand-file",
                                           fixture("napkin.est"), "--data", data.str()};
    CHECK(run(base).code == kExitOk);
    auto strict = base;
    strict.insert(strict.end(), {"--tolerance", "0"});
    const Run r = run(strict);
    // Rounding differs between the two evaluators on some cell.
    CHECK(r.code == kExitMismatch);
    auto tiny = base;
    tiny.insert(tiny.end(), {"--dense-limit", "4"});
    CHECK(run(tiny).code == kExitResource);
  }

  TEST_CASE("simulate interventional truth") {
    const Run r = run({"simulate", "--graph", fixture("napkin.graph"), "--target", "Y", "--do", "X=0", "--format",
                       "json"});
    REQUIRE(r.code == kExitOk);
    const json j = json::parse(r.out);
    CHECK(j["scope"] == json({"X", "Y"}));
    double total = 0;
    for (const auto& row : j["rows"]) total += row[2].get<double>();
    CHECK(total == doctest::Approx(1.0));
  }

  TEST_CASE("bench rows per size") {
    const Run r = run({"bench", "--graph", fixture("chain99.graph"), "--estimand-file", fixture("chain99.est"),
                       "--sizes", "100,200", "--dist", "uniform"});
    REQUIRE(r.code == kExitOk);
    std::istringstream lines(r.out);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(lines, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].rfind("100,", 0) == 0);
    CHECK(rows[2].rfind("200,", 0) == 0);
  }

  TEST_CASE("assignment parsing") {
    CHECK(parse_assignment("X=1,Y=0") == std::map<std::string, State>{{"X", 1}, {"Y", 0}});
    CHECK_THROWS_AS(parse_assignment("X=1,X=0"), ParseError);
    CHECK_THROWS_AS(parse_assignment("X=-1"), ParseError);
  }
}
