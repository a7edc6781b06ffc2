/*
 * Copyright 2026 The fairspectral Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>

#include "doctest.h"
#include "run_config.hpp"

using namespace fairspectral::cli;

TEST_SUITE("run config") {

TEST_CASE("ini parsing") {
  const IniDocument d = ParseIni(
      "# leading comment\n"
      "[train]\n"
      "  k = 4   ; trailing comment\n"
      "lr=0.05\n"
      "\n"
      "[gen]\n"
      "sbm.n = 300\n");
  CHECK(d.at("train").at("k") == "4");
  CHECK(d.at("train").at("lr") == "0.05");
  CHECK(d.at("gen").at("sbm.n") == "300");
}

TEST_CASE("ini syntax errors") {
  CHECK_THROWS_AS(ParseIni("[train\n"), ConfigError);
  CHECK_THROWS_AS(ParseIni("[train]\nk\n"), ConfigError);
  CHECK_THROWS_AS(ParseIni("[train]\n= 3\n"), ConfigError);
  CHECK_THROWS_AS(ParseIni("[train]\nk = 1\nk = 2\n"), ConfigError);
  CHECK_THROWS_AS(ReadIniFile("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("defaults, file values and overrides stack in order") {
  const IniDocument d = ParseIni("[train]\nk = 4\nlr = 0.05\n");
  const RunConfig c = RunConfig::Resolve("train", d, {"k=6"});
  CHECK(c.count("k") == 6);
  CHECK(c.real("lr") == 0.05);
  CHECK(c.real("weight_decay") == 5e-4);
  CHECK(c.str("model") == "fugnn");
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_AS(RunConfig::Resolve("train", ParseIni("[train]\nkk = 4\n"), {}), ConfigError);
  CHECK_THROWS_AS(RunConfig::Resolve("train", {}, {"kk=4"}), ConfigError);
  CHECK_THROWS_AS(RunConfig::Resolve("train", {}, {"k"}), ConfigError);
  CHECK_THROWS_AS(RunConfig::Resolve("train", ParseIni("k = 4\n"), {}), ConfigError);
  CHECK_THROWS_AS(RunConfig::Resolve("train", ParseIni("[trian]\nk = 4\n"), {}), ConfigError);
  // A typo in another command's section is caught too.
  CHECK_THROWS_AS(RunConfig::Resolve("train", ParseIni("[gen]\nsbm.nn = 4\n"), {}), ConfigError);
  CHECK_NOTHROW(RunConfig::Resolve("train", ParseIni("[gen]\nsbm.n = 4\n"), {}));
  CHECK_THROWS_AS(RunConfig::Resolve("fly", {}, {}), ConfigError);
}

TEST_CASE("typed getters") {
  const RunConfig c = RunConfig::Resolve(
      "train", {}, {"k=abc", "lr=fast", "seeds=0, 2,5", "epochs=-3"});
  CHECK_THROWS_AS(c.count("k"), ConfigError);
  CHECK_THROWS_AS(c.real("lr"), ConfigError);
  CHECK_THROWS_AS(c.flag("lr"), ConfigError);
  const RunConfig a = RunConfig::Resolve("analyze", {}, {"lemma1.even_only=yes"});
  CHECK(a.flag("lemma1.even_only"));
  CHECK(c.counts("seeds") == std::vector<std::size_t>{0, 2, 5});
  CHECK_THROWS_AS(c.count("epochs"), ConfigError);
  CHECK_THROWS_AS(c.str("missing"), ConfigError);
}

TEST_CASE("lists accept n as a placeholder") {
  const RunConfig c = RunConfig::Resolve("bench", {}, {"ks=1,2,n"});
  CHECK(c.counts("ks", 2000) == std::vector<std::size_t>{1, 2, 2000});
  const RunConfig e = RunConfig::Resolve("bench", {}, {"ks= , "});
  CHECK_THROWS_AS(e.counts("ks"), ConfigError);
}

TEST_CASE("canonical text resolves to itself and hashes stably") {
  const RunConfig a = RunConfig::Resolve("eig", ParseIni("[eig]\nk = 3\n"), {"tol=1e-9"});
  const RunConfig b = RunConfig::Resolve("eig", ParseIni(a.Canonical()), {});
  CHECK(a.Canonical() == b.Canonical());
  CHECK(a.Hash() == b.Hash());
  CHECK(a.Hash().size() == 16);
  const RunConfig c = RunConfig::Resolve("eig", {}, {"k=3"});
  CHECK(c.Hash() != a.Hash());
}

TEST_CASE("every command has a schema with help text") {
  const auto cmds = Commands();
  for (const char* name : {"gen", "eig", "analyze", "train", "bench"}) {
    CHECK(std::find(cmds.begin(), cmds.end(), name) != cmds.end());
    for (const KeySpec& k : SchemaFor(name)) CHECK_FALSE(k.help.empty());
  }
}

}  // TEST_SUITE
