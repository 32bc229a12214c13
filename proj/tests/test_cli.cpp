#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "cwrgeom/embedding_store.hpp"
#include "test_support.hpp"

using cwrgeom::Json;
using testing::TempDir;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(CWRGEOM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const std::filesystem::path& p) { return Json::parse(slurp(p)); }

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("metrics on an isotropic fixture") {
    TempDir dir;
    REQUIRE(run("synth --kind isotropic --seed 7 --output " + q(dir / "iso.emb")) == 0);
    REQUIRE(run("metrics --input " + q(dir / "iso.emb") + " --pairs 1000 --seed 1 --output " +
                q(dir / "m.json")) == 0);
    const auto j = read_json(dir / "m.json");
    CHECK(j["command"] == "metrics");
    CHECK(j["matrix"]["rows"] == 10000);
    CHECK(j["matrix"]["dims"] == 32);
    CHECK(std::abs(j["report"]["i_cos"].get<double>()) < 0.02);

    SUBCASE("identical runs give byte-identical reports") {
        REQUIRE(run("metrics --input " + q(dir / "iso.emb") + " --pairs 1000 --seed 1 --output " +
                    q(dir / "m2.json")) == 0);
        CHECK(slurp(dir / "m.json") == slurp(dir / "m2.json"));
    }
    SUBCASE("the offset counterpart is less isotropic") {
        REQUIRE(run("synth --kind isotropic --seed 7 --offset 10 --output " + q(dir / "off.emb")) == 0);
        REQUIRE(run("metrics --input " + q(dir / "off.emb") + " --output " + q(dir / "o.json")) == 0);
        const auto o = read_json(dir / "o.json");
        CHECK(o["report"]["i_cos"].get<double>() > 0.9);
        CHECK(o["report"]["i_pc"].get<double>() < j["report"]["i_pc"].get<double>());
    }
}

TEST_CASE("exit codes") {
    TempDir dir;
    CHECK(run("metrics --input " + q(dir / "missing.emb")) == 1);
    CHECK(run("metrics") == 2);
    CHECK(run("no-such-command") == 2);
    REQUIRE(run("synth --kind isotropic --rows 50 --dims 4 --output " + q(dir / "a.emb")) == 0);
    CHECK(run("metrics --input " + q(dir / "a.emb") + " --pairs 0") == 2);
    CHECK(run("outliers --input " + q(dir / "a.emb") + " --threshold-sigmas -1") == 2);
    CHECK(run("fit --input " + q(dir / "a.emb") + " --clusters 0 --output " + q(dir / "t.json")) == 2);
    CHECK(run("fit --input " + q(dir / "a.emb") + " --remove 5 --output " + q(dir / "t.json")) == 2);
    CHECK(run("sts --input " + q(dir / "a.emb") + " --sts " + q(dir / "a.sts") +
              " --setting sideways") == 2);

    std::ofstream(dir / "garbage.emb") << "not an embedding file";
    std::ofstream(dir / "garbage.emb.meta.jsonl");
    CHECK(run("metrics --input " + q(dir / "garbage.emb")) == 2);
}

TEST_CASE("fit, apply and measure") {
    TempDir dir;
    REQUIRE(run("synth --kind anisotropic --rows 3000 --seed 3 --output " + q(dir / "a.emb")) == 0);
    const std::string before_bytes = slurp(dir / "a.emb");
    REQUIRE(run("fit --input " + q(dir / "a.emb") + " --clusters 7 --remove 12 --seed 1 --output " +
                q(dir / "t.json")) == 0);
    REQUIRE(run("apply --input " + q(dir / "a.emb") + " --transform " + q(dir / "t.json") +
                " --output " + q(dir / "b.emb")) == 0);
    CHECK(slurp(dir / "a.emb") == before_bytes);

    REQUIRE(run("metrics --input " + q(dir / "a.emb") + " --output " + q(dir / "ma.json")) == 0);
    REQUIRE(run("metrics --input " + q(dir / "b.emb") + " --output " + q(dir / "mb.json")) == 0);
    const auto ma = read_json(dir / "ma.json"), mb = read_json(dir / "mb.json");
    CHECK(mb["report"]["i_pc"].get<double>() > ma["report"]["i_pc"].get<double>());
    CHECK(std::abs(mb["report"]["i_cos"].get<double>()) < 0.05);

    const auto info = read_json(dir / "b.emb.info.json");
    CHECK(info["provenance"].contains("isotropy_transform"));
    CHECK(info["provenance"]["isotropy_transform"].contains("transform_file"));

    SUBCASE("refitting with the same seed reproduces the transform file") {
        REQUIRE(run("fit --input " + q(dir / "a.emb") + " --clusters 7 --remove 12 --seed 1 --output " +
                    q(dir / "t2.json")) == 0);
        CHECK(slurp(dir / "t.json") == slurp(dir / "t2.json"));
    }
    SUBCASE("applying to a different width is a validation error") {
        REQUIRE(run("synth --kind isotropic --rows 100 --dims 16 --output " + q(dir / "narrow.emb")) == 0);
        CHECK(run("apply --input " + q(dir / "narrow.emb") + " --transform " + q(dir / "t.json") +
                  " --output " + q(dir / "x.emb")) == 2);
        CHECK_FALSE(std::filesystem::exists(dir / "x.emb"));
    }
}

TEST_CASE("outliers flags the planted dimension") {
    TempDir dir;
    REQUIRE(run("synth --kind outliers --outlier-dims 5 --magnitude 10 --seed 2 --output " +
                q(dir / "o.emb")) == 0);
    REQUIRE(run("outliers --input " + q(dir / "o.emb") + " --samples 10000 --threshold-sigmas 3 --output " +
                q(dir / "r.json")) == 0);
    const auto r = read_json(dir / "r.json");
    CHECK(r["report"]["outliers"] == Json::array({5}));
    CHECK(r["parameters"]["threshold_sigmas"] == 3.0);
}

TEST_CASE("frequency export") {
    TempDir dir;
    REQUIRE(run("synth --kind anisotropic --rows 1500 --output " + q(dir / "a.emb")) == 0);
    REQUIRE(run("freqbias --input " + q(dir / "a.emb") + " --freq-table " + q(dir / "a.emb.freq.tsv") +
                " --output " + q(dir / "f.tsv")) == 0);
    const std::string tsv = slurp(dir / "f.tsv");
    const std::string first = tsv.substr(0, tsv.find('\n'));
    CHECK(std::count(first.begin(), first.end(), '\t') == 3);
    CHECK(std::filesystem::exists(dir / "f.tsv.json"));
}

TEST_CASE("sts settings") {
    TempDir dir;
    REQUIRE(run("synth --kind sts --seed 2 --output " + q(dir / "s.emb")) == 0);
    const auto sts = q(dir / "s.emb.sts.tsv");
    REQUIRE(run("sts --input " + q(dir / "s.emb") + " --sts " + sts + " --setting baseline --output " +
                q(dir / "base.json")) == 0);
    REQUIRE(run("sts --input " + q(dir / "s.emb") + " --sts " + sts + " --setting individual --output " +
                q(dir / "ind.json")) == 0);
    const auto base = read_json(dir / "base.json"), ind = read_json(dir / "ind.json");
    CHECK(ind["result"]["spearman_pct"].get<double>() > base["result"]["spearman_pct"].get<double>());
    CHECK(std::filesystem::exists(dir / "base.json.pairs.tsv"));

    CHECK(run("sts --input " + q(dir / "s.emb") + " --sts " + sts + " --setting zero-shot") == 2);

    SUBCASE("zero-shot with a transform from another draw") {
        REQUIRE(run("synth --kind sts --seed 9 --language src --output " + q(dir / "src.emb")) == 0);
        REQUIRE(run("fit --input " + q(dir / "src.emb") + " --output " + q(dir / "t.json")) == 0);
        REQUIRE(run("sts --input " + q(dir / "s.emb") + " --sts " + sts +
                    " --setting zero-shot --transform " + q(dir / "t.json") + " --output " +
                    q(dir / "zs.json")) == 0);
        const auto zs = read_json(dir / "zs.json");
        CHECK(zs["result"]["provenance"]["source_language"] == "src");
        CHECK(zs["result"]["provenance"]["cross_language"] == true);
        CHECK(zs["result"]["spearman_pct"].get<double>() > base["result"]["spearman_pct"].get<double>());
    }
    SUBCASE("monotone fixture scores 100 at baseline") {
        REQUIRE(run("synth --kind sts --monotone --output " + q(dir / "mono.emb")) == 0);
        REQUIRE(run("sts --input " + q(dir / "mono.emb") + " --sts " + q(dir / "mono.emb.sts.tsv") +
                    " --setting baseline --output " + q(dir / "mono.json")) == 0);
        CHECK(read_json(dir / "mono.json")["result"]["spearman_pct"].get<double>() ==
              doctest::Approx(100.0).epsilon(1e-12));
    }
}

}  // TEST_SUITE
