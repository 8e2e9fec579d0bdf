#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qff/commands.hpp"

using namespace qff;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  std::string cmd = std::string(QFF_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

}  // namespace

TEST(Cli, EnumerateCount) {
  auto r = run_cli("enumerate --q 3 --m 1");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "count=144\n");
}

TEST(Cli, VerifyPasses) {
  auto r = run_cli("verify --q 2 --m 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("verify=PASS"), std::string::npos);
  EXPECT_EQ(r.out.find("status=FAIL"), std::string::npos);
}

TEST(Cli, MomentRowPasses) {
  auto r = run_cli("moment --q 3 --m 1 --kind LL --s 2 --t 2");
  EXPECT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "kind,q,m,s,t,lhs_re,lhs_im,main_re,main_im,abs_err,bound,C,pass");
  EXPECT_EQ(row.rfind("LL,3,1,", 0), 0u);
  EXPECT_EQ(row.substr(row.size() - 5), ",true");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("moment --q 3 --m 1 --kind LL --s 0.5 --t 2").code, 3);
  EXPECT_EQ(run_cli("enumerate --q 6 --m 1").code, 3);
  EXPECT_EQ(run_cli("moment --q 3 --kind nope").code, 3);
  EXPECT_EQ(run_cli("enumerate --q 3 --m 4 --cap 10").code, 2);
  EXPECT_EQ(run_cli("").code, 3);
}

TEST(Cli, ConfigFileWithOverride) {
  std::string path = temp_path("qff_cli.cfg");
  {
    std::ofstream f(path);
    f << "q=3\nm=2\n";
  }
  EXPECT_EQ(run_cli("enumerate --config " + path).out, "count=1296\n");
  EXPECT_EQ(run_cli("enumerate --config " + path + " --m 1").out, "count=144\n");
  std::filesystem::remove(path);
}

TEST(Cli, JsonRecordsRoundTrip) {
  std::string path = temp_path("qff_enum.json");
  auto r = run_cli("enumerate --p 2 --r 1 --m 2 --format json --out " + path);
  ASSERT_EQ(r.code, 0);
  std::ifstream f(path);
  auto j = nlohmann::json::parse(f);
  ASSERT_TRUE(j.is_array());
  const Field& F = field_create(2, 1);
  auto fam = enumerate_family(BaseField(F), 2);
  ASSERT_EQ(j.size(), fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    auto w = parse_rational(F, j[i]["omega"].get<std::string>());
    EXPECT_TRUE(make_extension(w) == fam[i]);
    EXPECT_EQ(parse_divisor(F, j[i]["disc"].get<std::string>()), fam[i].disc);
    EXPECT_EQ(j[i]["char"], "even");
  }
  std::filesystem::remove(path);
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  for (std::string cmd : {"lpoly --q 3 --m 1", "moment --q 2 --m 1 --m-max 2 --kind invLL --s 2 --t 2", "verify --q 3 --m 1",
                          "sigma --q 2 --s 1.5+0.5i --t 2"}) {
    auto a = run_cli(cmd + " --threads 1");
    auto b = run_cli(cmd + " --threads 4");
    EXPECT_EQ(a.code, b.code) << cmd;
    EXPECT_EQ(a.out, b.out) << cmd;
  }
}

TEST(Commands, TableCsvQuoting) {
  Table t{{"a", "b"}, {}};
  t.add({"[(x,1),(inf,2)]", 3});
  std::ostringstream os;
  t.write(os, "csv");
  EXPECT_EQ(os.str(), "a,b\n\"[(x,1),(inf,2)]\",3\n");
}
