#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zhopf/errors.hpp"
#include "zhopf/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace zhopf;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("doubles survive the JSON round trip bit for bit") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.8660254037844386, 5e-324}) {
    const std::string text = canonical_dump(Json{{"v", v}});
    CHECK(Json::parse(text)["v"].get<double>() == v);
  }
  CHECK(to_json(NAN).is_null());
  CHECK(to_json(INFINITY).is_null());
}

TEST_CASE("reports re-dump byte for byte with sorted keys") {
  const UnfoldingSpec s = UnfoldingSpec::case_i(1, 1, 1, 1, 0, 1);
  Json j;
  j["spec"] = to_json(s);
  j["params"] = to_json(perturb(s, 0.01));
  j["equilibria"] = to_json(equilibria(perturb(s, 0.01)));
  Json zs = Json::array();
  for (const AveragedZero& z : averaged_zeros(s)) zs.push_back(to_json(z));
  j["zeros"] = zs;
  const SystemParams zh = zero_hopf_params({Case::I, 1.0, 1.0, {}, {}});
  j["certificate"] = to_json(*is_zero_hopf(zh, State4::Zero()));

  const std::string text = canonical_dump(j);
  CHECK(canonical_dump(Json::parse(text)) == text);
  // keys come out in lexicographic order
  CHECK(text.find("\"certificate\"") < text.find("\"equilibria\""));
  CHECK(text.find("\"params\"") < text.find("\"spec\""));
  CHECK(j["zeros"][0]["stability"]["eigenvalues"][0].size() == 2);
}

TEST_CASE("atomic write replaces the file") {
  const auto dir = std::filesystem::temp_directory_path() / "zhopf_report_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "nested" / "out.json";
  write_atomic(path, "first\n");
  write_atomic(path, "second\n");
  CHECK(slurp(path) == "second\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(path.parent_path())) ++files;
  CHECK(files == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("trajectory csv") {
  IntegratorConfig cfg;
  cfg.dense = true;
  const Trajectory tr = integrate(SystemParams{2, 1, 1, 1, 3}, State4(0.1, 0, 0, 0), 1.0, cfg);
  const std::string all = trajectory_csv(tr);
  CHECK(all.rfind("t,x,y,z,w\n", 0) == 0);
  std::size_t rows = 0;
  for (char ch : all) rows += ch == '\n';
  CHECK(rows == tr.t.size() + 1);

  const std::string sampled = trajectory_csv(tr, 0.25);
  std::istringstream in(sampled);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,y,z,w");
  std::getline(in, line);
  CHECK(line.rfind("0,0.10000000000000001,", 0) == 0);
  int n = 1;
  while (std::getline(in, line)) ++n;
  CHECK(n == 5);
}
