#include <doctest.h>

#include <sstream>

#include "egnn/config.hpp"
#include "egnn/error.hpp"

using namespace egnn;

namespace {

KeyValueConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in, "run.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parsing") {
    const KeyValueConfig kv = parse("# comment\n\nlambda1 = 2.5\n  mode=L1   # trailing\nK = 7\n");
    CHECK(kv.has("lambda1"));
    CHECK(kv.entries.at("mode").value == "L1");
    CHECK(kv.entries.at("K").line == 5);
    CHECK_FALSE(kv.has("lambda2"));
  }

  TEST_CASE("errors carry the line") {
    CHECK(error_of("lambda1 = 1\nlambda2\n").find("run.cfg:2") != std::string::npos);
    CHECK(error_of("alpha = 1\n").find("run.cfg:1") != std::string::npos);
    CHECK(error_of("K = 1\nK = 2\n").find("run.cfg:2") != std::string::npos);
    CHECK_THROWS_AS(read_key_values("/nonexistent/run.cfg"), InputError);
  }

  TEST_CASE("solver settings") {
    const EmpConfig c = emp_config_from(parse("lambda1 = 2\nlambda2 = 3\nK = 4\nmode = L1\n"));
    CHECK(c.lambda1 == 2.0);
    CHECK(c.lambda2 == 3.0);
    CHECK(c.iterations == 4);
    CHECK(c.mode == Penalty::L1);
    CHECK(c.gamma == 0.25);
    CHECK(c.beta == 2.0);
    const EmpConfig d = emp_config_from(parse("lambda2 = 3\ngamma = 0.2\nbeta = 1\ntolerance = 1e-9\n"), 1.0);
    CHECK(d.lambda1 == 1.0);
    CHECK(d.gamma == 0.2);
    CHECK_FALSE(d.fast_path);
    REQUIRE(d.tolerance.has_value());
    CHECK(*d.tolerance == 1e-9);
    CHECK_THROWS_AS(emp_config_from(parse("lambda1 = abc\n")), InputError);
    CHECK_THROWS_AS(emp_config_from(parse("K = -3\n")), InputError);
    CHECK_THROWS_AS(emp_config_from(parse("lambda2 = 3\ngamma = 1\n")), InputError);
  }

  TEST_CASE("training settings") {
    TrainConfig base;
    base.hidden = 8;
    const TrainConfig c = train_config_from(parse("lr = 0.05\nepochs = 12\nseed = 3\nlambda1 = 0\n"), base);
    CHECK(c.lr == 0.05);
    CHECK(c.epochs == 12);
    CHECK(c.seed == 3);
    CHECK(c.lambda1 == 0.0);
    CHECK(c.hidden == 8);
    CHECK(c.dropout == 0.5);
  }
}
