#include <random>
#include <sstream>

#include "doctest.h"
#include "support/testutil.hpp"

using namespace maxsum;
using namespace testutil;

namespace {

const char* kTiny =
    "MARKOV\n"
    "1\n"
    "2\n"
    "1\n"
    "1 0\n"
    "\n"
    "2\n"
    " 1.0 2.0\n";

}  // namespace

TEST_CASE("parse_uai: single unary factor is transcribed into log space") {
  GraphicalModel m = parse_uai(kTiny);
  REQUIRE(m.num_vars() == 1);
  REQUIRE(m.factors().size() == 1);
  CHECK(m.factors()[0][0] == doctest::Approx(0.0));
  CHECK(m.factors()[0][1] == doctest::Approx(0.6931471805599453));
}

TEST_CASE("parse_uai: permuted scope order re-lays the table out") {
  // same two-variable function written with scope "0 2" and with scope "2 0"
  const char* sorted =
      "MARKOV\n3\n2 2 2\n1\n"
      "2 0 2\n"
      "4\n20.0 1.0 2.5 7.0\n";
  const char* permuted =
      "MARKOV\n3\n2 2 2\n1\n"
      "2 2 0\n"
      "4\n20.0 2.5 1.0 7.0\n";  // transposed entry order
  GraphicalModel a = parse_uai(sorted);
  GraphicalModel b = parse_uai(permuted);
  REQUIRE(a.factors()[0].scope() == std::vector<VarId>{0, 2});
  REQUIRE(b.factors()[0].scope() == std::vector<VarId>{0, 2});
  Assignment x(3);
  x.set(1, 0);
  for (int v0 = 0; v0 < 2; ++v0)
    for (int v2 = 0; v2 < 2; ++v2) {
      x.set(0, v0);
      x.set(2, v2);
      CHECK(evaluate(a, x) == doctest::Approx(evaluate(b, x)));
    }
}

TEST_CASE("parse_uai: zero probability becomes the log floor") {
  const char* text = "MARKOV\n1\n3\n1\n1 0\n3\n0.5 0.0 2\n";
  GraphicalModel m = parse_uai(text);
  CHECK(m.factors()[0][1] == kLogZero);
  CHECK(m.factors()[0][0] == doctest::Approx(std::log(0.5)));
}

TEST_CASE("parse_uai: BAYES tables are read the same way") {
  GraphicalModel m = parse_uai("BAYES\n1\n2\n1\n1 0\n2\n0.25 0.75\n");
  CHECK(m.factors()[0][0] == doctest::Approx(std::log(0.25)));
}

TEST_CASE("parse_uai: malformed inputs raise parse errors with line numbers") {
  CHECK_THROWS_AS(parse_uai("NETWORK\n1\n2\n0\n"), parse_error);
  // negative entry on line 7
  try {
    parse_uai("MARKOV\n1\n2\n1\n1 0\n2\n1.0 -2.0\n");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 7);
  }
  // scope id out of range
  CHECK_THROWS_AS(parse_uai("MARKOV\n1\n2\n1\n1 3\n2\n1 1\n"), parse_error);
  // duplicate scope variable
  CHECK_THROWS_AS(parse_uai("MARKOV\n2\n2 2\n1\n2 0 0\n4\n1 1 1 1\n"),
                  parse_error);
  // table count mismatch
  CHECK_THROWS_AS(parse_uai("MARKOV\n1\n2\n1\n1 0\n3\n1 1 1\n"), parse_error);
  // truncated file
  CHECK_THROWS_AS(parse_uai("MARKOV\n2\n2\n"), parse_error);
  CHECK_THROWS_AS(parse_uai("MARKOV\n1\n2\n1\n1 0\n2\n1.0\n"), parse_error);
}

TEST_CASE("parse -> write -> parse round-trips to an equivalent model") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    GraphicalModel m = random_model(rng);
    std::ostringstream out;
    write_uai(m, out);
    GraphicalModel back = parse_uai(out.str());
    REQUIRE(back.num_vars() == m.num_vars());
    for (int i = 0; i < 100; ++i) {
      Assignment x = random_assignment(m, rng);
      CHECK(evaluate(back, x) == doctest::Approx(evaluate(m, x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("parse_evidence: examples and error paths") {
  GraphicalModel m(std::vector<int>{2, 2, 2, 2, 3});
  EvidenceSet e1 = parse_evidence("1 3 0", m);
  CHECK(e1 == EvidenceSet{{3, 0}});
  CHECK(parse_evidence("0", m).empty());
  EvidenceSet e3 = parse_evidence("2 0 1 4 2", m);
  CHECK(e3 == EvidenceSet{{0, 1}, {4, 2}});

  CHECK_THROWS_AS(parse_evidence("2 0 1 0 0", m), parse_error);  // duplicate
  CHECK_THROWS_AS(parse_evidence("1 0 5", m), parse_error);      // bad value
  CHECK_THROWS_AS(parse_evidence("1 9 0", m), parse_error);      // bad var
}

TEST_CASE("condition: M3 with X3 := 1") {
  GraphicalModel m = m3();
  std::vector<VarId> back;
  GraphicalModel c = condition(m, EvidenceSet{{2, 1}}, &back);
  REQUIRE(c.num_vars() == 2);
  CHECK(back == std::vector<VarId>{0, 1});
  REQUIRE(c.factors().size() == 3);
  CHECK(c.factors()[0].values() == std::vector<double>{0, 1, 2, 0});
  CHECK(c.factors()[1].scope() == std::vector<VarId>{1});
  CHECK(c.factors()[1].values() == std::vector<double>{3, 0});
  CHECK(c.factors()[2].scope() == std::vector<VarId>{0});
  CHECK(c.factors()[2].values() == std::vector<double>{0, 2});

  auto r = brute_force_opt(c);
  CHECK(r.value == doctest::Approx(7.0));
  CHECK(r.argmax[0] == 1);
  CHECK(r.argmax[1] == 0);
}

TEST_CASE("condition: empty evidence and full evidence") {
  GraphicalModel m = m3();
  GraphicalModel same = condition(m, {});
  CHECK(same.num_vars() == 3);
  CHECK(same.factors().size() == 3);

  EvidenceSet all{{0, 1}, {1, 0}, {2, 1}};
  GraphicalModel scalars = condition(m, all);
  CHECK(scalars.num_vars() == 0);
  double total = 0;
  for (const Factor& f : scalars.factors()) {
    CHECK(f.scalar());
    total += f[0];
  }
  CHECK(total == doctest::Approx(7.0));
}

TEST_CASE("condition preserves the optimum restricted to the evidence") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    GraphicalModel m = random_model(rng);
    // evidence on a random subset
    EvidenceSet ev;
    for (std::size_t v = 0; v < m.num_vars(); ++v)
      if (uniform_int(rng, 0, 2) == 0)
        ev[VarId(v)] = uniform_int(rng, 0, m.card(VarId(v)) - 1);

    GraphicalModel c = condition(m, ev);
    double conditioned = c.num_vars() == 0
                             ? evaluate(c, Assignment(0))
                             : brute_force_opt(c).value;

    // oracle: brute force over completions of the evidence
    Assignment x(m.num_vars());
    for (auto [v, val] : ev) x.set(v, val);
    double expected = oracle_best_completion(m, x);
    CHECK(conditioned == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("result line format") {
  CHECK(format_result_line("exact", 7.0) ==
        "STATUS exact LN 7.000000 LOG10 3.040061");
  CHECK(format_result_line("bound", -15.4553) ==
        "STATUS bound LN -15.455300 LOG10 -6.712152");
}

TEST_CASE("trace writer emits the CSV header and rows") {
  std::ostringstream out;
  TraceWriter w(out, "bound_ln");
  w.row(0.25, 8.0);
  w.row(0.5, 7.125);
  CHECK(out.str() == "elapsed_seconds,bound_ln\n0.250000,8\n0.500000,7.125\n");
}
