#include "doctest.h"

#include "vrpsd/cuts.hpp"
#include "vrpsd/recourse.hpp"
#include "vrpsd/separation.hpp"

#include <fstream>
#include <sstream>

using namespace vrpsd;

namespace {

// Five customers, four equiprobable scenarios, C = 10, k = 2. Failures occur
// only in scenarios 2 and 4. Kept in sync with data/counterexample_fixture.json.
Instance counterexample_instance() {
    std::string doc = R"({
      "n": 5, "capacity": 10, "fleet": 2,
      "costs": [
        [0, 1, 4, "1/2", 2, 3],
        [1, 0, 1, 1, 1, 1],
        [4, 1, 0, 1, 1, 1],
        ["1/2", 1, 1, 0, 1, 1],
        [2, 1, 1, 1, 0, 1],
        [3, 1, 1, 1, 1, 0]
      ],
      "scenarios": {
        "probs": ["1/4", "1/4", "1/4", "1/4"],
        "demands": [
          [0, 0, 0, 0, 4],
          [9, 1, 5, 9, 2],
          [0, 0, 0, 0, 4],
          [2, 4, 5, 5, 2]
        ]
      }
    })";
    return parse_instance(doc);
}

}  // namespace

TEST_CASE("counterexample fixture reproduces every pinned value") {
    Instance inst = counterexample_instance();
    Route r = {1, 2, 3, 4};
    Route r_sub = {2, 3, 4};

    // Both routing plans that make R and R' relevant are feasible.
    RoutingPlan plan_r{{{1, 2, 3, 4}, {5}}};
    RoutingPlan plan_sub{{{2, 3, 4}, {5, 1}}};
    CHECK(plan_is_feasible(plan_r, inst));
    CHECK(plan_is_feasible(plan_sub, inst));

    // Recourse values with their forward orientations.
    OrientedRecourse qr = q_classical(inst, r);
    CHECK(qr.value == Rational(3, 2));
    CHECK(qr.orientation == r);
    OrientedRecourse qs = q_classical(inst, r_sub);
    CHECK(qs.value == Rational(2));
    CHECK(qs.orientation == r_sub);

    // Weak superadditivity fails: Q(R) = 3/2 < 2 = Q(R') with R' inside R.
    auto q_oracle = [&](const Route& sub) { return q_classical(inst, sub).value; };
    CHECK_FALSE(check_weak_superadditivity(q_oracle, r));

    // Disaggregations of the plan {R, (5)}.
    auto d1 = disaggregate(inst, r, Disaggregation::D1);
    CHECK(d1.size() == 1);
    CHECK(d1.at(1) == Rational(3, 2));
    auto d2 = disaggregate(inst, r, Disaggregation::D2);
    CHECK(d2.size() == 2);
    CHECK(d2.at(3) == Rational(1, 2));
    CHECK(d2.at(4) == Rational(1));
    CHECK(disaggregate(inst, {5}, Disaggregation::D2).empty());

    // Set-cut data for S = {2,3,4}.
    std::vector<int> s = {2, 3, 4};
    CHECK(rci_rhs(s, inst) == 1);
    CHECK(set_lb(inst, s, 1) == Rational(1, 2));

    EdgeVector x_bar = edges_from_plan(plan_r, inst.n);
    AffineForm wp = activation_set(s, 1, inst.n);
    CHECK(wp.eval(x_bar) == 1);

    // theta-bar-1 (D1) violates the set cut, theta-bar-2 (D2) satisfies it.
    std::vector<Rational> theta1 = {Rational(3, 2), 0, 0, 0, 0};
    std::vector<Rational> theta2 = {0, 0, Rational(1, 2), Rational(1), 0};
    Rational rhs = set_lb(inst, s, 1) * wp.eval(x_bar);
    Rational theta1_s = theta1[1] + theta1[2] + theta1[3];
    Rational theta2_s = theta2[1] + theta2[2] + theta2[3];
    CHECK(theta1_s == 0);
    CHECK(theta1_s < rhs);
    CHECK(theta2_s == Rational(3, 2));
    CHECK(theta2_s >= rhs);

    ILSCut cut = make_cut(s, set_lb(inst, s, 1), wp, CutTag::SetCut);
    CHECK(cut.bound == Rational(1, 2));
}

TEST_CASE("separation generates the fixture's set cut") {
    Instance inst = counterexample_instance();
    // At the plan containing R' = (2,3,4), the partial route machinery hands
    // back S = {2,3,4}; under D2 the set cut fires against theta-bar-1.
    RoutingPlan plan_sub{{{2, 3, 4}, {1, 5}}};
    EdgeVector x = edges_from_plan(plan_sub, inst.n);
    std::vector<Rational> theta1 = {Rational(3, 2), 0, 0, 0, 0};

    SeparationConfig cfg;
    cfg.mode = Disaggregation::D2;
    cfg.use_set_cuts = true;
    SeparationResult res = separate_vrpsd(x, theta1, cfg, inst);
    CHECK(res.rci_sets.empty());
    bool found = false;
    for (const ILSCut& cut : res.cuts) {
        if (cut.tag == CutTag::SetCut && cut.theta_support == std::vector<int>{2, 3, 4}) {
            found = true;
            CHECK(cut.bound == Rational(1, 2));
        }
    }
    CHECK(found);
}

TEST_CASE("fixture golden file matches the in-code instance") {
    std::ifstream in("data/counterexample_fixture.json");
    if (!in) in.open("../data/counterexample_fixture.json");
    if (!in) in.open(std::string(FIXTURE_DIR) + "/counterexample_fixture.json");
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    Instance golden = parse_instance(buf.str());
    CHECK(write_instance(golden) == write_instance(counterexample_instance()));
}
