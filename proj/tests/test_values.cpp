#include "smash/values.hpp"

#include "value_oracle.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

using namespace smash;

namespace {

ImportanceOrder order(std::initializer_list<std::initializer_list<Value>> buckets) {
    ImportanceOrder iv;
    for (const auto& b : buckets) iv.buckets.emplace_back(b);
    return iv;
}

const Value he = Value::hedonism;
const Value bc = Value::benevolence_caring;
const Value sp = Value::security_personal;
const Value cr = Value::conformity_rules;

}  // namespace

TEST_CASE("value identifiers form a closed enumeration") {
    CHECK(parse_value("hedonism") == Value::hedonism);
    CHECK(parse_value("universalism_tolerance") == Value::universalism_tolerance);
    CHECK_THROWS_AS(parse_value("bravery"), ConfigError);
    CHECK(kValueNames.size() == 19);
}

TEST_CASE("order operator parsing") {
    OrderOp op = parse_order_op("above(benevolence_caring, hedonism)");
    CHECK(op.kind == OrderOp::Kind::above);
    CHECK(op.v1 == bc);
    CHECK(op.v2 == he);
    CHECK_THROWS_AS(parse_order_op("above(hedonism)"), ConfigError);
    CHECK_THROWS_AS(parse_order_op("flip(hedonism)"), ConfigError);
    CHECK(parse_order_op("remove(face)").kind == OrderOp::Kind::remove);
}

TEST_CASE("apply_order_op unit cases") {
    SECTION("make_most on an order already headed by that singleton is the identity") {
        ImportanceOrder iv = order({{he}, {bc, sp}});
        CHECK(apply_order_op(iv, {OrderOp::Kind::make_most, he}) == iv);
    }
    SECTION("same then above leaves v1 strictly above v2") {
        ImportanceOrder iv = order({{he}, {bc}});
        iv = apply_order_op(iv, {OrderOp::Kind::same, he, bc});
        CHECK(iv == order({{bc, he}}));
        iv = apply_order_op(iv, {OrderOp::Kind::above, he, bc});
        CHECK(iv == order({{he}, {bc}}));
        CHECK(*iv.rank_of(he) < *iv.rank_of(bc));
    }
    SECTION("remove of an absent value is the identity") {
        ImportanceOrder iv = order({{he}});
        CHECK(apply_order_op(iv, {OrderOp::Kind::remove, bc}) == iv);
    }
    SECTION("remove drops an emptied bucket") {
        ImportanceOrder iv = order({{he}, {bc}});
        CHECK(apply_order_op(iv, {OrderOp::Kind::remove, he}) == order({{bc}}));
    }
    SECTION("above with absent v2 is skipped with a trace entry") {
        ImportanceOrder iv = order({{he}});
        TraceNotes notes;
        CHECK(apply_order_op(iv, {OrderOp::Kind::above, bc, sp}, &notes) == iv);
        REQUIRE(notes.size() == 1);
        CHECK(notes[0].find("security_personal") != std::string::npos);
    }
    SECTION("above with absent v1 inserts it") {
        ImportanceOrder iv = order({{he}, {sp}});
        CHECK(apply_order_op(iv, {OrderOp::Kind::above, bc, sp}) == order({{he}, {bc}, {sp}}));
        CHECK(apply_order_op(iv, {OrderOp::Kind::below, bc, sp}) == order({{he}, {sp}, {bc}}));
    }
    SECTION("make_least moves to the back") {
        ImportanceOrder iv = order({{he}, {bc, sp}});
        CHECK(apply_order_op(iv, {OrderOp::Kind::make_least, he}) == order({{bc, sp}, {he}}));
    }
}

TEST_CASE("value_reasoning replays the rule ordering example") {
    // make_most(v1) then above(v2, v1): v2 ends up strictly above v1
    BeliefBase b;
    b.assert_belief(parse_ground_atom("c1"));
    b.assert_belief(parse_ground_atom("c2"));
    std::vector<ValueOrderingRule> vo = {
        {parse_formula("c1"), {parse_order_op("make_most(hedonism)")}},
        {parse_formula("c2"), {parse_order_op("above(benevolence_caring, hedonism)")}},
    };
    ImportanceOrder iv = value_reasoning(b, order({{sp}}), vo);
    CHECK(iv == order({{bc}, {he}, {sp}}));
}

TEST_CASE("value_reasoning with no rules is the identity and does not mutate its input") {
    BeliefBase b;
    ImportanceOrder iv_d = order({{he}, {bc}});
    ImportanceOrder out = value_reasoning(b, iv_d, {});
    CHECK(out == iv_d);
    // a firing rule leaves the input untouched
    std::vector<ValueOrderingRule> vo = {{Formula::always_true(), {parse_order_op("make_most(benevolence_caring)")}}};
    value_reasoning(b, iv_d, vo);
    CHECK(iv_d == order({{he}, {bc}}));
}

TEST_CASE("rules fire once per condition substitution") {
    BeliefBase b;
    b.assert_belief(parse_ground_atom("caller(mom)"));
    b.assert_belief(parse_ground_atom("caller(boss)"));
    TraceNotes notes;
    std::vector<ValueOrderingRule> vo = {
        {parse_formula("caller(C)"), {parse_order_op("above(hedonism, security_personal)")}}};
    // operator application is idempotent, so double firing keeps the result
    ImportanceOrder iv = value_reasoning(b, order({{sp}}), vo, &notes);
    CHECK(iv == order({{he}, {sp}}));
}

TEST_CASE("1000 random instances match the naive list-surgery oracle") {
    std::mt19937 rng(99);
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

    for (int trial = 0; trial < 1000; ++trial) {
        // random sparse default order
        ImportanceOrder iv_d;
        std::vector<Value> pool;
        for (std::size_t i = 0; i < kValueCount; ++i)
            if (pick(2) == 0) pool.push_back(static_cast<Value>(i));
        std::shuffle(pool.begin(), pool.end(), rng);
        for (Value v : pool) {
            if (iv_d.buckets.empty() || pick(3) == 0) iv_d.buckets.emplace_back();
            iv_d.buckets.back().push_back(v);
        }
        if (!iv_d.buckets.empty() && iv_d.buckets.front().empty()) iv_d.buckets.erase(iv_d.buckets.begin());

        // random beliefs: flags f0..f3
        BeliefBase b;
        for (int i = 0; i < 4; ++i)
            if (pick(2) == 0) b.assert_belief(parse_ground_atom("f" + std::to_string(i)));

        // random rules
        std::vector<ValueOrderingRule> vo;
        int nrules = pick(5);
        for (int r = 0; r < nrules; ++r) {
            ValueOrderingRule rule;
            rule.condition = parse_formula("f" + std::to_string(pick(4)));
            int nops = 1 + pick(3);
            for (int k = 0; k < nops; ++k) {
                OrderOp op{};
                op.kind = static_cast<OrderOp::Kind>(pick(6));
                op.v1 = static_cast<Value>(pick((int)kValueCount));
                op.v2 = static_cast<Value>(pick((int)kValueCount));
                rule.body.push_back(op);
            }
            vo.push_back(std::move(rule));
        }

        ImportanceOrder got = value_reasoning(b, iv_d, vo);

        ImportanceOrder expect = testgen::oracle_value_reasoning(b, iv_d, vo);

        INFO("trial " << trial << "\n  iv_d   " << iv_d.to_string() << "\n  got    " << got.to_string()
                      << "\n  expect " << expect.to_string());
        REQUIRE(got == expect);
        CHECK(got.well_formed());
    }
}

TEST_CASE("buckets stay non-empty and disjoint under random operator streams") {
    std::mt19937 rng(4242);
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    ImportanceOrder iv = order({{he}, {bc, sp}, {cr}});
    for (int i = 0; i < 2000; ++i) {
        OrderOp op{};
        op.kind = static_cast<OrderOp::Kind>(pick(6));
        op.v1 = static_cast<Value>(pick((int)kValueCount));
        op.v2 = static_cast<Value>(pick((int)kValueCount));
        iv = apply_order_op(std::move(iv), op);
        REQUIRE(iv.well_formed());
    }
}

TEST_CASE("make_most postcondition: rank 0 and alone in its bucket") {
    ImportanceOrder iv = order({{he, bc}, {sp}});
    iv = apply_order_op(iv, {OrderOp::Kind::make_most, sp});
    CHECK(*iv.rank_of(sp) == 0);
    CHECK(iv.buckets[0] == std::vector<Value>{sp});
    iv = apply_order_op(iv, {OrderOp::Kind::make_least, sp});
    CHECK(*iv.rank_of(sp) == iv.buckets.size() - 1);
    CHECK(iv.buckets.back() == std::vector<Value>{sp});
}
