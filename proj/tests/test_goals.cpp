#include "smash/goals.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

using namespace smash;

namespace {

BeliefBase beliefs(std::initializer_list<std::string> atoms) {
    BeliefBase b;
    for (const auto& s : atoms) b.assert_belief(parse_ground_atom(s));
    return b;
}

ImportanceOrder order(std::initializer_list<std::initializer_list<Value>> buckets) {
    ImportanceOrder iv;
    for (const auto& b : buckets) iv.buckets.emplace_back(b);
    return iv;
}

GoalActivationRule ga_rule(const std::string& cond, std::initializer_list<std::string> body) {
    GoalActivationRule r;
    r.condition = cond.empty() ? Formula::always_true() : parse_formula(cond);
    for (const auto& s : body) r.body.push_back(parse_goal_state_template(s));
    return r;
}

GoalImpactRule gi_rule(const std::string& cond, const std::string& goal, int impact, Value v) {
    GoalImpactRule r;
    r.condition = cond.empty() ? Formula::always_true() : parse_formula(cond);
    r.goal_template = parse_atom(goal);
    r.impact = impact;
    r.value = v;
    return r;
}

}  // namespace

TEST_CASE("goal-state template parsing") {
    auto item = parse_goal_state_template("state(watch(tv, canalplus), waiting, user)");
    CHECK(item.goal_template == parse_atom("watch(tv, canalplus)"));
    CHECK(item.status == GoalStatus::waiting);
    CHECK(item.source == GoalSource::user);
    auto flat = parse_goal_state_template("state(recharge, active, self)");
    CHECK(flat.goal_template.predicate == "recharge");
    CHECK_THROWS_AS(parse_goal_state_template("goal(x, active, self)"), ConfigError);
    CHECK_THROWS_AS(parse_goal_state_template("state(x, active)"), ConfigError);
    CHECK_THROWS_AS(parse_goal_state_template("state(x, bogus, self)"), ConfigError);
}

TEST_CASE("legal transition relation") {
    using S = GoalStatus;
    // waiting -> {active, inactive, dropped}
    CHECK(legal_transition(S::waiting, S::active));
    CHECK(legal_transition(S::waiting, S::inactive));
    CHECK(legal_transition(S::waiting, S::dropped));
    CHECK_FALSE(legal_transition(S::waiting, S::success));
    CHECK_FALSE(legal_transition(S::waiting, S::fail));
    // active -> {success, fail, dropped, inactive}
    CHECK(legal_transition(S::active, S::success));
    CHECK(legal_transition(S::active, S::fail));
    CHECK(legal_transition(S::active, S::dropped));
    CHECK(legal_transition(S::active, S::inactive));
    CHECK_FALSE(legal_transition(S::active, S::waiting));
    // inactive -> {active, dropped, waiting}
    CHECK(legal_transition(S::inactive, S::active));
    CHECK(legal_transition(S::inactive, S::dropped));
    CHECK(legal_transition(S::inactive, S::waiting));
    CHECK_FALSE(legal_transition(S::inactive, S::success));
    // terminal statuses admit nothing
    for (S from : {S::success, S::fail, S::dropped})
        for (S to : {S::waiting, S::active, S::inactive, S::success, S::fail, S::dropped})
            if (from != to) CHECK_FALSE(legal_transition(from, to));
}

TEST_CASE("update inserts user goals as waiting") {
    GoalStatusSet gs;
    TransitionAudit audit;
    gs = update(std::move(gs), {parse_ground_atom("watch(tv, canalplus)")}, &audit);
    REQUIRE(gs.size() == 1);
    CHECK(gs.entries()[0] == GoalState{parse_atom("watch(tv, canalplus)"), GoalStatus::waiting, GoalSource::user});

    SECTION("empty GG leaves the set unchanged") {
        GoalStatusSet before = gs;
        gs = update(std::move(gs), {});
        CHECK(gs == before);
    }
    SECTION("a live duplicate is suppressed with a trace note") {
        gs.write(parse_atom("watch(tv, canalplus)"), GoalSource::user, GoalStatus::active, nullptr);
        TraceNotes notes;
        gs = update(std::move(gs), {parse_ground_atom("watch(tv, canalplus)")}, nullptr, &notes);
        REQUIRE(gs.size() == 1);
        CHECK(gs.entries()[0].status == GoalStatus::active);
        REQUIRE(notes.size() == 1);
        CHECK(notes[0].find("duplicate") != std::string::npos);
    }
    SECTION("a terminal user goal is re-posted as a fresh lifetime") {
        gs.write(parse_atom("watch(tv, canalplus)"), GoalSource::user, GoalStatus::active, nullptr);
        gs.write(parse_atom("watch(tv, canalplus)"), GoalSource::user, GoalStatus::fail, nullptr);
        TransitionAudit a2;
        gs = update(std::move(gs), {parse_ground_atom("watch(tv, canalplus)")}, &a2);
        CHECK(gs.entries()[0].status == GoalStatus::waiting);
        REQUIRE(a2.size() == 1);
        CHECK(a2[0].fresh_lifetime);
    }
    SECTION("non-ground goals are rejected") {
        CHECK_THROWS_AS(update(GoalStatusSet{}, {parse_atom("watch(X)")}), EvalError);
    }
}

TEST_CASE("select applies activation rules in order") {
    std::vector<GoalActivationRule> ga{GoalActivationRule::default_rule()};

    SECTION("the default rule activates waiting user goals") {
        GoalStatusSet gs = update(GoalStatusSet{}, {parse_ground_atom("watch(tv, c)")});
        gs = select(std::move(gs), BeliefBase{}, ga);
        CHECK(gs.entries()[0].status == GoalStatus::active);
    }
    SECTION("rules insert self goals from context") {
        ga.push_back(ga_rule("deviceStatus(tv, off)", {"state(turnOn(tv), active, self)"}));
        GoalStatusSet gs = select(GoalStatusSet{}, beliefs({"deviceStatus(tv, off)"}), ga);
        REQUIRE(gs.size() == 1);
        CHECK(gs.entries()[0] == GoalState{parse_atom("turnOn(tv)"), GoalStatus::active, GoalSource::self});
    }
    SECTION("no waiting goals means no change") {
        GoalStatusSet gs;
        gs.write(parse_atom("g"), GoalSource::self, GoalStatus::success, nullptr);
        GoalStatusSet before = gs;
        gs = select(std::move(gs), BeliefBase{}, ga);
        CHECK(gs == before);
    }
    SECTION("condition variables bind into body templates, one firing per substitution") {
        ga.push_back(ga_rule("deviceStatus(D, off)", {"state(turnOn(D), active, self)"}));
        GoalStatusSet gs = select(GoalStatusSet{}, beliefs({"deviceStatus(tv, off)", "deviceStatus(pc, off)"}), ga);
        REQUIRE(gs.size() == 2);
        CHECK(gs.find(parse_atom("turnOn(tv)"), GoalSource::self) != nullptr);
        CHECK(gs.find(parse_atom("turnOn(pc)"), GoalSource::self) != nullptr);
    }
    SECTION("illegal transitions are skipped with a trace entry") {
        GoalStatusSet gs;
        gs.write(parse_atom("g"), GoalSource::self, GoalStatus::success, nullptr);
        ga.push_back(ga_rule("", {"state(g, active, self)"}));
        TraceNotes notes;
        gs = select(std::move(gs), BeliefBase{}, ga, nullptr, &notes);
        CHECK(gs.entries()[0].status == GoalStatus::success);
        REQUIRE_FALSE(notes.empty());
        CHECK(notes[0].find("illegal") != std::string::npos);
    }
}

TEST_CASE("sort drops goals with negative impact on a present value") {
    // both voicemail and notifyUser active; notifyUser harms hedonism while
    // the tv is playing, so only voicemail survives into G(t)
    BeliefBase b = beliefs({"deviceStatus(tv, playing)"});
    ImportanceOrder iv = order({{Value::hedonism}, {Value::conformity_rules}});
    GoalStatusSet gs;
    gs.write(parse_atom("voicemail(phone)"), GoalSource::self, GoalStatus::active, nullptr);
    gs.write(parse_atom("notifyUser(phone, user)"), GoalSource::self, GoalStatus::active, nullptr);
    std::vector<GoalImpactRule> gi = {
        gi_rule("deviceStatus(tv, playing)", "notifyUser(phone, user)", -1, Value::hedonism)};

    TransitionAudit audit;
    SortResult res = sort_goals(gs, b, gi, iv, &audit);
    REQUIRE(res.goals.size() == 1);
    CHECK(res.goals[0].goal == parse_atom("voicemail(phone)"));
    CHECK(res.gs.find(parse_atom("notifyUser(phone, user)"), GoalSource::self)->status == GoalStatus::dropped);

    SECTION("a negative impact on an absent value does not drop") {
        ImportanceOrder narrow = order({{Value::conformity_rules}});
        SortResult res2 = sort_goals(gs, b, gi, narrow);
        CHECK(res2.goals.size() == 2);
    }
    SECTION("with no GI rules every active goal passes, user goals first") {
        gs.write(parse_atom("watch(tv, c)"), GoalSource::user, GoalStatus::active, nullptr);
        SortResult res3 = sort_goals(gs, b, {}, iv);
        REQUIRE(res3.goals.size() == 3);
        CHECK(res3.goals[0].goal == parse_atom("watch(tv, c)"));
        CHECK(res3.goals[0].source == GoalSource::user);
    }
}

TEST_CASE("sort order matches an exhaustive pairwise-comparison oracle") {
    // three self goals with hand-written impacts over a three-bucket order
    BeliefBase b = beliefs({"ctx"});
    ImportanceOrder iv = order({{Value::benevolence_caring}, {Value::hedonism}, {Value::conformity_rules}});
    GoalStatusSet gs;
    gs.write(parse_atom("g1"), GoalSource::self, GoalStatus::active, nullptr);
    gs.write(parse_atom("g2"), GoalSource::self, GoalStatus::active, nullptr);
    gs.write(parse_atom("g3"), GoalSource::self, GoalStatus::active, nullptr);
    std::vector<GoalImpactRule> gi = {
        gi_rule("ctx", "g1", 1, Value::hedonism),
        gi_rule("ctx", "g2", 1, Value::benevolence_caring),
        gi_rule("ctx", "g2", -0, Value::hedonism),
        gi_rule("ctx", "g3", 1, Value::hedonism),
        gi_rule("ctx", "g3", 1, Value::conformity_rules),
    };

    SortResult res = sort_goals(gs, b, gi, iv);
    REQUIRE(res.goals.size() == 3);

    // oracle: lexicographic score comparison, computed pairwise
    auto score = [&](const std::string& g) {
        return impact_score(fired_goal_impacts(parse_atom(g), b, gi), iv);
    };
    auto better = [&](const std::string& a, const std::string& c) {
        auto sa = score(a), sc = score(c);
        return std::lexicographical_compare(sc.begin(), sc.end(), sa.begin(), sa.end());
    };
    // expected: g2 (bucket 0) first; g3 beats g1 on the tie in bucket 1 via bucket 2
    CHECK(better("g2", "g1"));
    CHECK(better("g2", "g3"));
    CHECK(better("g3", "g1"));
    CHECK(res.goals[0].goal == parse_atom("g2"));
    CHECK(res.goals[1].goal == parse_atom("g3"));
    CHECK(res.goals[2].goal == parse_atom("g1"));
}

TEST_CASE("sort is stable for equal scores") {
    GoalStatusSet gs;
    gs.write(parse_atom("a"), GoalSource::self, GoalStatus::active, nullptr);
    gs.write(parse_atom("z"), GoalSource::self, GoalStatus::active, nullptr);
    gs.write(parse_atom("m"), GoalSource::self, GoalStatus::active, nullptr);
    SortResult res = sort_goals(gs, BeliefBase{}, {}, ImportanceOrder{});
    REQUIRE(res.goals.size() == 3);
    CHECK(res.goals[0].goal == parse_atom("a"));
    CHECK(res.goals[1].goal == parse_atom("z"));
    CHECK(res.goals[2].goal == parse_atom("m"));
}

TEST_CASE("goal_reasoning composes update, select and sort") {
    SECTION("caller-mom cycle activates notification and mute goals") {
        BeliefBase b = beliefs({"callerType(mom, family)", "deviceStatus(tv, playing)"});
        ImportanceOrder iv = order({{Value::benevolence_caring}, {Value::hedonism}});
        std::vector<GoalActivationRule> ga = {
            GoalActivationRule::default_rule(),
            ga_rule("callerType(C, family)",
                    {"state(notifyUser(phone, user), active, self)", "state(muteTv(tv), active, self)"}),
        };
        std::vector<GoalImpactRule> gi = {
            gi_rule("callerType(C, family)", "notifyUser(phone, user)", 1, Value::benevolence_caring)};
        GoalReasoningResult res = goal_reasoning(b, {}, iv, GoalStatusSet{}, ga, gi);
        REQUIRE(res.goals.size() == 2);
        CHECK(res.goals[0].goal == parse_atom("notifyUser(phone, user)"));
        CHECK(res.goals[1].goal == parse_atom("muteTv(tv)"));
    }
    SECTION("all-empty inputs yield empty outputs") {
        GoalReasoningResult res = goal_reasoning(BeliefBase{}, {}, ImportanceOrder{}, GoalStatusSet{}, {}, {});
        CHECK(res.goals.empty());
        CHECK(res.gs.empty());
    }
}

TEST_CASE("goal_reasoning equals a straight-line recomposition on random instances") {
    std::mt19937 rng(31337);
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

    for (int trial = 0; trial < 200; ++trial) {
        BeliefBase b;
        for (int i = 0; i < 4; ++i)
            if (pick(2)) b.assert_belief(parse_ground_atom("f" + std::to_string(i)));
        std::vector<Atom> gg;
        for (int i = 0; i < 2; ++i)
            if (pick(2)) gg.push_back(parse_ground_atom("ug" + std::to_string(i)));
        ImportanceOrder iv = {{ {Value::hedonism}, {Value::conformity_rules} }};

        GoalStatusSet gs;
        for (int i = 0; i < 3; ++i)
            if (pick(2))
                gs.write(parse_atom("sg" + std::to_string(i)), GoalSource::self,
                         static_cast<GoalStatus>(pick(6)), nullptr);

        std::vector<GoalActivationRule> ga{GoalActivationRule::default_rule()};
        for (int i = 0; i < 2; ++i)
            ga.push_back(ga_rule("f" + std::to_string(pick(4)),
                                 {"state(sg" + std::to_string(pick(3)) + ", active, self)"}));
        std::vector<GoalImpactRule> gi;
        for (int i = 0; i < 3; ++i)
            gi.push_back(gi_rule("f" + std::to_string(pick(4)), "sg" + std::to_string(pick(3)),
                                 pick(3) - 1, pick(2) ? Value::hedonism : Value::face));

        GoalReasoningResult composed = goal_reasoning(b, gg, iv, gs, ga, gi);
        GoalStatusSet step = update(gs, gg);
        step = select(std::move(step), b, ga);
        SortResult sorted = sort_goals(std::move(step), b, gi, iv);

        REQUIRE(composed.gs == sorted.gs);
        REQUIRE(composed.goals.size() == sorted.goals.size());
        for (std::size_t i = 0; i < composed.goals.size(); ++i) CHECK(composed.goals[i] == sorted.goals[i]);
    }
}

TEST_CASE("set_outcome enforces the active precondition") {
    GoalStatusSet gs;
    gs.write(parse_atom("g"), GoalSource::self, GoalStatus::active, nullptr);
    SECTION("active to success") {
        gs = set_outcome(std::move(gs), parse_atom("g"), GoalSource::self, GoalStatus::success);
        CHECK(gs.entries()[0].status == GoalStatus::success);
    }
    SECTION("active to fail, the no-plan path") {
        gs = set_outcome(std::move(gs), parse_atom("g"), GoalSource::self, GoalStatus::fail);
        CHECK(gs.entries()[0].status == GoalStatus::fail);
    }
    SECTION("waiting goals cannot receive an outcome") {
        gs.write(parse_atom("w"), GoalSource::user, GoalStatus::waiting, nullptr);
        CHECK_THROWS_AS(set_outcome(gs, parse_atom("w"), GoalSource::user, GoalStatus::success), SequencingError);
    }
    SECTION("missing entries signal a sequencing bug") {
        CHECK_THROWS_AS(set_outcome(gs, parse_atom("zz"), GoalSource::self, GoalStatus::success), SequencingError);
    }
}

TEST_CASE("every applied write in the audit satisfies the transition relation") {
    TransitionAudit audit;
    GoalStatusSet gs;
    gs.write(parse_atom("a"), GoalSource::user, GoalStatus::waiting, &audit);
    gs.write(parse_atom("a"), GoalSource::user, GoalStatus::active, &audit);
    gs.write(parse_atom("a"), GoalSource::user, GoalStatus::waiting, &audit);  // illegal
    gs.write(parse_atom("a"), GoalSource::user, GoalStatus::success, &audit);
    for (const TransitionRecord& r : audit) {
        if (!r.applied || !r.from) continue;
        CHECK((r.fresh_lifetime || legal_transition(*r.from, r.to)));
    }
    CHECK(gs.entries()[0].status == GoalStatus::success);
}
