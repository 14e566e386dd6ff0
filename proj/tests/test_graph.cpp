#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dgf/graph.hpp"
#include "support.hpp"

using namespace dgf;
using test::box;

TEST_CASE("build_graph") {
    CHECK(build_graph({}).size() == 0);

    const auto near = build_graph({box(PrimitiveKind::Body, 0, 0, 10, 10), box(PrimitiveKind::Body, 60, 0, 70, 10)});
    CHECK(near.edges().size() == 1);
    CHECK(near.has_edge(0, 1));
    CHECK(near.has_edge(1, 0));

    const auto far = build_graph({box(PrimitiveKind::Body, 0, 0, 10, 10), box(PrimitiveKind::Body, 110, 0, 120, 10)});
    CHECK(far.edges().empty());

    SUBCASE("the radius is strict") {
        const auto g = build_graph({box(PrimitiveKind::Body, 0, 0, 10, 10), box(PrimitiveKind::Body, 90, 0, 95, 10)});
        CHECK(g.edges().empty());
        const auto h = build_graph({box(PrimitiveKind::Body, 0, 0, 10, 10), box(PrimitiveKind::Body, 89.9, 0, 95, 10)});
        CHECK(h.edges().size() == 1);
    }

    SUBCASE("invalid primitives are rejected") {
        Primitive bad = box(PrimitiveKind::Component, 0, 0, 1, 1);
        CHECK_THROWS_AS(build_graph({bad}), Error);
        CHECK_THROWS_AS(build_graph({box(PrimitiveKind::Body, 0, 0, 1, 1)}, GraphConfig{0.0}), Error);
    }
}

TEST_CASE("edges match a brute-force gap oracle on random boxes") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> pos(0, 600), size(1, 60);
    std::vector<Primitive> prims;
    for (int i = 0; i < 40; ++i) {
        const double x = pos(rng), y = pos(rng);
        prims.push_back(box(PrimitiveKind::Label, x, y, x + size(rng), y + size(rng)));
    }
    const auto g = build_graph(prims);
    for (NodeId i = 0; i < prims.size(); ++i) {
        for (NodeId j = 0; j < prims.size(); ++j) {
            if (i == j) continue;
            // Independent gap: separation along each axis, then Euclid.
            const auto& a = prims[i].bbox;
            const auto& b = prims[j].bbox;
            const double dx = std::max({0.0, b.x_min - a.x_max, a.x_min - b.x_max});
            const double dy = std::max({0.0, b.y_min - a.y_max, a.y_min - b.y_max});
            CHECK(g.has_edge(i, j) == (std::sqrt(dx * dx + dy * dy) < 80.0));
        }
    }
    for (auto [u, v] : g.edges()) CHECK(u < v);
}

TEST_CASE("connected") {
    // resistor -- wire -- battery, gaps of 20 px
    const auto g = build_graph({test::component(ComponentKind::Resistor, {100, 100}),
                                test::wire({150, 100}, {250, 100}),
                                test::component(ComponentKind::Battery, {300, 100})});
    const KindFilter via{PrimitiveKind::Wire, PrimitiveKind::Junction};
    CHECK(connected(g, 0, 0, via));
    CHECK(connected(g, 0, 2, via));
    CHECK_FALSE(g.has_edge(0, 2));
    CHECK_FALSE(connected(g, 0, 2, KindFilter{}));
    CHECK_THROWS_AS(connected(g, 0, 9, via), Error);

    SUBCASE("a 100 px break disconnects") {
        const auto h = build_graph({test::component(ComponentKind::Resistor, {100, 100}),
                                    test::wire({150, 100}, {200, 100}),
                                    test::component(ComponentKind::Battery, {330, 100})});
        CHECK_FALSE(connected(h, 0, 2, via));
    }
    SUBCASE("interior nodes must match the filter") {
        const auto h = build_graph({test::component(ComponentKind::Resistor, {100, 100}),
                                    test::component(ComponentKind::Diode, {200, 100}),
                                    test::component(ComponentKind::Battery, {300, 100})});
        CHECK_FALSE(h.has_edge(0, 2));
        CHECK_FALSE(connected(h, 0, 2, via));
        CHECK(connected(h, 0, 2, KindFilter::any()));
    }
}

TEST_CASE("connected is an equivalence when every kind may be traversed") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> pos(0, 500);
    std::vector<Primitive> prims;
    for (int i = 0; i < 25; ++i) {
        const double x = pos(rng), y = pos(rng);
        prims.push_back(box(PrimitiveKind::Label, x, y, x + 10, y + 10));
    }
    const auto g = build_graph(prims);
    const auto any = KindFilter::any();
    for (NodeId a = 0; a < g.size(); ++a) {
        for (NodeId b = 0; b < g.size(); ++b) {
            CHECK(connected(g, a, b, any) == connected(g, b, a, any));
            for (NodeId c = 0; c < g.size(); c += 5) {
                if (connected(g, a, b, any) && connected(g, b, c, any)) CHECK(connected(g, a, c, any));
            }
        }
    }
}

TEST_CASE("neighbors") {
    std::vector<Primitive> prims = {box(PrimitiveKind::Junction, 200, 200, 208, 208),
                                    test::wire({100, 204}, {196, 204}), test::wire({212, 204}, {300, 204}),
                                    test::wire({204, 212}, {204, 300}),
                                    box(PrimitiveKind::Body, 500, 500, 520, 520)};
    const auto g = build_graph(prims);
    CHECK(neighbors(g, 4, KindFilter::any()).empty());
    CHECK(neighbors(g, 0, KindFilter{PrimitiveKind::Wire}) == std::vector<NodeId>{1, 2, 3});
    CHECK(neighbors(g, 0, KindFilter{}).empty());
    CHECK_THROWS_AS(neighbors(g, 17, KindFilter::any()), Error);
}

TEST_CASE("graph json") {
    const auto g = build_graph({test::wire({0, 0}, {50, 0}), test::wire({60, 0}, {100, 0})});
    const json j = graph_to_json(g);
    CHECK(j.at("nodes").size() == 2);
    CHECK(j.at("nodes")[1].at("id") == 1);
    CHECK(j.at("edges") == json::parse("[[0,1]]"));
}

TEST_CASE("graph construction rejects bad edges") {
    CHECK_THROWS_AS(SymbolicGraph({box(PrimitiveKind::Body, 0, 0, 1, 1)}, {{0, 0}}), Error);
    CHECK_THROWS_AS(SymbolicGraph({box(PrimitiveKind::Body, 0, 0, 1, 1)}, {{0, 3}}), Error);
}
