#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "lvgrid/buildings.hpp"
#include "lvgrid/common.hpp"
#include "lvgrid/network.hpp"
#include "lvgrid/synthetic.hpp"

using namespace lvgrid;

static NetworkModel parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_network_stream(in, "test");
}

TEST_CASE("two-bus network parses with per-unit impedance") {
    NetworkModel net = parse_text(
        "[buses]\n"
        "tr,slack,\n"
        "b1,load,h1\n"
        "[lines]\n"
        "tr,b1,0.1,0.3,0.1,200\n"
        "[transformer]\n"
        "630,400\n");
    REQUIRE(net.buses.size() == 2);
    REQUIRE(net.lines.size() == 1);
    CHECK(net.s_base_kva == 630);
    CHECK(net.v_base_v == 400);
    // z_ohm = (0.03 + 0.01j), z_pu = z * 630e3 / 400^2
    CHECK(net.lines[0].z_pu.real() == doctest::Approx(0.118125).epsilon(1e-12));
    CHECK(net.lines[0].z_pu.imag() == doctest::Approx(0.039375).epsilon(1e-12));
    CHECK(net.slack == 0);
    CHECK(net.buses[1].building_ids == std::vector<std::string>{"h1"});
}

TEST_CASE("cycle is rejected with the offending edge named") {
    try {
        parse_text(
            "[buses]\ntr,slack,\nb1,load,\nb2,load,\n"
            "[lines]\ntr,b1,0.1,0.3,0.1,200\nb1,b2,0.1,0.3,0.1,200\nb2,tr,0.1,0.3,0.1,200\n"
            "[transformer]\n630,400\n");
        FAIL("expected TopologyError");
    } catch (const TopologyError& e) {
        CHECK(std::string(e.what()).find("not radial") != std::string::npos);
        CHECK(std::string(e.what()).find("b2-tr") != std::string::npos);
    }
}

TEST_CASE("disconnected bus is rejected") {
    CHECK_THROWS_AS(parse_text("[buses]\ntr,slack,\nb1,load,\nb2,load,\n"
                               "[lines]\ntr,b1,0.1,0.3,0.1,200\n"
                               "[transformer]\n630,400\n"),
                    TopologyError);
}

TEST_CASE("missing slack and zero ampacity are rejected") {
    CHECK_THROWS_AS(parse_text("[buses]\nb0,load,\nb1,load,\n"
                               "[lines]\nb0,b1,0.1,0.3,0.1,200\n[transformer]\n630,400\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_text("[buses]\ntr,slack,\nb1,load,\n"
                               "[lines]\ntr,b1,0.1,0.3,0.1,0\n[transformer]\n630,400\n"),
                    ValidationError);
}

TEST_CASE("malformed rows carry line numbers") {
    try {
        parse_text("[buses]\ntr,slack,\nb1\n[transformer]\n630,400\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

TEST_CASE("rural-like synthetic fixture: 24 injection points on 630 kVA") {
    FixtureOptions fo;
    fo.n_buildings = 24;
    fo.transformer_kva = 630;
    Fixture fx = make_fixture(fo);
    CHECK(fx.net.buses.size() == fx.net.lines.size() + 1);
    CHECK(fx.net.buses.size() == 25);
    CHECK(fx.net.transformer.rated_kva == 630);
    // radiality: traversal from the slack reaches every bus
    CHECK(fx.net.order.size() == fx.net.buses.size());
}

TEST_CASE("per-unit round trip reproduces ohmic impedance within 1e-12") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int k = 0; k < 200; ++k) {
        double r = u(rng), x = u(rng), len = u(rng);
        std::ostringstream net;
        net.precision(17);
        net << "[buses]\ntr,slack,\nb1,load,\n[lines]\ntr,b1," << len << "," << r << "," << x
            << ",200\n[transformer]\n" << 100 + 900 * u(rng) / 5 << ",400\n";
        NetworkModel n = parse_text(net.str());
        std::complex<double> back = n.lines[0].z_pu * n.z_base_ohm();
        CHECK(std::abs(back.real() - r * len) <= 1e-12 * std::abs(r * len));
        CHECK(std::abs(back.imag() - x * len) <= 1e-12 * std::abs(x * len));
    }
}

TEST_CASE("building mapping: sizes, dangling reference, empty set") {
    NetworkModel net = parse_text(
        "[buses]\ntr,slack,\nb1,load,\nb2,load,\n"
        "[lines]\ntr,b1,0.1,0.3,0.1,200\nb1,b2,0.1,0.3,0.1,200\n"
        "[transformer]\n630,400\n");
    std::vector<BuildingRecord> bs(3);
    bs[0].id = "x";
    bs[0].bus_id = "b1";
    bs[1].id = "y";
    bs[1].bus_id = "b1";
    bs[2].id = "z";
    bs[2].bus_id = "b2";
    auto map = validate_building_mapping(net, bs);
    CHECK(map[1].size() == 2);
    CHECK(map[2].size() == 1);
    size_t total = 0;
    for (const auto& v : map) total += v.size();
    CHECK(total == 3);

    bs[2].bus_id = "B99";
    CHECK_THROWS_AS(validate_building_mapping(net, bs), ValidationError);

    auto empty = validate_building_mapping(net, {});
    for (const auto& v : empty) CHECK(v.empty());
}
