#include <catch2/catch_amalgamated.hpp>

#include "nxwlan/control.hpp"

using namespace nxwlan;

namespace {

constexpr std::uint64_t kRttUs = 20000;

struct Node {
    Dot11Switch sw;
    EapController ctl;

    explicit Node(const std::string& name, SetupPolicy policy = SetupPolicy::Accept)
        : ctl(name, sw, policy, BackhaulCaps{50, 50}, SteeringParams{},
              MacAddr::parse("02:00:00:00:0" + name.substr(0, 1) + ":01"),
              MacAddr::parse("02:00:00:00:0" + name.substr(0, 1) + ":02"), name + "net",
              kRttUs) {}
};

// Delivers every outbox message between two controllers until both are quiet.
void pump(Node& a, Node& b, std::uint64_t now = 0) {
    bool moved = true;
    while (moved) {
        moved = false;
        for (auto nodes : {std::pair{&a, &b}, std::pair{&b, &a}}) {
            auto& src = *nodes.first;
            auto& dst = *nodes.second;
            auto msgs = src.ctl.outbox();
            src.ctl.outbox().clear();
            for (const auto& msg : msgs) {
                if (msg.to != dst.ctl.name()) continue;
                moved = true;
                if (const auto* req = std::get_if<WtpSetupRequest>(&msg.body))
                    dst.ctl.on_setup_request(msg, *req);
                else if (const auto* c = std::get_if<WtpSetupComplete>(&msg.body))
                    dst.ctl.on_setup_complete(msg, *c, now);
                else if (const auto* r = std::get_if<BackhaulReport>(&msg.body))
                    dst.ctl.on_backhaul_report(msg.from, *r);
            }
        }
    }
}

} // namespace

TEST_CASE("control message codec round-trips every variant") {
    EapIdMap ids{{"alice", 0}, {"bob", 1}};
    SECTION("setup request") {
        ControlMsg msg{"bob", "alice",
                       WtpSetupRequest{"bob", 7, MacAddr::parse("02:00:00:00:01:02"), "bobnet"}};
        auto bytes = encode_control(msg, ids);
        // kind + envelope + requester + endpoint + bssid + ssid_len + ssid
        REQUIRE(bytes.size() == 1 + 4 + 2 + 2 + 6 + 1 + 6);
        auto back = decode_control(bytes, ids);
        REQUIRE(back);
        REQUIRE(back->from == "bob");
        REQUIRE(back->to == "alice");
        const auto& req = std::get<WtpSetupRequest>(back->body);
        REQUIRE(req.requester == "bob");
        REQUIRE(req.tunnel_endpoint == 7);
        REQUIRE(req.ssid == "bobnet");
        REQUIRE(req.vap_bssid == MacAddr::parse("02:00:00:00:01:02"));
    }
    SECTION("setup complete") {
        ControlMsg msg{"alice", "bob", WtpSetupComplete{3, 12}};
        auto bytes = encode_control(msg, ids);
        REQUIRE(bytes.size() == 9);
        auto back = decode_control(bytes, ids);
        REQUIRE(back);
        const auto& c = std::get<WtpSetupComplete>(back->body);
        REQUIRE(c.tunnel_endpoint == 3);
        REQUIRE(c.wtp_port == 12);
    }
    SECTION("backhaul report") {
        ControlMsg msg{"bob", "alice", BackhaulReport{49.5, 0.25}};
        auto bytes = encode_control(msg, ids);
        REQUIRE(bytes.size() == 21);
        auto back = decode_control(bytes, ids);
        REQUIRE(back);
        const auto& r = std::get<BackhaulReport>(back->body);
        REQUIRE(r.dl_mbps == 49.5);
        REQUIRE(r.ul_mbps == 0.25);
    }
    SECTION("garbage is rejected") {
        REQUIRE_FALSE(decode_control({}, ids).has_value());
        REQUIRE_FALSE(decode_control({9, 0, 0, 0, 1}, ids).has_value());
    }
}

TEST_CASE("no control message variant structurally admits key material") {
    STATIC_REQUIRE(!CarriesCredentials<WtpSetupRequest>);
    STATIC_REQUIRE(!CarriesCredentials<WtpSetupComplete>);
    STATIC_REQUIRE(!CarriesCredentials<BackhaulReport>);
}

TEST_CASE("discovery emits one setup request and is idempotent") {
    Node bob("bob");
    bob.ctl.on_discovery("alice", 0);
    REQUIRE(bob.ctl.outbox().size() == 1);
    REQUIRE(std::holds_alternative<WtpSetupRequest>(bob.ctl.outbox()[0].body));
    REQUIRE(bob.ctl.phase("alice") == NeighborPhase::SetupRequested);
    REQUIRE(bob.ctl.timer_requests().size() == 1);
    REQUIRE(bob.ctl.timer_requests()[0].deadline_us == 3 * kRttUs);

    bob.ctl.on_discovery("alice", 10);  // duplicate while pending
    REQUIRE(bob.ctl.outbox().size() == 1);

    bob.ctl.on_discovery("bob", 10);    // self discovery ignored
    REQUIRE(bob.ctl.outbox().size() == 1);
    REQUIRE_FALSE(bob.ctl.phase("bob").has_value());
}

TEST_CASE("accepting handshake establishes the pair and wires both switches") {
    Node bob("bob"), alice("alice");
    bob.ctl.on_discovery("alice", 0);
    pump(bob, alice);

    REQUIRE(bob.ctl.phase("alice") == NeighborPhase::Established);
    // Host side has WTP radio + tunnel ports beyond the three base ports.
    REQUIRE(alice.sw.ports().size() == 5);
    const auto& host = alice.ctl.host_sides().at("bob");
    REQUIRE(host.wtp_radio_port.role == PortRole::WtpRadio);
    REQUIRE(host.tunnel_port.role == PortRole::Tunnel);
    REQUIRE(host.ssid == "bobnet");

    // Probe fan-in: a probe request sniffed at the WTP heads into the tunnel.
    TaggedFrame probe;
    probe.frame.kind = FrameKind::ProbeRequest;
    probe.frame.addr1 = MacAddr::broadcast();
    probe.frame.addr2 = MacAddr::parse("02:00:00:00:10:01");
    auto res = alice.sw.process(host.wtp_radio_port, probe);
    REQUIRE(res.out.size() == 1);
    REQUIRE(res.out[0].first == host.tunnel_port);

    // Uplink to the VAP BSSID heads into the tunnel as well.
    TaggedFrame up;
    up.frame.kind = FrameKind::AuthRequest;
    up.frame.addr1 = MacAddr::parse("02:00:00:00:0b:02");
    up.frame.addr2 = MacAddr::parse("02:00:00:00:10:01");
    REQUIRE(alice.sw.process(host.wtp_radio_port, up).out.size() == 1);

    // Home side routes tunneled uplink into the VAP and beacons into the tunnel.
    const auto& side = bob.ctl.vap_sides().at("alice");
    REQUIRE(side.tunnel_port.has_value());
    REQUIRE(bob.sw.process(*side.tunnel_port, up).out[0].first == bob.ctl.vap_port());
    auto fan = bob.sw.process(*side.tunnel_port, probe);
    REQUIRE(fan.out.size() == 1);
    REQUIRE(fan.out[0].first == bob.ctl.vap_port());
    TaggedFrame beacon;
    beacon.frame.kind = FrameKind::Beacon;
    beacon.frame.addr1 = MacAddr::broadcast();
    beacon.frame.addr2 = MacAddr::parse("02:00:00:00:0b:02");
    REQUIRE(bob.sw.process(bob.ctl.vap_port(), beacon).out.size() == 1);
}

TEST_CASE("rejecting policy stays silent and leaves the requester unchanged") {
    Node bob("bob");
    Node alice("alice", SetupPolicy::Reject);
    const std::string ports_before = bob.sw.dump_rules();
    const std::size_t port_count_before = bob.sw.ports().size();

    bob.ctl.on_discovery("alice", 0);
    const auto token = bob.ctl.timer_requests()[0].token;
    pump(bob, alice);
    REQUIRE(alice.ctl.outbox().empty());          // rejection does not respond
    REQUIRE(alice.sw.ports().size() == 3);        // no WTP created
    REQUIRE(alice.ctl.host_sides().empty());

    bob.ctl.on_timeout("alice", token);
    REQUIRE(bob.ctl.phase("alice") == NeighborPhase::Silent);
    REQUIRE(bob.sw.ports().size() == port_count_before);
    REQUIRE(bob.sw.dump_rules() == ports_before);

    // Retry on the next discovery tick.
    bob.ctl.outbox().clear();
    bob.ctl.on_discovery("alice", 1000);
    REQUIRE(bob.ctl.outbox().size() == 1);
    REQUIRE(bob.ctl.phase("alice") == NeighborPhase::SetupRequested);
}

TEST_CASE("duplicate setup request re-sends the confirmation without a second WTP") {
    Node bob("bob"), alice("alice");
    bob.ctl.on_discovery("alice", 0);
    auto request = bob.ctl.outbox()[0];
    pump(bob, alice);
    const std::size_t ports = alice.sw.ports().size();

    alice.ctl.on_setup_request(request, std::get<WtpSetupRequest>(request.body));
    REQUIRE(alice.sw.ports().size() == ports);
    REQUIRE(alice.ctl.outbox().size() == 1);
    REQUIRE(std::holds_alternative<WtpSetupComplete>(alice.ctl.outbox()[0].body));
}

TEST_CASE("late or unknown setup complete is dropped as unexpected") {
    Node bob("bob");
    SECTION("unknown neighbor") {
        ControlMsg msg{"alice", "bob", WtpSetupComplete{1, 2}};
        bob.ctl.on_setup_complete(msg, std::get<WtpSetupComplete>(msg.body), 0);
        REQUIRE(bob.ctl.unexpected_msgs() == 1);
        REQUIRE_FALSE(bob.ctl.phase("alice").has_value());
    }
    SECTION("after the timeout already fired") {
        bob.ctl.on_discovery("alice", 0);
        const auto token = bob.ctl.timer_requests()[0].token;
        bob.ctl.on_timeout("alice", token);
        REQUIRE(bob.ctl.phase("alice") == NeighborPhase::Silent);
        ControlMsg msg{"alice", "bob", WtpSetupComplete{1, 2}};
        bob.ctl.on_setup_complete(msg, std::get<WtpSetupComplete>(msg.body), 100);
        REQUIRE(bob.ctl.unexpected_msgs() == 1);
        REQUIRE(bob.ctl.phase("alice") == NeighborPhase::Silent);
    }
}

TEST_CASE("backhaul reports are cached only from established VAP owners") {
    Node bob("bob"), alice("alice");
    SECTION("report from a stranger is dropped") {
        alice.ctl.on_backhaul_report("bob", {50, 50});
        REQUIRE(alice.ctl.unexpected_msgs() == 1);
        REQUIRE(alice.ctl.cached_reports().empty());
    }
    SECTION("report after establishment feeds steering") {
        bob.ctl.on_discovery("alice", 0);
        pump(bob, alice);
        alice.ctl.on_backhaul_report("bob", {50, 50});
        REQUIRE(alice.ctl.cached_reports().at("bob").dl_mbps == 50);

        auto d = alice.ctl.on_probe_request(MacAddr::parse("02:00:00:00:10:01"), -60, {{}});
        REQUIRE(d.vaps.count("bob") == 1);
        REQUIRE(d.vaps.at("bob").willingness == 1.0);

        // The host pre-installs the downlink rule for the probing station.
        const auto& host = alice.ctl.host_sides().at("bob");
        TaggedFrame down;
        down.frame.kind = FrameKind::ProbeResponse;
        down.frame.addr1 = MacAddr::parse("02:00:00:00:10:01");
        down.frame.addr2 = MacAddr::parse("02:00:00:00:0b:02");
        down.frame.addr3 = down.frame.addr2;
        auto res = alice.sw.process(host.tunnel_port, down);
        REQUIRE(res.out.size() == 1);
        REQUIRE(res.out[0].first == host.wtp_radio_port);
    }
    SECTION("zero uplink report collapses the willingness") {
        bob.ctl.on_discovery("alice", 0);
        pump(bob, alice);
        alice.ctl.on_backhaul_report("bob", {50, 0});
        auto d = alice.ctl.on_probe_request(MacAddr::parse("02:00:00:00:10:01"), -60, {{}});
        REQUIRE(d.vaps.at("bob").willingness == 0.0);
    }
    SECTION("a probe predicting zero PHY rate schedules no response") {
        bob.ctl.on_discovery("alice", 0);
        pump(bob, alice);
        alice.ctl.on_backhaul_report("bob", {50, 50});
        const MacAddr sta = MacAddr::parse("02:00:00:00:10:01");
        auto d = alice.ctl.on_probe_request(sta, -85, {{}});  // below the lowest table threshold
        REQUIRE(d.predicted_phy_mbps == 0);
        REQUIRE(d.vaps.at("bob").willingness == 0.0);
        // Without the downlink rule a tunneled response dies in the switch.
        const auto& host = alice.ctl.host_sides().at("bob");
        TaggedFrame down;
        down.frame.kind = FrameKind::ProbeResponse;
        down.frame.addr1 = sta;
        down.frame.addr2 = MacAddr::parse("02:00:00:00:0b:02");
        down.frame.addr3 = down.frame.addr2;
        REQUIRE(alice.sw.process(host.tunnel_port, down).dropped());
    }
}

TEST_CASE("roam rewrites the downlink rule pair") {
    Node bob("bob"), alice("alice"), carol("carol");
    bob.ctl.on_discovery("alice", 0);
    pump(bob, alice);
    bob.ctl.on_discovery("carol", 0);
    pump(bob, carol);

    const MacAddr sta = MacAddr::parse("02:00:00:00:10:01");
    const auto tun_alice = *bob.ctl.vap_sides().at("alice").tunnel_port;
    const auto tun_carol = *bob.ctl.vap_sides().at("carol").tunnel_port;

    TaggedFrame down;
    down.frame.kind = FrameKind::Data;
    down.frame.addr1 = sta;
    down.frame.addr2 = MacAddr::parse("02:00:00:00:0b:02");
    down.frame.addr3 = down.frame.addr2;
    down.frame.protected_frame = true;

    SECTION("unknown station") {
        REQUIRE_THROWS_AS(bob.ctl.roam(sta, RoamTarget{true, {}}), UnknownSta);
    }
    SECTION("wtp to wtp") {
        bob.ctl.on_association(sta, RoamTarget{false, "alice"});
        REQUIRE(bob.sw.process(bob.ctl.vap_port(), down).out[0].first == tun_alice);
        bob.ctl.roam(sta, RoamTarget{false, "carol"});
        auto res = bob.sw.process(bob.ctl.vap_port(), down);
        REQUIRE(res.out.size() == 1);
        REQUIRE(res.out[0].first == tun_carol);
        // LAN ingress still heads to the VAP for encryption.
        REQUIRE(bob.sw.process(bob.ctl.lan_port(), down).out[0].first == bob.ctl.vap_port());
    }
    SECTION("wtp to rap and back") {
        bob.ctl.on_association(sta, RoamTarget{false, "alice"});
        bob.ctl.roam(sta, RoamTarget{true, {}});
        REQUIRE(bob.sw.process(bob.ctl.lan_port(), down).out[0].first == bob.ctl.rap_port());
        REQUIRE(bob.sw.process(bob.ctl.vap_port(), down).dropped());
        bob.ctl.roam(sta, RoamTarget{false, "alice"});
        REQUIRE(bob.sw.process(bob.ctl.vap_port(), down).out[0].first == tun_alice);
    }
    SECTION("roam to the current attachment is a no-op") {
        bob.ctl.on_association(sta, RoamTarget{false, "alice"});
        const std::string before = bob.sw.dump_rules();
        bob.ctl.roam(sta, RoamTarget{false, "alice"});
        REQUIRE(bob.sw.dump_rules() == before);
    }
    SECTION("every frame between roams lands on exactly one of old/new") {
        bob.ctl.on_association(sta, RoamTarget{false, "alice"});
        for (int i = 0; i < 50; ++i) {
            auto res = bob.sw.process(bob.ctl.vap_port(), down);
            REQUIRE(res.out.size() == 1);
            const auto egress = res.out[0].first;
            REQUIRE((egress == tun_alice || egress == tun_carol));
            bob.ctl.roam(sta, i % 2 ? RoamTarget{false, "alice"} : RoamTarget{false, "carol"});
        }
    }
}

TEST_CASE("handshake leaves no path for credentials on the wire") {
    // Serialize one of each variant and check the documented layouts: the
    // request body is requester + endpoint + bssid + ssid, nothing else.
    EapIdMap ids{{"a", 0}, {"b", 1}};
    ControlMsg req{"a", "b", WtpSetupRequest{"a", 1, MacAddr{}, "x"}};
    REQUIRE(encode_control(req, ids).size() == 16 + 1);
    ControlMsg comp{"a", "b", WtpSetupComplete{}};
    REQUIRE(encode_control(comp, ids).size() == 9);
    ControlMsg rep{"a", "b", BackhaulReport{}};
    REQUIRE(encode_control(rep, ids).size() == 21);
}
