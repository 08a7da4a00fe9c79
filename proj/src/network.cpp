#include "lvgrid/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lvgrid/buildings.hpp"
#include "lvgrid/common.hpp"
#include "lvgrid/csv.hpp"

namespace lvgrid {

int NetworkModel::bus_index(const std::string& id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) {
        for (int i = 0; i < n; ++i) p[i] = i;
    }
    int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        p[a] = b;
        return true;
    }
};

std::string edge_name(const NetworkModel& net, const Line& l) {
    return net.buses[l.from].id + "-" + net.buses[l.to].id;
}

void build_tree(NetworkModel& net, const std::string& name) {
    int n = static_cast<int>(net.buses.size());
    int m = static_cast<int>(net.lines.size());
    if (m != n - 1) {
        // pinpoint the offending edges: those closing a cycle under union-find
        UnionFind uf(n);
        std::string cyc;
        for (const Line& l : net.lines)
            if (!uf.unite(l.from, l.to)) cyc += (cyc.empty() ? "" : ", ") + edge_name(net, l);
        std::string msg = name + ": not radial: " + std::to_string(m) + " lines for " +
                          std::to_string(n) + " buses";
        if (!cyc.empty()) msg += "; cycle-closing edges: " + cyc;
        throw TopologyError("grid-model", msg);
    }
    // adjacency + BFS from slack
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor bus, line idx)
    for (int li = 0; li < m; ++li) {
        adj[net.lines[li].from].push_back({net.lines[li].to, li});
        adj[net.lines[li].to].push_back({net.lines[li].from, li});
    }
    net.parent.assign(n, -2);
    net.parent_line.assign(n, -1);
    net.order.clear();
    net.order.push_back(net.slack);
    net.parent[net.slack] = -1;
    for (size_t head = 0; head < net.order.size(); ++head) {
        int b = net.order[head];
        for (auto [nb, li] : adj[b]) {
            if (net.parent[nb] != -2) continue;
            net.parent[nb] = b;
            net.parent_line[nb] = li;
            net.order.push_back(nb);
        }
    }
    if (static_cast<int>(net.order.size()) != n) {
        std::string unreachable;
        for (int b = 0; b < n; ++b)
            if (net.parent[b] == -2)
                unreachable += (unreachable.empty() ? "" : ", ") + net.buses[b].id;
        throw TopologyError("grid-model", name + ": disconnected buses: " + unreachable);
    }
}

} // namespace

NetworkModel parse_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("grid-model", "cannot open '" + path + "'");
    return parse_network_stream(in, path);
}

NetworkModel parse_network_stream(std::istream& in, const std::string& name) {
    NetworkModel net;
    std::unordered_map<std::string, int> bus_idx;
    struct RawLine {
        std::string from, to;
        double len, r, x, amp;
        int lineno;
    };
    std::vector<RawLine> raw_lines;
    bool have_trafo = false;

    std::string line, section;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw ParseError("grid-model", name + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        size_t a = line.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r\n");
        std::string s = line.substr(a, b - a + 1);
        if (s[0] == '#') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = s.substr(1, s.size() - 2);
            if (section != "buses" && section != "lines" && section != "transformer")
                fail("unknown section [" + section + "]");
            continue;
        }
        std::vector<std::string> f = csv::split(s);
        if (section == "buses") {
            if (f.size() < 2) fail("bus row needs 'id,kind[,buildings]'");
            Bus bus;
            bus.id = f[0];
            if (bus.id.empty()) fail("empty bus id");
            if (bus_idx.count(bus.id)) fail("duplicate bus id '" + bus.id + "'");
            if (f[1] == "slack")
                bus.is_slack = true;
            else if (f[1] != "load")
                fail("bus kind must be slack|load, got '" + f[1] + "'");
            if (f.size() >= 3 && !f[2].empty())
                for (const std::string& bid : csv::split(f[2], ';'))
                    if (!bid.empty()) bus.building_ids.push_back(bid);
            bus_idx[bus.id] = static_cast<int>(net.buses.size());
            net.buses.push_back(bus);
        } else if (section == "lines") {
            if (f.size() < 6) fail("line row needs 'from,to,length_km,r_ohm_km,x_ohm_km,ampacity_a'");
            RawLine rl;
            rl.from = f[0];
            rl.to = f[1];
            rl.len = csv::to_double(f[2], name);
            rl.r = csv::to_double(f[3], name);
            rl.x = csv::to_double(f[4], name);
            rl.amp = csv::to_double(f[5], name);
            rl.lineno = lineno;
            raw_lines.push_back(rl);
        } else if (section == "transformer") {
            if (f.size() < 2) fail("transformer row needs 'rated_kva,lv_voltage_v'");
            net.transformer.rated_kva = csv::to_double(f[0], name);
            net.transformer.lv_voltage_v = csv::to_double(f[1], name);
            have_trafo = true;
        } else {
            fail("data before any section header");
        }
    }

    if (net.buses.empty()) throw ParseError("grid-model", name + ": no [buses] section");
    if (!have_trafo) throw ParseError("grid-model", name + ": no [transformer] section");
    if (net.transformer.rated_kva <= 0 || net.transformer.lv_voltage_v <= 0)
        throw ValidationError("grid-model", name + ": transformer rating and voltage must be > 0");

    int slack_count = 0;
    for (size_t i = 0; i < net.buses.size(); ++i)
        if (net.buses[i].is_slack) {
            ++slack_count;
            net.slack = static_cast<int>(i);
        }
    if (slack_count != 1)
        throw ValidationError("grid-model", name + ": need exactly one slack bus, found " +
                                                std::to_string(slack_count));

    net.s_base_kva = net.transformer.rated_kva;
    net.v_base_v = net.transformer.lv_voltage_v;
    double z_base = net.z_base_ohm();

    for (const auto& rl : raw_lines) {
        Line l;
        auto it_f = bus_idx.find(rl.from);
        auto it_t = bus_idx.find(rl.to);
        if (it_f == bus_idx.end() || it_t == bus_idx.end())
            throw ParseError("grid-model", name + ":" + std::to_string(rl.lineno) +
                                               ": line references unknown bus");
        l.from = it_f->second;
        l.to = it_t->second;
        l.length_km = rl.len;
        l.r_ohm_per_km = rl.r;
        l.x_ohm_per_km = rl.x;
        l.ampacity_a = rl.amp;
        if (l.ampacity_a <= 0)
            throw ValidationError("grid-model", name + ":" + std::to_string(rl.lineno) +
                                                    ": ampacity must be > 0");
        if (l.r_ohm_per_km < 0 || l.x_ohm_per_km < 0 || l.length_km < 0)
            throw ValidationError("grid-model", name + ":" + std::to_string(rl.lineno) +
                                                    ": negative impedance or length");
        l.z_pu = l.z_ohm() / z_base;
        net.lines.push_back(l);
    }

    build_tree(net, name);
    return net;
}

std::vector<std::vector<int>> validate_building_mapping(const NetworkModel& net,
                                                        const std::vector<BuildingRecord>& buildings) {
    std::vector<std::vector<int>> map(net.buses.size());
    for (size_t bi = 0; bi < buildings.size(); ++bi) {
        int bus = net.bus_index(buildings[bi].bus_id);
        if (bus < 0)
            throw ValidationError("grid-model", "building '" + buildings[bi].id +
                                                    "' references unknown bus '" +
                                                    buildings[bi].bus_id + "'");
        map[bus].push_back(static_cast<int>(bi));
    }
    return map;
}

} // namespace lvgrid
