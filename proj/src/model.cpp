#include "srsync/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace srsync {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

}

std::string_view to_string(Scenario s) {
    switch (s) {
    case Scenario::BiQuantum: return "BiQuantum";
    case Scenario::UniQuantum: return "UniQuantum";
    case Scenario::UniClassical: return "UniClassical";
    case Scenario::BiClassical: return "BiClassical";
    }
    return "?";
}

Scenario parse_scenario(std::string_view tag) {
    std::string t = lower(trim(tag));
    t.erase(std::remove_if(t.begin(), t.end(), [](char c) { return c == '-' || c == '_'; }),
            t.end());
    if (t == "biquantum" || t == "bq") return Scenario::BiQuantum;
    if (t == "uniquantum" || t == "uq") return Scenario::UniQuantum;
    if (t == "uniclassical" || t == "uc") return Scenario::UniClassical;
    if (t == "biclassical" || t == "bc") return Scenario::BiClassical;
    throw std::invalid_argument("unknown scenario '" + std::string(tag) + "'");
}

ModelParams ModelParams::make(Scenario s, int n, double n_gamma, double w, double delta,
                              double xi) {
    ModelParams p;
    p.n_atoms = n;
    p.collective_rate = n_gamma;
    p.pump = w;
    p.detuning = delta;
    p.feedback_strength = s == Scenario::BiClassical ? xi : 0.0;
    p.carrier = carrier_for(s);
    validate(p, s);
    return p;
}

void validate(const ModelParams& p) {
    if (p.n_atoms < 1) throw std::invalid_argument("n_atoms must be >= 1");
    if (!(p.collective_rate > 0.0) || !std::isfinite(p.collective_rate))
        throw std::invalid_argument("collective_rate must be positive");
    if (!(p.pump >= 0.0) || !std::isfinite(p.pump))
        throw std::invalid_argument("pump must be nonnegative");
    if (!std::isfinite(p.detuning)) throw std::invalid_argument("detuning must be finite");
    if (!(p.feedback_strength >= 0.0 && p.feedback_strength < 1.0))
        throw std::invalid_argument("feedback_strength must lie in [0, 1)");
}

void validate(const ModelParams& p, Scenario s) {
    validate(p);
    if (p.carrier != carrier_for(s))
        throw std::invalid_argument("carrier convention does not match scenario");
}

ModelParams dimensionless(const ModelParams& p) {
    validate(p);
    ModelParams q = p;
    double s = p.collective_rate;
    q.collective_rate = 1.0;
    q.pump = p.pump / s;
    q.detuning = p.detuning / s;
    return q;
}

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = lower(trim(t.substr(0, eq)));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("line " + std::to_string(lineno) + ": empty key");
        kv[key] = val;
    }
    return kv;
}

double parse_rate(const std::string& text, double n_gamma) {
    std::string t = trim(text);
    std::string l = lower(t);
    if (l.size() >= 2 && l.compare(l.size() - 2, 2, "hz") == 0) {
        return parse_number(trim(std::string_view(t).substr(0, t.size() - 2)));
    }
    return parse_number(t) * n_gamma;
}

ScenarioConfig params_from_config(const KeyValues& kv) {
    auto get = [&](std::initializer_list<const char*> keys) -> const std::string* {
        for (auto k : keys) {
            auto it = kv.find(k);
            if (it != kv.end()) return &it->second;
        }
        return nullptr;
    };
    ScenarioConfig c;
    if (auto v = get({"scenario"})) c.scenario = parse_scenario(*v);
    ModelParams& p = c.params;
    if (auto v = get({"n_atoms", "n"})) p.n_atoms = static_cast<int>(parse_number(*v));
    if (auto v = get({"collective_rate", "n_gamma"})) {
        std::string t = lower(trim(*v));
        if (t.size() >= 2 && t.compare(t.size() - 2, 2, "hz") == 0) t.resize(t.size() - 2);
        p.collective_rate = parse_number(trim(t));
    }
    if (auto v = get({"pump", "w"})) p.pump = parse_rate(*v, p.collective_rate);
    if (auto v = get({"detuning", "delta"})) p.detuning = parse_rate(*v, p.collective_rate);
    if (auto v = get({"feedback_strength", "xi"})) p.feedback_strength = parse_number(trim(*v));
    if (c.scenario != Scenario::BiClassical) p.feedback_strength = 0.0;
    p.carrier = carrier_for(c.scenario);
    validate(p, c.scenario);
    return c;
}

}
