#include "pricemfg/model_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pricemfg/errors.hpp"

namespace pricemfg {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string("config: missing required key '") + key + "'");
    return *it;
}

double num(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> num_array(const json& v, const char* what) {
    if (!v.is_array()) throw ConfigError(std::string("config: '") + what + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(std::string("config: '") + what + "' holds a non-number");
        out.push_back(x.get<double>());
    }
    return out;
}

SupplySchedule parse_supply(const json& j, double horizon) {
    const json& s = require(j, "supply");
    auto interp = SupplySchedule::Interp::Cubic;
    if (s.contains("interpolation")) {
        const std::string kind = s["interpolation"].get<std::string>();
        if (kind == "linear") interp = SupplySchedule::Interp::Linear;
        else if (kind == "cubic") interp = SupplySchedule::Interp::Cubic;
        else throw ConfigError("config: supply.interpolation must be 'linear' or 'cubic'");
    }
    if (s.contains("inline")) {
        const json& in = s["inline"];
        auto sched = SupplySchedule(num_array(require(in, "times"), "supply.inline.times"),
                                    num_array(require(in, "values"), "supply.inline.values"), interp);
        if (!sched.covers(horizon))
            throw ConfigError("config: supply samples do not cover [0, horizon]");
        return sched;
    }
    if (s.contains("path")) {
        std::ifstream f(s["path"].get<std::string>());
        if (!f) throw ConfigError("config: cannot open supply csv " + s["path"].get<std::string>());
        std::string line;
        if (!std::getline(f, line)) throw ConfigError("config: supply csv is empty");
        const char sep = line.find(';') != std::string::npos ? ';' : ',';
        std::vector<double> ts, vs;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string a, b;
            std::getline(ss, a, sep);
            std::getline(ss, b, sep);
            ts.push_back(std::stod(a));
            vs.push_back(std::stod(b));
        }
        auto sched = SupplySchedule(std::move(ts), std::move(vs), interp);
        if (!sched.covers(horizon))
            throw ConfigError("config: supply csv does not cover [0, horizon]");
        return sched;
    }
    throw ConfigError("config: supply needs either 'path' or 'inline'");
}

}  // namespace

ModelProblem parse_model_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    try {
        const TimeGrid tg(num(j, "horizon"), (int)num(j, "n_t"));
        const SpaceGrid sg(num(j, "x_min"), num(j, "x_max"), (int)num(j, "n_x"));

        const json& pj = require(j, "potential");
        PotentialSpec pot;
        {
            const std::string kind = require(pj, "kind").get<std::string>();
            if (kind == "zero") pot = PotentialSpec::zero();
            else if (kind == "quadratic") pot = PotentialSpec::quadratic(num(pj, "eta"), num(pj, "kappa"));
            else if (kind == "tabulated") pot = PotentialSpec::tabulated(num_array(require(pj, "values"), "potential.values"));
            else throw ConfigError("config: potential.kind must be zero|quadratic|tabulated");
            if (pot.kind == PotentialSpec::Kind::Tabulated && (int)pot.table.size() != sg.n_nodes)
                throw ConfigError("config: potential.values size must equal n_x");
        }
        const HamiltonianSpec spec(num(j, "c"), num(j, "epsilon"), pot);

        const json& tj = require(j, "terminal");
        TerminalCost term = TerminalCost::quadratic(0.0, 0.0);
        {
            const std::string kind = require(tj, "kind").get<std::string>();
            if (kind == "quadratic") term = TerminalCost::quadratic(num(tj, "gamma"), num(tj, "zeta"));
            else if (kind == "tabulated") term = TerminalCost::tabulated(num_array(require(tj, "values"), "terminal.values"));
            else throw ConfigError("config: terminal.kind must be quadratic|tabulated");
            if (term.kind == TerminalCost::Kind::Tabulated && (int)term.table.size() != sg.n_nodes)
                throw ConfigError("config: terminal.values size must equal n_x");
        }

        const json& ij = require(j, "initial");
        const std::string ikind = require(ij, "kind").get<std::string>();
        InitialDensity init = [&]() {
            if (ikind == "gaussian")
                return InitialDensity::gaussian(sg, num(ij, "mean"), num(ij, "sigma"));
            if (ikind == "tabulated")
                return InitialDensity(sg, num_array(require(ij, "values"), "initial.values"));
            throw ConfigError("config: initial.kind must be gaussian|tabulated");
        }();

        return ModelProblem(sg, tg, spec, term, std::move(init), parse_supply(j, tg.horizon));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ModelProblem load_model_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_model_config(ss.str());
}

}  // namespace pricemfg
