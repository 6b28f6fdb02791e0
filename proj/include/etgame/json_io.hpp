#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "etgame/oracle.hpp"
#include "etgame/types.hpp"

namespace etgame {

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto& a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw std::invalid_argument(where + ": unknown field '" + it.key() + "'");
    }
}

inline double finite_number(const nlohmann::json& obj, const std::string& key,
                            const std::string& where) {
    if (!obj.contains(key)) throw std::invalid_argument(where + ": missing field '" + key + "'");
    if (!obj[key].is_number())
        throw std::invalid_argument(where + ": field '" + key + "' must be a number");
    const double v = obj[key].get<double>();
    if (!std::isfinite(v))
        throw std::invalid_argument(where + ": field '" + key + "' must be finite");
    return v;
}

}  // namespace detail

/// Parses and validates a versioned scenario document.
inline Scenario parse_scenario(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("scenario: top level must be an object");
    detail::reject_unknown(doc, {"schema_version", "population", "costs", "service",
                                 "availability", "alpha"},
                           "scenario");
    if (!doc.contains("schema_version") || doc["schema_version"] != "1")
        throw std::invalid_argument("scenario: schema_version must be \"1\"");

    Scenario sc;

    if (!doc.contains("population") || !doc["population"].is_object())
        throw std::invalid_argument("scenario: 'population' object required");
    {
        const auto& p = doc["population"];
        detail::reject_unknown(p, {"kind", "n", "lambda", "pmf"}, "population");
        const std::string kind = p.value("kind", "");
        if (kind == "deterministic") {
            if (!p.contains("n") || !p["n"].is_number_integer())
                throw std::invalid_argument("population: integer 'n' required");
            sc.population = PopulationModel::deterministic(p["n"].get<int>());
        } else if (kind == "poisson") {
            sc.population = PopulationModel::poisson(detail::finite_number(p, "lambda", "population"));
        } else if (kind == "general") {
            if (!p.contains("pmf") || !p["pmf"].is_array())
                throw std::invalid_argument("population: array 'pmf' required");
            std::vector<double> pi;
            for (const auto& q : p["pmf"]) {
                if (!q.is_number() || !std::isfinite(q.get<double>()))
                    throw std::invalid_argument("population: pmf entries must be finite numbers");
                pi.push_back(q.get<double>());
            }
            sc.population = PopulationModel::general(std::move(pi));
        } else {
            throw std::invalid_argument("population: kind must be deterministic|poisson|general");
        }
    }

    if (!doc.contains("costs") || !doc["costs"].is_array() || doc["costs"].empty())
        throw std::invalid_argument("scenario: nonempty 'costs' array required");
    for (const auto& c : doc["costs"]) {
        if (!c.is_object()) throw std::invalid_argument("costs: entries must be objects");
        detail::reject_unknown(c, {"kind", "d", "gamma", "beta", "table"}, "costs");
        const std::string kind = c.value("kind", "linear");
        const double d = c.contains("d") ? detail::finite_number(c, "d", "costs") : 0.0;
        if (kind == "linear") {
            sc.costs.push_back(DeviationCost::linear(d, detail::finite_number(c, "gamma", "costs"),
                                                     detail::finite_number(c, "beta", "costs")));
        } else if (kind == "quadratic") {
            sc.costs.push_back(DeviationCost::quadratic(d,
                                                        detail::finite_number(c, "gamma", "costs"),
                                                        detail::finite_number(c, "beta", "costs")));
        } else if (kind == "tabulated") {
            if (!c.contains("table") || !c["table"].is_array())
                throw std::invalid_argument("costs: tabulated kind needs a 'table' array");
            std::vector<std::pair<double, double>> pts;
            for (const auto& row : c["table"]) {
                if (!row.is_array() || row.size() != 2 || !row[0].is_number() ||
                    !row[1].is_number())
                    throw std::invalid_argument("costs: table rows must be [s, value] pairs");
                pts.emplace_back(row[0].get<double>(), row[1].get<double>());
            }
            sc.costs.push_back(DeviationCost::tabulated(d, std::move(pts)));
        } else {
            throw std::invalid_argument("costs: kind must be linear|quadratic|tabulated");
        }
    }

    if (!doc.contains("service") || !doc["service"].is_object())
        throw std::invalid_argument("scenario: 'service' object required");
    {
        const auto& s = doc["service"];
        detail::reject_unknown(s, {"kind", "a", "b", "p", "rate"}, "service");
        const std::string kind = s.value("kind", "");
        if (kind == "unit") {
            sc.service = ServiceTimeModel::unit();
        } else if (kind == "two_point") {
            sc.service = ServiceTimeModel::two_point(detail::finite_number(s, "a", "service"),
                                                     detail::finite_number(s, "b", "service"),
                                                     detail::finite_number(s, "p", "service"));
        } else if (kind == "exponential") {
            sc.service = ServiceTimeModel::exponential(detail::finite_number(s, "rate", "service"));
        } else {
            throw std::invalid_argument("service: kind must be unit|two_point|exponential");
        }
    }

    if (doc.contains("availability") && !doc["availability"].is_null()) {
        const auto& a = doc["availability"];
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
            throw std::invalid_argument("scenario: availability must be [a, b] or null");
        sc.availability = {a[0].get<double>(), a[1].get<double>()};
        if (!std::isfinite(sc.availability->first) || !std::isfinite(sc.availability->second))
            throw std::invalid_argument("scenario: availability bounds must be finite");
    }

    sc.alpha = doc.contains("alpha") ? detail::finite_number(doc, "alpha", "scenario") : 0.0;
    sc.validate();
    return sc;
}

/// Rounds to 12 significant digits through the shortest decimal text form so
/// that serialized documents are byte-identical across runs and platforms.
inline double round12(double v) {
    if (!std::isfinite(v)) return v;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.11e", v);
    return std::strtod(buf, nullptr);
}

inline nlohmann::json certification_json(const Certification& cert) {
    nlohmann::json j;
    j["candidate"] = round12(cert.candidate);
    j["is_equilibrium"] = cert.is_equilibrium;
    j["best_deviation"] = round12(cert.best_deviation);
    j["best_is_moment_before"] = cert.best_is_moment_before;
    j["gain"] = round12(cert.gain);
    j["se"] = round12(cert.se);
    j["grid_step"] = round12(cert.grid_step);
    j["mc_samples"] = cert.mc_samples;
    j["seed"] = cert.seed;
    j["epsilon"] = round12(cert.epsilon);
    return j;
}

}  // namespace etgame
