// Command-line front end: scenario files in, JSON/CSV results out.
//
// Exit codes: 0 success, 1 input error, 2 empty equilibrium,
//             3 unsupported scope, 4 refuted certification.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "etgame/core.hpp"
#include "etgame/equilibrium.hpp"
#include "etgame/extensions.hpp"
#include "etgame/json_io.hpp"
#include "etgame/oracle.hpp"
#include "etgame/social.hpp"

namespace {

using nlohmann::json;
using namespace etgame;

constexpr int EXIT_OK = 0;
constexpr int EXIT_INPUT = 1;
constexpr int EXIT_EMPTY = 2;
constexpr int EXIT_UNSUPPORTED = 3;
constexpr int EXIT_REFUTED = 4;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("ETA_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw std::invalid_argument("ETA_SEED must be a nonnegative integer");
        }
    }
    return 12345;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario JSON parse error: ") + e.what());
    }
    return parse_scenario(doc);
}

json interval_json(const EquilibriumInterval& iv) {
    json j;
    j["lo"] = round12(iv.lo);
    j["hi"] = round12(iv.hi);
    j["empty"] = iv.empty;
    return j;
}

// The combinations the solvers cover; anything else must not be guessed at.
void check_scope(const Scenario& sc) {
    const bool stoch = sc.service.stochastic();
    const bool rpop = sc.population.kind != PopulationKind::Deterministic;
    const bool hetero = sc.costs.size() > 1;
    const bool waiting = sc.alpha > 0.0;
    const bool window = sc.availability.has_value();
    const int features = (stoch ? 1 : 0) + (rpop ? 1 : 0) + (hetero ? 1 : 0) +
                         (waiting ? 1 : 0) + (window ? 1 : 0);
    if (features > 1) throw unsupported_error("scenario combines features outside scope");
}

struct SolveOutput {
    json doc;
    EquilibriumInterval interval;
    int exit_code = EXIT_OK;
    bool certifiable = true;  // whether the oracle can check the interval
};

// Total symmetric-arrival cost at t for a homogeneous unimodal cost.
double symmetric_total(double t, int n, const DeviationCost& c) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += c(t + static_cast<double>(j));
    return acc;
}

SolveOutput solve_scenario(const Scenario& sc) {
    check_scope(sc);
    SolveOutput out;
    json& doc = out.doc;
    doc["schema_version"] = "1";
    doc["te"] = nullptr;
    doc["social_optimum"] = nullptr;
    doc["opt_is_equilibrium"] = nullptr;
    doc["poa"] = nullptr;
    doc["pos"] = nullptr;

    const bool stoch = sc.service.stochastic();
    const bool rpop = sc.population.kind != PopulationKind::Deterministic;
    const bool hetero = sc.costs.size() > 1;

    if (stoch) {
        const int n = sc.deterministic_n();
        const double beta = sc.costs[0].beta, gamma = sc.costs[0].gamma;
        if (sc.costs[0].kind != CostKind::LinearAsymmetric || sc.costs[0].d != 0.0)
            throw unsupported_error("stochastic service needs a linear cost with due date 0");
        if (sc.service.kind == ServiceKind::TwoPoint) {
            const double te = two_point_service_equilibrium(n, sc.service, beta, gamma);
            out.interval.lo = out.interval.hi = te;
            out.interval.te = te;
            doc["te"] = round12(te);
        } else {
            out.interval = exponential_equilibrium_interval(n, beta, gamma);
            if (out.interval.empty) out.exit_code = EXIT_EMPTY;
        }
        doc["interval"] = interval_json(out.interval);
        return out;
    }

    if (rpop) {
        if (sc.costs[0].kind != CostKind::LinearAsymmetric || sc.costs[0].d != 0.0)
            throw unsupported_error("random population needs a linear cost with due date 0");
        const RandomPopResult res =
            random_pop_interval(sc.population, sc.costs[0].beta, sc.costs[0].gamma);
        out.interval = res.interval;
        json so;
        so["s1_lo"] = round12(res.t_star_lo);
        so["s1_hi"] = round12(res.t_star_hi);
        doc["social_optimum"] = so;
        doc["opt_is_equilibrium"] = res.opt_is_equilibrium;
        doc["interval"] = interval_json(out.interval);
        if (out.interval.empty) out.exit_code = EXIT_EMPTY;
        return out;
    }

    if (hetero) {
        const HeterogeneousResult res = heterogeneous_interval(sc.costs);
        out.interval = res.interval;
        doc["interval"] = interval_json(out.interval);
        doc["premise_verified"] = res.premise_verified;
        json taus = json::array();
        for (const auto& tau : res.taus)
            taus.push_back({{"i", tau.i}, {"lo", round12(tau.lo)}, {"hi", round12(tau.hi)}});
        doc["tau"] = taus;
        try {
            const SocialOptimum opt = social_optimum_heterogeneous(sc.costs);
            json so;
            so["s1_lo"] = round12(opt.s1_lo);
            so["s1_hi"] = round12(opt.s1_hi);
            so["total_cost"] = round12(opt.total_cost);
            if (opt.permutation) so["permutation"] = *opt.permutation;
            doc["social_optimum"] = so;
        } catch (const unsupported_error&) {
            // brute force out of range: interval result still stands
        }
        if (out.interval.empty) out.exit_code = EXIT_EMPTY;
        return out;
    }

    const int n = sc.deterministic_n();
    const DeviationCost& c = sc.costs[0];
    const bool linear = c.kind == CostKind::LinearAsymmetric;

    if (n == 1) {
        out.interval.lo = out.interval.hi = c.d;
        doc["interval"] = interval_json(out.interval);
        doc["social_optimum"] = {{"s1_lo", round12(c.d)}, {"s1_hi", round12(c.d)},
                                 {"total_cost", 0.0}};
        doc["opt_is_equilibrium"] = true;
        doc["poa"] = 1.0;
        doc["pos"] = 1.0;
        return out;
    }

    if (sc.availability) {
        if (!linear) throw unsupported_error("availability windows need linear costs");
        out.interval = restricted_equilibrium(n, c.beta, c.gamma, sc.availability->first - c.d,
                                              sc.availability->second - c.d);
        out.interval.lo += c.d;
        out.interval.hi += c.d;
        if (out.interval.te) *out.interval.te += c.d;
        if (out.interval.te) doc["te"] = round12(*out.interval.te);
        doc["interval"] = interval_json(out.interval);
        return out;
    }

    if (sc.alpha > 0.0) {
        if (!linear) throw unsupported_error("waiting costs need linear penalties");
        const WaitingCostResult res = waiting_cost_interval(n, c.beta, c.gamma, sc.alpha);
        out.interval = res.interval;
        out.interval.lo += c.d;
        out.interval.hi += c.d;
        if (out.interval.te) *out.interval.te += c.d;
        doc["alpha_bar"] = round12(res.alpha_bar);
        doc["interval"] = interval_json(out.interval);
        if (out.interval.empty) out.exit_code = EXIT_EMPTY;
        return out;
    }

    if (linear) {
        out.interval = equilibrium_interval(n, c.beta, c.gamma);
        const SocialOptimum opt = social_optimum_homogeneous(n, c.beta, c.gamma);
        const OptEquilibriumCheck chk = is_social_opt_equilibrium(n, c.beta, c.gamma);
        const PriceOfAnarchyStability pp = price_of_anarchy_stability(n, c.beta, c.gamma);
        out.interval.lo += c.d;
        out.interval.hi += c.d;
        *out.interval.te += c.d;
        doc["interval"] = interval_json(out.interval);
        doc["te"] = round12(*out.interval.te);
        doc["social_optimum"] = {{"s1_lo", round12(opt.s1_lo + c.d)},
                                 {"s1_hi", round12(opt.s1_hi + c.d)},
                                 {"total_cost", round12(opt.total_cost)}};
        doc["opt_is_equilibrium"] = chk.is_equilibrium;
        doc["poa"] = round12(pp.poa);
        doc["pos"] = round12(pp.pos);
        return out;
    }

    // homogeneous unimodal (quadratic / tabulated): per-customer interval and
    // a single-order social optimum
    const TauI tau = tau_i(c, n);
    out.interval.lo = tau.lo;
    out.interval.hi = tau.hi;
    doc["interval"] = interval_json(out.interval);
    auto total = [&](double s1) { return symmetric_total(s1, n, c); };
    auto [s1, tc] = detail::grid_refine_min(total, c.d - static_cast<double>(n), c.d + 1.0,
                                            1e-3, 1e-9);
    doc["social_optimum"] = {{"s1_lo", round12(s1)}, {"s1_hi", round12(s1)},
                             {"total_cost", round12(tc)}};
    double worst = 0.0, best = std::numeric_limits<double>::infinity();
    for (double t = tau.lo; t <= tau.hi + 1e-12; t += std::max((tau.hi - tau.lo) / 400.0, 1e-9)) {
        const double v = total(std::min(t, tau.hi));
        worst = std::max(worst, v);
        best = std::min(best, v);
    }
    doc["opt_is_equilibrium"] = s1 >= tau.lo - 1e-9 && s1 <= tau.hi + 1e-9;
    doc["poa"] = round12(worst / tc);
    doc["pos"] = round12(best / tc);
    return out;
}

int run_solve(const std::string& path, std::uint64_t seed, long mc_samples, bool no_certify) {
    const Scenario sc = load_scenario(path);
    SolveOutput out = solve_scenario(sc);
    out.doc["meta"] = {{"version", "1"},
                       {"seed", seed},
                       {"tolerances", {{"solver", 1e-9}, {"certify_epsilon",
                                       sc.service.kind == ServiceKind::Exponential ? 1e-3 : 1e-6}}}};
    if (!no_certify && !out.interval.empty && out.certifiable) {
        const Certification cert = certify_symmetric(out.interval.midpoint(), sc, 0.01, -1.0,
                                                     mc_samples, seed);
        out.doc["certification"] = certification_json(cert);
        if (!cert.is_equilibrium) out.exit_code = EXIT_REFUTED;
    } else {
        out.doc["certification"] = nullptr;
    }
    std::cout << out.doc.dump(2) << "\n";
    return out.exit_code;
}

int run_certify(const std::string& path, double t, double grid_step, double epsilon,
                std::uint64_t seed, long mc_samples) {
    const Scenario sc = load_scenario(path);
    const Certification cert = certify_symmetric(t, sc, grid_step, epsilon, mc_samples, seed);
    json doc = certification_json(cert);
    doc["schema_version"] = "1";
    std::cout << doc.dump(2) << "\n";
    return cert.is_equilibrium ? EXIT_OK : EXIT_REFUTED;
}

int run_simulate(const std::string& path, const std::string& arrivals_csv, std::uint64_t seed,
                 long samples) {
    const Scenario sc = load_scenario(path);
    std::vector<double> times;
    {
        std::stringstream ss(arrivals_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                times.push_back(std::stod(tok));
            } catch (...) {
                throw std::invalid_argument("bad arrival time: " + tok);
            }
        }
    }
    const int n = sc.deterministic_n();
    if (static_cast<int>(times.size()) != n)
        throw std::invalid_argument("arrivals length must match population size");
    ArrivalProfile profile{times};

    json doc;
    doc["schema_version"] = "1";
    doc["seed"] = seed;
    if (!sc.service.stochastic()) {
        const std::vector<double> costs = expected_profile_cost(profile, sc);
        json arr = json::array();
        for (double v : costs) arr.push_back(round12(v));
        doc["costs"] = arr;
        doc["method"] = "exact";
        // mean start per customer from the tie-group slot averages
        std::vector<double> mean_starts(static_cast<std::size_t>(n), 0.0);
        for (const auto& g : detail::tie_groups_unit(profile)) {
            const double k = static_cast<double>(g.members.size());
            for (int id : g.members)
                mean_starts[static_cast<std::size_t>(id)] = g.first_start + (k - 1.0) / 2.0;
        }
        json ms = json::array();
        for (double v : mean_starts) ms.push_back(round12(v));
        doc["mean_starts"] = ms;
    } else {
        if (samples < 1) throw std::invalid_argument("samples must be >= 1");
        std::mt19937_64 rng(seed);
        std::vector<int> order(static_cast<std::size_t>(n));
        std::vector<double> durations(static_cast<std::size_t>(n));
        std::vector<double> mean_cost(static_cast<std::size_t>(n), 0.0);
        std::vector<double> mean_start(static_cast<std::size_t>(n), 0.0);
        for (long sdx = 0; sdx < samples; ++sdx) {
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return times[static_cast<std::size_t>(a)] < times[static_cast<std::size_t>(b)];
            });
            for (auto& d : durations) d = detail::sample_duration(sc.service, rng);
            const ServiceSchedule sched = fcfs_schedule(profile, durations, order);
            for (std::size_t j = 0; j < order.size(); ++j) {
                const auto id = static_cast<std::size_t>(order[j]);
                mean_cost[id] += sc.cost_of(order[j])(sched.starts[j]);
                mean_start[id] += sched.starts[j];
            }
        }
        json arr = json::array(), ms = json::array();
        for (int i = 0; i < n; ++i) {
            arr.push_back(round12(mean_cost[static_cast<std::size_t>(i)] /
                                  static_cast<double>(samples)));
            ms.push_back(round12(mean_start[static_cast<std::size_t>(i)] /
                                 static_cast<double>(samples)));
        }
        doc["costs"] = arr;
        doc["mean_starts"] = ms;
        doc["method"] = "mc";
        doc["samples"] = samples;
    }
    std::cout << doc.dump(2) << "\n";
    return EXIT_OK;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!path.empty()) {
        file.open(path);
        if (!file) throw std::invalid_argument("cannot open output file: " + path);
        os = &file;
    }
    *os << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) *os << ",";
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.12g", round12(row[j]));
            *os << buf;
        }
        *os << "\n";
    }
}

int run_sweep(const std::string& figure, const std::string& out_path, double lambda_max,
              double step) {
    std::vector<std::vector<double>> rows;
    if (figure == "fig2" || figure == "fig3") {
        const int n = 5;
        const double beta = figure == "fig2" ? 1.0 : 5.0;
        const double gamma = 1.0;
        for (int k = -400; k <= 0; ++k) {
            const double t = static_cast<double>(k) / 100.0;
            rows.push_back({t, symmetric_cost(t, n, beta, gamma), -gamma * t,
                            beta * (t + static_cast<double>(n - 1))});
        }
        write_csv(out_path, "t,c_tt,early_dev,late_dev", rows);
    } else if (figure == "fig4") {
        for (const auto& row : opt_equilibrium_region(2, 20))
            rows.push_back({static_cast<double>(row.n), row.ratio_lo, row.ratio_hi});
        write_csv(out_path, "n,ratio_lo,ratio_hi", rows);
    } else if (figure == "fig5") {
        std::vector<double> lambdas;
        for (double l = step; l <= lambda_max + 0.5 * step; l += step) lambdas.push_back(l);
        for (const auto& row : poisson_opt_equilibrium_boundary(lambdas))
            rows.push_back({row.lambda, row.minimal_ratio});
        write_csv(out_path, "lambda,minimal_ratio", rows);
    } else {
        throw std::invalid_argument("unknown figure id: " + figure);
    }
    return EXIT_OK;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Arrival-timing game solver"};
    app.require_subcommand(1);

    std::string scenario_path, arrivals, figure, out_path;
    double t = 0.0, grid_step = 0.01, epsilon = -1.0, lambda_max = 2.0, step = 0.25;
    long mc_samples = 200000, samples = 100000;
    std::uint64_t seed = 0;
    bool no_certify = false, seed_given = false;

    auto* solve = app.add_subcommand("solve", "Solve a scenario and report the equilibrium set");
    solve->add_option("scenario", scenario_path, "Scenario JSON path")->required();
    solve->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
    solve->add_option("--mc-samples", mc_samples);
    solve->add_flag("--no-certify", no_certify);

    auto* certify = app.add_subcommand("certify", "Certify a candidate symmetric equilibrium");
    certify->add_option("scenario", scenario_path, "Scenario JSON path")->required();
    certify->add_option("--t", t, "Candidate arrival time")->required();
    certify->add_option("--grid-step", grid_step);
    certify->add_option("--epsilon", epsilon);
    certify->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
    certify->add_option("--mc-samples", mc_samples);

    auto* simulate = app.add_subcommand("simulate", "Expected per-customer costs of a profile");
    simulate->add_option("scenario", scenario_path, "Scenario JSON path")->required();
    simulate->add_option("--arrivals", arrivals, "Comma-separated arrival times")->required();
    simulate->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
    simulate->add_option("--samples", samples);

    auto* sweep = app.add_subcommand("sweep", "Emit figure data as CSV");
    sweep->add_option("figure", figure, "fig2|fig3|fig4|fig5")->required();
    sweep->add_option("--out", out_path, "CSV output path (default stdout)");
    sweep->add_option("--lambda-max", lambda_max);
    sweep->add_option("--step", step);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? EXIT_INPUT : EXIT_OK;
    }

    try {
        if (!seed_given) seed = default_seed();
        if (solve->parsed()) return run_solve(scenario_path, seed, mc_samples, no_certify);
        if (certify->parsed())
            return run_certify(scenario_path, t, grid_step, epsilon, seed, mc_samples);
        if (simulate->parsed()) return run_simulate(scenario_path, arrivals, seed, samples);
        if (sweep->parsed()) return run_sweep(figure, out_path, lambda_max, step);
    } catch (const etgame::unsupported_error& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return EXIT_UNSUPPORTED;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_INPUT;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return EXIT_INPUT;
    }
    return EXIT_INPUT;
}
