#include "CLI11.hpp"
#include "json.hpp"

#include "vrpsd/instance.hpp"
#include "vrpsd/oracle.hpp"
#include "vrpsd/recourse.hpp"
#include "vrpsd/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace {

using nlohmann::ordered_json;
using namespace vrpsd;

constexpr int kExitOk = 0;
constexpr int kExitLimit = 1;
constexpr int kExitError = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double env_time_limit() {
    const char* v = std::getenv("VRPSD_TIME_LIMIT");
    if (!v) return 0;
    return std::atof(v);
}

Config make_config(const std::string& mode, bool set_cuts, const std::string& activation,
                   double time_limit, long node_limit) {
    Config cfg;
    if (mode == "d1") cfg.mode = Disaggregation::D1;
    else if (mode == "d2") cfg.mode = Disaggregation::D2;
    else throw CLI::ValidationError("--mode must be d1 or d2");
    cfg.use_set_cuts = set_cuts;
    if (activation == "whs") cfg.activation = ActivationKind::WHS;
    else if (activation == "wof") cfg.activation = ActivationKind::WOF;
    else throw CLI::ValidationError("--activation must be whs or wof");
    cfg.time_limit_s = time_limit;
    cfg.node_limit = node_limit;
    cfg.validate();
    return cfg;
}

ordered_json result_to_json(const SolveResult& res) {
    ordered_json out;
    out["status"] = solve_status_name(res.status);
    if (res.has_incumbent) {
        out["objective"] = format_rational(res.primal_value);
        out["objective_float"] = to_double(res.primal_value);
    }
    out["bound"] = res.dual_bound;
    out["gap"] = res.gap;
    out["nodes"] = res.stats.nodes;
    out["lp_solves"] = res.stats.lp_solves;
    out["rci_rows"] = res.stats.rci_rows;
    ordered_json cuts;
    for (const auto& [tag, count] : res.stats.cuts_by_tag) cuts[tag] = count;
    out["cuts"] = cuts;
    if (res.has_incumbent) {
        ordered_json routes = ordered_json::array();
        for (const Route& r : res.plan.routes) routes.push_back(r);
        out["routes"] = routes;
        ordered_json theta = ordered_json::array();
        for (const Rational& t : res.theta) theta.push_back(format_rational(t));
        out["theta"] = theta;
    }
    out["seconds"] = res.stats.wall_seconds;
    return out;
}

int cmd_solve(const std::string& instance_path, const std::string& mode, bool set_cuts,
              const std::string& activation, double time_limit, long node_limit,
              const std::string& out_path, const std::string& log_path,
              const std::string& lp_dump, bool round_euclidean) {
    Config cfg = make_config(mode, set_cuts, activation, time_limit, node_limit);
    cfg.lp_dump_path = lp_dump;
    ParseOptions popts;
    popts.round_euclidean = round_euclidean;
    Instance inst = preprocess_demands(parse_instance(read_file(instance_path), popts));

    std::ofstream log_file;
    std::ostream* log = nullptr;
    if (!log_path.empty()) {
        log_file.open(log_path);
        log = &log_file;
    }
    SolveResult res = solve(inst, cfg, log);
    ordered_json out = result_to_json(res);
    if (out_path.empty() || out_path == "-") {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        f << out.dump(2) << "\n";
    }
    return res.status == SolveStatus::Limit ? kExitLimit : kExitOk;
}

int cmd_generate(int n, int k, const std::string& capacity, int scenarios,
                 const std::string& mode, std::uint64_t seed, double sigma,
                 const std::string& out_path) {
    GenParams params;
    params.n = n;
    params.k = k;
    params.capacity = parse_rational(capacity);
    params.n_scenarios = scenarios;
    params.seed = seed;
    params.sigma_factor = sigma;
    if (mode == "independent") params.mode = DemandModel::Independent;
    else if (mode == "correlated") params.mode = DemandModel::Correlated;
    else throw CLI::ValidationError("--mode must be independent or correlated");
    Instance inst = generate_instance(params);
    std::string text = write_instance(inst);
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        std::ofstream f(out_path);
        f << text;
    }
    return kExitOk;
}

RoutingPlan parse_plan_arg(const std::string& arg) {
    RoutingPlan plan;
    Route current;
    std::string token;
    auto flush_token = [&] {
        if (!token.empty()) {
            current.push_back(std::stoi(token));
            token.clear();
        }
    };
    for (char c : arg) {
        if (c == ',') {
            flush_token();
        } else if (c == '|' || c == ';') {
            flush_token();
            if (!current.empty()) plan.routes.push_back(current);
            current.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            token.push_back(c);
        }
    }
    flush_token();
    if (!current.empty()) plan.routes.push_back(current);
    return plan;
}

int cmd_evaluate(const std::string& instance_path, const std::string& plan_arg,
                 bool round_euclidean) {
    ParseOptions popts;
    popts.round_euclidean = round_euclidean;
    Instance inst = preprocess_demands(parse_instance(read_file(instance_path), popts));
    RoutingPlan plan = parse_plan_arg(plan_arg);
    Rational cost = 0, recourse = 0;
    ordered_json routes = ordered_json::array();
    for (const Route& r : plan.routes) {
        OrientedRecourse q = q_classical(inst, r);
        cost += inst.route_cost(r);
        recourse += q.value;
        ordered_json jr;
        jr["route"] = r;
        jr["cost"] = format_rational(inst.route_cost(r));
        jr["recourse"] = format_rational(q.value);
        jr["orientation"] = q.orientation;
        routes.push_back(jr);
    }
    ordered_json out;
    out["feasible"] = plan_is_feasible(plan, inst);
    out["routes"] = routes;
    out["cost"] = format_rational(cost);
    out["recourse"] = format_rational(recourse);
    Rational total = cost + recourse + inst.objective_offset;
    out["total"] = format_rational(total);
    out["total_float"] = to_double(total);
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_oracle_check(std::uint64_t seed, int budget) {
    if (budget == 0) {
        std::cout << "oracle-check: budget 0, vacuous pass (warning: nothing was checked)\n";
        return kExitOk;
    }
    std::mt19937_64 rng(seed);
    int failures = 0;
    auto report = [&](const std::string& name, bool ok) {
        if (!ok) {
            ++failures;
            std::cout << "FAIL " << name << "\n";
        }
    };

    for (int trial = 0; trial < budget; ++trial) {
        GenParams params;
        params.n = 5 + static_cast<int>(rng() % 3);
        params.k = 1 + static_cast<int>(rng() % 2);
        params.capacity = 20;
        params.n_scenarios = 1 + static_cast<int>(rng() % 6);
        params.seed = rng();
        params.mode = rng() % 2 ? DemandModel::Correlated : DemandModel::Independent;
        Instance inst = preprocess_demands(generate_instance(params));

        // Failure-count identity on random loads.
        for (int rep = 0; rep < 200; ++rep) {
            Rational alpha = Rational(static_cast<long long>(rng() % 41));
            std::vector<int> customers;
            for (int v = 1; v <= inst.n; ++v) {
                if (rng() % 2) customers.push_back(v);
            }
            int xi = static_cast<int>(rng() % inst.scenarios.count);
            std::vector<Rational> demands;
            for (int v : customers) demands.push_back(inst.demand(xi, v));
            long lhs = oracle::brute_force_fail(alpha, demands, inst.capacity);
            long rhs = fail(inst, alpha, customers, xi);
            report("fail-count identity", lhs == rhs);
            if (lhs != rhs) break;
        }

        // Encode/decode round trip through a random feasible plan.
        oracle::Optimum opt = oracle::brute_force_optimum(inst);
        if (opt.feasible) {
            EdgeVector x = edges_from_plan(opt.plan, inst.n);
            report("plan round-trip", routing_plan_from_edges(x, inst.n) == opt.plan);
        }

        for (int variant = 0; variant < 3; ++variant) {
            Config cfg;
            cfg.mode = variant == 0 ? Disaggregation::D1 : Disaggregation::D2;
            cfg.use_set_cuts = variant == 2;
            SolveResult res = solve(inst, cfg);
            if (opt.feasible) {
                bool ok = res.status == SolveStatus::Optimal && res.has_incumbent &&
                          res.primal_value == opt.value;
                report("solver equals brute force", ok);
            } else {
                report("solver agrees infeasible", res.status == SolveStatus::Infeasible);
            }
        }
    }
    if (failures == 0) {
        std::cout << "oracle-check: pass (" << budget << " instances)\n";
        return kExitOk;
    }
    std::cout << "oracle-check: " << failures << " failure(s)\n";
    return kExitError;
}

struct BenchRow {
    std::string instance, mode, activation, status, cuts;
    bool setcuts = false;
    std::string obj;
    double bound = 0, gap = 0, seconds = 0;
    long nodes = 0;
};

int cmd_bench(const std::string& dir, const std::string& out_path, int jobs,
              double time_limit) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::exists(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());

    struct Task {
        std::string file;
        std::string mode;
        bool setcuts;
    };
    std::vector<Task> tasks;
    for (const std::string& f : files) {
        tasks.push_back({f, "d1", false});
        tasks.push_back({f, "d2", false});
        tasks.push_back({f, "d2", true});
    }

    std::vector<BenchRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const Task& task = tasks[i];
            BenchRow row;
            row.instance = fs::path(task.file).filename().string();
            row.mode = task.mode;
            row.setcuts = task.setcuts;
            row.activation = "whs";
            try {
                Instance inst = preprocess_demands(parse_instance(read_file(task.file)));
                Config cfg = make_config(task.mode, task.setcuts, "whs", time_limit, 0);
                SolveResult res = solve(inst, cfg);
                row.status = solve_status_name(res.status);
                row.obj = res.has_incumbent ? format_rational(res.primal_value) : "";
                row.bound = res.dual_bound;
                row.gap = res.gap;
                row.nodes = res.stats.nodes;
                row.seconds = res.stats.wall_seconds;
                std::string cuts;
                for (const auto& [tag, count] : res.stats.cuts_by_tag) {
                    cuts += tag + ":" + std::to_string(count) + ";";
                }
                cuts += "rci:" + std::to_string(res.stats.rci_rows);
                row.cuts = cuts;
            } catch (const std::exception& e) {
                row.status = std::string("error(") + e.what() + ")";
            }
            rows[i] = std::move(row);
        }
    };
    int n_workers = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ostringstream csv;
    csv << "instance,mode,setcuts,activation,status,obj,bound,gap,nodes,cuts_by_tag,seconds\n";
    for (const BenchRow& row : rows) {
        csv << row.instance << ',' << row.mode << ',' << (row.setcuts ? 1 : 0) << ','
            << row.activation << ',' << row.status << ',' << row.obj << ',' << row.bound << ','
            << row.gap << ',' << row.nodes << ',' << row.cuts << ',' << row.seconds << "\n";
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << csv.str();
    } else {
        std::ofstream f(out_path);
        f << csv.str();
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Branch-and-cut solver for the VRP with stochastic scenario demands"};
    app.require_subcommand(1);

    // solve
    std::string instance_path, mode = "d2", activation = "whs";
    bool set_cuts = false, round_euclidean = false;
    double time_limit = env_time_limit();
    long node_limit = 0;
    std::uint64_t seed = 0;
    std::string out_path, log_path, lp_dump;
    auto* solve_cmd = app.add_subcommand("solve", "solve an instance file");
    solve_cmd->add_option("instance", instance_path, "instance JSON file")->required();
    solve_cmd->add_option("--mode", mode, "recourse disaggregation: d1 or d2");
    solve_cmd->add_flag("--set-cuts", set_cuts, "enable ILS set cuts (d2 only)");
    solve_cmd->add_option("--activation", activation, "partial-route activation: whs or wof");
    solve_cmd->add_option("--time-limit", time_limit, "seconds (0 = unlimited)");
    solve_cmd->add_option("--node-limit", node_limit, "node budget (0 = unlimited)");
    solve_cmd->add_option("--seed", seed, "reserved; the solver itself is deterministic");
    solve_cmd->add_option("--out", out_path, "result JSON path ('-' for stdout)");
    solve_cmd->add_option("--log", log_path, "per-node solve log path");
    solve_cmd->add_option("--lp-dump", lp_dump, "dump the final LP in CPLEX LP format");
    solve_cmd->add_flag("--round-euclidean", round_euclidean,
                        "round coordinate distances to integers");

    // generate
    int gen_n = 5, gen_k = 2, gen_scenarios = 10;
    std::string gen_capacity = "100", gen_mode = "independent", gen_out;
    double gen_sigma = 0.3;
    std::uint64_t gen_seed = 0;
    auto* gen_cmd = app.add_subcommand("generate", "generate a synthetic instance");
    gen_cmd->add_option("--n", gen_n, "number of customers")->required();
    gen_cmd->add_option("--k", gen_k, "fleet size");
    gen_cmd->add_option("--capacity", gen_capacity, "vehicle capacity");
    gen_cmd->add_option("--scenarios", gen_scenarios, "number of demand scenarios");
    gen_cmd->add_option("--mode", gen_mode, "independent or correlated");
    gen_cmd->add_option("--seed", gen_seed, "RNG seed");
    gen_cmd->add_option("--sigma", gen_sigma, "demand sigma as a fraction of the mean");
    gen_cmd->add_option("--out", gen_out, "output path ('-' for stdout)");

    // evaluate
    std::string eval_instance, eval_plan;
    bool eval_round = false;
    auto* eval_cmd = app.add_subcommand("evaluate", "price a routing plan on an instance");
    eval_cmd->add_option("instance", eval_instance, "instance JSON file")->required();
    eval_cmd->add_option("--plan", eval_plan, "routes like \"1,2|3,4\"")->required();
    eval_cmd->add_flag("--round-euclidean", eval_round, "round coordinate distances");

    // oracle-check
    std::uint64_t check_seed = 1;
    int check_budget = 20;
    auto* check_cmd =
        app.add_subcommand("oracle-check", "randomized solver-vs-oracle verification");
    check_cmd->add_option("--seed", check_seed, "RNG seed");
    check_cmd->add_option("--count", check_budget, "instance budget");

    // bench
    std::string bench_dir, bench_out;
    int bench_jobs = 1;
    double bench_time_limit = env_time_limit();
    auto* bench_cmd = app.add_subcommand("bench", "run the standard configs over a directory");
    bench_cmd->add_option("dir", bench_dir, "directory of instance JSON files")->required();
    bench_cmd->add_option("--out", bench_out, "CSV output path ('-' for stdout)");
    bench_cmd->add_option("--jobs", bench_jobs, "parallel worker slots");
    bench_cmd->add_option("--time-limit", bench_time_limit, "per-solve seconds (0 = unlimited)");

    try {
        app.parse(argc, argv);
        if (solve_cmd->parsed()) {
            return cmd_solve(instance_path, mode, set_cuts, activation, time_limit, node_limit,
                             out_path, log_path, lp_dump, round_euclidean);
        }
        if (gen_cmd->parsed()) {
            return cmd_generate(gen_n, gen_k, gen_capacity, gen_scenarios, gen_mode, gen_seed,
                                gen_sigma, gen_out);
        }
        if (eval_cmd->parsed()) return cmd_evaluate(eval_instance, eval_plan, eval_round);
        if (check_cmd->parsed()) return cmd_oracle_check(check_seed, check_budget);
        if (bench_cmd->parsed()) {
            return cmd_bench(bench_dir, bench_out, bench_jobs, bench_time_limit);
        }
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
