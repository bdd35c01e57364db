#include "chronocalc/cli.hpp"

#include "chronocalc/chrono.hpp"
#include "chronocalc/errors.hpp"
#include "chronocalc/io.hpp"
#include "chronocalc/liealg.hpp"
#include "chronocalc/paramflow.hpp"
#include "chronocalc/reach.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

namespace chronocalc::cli {

namespace {

using io::Json;

struct Options {
    std::string system;
    int field = 1;
    int perturbation = 2;
    std::string perturbation_system;
    std::string q;
    double t0 = 0.0;
    double t = 1.0;
    double t_freeze = 0.0;
    int k = 2;
    double t_max = 0.1;
    int levels = 8;
    int nodes = 16;
    int steps_per_unit = 1000;
    std::string expr = "[V1,V2]";
    std::string observable = "identity";
    std::string residual = "remainder";
    double witness_radius = 1.0;
    double fd_eps = 1e-6;
    int max_degree = 2;
    double rel_tol = 1e-8;
    std::string q0;
    std::string target;
    double epsilon = 1e-3;
    int max_iters = 200;
    std::string schedule;
    std::string output;
    std::string format = "json";

    FlowSolver solver() const { return FlowSolver{steps_per_unit, true}; }
};

struct Emitted {
    std::string csv;
    Json json;
};

const VectorField& pick_field(const std::vector<VectorField>& fields, int one_based, const char* what) {
    if (one_based < 1 || one_based > static_cast<int>(fields.size())) {
        throw IndexError(std::string(what) + " V" + std::to_string(one_based) + " does not exist; the system has " +
                         std::to_string(fields.size()) + " field(s)");
    }
    return fields[static_cast<std::size_t>(one_based - 1)];
}

ChartPoint point_for(const std::string& text, int dim, const char* what) {
    if (text.empty()) throw ValidationError(std::string("missing ") + what);
    ChartPoint p = io::parse_point(text);
    if (p.dim() != dim) {
        throw DimensionError(std::string(what) + " has " + std::to_string(p.dim()) + " coordinates, expected " +
                             std::to_string(dim));
    }
    return p;
}

std::vector<double> dyadic_grid(double t_max, int levels) {
    std::vector<double> ts;
    for (int j = 0; j < levels; ++j) ts.push_back(std::ldexp(t_max, -j));
    return ts;
}

std::string join_row(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    return line + "\n";
}

std::string coordinate_header(const std::string& prefix, int n) {
    std::string h;
    for (int i = 1; i <= n; ++i) h += (i > 1 ? "," : "") + prefix + std::to_string(i);
    return h;
}

std::vector<std::string> cells_of(const Eigen::VectorXd& v) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(io::format_double(v[i]));
    return out;
}

Emitted cmd_flow(const Options& o) {
    const auto fields = io::load_system(o.system);
    const VectorField& f = pick_field(fields, o.field, "field");
    const ChartPoint q = point_for(o.q, f.dim(), "--q");
    const FlowState s = flow_with_pushforward(FlowMap{f, o.t0, o.t, o.solver()}, q);

    Emitted e;
    e.json = Json{{"field_index", o.field},
                  {"t0", o.t0},
                  {"t", o.t},
                  {"q", io::vector_to_json(q.coords())},
                  {"endpoint", io::vector_to_json(s.endpoint.coords())},
                  {"pushforward", io::matrix_to_json(s.pushforward)}};
    e.csv = "component,endpoint," + coordinate_header("d", f.dim()) + "\n";
    for (int i = 0; i < f.dim(); ++i) {
        std::vector<std::string> row{std::to_string(i + 1), io::format_double(s.endpoint[i])};
        for (const auto& c : cells_of(s.pushforward.row(i).transpose())) row.push_back(c);
        e.csv += join_row(row);
    }
    return e;
}

void check_k(const Options& o, const VectorField& f) {
    const int cap = std::min(f.smoothness_order(), 4);
    if (o.k < 1 || o.k > cap) {
        throw ValidationError("--k must lie in [1, " + std::to_string(cap) + "] for this field");
    }
}

Emitted cmd_volterra(const Options& o) {
    const auto fields = io::load_system(o.system);
    const VectorField& f = pick_field(fields, o.field, "field");
    check_k(o, f);
    const ChartPoint q = point_for(o.q, f.dim(), "--q");
    const Observable obs = io::load_observable(o.observable, f.dim());
    const auto ts = dyadic_grid(o.t_max, o.levels);
    const LocallyBoundedWitness witness =
        sample_witness(f, obs, q, o.witness_radius, o.k, o.t0, o.t0 + o.t_max);

    std::vector<RemainderReport> reports;
    Json rows = Json::array();
    for (double h : ts) {
        const double t = o.t0 + h;
        const Eigen::VectorXd trunc = volterra_truncate(f, obs, q, o.t0, t, o.k, o.nodes);
        RemainderReport r = remainder_eval(f, obs, q, o.t0, t, o.k, o.solver(), o.nodes, witness);
        rows.push_back({{"t", t},
                        {"truncation", io::vector_to_json(trunc)},
                        {"remainder_norm", r.remainder_norm},
                        {"bound", *r.bound}});
        reports.push_back(std::move(r));
    }
    std::vector<double> norms;
    for (const auto& r : reports) norms.push_back(r.remainder_norm);
    const OrderEstimate est = fit_order(ts, norms);

    Emitted e;
    e.csv = io::remainder_reports_to_csv(reports);
    e.json = Json{{"field_index", o.field},
                  {"k", o.k},
                  {"t0", o.t0},
                  {"witness_C", witness.bound_C},
                  {"witness_radius", witness.radius},
                  {"rows", std::move(rows)},
                  {"slope", est.degenerate ? Json(nullptr) : Json(est.fitted_slope)},
                  {"r_squared", est.degenerate ? Json(nullptr) : Json(est.r_squared)}};
    return e;
}

Emitted cmd_order_probe(const Options& o) {
    const auto fields = io::load_system(o.system);
    const FlowSolver solver = o.solver();
    OrderEstimate est;
    Json extra = Json::object();
    std::vector<std::optional<double>> bounds;

    if (o.residual == "remainder") {
        const VectorField& f = pick_field(fields, o.field, "field");
        check_k(o, f);
        const ChartPoint q = point_for(o.q, f.dim(), "--q");
        const Observable obs = io::load_observable(o.observable, f.dim());
        const LocallyBoundedWitness witness =
            sample_witness(f, obs, q, o.witness_radius, o.k, o.t0, o.t0 + o.t_max);
        auto sample = [&](double h) {
            const RemainderReport r = remainder_eval(f, obs, q, o.t0, o.t0 + h, o.k, solver, o.nodes, witness);
            bounds.push_back(r.bound);
            return r.remainder_norm;
        };
        try {
            est = order_probe(sample, o.t_max, o.levels);
        } catch (const DegenerateProbe& d) {
            est = d.estimate();
        }
        extra = Json{{"field_index", o.field}, {"k", o.k}, {"witness_C", witness.bound_C}};
    } else if (o.residual == "flow-bracket") {
        const BracketExpression expr = BracketExpression::parse(o.expr);
        const ChartPoint q = point_for(o.q, fields.front().dim(), "--q");
        const AsymptoticsReport r = bracket_asymptotics_check(expr, fields, q, o.t_max, o.levels, solver);
        est = r.estimate;
        extra = Json{{"expr", expr.to_string()}, {"claimed_order", r.claimed_order}, {"passed", r.passed}};
    } else if (o.residual == "inverse-expansion") {
        const VectorField& f = pick_field(fields, o.field, "field");
        const ChartPoint q = point_for(o.q, f.dim(), "--q");
        const AsymptoticsReport r = inverse_expansion_check(f, q, o.t_max, o.levels, solver);
        est = r.estimate;
        extra = Json{{"field_index", o.field}, {"passed", r.passed}};
    } else {
        throw ValidationError("--residual must be remainder, flow-bracket or inverse-expansion");
    }

    Emitted e;
    e.csv = io::order_estimate_to_csv(est, bounds);
    e.json = Json{{"residual", o.residual}};
    const Json summary = io::order_estimate_to_json(est);
    for (const auto& [key, value] : extra.items()) e.json[key] = value;
    for (const auto& [key, value] : summary.items()) e.json[key] = value;
    return e;
}

Emitted cmd_bracket(const Options& o) {
    const auto fields = io::load_system(o.system);
    const BracketExpression expr = BracketExpression::parse(o.expr);
    const ChartPoint q = point_for(o.q, fields.front().dim(), "--q");
    const Eigen::VectorXd value = eval_bracket_expression(expr, fields, o.t_freeze, q);

    Emitted e;
    e.json = Json{{"expr", expr.to_string()},
                  {"degree", expr.degree()},
                  {"canonical", expr.is_canonical()},
                  {"q", io::vector_to_json(q.coords())},
                  {"value", io::vector_to_json(value)}};
    e.csv = "component,value\n";
    for (Eigen::Index i = 0; i < value.size(); ++i) {
        e.csv += join_row({std::to_string(i + 1), io::format_double(value[i])});
    }
    return e;
}

Emitted cmd_flow_bracket(const Options& o) {
    const auto fields = io::load_system(o.system);
    const BracketExpression expr = BracketExpression::parse(o.expr);
    const int n = fields.front().dim();
    const ChartPoint q = point_for(o.q, n, "--q");
    const Eigen::VectorXd direction = eval_bracket_expression(expr, fields, 0.0, q);
    const int k = expr.degree();

    Emitted e;
    e.csv = "t," + coordinate_header("x", n) + ",residual\n";
    Json rows = Json::array();
    for (double t : dyadic_grid(o.t_max, o.levels)) {
        const ChartPoint p = flow_bracket(expr, fields, t, q, o.solver());
        const double residual = (p.coords() - q.coords() - std::pow(t, k) * direction).norm();
        std::vector<std::string> row{io::format_double(t)};
        for (const auto& c : cells_of(p.coords())) row.push_back(c);
        row.push_back(io::format_double(residual));
        e.csv += join_row(row);
        rows.push_back({{"t", t}, {"endpoint", io::vector_to_json(p.coords())}, {"residual", residual}});
    }
    e.json = Json{{"expr", expr.to_string()},
                  {"degree", k},
                  {"bracket", io::vector_to_json(direction)},
                  {"rows", std::move(rows)}};
    return e;
}

Emitted cmd_param_deriv(const Options& o) {
    const auto fields = io::load_system(o.system);
    const VectorField& base = pick_field(fields, o.field, "field");
    const auto pert_fields = o.perturbation_system.empty() ? fields : io::load_system(o.perturbation_system);
    const VectorField& pert = pick_field(pert_fields, o.perturbation, "perturbation");
    const ChartPoint q = point_for(o.q, base.dim(), "--q");
    const PerturbedSystem sys{base, pert, o.t0, o.t};
    const FlowSolver solver = o.solver();
    const Eigen::VectorXd inner = param_derivative(sys, q, DerivativeFormula::Inner, solver, o.nodes);
    const Eigen::VectorXd outer = param_derivative(sys, q, DerivativeFormula::Outer, solver, o.nodes);
    const Eigen::VectorXd fd = fd_param_derivative(sys, q, o.fd_eps, solver);
    const double scale = std::max(fd.norm(), 1e-300);

    Emitted e;
    e.json = Json{{"inner", io::vector_to_json(inner)},
                  {"outer", io::vector_to_json(outer)},
                  {"fd", io::vector_to_json(fd)},
                  {"inner_outer_diff", (inner - outer).norm()},
                  {"fd_rel_diff", (inner - fd).norm() / scale}};
    e.csv = "component,inner,outer,fd\n";
    for (Eigen::Index i = 0; i < inner.size(); ++i) {
        e.csv += join_row({std::to_string(i + 1), io::format_double(inner[i]), io::format_double(outer[i]),
                           io::format_double(fd[i])});
    }
    return e;
}

Emitted cmd_rank(const Options& o) {
    const AffineControlSystem sys(io::load_system(o.system));
    const ChartPoint q = point_for(o.q, sys.dim(), "--q");
    const RankReport r = bracket_rank(sys, q, o.max_degree, o.rel_tol);

    Emitted e;
    Json brackets = Json::array();
    e.csv = "expr," + coordinate_header("v", sys.dim()) + "\n";
    for (std::size_t i = 0; i < r.brackets.size(); ++i) {
        brackets.push_back({{"expr", r.brackets[i].to_string()}, {"value", io::vector_to_json(r.values[i])}});
        std::vector<std::string> row{"\"" + r.brackets[i].to_string() + "\""};
        for (const auto& c : cells_of(r.values[i])) row.push_back(c);
        e.csv += join_row(row);
    }
    e.json = Json{{"numerical_rank", r.numerical_rank},
                  {"dim", sys.dim()},
                  {"max_degree", o.max_degree},
                  {"rel_tol", o.rel_tol},
                  {"singular_values", r.singular_values},
                  {"brackets", std::move(brackets)}};
    return e;
}

Emitted plan_output(const PlanResult& r) {
    return Emitted{io::schedule_to_csv(r.schedule), io::plan_result_to_json(r)};
}

Emitted cmd_plan(const Options& o) {
    const AffineControlSystem sys(io::load_system(o.system));
    const ChartPoint q0 = point_for(o.q0, sys.dim(), "--q0");
    const ChartPoint target = point_for(o.target, sys.dim(), "--target");
    PlannerOptions opts;
    opts.rel_tol = o.rel_tol;
    return plan_output(plan_reach(sys, q0, target, o.epsilon, o.max_degree, o.max_iters, o.solver(), opts));
}

Emitted cmd_simulate(const Options& o) {
    const AffineControlSystem sys(io::load_system(o.system));
    const ChartPoint q0 = point_for(o.q0, sys.dim(), "--q0");
    if (o.schedule.empty()) throw ValidationError("missing --schedule");
    const ControlSchedule sched = io::load_schedule(o.schedule);
    const ChartPoint end = simulate_schedule(sys, q0, sched, o.solver());

    Emitted e;
    e.json = Json{{"endpoint", io::vector_to_json(end.coords())},
                  {"segments", sched.segments().size()},
                  {"total_duration", sched.total_duration()}};
    e.csv = "component,endpoint\n";
    for (int i = 0; i < end.dim(); ++i) e.csv += join_row({std::to_string(i + 1), io::format_double(end[i])});
    return e;
}

void write_output(const Options& o, const Emitted& e, std::ostream& out) {
    const std::string text = o.format == "csv" ? e.csv : e.json.dump(2) + "\n";
    if (o.output.empty() || o.output == "-") {
        out << text;
        return;
    }
    std::filesystem::path path(o.output);
    if (path.is_relative()) {
        if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') path = dir / path;
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ValidationError("cannot write '" + path.string() + "'");
    file << text;
}

void add_solver(CLI::App* sub, Options& o) {
    sub->add_option("--steps-per-unit", o.steps_per_unit, "RK4 steps per unit time")
        ->check(CLI::Range(1, 10000000))
        ->capture_default_str();
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Chronological calculus toolkit: flows, Volterra series, brackets and reachability."};
    app.name("chronocalc");
    app.require_subcommand(1, 1);
    app.fallthrough(false);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--system", o.system, "builtin system name or path to a system JSON")->required();
        sub->add_option("--output", o.output, "output file (relative paths use $" + std::string(kOutputDirEnv) + ")");
        sub->add_option("--format", o.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        add_solver(sub, o);
    };
    auto levels = [&](CLI::App* sub) {
        sub->add_option("--t-max", o.t_max, "largest time of the dyadic grid")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--levels", o.levels, "grid points t_max 2^-j, j < levels")
            ->check(CLI::Range(4, 16))
            ->capture_default_str();
    };

    std::map<CLI::App*, std::function<Emitted(const Options&)>> handlers;

    auto* flow = app.add_subcommand("flow", "flow endpoint and pushforward");
    common(flow);
    flow->add_option("--field", o.field, "1-based field index")->capture_default_str();
    flow->add_option("--q", o.q, "start point, comma separated")->required();
    flow->add_option("--t0", o.t0)->capture_default_str();
    flow->add_option("--t", o.t)->required();
    handlers[flow] = cmd_flow;

    auto* volterra = app.add_subcommand("volterra", "Volterra truncation and remainder table");
    common(volterra);
    levels(volterra);
    volterra->add_option("--field", o.field)->capture_default_str();
    volterra->add_option("--q", o.q)->required();
    volterra->add_option("--t0", o.t0)->capture_default_str();
    volterra->add_option("--k", o.k, "truncation order, at most min(smoothness, 4)")->capture_default_str();
    volterra->add_option("--nodes", o.nodes, "Gauss-Legendre nodes")->check(CLI::Range(1, 64))->capture_default_str();
    volterra->add_option("--observable", o.observable, "identity, x<i> or observable JSON")->capture_default_str();
    volterra->add_option("--witness-radius", o.witness_radius)->check(CLI::PositiveNumber)->capture_default_str();
    handlers[volterra] = cmd_volterra;

    auto* probe = app.add_subcommand("order-probe", "log-log order estimate of a residual family");
    common(probe);
    levels(probe);
    probe->add_option("--residual", o.residual, "remainder, flow-bracket or inverse-expansion")
        ->check(CLI::IsMember({"remainder", "flow-bracket", "inverse-expansion"}))
        ->capture_default_str();
    probe->add_option("--field", o.field)->capture_default_str();
    probe->add_option("--q", o.q)->required();
    probe->add_option("--t0", o.t0)->capture_default_str();
    probe->add_option("--k", o.k)->capture_default_str();
    probe->add_option("--nodes", o.nodes)->check(CLI::Range(1, 64))->capture_default_str();
    probe->add_option("--observable", o.observable)->capture_default_str();
    probe->add_option("--expr", o.expr)->capture_default_str();
    probe->add_option("--witness-radius", o.witness_radius)->check(CLI::PositiveNumber)->capture_default_str();
    handlers[probe] = cmd_order_probe;

    auto* bracket = app.add_subcommand("bracket", "evaluate a bracket expression at a point");
    common(bracket);
    bracket->add_option("--expr", o.expr)->capture_default_str();
    bracket->add_option("--q", o.q)->required();
    bracket->add_option("--t", o.t_freeze, "time at which the fields are frozen")->capture_default_str();
    handlers[bracket] = cmd_bracket;

    auto* fbracket = app.add_subcommand("flow-bracket", "flow-bracket endpoints over a dyadic grid");
    common(fbracket);
    levels(fbracket);
    fbracket->add_option("--expr", o.expr)->capture_default_str();
    fbracket->add_option("--q", o.q)->required();
    handlers[fbracket] = cmd_flow_bracket;

    auto* pderiv = app.add_subcommand("param-deriv", "parameter derivative, both formulas and FD");
    common(pderiv);
    pderiv->add_option("--field", o.field, "base field")->capture_default_str();
    pderiv->add_option("--perturbation", o.perturbation, "perturbing field")->capture_default_str();
    pderiv->add_option("--perturbation-system", o.perturbation_system, "system holding the perturbation");
    pderiv->add_option("--q", o.q)->required();
    pderiv->add_option("--t0", o.t0)->capture_default_str();
    pderiv->add_option("--t", o.t)->required();
    pderiv->add_option("--nodes", o.nodes)->check(CLI::Range(1, 64))->capture_default_str();
    pderiv->add_option("--fd-eps", o.fd_eps)->check(CLI::PositiveNumber)->capture_default_str();
    handlers[pderiv] = cmd_param_deriv;

    auto* rank = app.add_subcommand("rank", "bracket rank at a point");
    common(rank);
    rank->add_option("--q", o.q)->required();
    rank->add_option("--max-degree", o.max_degree)->check(CLI::Range(1, 6))->capture_default_str();
    rank->add_option("--rel-tol", o.rel_tol)->check(CLI::PositiveNumber)->capture_default_str();
    handlers[rank] = cmd_rank;

    auto* plan = app.add_subcommand("plan", "greedy bracket-motion planner");
    common(plan);
    plan->add_option("--q0", o.q0)->required();
    plan->add_option("--target", o.target)->required();
    plan->add_option("--epsilon", o.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
    plan->add_option("--max-degree", o.max_degree)->check(CLI::Range(1, 6))->capture_default_str();
    plan->add_option("--max-iters", o.max_iters)->check(CLI::NonNegativeNumber)->capture_default_str();
    plan->add_option("--rel-tol", o.rel_tol)->check(CLI::PositiveNumber)->capture_default_str();
    handlers[plan] = cmd_plan;

    auto* simulate = app.add_subcommand("simulate", "run a schedule file");
    common(simulate);
    simulate->add_option("--q0", o.q0)->required();
    simulate->add_option("--schedule", o.schedule, "schedule CSV or JSON (plan output works too)")->required();
    handlers[simulate] = cmd_simulate;

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    try {
        const Emitted e = handlers.at(chosen)(o);
        write_output(o, e, out);
        return 0;
    } catch (const StalledError& e) {
        err << "error: " << e.what() << "\n";
        write_output(o, plan_output(e.best()), out);
        return 3;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace chronocalc::cli
