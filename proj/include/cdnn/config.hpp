#pragma once

// JSON experiment configuration and parameter checkpoints.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdnn/errors.hpp"
#include "cdnn/eval.hpp"
#include "cdnn/network.hpp"
#include "cdnn/physics.hpp"
#include "cdnn/problems.hpp"
#include "cdnn/training.hpp"

namespace cdnn {

using json = nlohmann::json;

struct Experiment {
    ProblemSpec problem;
    TrainConfig training;
    EvalGrid grid;
    int interface_points = 101;
};

namespace detail {

inline void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    require_object(j, where);
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key '" + key + "' in '" + where + "'");
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline Region region_from_string(const std::string& s) {
    if (s == "S" || s == "stokes") return Region::stokes;
    if (s == "D" || s == "darcy") return Region::darcy;
    throw ConfigError("unknown region '" + s + "' (expected S or D)");
}

inline Rect parse_rect(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) throw ConfigError("'" + where + "' must be [xmin, xmax, ymin, ymax]");
    const Rect r{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!(r.xmax > r.xmin && r.ymax > r.ymin)) throw ConfigError("'" + where + "' is an empty rectangle");
    return r;
}

inline PhysicalConstants parse_constants(const json& j) {
    reject_unknown(j, {"mu", "rho", "beta", "nu", "G", "K"}, "problem.constants");
    PhysicalConstants c;
    c.mu = get_or(j, "mu", c.mu);
    c.rho = get_or(j, "rho", c.rho);
    c.beta = get_or(j, "beta", c.beta);
    c.nu = get_or(j, "nu", c.nu);
    c.G = get_or(j, "G", c.G);
    if (j.contains("K")) {
        const json& k = j.at("K");
        if (k.is_number()) {
            const double v = k.get<double>();
            if (!(v > 0.0)) throw ConfigError("permeability K must be positive");
            c.k_inverse = PhysicalConstants::isotropic_inverse(1.0 / v);
        } else if (k.is_array() && k.size() == 2 && k[0].size() == 2 && k[1].size() == 2) {
            const double a = k[0][0].get<double>(), b = k[0][1].get<double>();
            const double cc = k[1][0].get<double>(), d = k[1][1].get<double>();
            const double det = a * d - b * cc;
            if (!(std::abs(det) > 0.0)) throw ConfigError("permeability matrix K is singular");
            const Mat2 inv{d / det, -b / det, -cc / det, a / det};
            c.k_inverse = [inv](Point) { return inv; };
        } else {
            throw ConfigError("'problem.constants.K' must be a number or a 2x2 matrix");
        }
    }
    c.validate();
    return c;
}

inline BoundarySegment parse_segment(const json& j, const std::optional<ClosedFormSolution>& exact) {
    reject_unknown(j, {"region", "edge", "condition", "value"}, "problem.segments[]");
    BoundarySegment s;
    s.region = region_from_string(j.at("region").get<std::string>());
    s.edge = edge_from_string(j.at("edge").get<std::string>());
    s.condition = boundary_condition_from_string(j.at("condition").get<std::string>());
    const json value = j.contains("value") ? j.at("value") : json(0.0);
    const bool vector_data = s.condition == BoundaryCondition::dirichlet_velocity;
    if (value.is_string()) {
        if (value.get<std::string>() != "exact") throw ConfigError("segment value must be a constant or \"exact\"");
        if (!exact) throw ConfigError("segment value \"exact\" needs problem.exact");
        const ClosedFormSolution e = *exact;
        const Region r = s.region;
        if (vector_data) {
            s.velocity = [e, r](Point p) {
                const auto u = exact_jets(e, r, p).velocity;
                return Vec2{u[0].v, u[1].v};
            };
        } else if (s.condition == BoundaryCondition::dirichlet_pressure) {
            s.scalar = [e, r](Point p) { return exact_jets(e, r, p).pressure.v; };
        } else {
            const Vec2 n = outward_normal(s.edge);
            s.scalar = [e, r, n](Point p) {
                const auto u = exact_jets(e, r, p).velocity;
                return n.x * u[0].v + n.y * u[1].v;
            };
        }
    } else if (vector_data) {
        if (!value.is_array() || value.size() != 2) throw ConfigError("velocity segment value must be [u1, u2]");
        const Vec2 v{value[0].get<double>(), value[1].get<double>()};
        s.velocity = [v](Point) { return v; };
    } else {
        const double v = value.get<double>();
        s.scalar = [v](Point) { return v; };
    }
    return s;
}

inline ProblemSpec parse_custom_problem(const json& j) {
    reject_unknown(j, {"name", "stokes", "darcy", "constants", "exact", "forcing", "segments"}, "problem");
    const CoupledGeometry geom(parse_rect(j.at("stokes"), "problem.stokes"), parse_rect(j.at("darcy"), "problem.darcy"));
    const PhysicalConstants constants = j.contains("constants") ? parse_constants(j.at("constants")) : PhysicalConstants{};
    std::optional<ClosedFormSolution> exact;
    if (j.contains("exact") && !j.at("exact").is_null()) exact = exact_solution(j.at("exact").get<std::string>());
    const std::string forcing = get_or<std::string>(j, "forcing", exact ? "exact" : "zero");
    Forcing f;
    if (forcing == "exact") {
        if (!exact) throw ConfigError("forcing \"exact\" needs problem.exact");
        f = derive_forcing(*exact, constants, geom);
    } else if (forcing != "zero") {
        throw ConfigError("problem.forcing must be \"zero\" or \"exact\"");
    }
    std::vector<BoundarySegment> segs;
    if (j.contains("segments")) {
        if (!j.at("segments").is_array()) throw ConfigError("'problem.segments' must be an array");
        for (const json& s : j.at("segments")) segs.push_back(parse_segment(s, exact));
    } else if (exact) {
        segs = exact_dirichlet_segments(*exact, geom);
    } else {
        throw ConfigError("custom problem without an exact solution needs 'segments'");
    }
    ProblemSpec spec{get_or<std::string>(j, "name", "custom"), geom, constants, f, std::move(segs), exact};
    spec.validate();
    return spec;
}

inline ProblemSpec parse_problem(const json& j) {
    if (j.is_string()) return make_problem(j.get<std::string>());
    return parse_custom_problem(j);
}

inline std::array<MLPArch, 4> parse_network(const json& j) {
    reject_unknown(j, {"layers", "width", "activation"}, "network");
    const auto archs = coupled_archs(get_or(j, "layers", 3), get_or(j, "width", 16),
                                     activation_from_string(get_or<std::string>(j, "activation", "tanh")));
    for (const auto& a : archs) a.validate();
    return archs;
}

inline BatchSizes parse_batch(const json& j) {
    reject_unknown(j, {"interior_stokes", "interior_darcy", "boundary_stokes", "boundary_darcy", "interface"},
                   "training.batch");
    BatchSizes b;
    b.interior_stokes = get_or(j, "interior_stokes", b.interior_stokes);
    b.interior_darcy = get_or(j, "interior_darcy", b.interior_darcy);
    b.boundary_stokes = get_or(j, "boundary_stokes", b.boundary_stokes);
    b.boundary_darcy = get_or(j, "boundary_darcy", b.boundary_darcy);
    b.interface = get_or(j, "interface", b.interface);
    return b;
}

inline LossWeights parse_weights(const json& j) {
    LossWeights w = unit_weights();
    if (j.is_array()) {
        if (j.size() != kLossTerms) throw ConfigError("'training.weights' array needs 9 entries");
        for (int k = 0; k < kLossTerms; ++k) w[k] = j[k].get<double>();
        return w;
    }
    require_object(j, "training.weights");
    for (const auto& [key, value] : j.items()) {
        int idx = -1;
        for (int k = 0; k < kLossTerms; ++k)
            if (key == kLossTermNames[k]) idx = k;
        if (idx < 0) throw ConfigError("unknown key '" + key + "' in 'training.weights'");
        w[idx] = value.get<double>();
    }
    return w;
}

inline void parse_training(const json& j, TrainConfig& t) {
    reject_unknown(j,
                   {"optimizer", "alpha", "beta1", "beta2", "eps", "lr_decay", "lr_decay_every", "iters", "batch",
                    "weights", "seed", "grad_norm_tol", "log_every"},
                   "training");
    const std::string opt = get_or<std::string>(j, "optimizer", "adam");
    if (opt == "adam")
        t.optimizer.kind = OptimizerKind::adam;
    else if (opt == "sgd")
        t.optimizer.kind = OptimizerKind::sgd;
    else
        throw ConfigError("unknown optimizer '" + opt + "' (expected adam or sgd)");
    t.optimizer.learning_rate = get_or(j, "alpha", t.optimizer.learning_rate);
    t.optimizer.beta1 = get_or(j, "beta1", t.optimizer.beta1);
    t.optimizer.beta2 = get_or(j, "beta2", t.optimizer.beta2);
    t.optimizer.eps = get_or(j, "eps", t.optimizer.eps);
    t.optimizer.lr_decay = get_or(j, "lr_decay", t.optimizer.lr_decay);
    t.optimizer.lr_decay_every = get_or(j, "lr_decay_every", t.optimizer.lr_decay_every);
    t.max_iters = get_or(j, "iters", t.max_iters);
    if (j.contains("batch")) t.batch = parse_batch(j.at("batch"));
    if (j.contains("weights")) t.weights = parse_weights(j.at("weights"));
    t.seed = get_or(j, "seed", t.seed);
    t.grad_norm_tol = get_or(j, "grad_norm_tol", t.grad_norm_tol);
    t.log_every = get_or(j, "log_every", t.log_every);
}

inline void parse_eval(const json& j, Experiment& e) {
    reject_unknown(j, {"grid", "interface_points"}, "eval");
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (g.is_number_integer()) {
            e.grid.nx = e.grid.ny = g.get<int>();
        } else if (g.is_array() && g.size() == 2) {
            e.grid.nx = g[0].get<int>();
            e.grid.ny = g[1].get<int>();
        } else {
            throw ConfigError("'eval.grid' must be an integer or [nx, ny]");
        }
    }
    e.interface_points = get_or(j, "interface_points", e.interface_points);
    e.grid.validate();
    if (e.interface_points < 2) throw ConfigError("'eval.interface_points' must be >= 2");
}

}  // namespace detail

inline Experiment parse_experiment(const json& j) {
    try {
        detail::reject_unknown(j, {"problem", "network", "training", "eval"}, "<root>");
        if (!j.contains("problem")) throw ConfigError("config needs a 'problem' entry");
        Experiment e{detail::parse_problem(j.at("problem")), {}, {}, 101};
        if (j.contains("network")) e.training.archs = detail::parse_network(j.at("network"));
        if (j.contains("training")) detail::parse_training(j.at("training"), e.training);
        if (j.contains("eval")) detail::parse_eval(j.at("eval"), e);
        e.training.validate();
        return e;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed config: ") + ex.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw ConfigError("'" + path + "' is not valid JSON: " + ex.what());
    }
}

inline Experiment load_experiment(const std::string& path) { return parse_experiment(read_json_file(path)); }

// ---------------------------------------------------------------------------------------------
// Checkpoints: seed, the four architectures, and the flat parameter vector.

struct Checkpoint {
    std::uint64_t seed = 0;
    CoupledParams params;
};

inline json arch_to_json(const MLPArch& a) {
    return {{"input_dim", a.input_dim},
            {"hidden_layers", a.hidden_layers},
            {"width", a.width},
            {"output_dim", a.output_dim},
            {"activation", to_string(a.activation)}};
}

inline MLPArch arch_from_json(const json& j) {
    detail::reject_unknown(j, {"input_dim", "hidden_layers", "width", "output_dim", "activation"}, "archs[]");
    MLPArch a;
    a.input_dim = j.at("input_dim").get<int>();
    a.hidden_layers = j.at("hidden_layers").get<int>();
    a.width = j.at("width").get<int>();
    a.output_dim = j.at("output_dim").get<int>();
    a.activation = activation_from_string(j.at("activation").get<std::string>());
    a.validate();
    return a;
}

inline json checkpoint_to_json(std::uint64_t seed, const CoupledParams& params) {
    json archs = json::array();
    for (const auto& a : params.archs()) archs.push_back(arch_to_json(a));
    return {{"seed", seed}, {"archs", archs}, {"params", params.flatten()}};
}

inline Checkpoint checkpoint_from_json(const json& j) {
    try {
        detail::reject_unknown(j, {"seed", "archs", "params"}, "checkpoint");
        const json& ja = j.at("archs");
        if (!ja.is_array() || ja.size() != 4) throw ConfigError("checkpoint needs exactly four architectures");
        std::array<MLPArch, 4> archs;
        for (int k = 0; k < 4; ++k) archs[k] = arch_from_json(ja[k]);
        Checkpoint c{j.at("seed").get<std::uint64_t>(), init_params(archs, 0)};
        const auto theta = j.at("params").get<std::vector<double>>();
        if (theta.size() != c.params.size())
            throw ConfigError("checkpoint holds " + std::to_string(theta.size()) + " parameters, architectures need " +
                              std::to_string(c.params.size()));
        c.params.assign(theta);
        return c;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed checkpoint: ") + ex.what());
    }
}

inline void save_checkpoint(const std::string& path, std::uint64_t seed, const CoupledParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint '" + path + "' for writing");
    out << checkpoint_to_json(seed, params).dump() << '\n';
    if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) { return checkpoint_from_json(read_json_file(path)); }

inline json report_to_json(const ErrorReport& r) {
    json out;
    if (r.errors) {
        for (int k = 0; k < 4; ++k)
            out["errors"][kUnknownNames[k]] = {{"errL1", (*r.errors)[k].l1}, {"errL2", (*r.errors)[k].l2}};
    } else {
        out["errors"] = nullptr;
    }
    out["interface"] = {r.interface_rms[0], r.interface_rms[1], r.interface_rms[2]};
    return out;
}

}  // namespace cdnn
