#include "shpo/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shpo/error.hpp"
#include "shpo/fourier.hpp"

namespace shpo {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Strict JSON field reading
// ---------------------------------------------------------------------------

json parse_json(std::string_view text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte, text.size());
        for (std::size_t i = 0; i + 1 < limit; ++i) line += text[i] == '\n';
        throw ParseError("JSON syntax error at line " + std::to_string(line) + ": " + e.what());
    }
}

class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ParseError(where() + ": expected an object");
    }

    template <class T>
    T get(const std::string& key, T fallback)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return fallback;
        return convert<T>(*it, key);
    }

    template <class T>
    T require(const std::string& key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) throw ParseError(where(key) + ": required field missing");
        return convert<T>(*it, key);
    }

    const json* child(const std::string& key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string where(const std::string& key = {}) const
    {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ParseError(where(it.key()) + ": unknown field");
        }
    }

private:
    template <class T>
    T convert(const json& v, const std::string& key) const
    {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ParseError(where(key) + ": expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ParseError(where(key) + ": expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ParseError(where(key) + ": expected a number");
            return v.get<T>();
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                throw ParseError(where(key) + ": expected a non-negative integer");
            }
            const auto raw = v.get<std::uint64_t>();
            if (raw > std::numeric_limits<T>::max()) throw ParseError(where(key) + ": value out of range");
            return static_cast<T>(raw);
        } else {
            if (!v.is_number_integer()) throw ParseError(where(key) + ": expected an integer");
            return v.get<T>();
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Config <-> JSON
// ---------------------------------------------------------------------------

const std::map<std::string, ObjectiveConfig::Kind> objective_kinds{
    {"hierarchical", ObjectiveConfig::Kind::hierarchical},
    {"sparse", ObjectiveConfig::Kind::sparse},
    {"tree", ObjectiveConfig::Kind::tree},
    {"spec", ObjectiveConfig::Kind::spec_file},
};

const std::map<std::string, OptimizerConfig::Kind> optimizer_kinds{
    {"random", OptimizerConfig::Kind::random},
    {"sh", OptimizerConfig::Kind::successive_halving},
    {"hyperband", OptimizerConfig::Kind::hyperband},
    {"harmonica-1", OptimizerConfig::Kind::harmonica_1},
    {"harmonica", OptimizerConfig::Kind::harmonica},
};

const std::map<std::string, BaseKind> base_kinds{
    {"random", BaseKind::random},
    {"sh", BaseKind::successive_halving},
    {"hyperband", BaseKind::hyperband},
    {"exhaustive", BaseKind::exhaustive},
};

template <class Enum>
std::string name_of(const std::map<std::string, Enum>& table, Enum value)
{
    for (const auto& [name, v] : table) {
        if (v == value) return name;
    }
    throw Error(ErrorCode::internal, "unnamed enum value");
}

template <class Enum>
Enum kind_of(const std::map<std::string, Enum>& table, const std::string& name, const std::string& where)
{
    auto it = table.find(name);
    if (it == table.end()) throw ParseError(where + ": unknown kind '" + name + "'");
    return it->second;
}

json objective_to_json(const ObjectiveConfig& c)
{
    json j;
    j["kind"] = name_of(objective_kinds, c.kind);
    switch (c.kind) {
    case ObjectiveConfig::Kind::hierarchical:
        j["n"] = c.n;
        j["noise"] = c.noise;
        j["seed"] = c.seed;
        break;
    case ObjectiveConfig::Kind::sparse:
        j["n"] = c.n;
        j["sparsity"] = c.sparsity;
        j["degree"] = c.degree;
        j["coeff_low"] = c.coeff_low;
        j["coeff_high"] = c.coeff_high;
        j["noise"] = c.noise;
        j["seed"] = c.seed;
        break;
    case ObjectiveConfig::Kind::tree:
        j["n"] = c.n;
        j["depth"] = c.depth;
        j["leaf_range"] = c.leaf_range;
        j["boolean_leaves"] = c.boolean_leaves;
        j["seed"] = c.seed;
        break;
    case ObjectiveConfig::Kind::spec_file:
        j["path"] = c.path;
        break;
    }
    return j;
}

ObjectiveConfig objective_from_json(const json& j, const std::string& path)
{
    Fields f(j, path);
    ObjectiveConfig c;
    c.kind = kind_of(objective_kinds, f.require<std::string>("kind"), f.where("kind"));
    switch (c.kind) {
    case ObjectiveConfig::Kind::hierarchical:
        c.n = f.get("n", c.n);
        c.noise = f.get("noise", c.noise);
        c.seed = f.get("seed", c.seed);
        break;
    case ObjectiveConfig::Kind::sparse:
        c.n = f.get("n", c.n);
        c.sparsity = f.get("sparsity", c.sparsity);
        c.degree = f.get("degree", c.degree);
        c.coeff_low = f.get("coeff_low", c.coeff_low);
        c.coeff_high = f.get("coeff_high", c.coeff_high);
        c.noise = f.get("noise", c.noise);
        c.seed = f.get("seed", c.seed);
        break;
    case ObjectiveConfig::Kind::tree:
        c.n = f.get("n", c.n);
        c.depth = f.get("depth", c.depth);
        c.leaf_range = f.get("leaf_range", c.leaf_range);
        c.boolean_leaves = f.get("boolean_leaves", c.boolean_leaves);
        c.seed = f.get("seed", c.seed);
        break;
    case ObjectiveConfig::Kind::spec_file:
        c.path = f.require<std::string>("path");
        break;
    }
    f.finish();
    return c;
}

json psr_to_json(const PsrParams& p)
{
    return json{{"samples", p.samples},     {"sparsity", p.sparsity},
                {"degree", p.degree},       {"lambda", p.lambda},
                {"seed", p.seed},           {"exclude_constant", p.exclude_constant},
                {"tolerance", p.tolerance}, {"max_sweeps", p.max_sweeps},
                {"basis_cap", p.basis_cap}};
}

PsrParams psr_from_json(const json& j, const std::string& path)
{
    Fields f(j, path);
    PsrParams p;
    p.samples = f.get("samples", p.samples);
    p.sparsity = f.get("sparsity", p.sparsity);
    p.degree = f.get("degree", p.degree);
    p.lambda = f.get("lambda", p.lambda);
    p.seed = f.get("seed", p.seed);
    p.exclude_constant = f.get("exclude_constant", p.exclude_constant);
    p.tolerance = f.get("tolerance", p.tolerance);
    p.max_sweeps = f.get("max_sweeps", p.max_sweeps);
    p.basis_cap = f.get("basis_cap", p.basis_cap);
    f.finish();
    return p;
}

json base_to_json(const BaseOptimizerSpec& b)
{
    json j;
    j["kind"] = name_of(base_kinds, b.kind);
    switch (b.kind) {
    case BaseKind::random:
        j["budget"] = b.budget;
        break;
    case BaseKind::successive_halving:
        j["arms"] = b.halving.arms;
        j["eta"] = b.halving.eta;
        j["min_resource"] = b.halving.min_resource;
        j["max_resource"] = b.max_resource;
        break;
    case BaseKind::hyperband:
        j["max_resource"] = b.hyperband.max_resource;
        j["eta"] = b.hyperband.eta;
        break;
    case BaseKind::exhaustive:
        break;
    }
    return j;
}

BaseOptimizerSpec base_from_json(const json& j, const std::string& path)
{
    Fields f(j, path);
    BaseOptimizerSpec b;
    b.kind = kind_of(base_kinds, f.require<std::string>("kind"), f.where("kind"));
    switch (b.kind) {
    case BaseKind::random:
        b.budget = f.get("budget", b.budget);
        break;
    case BaseKind::successive_halving:
        b.halving.arms = f.get("arms", b.halving.arms);
        b.halving.eta = f.get("eta", b.halving.eta);
        b.halving.min_resource = f.get("min_resource", b.halving.min_resource);
        b.max_resource = f.get("max_resource", b.max_resource);
        break;
    case BaseKind::hyperband:
        b.hyperband.max_resource = f.get("max_resource", b.hyperband.max_resource);
        b.hyperband.eta = f.get("eta", b.hyperband.eta);
        break;
    case BaseKind::exhaustive:
        break;
    }
    f.finish();
    return b;
}

json optimizer_to_json(const OptimizerConfig& c)
{
    json j;
    j["kind"] = name_of(optimizer_kinds, c.kind);
    j["seed"] = c.seed;
    switch (c.kind) {
    case OptimizerConfig::Kind::random:
        j["budget"] = c.budget;
        break;
    case OptimizerConfig::Kind::successive_halving:
        j["arms"] = c.halving.arms;
        j["eta"] = c.halving.eta;
        j["min_resource"] = c.halving.min_resource;
        j["max_resource"] = c.max_resource;
        break;
    case OptimizerConfig::Kind::hyperband:
        j["max_resource"] = c.hyperband.max_resource;
        j["eta"] = c.hyperband.eta;
        break;
    case OptimizerConfig::Kind::harmonica_1:
        j["psr"] = psr_to_json(c.psr);
        j["fill"] = c.fill == FillRule::all_plus ? "plus" : "minus";
        break;
    case OptimizerConfig::Kind::harmonica:
        j["psr"] = psr_to_json(c.psr);
        j["stages"] = c.stages;
        j["restriction_size"] = c.restriction_size;
        j["collapse_cap"] = c.collapse_cap;
        j["base"] = base_to_json(c.base);
        break;
    }
    return j;
}

OptimizerConfig optimizer_from_json(const json& j, const std::string& path)
{
    Fields f(j, path);
    OptimizerConfig c;
    c.kind = kind_of(optimizer_kinds, f.require<std::string>("kind"), f.where("kind"));
    c.seed = f.get("seed", c.seed);
    switch (c.kind) {
    case OptimizerConfig::Kind::random:
        c.budget = f.get("budget", c.budget);
        break;
    case OptimizerConfig::Kind::successive_halving:
        c.halving.arms = f.get("arms", c.halving.arms);
        c.halving.eta = f.get("eta", c.halving.eta);
        c.halving.min_resource = f.get("min_resource", c.halving.min_resource);
        c.max_resource = f.get("max_resource", c.max_resource);
        break;
    case OptimizerConfig::Kind::hyperband:
        c.hyperband.max_resource = f.get("max_resource", c.hyperband.max_resource);
        c.hyperband.eta = f.get("eta", c.hyperband.eta);
        break;
    case OptimizerConfig::Kind::harmonica_1: {
        if (const json* p = f.child("psr")) c.psr = psr_from_json(*p, f.where("psr"));
        const std::string fill = f.get<std::string>("fill", "plus");
        if (fill == "plus") c.fill = FillRule::all_plus;
        else if (fill == "minus") c.fill = FillRule::all_minus;
        else throw ParseError(f.where("fill") + ": expected 'plus' or 'minus'");
        break;
    }
    case OptimizerConfig::Kind::harmonica:
        if (const json* p = f.child("psr")) c.psr = psr_from_json(*p, f.where("psr"));
        c.stages = f.get("stages", c.stages);
        c.restriction_size = f.get("restriction_size", c.restriction_size);
        c.collapse_cap = f.get("collapse_cap", c.collapse_cap);
        if (const json* b = f.child("base")) c.base = base_from_json(*b, f.where("base"));
        break;
    }
    f.finish();
    return c;
}

// ---------------------------------------------------------------------------
// Objective spec <-> JSON
// ---------------------------------------------------------------------------

json monomial_to_json(const WeightedMonomial& t)
{
    return json{{"indices", std::vector<Index>(t.monomial.members().begin(), t.monomial.members().end())},
                {"weight", t.weight}};
}

WeightedMonomial monomial_from_json(const json& j, const std::string& path)
{
    Fields f(j, path);
    const json* indices = f.child("indices");
    if (!indices || !indices->is_array()) throw ParseError(f.where("indices") + ": expected an array");
    std::vector<Index> members;
    for (const auto& v : *indices) {
        if (!v.is_number_unsigned()) throw ParseError(f.where("indices") + ": expected non-negative integers");
        members.push_back(v.get<Index>());
    }
    WeightedMonomial t{ParityIndex(std::move(members)), f.require<double>("weight")};
    f.finish();
    return t;
}

json hierarchical_to_json(const HierarchicalSpec& spec)
{
    json stages = json::array();
    for (const auto& stage : spec.stages) {
        json vectors = json::array();
        for (const auto& vec : stage) {
            json terms = json::array();
            for (const auto& t : vec.terms) terms.push_back(monomial_to_json(t));
            vectors.push_back(std::move(terms));
        }
        stages.push_back(std::move(vectors));
    }
    return json{{"kind", "hierarchical"}, {"n", spec.dimension}, {"noise", spec.noise},
                {"seed", spec.seed},      {"stages", std::move(stages)}};
}

HierarchicalSpec hierarchical_from_json(Fields& f)
{
    HierarchicalSpec spec;
    spec.dimension = f.require<std::size_t>("n");
    spec.noise = f.get("noise", 0.0);
    spec.seed = f.get<std::uint64_t>("seed", 0);
    const json* stages = f.child("stages");
    if (!stages || !stages->is_array() || stages->size() != hierarchical_stages) {
        throw ParseError(f.where("stages") + ": expected three stages");
    }
    for (std::size_t i = 0; i < hierarchical_stages; ++i) {
        for (const auto& vec : (*stages)[i]) {
            if (!vec.is_array() || vec.size() != hierarchical_terms) {
                throw ParseError(f.where("stages") + ": each sparse vector needs five terms");
            }
            SparseVector sv;
            for (std::size_t k = 0; k < hierarchical_terms; ++k) {
                sv.terms[k] = monomial_from_json(vec[k], f.where("stages"));
            }
            spec.stages[i].push_back(std::move(sv));
        }
    }
    return spec;
}

json sparse_to_json(const SparsePolynomial& truth, double noise, std::uint64_t seed)
{
    json terms = json::array();
    for (const auto& [s, c] : truth.terms()) terms.push_back(monomial_to_json({s, c}));
    return json{{"kind", "sparse"}, {"n", truth.dimension()}, {"noise", noise}, {"seed", seed}, {"terms", terms}};
}

json tree_to_json(const DecisionTreeSpec& spec)
{
    json nodes = json::array();
    for (const auto& node : spec.nodes) {
        nodes.push_back(json{{"variable", node.variable}, {"value", node.value}, {"plus", node.plus}, {"minus", node.minus}});
    }
    return json{{"kind", "tree"}, {"n", spec.dimension}, {"depth", spec.depth}, {"seed", spec.seed}, {"nodes", nodes}};
}

BuiltObjective objective_from_spec(const json& j)
{
    Fields f(j, "spec");
    const std::string kind = f.require<std::string>("kind");
    BuiltObjective built;
    if (kind == "hierarchical") {
        auto obj = std::make_shared<HierarchicalObjective>(hierarchical_from_json(f));
        built.clean_target = obj->stage_one_polynomial();
        built.objective = obj;
    } else if (kind == "sparse") {
        SparsePolynomial truth(f.require<std::size_t>("n"));
        const double noise = f.get("noise", 0.0);
        f.get<std::uint64_t>("seed", 0);
        const json* terms = f.child("terms");
        if (!terms || !terms->is_array()) throw ParseError("spec.terms: expected an array");
        for (const auto& t : *terms) {
            auto term = monomial_from_json(t, "spec.terms");
            truth.set(term.monomial, term.weight);
        }
        built.clean_target = truth;
        built.objective = std::make_shared<PolynomialObjective>(truth, noise);
    } else if (kind == "tree") {
        DecisionTreeSpec spec;
        spec.dimension = f.require<std::size_t>("n");
        spec.depth = f.get<std::size_t>("depth", 0);
        spec.seed = f.get<std::uint64_t>("seed", 0);
        const json* nodes = f.child("nodes");
        if (!nodes || !nodes->is_array()) throw ParseError("spec.nodes: expected an array");
        for (const auto& n : *nodes) {
            Fields nf(n, "spec.nodes");
            DecisionTreeSpec::Node node;
            node.variable = nf.require<int>("variable");
            node.value = nf.get("value", 0.0);
            node.plus = nf.get<std::size_t>("plus", 0);
            node.minus = nf.get<std::size_t>("minus", 0);
            nf.finish();
            spec.nodes.push_back(node);
        }
        built.objective = std::make_shared<DecisionTreeObjective>(std::move(spec));
    } else {
        throw ParseError("spec.kind: unknown objective spec kind '" + kind + "'");
    }
    f.finish();
    built.spec_json = j.dump();
    return built;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void prepare_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

json features_json(const std::vector<WeightedMonomial>& features)
{
    json out = json::array();
    for (const auto& t : features) out.push_back(monomial_to_json(t));
    return out;
}

json stages_json(const HarmonicaTrace& trace)
{
    json stages = json::array();
    for (const auto& s : trace.stages) {
        json minimizers = json::array();
        for (const auto& m : s.minimizers) {
            minimizers.push_back(json{{"indices", m.assignment.indices()},
                                      {"assignment", m.assignment.to_string()},
                                      {"value", m.value}});
        }
        stages.push_back(json{{"stage", s.stage},
                              {"features", features_json(s.features)},
                              {"fixed", s.fixed},
                              {"minimizers", minimizers},
                              {"intercept", s.psr.intercept},
                              {"lasso_sweeps", s.psr.lasso_sweeps},
                              {"lasso_converged", s.psr.lasso_converged},
                              {"evaluations", s.evaluations}});
    }
    return stages;
}

struct ReplicationRun {
    std::vector<EvaluationRecord> records;
    ReplicationSummary summary;
    std::optional<HarmonicaTrace> trace;
};

std::vector<EvaluationRecord> search_records(const SearchResult& r)
{
    std::vector<EvaluationRecord> records;
    records.reserve(r.log.size());
    for (const auto& e : r.log) records.push_back({e.rung, e.arm, e.resource, e.config, e.value});
    return records;
}

ReplicationRun run_replication(const ObjectivePtr& f, const OptimizerConfig& opt, std::uint64_t seed, unsigned width)
{
    ReplicationRun run;
    switch (opt.kind) {
    case OptimizerConfig::Kind::random: {
        const auto r = random_search(*f, opt.budget, seed, width);
        run.records = search_records(r);
        run.summary.best_value = r.value;
        run.summary.best_config = r.best;
        break;
    }
    case OptimizerConfig::Kind::successive_halving: {
        FidelityObjective fidelity(f, opt.max_resource);
        const auto r = successive_halving(fidelity, opt.halving, seed, width);
        run.records = search_records(r);
        run.summary.best_value = r.value;
        run.summary.best_config = r.best;
        break;
    }
    case OptimizerConfig::Kind::hyperband: {
        FidelityObjective fidelity(f, opt.hyperband.max_resource);
        const auto r = hyperband(fidelity, opt.hyperband, seed, width);
        run.records = search_records(r);
        run.summary.best_value = r.value;
        run.summary.best_config = r.best;
        break;
    }
    case OptimizerConfig::Kind::harmonica_1: {
        PsrParams p = opt.psr;
        p.seed = seed;
        auto r = harmonica_1(f, p, opt.fill, width);
        run.records = r.trace.evaluations;
        run.summary.best_value = r.trace.best_value;
        run.summary.best_config = r.trace.best;
        run.trace = std::move(r.trace);
        break;
    }
    case OptimizerConfig::Kind::harmonica: {
        HarmonicaParams p;
        p.stages = opt.stages;
        p.psr = opt.psr;
        p.restriction_size = opt.restriction_size;
        p.collapse_cap = opt.collapse_cap;
        p.base = opt.base;
        p.seed = seed;
        auto r = harmonica_q(f, p, width);
        run.records = r.trace.evaluations;
        run.summary.best_value = r.trace.best_value;
        run.summary.best_config = r.trace.best;
        run.trace = std::move(r.trace);
        break;
    }
    }
    run.summary.total_evaluations = run.records.size();
    for (const auto& rec : run.records) run.summary.total_resource += rec.resource;
    return run;
}

// Rows that define a replication's best value: single evaluations, or the
// highest-fidelity estimates for the multi-fidelity optimizers.
bool uses_max_resource_rule(const std::string& optimizer)
{
    return optimizer == "sh" || optimizer == "hyperband";
}

double parse_double(std::string_view text)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError("invalid number '" + std::string(text) + "'");
    }
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

ExperimentConfig parse_experiment_config(std::string_view json_text)
{
    const json j = parse_json(json_text);
    Fields f(j, "");
    ExperimentConfig c;
    const json* objective = f.child("objective");
    if (!objective) throw ParseError("objective: required field missing");
    c.objective = objective_from_json(*objective, "objective");
    const json* optimizer = f.child("optimizer");
    if (!optimizer) throw ParseError("optimizer: required field missing");
    c.optimizer = optimizer_from_json(*optimizer, "optimizer");
    c.replications = f.get("replications", c.replications);
    c.parallel = f.get("parallel", c.parallel);
    f.finish();
    if (c.replications < 1) throw ParseError("replications: must be at least 1");
    if (c.parallel < 1) throw ParseError("parallel: must be at least 1");
    return c;
}

std::string serialize_experiment_config(const ExperimentConfig& c)
{
    json j{{"objective", objective_to_json(c.objective)},
           {"optimizer", optimizer_to_json(c.optimizer)},
           {"replications", c.replications},
           {"parallel", c.parallel}};
    return j.dump(2);
}

ObjectiveConfig parse_objective_config(std::string_view json_text)
{
    const json j = parse_json(json_text);
    // Accept either a bare objective or a document with an "objective" key.
    if (j.is_object() && j.contains("objective")) {
        Fields f(j, "");
        const json* objective = f.child("objective");
        for (const char* ignored : {"optimizer", "replications", "parallel", "psr", "levels", "seeds"}) f.child(ignored);
        f.finish();
        return objective_from_json(*objective, "objective");
    }
    return objective_from_json(j, "objective");
}

BuiltObjective build_objective(const ObjectiveConfig& c)
{
    BuiltObjective built;
    switch (c.kind) {
    case ObjectiveConfig::Kind::hierarchical: {
        auto obj = gen_hierarchical_objective(c.n, c.noise, c.seed);
        built.spec_json = hierarchical_to_json(obj->spec()).dump();
        built.clean_target = obj->stage_one_polynomial();
        built.objective = std::move(obj);
        break;
    }
    case ObjectiveConfig::Kind::sparse: {
        auto gen = gen_sparse_polynomial_objective(
            {c.n, c.sparsity, c.degree, c.coeff_low, c.coeff_high, c.noise, c.seed});
        built.spec_json = sparse_to_json(gen.truth, c.noise, c.seed).dump();
        built.clean_target = gen.truth;
        built.objective = std::move(gen.objective);
        break;
    }
    case ObjectiveConfig::Kind::tree: {
        auto spec = generate_decision_tree_spec(c.n, c.depth, c.leaf_range, c.boolean_leaves, c.seed);
        built.spec_json = tree_to_json(spec).dump();
        built.objective = std::make_shared<DecisionTreeObjective>(std::move(spec));
        break;
    }
    case ObjectiveConfig::Kind::spec_file:
        return load_objective_spec(read_file(c.path));
    }
    return built;
}

BuiltObjective load_objective_spec(std::string_view spec_json)
{
    return objective_from_spec(parse_json(spec_json));
}

RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir)
{
    const auto started = std::chrono::steady_clock::now();
    const BuiltObjective built = build_objective(config.objective);
    prepare_dir(out_dir);

    RunSummary summary;
    summary.optimizer = name_of(optimizer_kinds, config.optimizer.kind);
    std::ostringstream csv;
    csv << evaluations_header << '\n';
    json replications = json::array();
    json stage_docs = json::array();
    std::size_t best_replication = 0;
    double sum = 0.0;

    for (std::size_t r = 0; r < config.replications; ++r) {
        const auto rep_start = std::chrono::steady_clock::now();
        const std::uint64_t seed = replication_seed(config.optimizer.seed, r);
        ReplicationRun run = run_replication(built.objective, config.optimizer, seed, config.parallel);
        run.summary.index = r;
        run.summary.seed = seed;
        run.summary.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - rep_start).count();

        for (const auto& rec : run.records) {
            csv << r << ',' << rec.stage << ',' << rec.sample_index << ',' << rec.resource << ','
                << rec.config.to_string() << ',' << format_double(rec.value) << '\n';
        }

        json rep{{"index", r},
                 {"seed", seed},
                 {"best_value", run.summary.best_value},
                 {"best_config", run.summary.best_config.to_string()},
                 {"total_evaluations", run.summary.total_evaluations},
                 {"total_resource", run.summary.total_resource},
                 {"wall_time_seconds", run.summary.wall_time_seconds}};
        if (run.trace) {
            rep["stages"] = stages_json(*run.trace);
            stage_docs.push_back(json{{"replication", r},
                                      {"stages", rep["stages"]},
                                      {"free_variables", run.trace->free_variables},
                                      {"base_evaluations", run.trace->base.log.size()}});
        }
        replications.push_back(std::move(rep));

        summary.total_evaluations += run.summary.total_evaluations;
        summary.total_resource += run.summary.total_resource;
        sum += run.summary.best_value;
        if (r == 0 || run.summary.best_value < summary.replications[best_replication].best_value) {
            best_replication = r;
        }
        summary.replications.push_back(std::move(run.summary));
    }

    const auto& best = summary.replications[best_replication];
    summary.best_value = best.best_value;
    summary.best_config = best.best_config;
    summary.aggregate_min = best.best_value;
    summary.aggregate_mean = sum / static_cast<double>(config.replications);
    summary.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    json doc{{"optimizer", summary.optimizer},
             {"config", json::parse(serialize_experiment_config(config))},
             {"best_value", summary.best_value},
             {"best_config", summary.best_config.to_string()},
             {"total_evaluations", summary.total_evaluations},
             {"total_resource", summary.total_resource},
             {"replications", replications},
             {"aggregate", json{{"min", summary.aggregate_min}, {"mean", summary.aggregate_mean}}},
             {"wall_time_seconds", summary.wall_time_seconds}};
    if (!stage_docs.empty()) {
        doc["stages"] = replications[best_replication]["stages"];
        write_file(out_dir / "stages.json", json{{"replications", stage_docs}}.dump(2) + "\n");
    }
    summary.json = doc.dump(2) + "\n";
    write_file(out_dir / "evaluations.csv", csv.str());
    write_file(out_dir / "summary.json", summary.json);
    return summary;
}

RecoverConfig parse_recover_config(std::string_view json_text)
{
    const json j = parse_json(json_text);
    Fields f(j, "");
    RecoverConfig c;
    const json* objective = f.child("objective");
    if (!objective) throw ParseError("objective: required field missing");
    c.objective = objective_from_json(*objective, "objective");
    if (const json* p = f.child("psr")) c.psr = psr_from_json(*p, "psr");
    c.parallel = f.get("parallel", c.parallel);
    f.finish();
    return c;
}

std::string run_recover(const RecoverConfig& config, const std::filesystem::path& out_dir)
{
    const BuiltObjective built = build_objective(config.objective);
    const PsrResult r = psr(*built.objective, config.psr, config.parallel);
    prepare_dir(out_dir);

    std::ostringstream samples;
    write_samples_csv(samples, r.samples);
    write_file(out_dir / "samples.csv", samples.str());

    json doc{{"features", features_json(r.selected)},
             {"variables", r.variables},
             {"intercept", r.intercept},
             {"leading", features_json(r.leading)},
             {"lasso_sweeps", r.lasso_sweeps},
             {"lasso_converged", r.lasso_converged},
             {"kkt_residual", r.kkt_residual},
             {"samples", r.samples.size()}};
    if (built.clean_target && built.objective->dimension() <= max_sweep_dimension) {
        const SparsePolynomial& target = *built.clean_target;
        const double mse = hypercube_mean(target.dimension(), [&](const Configuration& x) {
            const double d = r.surrogate.evaluate(x) - target.evaluate(x);
            return d * d;
        });
        doc["estimation_error"] = std::sqrt(mse);
    }
    const std::string text = doc.dump(2) + "\n";
    write_file(out_dir / "recovery.json", text);
    return text;
}

SweepConfig parse_sweep_config(std::string_view json_text)
{
    const json j = parse_json(json_text);
    Fields f(j, "");
    SweepConfig c;
    const json* objective = f.child("objective");
    if (!objective) throw ParseError("objective: required field missing");
    c.objective = objective_from_json(*objective, "objective");
    if (const json* p = f.child("psr")) c.psr = psr_from_json(*p, "psr");
    if (const json* levels = f.child("levels")) {
        if (!levels->is_array() || levels->empty()) throw ParseError("levels: expected a non-empty array");
        c.levels.clear();
        for (const auto& v : *levels) {
            if (!v.is_number() || v.get<double>() < 0) throw ParseError("levels: expected non-negative numbers");
            c.levels.push_back(v.get<double>());
        }
    }
    c.seeds = f.get("seeds", c.seeds);
    c.parallel = f.get("parallel", c.parallel);
    f.finish();
    if (c.seeds < 1) throw ParseError("seeds: must be at least 1");
    return c;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw InputError("line fit needs two or more paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    fit.correlation = (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    return fit;
}

SweepResult noise_sweep(const SweepConfig& config, const std::filesystem::path& out_dir)
{
    if (config.objective.kind != ObjectiveConfig::Kind::hierarchical &&
        config.objective.kind != ObjectiveConfig::Kind::sparse) {
        throw InputError("noise sweep needs a hierarchical or sparse objective");
    }
    if (config.objective.n > max_sweep_dimension) {
        throw LimitError("noise sweep measures error exhaustively; n=" + std::to_string(config.objective.n) +
                         " exceeds " + std::to_string(max_sweep_dimension));
    }

    SweepResult result;
    for (std::size_t s = 0; s < config.seeds; ++s) {
        ObjectiveConfig oc = config.objective;
        oc.seed = replication_seed(config.objective.seed, s);
        oc.noise = 0.0;
        const SparsePolynomial target = *build_objective(oc).clean_target;
        PsrParams params = config.psr;
        params.seed = replication_seed(config.psr.seed, s);
        for (double level : config.levels) {
            const PolynomialObjective noisy(target, level);
            const PsrResult r = psr(noisy, params, config.parallel);
            const double mse = hypercube_mean(target.dimension(), [&](const Configuration& x) {
                const double d = r.surrogate.evaluate(x) - target.evaluate(x);
                return d * d;
            });
            result.rows.push_back({level, s, std::sqrt(mse)});
        }
    }
    std::sort(result.rows.begin(), result.rows.end(), [&](const SweepRow& a, const SweepRow& b) {
        const auto ia = std::find(config.levels.begin(), config.levels.end(), a.noise);
        const auto ib = std::find(config.levels.begin(), config.levels.end(), b.noise);
        return ia != ib ? ia < ib : a.seed < b.seed;
    });

    for (double level : config.levels) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& row : result.rows) {
            if (row.noise == level) {
                sum += row.error;
                ++count;
            }
        }
        result.mean_error.push_back(sum / static_cast<double>(count));
    }
    if (config.levels.size() >= 2) result.fit = fit_line(config.levels, result.mean_error);

    if (!out_dir.empty()) {
        prepare_dir(out_dir);
        std::ostringstream csv;
        csv << "noise,seed,error\n";
        for (const auto& row : result.rows) {
            csv << format_double(row.noise) << ',' << row.seed << ',' << format_double(row.error) << '\n';
        }
        write_file(out_dir / "sweep.csv", csv.str());
        json levels = json::array();
        for (std::size_t i = 0; i < config.levels.size(); ++i) {
            levels.push_back(json{{"noise", config.levels[i]}, {"mean_error", result.mean_error[i]}});
        }
        json fit{{"levels", levels},
                 {"slope", result.fit.slope},
                 {"intercept", result.fit.intercept},
                 {"correlation", result.fit.correlation}};
        write_file(out_dir / "fit.json", fit.dump(2) + "\n");
    }
    return result;
}

std::string VerifyReport::json() const
{
    return nlohmann::json{{"ok", ok}, {"problems", problems}}.dump(2) + "\n";
}

VerifyReport verify_run(const std::filesystem::path& out_dir)
{
    VerifyReport report;
    auto fail = [&](std::string message) {
        report.ok = false;
        report.problems.push_back(std::move(message));
    };

    const json summary = parse_json(read_file(out_dir / "summary.json"));
    const std::string csv = read_file(out_dir / "evaluations.csv");

    struct Row {
        int resource;
        std::string config;
        double value;
    };
    std::map<std::size_t, std::vector<Row>> rows;
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    if (line != evaluations_header) fail("evaluations.csv header mismatch");
    std::size_t line_no = 1;
    while (std::getline(lines, line)) {
        ++line_no;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream fields(line);
        while (std::getline(fields, cell, ',')) cells.push_back(cell);
        if (cells.size() != 6) {
            fail("evaluations.csv line " + std::to_string(line_no) + ": expected 6 fields");
            continue;
        }
        rows[std::stoul(cells[0])].push_back({std::stoi(cells[3]), cells[4], parse_double(cells[5])});
    }

    const std::string optimizer = summary.at("optimizer").get<std::string>();
    const bool max_rule = uses_max_resource_rule(optimizer);
    std::size_t total_evaluations = 0;
    long long total_resource = 0;
    double best = 0.0, sum = 0.0;
    std::string best_config;
    const auto& reps = summary.at("replications");
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& rep = reps[i];
        const std::size_t index = rep.at("index").get<std::size_t>();
        const auto& rs = rows[index];
        const std::string tag = "replication " + std::to_string(index) + ": ";
        if (rs.empty()) {
            fail(tag + "no evaluation rows");
            continue;
        }
        int target_resource = 1;
        if (max_rule) {
            for (const auto& r : rs) target_resource = std::max(target_resource, r.resource);
        }
        bool have = false;
        double rep_best = 0.0;
        long long rep_resource = 0;
        for (const auto& r : rs) {
            rep_resource += r.resource;
            if (r.resource != target_resource) continue;
            if (!have || r.value < rep_best) rep_best = r.value;
            have = true;
        }
        const double stated = rep.at("best_value").get<double>();
        if (!have || stated != rep_best) {
            fail(tag + "best_value " + format_double(stated) + " != recomputed " + format_double(rep_best));
        }
        const std::string stated_config = rep.at("best_config").get<std::string>();
        const bool config_found = std::any_of(rs.begin(), rs.end(), [&](const Row& r) {
            return r.resource == target_resource && r.value == stated && r.config == stated_config;
        });
        if (!config_found) fail(tag + "best_config does not match a logged row with the best value");
        if (rep.at("total_evaluations").get<std::size_t>() != rs.size()) fail(tag + "total_evaluations mismatch");
        if (rep.at("total_resource").get<long long>() != rep_resource) fail(tag + "total_resource mismatch");

        total_evaluations += rs.size();
        total_resource += rep_resource;
        sum += rep_best;
        if (i == 0 || rep_best < best) {
            best = rep_best;
            best_config = stated_config;
        }
    }
    if (rows.size() != reps.size()) fail("evaluations.csv replication count differs from summary.json");
    if (!reps.empty()) {
        if (summary.at("best_value").get<double>() != best) fail("top-level best_value mismatch");
        if (summary.at("best_config").get<std::string>() != best_config) fail("top-level best_config mismatch");
        if (summary.at("total_evaluations").get<std::size_t>() != total_evaluations) fail("top-level total_evaluations mismatch");
        if (summary.at("total_resource").get<long long>() != total_resource) fail("top-level total_resource mismatch");
        const auto& aggregate = summary.at("aggregate");
        if (aggregate.at("min").get<double>() != best) fail("aggregate.min mismatch");
        if (aggregate.at("mean").get<double>() != sum / static_cast<double>(reps.size())) fail("aggregate.mean mismatch");
    }
    return report;
}

std::string gen_objective(const ObjectiveConfig& config, const std::filesystem::path& out_dir)
{
    const BuiltObjective built = build_objective(config);
    prepare_dir(out_dir);
    const std::string text = json::parse(built.spec_json).dump(2) + "\n";
    write_file(out_dir / "objective.json", text);
    return text;
}

} // namespace shpo
