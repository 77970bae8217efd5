#include "sma/scenario.hpp"

#include "sma/csv.hpp"
#include "sma/rng.hpp"

#include <json.hpp>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace sma {

using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& x : v) s += "\n  " + x;
    return s;
}

// Typed access to one JSON object; records type errors and, on close(),
// every key that was never asked for.
class Obj {
public:
    Obj(const json& j, std::string path, std::vector<std::string>& errs) : j_(j), path_(std::move(path)), errs_(errs)
    {
        if (!j_.is_object()) bad("", "expected an object");
    }

    bool has(const std::string& k) const { return j_.is_object() && j_.contains(k); }

    void num(const std::string& k, double& out) { read(k, out, "a number"); }
    void integer(const std::string& k, int& out) { read(k, out, "an integer"); }
    void boolean(const std::string& k, bool& out) { read(k, out, "a boolean"); }
    void text(const std::string& k, std::string& out) { read(k, out, "a string"); }
    void u64(const std::string& k, std::uint64_t& out) { read(k, out, "a non-negative integer"); }
    void nums(const std::string& k, std::vector<double>& out) { read(k, out, "an array of numbers"); }
    void ints(const std::string& k, std::vector<int>& out) { read(k, out, "an array of integers"); }
    void texts(const std::string& k, std::vector<std::string>& out) { read(k, out, "an array of strings"); }

    template <int D>
    void fixed(const std::string& k, Eigen::Matrix<double, D, 1>& out)
    {
        std::vector<double> v;
        if (!has(k)) return;
        nums(k, v);
        if (v.empty()) return;
        if (static_cast<int>(v.size()) != D) {
            bad(k, "expected " + std::to_string(D) + " numbers");
            return;
        }
        for (int i = 0; i < D; ++i) out[i] = v[i];
    }

    void matrix3(const std::string& k, Eigen::Matrix3d& out)
    {
        if (!has(k)) return;
        used_.insert(k);
        const json& a = j_.at(k);
        bool ok = a.is_array() && a.size() == 3;
        for (std::size_t r = 0; ok && r < 3; ++r) {
            ok = a[r].is_array() && a[r].size() == 3;
            for (std::size_t c = 0; ok && c < 3; ++c) {
                ok = a[r][c].is_number();
                if (ok) out(r, c) = a[r][c].get<double>();
            }
        }
        if (!ok) bad(k, "expected a 3x3 array of numbers");
    }

    std::optional<Obj> sub(const std::string& k)
    {
        if (!has(k)) return std::nullopt;
        used_.insert(k);
        return Obj(j_.at(k), key_path(k), errs_);
    }

    const json* raw(const std::string& k)
    {
        if (!has(k)) return nullptr;
        used_.insert(k);
        return &j_.at(k);
    }

    std::string key_path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    void close()
    {
        if (!j_.is_object()) return;
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) errs_.push_back("unknown key '" + key_path(it.key()) + "'");
    }

    void bad(const std::string& k, const std::string& what)
    {
        errs_.push_back((k.empty() ? (path_.empty() ? std::string("document") : path_) : key_path(k)) + ": " + what);
    }

private:
    template <class T>
    void read(const std::string& k, T& out, const char* what)
    {
        if (!has(k)) return;
        used_.insert(k);
        const json& v = j_.at(k);
        if (!matches<T>(v)) {
            bad(k, std::string("expected ") + what);
            return;
        }
        out = v.get<T>();
    }

    template <class T>
    static bool matches(const json& v)
    {
        if constexpr (std::is_same_v<T, double>)
            return v.is_number();
        else if constexpr (std::is_same_v<T, int>)
            return v.is_number_integer() && v.get<long long>() >= INT32_MIN && v.get<long long>() <= INT32_MAX;
        else if constexpr (std::is_same_v<T, bool>)
            return v.is_boolean();
        else if constexpr (std::is_same_v<T, std::string>)
            return v.is_string();
        else if constexpr (std::is_same_v<T, std::uint64_t>)
            return v.is_number_unsigned();
        else {
            if (!v.is_array()) return false;
            for (const json& e : v)
                if (!matches<typename T::value_type>(e)) return false;
            return true;
        }
    }

    const json& j_;
    std::string path_;
    std::vector<std::string>& errs_;
    std::set<std::string> used_;
};

std::string location(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void read_sides(Obj& o, const std::string& key, std::vector<BoxSide>& out)
{
    if (!o.has(key)) return;
    std::vector<std::string> names;
    o.texts(key, names);
    std::vector<BoxSide> sides;
    for (const auto& n : names) {
        BoxSide s;
        if (parse_side(n, s))
            sides.push_back(s);
        else
            o.bad(key, "unknown side '" + n + "' (x0, x1, y0, y1, z0, z1)");
    }
    out = sides;
}

void read_affine(Obj& parent, const std::string& key, AffineField& f)
{
    auto o = parent.sub(key);
    if (!o) return;
    o->fixed<3>("c", f.c);
    o->matrix3("A", f.A);
    o->close();
}

SymTensor3 sym_from(const Eigen::Matrix<double, 6, 1>& v)
{
    SymTensor3 s;
    for (int i = 0; i < 6; ++i) s.c[i] = v[i];
    return s;
}

// Kind-specific presence checks run against the raw document.
struct Presence {
    bool path = false, load = false, schedule = false, taus = false, reference_tau = false, rhos = false;
};

} // namespace

ParseError::ParseError(std::vector<std::string> p)
    : std::runtime_error("scenario parse error:" + join(p)), problems(std::move(p))
{
}

ValidationError::ValidationError(std::vector<std::string> p)
    : std::runtime_error("invalid scenario:" + join(p)), problems(std::move(p))
{
}

const char* kind_name(ScenarioKind k)
{
    switch (k) {
    case ScenarioKind::PointTest: return "point-test";
    case ScenarioKind::ConvTau: return "conv-tau";
    case ScenarioKind::ConvRho: return "conv-rho";
    case ScenarioKind::BvpRun: return "bvp-run";
    case ScenarioKind::BvpConv: return "bvp-conv";
    case ScenarioKind::GammaTable: return "gamma-table";
    }
    return "?";
}

std::optional<ScenarioKind> parse_kind(const std::string& s)
{
    for (ScenarioKind k : {ScenarioKind::PointTest, ScenarioKind::ConvTau, ScenarioKind::ConvRho, ScenarioKind::BvpRun,
                           ScenarioKind::BvpConv, ScenarioKind::GammaTable})
        if (s == kind_name(k)) return k;
    return std::nullopt;
}

BvpProblem Scenario::bvp_problem() const
{
    BvpProblem pb;
    pb.extents = extents;
    pb.dirichlet_sides = dirichlet_sides;
    pb.params = params;
    pb.R = R;
    pb.loads = loads;
    pb.options.tolerance = bvp_tolerance;
    return pb;
}

Scenario parse_scenario(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann repeats the position; keep only its description
        std::string msg = e.what();
        const auto col = msg.find("column");
        const auto cut = col == std::string::npos ? std::string::npos : msg.find(": ", col);
        if (cut != std::string::npos) msg = msg.substr(cut + 2);
        throw ParseError({location(text, e.byte) + ": " + msg});
    }

    std::vector<std::string> errs;
    Scenario s;
    Presence has;
    Obj root(doc, "", errs);

    std::string kind;
    root.text("kind", kind);
    if (!root.has("kind"))
        errs.push_back("kind: required");
    else if (!kind.empty() && !parse_kind(kind))
        root.bad("kind", "unknown kind '" + kind + "'");
    if (auto k = parse_kind(kind)) s.kind = *k;

    std::string output = s.output.string();
    root.text("output", output);
    s.output = output;
    root.u64("seed", s.seed);
    root.integer("threads", s.threads);
    root.integer("probes", s.probes);
    root.integer("dump_every", s.dump_every);

    if (auto m = root.sub("material")) {
        m->num("G", s.params.elasticity.G);
        m->num("kappa", s.params.elasticity.kappa);
        m->num("c1", s.params.c1);
        m->num("c2", s.params.c2);
        m->num("c3", s.params.c3);
        m->num("rho", s.params.rho);
        m->num("nu", s.params.nu);
        m->num("delta", s.params.penalty_width);
        m->close();
    }
    if (auto d = root.sub("dissipation")) {
        d->num("R", s.R);
        d->close();
    }
    s.params.R = s.R;

    if (auto t = root.sub("time")) {
        t->num("T", s.T);
        t->integer("N", s.N);
        t->close();
    }

    if (auto p = root.sub("stress_path")) {
        has.path = true;
        std::string type;
        p->text("type", type);
        if (type == "ramp-unload") {
            double peak = 1.0;
            Vec5 dir = default_direction().v;
            p->num("peak", peak);
            p->fixed<5>("direction", dir);
            if (dir.norm() == 0.0)
                p->bad("direction", "must be nonzero");
            else
                s.path = StressPath::ramp_unload(s.T, peak, DevTensor3(dir));
        } else if (type == "constant") {
            Eigen::Matrix<double, 6, 1> v = Eigen::Matrix<double, 6, 1>::Zero();
            p->fixed<6>("value", v);
            s.path = StressPath::constant(s.T, sym_from(v));
        } else if (type == "piecewise") {
            p->nums("times", s.path.times);
            if (const json* vals = p->raw("values")) {
                bool ok = vals->is_array();
                for (std::size_t i = 0; ok && i < vals->size(); ++i) {
                    const json& row = (*vals)[i];
                    ok = row.is_array() && row.size() == 6;
                    SymTensor3 st;
                    for (std::size_t c = 0; ok && c < 6; ++c) {
                        ok = row[c].is_number();
                        if (ok) st.c[c] = row[c].get<double>();
                    }
                    if (ok) s.path.values.push_back(st);
                }
                if (!ok) p->bad("values", "expected an array of 6-component stresses (xx, yy, zz, yz, xz, xy)");
            }
        } else {
            p->bad("type", "expected 'ramp-unload', 'constant' or 'piecewise'");
        }
        p->close();
    }

    if (auto m = root.sub("mesh")) {
        m->integer("n", s.n);
        m->fixed<3>("extents", s.extents);
        read_sides(*m, "dirichlet_sides", s.dirichlet_sides);
        m->close();
    }

    if (auto l = root.sub("load")) {
        has.load = true;
        std::string type;
        l->text("type", type);
        std::vector<BoxSide> traction{BoxSide::XMax};
        read_sides(*l, "traction_sides", traction);
        if (type == "traction-ramp-unload") {
            Eigen::Vector3d peak = Eigen::Vector3d::Zero();
            l->fixed<3>("peak", peak);
            s.loads = traction_ramp_unload(s.T, peak);
        } else if (type == "frames") {
            s.loads.frames.clear();
            if (const json* fr = l->raw("frames")) {
                if (!fr->is_array()) l->bad("frames", "expected an array");
                for (std::size_t i = 0; fr->is_array() && i < fr->size(); ++i) {
                    Obj f((*fr)[i], l->key_path("frames[" + std::to_string(i) + "]"), errs);
                    LoadFrame frame;
                    f.num("t", frame.t);
                    read_affine(f, "body", frame.body);
                    read_affine(f, "traction", frame.traction);
                    read_affine(f, "dirichlet", frame.dirichlet);
                    f.close();
                    s.loads.frames.push_back(frame);
                }
            }
        } else {
            l->bad("type", "expected 'traction-ramp-unload' or 'frames'");
        }
        s.loads.traction_sides = traction;
        l->close();
    } else {
        s.loads = LoadProgram::zero(s.T);
    }

    if (auto so = root.sub("solver")) {
        so->num("tolerance", s.bvp_tolerance);
        so->close();
    }

    if (auto sc = root.sub("schedule")) {
        has.schedule = true;
        LimitSchedule& L = s.schedule;
        sc->text("label", L.label);
        sc->nums("rho", L.rho);
        sc->nums("nu", L.nu);
        sc->nums("tau", L.tau);
        sc->ints("n", L.n);
        if (!L.rho.empty() && !L.nu.empty() && !L.tau.empty() && !L.n.empty()) L.target_terminal();
        sc->num("rho_star", L.rho_star);
        sc->num("nu_star", L.nu_star);
        sc->num("tau_star", L.tau_star);
        sc->integer("n_star", L.n_star);
        sc->boolean("inter_level", s.inter_level);
        if (auto mp = sc->sub("minproblem")) {
            s.minproblem = true;
            mp->num("t", s.minproblem_t);
            mp->close();
        }
        sc->close();
    }

    if (auto st = root.sub("study")) {
        has.taus = st->has("taus");
        has.reference_tau = st->has("reference_tau");
        has.rhos = st->has("rhos");
        st->nums("taus", s.taus);
        st->num("reference_tau", s.reference_tau);
        st->nums("rhos", s.gamma_rhos);
        st->integer("samples", s.gamma_samples);
        st->close();
    }
    root.close();

    if (!errs.empty()) throw ParseError(errs);

    // presence by kind
    auto need = [&](bool ok, const char* what) {
        if (!ok) errs.push_back(std::string(kind_name(s.kind)) + " requires " + what);
    };
    switch (s.kind) {
    case ScenarioKind::PointTest: need(has.path, "'stress_path'"); break;
    case ScenarioKind::ConvTau:
        need(has.path, "'stress_path'");
        need(has.taus, "'study.taus'");
        need(has.reference_tau, "'study.reference_tau'");
        break;
    case ScenarioKind::ConvRho:
        need(has.path, "'stress_path'");
        need(has.schedule, "'schedule'");
        break;
    case ScenarioKind::BvpRun: need(has.load, "'load'"); break;
    case ScenarioKind::BvpConv:
        need(has.load, "'load'");
        need(has.schedule, "'schedule'");
        break;
    case ScenarioKind::GammaTable: need(has.rhos, "'study.rhos'"); break;
    }
    if (!errs.empty()) throw ValidationError(errs);

    const auto v = scenario_violations(s);
    if (!v.empty()) throw ValidationError(v);
    return s;
}

Scenario load_scenario(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::vector<std::string> scenario_violations(const Scenario& s)
{
    std::vector<std::string> v = s.params.violations();
    auto need = [&v](bool ok, const std::string& msg) {
        if (!ok) v.push_back(msg);
    };
    need(s.R > 0, "R must be > 0");
    need(s.T > 0, "T must be > 0");
    need(s.N >= 1, "N must be >= 1");
    need(s.threads >= 1, "threads must be >= 1");
    need(s.probes >= 0, "probes must be >= 0");
    need(s.dump_every >= 0, "dump_every must be >= 0");

    auto divides = [&](double tau) {
        const double q = s.T / tau;
        return tau > 0 && std::abs(q - std::round(q)) <= 1e-9 * q;
    };

    const bool point = s.kind == ScenarioKind::PointTest || s.kind == ScenarioKind::ConvTau ||
                       s.kind == ScenarioKind::ConvRho;
    const bool bvp = s.kind == ScenarioKind::BvpRun || s.kind == ScenarioKind::BvpConv;
    if (point) {
        try {
            s.path.validate();
            need(std::abs(s.path.times.back() - s.T) <= 1e-12 * s.T, "stress_path must end at T");
        } catch (const std::exception& e) {
            v.push_back(std::string("stress_path: ") + e.what());
        }
    }
    if (bvp) {
        need(s.n >= 1, "mesh.n must be >= 1");
        need((s.extents.array() > 0).all(), "mesh.extents must be > 0");
        need(!s.dirichlet_sides.empty(), "mesh.dirichlet_sides must be non-empty");
        need(s.bvp_tolerance > 0, "solver.tolerance must be > 0");
        try {
            s.loads.validate();
            need(std::abs(s.loads.T() - s.T) <= 1e-12 * s.T, "load frames must end at T");
        } catch (const std::exception& e) {
            v.push_back(std::string("load: ") + e.what());
        }
    }
    if (s.kind == ScenarioKind::ConvTau) {
        need(!s.taus.empty(), "study.taus must be non-empty");
        for (double t : s.taus) need(divides(t), "study.taus: every tau must be > 0 and divide T");
        need(divides(s.reference_tau), "study.reference_tau must be > 0 and divide T");
        if (!s.taus.empty())
            need(s.reference_tau < *std::min_element(s.taus.begin(), s.taus.end()),
                 "study.reference_tau must be smaller than every tau");
    }
    if (s.kind == ScenarioKind::ConvRho || s.kind == ScenarioKind::BvpConv) {
        for (const auto& x : s.schedule.violations()) v.push_back("schedule: " + x);
        if (!(s.kind == ScenarioKind::BvpConv && s.minproblem))
            for (double t : s.schedule.tau) need(divides(t), "schedule: every tau must divide T");
        if (s.schedule.tau_star > 0 && !(s.kind == ScenarioKind::BvpConv && s.minproblem))
            need(divides(s.schedule.tau_star), "schedule: tau_star must divide T");
    }
    if (s.kind == ScenarioKind::BvpConv && !s.minproblem) {
        bool pos = s.schedule.nu_star > 0;
        for (double x : s.schedule.nu) pos = pos && x > 0;
        need(pos, "schedule: evolution limits need nu > 0");
    }
    if (s.kind == ScenarioKind::BvpConv && s.minproblem)
        need(s.minproblem_t >= 0 && s.minproblem_t <= s.T, "schedule.minproblem.t must lie in [0, T]");
    if (s.kind == ScenarioKind::GammaTable) {
        need(!s.gamma_rhos.empty(), "study.rhos must be non-empty");
        bool ok = true;
        for (std::size_t i = 0; i < s.gamma_rhos.size(); ++i)
            ok = ok && s.gamma_rhos[i] > 0 && (i == 0 || s.gamma_rhos[i] < s.gamma_rhos[i - 1]);
        need(ok, "study.rhos must be positive and strictly decreasing");
        need(s.gamma_samples >= 2, "study.samples must be >= 2");
    }
    return v;
}

// ---------------------------------------------------------------------------

namespace {

json to_json(const Scenario& s)
{
    json j;
    j["kind"] = kind_name(s.kind);
    j["seed"] = s.seed;
    j["material"] = {{"G", s.params.elasticity.G}, {"kappa", s.params.elasticity.kappa}, {"c1", s.params.c1},
                     {"c2", s.params.c2},          {"c3", s.params.c3},                  {"rho", s.params.rho},
                     {"nu", s.params.nu},          {"delta", s.params.penalty_width}};
    j["dissipation"] = {{"R", s.R}};
    j["time"] = {{"T", s.T}, {"N", s.N}};
    j["probes"] = s.probes;
    switch (s.kind) {
    case ScenarioKind::PointTest:
    case ScenarioKind::ConvTau:
    case ScenarioKind::ConvRho: {
        json vals = json::array();
        for (const SymTensor3& v : s.path.values) vals.push_back(std::vector<double>(v.c.begin(), v.c.end()));
        j["stress_path"] = {{"times", s.path.times}, {"values", vals}};
        break;
    }
    case ScenarioKind::BvpRun:
    case ScenarioKind::BvpConv: {
        std::vector<std::string> dir, trac;
        for (BoxSide b : s.dirichlet_sides) dir.push_back(side_name(b));
        for (BoxSide b : s.loads.traction_sides) trac.push_back(side_name(b));
        j["mesh"] = {{"n", s.n}, {"extents", {s.extents[0], s.extents[1], s.extents[2]}}, {"dirichlet_sides", dir}};
        auto aff = [](const AffineField& f) {
            json a = json::array();
            for (int r = 0; r < 3; ++r) a.push_back({f.A(r, 0), f.A(r, 1), f.A(r, 2)});
            return json{{"c", {f.c[0], f.c[1], f.c[2]}}, {"A", a}};
        };
        json frames = json::array();
        for (const LoadFrame& f : s.loads.frames)
            frames.push_back({{"t", f.t}, {"body", aff(f.body)}, {"traction", aff(f.traction)},
                              {"dirichlet", aff(f.dirichlet)}});
        j["load"] = {{"traction_sides", trac}, {"frames", frames}};
        j["solver"] = {{"tolerance", s.bvp_tolerance}};
        j["dump_every"] = s.dump_every;
        break;
    }
    case ScenarioKind::GammaTable: break;
    }
    if (s.kind == ScenarioKind::ConvTau) j["study"] = {{"taus", s.taus}, {"reference_tau", s.reference_tau}};
    if (s.kind == ScenarioKind::GammaTable) j["study"] = {{"rhos", s.gamma_rhos}, {"samples", s.gamma_samples}};
    if (s.kind == ScenarioKind::ConvRho || s.kind == ScenarioKind::BvpConv) {
        const LimitSchedule& L = s.schedule;
        j["schedule"] = {{"label", L.label},       {"rho", L.rho},           {"nu", L.nu},
                         {"tau", L.tau},           {"n", L.n},               {"rho_star", L.rho_star},
                         {"nu_star", L.nu_star},   {"tau_star", L.tau_star}, {"n_star", L.n_star},
                         {"inter_level", s.inter_level}};
        if (s.minproblem) j["schedule"]["minproblem"] = {{"t", s.minproblem_t}};
    }
    return j;
}

json table_summary(const LimitTable& t)
{
    json rows = json::array();
    for (const LimitRow& r : t.rows) rows.push_back(r.state_diff);
    return {{"label", t.label}, {"reference", t.reference}, {"decreasing", t.decreasing},
            {"energy_ratio", t.energy_ratio}, {"state_diffs", rows}};
}

class Writer {
public:
    explicit Writer(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    std::ofstream open(const std::string& rel)
    {
        const auto p = dir_ / rel;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        files.push_back(rel);
        return os;
    }

    std::vector<std::string> files;

private:
    std::filesystem::path dir_;
};

json run_point_test(const Scenario& s, Writer& w)
{
    DissipationSpec d(s.R);
    const PointState init{apply_C_inverse(s.params.elasticity, s.path.at(0.0)), DevTensor3::zero()};
    const PointTrajectory tr = run_constitutive(s.params, d, s.path, TimeGrid::uniform(s.T, s.N), init);
    {
        auto os = w.open("trajectory.csv");
        write_trajectory_csv(os, tr);
    }
    // stress-strain loop along the initial deviatoric loading direction
    Vec5 dir = Vec5::Zero();
    for (const SymTensor3& st : tr.stresses)
        if (dev(st).v.norm() > 0) {
            dir = dev(st).v.normalized();
            break;
        }
    {
        auto os = w.open("loop.csv");
        csv::write_row(os, std::vector<std::string>{"t", "stress", "strain", "z"});
        for (std::size_t i = 0; i < tr.states.size(); ++i)
            csv::write_row(os, std::vector<double>{tr.grid.nodes[i], dev(tr.stresses[i]).v.dot(dir),
                                                   dev(tr.states[i].eps).v.dot(dir), tr.states[i].z.v.dot(dir)});
    }
    double max_res = -INFINITY, max_z = 0.0;
    for (const PointLedger& l : tr.ledger) max_res = std::max(max_res, l.residual);
    for (const PointState& st : tr.states) max_z = std::max(max_z, norm(st.z));
    json res = {{"max_balance_residual", max_res},
                {"total_dissipation", tr.ledger.back().dissipation},
                {"final_z_norm", norm(tr.states.back().z)},
                {"max_z_norm", max_z},
                {"loop_gap", norm(tr.states.back().eps - tr.states.front().eps)}};
    if (s.probes > 0) {
        auto os = w.open("stability.csv");
        csv::write_row(os, std::vector<std::string>{"t", "worst_violation", "passed"});
        bool all = true;
        for (std::size_t i = 0; i < tr.states.size(); ++i) {
            const StabilityReport r =
                verify_stability(s.params, d, tr.stresses[i], tr.states[i], s.probes, 1e-8, mix64(s.seed + i));
            all = all && r.passed;
            csv::write_row(os, std::vector<double>{tr.grid.nodes[i], r.worst_violation, r.passed ? 1.0 : 0.0});
        }
        res["stable"] = all;
    }
    return res;
}

json run_conv_tau(const Scenario& s, Writer& w)
{
    DissipationSpec d(s.R);
    const PointState init{apply_C_inverse(s.params.elasticity, s.path.at(0.0)), DevTensor3::zero()};
    const TemporalStudy st = temporal_error_study(s.params, d, s.path, s.taus, s.reference_tau, init);
    auto os = w.open("rates.csv");
    csv::write_row(os, std::vector<std::string>{"tau", "err_eps", "err_z", "err", "nodal_err"});
    for (const TemporalRow& r : st.rows)
        csv::write_row(os, std::vector<double>{r.tau, r.err_eps, r.err_z, r.err, r.nodal_err});
    json res = {{"reference_tau", st.reference_tau}, {"degenerate", st.degenerate}};
    res["order"] = st.order ? json(*st.order) : json(nullptr);
    return res;
}

json run_conv_rho(const Scenario& s, Writer& w)
{
    DissipationSpec d(s.R);
    LimitOptions opt;
    opt.inter_level = s.inter_level;
    opt.threads = s.threads;
    const LimitTable t = limit_constitutive(s.params, d, s.path, s.schedule, opt);
    auto os = w.open("limit.csv");
    write_limit_csv(os, t);
    return table_summary(t);
}

json run_bvp(const Scenario& s, Writer& w)
{
    const BvpProblem pb = s.bvp_problem();
    const EvolutionRecord rec = spacetime_run(pb, s.params.rho, s.params.nu, s.T / s.N, s.n);
    {
        auto os = w.open("ledger.csv");
        write_bvp_ledger_csv(os, rec);
    }
    const int steps = static_cast<int>(rec.states.size()) - 1;
    if (s.dump_every > 0)
        for (int i = 0; i <= steps; ++i) {
            if (i % s.dump_every != 0 && i != steps) continue;
            std::ostringstream name;
            name << "fields/step_" << std::setw(5) << std::setfill('0') << i << ".txt";
            auto os = w.open(name.str());
            write_field_dump(os, rec.system->space(), rec.states[i], rec.grid.nodes[i]);
        }
    double max_res = -INFINITY;
    for (const BvpLedger& l : rec.ledger) max_res = std::max(max_res, l.residual);
    json res = {{"max_balance_residual", max_res},
                {"total_dissipation", rec.ledger.back().dissipation},
                {"total_sweeps", rec.total_sweeps},
                {"flags", rec.flags},
                {"apriori", {{"C0", rec.apriori.C0}, {"K", rec.apriori.K}, {"M", rec.apriori.M},
                             {"bound", rec.apriori.bound}, {"observed", rec.apriori.observed},
                             {"holds", rec.apriori.holds}}}};
    if (s.probes > 0) {
        const EnergeticReport rep = verify_energetic(rec, s.probes, 1e-8, s.seed);
        auto os = w.open("stability.csv");
        csv::write_row(os, std::vector<std::string>{"t", "optimal_gap", "worst_probe", "worst", "passed"});
        for (const NodeStability& n : rep.nodes)
            csv::write_row(os, std::vector<double>{n.t, n.optimal_gap, n.worst_probe, n.worst, n.passed ? 1.0 : 0.0});
        res["stable"] = rep.stable;
    }
    return res;
}

json run_bvp_conv(const Scenario& s, Writer& w)
{
    const BvpProblem pb = s.bvp_problem();
    LimitOptions opt;
    opt.inter_level = s.inter_level;
    opt.threads = s.threads;
    const LimitTable t =
        s.minproblem ? limit_minproblem(pb, s.minproblem_t, s.schedule, opt) : limit_evolution(pb, s.schedule, opt);
    auto os = w.open("limit.csv");
    write_limit_csv(os, t);
    return table_summary(t);
}

json run_gamma(const Scenario& s, Writer& w)
{
    const GammaReport rep = gamma_check_F(s.params, s.gamma_rhos, gamma_sample_grid(s.params, s.gamma_samples));
    auto os = w.open("gamma.csv");
    csv::write_row(os, std::vector<std::string>{"rho", "max_gap_inside", "min_outside", "monotone_from_previous"});
    for (const GammaRow& r : rep.rows)
        csv::write_row(os, std::vector<double>{r.rho, r.max_gap_inside, r.min_outside,
                                               r.monotone_from_previous ? 1.0 : 0.0});
    return {{"condition", rep.condition},         {"monotone", rep.monotone},
            {"zero_at_origin", rep.zero_at_origin}, {"samples_inside", rep.samples_inside},
            {"samples_outside", rep.samples_outside}};
}

} // namespace

RunResult run_scenario(const Scenario& s)
{
    const auto v = scenario_violations(s);
    if (!v.empty()) throw ValidationError(v);

    const auto t0 = std::chrono::steady_clock::now();
    Writer w(s.output);
    json results;
    try {
        switch (s.kind) {
        case ScenarioKind::PointTest: results = run_point_test(s, w); break;
        case ScenarioKind::ConvTau: results = run_conv_tau(s, w); break;
        case ScenarioKind::ConvRho: results = run_conv_rho(s, w); break;
        case ScenarioKind::BvpRun: results = run_bvp(s, w); break;
        case ScenarioKind::BvpConv: results = run_bvp_conv(s, w); break;
        case ScenarioKind::GammaTable: results = run_gamma(s, w); break;
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(kind_name(s.kind)) + " scenario failed: " + e.what());
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["scenario"] = to_json(s);
    manifest["results"] = results;
    manifest["files"] = w.files;
    manifest["versions"] = {{"sma", kVersion},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    RunResult r;
    r.files = w.files;
    {
        auto os = w.open("manifest.json");
        os << manifest.dump(2) << '\n';
    }
    {
        auto os = w.open("timing.json");
        os << json{{"wall_seconds", wall}}.dump(2) << '\n';
    }
    r.files = w.files;
    r.wall_seconds = wall;
    return r;
}

} // namespace sma
