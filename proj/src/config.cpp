#include "cavity/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cavity/errors.hpp"

namespace cavity {

namespace {

const std::vector<std::pair<JobKind, std::string>> kJobNames{
    {JobKind::SpectrumScan, "spectrum_scan"},   {JobKind::PhaseScan, "phase_scan"},
    {JobKind::PhaseDiagramGrid, "phase_diagram_grid"}, {JobKind::ExponentStudy, "exponent_study"},
    {JobKind::TriplePoint, "triple_point"},     {JobKind::ObservableTable, "observable_table"},
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw ValidationError("field '" + key + "': " + why);
}

double to_double(const std::string& key, const std::string& v) {
    double d = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc() || p != v.data() + v.size()) bad(key, "expected a number, got '" + v + "'");
    return d;
}

long long to_int(const std::string& key, const std::string& v) {
    long long i = 0;
    const char* b = v.data();
    if (!v.empty() && v[0] == '+') ++b;
    auto [p, ec] = std::from_chars(b, v.data() + v.size(), i);
    if (ec != std::errc() || p != v.data() + v.size()) bad(key, "expected an integer, got '" + v + "'");
    return i;
}

std::string fmt(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, char sep, F f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += f(v[i]);
    }
    return out;
}

}  // namespace

std::string to_string(JobKind k) {
    for (const auto& [kind, name] : kJobNames)
        if (kind == k) return name;
    return "?";
}

JobKind job_kind_from_string(const std::string& s) {
    for (const auto& [kind, name] : kJobNames)
        if (name == s) return kind;
    bad("job.kind", "unknown job kind '" + s + "'");
}

std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

std::string to_string(const SectorSpec& s) {
    switch (s.kind) {
        case SectorKind::LambdaBlock: return "LAMBDA_BLOCK:" + std::to_string(s.value);
        case SectorKind::MBlock: return "M_BLOCK:" + std::to_string(s.value);
        case SectorKind::Parity:
            return std::string("PARITY:") + (s.value > 0 ? "+1" : "-1") + ":" + std::to_string(s.fock_cutoff.value_or(0));
        case SectorKind::Full: return "FULL:" + std::to_string(s.fock_cutoff.value_or(0));
    }
    return "?";
}

SectorSpec sector_from_string(const std::string& s) {
    auto parts = split(s, ':');
    const std::string key = "sector.list";
    if (parts.empty()) bad(key, "empty sector");
    auto need = [&](std::size_t n) {
        if (parts.size() != n) bad(key, "malformed sector '" + s + "'");
    };
    if (parts[0] == "LAMBDA_BLOCK") {
        need(2);
        return SectorSpec::lambda_block(int(to_int(key, parts[1])));
    }
    if (parts[0] == "M_BLOCK") {
        need(2);
        return SectorSpec::m_block(int(to_int(key, parts[1])));
    }
    if (parts[0] == "PARITY") {
        need(3);
        return SectorSpec::parity(int(to_int(key, parts[1])), int(to_int(key, parts[2])));
    }
    if (parts[0] == "FULL") {
        need(2);
        return SectorSpec::full(int(to_int(key, parts[1])));
    }
    bad(key, "unknown sector kind '" + parts[0] + "'");
}

bool JobConfig::operator==(const JobConfig& o) const { return serialize_config(*this) == serialize_config(o); }

namespace {

using Setter = std::function<void(JobConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> m{
        {"job.kind", [](JobConfig& c, const std::string&, const std::string& v) { c.kind = job_kind_from_string(v); }},
        {"job.seed",
         [](JobConfig& c, const std::string& k, const std::string& v) {
             auto s = to_int(k, v);
             if (s < 0) bad(k, "must be non-negative");
             c.seed = std::uint64_t(s);
         }},
        {"model.kind",
         [](JobConfig& c, const std::string& k, const std::string& v) {
             try {
                 c.model.kind = model_kind_from_string(v);
             } catch (const ValidationError& e) {
                 bad(k, e.what());
             }
         }},
        {"model.n_atoms", [](JobConfig& c, const std::string& k, const std::string& v) { c.model.n_atoms = int(to_int(k, v)); }},
        {"model.field_freq", [](JobConfig& c, const std::string& k, const std::string& v) { c.model.field_freq = to_double(k, v); }},
        {"model.atomic_freq", [](JobConfig& c, const std::string& k, const std::string& v) { c.model.atomic_freq = to_double(k, v); }},
        {"model.gamma", [](JobConfig& c, const std::string& k, const std::string& v) { c.model.gamma = to_double(k, v); }},
        {"model.level_freqs",
         [](JobConfig& c, const std::string& k, const std::string& v) {
             auto p = split(v, ',');
             if (p.size() != 3) bad(k, "expected three comma-separated frequencies");
             for (int i = 0; i < 3; ++i) c.model.level_freqs[i] = to_double(k, p[i]);
         }},
        {"model.mu12", [](JobConfig& c, const std::string& k, const std::string& v) { c.model.mu[0] = to_double(k, v); }},
        {"model.mu13", [](JobConfig& c, const std::string& k, const std::string& v) { c.model.mu[1] = to_double(k, v); }},
        {"model.mu23", [](JobConfig& c, const std::string& k, const std::string& v) { c.model.mu[2] = to_double(k, v); }},
        {"sector.list",
         [](JobConfig& c, const std::string&, const std::string& v) {
             c.sectors.clear();
             for (const auto& s : split(v, ';')) c.sectors.push_back(sector_from_string(s));
         }},
        {"sector.levels", [](JobConfig& c, const std::string& k, const std::string& v) { c.levels = int(to_int(k, v)); }},
        {"sector.fock_cutoff",
         [](JobConfig& c, const std::string& k, const std::string& v) {
             if (v == "auto")
                 c.fock_cutoff.reset();
             else
                 c.fock_cutoff = int(to_int(k, v));
         }},
        {"path.couplings",
         [](JobConfig& c, const std::string& k, const std::string& v) {
             c.path_couplings.clear();
             for (const auto& item : split(v, ';')) {
                 auto p = split(item, ':');
                 if (p.size() != 3) bad(k, "expected coupling:offset:slope, got '" + item + "'");
                 try {
                     c.path_couplings.push_back({coupling_from_string(p[0]), to_double(k, p[1]), to_double(k, p[2])});
                 } catch (const ValidationError& e) {
                     bad(k, e.what());
                 }
             }
         }},
        {"path.start", [](JobConfig& c, const std::string& k, const std::string& v) { c.path_start = to_double(k, v); }},
        {"path.end", [](JobConfig& c, const std::string& k, const std::string& v) { c.path_end = to_double(k, v); }},
        {"path.samples", [](JobConfig& c, const std::string& k, const std::string& v) { c.path_samples = int(to_int(k, v)); }},
        {"path.method",
         [](JobConfig& c, const std::string& k, const std::string& v) {
             try {
                 c.method = transition_method_from_string(v);
             } catch (const ValidationError& e) {
                 bad(k, e.what());
             }
         }},
        {"grid.x.coupling", [](JobConfig& c, const std::string&, const std::string& v) { c.grid_x.coupling = coupling_from_string(v); }},
        {"grid.x.start", [](JobConfig& c, const std::string& k, const std::string& v) { c.grid_x.start = to_double(k, v); }},
        {"grid.x.end", [](JobConfig& c, const std::string& k, const std::string& v) { c.grid_x.end = to_double(k, v); }},
        {"grid.x.samples", [](JobConfig& c, const std::string& k, const std::string& v) { c.grid_x.samples = int(to_int(k, v)); }},
        {"grid.y.coupling", [](JobConfig& c, const std::string&, const std::string& v) { c.grid_y.coupling = coupling_from_string(v); }},
        {"grid.y.start", [](JobConfig& c, const std::string& k, const std::string& v) { c.grid_y.start = to_double(k, v); }},
        {"grid.y.end", [](JobConfig& c, const std::string& k, const std::string& v) { c.grid_y.end = to_double(k, v); }},
        {"grid.y.samples", [](JobConfig& c, const std::string& k, const std::string& v) { c.grid_y.samples = int(to_int(k, v)); }},
        {"exponent.sizes",
         [](JobConfig& c, const std::string& k, const std::string& v) {
             c.sizes.clear();
             for (const auto& s : split(v, ',')) c.sizes.push_back(int(to_int(k, s)));
         }},
        {"exponent.offset", [](JobConfig& c, const std::string& k, const std::string& v) { c.offset = to_double(k, v); }},
        {"observables.x",
         [](JobConfig& c, const std::string& k, const std::string& v) {
             c.xs.clear();
             for (const auto& s : split(v, ',')) c.xs.push_back(to_double(k, s));
         }},
        {"tolerance.energy", [](JobConfig& c, const std::string& k, const std::string& v) { c.energy_tol = to_double(k, v); }},
        {"tolerance.eigen", [](JobConfig& c, const std::string& k, const std::string& v) { c.eigen_tol = to_double(k, v); }},
        {"output.dir", [](JobConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
        {"output.format",
         [](JobConfig& c, const std::string& k, const std::string& v) {
             if (v == "csv")
                 c.format = OutputFormat::Csv;
             else if (v == "json")
                 c.format = OutputFormat::Json;
             else
                 bad(k, "expected csv or json");
         }},
    };
    return m;
}

}  // namespace

JobConfig parse_config(const std::string& text) {
    JobConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError("line " + std::to_string(lineno) + ": expected 'key = value'");
        auto key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end()) bad(key, "unknown key (line " + std::to_string(lineno) + ")");
        it->second(cfg, key, value);
    }
    return cfg;
}

JobConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const JobConfig& c) {
    std::ostringstream os;
    auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
    kv("job.kind", to_string(c.kind));
    kv("job.seed", std::to_string(c.seed));
    kv("model.kind", to_string(c.model.kind));
    kv("model.n_atoms", std::to_string(c.model.n_atoms));
    kv("model.field_freq", fmt(c.model.field_freq));
    kv("model.atomic_freq", fmt(c.model.atomic_freq));
    kv("model.gamma", fmt(c.model.gamma));
    kv("model.level_freqs", fmt(c.model.level_freqs[0]) + "," + fmt(c.model.level_freqs[1]) + "," +
                                fmt(c.model.level_freqs[2]));
    kv("model.mu12", fmt(c.model.mu[0]));
    kv("model.mu13", fmt(c.model.mu[1]));
    kv("model.mu23", fmt(c.model.mu[2]));
    kv("sector.list", join(c.sectors, ';', [](const SectorSpec& s) { return to_string(s); }));
    kv("sector.levels", std::to_string(c.levels));
    kv("sector.fock_cutoff", c.fock_cutoff ? std::to_string(*c.fock_cutoff) : "auto");
    kv("path.couplings", join(c.path_couplings, ';', [](const AffineCoupling& a) {
           return to_string(a.target) + ":" + fmt(a.offset) + ":" + fmt(a.slope);
       }));
    kv("path.start", fmt(c.path_start));
    kv("path.end", fmt(c.path_end));
    kv("path.samples", std::to_string(c.path_samples));
    kv("path.method", to_string(c.method));
    for (auto [name, ax] : {std::pair{"grid.x", &c.grid_x}, std::pair{"grid.y", &c.grid_y}}) {
        std::string n(name);
        kv(n + ".coupling", to_string(ax->coupling));
        kv(n + ".start", fmt(ax->start));
        kv(n + ".end", fmt(ax->end));
        kv(n + ".samples", std::to_string(ax->samples));
    }
    kv("exponent.sizes", join(c.sizes, ',', [](int n) { return std::to_string(n); }));
    kv("exponent.offset", fmt(c.offset));
    kv("observables.x", join(c.xs, ',', [](double x) { return fmt(x); }));
    kv("tolerance.energy", fmt(c.energy_tol));
    kv("tolerance.eigen", fmt(c.eigen_tol));
    kv("output.dir", c.output_dir);
    kv("output.format", to_string(c.format));
    return os.str();
}

void validate_config(const JobConfig& c) {
    auto field = [](const std::string& key, const std::function<void()>& f) {
        try {
            f();
        } catch (const ValidationError& e) {
            std::string w = e.what();
            if (w.rfind("field '", 0) == 0) throw;
            bad(key, w);
        }
    };
    field("model", [&] { c.model.validate(); });
    if (!(c.energy_tol > 0)) bad("tolerance.energy", "must be > 0");
    if (!(c.eigen_tol > 0)) bad("tolerance.eigen", "must be > 0");
    if (c.fock_cutoff && *c.fock_cutoff < 1) bad("sector.fock_cutoff", "must be >= 1");
    if (c.output_dir.empty()) bad("output.dir", "must not be empty");
    auto path = [&] {
        ParameterPath p{c.model, c.path_couplings, c.path_start, c.path_end, c.path_samples};
        return p;
    };
    switch (c.kind) {
        case JobKind::SpectrumScan:
            if (c.sectors.empty()) bad("sector.list", "at least one sector is required");
            if (c.levels < 1) bad("sector.levels", "must be >= 1");
            for (const auto& s : c.sectors) field("sector.list", [&] { enumerate_basis(c.model, s); });
            [[fallthrough]];
        case JobKind::PhaseScan:
            if (c.path_samples < 2) bad("path.samples", "must be >= 2");
            if (c.path_start == c.path_end) bad("path.end", "must differ from path.start");
            field("path.couplings", [&] { path().validate(); });
            break;
        case JobKind::PhaseDiagramGrid:
            if (!is_three_level(c.model.kind)) bad("model.kind", "phase_diagram_grid needs a 3-level model");
            if (c.grid_x.samples < 1) bad("grid.x.samples", "must be >= 1");
            if (c.grid_y.samples < 1) bad("grid.y.samples", "must be >= 1");
            if (c.grid_x.coupling == c.grid_y.coupling) bad("grid.y.coupling", "must differ from grid.x.coupling");
            if (is_full3(c.model.kind) && !c.fock_cutoff)
                bad("sector.fock_cutoff", "FULL models need an explicit cutoff for grids");
            break;
        case JobKind::ExponentStudy:
            if (c.sizes.size() < 4) bad("exponent.sizes", "needs at least 4 system sizes");
            for (int n : c.sizes)
                if (n < 1) bad("exponent.sizes", "sizes must be positive");
            if (c.model.kind == ModelKind::Dicke) {
                if (c.method == TransitionMethod::Projected) bad("path.method", "Dicke studies use QUANTUM or SAS");
            } else if (c.model.kind == ModelKind::VFull) {
                if (c.method != TransitionMethod::Sas) bad("path.method", "V studies use the SAS surface");
            } else {
                bad("model.kind", "exponent_study supports DICKE and V_FULL");
            }
            break;
        case JobKind::TriplePoint:
            if (c.model.kind != ModelKind::XiRwa) bad("model.kind", "triple_point needs XI_RWA");
            if (c.model.n_atoms < 2) bad("model.n_atoms", "triple_point needs N_A >= 2");
            break;
        case JobKind::ObservableTable:
            if (!is_two_level(c.model.kind)) bad("model.kind", "observable_table needs DICKE or TCM");
            if (c.xs.empty()) bad("observables.x", "at least one x value is required");
            for (double x : c.xs)
                if (!(x > 0)) bad("observables.x", "x values must be positive");
            break;
    }
}

}  // namespace cavity
