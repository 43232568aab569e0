#include "cavity/jobs.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cavity/errors.hpp"
#include "cavity/observables.hpp"
#include "cavity/phase.hpp"
#include "cavity/variational.hpp"

namespace cavity {

std::string format_number(double v) {
    if (!std::isfinite(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return format_number(*d);
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

}  // namespace

std::string render_csv(const Table& t) {
    std::string out = "#schema=" + t.schema + "\r\n";
    auto line = [&](const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + csv_field(f[i]);
        out += "\r\n";
    };
    line(t.columns);
    for (const auto& r : t.rows) {
        std::vector<std::string> f;
        for (const auto& c : r) f.push_back(cell_text(c));
        line(f);
    }
    return out;
}

std::string render_json(const Table& t) {
    nlohmann::json j;
    j["schema"] = t.schema;
    j["columns"] = t.columns;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : t.rows) {
        auto row = nlohmann::json::array();
        for (const auto& c : r) {
            if (auto d = std::get_if<double>(&c)) {
                // round-trip through the 12-digit text so CSV and JSON agree
                if (std::isfinite(*d))
                    row.push_back(std::stod(format_number(*d)));
                else
                    row.push_back(nullptr);
            } else if (auto i = std::get_if<long long>(&c)) {
                row.push_back(*i);
            } else {
                row.push_back(std::get<std::string>(c));
            }
        }
        j["rows"].push_back(std::move(row));
    }
    return j.dump(1) + "\n";
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

ParameterPath path_of(const JobConfig& c) {
    return ParameterPath{c.model, c.path_couplings, c.path_start, c.path_end, c.path_samples};
}

std::vector<Table> spectrum_job(const JobConfig& c) {
    auto scan = spectrum_scan(path_of(c), c.sectors, c.levels, Execution::Parallel, c.eigen_tol);
    Table t{"spectrum", "cavity.spectrum_scan.v1", {"tau", "sector", "curve", "energy"}, {}};
    for (std::size_t s = 0; s < scan.sectors.size(); ++s)
        for (std::size_t k = 0; k < scan.energies[s].size(); ++k)
            for (std::size_t i = 0; i < scan.taus.size(); ++i)
                t.rows.push_back({scan.taus[i], to_string(scan.sectors[s]), (long long)k, scan.energies[s][k][i]});
    return {t};
}

std::vector<Table> phase_scan_job(const JobConfig& c) {
    TransitionOptions o;
    o.ground.fock_cutoff = c.fock_cutoff;
    o.ground.tol = std::min(c.eigen_tol, 1e-10);
    o.seed = c.seed;
    auto path = path_of(c);
    auto rep = locate_transitions(path, c.method, o);
    Table t{"transitions", "cavity.transitions.v1", {"method", "tau_c"}, {}};
    for (const auto& a : path.couplings) t.columns.push_back(to_string(a.target));
    for (auto col : {"order", "chi_peak", "delta_label", "ambiguous"}) t.columns.push_back(col);
    for (const auto& tr : rep.transitions) {
        std::vector<Cell> row{to_string(c.method), tr.tau_c};
        auto s = path.at(tr.tau_c);
        for (const auto& a : path.couplings) row.push_back(get_coupling(s, a.target));
        row.push_back(to_string(tr.order));
        row.push_back(tr.chi_peak);
        row.push_back(tr.delta_label ? Cell((long long)*tr.delta_label) : Cell(std::string()));
        row.push_back((long long)tr.ambiguous);
        t.rows.push_back(std::move(row));
    }
    return {t};
}

Coupling separatrix_abscissa(ModelKind k) {
    if (k == ModelKind::VRwa || k == ModelKind::VFull) return Coupling::Mu13;
    return Coupling::Mu23;
}

Coupling separatrix_ordinate_coupling(ModelKind k) {
    if (k == ModelKind::LambdaRwa || k == ModelKind::LambdaFull) return Coupling::Mu13;
    return Coupling::Mu12;
}

std::vector<Table> grid_job(const JobConfig& c) {
    GridOptions o;
    o.ground.fock_cutoff = c.fock_cutoff;
    o.ground.tol = std::min(c.eigen_tol, 1e-10);
    auto grid = compute_phase_grid(c.model, c.grid_x, c.grid_y, o);
    const bool rwa = is_rwa3(c.model.kind);
    Table t{"grid", "cavity.phase_grid.v1",
            {to_string(c.grid_x.coupling), to_string(c.grid_y.coupling), "energy_per_particle", rwa ? "M" : "parity", "chi"},
            {}};
    for (const auto& row : grid.rows)
        for (const auto& cell : row) t.rows.push_back({cell.x, cell.y, cell.energy, (long long)cell.label, cell.chi});

    const Coupling ab = separatrix_abscissa(c.model.kind), ord = separatrix_ordinate_coupling(c.model.kind);
    double lo = 0, hi = 2;
    for (const GridAxis* ax : {&c.grid_x, &c.grid_y})
        if (ax->coupling == ab) lo = std::min(ax->start, ax->end), hi = std::max(ax->start, ax->end);
    Table s{"separatrix", "cavity.separatrix.v1", {to_string(ab), to_string(ord)}, {}};
    for (auto [a, o2] : separatrix_polyline(c.model, lo, hi, 401)) s.rows.push_back({a, o2});
    return {t, s};
}

std::vector<Table> exponent_job(const JobConfig& c) {
    std::vector<std::pair<double, double>> samples;
    Table t{"critical_couplings", "cavity.critical_couplings.v1", {"n_atoms", "coupling_c"}, {}};
    for (int n : c.sizes) {
        double cc;
        if (c.model.kind == ModelKind::Dicke)
            cc = c.method == TransitionMethod::Quantum ? dicke_quantum_critical(n, c.model.atomic_freq).coupling
                                                       : dicke_sas_critical(n, c.model.atomic_freq);
        else
            cc = v_sas_critical(n);
        samples.emplace_back(n, cc);
        t.rows.push_back({(long long)n, cc});
    }
    auto fit = fit_critical_exponent(samples, c.offset);
    Table f{"fit",
            "cavity.exponent_fit.v1",
            {"offset", "exponent", "log_prefactor", "r_squared", "ci_low", "ci_high"},
            {{c.offset, fit.exponent, fit.log_prefactor, fit.r_squared, fit.confidence_interval.first,
              fit.confidence_interval.second}}};
    return {t, f};
}

std::vector<Table> triple_point_job(const JobConfig& c) {
    const int n = c.model.n_atoms;
    const ModelSpec spec = triple_point_spec(n);
    Table t{"triple_point",
            "cavity.triple_point.v1",
            {"M", "energy_per_particle", "residual", "numeric_energy_per_particle", "amplitude_deviation"},
            {}};
    Table st{"triple_point_states", "cavity.triple_point_states.v1", {"M", "photons", "q", "r", "printed_amplitude", "amplitude"}, {}};
    for (int m = 0; m <= 2; ++m) {
        auto tp = triple_point_ground_state(n, m);
        auto h = assemble_hamiltonian(spec, tp.basis);
        Eigen::VectorXcd hv = apply(h, tp.state.amplitudes, Execution::Serial);
        double e = std::real(tp.state.amplitudes.dot(hv));
        double res = (hv - e * tp.state.amplitudes).norm();
        auto num = lowest_eigenpairs(h, 1, c.eigen_tol);
        double dev = (num.states[0].amplitudes - tp.state.amplitudes).cwiseAbs().maxCoeff();
        t.rows.push_back({(long long)m, e / n, res, num.energies[0] / n, dev});
        for (const auto& [l, a] : tp.printed)
            st.rows.push_back({(long long)m, (long long)l.photons, (long long)l.q(), (long long)l.r(), a,
                               std::real(tp.state.amplitudes[*tp.basis.find(l)])});
    }
    return {t, st};
}

std::vector<Table> observable_job(const JobConfig& c) {
    const bool tcm = c.model.kind == ModelKind::TCM;
    const double gc = 0.5 * std::sqrt(c.model.atomic_freq * c.model.field_freq);
    const int n = c.model.n_atoms;
    Table t{"observables",
            "cavity.observables.v1",
            {"x", "family", "observable", "closed_form", "numeric", "abs_diff"},
            {}};
    const StateFamily fams[] = {StateFamily::Coherent, StateFamily::SasPlus, StateFamily::SasMinus};
    const ObservableId ids[] = {ObservableId::Q,      ObservableId::P,      ObservableId::Jx,        ObservableId::Jy,
                                ObservableId::Jz,     ObservableId::NPh,    ObservableId::Lambda,    ObservableId::VarQ,
                                ObservableId::VarP,   ObservableId::VarJx,  ObservableId::VarJy,     ObservableId::VarJz,
                                ObservableId::VarNPh, ObservableId::VarLambda, ObservableId::JzNPhCorr, ObservableId::JxQCorr};
    for (double x : c.xs) {
        ModelSpec spec = ModelSpec::dicke(n, c.model.atomic_freq, x * gc);
        spec.field_freq = c.model.field_freq;
        auto cp = dicke_critical_point(spec);
        const double a2 = 0.5 * cp.q * cp.q;
        const int cutoff = int(std::ceil(a2 + 12 * std::sqrt(a2) + 30));
        for (auto fam : fams) {
            std::optional<StateVector> psi;
            std::optional<Basis> basis;
            if (!tcm) {
                basis.emplace(enumerate_basis(spec, SectorSpec::full(cutoff)));
                Family f = fam == StateFamily::Coherent  ? Family::DickeCoh
                           : fam == StateFamily::SasPlus ? Family::DickeSasPlus
                                                         : Family::DickeSasMinus;
                try {
                    psi = embed_variational_state(VariationalPoint{f, spec, cp, 0.0}, *basis);
                } catch (const ComputeError&) {
                    // the odd SAS vanishes in the normal region
                }
            }
            for (auto id : ids) {
                double closed = std::nan(""), numeric = std::nan("");
                try {
                    closed = closed_form_observable(fam, id, x, gc, n, tcm);
                } catch (const ComputeError&) {
                }
                if (psi) numeric = numeric_observable(*psi, *basis, id);
                t.rows.push_back({x, to_string(fam), to_string(id), closed, numeric, std::abs(closed - numeric)});
            }
        }
    }
    return {t};
}

}  // namespace

std::vector<Table> compute_job(const JobConfig& cfg) {
    validate_config(cfg);
    try {
        switch (cfg.kind) {
            case JobKind::SpectrumScan: return spectrum_job(cfg);
            case JobKind::PhaseScan: return phase_scan_job(cfg);
            case JobKind::PhaseDiagramGrid: return grid_job(cfg);
            case JobKind::ExponentStudy: return exponent_job(cfg);
            case JobKind::TriplePoint: return triple_point_job(cfg);
            case JobKind::ObservableTable: return observable_job(cfg);
        }
    } catch (const ComputeError& e) {
        throw ComputeError("job " + to_string(cfg.kind) + ": " + e.what());
    }
    return {};
}

Manifest run_job(const JobConfig& cfg, const std::optional<std::string>& out_dir) {
    auto tables = compute_job(cfg);
    Manifest m{to_string(cfg.kind), out_dir.value_or(cfg.output_dir), {}};
    std::filesystem::create_directories(m.directory);
    auto write = [&](const std::string& name, const std::string& bytes) {
        std::ofstream out(std::filesystem::path(m.directory) / name, std::ios::binary);
        if (!out) throw ComputeError("cannot write " + name);
        out << bytes;
        m.files.push_back({name, fnv1a64(bytes), bytes.size()});
    };
    for (const auto& t : tables) {
        if (cfg.format == OutputFormat::Csv)
            write(t.name + ".csv", render_csv(t));
        else
            write(t.name + ".json", render_json(t));
    }
    write("config.txt", serialize_config(cfg));

    nlohmann::json j;
    j["schema"] = "cavity.manifest.v1";
    j["job"] = m.job;
    j["files"] = nlohmann::json::array();
    for (const auto& f : m.files) {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)f.hash);
        j["files"].push_back({{"file", f.file}, {"fnv1a64", hex}, {"bytes", f.bytes}});
    }
    std::ofstream(std::filesystem::path(m.directory) / "manifest.json") << j.dump(1) << "\n";
    return m;
}

}  // namespace cavity
