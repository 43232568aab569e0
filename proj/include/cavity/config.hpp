#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cavity/model.hpp"
#include "cavity/observables.hpp"
#include "cavity/phase.hpp"
#include "cavity/spectra.hpp"

namespace cavity {

enum class JobKind { SpectrumScan, PhaseScan, PhaseDiagramGrid, ExponentStudy, TriplePoint, ObservableTable };
enum class OutputFormat { Csv, Json };

std::string to_string(JobKind k);
JobKind job_kind_from_string(const std::string& s);
std::string to_string(OutputFormat f);

// Flat `section.key = value` configuration.  Every field has a default so that
// a config only needs the keys relevant to its job kind.
struct JobConfig {
    JobKind kind = JobKind::SpectrumScan;
    std::uint64_t seed = 0;
    ModelSpec model = ModelSpec::dicke(10, 1.0, 0.5);

    std::vector<SectorSpec> sectors;  // spectrum_scan
    int levels = 1;
    std::optional<int> fock_cutoff;

    std::vector<AffineCoupling> path_couplings{{Coupling::Gamma, 0.0, 1.0}};
    double path_start = 0, path_end = 1;
    int path_samples = 11;
    TransitionMethod method = TransitionMethod::Quantum;

    GridAxis grid_x{Coupling::Mu12, 0, 1, 11};
    GridAxis grid_y{Coupling::Mu23, 0, 1, 11};

    std::vector<int> sizes;  // exponent_study
    double offset = 0.5;

    std::vector<double> xs{0.5, 1.0, 2.0};  // observable_table: x = gamma / gamma_c

    double energy_tol = 1e-9;
    double eigen_tol = 1e-10;

    std::string output_dir = "out";
    OutputFormat format = OutputFormat::Csv;

    bool operator==(const JobConfig&) const;
};

JobConfig parse_config(const std::string& text);
JobConfig load_config(const std::string& path);
std::string serialize_config(const JobConfig& cfg);
// Throws ValidationError naming the offending field.
void validate_config(const JobConfig& cfg);

std::string to_string(const SectorSpec& s);
SectorSpec sector_from_string(const std::string& s);

}  // namespace cavity
