#pragma once

#include <filesystem>
#include <map>
#include <optional>

#include "cib/scheme.hpp"
#include "cib/verification.hpp"

namespace cib {

/// Run configuration, parsed from "key = value" text. Unknown keys are
/// rejected by name; presets fill defaults before explicit keys override.
struct Config {
    double a = 4.0;
    double gamma = 0.4;
    int lambda0 = 5;
    int n = 512;
    int n_t = 257;
    double theta0_sin = 1.0;
    double theta0_cos = 0.0;
    std::vector<double> energy_coeffs = {79.0, 0.5};
    std::string mode = "toy";  // toy | strict
    std::string out_dir = "runs/out";
    std::vector<double> lambdas = {5.0, 50.0};
    int store_n = 0;         // 0: derived
    int theta_store_n = 0;
    int flow_n = 96;
    int kcut = 0;
    int crosscheck_stride = 1;
    int dump_stride = 1;
    int stages = 1;
    bool deterministic = false;

    void validate() const;  // throws ConfigError naming the offending key
};

Config parse_config_text(const std::string& text);
Config load_config(const std::filesystem::path& path);
std::string config_to_text(const Config& c);
void apply_preset(Config& c, const std::string& name);

// ---------------------------------------------------------------- dumps

/// Self-describing binary container, one record per time slice:
/// magic "CIB2" | version u32 | N u32 | n_components u32 | time f64 |
/// row-major little-endian f64 values per component.
void dump_series(const std::filesystem::path& file,
                 const TimeSeries<ScalarField>& s, int stride = 1);
void dump_series(const std::filesystem::path& file,
                 const TimeSeries<VectorField2>& s, int stride = 1);
void dump_series(const std::filesystem::path& file,
                 const TimeSeries<SymTraceFreeTensor2Field>& s,
                 int stride = 1);

struct LoadedSeries {
    int n_components = 0;
    TimeGrid tg{2};
    std::vector<double> times;
    std::vector<std::vector<ScalarField>> components;  // [slice][comp]
};
LoadedSeries load_series(const std::filesystem::path& file);

TimeSeries<ScalarField> as_scalar_series(const LoadedSeries& ls);
TimeSeries<VectorField2> as_vector_series(const LoadedSeries& ls);
TimeSeries<SymTraceFreeTensor2Field> as_tensor_series(const LoadedSeries& ls);

/// Text manifest naming a series dump: n_t, times, field kind.
void write_series_manifest(const std::filesystem::path& file,
                           const std::string& kind, const TimeGrid& tg,
                           int stride);

// ------------------------------------------------------------------ csv

void write_csv_field(const std::filesystem::path& file, const ScalarField& f);
void write_csv_field(const std::filesystem::path& file, const VectorField2& f);
void write_csv_stress_table(const std::filesystem::path& file,
                            const std::vector<TermReport>& terms);
void write_csv_inequalities(const std::filesystem::path& file,
                            const ParamReport& rep);
void write_csv_estimates(const std::filesystem::path& file,
                         const std::vector<EstimateRow>& rows);
void write_csv_gap(const std::filesystem::path& file,
                   const EnergyGapReport& rep);
void write_csv_probe(const std::filesystem::path& file, const DecayTable& t);
void write_csv_holder(const std::filesystem::path& file,
                      const std::vector<HolderRow>& rows);

// ------------------------------------------------------------- manifest

std::uint64_t fnv1a_file(const std::filesystem::path& file);

/// Run manifest: key = value pairs plus a hashed file registry; every
/// output of a run is listed here.
struct RunManifest {
    std::map<std::string, std::string> kv;
    std::vector<std::pair<std::string, std::uint64_t>> files;  // name, hash

    void set(const std::string& k, double v);
    void set(const std::string& k, const std::string& v);
    void add_file(const std::filesystem::path& dir, const std::string& name);
};
void write_manifest(const std::filesystem::path& file, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& file);

/// "" when every registered file matches its hash, else a description of
/// the first mismatch.
std::string verify_manifest_hashes(const std::filesystem::path& dir,
                                   const RunManifest& m);

}  // namespace cib
