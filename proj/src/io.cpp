#include "cib/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace cib {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw ConfigError("config: bad number in key '" + key + "'");
        }
    }
    if (out.empty()) throw ConfigError("config: empty list for key '" + key + "'");
    return out;
}

double parse_num(const std::string& s, const std::string& key) {
    try {
        return std::stod(trim(s));
    } catch (...) {
        throw ConfigError("config: bad number for key '" + key + "'");
    }
}

}  // namespace

void Config::validate() const {
    if (a <= 1.0) throw ConfigError("config: key 'a' must exceed 1");
    if (gamma <= 0.0) throw ConfigError("config: key 'gamma' must be positive");
    if (lambda0 < 1) throw ConfigError("config: key 'lambda0' must be >= 1");
    if (n < 8 || n % 2) throw ConfigError("config: key 'N' must be even, >= 8");
    if (n_t < 5) throw ConfigError("config: key 'n_t' must be >= 5");
    if (energy_coeffs.empty())
        throw ConfigError("config: key 'energy_coeffs' is required");
    if (mode != "toy" && mode != "strict")
        throw ConfigError("config: key 'mode' must be toy or strict");
    for (double l : lambdas) {
        if (l < 1 || std::fmod(l, 5.0) != 0.0)
            throw ConfigError(
                "config: key 'lambdas' entries must be positive multiples of 5");
    }
    if (stages < 0) throw ConfigError("config: key 'stages' must be >= 0");
}

void apply_preset(Config& c, const std::string& name) {
    if (name == "desk") {
        c = Config{};  // the defaults are the desk preset
    } else if (name == "mini") {
        c = Config{};
        c.n = 256;
        c.n_t = 65;
        c.lambdas = {5.0, 15.0};
        c.store_n = 192;
        c.theta_store_n = 192;
        c.flow_n = 64;
        c.energy_coeffs = {79.0, 0.5};
    } else {
        throw ConfigError("config: unknown preset '" + name + "'");
    }
}

Config parse_config_text(const std::string& text) {
    Config c;
    std::stringstream ss(text);
    std::string line;
    bool saw_energy = false;
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected 'key = value', got '" + line +
                              "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "preset") apply_preset(c, val);
        else if (key == "a") c.a = parse_num(val, key);
        else if (key == "gamma") c.gamma = parse_num(val, key);
        else if (key == "lambda0") c.lambda0 = int(parse_num(val, key));
        else if (key == "N") c.n = int(parse_num(val, key));
        else if (key == "n_t") c.n_t = int(parse_num(val, key));
        else if (key == "theta0_sin") c.theta0_sin = parse_num(val, key);
        else if (key == "theta0_cos") c.theta0_cos = parse_num(val, key);
        else if (key == "energy_coeffs") {
            c.energy_coeffs = parse_list(val, key);
            saw_energy = true;
        } else if (key == "mode") c.mode = val;
        else if (key == "out_dir") c.out_dir = val;
        else if (key == "lambdas") c.lambdas = parse_list(val, key);
        else if (key == "store_n") c.store_n = int(parse_num(val, key));
        else if (key == "theta_store_n")
            c.theta_store_n = int(parse_num(val, key));
        else if (key == "flow_n") c.flow_n = int(parse_num(val, key));
        else if (key == "kcut") c.kcut = int(parse_num(val, key));
        else if (key == "crosscheck_stride")
            c.crosscheck_stride = int(parse_num(val, key));
        else if (key == "dump_stride") c.dump_stride = int(parse_num(val, key));
        else if (key == "stages") c.stages = int(parse_num(val, key));
        else if (key == "deterministic")
            c.deterministic = val == "1" || val == "true";
        else
            throw ConfigError("config: unknown key '" + key + "'");
    }
    (void)saw_energy;
    c.validate();
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_to_text(const Config& c) {
    std::ostringstream os;
    os.precision(17);
    os << "a = " << c.a << "\n";
    os << "gamma = " << c.gamma << "\n";
    os << "lambda0 = " << c.lambda0 << "\n";
    os << "N = " << c.n << "\n";
    os << "n_t = " << c.n_t << "\n";
    os << "theta0_sin = " << c.theta0_sin << "\n";
    os << "theta0_cos = " << c.theta0_cos << "\n";
    os << "energy_coeffs = ";
    for (std::size_t i = 0; i < c.energy_coeffs.size(); ++i)
        os << (i ? ", " : "") << c.energy_coeffs[i];
    os << "\n";
    os << "mode = " << c.mode << "\n";
    os << "out_dir = " << c.out_dir << "\n";
    os << "lambdas = ";
    for (std::size_t i = 0; i < c.lambdas.size(); ++i)
        os << (i ? ", " : "") << c.lambdas[i];
    os << "\n";
    os << "store_n = " << c.store_n << "\n";
    os << "theta_store_n = " << c.theta_store_n << "\n";
    os << "flow_n = " << c.flow_n << "\n";
    os << "kcut = " << c.kcut << "\n";
    os << "crosscheck_stride = " << c.crosscheck_stride << "\n";
    os << "dump_stride = " << c.dump_stride << "\n";
    os << "stages = " << c.stages << "\n";
    os << "deterministic = " << (c.deterministic ? 1 : 0) << "\n";
    return os.str();
}

// ---------------------------------------------------------------- dumps

namespace {

void write_record(std::ofstream& out, double t,
                  const std::vector<const ScalarField*>& comps) {
    const char magic[4] = {'C', 'I', 'B', '2'};
    out.write(magic, 4);
    const std::uint32_t version = 1;
    const std::uint32_t n = std::uint32_t(comps[0]->grid().n);
    const std::uint32_t nc = std::uint32_t(comps.size());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&nc), 4);
    out.write(reinterpret_cast<const char*>(&t), 8);
    for (const auto* c : comps)
        out.write(reinterpret_cast<const char*>(c->values().data()),
                  std::streamsize(c->values().size() * 8));
}

template <class Series, class GetComps>
void dump_impl(const std::filesystem::path& file, const Series& s, int stride,
               const GetComps& get) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("dump_series: cannot open " +
                                       file.string());
    for (int j = 0; j < s.size(); j += stride)
        write_record(out, s.tg.time(j), get(s.at(j)));
    const int last = s.size() - 1;
    if (last % stride != 0) write_record(out, s.tg.time(last), get(s.at(last)));
}

}  // namespace

void dump_series(const std::filesystem::path& file,
                 const TimeSeries<ScalarField>& s, int stride) {
    dump_impl(file, s, stride, [](const ScalarField& f) {
        return std::vector<const ScalarField*>{&f};
    });
}
void dump_series(const std::filesystem::path& file,
                 const TimeSeries<VectorField2>& s, int stride) {
    dump_impl(file, s, stride, [](const VectorField2& f) {
        return std::vector<const ScalarField*>{&f.u1, &f.u2};
    });
}
void dump_series(const std::filesystem::path& file,
                 const TimeSeries<SymTraceFreeTensor2Field>& s, int stride) {
    dump_impl(file, s, stride, [](const SymTraceFreeTensor2Field& f) {
        return std::vector<const ScalarField*>{&f.t11, &f.t12};
    });
}

LoadedSeries load_series(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("load_series: cannot open " +
                                      file.string());
    LoadedSeries ls;
    while (true) {
        char magic[4];
        in.read(magic, 4);
        if (!in) break;
        if (std::memcmp(magic, "CIB2", 4) != 0)
            throw std::runtime_error("load_series: bad magic in " +
                                     file.string());
        std::uint32_t version, n, nc;
        double t;
        in.read(reinterpret_cast<char*>(&version), 4);
        in.read(reinterpret_cast<char*>(&n), 4);
        in.read(reinterpret_cast<char*>(&nc), 4);
        in.read(reinterpret_cast<char*>(&t), 8);
        if (!in || version != 1 || n < 8 || nc < 1 || nc > 4)
            throw std::runtime_error("load_series: bad header in " +
                                     file.string());
        std::vector<ScalarField> comps;
        for (std::uint32_t c = 0; c < nc; ++c) {
            ScalarField f{Grid(int(n))};
            in.read(reinterpret_cast<char*>(f.mutable_values().data()),
                    std::streamsize(f.values().size() * 8));
            if (!in)
                throw std::runtime_error("load_series: truncated record in " +
                                         file.string());
            comps.push_back(std::move(f));
        }
        ls.n_components = int(nc);
        ls.times.push_back(t);
        ls.components.push_back(std::move(comps));
    }
    if (ls.times.size() < 2)
        throw std::runtime_error("load_series: fewer than two records");
    ls.tg = TimeGrid(int(ls.times.size()));
    return ls;
}

TimeSeries<ScalarField> as_scalar_series(const LoadedSeries& ls) {
    TimeSeries<ScalarField> out(ls.tg);
    for (const auto& c : ls.components) out.slices.push_back(c.at(0));
    return out;
}
TimeSeries<VectorField2> as_vector_series(const LoadedSeries& ls) {
    TimeSeries<VectorField2> out(ls.tg);
    for (const auto& c : ls.components)
        out.slices.emplace_back(c.at(0), c.at(1));
    return out;
}
TimeSeries<SymTraceFreeTensor2Field> as_tensor_series(const LoadedSeries& ls) {
    TimeSeries<SymTraceFreeTensor2Field> out(ls.tg);
    for (const auto& c : ls.components)
        out.slices.emplace_back(c.at(0), c.at(1));
    return out;
}

void write_series_manifest(const std::filesystem::path& file,
                           const std::string& kind, const TimeGrid& tg,
                           int stride) {
    std::ofstream out(file);
    out.precision(17);
    std::vector<double> times;
    for (int j = 0; j < tg.n_t; j += stride) times.push_back(tg.time(j));
    if ((tg.n_t - 1) % stride != 0) times.push_back(tg.time(tg.n_t - 1));
    out << "kind = " << kind << "\n";
    out << "n_t = " << times.size() << "\n";
    out << "times =";
    for (double t : times) out << " " << t;
    out << "\n";
}

// ------------------------------------------------------------------ csv

void write_csv_field(const std::filesystem::path& file, const ScalarField& f) {
    std::ofstream out(file);
    out.precision(17);
    out << "x1,x2,value\n";
    const Grid g = f.grid();
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix)
            out << g.x1(ix) << ',' << g.x2(iy) << ','
                << f.at(ix, iy) << '\n';
}

void write_csv_field(const std::filesystem::path& file, const VectorField2& f) {
    std::ofstream out(file);
    out.precision(17);
    out << "x1,x2,v1,v2\n";
    const Grid g = f.grid();
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix)
            out << g.x1(ix) << ',' << g.x2(iy) << ',' << f.u1.at(ix, iy) << ','
                << f.u2.at(ix, iy) << '\n';
}

void write_csv_stress_table(const std::filesystem::path& file,
                            const std::vector<TermReport>& terms) {
    std::ofstream out(file);
    out.precision(12);
    out << "term,sup0,sup1,bound_shape,ratio,max_trace\n";
    for (const auto& t : terms)
        out << t.name << ',' << t.sup0 << ',' << t.sup1 << ',' << t.bound
            << ',' << t.ratio << ',' << t.max_trace << '\n';
}

void write_csv_inequalities(const std::filesystem::path& file,
                            const ParamReport& rep) {
    std::ofstream out(file);
    out.precision(12);
    out << "inequality,log10_lhs,log10_rhs,slack_log10,ok\n";
    for (const auto& r : rep.rows)
        out << '"' << r.name << '"' << ',' << r.log10_lhs << ',' << r.log10_rhs
            << ',' << r.slack_log10 << ',' << (r.ok ? 1 : 0) << '\n';
}

void write_csv_estimates(const std::filesystem::path& file,
                         const std::vector<EstimateRow>& rows) {
    std::ofstream out(file);
    out.precision(12);
    out << "estimate,lhs,rhs,ratio,comparable\n";
    for (const auto& r : rows)
        out << '"' << r.name << '"' << ',' << r.lhs << ',' << r.rhs << ','
            << r.ratio << ',' << (r.comparable ? 1 : 0) << '\n';
}

void write_csv_gap(const std::filesystem::path& file,
                   const EnergyGapReport& rep) {
    std::ofstream out(file);
    out.precision(12);
    out << "t,gap\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        out << rep.times[i] << ',' << rep.gap[i] << '\n';
}

void write_csv_probe(const std::filesystem::path& file, const DecayTable& t) {
    std::ofstream out(file);
    out.precision(12);
    out << "lambda,measured_norm,fitted_slope\n";
    for (std::size_t i = 0; i < t.lambdas.size(); ++i)
        out << t.lambdas[i] << ',' << t.values[i] << ',' << t.fitted_slope
            << '\n';
}

void write_csv_holder(const std::filesystem::path& file,
                      const std::vector<HolderRow>& rows) {
    std::ofstream out(file);
    out.precision(12);
    out << "q,alpha,spatial_increment,temporal_increment,interp_bound,"
           "schedule_bound\n";
    for (const auto& r : rows)
        out << r.q << ',' << r.alpha << ',' << r.spatial_increment << ','
            << r.temporal_increment << ',' << r.interp_bound << ','
            << r.schedule_bound << '\n';
}

// ------------------------------------------------------------- manifest

std::uint64_t fnv1a_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("fnv1a_file: cannot open " +
                                      file.string());
    std::uint64_t h = 14695981039346656037ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= std::uint8_t(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

void RunManifest::set(const std::string& k, double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    kv[k] = os.str();
}
void RunManifest::set(const std::string& k, const std::string& v) { kv[k] = v; }

void RunManifest::add_file(const std::filesystem::path& dir,
                           const std::string& name) {
    files.emplace_back(name, fnv1a_file(dir / name));
}

void write_manifest(const std::filesystem::path& file, const RunManifest& m) {
    std::ofstream out(file);
    for (const auto& [k, v] : m.kv) out << k << " = " << v << "\n";
    for (const auto& [name, hash] : m.files)
        out << "file = " << name << " " << std::hex << hash << std::dec << "\n";
}

RunManifest read_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("read_manifest: cannot open " +
                                      file.string());
    RunManifest m;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "file") {
            std::stringstream ss(val);
            std::string name, hash;
            ss >> name >> hash;
            m.files.emplace_back(name, std::stoull(hash, nullptr, 16));
        } else {
            m.kv[key] = val;
        }
    }
    return m;
}

std::string verify_manifest_hashes(const std::filesystem::path& dir,
                                   const RunManifest& m) {
    for (const auto& [name, hash] : m.files) {
        const auto path = dir / name;
        if (!std::filesystem::exists(path))
            return "missing file: " + name;
        const std::uint64_t actual = fnv1a_file(path);
        if (actual != hash) {
            std::ostringstream os;
            os << "checksum mismatch for " << name << ": manifest " << std::hex
               << hash << ", actual " << actual;
            return os.str();
        }
    }
    return "";
}

}  // namespace cib
