#include "permlim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "permlim/errors.hpp"

namespace permlim {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

class Reader {
public:
    Reader(const IniFile& ini, std::string section) : ini_(ini), section_(std::move(section)) {}

    // Rejects keys that were never read.
    void done() const {
        if (!ini_.has_section(section_)) return;
        for (const auto& [key, value] : ini_.section(section_))
            if (!seen_.count(key)) fail(key, "unknown key");
    }

    std::optional<std::string> raw(const std::string& key) {
        seen_.insert(key);
        return ini_.get(section_, key);
    }

    std::string text(const std::string& key, const std::string& fallback) { return raw(key).value_or(fallback); }

    std::string required(const std::string& key) {
        auto v = raw(key);
        if (!v || v->empty()) fail(key, "required key is missing");
        return *v;
    }

    double real(const std::string& key, double fallback) {
        auto v = raw(key);
        return v ? parse_real(key, *v) : fallback;
    }

    long integer(const std::string& key, long fallback) {
        auto v = raw(key);
        return v ? parse_int(key, *v) : fallback;
    }

    bool flag(const std::string& key, bool fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        auto s = lower(*v);
        if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
        if (s == "false" || s == "no" || s == "0" || s == "off") return false;
        fail(key, "expected a boolean, got '" + *v + "'");
    }

    std::vector<double> reals(const std::string& key) {
        std::vector<double> out;
        if (auto v = raw(key))
            for (const auto& item : split_list(*v)) out.push_back(parse_real(key, item));
        return out;
    }

    std::vector<int> integers(const std::string& key) {
        std::vector<int> out;
        if (auto v = raw(key))
            for (const auto& item : split_list(*v)) out.push_back(static_cast<int>(parse_int(key, item)));
        return out;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(ini_.origin() + ": [" + section_ + "] " + key + ": " + msg);
    }

private:
    double parse_real(const std::string& key, const std::string& v) const {
        std::istringstream ss(v);
        double d;
        if (!(ss >> d) || !(ss >> std::ws).eof()) fail(key, "expected a number, got '" + v + "'");
        return d;
    }

    long parse_int(const std::string& key, const std::string& v) const {
        long out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
        return out;
    }

    const IniFile& ini_;
    std::string section_;
    std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

IniFile IniFile::parse(std::istream& in, const std::string& origin) {
    IniFile ini;
    ini.origin_ = origin;
    std::string current;
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        auto where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            current = lower(trim(line.substr(1, line.size() - 2)));
            if (current.empty()) throw ConfigError(where + ": empty section name");
            if (ini.data_.count(current)) throw ConfigError(where + ": duplicate section [" + current + "]");
            ini.data_[current];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        if (current.empty()) throw ConfigError(where + ": key outside of any section");
        auto key = lower(trim(line.substr(0, eq)));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (!ini.data_[current].emplace(key, value).second)
            throw ConfigError(where + ": duplicate key '" + key + "' in [" + current + "]");
    }
    return ini;
}

IniFile IniFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
}

bool IniFile::has_section(const std::string& section) const { return data_.count(section) > 0; }

std::optional<std::string> IniFile::get(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    if (s == data_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

const std::map<std::string, std::string>& IniFile::section(const std::string& section) const {
    return data_.at(section);
}

std::vector<std::string> IniFile::sections() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : data_) out.push_back(name);
    return out;
}

RunConfig read_run_config(const IniFile& ini, const std::filesystem::path& base_dir) {
    static const std::set<std::string> known{"cost", "kernel", "bridge", "study", "output"};
    for (const auto& s : ini.sections())
        if (!known.count(s)) throw ConfigError(ini.origin() + ": unknown section [" + s + "]");

    RunConfig cfg;
    if (ini.has_section("cost")) {
        Reader r(ini, "cost");
        CostBlock c;
        c.family = lower(r.required("family"));
        c.params = r.reals("params");
        c.table = resolve(base_dir, r.text("table", ""));
        c.expression = r.text("expression", "");
        auto smooth = lower(r.text("smoothness", "c2"));
        if (smooth != "c2" && smooth != "c0") r.fail("smoothness", "expected C2 or C0");
        c.smoothness = smooth == "c2" ? Smoothness::C2 : Smoothness::C0;
        r.done();
        cfg.cost = std::move(c);
    }
    if (ini.has_section("kernel")) {
        Reader r(ini, "kernel");
        KernelBlock k;
        k.kind = lower(r.required("kind"));
        k.epsilon = r.real("epsilon", 0.5);
        k.table = resolve(base_dir, r.text("table", ""));
        r.done();
        cfg.kernel = std::move(k);
    }
    {
        Reader r(ini, "bridge");
        auto& b = cfg.bridge;
        b.m = static_cast<int>(r.integer("m", b.m));
        b.tol = r.real("tol", b.tol);
        b.max_iter = static_cast<int>(r.integer("max_iter", b.max_iter));
        b.damping = r.real("damping", b.damping);
        b.exponent_bound = r.real("exponent_bound", b.exponent_bound);
        if (b.m < 8) r.fail("m", "must be >= 8");
        if (!(b.tol > 0)) r.fail("tol", "must be positive");
        if (b.max_iter < 1) r.fail("max_iter", "must be >= 1");
        if (!(b.damping > 0 && b.damping <= 1)) r.fail("damping", "must lie in (0, 1]");
        r.done();
    }
    {
        Reader r(ini, "study");
        auto& s = cfg.study;
        s.n_list = r.integers("n_list");
        s.permanent_cap = static_cast<int>(r.integer("permanent_cap", s.permanent_cap));
        auto method = lower(r.text("permanent_method", "glynn"));
        if (method == "glynn") s.permanent_method = PermanentMethod::glynn;
        else if (method == "ryser") s.permanent_method = PermanentMethod::ryser;
        else r.fail("permanent_method", "expected glynn or ryser");
        s.balance_tol = r.real("balance_tol", s.balance_tol);
        s.balance_max_iter = static_cast<int>(r.integer("balance_max_iter", s.balance_max_iter));
        s.nystrom_m = static_cast<int>(r.integer("nystrom_m", s.nystrom_m));
        s.eig_cutoff = r.real("eig_cutoff", s.eig_cutoff);
        s.refinement_tol = r.real("refinement_tol", s.refinement_tol);
        long workers = r.integer("workers", s.workers);
        if (workers < 1) r.fail("workers", "must be >= 1");
        s.workers = static_cast<unsigned>(workers);
        s.validate_grid = static_cast<int>(r.integer("validate_grid", s.validate_grid));
        s.validate_tol = r.real("validate_tol", s.validate_tol);
        for (std::size_t i = 0; i < s.n_list.size(); ++i) {
            if (s.n_list[i] < 1) r.fail("n_list", "entries must be positive");
            if (i && s.n_list[i] <= s.n_list[i - 1]) r.fail("n_list", "must be strictly increasing");
        }
        if (s.nystrom_m < 32) r.fail("nystrom_m", "must be >= 32");
        if (!(s.balance_tol > 0)) r.fail("balance_tol", "must be positive");
        if (s.validate_grid < 2) r.fail("validate_grid", "must be >= 2");
        r.done();
    }
    {
        Reader r(ini, "output");
        auto& o = cfg.output;
        o.csv_path = resolve(base_dir, r.text("csv_path", ""));
        o.eigen_dump = r.flag("eigen_dump", false);
        o.eigen_dump_path = resolve(base_dir, r.text("eigen_dump_path", ""));
        if (o.eigen_dump && o.eigen_dump_path.empty())
            o.eigen_dump_path = o.csv_path.empty() ? std::filesystem::path("eigenvalues.txt")
                                                   : std::filesystem::path(o.csv_path.string() + ".eigen");
        r.done();
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return read_run_config(IniFile::load(path), path.parent_path());
}

CostFunction make_cost(const CostBlock& block) {
    auto param = [&](double fallback) { return block.params.empty() ? fallback : block.params.front(); };
    if (block.family == "zero") return CostFunction::quadratic(0.0);
    if (block.family == "quadratic") return CostFunction::quadratic(param(1.0));
    if (block.family == "absolute") return CostFunction::absolute(param(1.0));
    if (block.family == "tabulated") {
        if (block.table.empty()) throw ConfigError("[cost] tabulated family needs table = <path>");
        std::ifstream in(block.table);
        if (!in) throw ConfigError("cannot open cost table " + block.table.string());
        return CostFunction::tabulated(read_cost_table(in));
    }
    if (block.family == "expression") {
        if (block.expression.empty()) throw ConfigError("[cost] expression family needs expression = <text>");
        return CostFunction::expression(block.expression, block.params, block.smoothness);
    }
    throw ConfigError("[cost] unknown family '" + block.family + "'");
}

DensitySource make_kernel_source(const KernelBlock& block) {
    if (block.kind == "constant") return DensitySource::constant();
    if (block.kind == "cosine") {
        if (!(block.epsilon >= 0 && block.epsilon < 1)) throw ConfigError("[kernel] epsilon must lie in [0, 1)");
        return DensitySource::cosine(block.epsilon);
    }
    if (block.kind == "tabulated") {
        if (block.table.empty()) throw ConfigError("[kernel] tabulated kind needs table = <path>");
        std::ifstream in(block.table);
        if (!in) throw ConfigError("cannot open kernel table " + block.table.string());
        return DensitySource::tabulated(read_cost_table(in));
    }
    throw ConfigError("[kernel] unknown kind '" + block.kind + "'");
}

}  // namespace permlim
