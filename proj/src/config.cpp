#include "coneflow/config.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace coneflow {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty())
        return false;
    const char* first = t.data();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size();
}

bool parse_count(const std::string& text, std::size_t& out) {
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return !t.empty() && ec == std::errc() && ptr == t.data() + t.size();
}

bool parse_list(const std::string& text, std::vector<double>& out) {
    out.clear();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        if (!parse_real(item, v))
            return false;
        out.push_back(v);
    }
    return !out.empty();
}

// "lo:hi"
bool parse_window(const std::string& text, Window& w) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        return false;
    return parse_real(text.substr(0, colon), w.lo) && parse_real(text.substr(colon + 1), w.hi);
}

struct Key {
    const char* section;
    const char* name;
    const char* expects;
    std::function<std::string(const Config&)> get;
    std::function<bool(Config&, const std::string&)> set;
};

template <class F>
Key real(const char* section, const char* name, F field) {
    return {section, name, "a real number",
            [field](const Config& c) {
                Config copy = c;
                return fmt(field(copy));
            },
            [field](Config& c, const std::string& v) { return parse_real(v, field(c)); }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        std::vector<Key> k;
        k.push_back(real("cone", "lambda", [](Config& c) -> double& { return c.flow.cone.lambda; }));
        k.push_back(real("cone", "beta", [](Config& c) -> double& { return c.flow.cone.beta; }));
        k.push_back(real("cone", "tau0", [](Config& c) -> double& { return c.flow.cone.tau0; }));
        k.push_back(real("cone", "tauInf", [](Config& c) -> double& { return c.flow.cone.tauInf; }));
        k.push_back(real("vectorField", "c", [](Config& c) -> double& { return c.flow.vf.c; }));
        k.push_back(real("regularization", "epsilon", [](Config& c) -> double& { return c.flow.epsilon; }));
        k.push_back(real("regularization", "k", [](Config& c) -> double& { return c.flow.k; }));
        k.push_back(real("regularization", "psiRho", [](Config& c) -> double& { return c.flow.psi.rho; }));
        k.push_back(real("regularization", "psiCtilde", [](Config& c) -> double& { return c.flow.psi.Ctilde; }));
        k.push_back(real("grid", "sMin", [](Config& c) -> double& { return c.flow.grid.sMin; }));
        k.push_back(real("grid", "sMax", [](Config& c) -> double& { return c.flow.grid.sMax; }));
        k.push_back({"grid", "n", "a positive integer",
                     [](const Config& c) { return std::to_string(c.flow.grid.n); },
                     [](Config& c, const std::string& v) { return parse_count(v, c.flow.grid.n); }});
        k.push_back({"solver", "scheme", "explicit-adaptive or semi-implicit-newton",
                     [](const Config& c) { return scheme_name(c.flow.scheme); },
                     [](Config& c, const std::string& v) {
                         try {
                             c.flow.scheme = scheme_from_name(trim(v));
                             return true;
                         } catch (const ParameterError&) {
                             return false;
                         }
                     }});
        k.push_back(real("solver", "dtInit", [](Config& c) -> double& { return c.flow.dtInit; }));
        k.push_back(real("solver", "dtMax", [](Config& c) -> double& { return c.flow.dtMax; }));
        k.push_back(real("solver", "tEnd", [](Config& c) -> double& { return c.flow.tEnd; }));
        k.push_back(real("solver", "cEps0", [](Config& c) -> double& { return c.flow.cEps0; }));
        k.push_back(real("solver", "newtonTol", [](Config& c) -> double& { return c.flow.tolerances.newton; }));
        k.push_back({"solver", "newtonMaxIter", "a positive integer",
                     [](const Config& c) { return std::to_string(c.flow.tolerances.newtonMaxIter); },
                     [](Config& c, const std::string& v) {
                         std::size_t n = 0;
                         if (!parse_count(v, n) || n > 100000)
                             return false;
                         c.flow.tolerances.newtonMaxIter = static_cast<int>(n);
                         return true;
                     }});
        k.push_back(real("solver", "positivityFloor", [](Config& c) -> double& { return c.flow.tolerances.positivityFloor; }));
        k.push_back(real("solver", "outputCadence", [](Config& c) -> double& { return c.flow.tolerances.outputCadence; }));
        k.push_back(real("solver", "localError", [](Config& c) -> double& { return c.flow.tolerances.localError; }));
        k.push_back(real("solver", "stationaryTol", [](Config& c) -> double& { return c.flow.tolerances.stationary; }));
        k.push_back(real("diagnostics", "margin", [](Config& c) -> double& { return c.flow.diagnostics.margin; }));
        k.push_back(real("diagnostics", "holderAlpha", [](Config& c) -> double& { return c.flow.diagnostics.holderAlpha; }));
        k.push_back(real("diagnostics", "coneWindowWidth", [](Config& c) -> double& { return c.flow.diagnostics.coneWindowWidth; }));
        k.push_back({"continuation", "epsList", "a comma-separated list of reals",
                     [](const Config& c) { return fmt_list(c.continuation.epsList); },
                     [](Config& c, const std::string& v) { return parse_list(v, c.continuation.epsList); }});
        k.push_back({"continuation", "window", "LO:HI",
                     [](const Config& c) {
                         const Window& w = c.continuation.settings.window;
                         return fmt(w.lo) + ":" + fmt(w.hi);
                     },
                     [](Config& c, const std::string& v) { return parse_window(v, c.continuation.settings.window); }});
        k.push_back({"continuation", "timeSamples", "a comma-separated list of reals (empty: 0, tEnd/2, tEnd)",
                     [](const Config& c) { return fmt_list(c.continuation.settings.timeSamples); },
                     [](Config& c, const std::string& v) {
                         if (trim(v).empty()) {
                             c.continuation.settings.timeSamples.clear();
                             return true;
                         }
                         return parse_list(v, c.continuation.settings.timeSamples);
                     }});
        k.push_back(real("continuation", "cauchyThreshold", [](Config& c) -> double& { return c.continuation.settings.cauchyThreshold; }));
        k.push_back({"continuation", "threads", "a positive integer",
                     [](const Config& c) { return std::to_string(c.continuation.settings.threads); },
                     [](Config& c, const std::string& v) {
                         std::size_t n = 0;
                         if (!parse_count(v, n) || n == 0 || n > 1024)
                             return false;
                         c.continuation.settings.threads = static_cast<unsigned>(n);
                         return true;
                     }});
        return k;
    }();
    return table;
}

const char* const kSections[] = {"cone", "vectorField", "regularization", "grid",
                                 "solver", "diagnostics", "continuation"};

void validate_continuation(const Config& c) {
    const auto& eps = c.continuation.epsList;
    if (eps.empty())
        throw ParameterError("epsList is empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0))
            throw ParameterError("epsList entries must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw ParameterError("epsList must be strictly decreasing");
    }
    const Window& w = c.continuation.settings.window;
    if (!(w.lo < w.hi) || w.lo <= c.flow.grid.sMin || w.hi >= c.flow.grid.sMax)
        throw ParameterError("window must satisfy sMin < lo < hi < sMax");
    for (double t : c.continuation.settings.timeSamples)
        if (t < 0.0 || t > c.flow.tEnd)
            throw ParameterError("timeSamples must lie in [0, tEnd]");
    if (!(c.continuation.settings.cauchyThreshold > 0.0))
        throw ParameterError("cauchyThreshold must be positive");
}

} // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& key,
                         const std::string& message)
    : ParameterError([&] {
          std::ostringstream os;
          os << source;
          if (line > 0)
              os << ":" << line;
          os << ": ";
          if (!key.empty())
              os << "key '" << key << "': ";
          os << message;
          return os.str();
      }()),
      line_(line), key_(key) {}

Config parse_config_text(const std::string& text, const std::string& source) {
    Config cfg;
    std::map<std::string, std::size_t> sectionLine;
    std::map<std::string, std::size_t> seen;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineNo = 0;
    while (std::getline(in, raw)) {
        ++lineNo;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(source, lineNo, "", "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const char* s : kSections)
                known = known || section == s;
            if (!known)
                throw ConfigError(source, lineNo, "", "unknown section [" + section + "]");
            if (sectionLine.count(section))
                throw ConfigError(source, lineNo, "", "duplicate section [" + section + "]");
            sectionLine[section] = lineNo;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source, lineNo, "", "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError(source, lineNo, key, "key outside of any section");
        const Key* entry = nullptr;
        for (const Key& k : keys())
            if (section == k.section && key == k.name)
                entry = &k;
        if (!entry)
            throw ConfigError(source, lineNo, key, "unknown key in section [" + section + "]");
        const std::string full = section + "." + key;
        if (seen.count(full))
            throw ConfigError(source, lineNo, key,
                              "duplicate key (first set on line " + std::to_string(seen[full]) + ")");
        seen[full] = lineNo;
        if (!entry->set(cfg, value))
            throw ConfigError(source, lineNo, key,
                              "cannot parse '" + value + "', expected " + entry->expects);
    }

    auto where = [&](const char* s) {
        const auto it = sectionLine.find(s);
        return it == sectionLine.end() ? std::size_t{0} : it->second;
    };
    try {
        cfg.flow.cone = ConeData::make(cfg.flow.cone.lambda, cfg.flow.cone.beta, cfg.flow.cone.tau0,
                                       cfg.flow.cone.tauInf);
    } catch (const ParameterError& e) {
        throw ConfigError(source, where("cone"), "", std::string("invalid [cone]: ") + e.what());
    }
    try {
        cfg.flow.grid.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(source, where("grid"), "", std::string("invalid [grid]: ") + e.what());
    }
    try {
        cfg.flow.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(source, 0, "", std::string("invalid configuration: ") + e.what());
    }
    try {
        validate_continuation(cfg);
    } catch (const ParameterError& e) {
        throw ConfigError(source, where("continuation"), "",
                          std::string("invalid [continuation]: ") + e.what());
    }
    return cfg;
}

Config parse_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError(path, 0, "", "cannot open file");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string emit_config(const Config& config) {
    std::string out;
    std::string section;
    for (const Key& k : keys()) {
        if (section != k.section) {
            if (!section.empty())
                out += "\n";
            section = k.section;
            out += "[" + section + "]\n";
        }
        out += std::string(k.name) + " = " + k.get(config) + "\n";
    }
    return out;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string config_hash(const Config& config) {
    return sha256_hex(emit_config(config));
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"kahler-einstein", "smooth-soliton", "conical"};
    return names;
}

Config preset(const std::string& name) {
    Config c;
    if (name == "kahler-einstein") {
        c.flow.cone = ConeData::make(1.0, 1.0, 1.0, 1.0);
        c.flow.vf.c = 0.0;
        c.flow.k = 0.0;
        c.flow.grid = RadialGrid::make(-30.0, 30.0, 1025);
        c.continuation.epsList = {0.25};
    } else if (name == "smooth-soliton") {
        c.flow.cone = ConeData::make(1.0, 1.0, 1.0, 1.0);
        c.flow.vf.c = 0.3;
        c.flow.k = 0.1;
        c.flow.grid = RadialGrid::make(-30.0, 30.0, 1537);
        c.flow.dtInit = 5e-3;
        c.flow.dtMax = 2e-2;
        c.continuation.epsList = {0.25, 0.125, 0.0625};
    } else if (name == "conical") {
        c.flow.cone = ConeData::make(1.0, 0.9, 1.0, 1.0);
        c.flow.vf.c = 0.2;
        c.flow.k = 1.0;
        c.flow.grid = RadialGrid::make(-30.0, 30.0, 1537);
        c.continuation.epsList.clear();
        for (int j = 2; j <= 10; ++j)
            c.continuation.epsList.push_back(std::ldexp(1.0, -j));
    } else {
        throw ParameterError("unknown preset '" + name + "'");
    }
    c.flow.validate();
    return c;
}

} // namespace coneflow
