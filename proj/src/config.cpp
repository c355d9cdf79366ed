#include "ncpvi/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ncpvi {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
    }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(static_cast<int>(parse_long(key, trim(item))));
    }
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "problem") {
        if (value != "elliptic1d") throw ConfigError("config: unknown problem '" + value + "'");
        cfg.problem = value;
    } else if (key == "n_coarse") {
        cfg.n_coarse = static_cast<int>(parse_long(key, value));
    } else if (key == "n_fine") {
        cfg.n_fine = static_cast<int>(parse_long(key, value));
    } else if (key == "alpha_prior") {
        cfg.alpha_prior = parse_double(key, value);
    } else if (key == "alpha_pde") {
        cfg.alpha_pde = parse_double(key, value);
    } else if (key == "prior_scale") {
        cfg.prior_scale = parse_double(key, value);
    } else if (key == "noise_pct") {
        cfg.noise_pct = parse_double(key, value);
    } else if (key == "lambda.mean") {
        cfg.lambda_prior.mean = parse_double(key, value);
    } else if (key == "lambda.variance") {
        cfg.lambda_prior.variance = parse_double(key, value);
    } else if (key == "vi.tol") {
        cfg.vi.tol = parse_double(key, value);
    } else if (key == "vi.max_iter") {
        cfg.vi.max_iter = static_cast<int>(parse_long(key, value));
    } else if (key == "vi.r_max") {
        cfg.vi.r_max = static_cast<int>(parse_long(key, value));
    } else if (key == "vi.oversample") {
        cfg.vi.oversample = static_cast<int>(parse_long(key, value));
    } else if (key == "vi.lambda0") {
        cfg.vi.lambda0 = parse_double(key, value);
    } else if (key == "gibbs.beta") {
        cfg.gibbs.beta = parse_double(key, value);
    } else if (key == "gibbs.n_samples") {
        cfg.gibbs.n_samples = parse_long(key, value);
    } else if (key == "gibbs.burn_in") {
        cfg.gibbs.burn_in = parse_long(key, value);
    } else if (key == "gibbs.thin") {
        cfg.gibbs.thin = parse_long(key, value);
    } else if (key == "gibbs.max_seconds") {
        cfg.gibbs.max_seconds = parse_double(key, value);
    } else if (key == "seeds.data") {
        cfg.data_seed = static_cast<std::uint64_t>(parse_long(key, value));
    } else if (key == "seeds.eig") {
        cfg.eig_seed = static_cast<std::uint64_t>(parse_long(key, value));
    } else if (key == "seeds.chain") {
        cfg.chain_seed = static_cast<std::uint64_t>(parse_long(key, value));
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "mesh_study.meshes") {
        cfg.mesh_study_meshes = parse_int_list(key, value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

ExperimentConfig parse_config_lines(const std::vector<std::string>& lines) {
    ExperimentConfig cfg;
    int lineno = 0;
    for (const auto& raw : lines) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
        }
        apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return parse_config_lines(lines);
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n_coarse < 3) throw ConfigError("config: n_coarse must be at least 3");
    if (cfg.n_fine <= cfg.n_coarse) throw ConfigError("config: n_fine must exceed n_coarse");
    if (cfg.noise_pct < 0.0) throw ConfigError("config: noise_pct must be nonnegative");
    if (cfg.alpha_prior <= 0.0 || cfg.alpha_pde <= 0.0) throw ConfigError("config: alpha must be positive");
    if (cfg.prior_scale <= 0.0) throw ConfigError("config: prior_scale must be positive");
    if (cfg.lambda_prior.variance <= 0.0) throw ConfigError("config: lambda.variance must be positive");
    if (cfg.vi.tol <= 0.0) throw ConfigError("config: vi.tol must be positive");
    if (cfg.vi.max_iter < 1) throw ConfigError("config: vi.max_iter must be at least 1");
    if (cfg.vi.r_max < 1) throw ConfigError("config: vi.r_max must be at least 1");
    if (cfg.vi.oversample < 0) throw ConfigError("config: vi.oversample must be nonnegative");
    if (cfg.gibbs.beta <= 0.0 || cfg.gibbs.beta > 1.0) throw ConfigError("config: gibbs.beta must be in (0,1]");
    if (cfg.gibbs.burn_in >= cfg.gibbs.n_samples) throw ConfigError("config: gibbs.burn_in must be below gibbs.n_samples");
    if (cfg.gibbs.thin < 1) throw ConfigError("config: gibbs.thin must be at least 1");
    for (int m : cfg.mesh_study_meshes) {
        if (m >= cfg.n_fine) throw ConfigError("config: mesh_study meshes must stay below n_fine");
    }
}

std::string canonical_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "problem=" << cfg.problem << "\n";
    out << "n_coarse=" << cfg.n_coarse << "\n";
    out << "n_fine=" << cfg.n_fine << "\n";
    out << "alpha_prior=" << fmt17(cfg.alpha_prior) << "\n";
    out << "alpha_pde=" << fmt17(cfg.alpha_pde) << "\n";
    out << "prior_scale=" << fmt17(cfg.prior_scale) << "\n";
    out << "noise_pct=" << fmt17(cfg.noise_pct) << "\n";
    out << "lambda.mean=" << fmt17(cfg.lambda_prior.mean) << "\n";
    out << "lambda.variance=" << fmt17(cfg.lambda_prior.variance) << "\n";
    out << "vi.tol=" << fmt17(cfg.vi.tol) << "\n";
    out << "vi.max_iter=" << cfg.vi.max_iter << "\n";
    out << "vi.r_max=" << cfg.vi.r_max << "\n";
    out << "vi.oversample=" << cfg.vi.oversample << "\n";
    out << "vi.lambda0=" << (cfg.vi.lambda0 ? fmt17(*cfg.vi.lambda0) : std::string("prior-mean")) << "\n";
    out << "gibbs.beta=" << fmt17(cfg.gibbs.beta) << "\n";
    out << "gibbs.n_samples=" << cfg.gibbs.n_samples << "\n";
    out << "gibbs.burn_in=" << cfg.gibbs.burn_in << "\n";
    out << "gibbs.thin=" << cfg.gibbs.thin << "\n";
    out << "gibbs.max_seconds=" << fmt17(cfg.gibbs.max_seconds) << "\n";
    out << "seeds.data=" << cfg.data_seed << "\n";
    out << "seeds.eig=" << cfg.eig_seed << "\n";
    out << "seeds.chain=" << cfg.chain_seed << "\n";
    out << "mesh_study.meshes=";
    for (std::size_t i = 0; i < cfg.mesh_study_meshes.size(); ++i) {
        if (i > 0) out << ",";
        out << cfg.mesh_study_meshes[i];
    }
    out << "\n";
    return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string text = canonical_config(cfg);
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace ncpvi
