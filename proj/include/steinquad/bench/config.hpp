#pragma once

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "steinquad/bench/format.hpp"
#include "steinquad/errors.hpp"

namespace steinquad {

// Declarative experiment description. Maps 1:1 onto the key/value config
// file grammar in docs/config.md; parse(serialize(c)) == c and unknown
// sections or keys are rejected.
struct ExperimentConfig {
    // [experiment]
    std::string problem = "genz";  // genz | goodwin | custom
    std::string method = "bsn";    // bsn | bq | mc | mala
    long n = 1024;
    long seed = 0;
    int repetitions = 5;

    // [genz]
    std::string genz_family = "continuous";
    int dim = 1;

    // [goodwin]
    std::string goodwin_param = "a1";  // a1 | a2 | k1 | alpha
    int goodwin_points = 240;          // 2400 reproduces the full dataset
    int goodwin_chains = 5;
    long goodwin_reference_n = 100'000;

    // [target] for custom problems: product of 1-D factors, described by
    // [target.1] .. [target.k] subsections
    struct FactorSpec {
        std::string kind;  // gaussian | truncated_gaussian | mixture
        std::vector<double> params;
        // gaussian: mean variance
        // truncated_gaussian: mu sigma lower upper    (inf allowed)
        // mixture: w1.. | mu1.. | var1.. | lower upper   ('|' separated)
        std::string raw;  // original parameter text, canonical form
        bool operator==(const FactorSpec&) const = default;
    };
    std::vector<FactorSpec> target_factors;
    int coordinate = 0;
    std::string transform = "identity";  // identity | exp

    // [sampler]
    std::string sampler = "iid";  // iid | mala | qmc | grid
    double mala_step = 0.5;
    long burn = 2000;
    long thin = 1;
    bool adapt = true;

    // [bsn]
    int hidden = 32;
    int layers = 2;
    std::string activation = "celu";
    std::string m_choice = "identity";  // identity | scaled_std | scaled_max | scaled:<C>
                                        // | inv_sq_norm | inv_norm | density | diag_x
    double lambda = 1e-6;
    bool decay_theta0 = false;
    bool laplace = true;

    // [optimizer]
    std::string optimizer = "lbfgs";  // lbfgs | adam
    int max_iters = 500;
    int history = 10;
    double grad_tol = 1e-8;
    double adam_lr = 1e-3;
    long adam_iters = 10'000;
    long adam_batch = 0;  // 0 = full batch

    // [noise]
    std::string sigma = "auto";   // auto | <float>
    std::string sigma0 = "grid";  // grid | <float>

    // [bq]
    std::string kernel = "rbf";  // rbf | matern12
    long bq_max_n = 4096;

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double cfg_double(const std::string& s, const std::string& key) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": " + s);
    }
}

inline long cfg_long(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": " + s);
    }
}

inline bool cfg_bool(const std::string& s, const std::string& key) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError("bad boolean value for " + key + ": " + s);
}

inline std::string bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace detail

inline void validate_config(const ExperimentConfig& c) {
    auto one_of = [](const std::string& v, std::initializer_list<const char*> allowed,
                     const std::string& key) {
        for (const char* a : allowed)
            if (v == a) return;
        throw ConfigError("invalid value for " + key + ": " + v);
    };
    one_of(c.problem, {"genz", "goodwin", "custom"}, "experiment.problem");
    one_of(c.method, {"bsn", "bq", "mc", "mala"}, "experiment.method");
    one_of(c.genz_family,
           {"continuous", "corner", "discontinuous", "gaussian", "product", "oscillatory"},
           "genz.family");
    one_of(c.goodwin_param, {"a1", "a2", "k1", "alpha"}, "goodwin.param");
    one_of(c.sampler, {"iid", "mala", "qmc", "grid"}, "sampler.kind");
    one_of(c.activation, {"celu", "tanh", "gauss", "sigmoid", "tanhshrink"}, "bsn.activation");
    one_of(c.optimizer, {"lbfgs", "adam"}, "optimizer.kind");
    one_of(c.transform, {"identity", "exp"}, "target.transform");
    one_of(c.kernel, {"rbf", "matern12"}, "bq.kernel");
    if (c.n < 1) throw ConfigError("experiment.n must be positive");
    if (c.repetitions < 1) throw ConfigError("experiment.repetitions must be positive");
    if (c.dim < 1 || c.dim > 50) throw ConfigError("genz.dim must be in [1, 50]");
    if (c.hidden < 1 || c.layers < 0) throw ConfigError("bsn architecture is malformed");
    if (!(c.lambda >= 0)) throw ConfigError("bsn.lambda must be nonnegative");
    const bool scaled = c.m_choice.rfind("scaled:", 0) == 0;
    if (!scaled)
        one_of(c.m_choice,
               {"identity", "scaled_std", "scaled_max", "inv_sq_norm", "inv_norm", "density",
                "diag_x"},
               "bsn.m");
    if (c.sigma != "auto") detail::cfg_double(c.sigma, "noise.sigma");
    if (c.sigma0 != "grid") detail::cfg_double(c.sigma0, "noise.sigma0");
    if (c.problem == "custom" && c.target_factors.empty())
        throw ConfigError("custom problems need at least one [target.k] factor");
    for (const auto& f : c.target_factors)
        if (f.kind != "gaussian" && f.kind != "truncated_gaussian" && f.kind != "mixture")
            throw ConfigError("unknown target factor kind: " + f.kind);
}

inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig c;
    std::string line, section;
    std::map<int, ExperimentConfig::FactorSpec> factors;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (section.rfind("target.", 0) == 0 && section.size() > 7) {
            const int idx = static_cast<int>(detail::cfg_long(section.substr(7), "target index"));
            auto& f = factors[idx];
            if (key == "kind")
                f.kind = val;
            else if (key == "params")
                f.raw = val;
            else
                throw ConfigError("unknown key " + qual);
            continue;
        }

        if (qual == "experiment.problem") c.problem = val;
        else if (qual == "experiment.method") c.method = val;
        else if (qual == "experiment.n") c.n = detail::cfg_long(val, qual);
        else if (qual == "experiment.seed") c.seed = detail::cfg_long(val, qual);
        else if (qual == "experiment.repetitions")
            c.repetitions = static_cast<int>(detail::cfg_long(val, qual));
        else if (qual == "genz.family") c.genz_family = val;
        else if (qual == "genz.dim") c.dim = static_cast<int>(detail::cfg_long(val, qual));
        else if (qual == "goodwin.param") c.goodwin_param = val;
        else if (qual == "goodwin.points")
            c.goodwin_points = static_cast<int>(detail::cfg_long(val, qual));
        else if (qual == "goodwin.chains")
            c.goodwin_chains = static_cast<int>(detail::cfg_long(val, qual));
        else if (qual == "goodwin.reference_n") c.goodwin_reference_n = detail::cfg_long(val, qual);
        else if (qual == "target.coordinate")
            c.coordinate = static_cast<int>(detail::cfg_long(val, qual));
        else if (qual == "target.transform") c.transform = val;
        else if (qual == "sampler.kind") c.sampler = val;
        else if (qual == "sampler.mala_step") c.mala_step = detail::cfg_double(val, qual);
        else if (qual == "sampler.burn") c.burn = detail::cfg_long(val, qual);
        else if (qual == "sampler.thin") c.thin = detail::cfg_long(val, qual);
        else if (qual == "sampler.adapt") c.adapt = detail::cfg_bool(val, qual);
        else if (qual == "bsn.hidden") c.hidden = static_cast<int>(detail::cfg_long(val, qual));
        else if (qual == "bsn.layers") c.layers = static_cast<int>(detail::cfg_long(val, qual));
        else if (qual == "bsn.activation") c.activation = val;
        else if (qual == "bsn.m") c.m_choice = val;
        else if (qual == "bsn.lambda") c.lambda = detail::cfg_double(val, qual);
        else if (qual == "bsn.decay_theta0") c.decay_theta0 = detail::cfg_bool(val, qual);
        else if (qual == "bsn.laplace") c.laplace = detail::cfg_bool(val, qual);
        else if (qual == "optimizer.kind") c.optimizer = val;
        else if (qual == "optimizer.max_iters")
            c.max_iters = static_cast<int>(detail::cfg_long(val, qual));
        else if (qual == "optimizer.history")
            c.history = static_cast<int>(detail::cfg_long(val, qual));
        else if (qual == "optimizer.grad_tol") c.grad_tol = detail::cfg_double(val, qual);
        else if (qual == "optimizer.adam_lr") c.adam_lr = detail::cfg_double(val, qual);
        else if (qual == "optimizer.adam_iters") c.adam_iters = detail::cfg_long(val, qual);
        else if (qual == "optimizer.adam_batch") c.adam_batch = detail::cfg_long(val, qual);
        else if (qual == "noise.sigma") c.sigma = val;
        else if (qual == "noise.sigma0") c.sigma0 = val;
        else if (qual == "bq.kernel") c.kernel = val;
        else if (qual == "bq.max_n") c.bq_max_n = detail::cfg_long(val, qual);
        else
            throw ConfigError("unknown key " + qual);
    }
    for (auto& [idx, f] : factors) {
        if (idx != static_cast<int>(c.target_factors.size()) + 1)
            throw ConfigError("target factors must be numbered 1..k in order");
        // params parsed lazily by the target builder; keep canonical text
        c.target_factors.push_back(std::move(f));
    }
    validate_config(c);
    return c;
}

inline std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[experiment]\n";
    os << "problem = " << c.problem << "\n";
    os << "method = " << c.method << "\n";
    os << "n = " << c.n << "\n";
    os << "seed = " << c.seed << "\n";
    os << "repetitions = " << c.repetitions << "\n";
    os << "\n[genz]\n";
    os << "family = " << c.genz_family << "\n";
    os << "dim = " << c.dim << "\n";
    os << "\n[goodwin]\n";
    os << "param = " << c.goodwin_param << "\n";
    os << "points = " << c.goodwin_points << "\n";
    os << "chains = " << c.goodwin_chains << "\n";
    os << "reference_n = " << c.goodwin_reference_n << "\n";
    os << "\n[target]\n";
    os << "coordinate = " << c.coordinate << "\n";
    os << "transform = " << c.transform << "\n";
    for (std::size_t i = 0; i < c.target_factors.size(); ++i) {
        os << "\n[target." << (i + 1) << "]\n";
        os << "kind = " << c.target_factors[i].kind << "\n";
        os << "params = " << c.target_factors[i].raw << "\n";
    }
    os << "\n[sampler]\n";
    os << "kind = " << c.sampler << "\n";
    os << "mala_step = " << format_double(c.mala_step) << "\n";
    os << "burn = " << c.burn << "\n";
    os << "thin = " << c.thin << "\n";
    os << "adapt = " << detail::bool_str(c.adapt) << "\n";
    os << "\n[bsn]\n";
    os << "hidden = " << c.hidden << "\n";
    os << "layers = " << c.layers << "\n";
    os << "activation = " << c.activation << "\n";
    os << "m = " << c.m_choice << "\n";
    os << "lambda = " << format_double(c.lambda) << "\n";
    os << "decay_theta0 = " << detail::bool_str(c.decay_theta0) << "\n";
    os << "laplace = " << detail::bool_str(c.laplace) << "\n";
    os << "\n[optimizer]\n";
    os << "kind = " << c.optimizer << "\n";
    os << "max_iters = " << c.max_iters << "\n";
    os << "history = " << c.history << "\n";
    os << "grad_tol = " << format_double(c.grad_tol) << "\n";
    os << "adam_lr = " << format_double(c.adam_lr) << "\n";
    os << "adam_iters = " << c.adam_iters << "\n";
    os << "adam_batch = " << c.adam_batch << "\n";
    os << "\n[noise]\n";
    os << "sigma = " << c.sigma << "\n";
    os << "sigma0 = " << c.sigma0 << "\n";
    os << "\n[bq]\n";
    os << "kernel = " << c.kernel << "\n";
    os << "max_n = " << c.bq_max_n << "\n";
    return os.str();
}

}  // namespace steinquad
