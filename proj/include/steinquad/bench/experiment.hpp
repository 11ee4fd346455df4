#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "steinquad/baselines/bq.hpp"
#include "steinquad/baselines/mc.hpp"
#include "steinquad/bench/config.hpp"
#include "steinquad/bench/csv.hpp"
#include "steinquad/goodwin/goodwin.hpp"
#include "steinquad/integrands/genz.hpp"
#include "steinquad/laplace/laplace.hpp"
#include "steinquad/samplers/diagnostics.hpp"
#include "steinquad/samplers/grid.hpp"
#include "steinquad/samplers/halton.hpp"
#include "steinquad/samplers/mala.hpp"
#include "steinquad/samplers/point_set.hpp"
#include "steinquad/training/train.hpp"

namespace steinquad {

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline int goodwin_param_index(const std::string& name) {
    if (name == "a1") return 0;
    if (name == "a2") return 1;
    if (name == "k1") return 2;
    if (name == "alpha") return 3;
    throw ConfigError("unknown goodwin parameter: " + name);
}

inline TargetPtr build_factor(const ExperimentConfig::FactorSpec& spec) {
    std::vector<std::string> groups;
    {
        std::istringstream is(spec.raw);
        std::string tok;
        while (std::getline(is, tok, '|')) groups.push_back(trim(tok));
    }
    auto nums = [](const std::string& s) {
        std::vector<double> v;
        std::istringstream is(s);
        std::string tok;
        while (is >> tok) v.push_back(cfg_double(tok, "target factor params"));
        return v;
    };
    if (spec.kind == "gaussian") {
        const auto p = nums(spec.raw);
        if (p.size() != 2) throw ConfigError("gaussian factor needs: mean variance");
        return std::make_shared<GaussianTarget>(Eigen::VectorXd::Constant(1, p[0]),
                                                Eigen::VectorXd::Constant(1, p[1]));
    }
    if (spec.kind == "truncated_gaussian") {
        const auto p = nums(spec.raw);
        if (p.size() != 4)
            throw ConfigError("truncated_gaussian factor needs: mu sigma lower upper");
        return std::make_shared<TruncatedGaussian1D>(p[0], p[1], p[2], p[3]);
    }
    if (spec.kind == "mixture") {
        if (groups.size() != 3 && groups.size() != 4)
            throw ConfigError("mixture factor needs: weights | means | variances [| lower upper]");
        const auto w = nums(groups[0]), mu = nums(groups[1]), var = nums(groups[2]);
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        if (groups.size() == 4) {
            const auto box = nums(groups[3]);
            if (box.size() != 2) throw ConfigError("mixture truncation needs: lower upper");
            lo = box[0];
            hi = box[1];
        }
        return std::make_shared<GaussianMixture1D>(w, mu, var, lo, hi);
    }
    throw ConfigError("unknown target factor kind: " + spec.kind);
}

inline MChoice parse_m_choice(const std::string& s, const Eigen::MatrixXd& scores) {
    if (s == "identity") return MChoice::identity();
    if (s == "scaled_std") return MChoice::scaled(resolve_scale_c(ScaleRule::StdOfScores, scores));
    if (s == "scaled_max") return MChoice::scaled(resolve_scale_c(ScaleRule::MaxAbsScore, scores));
    if (s.rfind("scaled:", 0) == 0)
        return MChoice::scaled(cfg_double(s.substr(7), "bsn.m scaled constant"));
    if (s == "inv_sq_norm") return {MKind::InverseSquareNorm, 1.0};
    if (s == "inv_norm") return {MKind::InverseNorm, 1.0};
    if (s == "density") return {MKind::DensityScaled, 1.0};
    if (s == "diag_x") return {MKind::DiagX, 1.0};
    throw ConfigError("unknown m choice: " + s);
}

}  // namespace detail

// problem instance shared by every repetition of a config
struct ProblemSetup {
    TargetPtr target;
    Integrand integrand;
    double reference = 0.0;
    std::string reference_note;
    std::string label;
    std::shared_ptr<const GoodwinTarget> goodwin;  // set for goodwin problems
};

inline ProblemSetup build_problem(const ExperimentConfig& cfg) {
    ProblemSetup setup;
    if (cfg.problem == "genz") {
        const GenzSpec spec = GenzSpec::defaults(genz_family_from_name(cfg.genz_family), cfg.dim);
        setup.target = std::make_shared<GaussianTarget>(GaussianTarget::standard(cfg.dim));
        setup.integrand = genz_integrand(spec);
        setup.reference = genz_reference(spec);
        setup.reference_note = "quadrature";
        setup.label = "genz_" + cfg.genz_family + "_d" + std::to_string(cfg.dim);
        return setup;
    }
    if (cfg.problem == "goodwin") {
        const OdeSolverConfig ode_cfg;
        GoodwinData data = make_goodwin_data(cfg.goodwin_points, 20'000 + cfg.seed, ode_cfg);
        setup.goodwin = make_goodwin_target(std::move(data), ode_cfg);
        setup.target = setup.goodwin;
        const int j = detail::goodwin_param_index(cfg.goodwin_param);
        setup.integrand = coordinate_integrand(j, CoordTransform::Exp, 4);
        setup.label = "goodwin_" + cfg.goodwin_param;
        // long-chain reference on the same posterior
        MalaConfig mcfg;
        mcfg.step_size = cfg.mala_step;
        mcfg.n_burn = cfg.burn;
        mcfg.n_keep = cfg.goodwin_reference_n;
        mcfg.init = Eigen::VectorXd::Zero(4);
        RandomStream rng(777'000 + cfg.seed);
        const PointSet chain = mala_sample(*setup.target, mcfg, rng);
        Eigen::VectorXd values(chain.size());
        for (Eigen::Index i = 0; i < chain.size(); ++i)
            values[i] = setup.integrand(chain.points.row(i).transpose());
        setup.reference = values.mean();
        setup.reference_note =
            "mala_long_chain n=" + std::to_string(cfg.goodwin_reference_n) +
            " se=" + format_double(mcmc_std_error(values));
        return setup;
    }
    if (cfg.problem == "custom") {
        std::vector<TargetPtr> factors;
        for (const auto& f : cfg.target_factors) factors.push_back(detail::build_factor(f));
        TargetPtr target = factors.size() == 1
                               ? factors.front()
                               : std::make_shared<ProductTarget>(std::move(factors));
        setup.target = target;
        const auto transform =
            cfg.transform == "exp" ? CoordTransform::Exp : CoordTransform::Identity;
        setup.integrand = coordinate_integrand(cfg.coordinate, transform, setup.target->dim());
        setup.label = "custom_coord" + std::to_string(cfg.coordinate);
        // seeded large-sample MC reference
        RandomStream rng(555'000 + cfg.seed);
        const Eigen::Index n_ref = 1'000'000;
        Eigen::MatrixXd x = setup.target->sample(n_ref, rng);
        Eigen::VectorXd values(n_ref);
        for (Eigen::Index i = 0; i < n_ref; ++i) values[i] = setup.integrand(x.row(i).transpose());
        const McEstimate est = mc_estimate(values);
        setup.reference = est.mean;
        setup.reference_note = "mc n=1000000 se=" + format_double(est.std_error);
        return setup;
    }
    throw ConfigError("unknown problem: " + cfg.problem);
}

namespace detail {

struct Design {
    PointSet ps;
    double sampling_seconds = 0.0;
};

inline Design build_design(const ExperimentConfig& cfg, const ProblemSetup& setup, long n,
                           RandomStream& rng) {
    Design out;
    Stopwatch watch;
    if (setup.goodwin) {
        // posterior samples come from pooled prior-initialized chains
        MalaConfig mcfg;
        mcfg.step_size = cfg.mala_step;
        mcfg.n_burn = cfg.burn;
        mcfg.thinning = cfg.thin;
        const int chains = std::max(1, cfg.goodwin_chains);
        mcfg.n_keep = (n + chains - 1) / chains;
        Eigen::MatrixXd inits(chains, 4);
        for (int c = 0; c < chains; ++c)
            for (int j = 0; j < 4; ++j) inits(c, j) = rng.normal();
        PointSet pooled = mala_sample_pooled(*setup.target, mcfg, inits, rng);
        out.ps.points = pooled.points.topRows(n);
        out.ps.scores = pooled.scores.topRows(n);
        out.ps.provenance = Provenance::MALA;
        out.sampling_seconds = watch.seconds();
        return out;
    }
    if (cfg.sampler == "iid" || cfg.method == "mc" || cfg.method == "bq") {
        out.ps = iid_sample(*setup.target, n, rng);
    } else if (cfg.sampler == "qmc") {
        const auto* g = dynamic_cast<const GaussianTarget*>(setup.target.get());
        if (!g) throw ConfigError("qmc sampling requires a gaussian target");
        out.ps = qmc_point_set(*g, n);
    } else if (cfg.sampler == "grid") {
        const auto* g = dynamic_cast<const GaussianTarget*>(setup.target.get());
        if (!g) throw ConfigError("grid sampling requires a gaussian target");
        const int d = g->dim();
        const int per_dim = std::max(2, static_cast<int>(std::floor(
                                            std::pow(static_cast<double>(n), 1.0 / d))));
        out.ps = grid_points(d == 1 ? static_cast<int>(n) : per_dim, *g);
    } else if (cfg.sampler == "mala") {
        MalaConfig mcfg;
        mcfg.step_size = cfg.mala_step;
        mcfg.n_burn = cfg.burn;
        mcfg.thinning = cfg.thin;
        mcfg.adapt = cfg.adapt;
        mcfg.n_keep = n;
        if (setup.target->has_sampler())
            mcfg.init = setup.target->sample(1, rng).row(0).transpose();
        else
            mcfg.init = Eigen::VectorXd::Zero(setup.target->dim());
        out.ps = mala_sample(*setup.target, mcfg, rng);
    } else {
        throw ConfigError("unknown sampler: " + cfg.sampler);
    }
    out.sampling_seconds = watch.seconds();
    return out;
}

inline Eigen::VectorXd integrand_values(const Integrand& f, const PointSet& ps) {
    Eigen::VectorXd out(ps.size());
    for (Eigen::Index i = 0; i < ps.size(); ++i) out[i] = f(ps.points.row(i).transpose());
    return out;
}

}  // namespace detail

// One repetition at a fixed seed. Numerical failures propagate; the
// multi-repetition driver catches them into the record notes.
inline ExperimentRecord run_single(const ExperimentConfig& cfg, const ProblemSetup& setup,
                                   long rep_seed) {
    ExperimentRecord rec;
    rec.method = cfg.method;
    rec.problem = setup.label;
    rec.d = setup.target->dim();
    rec.n = cfg.n;
    rec.seed = rep_seed;
    rec.reference = setup.reference;

    RandomStream rep_rng(static_cast<std::uint64_t>(rep_seed));
    RandomStream sample_rng = rep_rng.split(1);
    RandomStream init_rng = rep_rng.split(2);
    RandomStream opt_rng = rep_rng.split(3);

    std::ostringstream notes;
    notes << "ref=" << setup.reference_note;

    if (cfg.method == "mc" || cfg.method == "mala") {
        detail::Design design = detail::build_design(cfg, setup, cfg.n, sample_rng);
        detail::Stopwatch watch;
        const Eigen::VectorXd values = detail::integrand_values(setup.integrand, design.ps);
        const McEstimate est = mc_estimate(values);
        rec.estimate = est.mean;
        rec.posterior_std =
            setup.goodwin ? mcmc_std_error(values) : est.std_error;  // ESS-aware for chains
        rec.runtime_s = watch.seconds();
        notes << " sampling_s=" << format_double(design.sampling_seconds);
    } else if (cfg.method == "bq") {
        if (cfg.n > cfg.bq_max_n) {
            rec.estimate = std::numeric_limits<double>::quiet_NaN();
            rec.rel_error = std::numeric_limits<double>::quiet_NaN();
            rec.notes = "skipped: budget";
            return rec;
        }
        detail::Design design = detail::build_design(cfg, setup, cfg.n, sample_rng);
        const Eigen::VectorXd f = detail::integrand_values(setup.integrand, design.ps);
        detail::Stopwatch watch;
        BqPosterior post;
        if (cfg.kernel == "matern12") {
            // amplitude-invariant posterior mean; fit the lengthscale on
            // the RBF marginal likelihood as a proxy scale
            RbfKernel proxy = fit_gp_hyperparams(design.ps.points, f);
            post = bq_posterior(Matern12Kernel{proxy.lengthscale}, *setup.target,
                                design.ps.points, f);
        } else {
            RbfKernel kernel = fit_gp_hyperparams(design.ps.points, f);
            post = bq_posterior(kernel, *setup.target, design.ps.points, f);
        }
        rec.estimate = post.mean;
        if (post.variance) rec.posterior_std = std::sqrt(*post.variance);
        rec.runtime_s = watch.seconds();
        notes << " sampling_s=" << format_double(design.sampling_seconds);
    } else if (cfg.method == "bsn") {
        detail::Design design = detail::build_design(cfg, setup, cfg.n, sample_rng);
        const Eigen::VectorXd f = detail::integrand_values(setup.integrand, design.ps);

        MlpArchitecture arch;
        arch.in_dim = setup.target->dim();
        arch.hidden_width = cfg.hidden;
        arch.hidden_layers = cfg.layers;
        arch.activation = activation_from_name(cfg.activation);

        detail::Stopwatch watch;
        SteinNetwork net = init_network(arch, init_rng,
                                        detail::parse_m_choice(cfg.m_choice, design.ps.scores));

        OptimizerConfig opt;
        if (cfg.optimizer == "adam") {
            opt.kind = OptimizerConfig::Kind::Adam;
            opt.adam.lr = cfg.adam_lr;
            opt.adam.iters = cfg.adam_iters;
            opt.adam.batch_size = cfg.adam_batch;
        } else {
            opt.lbfgs.max_iters = cfg.max_iters;
            opt.lbfgs.history_size = cfg.history;
            opt.lbfgs.grad_tol = cfg.grad_tol;
        }
        TrainResult trained = train_bsn(net, design.ps, f, cfg.lambda, opt, setup.target.get(),
                                        &opt_rng, cfg.decay_theta0);
        rec.estimate = trained.net.theta0();
        rec.final_loss = trained.report.final_loss;
        if (trained.report.line_search_failed) notes << " line_search_stop=1";

        if (cfg.laplace) {
            SteinBatchEvaluator ev = make_evaluator(trained.net, design.ps, f, cfg.lambda,
                                                    setup.target.get(), cfg.decay_theta0);
            NoiseConfig ncfg;
            if (cfg.sigma != "auto") ncfg.sigma = detail::cfg_double(cfg.sigma, "noise.sigma");
            if (cfg.sigma0 != "grid") ncfg.sigma0 = detail::cfg_double(cfg.sigma0, "noise.sigma0");
            const LaplacePosterior post = laplace_posterior(ev, trained.net.theta, ncfg);
            rec.posterior_std = std::sqrt(post.theta0_var);
            notes << " sigma=" << format_double(post.sigma)
                  << " sigma0=" << format_double(post.sigma0);
        }
        rec.runtime_s = watch.seconds();
        notes << " sampling_s=" << format_double(design.sampling_seconds)
              << " iters=" << trained.report.iters_used;
    } else {
        throw ConfigError("unknown method: " + cfg.method);
    }

    if (setup.reference != 0.0) {
        rec.rel_error = std::abs(rec.estimate - setup.reference) / std::abs(setup.reference);
        if (rec.posterior_std && *rec.posterior_std > 0)
            rec.gamma = rec.rel_error / *rec.posterior_std;
    } else {
        rec.rel_error = std::numeric_limits<double>::quiet_NaN();
        notes << " zero_reference=1";
    }
    rec.notes = notes.str();
    return rec;
}

// One record per repetition, seeds seed .. seed+reps-1; per-repetition
// failures are recorded, not fatal.
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const ProblemSetup setup = build_problem(cfg);
    std::vector<ExperimentRecord> records;
    records.reserve(cfg.repetitions);
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const long rep_seed = cfg.seed + rep;
        try {
            records.push_back(run_single(cfg, setup, rep_seed));
        } catch (const NumericalError& e) {
            ExperimentRecord rec;
            rec.method = cfg.method;
            rec.problem = setup.label;
            rec.d = setup.target->dim();
            rec.n = cfg.n;
            rec.seed = rep_seed;
            rec.estimate = std::numeric_limits<double>::quiet_NaN();
            rec.reference = setup.reference;
            rec.rel_error = std::numeric_limits<double>::quiet_NaN();
            rec.notes = std::string("failed: ") + e.what();
            records.push_back(std::move(rec));
        }
    }
    return records;
}

// 6 families x methods grid of mean +- std relative errors at fixed (d, n)
inline std::string genz_table(int d, long n, const std::vector<std::string>& methods,
                              const ExperimentConfig& base) {
    std::ostringstream os;
    os << "family,method,mean_rel_error,std_rel_error,reps\n";
    for (const char* family :
         {"continuous", "corner", "discontinuous", "gaussian", "product", "oscillatory"}) {
        for (const std::string& method : methods) {
            ExperimentConfig cfg = base;
            cfg.problem = "genz";
            cfg.genz_family = family;
            cfg.dim = d;
            cfg.n = n;
            cfg.method = method;
            const std::vector<ExperimentRecord> records = run_experiment(cfg);
            double mean = 0.0;
            int ok = 0;
            for (const auto& r : records)
                if (std::isfinite(r.rel_error)) {
                    mean += r.rel_error;
                    ++ok;
                }
            mean = ok ? mean / ok : std::numeric_limits<double>::quiet_NaN();
            double var = 0.0;
            for (const auto& r : records)
                if (std::isfinite(r.rel_error)) var += (r.rel_error - mean) * (r.rel_error - mean);
            const double sd = ok > 1 ? std::sqrt(var / (ok - 1)) : 0.0;
            os << family << ',' << method << ',' << format_double(mean) << ','
               << format_double(sd) << ',' << ok << "\n";
        }
    }
    return os.str();
}

}  // namespace steinquad
