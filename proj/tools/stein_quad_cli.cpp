// stein-quad: command-line front end for the Stein-network quadrature
// library. Subcommands cover the Genz benchmark, the Goodwin-oscillator
// posterior means, custom product-target problems, config-file driven
// runs, a genz summary table, weight-file I/O and a quick selftest of the
// numerical oracles.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "steinquad/baselines/bq.hpp"
#include "steinquad/bench/config.hpp"
#include "steinquad/bench/csv.hpp"
#include "steinquad/bench/experiment.hpp"
#include "steinquad/steinnet/serialize.hpp"

namespace sq = steinquad;

namespace {

void add_shared_options(CLI::App* cmd, sq::ExperimentConfig& cfg) {
    cmd->add_option("--method", cfg.method, "bsn | bq | mc | mala");
    cmd->add_option("--n", cfg.n, "number of evaluation points");
    cmd->add_option("--seed", cfg.seed, "base seed; repetition r uses seed+r");
    cmd->add_option("--reps", cfg.repetitions, "number of repetitions");
    cmd->add_option("--sampler", cfg.sampler, "iid | mala | qmc | grid");
    cmd->add_option("--mala-step", cfg.mala_step, "MALA initial step size");
    cmd->add_option("--burn", cfg.burn, "MALA burn-in iterations");
    cmd->add_option("--thin", cfg.thin, "MALA thinning factor");
    cmd->add_option("--hidden", cfg.hidden, "hidden width of the body network");
    cmd->add_option("--layers", cfg.layers, "number of hidden blocks");
    cmd->add_option("--activation", cfg.activation, "celu | tanh | gauss | sigmoid | tanhshrink");
    cmd->add_option("--m", cfg.m_choice,
                    "identity | scaled_std | scaled_max | scaled:<C> | inv_sq_norm | inv_norm | "
                    "density | diag_x");
    cmd->add_option("--lambda", cfg.lambda, "weight decay coefficient");
    cmd->add_option("--optimizer", cfg.optimizer, "lbfgs | adam");
    cmd->add_option("--max-iters", cfg.max_iters, "L-BFGS iteration cap");
    cmd->add_option("--history", cfg.history, "L-BFGS history size");
    cmd->add_option("--adam-lr", cfg.adam_lr, "Adam learning rate");
    cmd->add_option("--adam-iters", cfg.adam_iters, "Adam iterations");
    cmd->add_option("--adam-batch", cfg.adam_batch, "Adam mini-batch size (0 = full)");
    cmd->add_option("--sigma", cfg.sigma, "observation noise: auto or a value");
    cmd->add_option("--sigma0", cfg.sigma0, "prior scale: grid or a value");
    cmd->add_option("--kernel", cfg.kernel, "BQ kernel: rbf | matern12");
    cmd->add_option("--bq-max-n", cfg.bq_max_n, "skip BQ above this n");
    cmd->add_flag("--no-laplace", [&cfg](std::int64_t) { cfg.laplace = false; },
                  "skip the GGN-Laplace posterior");
}

int write_records(const std::vector<sq::ExperimentRecord>& records, const std::string& out) {
    if (out.empty()) {
        sq::emit_csv(records, std::cout);
    } else {
        std::ofstream os(out, std::ios::binary);  // LF line endings everywhere
        if (!os) throw sq::ConfigError("cannot open output file: " + out);
        sq::emit_csv(records, os);
        std::cerr << "wrote " << records.size() << " records to " << out << "\n";
    }
    int failures = 0;
    for (const auto& r : records)
        if (r.notes.rfind("failed:", 0) == 0) ++failures;
    return failures == 0 ? 0 : 3;
}

int run_selftest();

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stein-quad: Bayesian Stein network quadrature experiments"};
    app.require_subcommand(1);

    sq::ExperimentConfig cfg;
    std::string out_path;
    std::string config_path;
    bool print_canonical = false;
    std::string weights_path, inspect_path;
    std::string table_methods = "mc,bq,bsn";

    CLI::App* genz = app.add_subcommand("genz", "Genz family benchmark");
    genz->add_option("--family", cfg.genz_family,
                     "continuous | corner | discontinuous | gaussian | product | oscillatory");
    genz->add_option("--dim", cfg.dim, "input dimension");
    genz->add_option("--out", out_path, "output CSV path (default: stdout)");
    add_shared_options(genz, cfg);

    CLI::App* goodwin = app.add_subcommand("goodwin", "Goodwin oscillator posterior means");
    goodwin->add_option("--param", cfg.goodwin_param, "a1 | a2 | k1 | alpha");
    goodwin->add_option("--points", cfg.goodwin_points, "observation count (2400 = full)");
    goodwin->add_option("--chains", cfg.goodwin_chains, "pooled MALA chains");
    goodwin->add_option("--reference-n", cfg.goodwin_reference_n, "long-chain reference size");
    goodwin->add_flag("--full-data", [&cfg](std::int64_t) { cfg.goodwin_points = 2400; },
                      "use the full 2400-point dataset");
    goodwin->add_option("--out", out_path, "output CSV path (default: stdout)");
    add_shared_options(goodwin, cfg);

    CLI::App* run = app.add_subcommand("run", "run a config-file experiment");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out_path, "output CSV path (default: stdout)");
    run->add_flag("--print-canonical", print_canonical,
                  "print the canonical config and exit");

    CLI::App* table = app.add_subcommand("table", "6-family Genz summary table");
    table->add_option("--dim", cfg.dim, "input dimension");
    table->add_option("--methods", table_methods, "comma-separated method list");
    table->add_option("--out", out_path, "output CSV path (default: stdout)");
    add_shared_options(table, cfg);

    CLI::App* weights = app.add_subcommand("weights", "train and save / inspect BSN weights");
    weights->add_option("--save", weights_path, "train on the configured problem, save here");
    weights->add_option("--inspect", inspect_path, "print the header of a weight file");
    weights->add_option("--family", cfg.genz_family, "genz family to train on");
    weights->add_option("--dim", cfg.dim, "input dimension");
    add_shared_options(weights, cfg);

    app.add_subcommand("selftest", "run the quick numerical oracle suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (genz->parsed()) {
            cfg.problem = "genz";
            return write_records(sq::run_experiment(cfg), out_path);
        }
        if (goodwin->parsed()) {
            cfg.problem = "goodwin";
            if (cfg.method == "mc") cfg.method = "mala";  // no exact sampler here
            return write_records(sq::run_experiment(cfg), out_path);
        }
        if (run->parsed()) {
            std::ifstream is(config_path);
            if (!is) throw sq::ConfigError("cannot open config file: " + config_path);
            const sq::ExperimentConfig file_cfg = sq::parse_config(is);
            if (print_canonical) {
                std::cout << sq::serialize_config(file_cfg);
                return 0;
            }
            return write_records(sq::run_experiment(file_cfg), out_path);
        }
        if (table->parsed()) {
            cfg.problem = "genz";
            std::vector<std::string> methods;
            std::stringstream ms(table_methods);
            std::string tok;
            while (std::getline(ms, tok, ',')) methods.push_back(tok);
            const std::string text = sq::genz_table(cfg.dim, cfg.n, methods, cfg);
            if (out_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream os(out_path, std::ios::binary);
                if (!os) throw sq::ConfigError("cannot open output file: " + out_path);
                os << text;
            }
            return 0;
        }
        if (weights->parsed()) {
            if (!inspect_path.empty()) {
                const sq::SteinNetwork net = sq::load_network_file(inspect_path);
                std::cout << "arch: d=" << net.arch.in_dim << " h=" << net.arch.hidden_width
                          << " l=" << net.arch.hidden_layers
                          << " act=" << sq::activation_name(net.arch.activation)
                          << " params=" << net.arch.theta_size() << "\n";
                std::cout << "theta0: " << sq::format_double(net.theta0()) << "\n";
                std::cout << "boundary: " << (net.boundary ? "box" : "none") << "\n";
                return 0;
            }
            if (weights_path.empty())
                throw sq::ConfigError("weights: pass --save <path> or --inspect <path>");
            cfg.problem = "genz";
            cfg.method = "bsn";
            const sq::ProblemSetup setup = sq::build_problem(cfg);
            sq::RandomStream rng(static_cast<std::uint64_t>(cfg.seed));
            sq::RandomStream sample_rng = rng.split(1), init_rng = rng.split(2);
            sq::PointSet ps = sq::iid_sample(*setup.target, cfg.n, sample_rng);
            Eigen::VectorXd f(ps.size());
            for (Eigen::Index i = 0; i < ps.size(); ++i)
                f[i] = setup.integrand(ps.points.row(i).transpose());
            sq::MlpArchitecture arch;
            arch.in_dim = setup.target->dim();
            arch.hidden_width = cfg.hidden;
            arch.hidden_layers = cfg.layers;
            arch.activation = sq::activation_from_name(cfg.activation);
            sq::SteinNetwork net = sq::init_network(
                arch, init_rng, sq::detail::parse_m_choice(cfg.m_choice, ps.scores));
            sq::OptimizerConfig opt;
            opt.lbfgs.max_iters = cfg.max_iters;
            const sq::TrainResult res = sq::train_bsn(net, ps, f, cfg.lambda, opt);
            sq::save_network_file(res.net, weights_path);
            std::cout << "trained theta0=" << sq::format_double(res.net.theta0())
                      << " final_loss=" << sq::format_double(res.report.final_loss)
                      << " reference=" << sq::format_double(setup.reference) << "\n";
            return 0;
        }
        return run_selftest();
    } catch (const sq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const sq::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

namespace {

int run_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };

    // Cholesky residual oracle
    {
        sq::RandomStream rng(1);
        bool ok = true;
        for (int rep = 0; rep < 10; ++rep) {
            const int n = 4 + static_cast<int>(rng.next_below(12));
            Eigen::MatrixXd m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
            sq::DenseMatrix a = m * m.transpose() + 0.1 * sq::DenseMatrix::Identity(n, n);
            sq::Vector b(n);
            for (int i = 0; i < n; ++i) b[i] = rng.normal();
            const sq::Vector x = sq::cholesky_solve(a, b);
            ok = ok && (a * x - b).lpNorm<Eigen::Infinity>() <= 1e-8 * b.lpNorm<Eigen::Infinity>();
        }
        check("cholesky residual", ok);
    }
    // normal cdf anchors
    check("std_normal_cdf", std::abs(sq::std_normal_cdf(1.0) - 0.8413447460685429) < 1e-14 &&
                                sq::std_normal_cdf(0.0) == 0.5);
    // Gauss-Hermite
    {
        const sq::QuadratureRule r = sq::gauss_hermite(64);
        const double v = r.integrate([](double x) { return std::exp(-0.5 * x * x); });
        check("gauss_hermite 64", std::abs(v - 1.0 / std::sqrt(2.0)) < 1e-12);
    }
    // Genz references vs uniform-cube closed forms
    {
        const sq::GenzSpec c1 = sq::GenzSpec::defaults(sq::GenzFamily::Continuous, 1);
        const double closed = (2.0 - std::exp(-1.3 * 0.55) - std::exp(-1.3 * 0.45)) / 1.3;
        check("genz continuous reference", std::abs(sq::genz_reference(c1) - closed) < 1e-10);
    }
    // embeddings vs quadrature
    {
        sq::RandomStream rng(2);
        bool ok = true;
        for (int rep = 0; rep < 15; ++rep) {
            sq::RbfKernel k{rng.uniform(0.4, 2.0), rng.uniform(0.5, 2.0)};
            sq::GaussianTarget pi(Eigen::VectorXd::Constant(1, rng.uniform(-1.0, 1.0)),
                                  Eigen::VectorXd::Constant(1, rng.uniform(0.4, 2.0)));
            const double x = rng.uniform(-2.5, 2.5);
            const double quad = sq::composite_gl(
                [&](double t) {
                    return k(Eigen::VectorXd::Constant(1, t), Eigen::VectorXd::Constant(1, x)) *
                           std::exp(pi.log_density_unnorm(Eigen::VectorXd::Constant(1, t)));
                },
                pi.mean()[0] - 14.0, pi.mean()[0] + 14.0, 200, 16);
            ok = ok &&
                 std::abs(sq::kme_rbf_gaussian(k, pi, Eigen::VectorXd::Constant(1, x)) - quad) <
                     1e-9;
        }
        check("rbf-gaussian embedding vs quadrature", ok);
        bool ok_m = true;
        for (int rep = 0; rep < 15; ++rep) {
            const double l = std::exp(rng.uniform(std::log(0.1), std::log(5.0)));
            const double x = rng.uniform(-3.0, 3.0);
            auto f = [&](double t) {
                return std::exp(-std::abs(t - x) / l) * sq::std_normal_pdf(t);
            };
            const double quad =
                sq::composite_gl(f, -14.0, x, 200, 16) + sq::composite_gl(f, x, 14.0, 200, 16);
            ok_m = ok_m && std::abs(sq::kme_matern12_gaussian(l, x) - quad) < 1e-9;
        }
        check("matern embedding vs quadrature", ok_m);
    }
    // loss gradient against finite differences
    {
        sq::GaussianTarget pi = sq::GaussianTarget::standard(2);
        sq::RandomStream rng(3);
        sq::PointSet ps = sq::iid_sample(pi, 8, rng);
        sq::MlpArchitecture arch;
        arch.in_dim = 2;
        arch.hidden_width = 6;
        arch.hidden_layers = 1;
        sq::RandomStream init_rng(4);
        sq::SteinNetwork net = sq::init_network(arch, init_rng);
        Eigen::VectorXd f(8);
        for (int i = 0; i < 8; ++i) f[i] = rng.normal();
        sq::SteinBatchEvaluator ev = sq::make_evaluator(net, ps, f, 1e-4);
        Eigen::VectorXd grad;
        ev.loss_and_gradient(net.theta, grad);
        bool ok = true;
        Eigen::VectorXd t = net.theta;
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double h = 1e-5 * std::max(1.0, std::abs(t[i]));
            t[i] += h;
            const double fp = ev.loss_value(t);
            t[i] -= 2.0 * h;
            const double fm = ev.loss_value(t);
            t[i] = net.theta[i];
            const double fd = (fp - fm) / (2.0 * h);
            const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
            ok = ok && std::abs(fd - grad[i]) / denom <= 1e-5;
        }
        check("loss gradient vs finite differences", ok);
    }
    // Stein zero-mean, quick statistical version
    {
        sq::GaussianTarget pi = sq::GaussianTarget::standard(2);
        sq::RandomStream rng(5);
        sq::PointSet ps = sq::iid_sample(pi, 20'000, rng);
        sq::MlpArchitecture arch;
        arch.in_dim = 2;
        arch.hidden_width = 16;
        arch.hidden_layers = 2;
        sq::RandomStream init_rng(6);
        sq::SteinNetwork net = sq::init_network(arch, init_rng);
        Eigen::VectorXd f = Eigen::VectorXd::Zero(ps.size());
        sq::SteinBatchEvaluator ev = sq::make_evaluator(net, ps, f, 0.0);
        const Eigen::VectorXd g = ev.g_values(net.theta);
        const double mean = g.mean();
        const double sd = std::sqrt((g.array() - mean).square().sum() / (g.size() - 1));
        check("stein zero-mean",
              std::abs(mean) <= 5.0 * sd / std::sqrt(static_cast<double>(g.size())));
    }
    // conjugate Laplace
    {
        const sq::DenseMatrix gram = sq::DenseMatrix::Constant(1, 1, 100.0);
        const sq::LaplacePosterior post =
            sq::laplace_from_gram(gram, Eigen::VectorXd::Zero(1), 1.0, 1.0);
        check("conjugate laplace variance", std::abs(post.theta0_var - 1.0 / 101.0) < 1e-12);
    }

    std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
    return failures == 0 ? 0 : 3;
}

}  // namespace
