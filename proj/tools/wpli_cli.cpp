// SPDX-License-Identifier: Apache-2.0
//
// wpli: campaign runner and offline fingerprint tool.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include "wpli/analytics.hpp"
#include "wpli/fingerprint.hpp"
#include "wpli/harness.hpp"
#include "wpli/receiver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace {

using namespace wpli;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    out << text;
}

std::vector<double> read_scores(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open score file '" + path + "'");
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        double v = 0.0;
        if (!(ls >> v))
            throw DataError(path + ":" + std::to_string(lineno) + ": not a number");
        out.push_back(v);
    }
    if (out.empty())
        throw DataError("score file '" + path + "' is empty");
    return out;
}

struct SimulateArgs {
    std::string config;
    std::string out_dir = ".";
    std::size_t threads = 0;
    std::size_t trials = 0;
    long long seed = -1;
    bool quiet = false;
};

int cmd_simulate(const SimulateArgs& a)
{
    auto s = harness::load_scenario(a.config);
    if (a.threads)
        s.campaign.threads = a.threads;
    if (a.trials)
        s.campaign.trials = a.trials;
    if (a.seed >= 0)
        s.campaign.seed = static_cast<std::uint64_t>(a.seed);
    const auto res = harness::run_campaign(s, [&](std::size_t done, std::size_t total) {
        if (!a.quiet)
            std::cerr << "point " << done << "/" << total << " done\n";
    });
    std::filesystem::create_directories(a.out_dir);
    const auto dir = std::filesystem::path(a.out_dir);
    write_file((dir / "results.csv").string(), harness::result_to_csv(res));
    harness::save_result(res, (dir / "summary.json").string());
    for (const auto& p : res.points) {
        std::cout << std::left << std::setw(14) << p.label << " snr " << std::setw(7) << std::setprecision(4) << p.snr_db;
        if (p.report.trials)
            std::cout << " pe " << std::setw(8) << p.report.pe;
        std::cout << " eer " << std::setw(8) << p.report.eer << " far " << std::setw(8) << p.report.far << " frr "
                  << p.report.frr;
        if (p.report.failures)
            std::cout << " failures " << p.report.failures;
        std::cout << '\n';
    }
    std::cout << "config hash " << res.provenance.config_hash << '\n';
    return kOk;
}

struct AnalyzeArgs {
    double gamma_db = 10.0;
    int mu = 1;
    std::string channel = "awgn";
    double m = 3.0;
    double k = 4.0;
    std::size_t points = 200;
    std::string out;
};

int cmd_analyze(const AnalyzeArgs& a)
{
    channel::FadingModel fm;
    fm.kind = channel::parse_fading(a.channel);
    fm.m = a.m;
    fm.K = a.k;
    const double gamma = std::pow(10.0, a.gamma_db / 10.0);
    const auto roc = analytics::theoretical_roc(gamma, a.mu, fm, analytics::default_lambda_grid(gamma, a.mu, a.points));
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "lambda,far,frr,gar,grr\n";
    for (const auto& p : roc.points)
        os << p.lambda << ',' << p.far << ',' << p.frr << ',' << p.gar << ',' << p.grr << '\n';
    if (a.out.empty())
        std::cout << os.str();
    else
        write_file(a.out, os.str());
    std::cerr << "eer " << roc.eer << " at lambda " << roc.lambda_eer << '\n';
    return kOk;
}

struct FingerprintArgs {
    std::string iq;
    std::string meta;
    std::size_t n_fft = 1024;
    std::size_t length = 0;
    std::string normalization = "none";
    bool detect = false;
    std::size_t window = 64;
    double threshold = 4.0;
    std::string out;
    std::string db;
    std::string device;
    double distance = 0.0;
    std::string channel = "awgn";
};

int cmd_fingerprint(const FingerprintArgs& a)
{
    const auto meta = harness::load_iq_meta(a.meta.empty() ? harness::iq_meta_path(a.iq) : a.meta);
    const auto sig = harness::ingest_iq(a.iq, meta);
    std::size_t start = 0;
    if (a.detect)
        start = receiver::detect_preamble(sig.samples, a.window, a.threshold);
    std::size_t L = a.length ? a.length : std::min(a.n_fft, sig.samples.size() - start);
    if (start + L > sig.samples.size())
        throw DataError("capture holds fewer than the requested " + std::to_string(L) + " samples");
    const std::vector<cplx> x(sig.samples.begin() + static_cast<std::ptrdiff_t>(start),
                              sig.samples.begin() + static_cast<std::ptrdiff_t>(start + L));
    const auto fv =
        receiver::psd_fingerprint(x, sig.sample_rate_hz, a.n_fft, receiver::parse_normalization(a.normalization));
    if (!a.db.empty()) {
        if (a.device.empty())
            throw std::invalid_argument("--device is required when appending to a database");
        fingerprint::FingerprintDatabase db;
        if (std::filesystem::exists(a.db))
            db = fingerprint::load_database(a.db);
        fingerprint::FingerprintRecord rec;
        rec.device_id = a.device;
        rec.vector = fv;
        rec.meta = {a.distance, a.channel, sig.sample_rate_hz, a.n_fft};
        db.records.push_back(rec);
        fingerprint::save_database(db, a.db);
        std::cout << "appended " << a.device << " (" << db.references(a.device).size() << " references)\n";
    }
    if (!a.out.empty())
        write_file(a.out, fingerprint::fingerprint_to_json(fv) + "\n");
    else if (a.db.empty())
        std::cout << fingerprint::fingerprint_to_json(fv) << '\n';
    return kOk;
}

int cmd_train(const std::string& db_path, int kappa, double ridge, const std::string& out)
{
    auto db = fingerprint::load_database(db_path);
    db.kappa = kappa;
    fingerprint::LdaOptions opt;
    opt.ridge_relative = ridge;
    db.lda = fingerprint::train_lda(db, kappa, opt);
    fingerprint::save_database(db, out.empty() ? db_path : out);
    std::cout << "trained " << db.lda->W.cols() << " directions, ridge " << db.lda->ridge << '\n';
    return kOk;
}

int cmd_classify(const std::string& db_path, const std::string& fp_path)
{
    const auto db = fingerprint::load_database(db_path);
    const auto v = fingerprint::fingerprint_from_json(read_file(fp_path));
    const auto r = fingerprint::classify(v, db);
    std::cout << r.device_id << '\n';
    for (const auto& d : r.distances)
        std::cout << "  " << d.device_id << ' ' << d.distance << '\n';
    return kOk;
}

int cmd_identify(const std::string& db_path, const std::string& fp_path, double lambda)
{
    auto db = fingerprint::load_database(db_path);
    db.lda = fingerprint::identity_projection();
    if (std::isnan(lambda)) {
        if (!db.threshold)
            throw DataError("database has no threshold; pass --lambda");
        lambda = *db.threshold;
    }
    const auto v = fingerprint::fingerprint_from_json(read_file(fp_path));
    const auto r = fingerprint::identify(v, db, lambda);
    std::cout << (r.genuine ? "genuine" : "imposter") << " nearest " << r.nearest_device << " distance "
              << r.min_distance << " lambda " << lambda << '\n';
    return kOk;
}

int cmd_roc(const std::string& gen, const std::string& imp, const std::string& out)
{
    const auto roc = fingerprint::roc_eer(read_scores(gen), read_scores(imp));
    if (!out.empty()) {
        std::ostringstream os;
        os << std::setprecision(std::numeric_limits<double>::max_digits10);
        os << "threshold,far,frr,gar,grr\n";
        for (const auto& p : roc.points)
            os << p.threshold << ',' << p.far << ',' << p.frr << ',' << p.gar << ',' << p.grr << '\n';
        write_file(out, os.str());
    }
    std::cout << "eer " << roc.eer << " lambda " << roc.lambda_eer << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Physical-layer wireless device identification toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo campaign from a scenario file");
    simulate->add_option("-c,--config", sim.config, "Scenario file")->required()->check(CLI::ExistingFile);
    simulate->add_option("-o,--out-dir", sim.out_dir, "Directory for results.csv and summary.json");
    simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
    simulate->add_option("--trials", sim.trials, "Override the trial count");
    simulate->add_option("--seed", sim.seed, "Override the seed");
    simulate->add_flag("-q,--quiet", sim.quiet, "No progress output");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Closed-form identification ROC table");
    analyze->add_option("--gamma-db", an.gamma_db, "Feature-difference SNR in dB");
    analyze->add_option("--mu", an.mu, "Time-bandwidth product")->check(CLI::PositiveNumber);
    analyze->add_option("--channel", an.channel, "awgn, rayleigh, rician or nakagami");
    analyze->add_option("--m", an.m, "Nakagami m");
    analyze->add_option("--k", an.k, "Rician K");
    analyze->add_option("--points", an.points, "Threshold grid size");
    analyze->add_option("-o,--out", an.out, "CSV output (stdout when omitted)");

    FingerprintArgs fp;
    auto* fpc = app.add_subcommand("fingerprint", "Extract a PSD fingerprint from an IQ capture");
    fpc->add_option("--iq", fp.iq, "Interleaved float32 IQ file")->required()->check(CLI::ExistingFile);
    fpc->add_option("--meta", fp.meta, "Metadata file (default <iq>.json)");
    fpc->add_option("--n-fft", fp.n_fft, "FFT points");
    fpc->add_option("--length", fp.length, "Samples used (default min(N_FFT, available))");
    fpc->add_option("--normalization", fp.normalization, "none or unit_power");
    fpc->add_flag("--detect", fp.detect, "Locate the preamble by energy detection");
    fpc->add_option("--window", fp.window, "Detection window in samples");
    fpc->add_option("--threshold", fp.threshold, "Detection threshold over the noise floor");
    fpc->add_option("-o,--out", fp.out, "Fingerprint output file");
    fpc->add_option("--db", fp.db, "Append the fingerprint to this database");
    fpc->add_option("--device", fp.device, "Device id for --db");
    fpc->add_option("--distance", fp.distance, "Capture distance in meters for --db");
    fpc->add_option("--channel", fp.channel, "Channel label for --db");

    std::string train_db, train_out;
    int kappa = 5;
    double ridge = 1e-3;
    auto* train = app.add_subcommand("train", "Train the LDA projection of a database");
    train->add_option("--db", train_db, "Database file")->required()->check(CLI::ExistingFile);
    train->add_option("--kappa", kappa, "LDA dimension")->check(CLI::PositiveNumber);
    train->add_option("--ridge", ridge, "Relative ridge on the within-class scatter");
    train->add_option("-o,--out", train_out, "Output database (default in place)");

    std::string cdb, cfp;
    auto* classify = app.add_subcommand("classify", "Classify a fingerprint against a database");
    classify->add_option("--db", cdb, "Database file")->required()->check(CLI::ExistingFile);
    classify->add_option("--fingerprint", cfp, "Fingerprint file")->required()->check(CLI::ExistingFile);

    std::string idb, ifp;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    auto* identify = app.add_subcommand("identify", "Accept or reject a fingerprint against a database");
    identify->add_option("--db", idb, "Database file")->required()->check(CLI::ExistingFile);
    identify->add_option("--fingerprint", ifp, "Fingerprint file")->required()->check(CLI::ExistingFile);
    identify->add_option("--lambda", lambda, "Threshold (default: the database threshold)");

    std::string gen, imp, roc_out;
    auto* roc = app.add_subcommand("roc", "ROC and EER from genuine and imposter score files");
    roc->add_option("--genuine", gen, "One score per line")->required()->check(CLI::ExistingFile);
    roc->add_option("--imposter", imp, "One score per line")->required()->check(CLI::ExistingFile);
    roc->add_option("-o,--out", roc_out, "ROC CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*simulate)
            return cmd_simulate(sim);
        if (*analyze)
            return cmd_analyze(an);
        if (*fpc)
            return cmd_fingerprint(fp);
        if (*train)
            return cmd_train(train_db, kappa, ridge, train_out);
        if (*classify)
            return cmd_classify(cdb, cfp);
        if (*identify)
            return cmd_identify(idb, ifp, lambda);
        if (*roc)
            return cmd_roc(gen, imp, roc_out);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::range_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
