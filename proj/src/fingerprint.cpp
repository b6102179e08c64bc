// SPDX-License-Identifier: Apache-2.0

#include "wpli/fingerprint.hpp"

#include "wpli/dsp.hpp"
#include "wpli/rfchain.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wpli::fingerprint {

using ojson = nlohmann::ordered_json;

Eigen::VectorXd LdaProjection::project(const std::vector<double>& x) const
{
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    if (identity)
        return v;
    if (W.rows() != v.size())
        throw std::invalid_argument("projection dimension mismatch: fingerprint has " + std::to_string(x.size()) +
                                    " bins, projection expects " + std::to_string(W.rows()));
    return W.transpose() * v;
}

std::size_t LdaProjection::dimension(std::size_t input_dim) const
{
    return identity ? input_dim : static_cast<std::size_t>(W.cols());
}

std::vector<std::string> FingerprintDatabase::devices() const
{
    std::vector<std::string> ids;
    for (const auto& r : records)
        if (std::find(ids.begin(), ids.end(), r.device_id) == ids.end())
            ids.push_back(r.device_id);
    return ids;
}

std::vector<const FingerprintRecord*> FingerprintDatabase::references(const std::string& device) const
{
    std::vector<const FingerprintRecord*> out;
    for (const auto& r : records)
        if (r.device_id == device)
            out.push_back(&r);
    return out;
}

RxResponse estimate_rx_response(const receiver::ReceiverProfile& rx, const std::vector<cplx>& reference,
                                double sample_rate_hz, std::size_t n_fft)
{
    rx.pa_rx.validate();
    const auto& a = rx.pa_rx.odd;
    if (a.size() > 1 && std::abs(a[1]) >= std::abs(a[0]))
        throw NumericalError("singular RX response: third-order coefficient magnitude " + std::to_string(std::abs(a[1])) +
                             " >= linear " + std::to_string(std::abs(a[0])));
    const auto distorted = rfchain::pa_envelope(reference, rx.pa_rx);
    const auto lin = receiver::psd_fingerprint(reference, sample_rate_hz, n_fft);
    const auto nl = receiver::psd_fingerprint(distorted, sample_rate_hz, n_fft);
    double peak = 0.0;
    for (double v : lin.psd)
        peak = std::max(peak, v);
    if (!(peak > 0.0))
        throw DataError("RX reference signal is all zero");
    const double a1sq = std::norm(a[0]);
    RxResponse resp;
    resp.gain.resize(n_fft);
    for (std::size_t k = 0; k < n_fft; ++k) {
        resp.gain[k] = lin.psd[k] > 1e-30 * peak ? nl.psd[k] / lin.psd[k] : a1sq;
        if (!(resp.gain[k] > 1e-12 * a1sq) || !std::isfinite(resp.gain[k]))
            throw NumericalError("singular RX response at bin " + std::to_string(k));
    }
    return resp;
}

FingerprintVector cancel_rx(const FingerprintVector& v, const RxResponse& response)
{
    if (response.gain.size() != v.psd.size())
        throw std::invalid_argument("RX response length does not match fingerprint");
    FingerprintVector out = v;
    for (std::size_t k = 0; k < out.psd.size(); ++k)
        out.psd[k] /= response.gain[k];
    return out;
}

FingerprintVector cancel_rx(const FingerprintVector& v, const receiver::ReceiverProfile& rx,
                            const std::vector<cplx>& reference)
{
    return cancel_rx(v, estimate_rx_response(rx, reference, v.sample_rate_hz, v.n_fft));
}

LdaProjection identity_projection()
{
    LdaProjection p;
    p.identity = true;
    return p;
}

LdaProjection train_lda(const FingerprintDatabase& db, int kappa, const LdaOptions& options)
{
    if (kappa < 1)
        throw std::invalid_argument("LDA dimension must be >= 1");
    const auto ids = db.devices();
    const auto C = static_cast<Eigen::Index>(ids.size());
    if (C < 2)
        throw std::invalid_argument("LDA needs at least two classes");
    const int k_eff = std::min<int>(kappa, static_cast<int>(C) - 1);
    const std::size_t d = db.records.front().vector.psd.size();
    for (const auto& id : ids) {
        const auto refs = db.references(id);
        if (refs.size() < static_cast<std::size_t>(k_eff) + 1)
            throw std::invalid_argument("class '" + id + "' has " + std::to_string(refs.size()) +
                                        " records; LDA dimension " + std::to_string(k_eff) + " needs " +
                                        std::to_string(k_eff + 1));
    }
    for (const auto& r : db.records)
        if (r.vector.psd.size() != d)
            throw std::invalid_argument("fingerprints in the database differ in length");

    const auto n = static_cast<Eigen::Index>(db.records.size());
    const auto D = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd X(n, D);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < D; ++j)
            X(i, j) = db.records[static_cast<std::size_t>(i)].vector.psd[static_cast<std::size_t>(j)];
    // Directions are scale invariant; scaling keeps the small solves well inside double range.
    const double scale = X.cwiseAbs().maxCoeff();
    if (scale > 0.0)
        X /= scale;

    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(C, D);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(C);
    std::vector<Eigen::Index> label(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& id = db.records[static_cast<std::size_t>(i)].device_id;
        const auto c = static_cast<Eigen::Index>(std::find(ids.begin(), ids.end(), id) - ids.begin());
        label[static_cast<std::size_t>(i)] = c;
        means.row(c) += X.row(i);
        counts(c) += 1.0;
    }
    for (Eigen::Index c = 0; c < C; ++c)
        means.row(c) /= counts(c);
    const Eigen::RowVectorXd grand = (counts.transpose() * means) / static_cast<double>(n);

    Eigen::MatrixXd Xc(n, D);
    for (Eigen::Index i = 0; i < n; ++i)
        Xc.row(i) = X.row(i) - means.row(label[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd B(D, C);
    for (Eigen::Index c = 0; c < C; ++c)
        B.col(c) = std::sqrt(counts(c)) * (means.row(c) - grand).transpose();

    const double trace_w = Xc.squaredNorm();
    const double trace_b = B.squaredNorm();
    if (!(trace_b > 0.0))
        throw NumericalError("LDA: class means coincide, no discriminant direction exists");
    double eps = options.ridge_relative * trace_w / static_cast<double>(D);
    if (!(eps > 0.0))
        eps = options.ridge_relative * trace_b / static_cast<double>(D);

    // (eps I + Xc^T Xc)^{-1} B via the Woodbury identity (n x n solve instead of d x d).
    Eigen::MatrixXd G = Xc * Xc.transpose();
    G.diagonal().array() += eps;
    const Eigen::MatrixXd XB = Xc * B;
    const Eigen::MatrixXd SinvB = (B - Xc.transpose() * G.ldlt().solve(XB)) / eps;

    Eigen::MatrixXd M = B.transpose() * SinvB;
    M = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
        throw NumericalError("LDA eigen decomposition failed");

    LdaProjection p;
    p.ridge = eps * scale * scale;
    p.W.resize(D, k_eff);
    for (int k = 0; k < k_eff; ++k) {
        const Eigen::Index col = C - 1 - k; // ascending eigenvalues
        p.eigenvalues.push_back(es.eigenvalues()(col));
        Eigen::VectorXd v = SinvB * es.eigenvectors().col(col);
        const double nrm = v.norm();
        if (!(nrm > 0.0))
            throw NumericalError("LDA produced a null discriminant direction");
        v /= nrm;
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0)
            v = -v;
        p.W.col(k) = v;
    }
    return p;
}

double reference_sigma(const std::vector<const FingerprintRecord*>& refs, const LdaProjection& W, SigmaMode mode)
{
    if (refs.empty())
        throw std::invalid_argument("no references for sigma");
    if (mode == SigmaMode::WithinVector) {
        double acc = 0.0;
        for (const auto* r : refs) {
            const auto p = W.project(r->vector.psd);
            const double mean = p.mean();
            acc += std::sqrt((p.array() - mean).square().mean());
        }
        const double s = acc / static_cast<double>(refs.size());
        if (!(s > 0.0))
            throw NumericalError("degenerate reference: zero spread within projected vector");
        return s;
    }
    if (refs.size() < 2)
        throw NumericalError("degenerate reference: sigma across references needs at least two references");
    std::vector<Eigen::VectorXd> ps;
    for (const auto* r : refs)
        ps.push_back(W.project(r->vector.psd));
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(ps.front().size());
    for (const auto& p : ps)
        mean += p;
    mean /= static_cast<double>(ps.size());
    double ss = 0.0;
    for (const auto& p : ps)
        ss += (p - mean).squaredNorm();
    const double s = std::sqrt(ss / (static_cast<double>(ps.size() - 1) * static_cast<double>(mean.size())));
    if (!(s > 0.0))
        throw NumericalError("degenerate reference: identical projected references give zero sigma");
    return s;
}

double feature_distance(const FingerprintVector& s, const FingerprintRecord& ref, const LdaProjection& W, double sigma)
{
    if (s.psd.size() != ref.vector.psd.size())
        throw std::invalid_argument("fingerprint dimensions differ");
    if (!(sigma > 0.0))
        throw NumericalError("zero sigma in distance denominator");
    std::vector<double> diff(s.psd.size());
    for (std::size_t k = 0; k < diff.size(); ++k)
        diff[k] = s.psd[k] - ref.vector.psd[k];
    return W.project(diff).norm() / sigma;
}

double feature_distance(const FingerprintVector& s, const FingerprintRecord& ref, const LdaProjection& W)
{
    return feature_distance(s, ref, W, reference_sigma({&ref}, W, SigmaMode::WithinVector));
}

std::vector<ClassDistance> class_distances(const FingerprintVector& s, const FingerprintDatabase& db)
{
    if (db.records.empty())
        throw DataError("fingerprint database is empty");
    const LdaProjection W = db.lda ? *db.lda : identity_projection();
    std::vector<ClassDistance> out;
    for (const auto& id : db.devices()) {
        const auto refs = db.references(id);
        double acc = 0.0;
        if (db.sigma_mode == SigmaMode::AcrossReferences) {
            const double sigma = reference_sigma(refs, W, SigmaMode::AcrossReferences);
            for (const auto* r : refs)
                acc += feature_distance(s, *r, W, sigma);
        } else {
            for (const auto* r : refs)
                acc += feature_distance(s, *r, W);
        }
        out.push_back({id, acc / static_cast<double>(refs.size())});
    }
    return out;
}

ClassifyResult classify(const FingerprintVector& s, const FingerprintDatabase& db)
{
    if (db.records.empty())
        throw DataError("fingerprint database is empty");
    if (!db.lda)
        throw std::invalid_argument("classification requires a trained LDA projection");
    ClassifyResult res;
    res.distances = class_distances(s, db);
    for (std::size_t i = 1; i < res.distances.size(); ++i)
        if (res.distances[i].distance < res.distances[res.device_index].distance)
            res.device_index = i;
    res.device_id = res.distances[res.device_index].device_id;
    return res;
}

IdentifyResult identify(const FingerprintVector& s, const FingerprintDatabase& db, double lambda)
{
    const auto dist = class_distances(s, db);
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i)
        if (dist[i].distance < dist[best].distance)
            best = i;
    IdentifyResult res;
    res.min_distance = dist[best].distance;
    res.nearest_device = dist[best].device_id;
    res.genuine = !(res.min_distance > lambda);
    return res;
}

RocResult roc_eer(const std::vector<double>& genuine_scores, const std::vector<double>& imposter_scores)
{
    if (genuine_scores.empty() || imposter_scores.empty())
        throw std::invalid_argument("ROC needs nonempty genuine and imposter score lists");
    std::vector<double> g = genuine_scores;
    std::vector<double> im = imposter_scores;
    std::sort(g.begin(), g.end());
    std::sort(im.begin(), im.end());
    std::vector<double> pooled = g;
    pooled.insert(pooled.end(), im.begin(), im.end());
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

    const auto ng = static_cast<double>(g.size());
    const auto ni = static_cast<double>(im.size());
    RocResult res;
    res.points.reserve(pooled.size());
    double best_gap = std::numeric_limits<double>::infinity();
    for (double lam : pooled) {
        RocPoint p;
        p.threshold = lam;
        const auto imp_le = static_cast<double>(std::upper_bound(im.begin(), im.end(), lam) - im.begin());
        const auto gen_le = static_cast<double>(std::upper_bound(g.begin(), g.end(), lam) - g.begin());
        p.far = imp_le / ni;
        p.frr = (ng - gen_le) / ng;
        p.gar = 1.0 - p.frr;
        p.grr = 1.0 - p.far;
        res.points.push_back(p);
        const double gap = std::abs(p.far - p.frr);
        if (gap < best_gap) {
            best_gap = gap;
            res.eer = 0.5 * (p.far + p.frr);
            res.lambda_eer = lam;
        }
    }
    return res;
}

FingerprintDatabase database_strategy(const FingerprintDatabase& db, const std::vector<FingerprintRecord>& new_captures,
                                      DatabaseMode mode, const Calibration* calibration, const LdaOptions& options)
{
    if (mode == DatabaseMode::Fixed)
        return db;
    if (new_captures.empty())
        throw DataError("updated database mode needs new captures");
    FingerprintDatabase out = db;
    out.records = new_captures;
    if (db.lda && !db.lda->identity)
        out.lda = train_lda(out, db.kappa, options);
    if (calibration && !calibration->genuine.empty() && !calibration->imposter.empty()) {
        std::vector<double> gen, imp;
        for (const auto& v : calibration->genuine)
            gen.push_back(identify(v, out, 0.0).min_distance);
        for (const auto& v : calibration->imposter)
            imp.push_back(identify(v, out, 0.0).min_distance);
        out.threshold = roc_eer(gen, imp).lambda_eer;
    }
    return out;
}

FingerprintVector normalize_power(const FingerprintVector& s)
{
    double total = 0.0;
    for (double v : s.psd)
        total += v;
    if (!(total > 0.0))
        throw DataError("cannot normalize a zero fingerprint");
    FingerprintVector out = s;
    for (auto& v : out.psd)
        v /= total;
    out.normalization = receiver::PsdNormalization::UnitPower;
    return out;
}

void summarize(DecisionReport& r)
{
    if (r.truth.size() != r.decisions.size() || r.truth.size() != r.distances.size())
        throw std::invalid_argument("decision report vectors differ in length");
    if (r.truth.size() + r.failures != r.trials)
        throw std::invalid_argument("decision report does not account for every trial");
    r.errors = 0;
    for (std::size_t i = 0; i < r.truth.size(); ++i)
        if (r.truth[i] != r.decisions[i])
            ++r.errors;
    r.pe = r.truth.empty() ? 0.0 : static_cast<double>(r.errors) / static_cast<double>(r.truth.size());

    r.false_rejects = 0;
    r.false_accepts = 0;
    for (double g : r.genuine_scores)
        if (g > r.threshold)
            ++r.false_rejects;
    for (double s : r.imposter_scores)
        if (!(s > r.threshold))
            ++r.false_accepts;
    r.genuine_trials = r.genuine_scores.size();
    r.imposter_trials = r.imposter_scores.size();
    const auto ng = static_cast<double>(r.genuine_trials);
    const auto ni = static_cast<double>(r.imposter_trials);
    r.frr = ng > 0.0 ? static_cast<double>(r.false_rejects) / ng : 0.0;
    r.gar = ng > 0.0 ? static_cast<double>(r.genuine_scores.size() - r.false_rejects) / ng : 0.0;
    r.far = ni > 0.0 ? static_cast<double>(r.false_accepts) / ni : 0.0;
    r.grr = ni > 0.0 ? static_cast<double>(r.imposter_scores.size() - r.false_accepts) / ni : 0.0;
    r.roc.clear();
    r.eer = 0.0;
    r.lambda_eer = 0.0;
    if (ng > 0.0 && ni > 0.0) {
        auto roc = roc_eer(r.genuine_scores, r.imposter_scores);
        r.roc = std::move(roc.points);
        r.eer = roc.eer;
        r.lambda_eer = roc.lambda_eer;
    }
}

std::string sigma_mode_name(SigmaMode m)
{
    return m == SigmaMode::AcrossReferences ? "across_references" : "within_vector";
}

SigmaMode parse_sigma_mode(const std::string& s)
{
    if (s == "across_references")
        return SigmaMode::AcrossReferences;
    if (s == "within_vector")
        return SigmaMode::WithinVector;
    throw std::invalid_argument("unknown sigma mode '" + s + "'");
}

namespace {

ojson vector_json(const FingerprintVector& v)
{
    ojson j;
    j["n_fft"] = v.n_fft;
    j["sample_rate_hz"] = v.sample_rate_hz;
    j["bandwidth_hz"] = v.bandwidth_hz;
    j["length"] = v.length;
    j["normalization"] = receiver::normalization_name(v.normalization);
    j["estimator"] = v.estimator == receiver::PsdEstimator::Welch ? "welch" : "periodogram";
    j["psd"] = v.psd;
    return j;
}

FingerprintVector vector_from(const ojson& j)
{
    FingerprintVector v;
    v.n_fft = j.at("n_fft").get<std::size_t>();
    v.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    v.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    v.length = j.at("length").get<std::size_t>();
    v.normalization = receiver::parse_normalization(j.at("normalization").get<std::string>());
    const auto est = j.at("estimator").get<std::string>();
    if (est != "welch" && est != "periodogram")
        throw DataError("unknown estimator '" + est + "'");
    v.estimator = est == "welch" ? receiver::PsdEstimator::Welch : receiver::PsdEstimator::Periodogram;
    v.psd = j.at("psd").get<std::vector<double>>();
    v.validate();
    return v;
}

} // namespace

std::string to_json(const FingerprintDatabase& db)
{
    ojson j;
    j["schema_version"] = FingerprintDatabase::kSchemaVersion;
    j["kappa"] = db.kappa;
    j["sigma_mode"] = sigma_mode_name(db.sigma_mode);
    j["threshold"] = db.threshold ? ojson(*db.threshold) : ojson(nullptr);
    if (db.lda) {
        ojson l;
        l["identity"] = db.lda->identity;
        l["ridge"] = db.lda->ridge;
        l["eigenvalues"] = db.lda->eigenvalues;
        ojson cols = ojson::array();
        for (Eigen::Index c = 0; c < db.lda->W.cols(); ++c) {
            std::vector<double> col(static_cast<std::size_t>(db.lda->W.rows()));
            for (Eigen::Index r = 0; r < db.lda->W.rows(); ++r)
                col[static_cast<std::size_t>(r)] = db.lda->W(r, c);
            cols.push_back(col);
        }
        l["directions"] = cols;
        j["lda"] = l;
    } else {
        j["lda"] = nullptr;
    }
    ojson devs = ojson::array();
    for (const auto& id : db.devices()) {
        ojson d;
        d["device_id"] = id;
        ojson recs = ojson::array();
        for (const auto* r : db.references(id)) {
            ojson rj;
            rj["meta"] = {{"distance_m", r->meta.distance_m},
                          {"channel", r->meta.channel},
                          {"sample_rate_hz", r->meta.sample_rate_hz},
                          {"n_fft", r->meta.n_fft}};
            rj["fingerprint"] = vector_json(r->vector);
            recs.push_back(rj);
        }
        d["records"] = recs;
        devs.push_back(d);
    }
    j["devices"] = devs;
    return j.dump(1);
}

FingerprintDatabase database_from_json(const std::string& text)
{
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw DataError(std::string("database parse error: ") + e.what());
    }
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != FingerprintDatabase::kSchemaVersion)
            throw DataError("database schema version " + std::to_string(version) + " unsupported (expected " +
                            std::to_string(FingerprintDatabase::kSchemaVersion) + ")");
        FingerprintDatabase db;
        db.kappa = j.at("kappa").get<int>();
        db.sigma_mode = parse_sigma_mode(j.at("sigma_mode").get<std::string>());
        if (!j.at("threshold").is_null()) {
            db.threshold = j.at("threshold").get<double>();
            if (*db.threshold < 0.0)
                throw DataError("threshold must be non-negative");
        }
        if (!j.at("lda").is_null()) {
            const auto& l = j.at("lda");
            LdaProjection p;
            p.identity = l.at("identity").get<bool>();
            p.ridge = l.at("ridge").get<double>();
            p.eigenvalues = l.at("eigenvalues").get<std::vector<double>>();
            const auto cols = l.at("directions").get<std::vector<std::vector<double>>>();
            if (!cols.empty()) {
                const auto rows = static_cast<Eigen::Index>(cols.front().size());
                p.W.resize(rows, static_cast<Eigen::Index>(cols.size()));
                for (std::size_t c = 0; c < cols.size(); ++c) {
                    if (static_cast<Eigen::Index>(cols[c].size()) != rows)
                        throw DataError("LDA directions have inconsistent lengths");
                    for (Eigen::Index r = 0; r < rows; ++r)
                        p.W(r, static_cast<Eigen::Index>(c)) = cols[c][static_cast<std::size_t>(r)];
                }
            }
            db.lda = p;
        }
        for (const auto& d : j.at("devices")) {
            const auto id = d.at("device_id").get<std::string>();
            for (const auto& r : d.at("records")) {
                FingerprintRecord rec;
                rec.device_id = id;
                const auto& m = r.at("meta");
                rec.meta.distance_m = m.at("distance_m").get<double>();
                rec.meta.channel = m.at("channel").get<std::string>();
                rec.meta.sample_rate_hz = m.at("sample_rate_hz").get<double>();
                rec.meta.n_fft = m.at("n_fft").get<std::size_t>();
                rec.vector = vector_from(r.at("fingerprint"));
                db.records.push_back(std::move(rec));
            }
        }
        return db;
    } catch (const ojson::exception& e) {
        throw DataError(std::string("malformed database: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("malformed database: ") + e.what());
    }
}

void save_database(const FingerprintDatabase& db, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write database file '" + path + "'");
    out << to_json(db) << '\n';
}

FingerprintDatabase load_database(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open database file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return database_from_json(ss.str());
}

std::string fingerprint_to_json(const FingerprintVector& v)
{
    ojson j;
    j["schema_version"] = FingerprintDatabase::kSchemaVersion;
    j["fingerprint"] = vector_json(v);
    return j.dump(1);
}

FingerprintVector fingerprint_from_json(const std::string& text)
{
    try {
        const auto j = ojson::parse(text);
        const int version = j.at("schema_version").get<int>();
        if (version != FingerprintDatabase::kSchemaVersion)
            throw DataError("fingerprint schema version " + std::to_string(version) + " unsupported");
        return vector_from(j.at("fingerprint"));
    } catch (const ojson::exception& e) {
        throw DataError(std::string("malformed fingerprint: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("malformed fingerprint: ") + e.what());
    }
}

std::string mode_name(DatabaseMode m)
{
    return m == DatabaseMode::Fixed ? "fixed" : "updated";
}

DatabaseMode parse_mode(const std::string& s)
{
    if (s == "fixed")
        return DatabaseMode::Fixed;
    if (s == "updated")
        return DatabaseMode::Updated;
    throw std::invalid_argument("unknown database mode '" + s + "'");
}

} // namespace wpli::fingerprint
