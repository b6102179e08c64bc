// SPDX-License-Identifier: Apache-2.0

#include "wpli/harness.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace wpli::harness {

using ojson = nlohmann::ordered_json;

namespace {

ojson optional_json(const std::optional<double>& v)
{
    return v ? ojson(*v) : ojson(nullptr);
}

std::optional<double> optional_from(const ojson& j)
{
    if (j.is_null())
        return std::nullopt;
    return j.get<double>();
}

ojson report_json(const fingerprint::DecisionReport& r)
{
    ojson j;
    j["trials"] = r.trials;
    j["failures"] = r.failures;
    j["errors"] = r.errors;
    j["pe"] = r.pe;
    j["threshold"] = r.threshold;
    j["genuine_trials"] = r.genuine_trials;
    j["imposter_trials"] = r.imposter_trials;
    j["false_rejects"] = r.false_rejects;
    j["false_accepts"] = r.false_accepts;
    j["far"] = r.far;
    j["frr"] = r.frr;
    j["gar"] = r.gar;
    j["grr"] = r.grr;
    j["eer"] = r.eer;
    j["lambda_eer"] = r.lambda_eer;
    j["truth"] = r.truth;
    j["decisions"] = r.decisions;
    j["distances"] = r.distances;
    j["genuine_scores"] = r.genuine_scores;
    j["imposter_scores"] = r.imposter_scores;
    return j;
}

fingerprint::DecisionReport report_from(const ojson& j)
{
    fingerprint::DecisionReport r;
    r.trials = j.at("trials").get<std::size_t>();
    r.failures = j.at("failures").get<std::size_t>();
    r.errors = j.at("errors").get<std::size_t>();
    r.pe = j.at("pe").get<double>();
    r.threshold = j.at("threshold").get<double>();
    r.genuine_trials = j.at("genuine_trials").get<std::size_t>();
    r.imposter_trials = j.at("imposter_trials").get<std::size_t>();
    r.false_rejects = j.at("false_rejects").get<std::size_t>();
    r.false_accepts = j.at("false_accepts").get<std::size_t>();
    r.far = j.at("far").get<double>();
    r.frr = j.at("frr").get<double>();
    r.gar = j.at("gar").get<double>();
    r.grr = j.at("grr").get<double>();
    r.eer = j.at("eer").get<double>();
    r.lambda_eer = j.at("lambda_eer").get<double>();
    r.truth = j.at("truth").get<std::vector<std::size_t>>();
    r.decisions = j.at("decisions").get<std::vector<std::size_t>>();
    r.distances = j.at("distances").get<std::vector<double>>();
    r.genuine_scores = j.at("genuine_scores").get<std::vector<double>>();
    r.imposter_scores = j.at("imposter_scores").get<std::vector<double>>();
    return r;
}

} // namespace

std::string result_to_json(const CampaignResult& r)
{
    ojson j;
    j["schema_version"] = kResultSchemaVersion;
    j["provenance"] = {{"config_hash", r.provenance.config_hash},
                       {"seed", r.provenance.seed},
                       {"code_version", r.provenance.code_version},
                       {"scenario_name", r.provenance.scenario_name},
                       {"noise_psd_w_per_hz", r.provenance.noise_psd_w_per_hz}};
    j["model"] = r.model;
    j["sweep_variable"] = r.sweep_variable;
    j["database_mode"] = r.database_mode;
    ojson pts = ojson::array();
    for (const auto& p : r.points) {
        ojson pj;
        pj["index"] = p.index;
        pj["label"] = p.label;
        pj["value"] = p.value;
        pj["snr_db"] = p.snr_db;
        pj["sample_rate_hz"] = p.sample_rate_hz;
        pj["n_fft"] = p.n_fft;
        pj["channel"] = p.channel;
        pj["predictions"] = {{"class_pe", optional_json(p.predictions.class_pe)},
                             {"ident_eer", optional_json(p.predictions.ident_eer)},
                             {"ident_grr", optional_json(p.predictions.ident_grr)},
                             {"ident_frr", optional_json(p.predictions.ident_frr)},
                             {"gamma", p.predictions.gamma},
                             {"mu", p.predictions.mu}};
        pj["report"] = report_json(p.report);
        pts.push_back(pj);
    }
    j["points"] = pts;
    return j.dump(1);
}

CampaignResult result_from_json(const std::string& text)
{
    try {
        const auto j = ojson::parse(text);
        const int version = j.at("schema_version").get<int>();
        if (version != kResultSchemaVersion)
            throw DataError("result schema version " + std::to_string(version) + " unsupported (expected " +
                            std::to_string(kResultSchemaVersion) + ")");
        CampaignResult r;
        const auto& pv = j.at("provenance");
        r.provenance.config_hash = pv.at("config_hash").get<std::string>();
        r.provenance.seed = pv.at("seed").get<std::uint64_t>();
        r.provenance.code_version = pv.at("code_version").get<std::string>();
        r.provenance.scenario_name = pv.at("scenario_name").get<std::string>();
        r.provenance.noise_psd_w_per_hz = pv.at("noise_psd_w_per_hz").get<double>();
        r.model = j.at("model").get<std::string>();
        r.sweep_variable = j.at("sweep_variable").get<std::string>();
        r.database_mode = j.at("database_mode").get<std::string>();
        for (const auto& pj : j.at("points")) {
            PointResult p;
            p.index = pj.at("index").get<std::size_t>();
            p.label = pj.at("label").get<std::string>();
            p.value = pj.at("value").get<double>();
            p.snr_db = pj.at("snr_db").get<double>();
            p.sample_rate_hz = pj.at("sample_rate_hz").get<double>();
            p.n_fft = pj.at("n_fft").get<std::size_t>();
            p.channel = pj.at("channel").get<std::string>();
            const auto& pr = pj.at("predictions");
            p.predictions.class_pe = optional_from(pr.at("class_pe"));
            p.predictions.ident_eer = optional_from(pr.at("ident_eer"));
            p.predictions.ident_grr = optional_from(pr.at("ident_grr"));
            p.predictions.ident_frr = optional_from(pr.at("ident_frr"));
            p.predictions.gamma = pr.at("gamma").get<double>();
            p.predictions.mu = pr.at("mu").get<int>();
            p.report = report_from(pj.at("report"));
            r.points.push_back(std::move(p));
        }
        return r;
    } catch (const ojson::exception& e) {
        throw DataError(std::string("malformed result document: ") + e.what());
    }
}

void save_result(const CampaignResult& r, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write result file '" + path + "'");
    out << result_to_json(r) << '\n';
}

CampaignResult load_result(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open result file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return result_from_json(ss.str());
}

std::string result_to_csv(const CampaignResult& r)
{
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "# schema_version=" << kResultSchemaVersion << " config_hash=" << r.provenance.config_hash
       << " seed=" << r.provenance.seed << '\n';
    os << "point,label,sweep_variable,value,snr_db,sample_rate_hz,n_fft,channel,metric,estimate,trials\n";
    for (const auto& p : r.points) {
        const auto& rep = p.report;
        auto row = [&](const std::string& metric, double v, std::size_t n) {
            os << p.index << ",\"" << p.label << "\"," << r.sweep_variable << ',' << p.value << ',' << p.snr_db << ','
               << p.sample_rate_hz << ',' << p.n_fft << ',' << p.channel << ',' << metric << ',' << v << ',' << n
               << '\n';
        };
        const std::size_t classified = rep.trials - rep.failures;
        if (rep.trials > 0) {
            row("pe", rep.pe, classified);
            row("failures", static_cast<double>(rep.failures), rep.trials);
        }
        if (rep.genuine_trials > 0 && rep.imposter_trials > 0) {
            row("far", rep.far, rep.imposter_trials);
            row("grr", rep.grr, rep.imposter_trials);
            row("frr", rep.frr, rep.genuine_trials);
            row("gar", rep.gar, rep.genuine_trials);
            row("eer", rep.eer, rep.genuine_trials + rep.imposter_trials);
            row("threshold", rep.threshold, 0);
        }
        if (p.predictions.class_pe)
            row("model_pe", *p.predictions.class_pe, 0);
        if (p.predictions.ident_eer)
            row("model_eer", *p.predictions.ident_eer, 0);
        if (p.predictions.ident_grr)
            row("model_grr", *p.predictions.ident_grr, 0);
        if (p.predictions.ident_frr)
            row("model_frr", *p.predictions.ident_frr, 0);
    }
    return os.str();
}

} // namespace wpli::harness
