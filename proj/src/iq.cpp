// SPDX-License-Identifier: Apache-2.0

#include "wpli/harness.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace wpli::harness {

static_assert(std::endian::native == std::endian::little, "IQ files are read as native little-endian float32");

std::string iq_meta_path(const std::string& iq_path)
{
    return iq_path + ".json";
}

IqMeta load_iq_meta(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("missing IQ metadata file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        const auto j = nlohmann::json::parse(ss.str());
        const int version = j.at("schema_version").get<int>();
        if (version != kIqSchemaVersion)
            throw DataError("IQ metadata schema version " + std::to_string(version) + " unsupported");
        if (j.contains("format") && j.at("format").get<std::string>() != "cf32_le")
            throw DataError("unsupported IQ sample format '" + j.at("format").get<std::string>() + "'");
        IqMeta m;
        if (!j.contains("sample_rate_hz"))
            throw DataError("IQ metadata lacks sample_rate_hz");
        m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        if (j.contains("carrier_hz") && !j.at("carrier_hz").is_null())
            m.carrier_hz = j.at("carrier_hz").get<double>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed IQ metadata '" + path + "': " + e.what());
    }
}

ComplexSignal ingest_iq(const std::string& path, const IqMeta& meta)
{
    if (!(meta.sample_rate_hz > 0.0))
        throw DataError("IQ metadata must give a positive sample rate");
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open IQ file '" + path + "'");
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0)
        throw DataError("truncated IQ file '" + path + "': " + std::to_string(bytes.size()) +
                        " bytes is not a whole number of float32 pairs");
    ComplexSignal s;
    s.sample_rate_hz = meta.sample_rate_hz;
    if (meta.carrier_hz) {
        s.domain = SignalDomain::Passband;
        s.carrier_hz = *meta.carrier_hz;
    }
    s.samples.resize(bytes.size() / 8);
    for (std::size_t n = 0; n < s.samples.size(); ++n) {
        float iq[2];
        std::memcpy(iq, bytes.data() + 8 * n, 8);
        s.samples[n] = cplx(iq[0], iq[1]);
    }
    return s;
}

void write_iq(const std::string& path, const ComplexSignal& signal)
{
    signal.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write IQ file '" + path + "'");
    for (const auto& v : signal.samples) {
        const float iq[2] = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
        out.write(reinterpret_cast<const char*>(iq), sizeof iq);
    }
    nlohmann::ordered_json j;
    j["schema_version"] = kIqSchemaVersion;
    j["format"] = "cf32_le";
    j["sample_rate_hz"] = signal.sample_rate_hz;
    j["carrier_hz"] =
        signal.domain == SignalDomain::Passband ? nlohmann::ordered_json(signal.carrier_hz) : nlohmann::ordered_json(nullptr);
    j["samples"] = signal.samples.size();
    std::ofstream meta(iq_meta_path(path));
    if (!meta)
        throw DataError("cannot write IQ metadata for '" + path + "'");
    meta << j.dump(1) << '\n';
}

} // namespace wpli::harness
