// SPDX-License-Identifier: Apache-2.0
//
// Fingerprint post-processing and decisions: RX-response cancellation, Fisher LDA,
// normalized feature distance, classification, threshold identification, ROC/EER,
// and the persistent reference database.

#ifndef WPLI_FINGERPRINT_HPP
#define WPLI_FINGERPRINT_HPP

#include "wpli/common.hpp"
#include "wpli/receiver.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace wpli::fingerprint {

using receiver::FingerprintVector;

struct CaptureMeta {
    double distance_m = 0.0;
    std::string channel = "awgn";
    double sample_rate_hz = 0.0;
    std::size_t n_fft = 0;
};

struct FingerprintRecord {
    std::string device_id;
    FingerprintVector vector;
    CaptureMeta meta;
};

/// How sigma(W^T S_R) in the distance denominator is formed.
enum class SigmaMode {
    AcrossReferences, // spread of the class's projected references (default)
    WithinVector,     // spread of the components of one projected reference
};

struct LdaProjection {
    Eigen::MatrixXd W;                // d x kappa; empty when identity
    std::vector<double> eigenvalues;  // descending
    bool identity = false;
    double ridge = 0.0;               // regularization added to the within-class scatter

    Eigen::VectorXd project(const std::vector<double>& x) const;
    std::size_t dimension(std::size_t input_dim) const;
};

struct FingerprintDatabase {
    static constexpr int kSchemaVersion = 1;

    std::vector<FingerprintRecord> records;
    std::optional<LdaProjection> lda;
    std::optional<double> threshold;
    SigmaMode sigma_mode = SigmaMode::AcrossReferences;
    int kappa = 5;

    /// Device ids in order of first appearance; the position is the device index.
    std::vector<std::string> devices() const;
    std::vector<const FingerprintRecord*> references(const std::string& device) const;
};

struct LdaOptions {
    double ridge_relative = 1e-3; // ridge = rel * trace(S_w) / d
};

struct ClassDistance {
    std::string device_id;
    double distance = 0.0;
};

struct ClassifyResult {
    std::size_t device_index = 0;
    std::string device_id;
    std::vector<ClassDistance> distances; // database device order
};

struct IdentifyResult {
    bool genuine = false;
    double min_distance = 0.0;
    std::string nearest_device;
};

struct RocPoint {
    double threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;
    double gar = 0.0;
    double grr = 0.0;
};

struct RocResult {
    std::vector<RocPoint> points; // ascending threshold
    double eer = 0.0;
    double lambda_eer = 0.0;
};

/// Decisions over a batch of test captures. Rates are count ratios, so
/// FAR + GRR and FRR + GAR are exactly one.
struct DecisionReport {
    std::vector<std::size_t> truth;     // device index per classified capture
    std::vector<std::size_t> decisions; // classified device index
    std::vector<double> distances;      // distance to the decided device
    std::size_t trials = 0;             // captures attempted
    std::size_t failures = 0;           // captures aborted by a stage error
    std::size_t errors = 0;
    double pe = 0.0;

    std::vector<double> genuine_scores;
    std::vector<double> imposter_scores;
    double threshold = 0.0;
    std::size_t genuine_trials = 0;
    std::size_t imposter_trials = 0;
    std::size_t false_rejects = 0;
    std::size_t false_accepts = 0;
    double far = 0.0;
    double frr = 0.0;
    double gar = 0.0;
    double grr = 0.0;
    double eer = 0.0;
    double lambda_eer = 0.0;
    std::vector<RocPoint> roc;
};

/// Fills the aggregate fields of `r` from its per-capture vectors, threshold and failure count.
void summarize(DecisionReport& r);

enum class DatabaseMode { Fixed, Updated };

/// Optional captures used to re-derive the identification threshold in updated mode.
struct Calibration {
    std::vector<FingerprintVector> genuine;
    std::vector<FingerprintVector> imposter;
};

/// Per-bin power response of the receiver front-end for a known reference input.
struct RxResponse {
    std::vector<double> gain; // natural DFT order, same length as the fingerprints
};

/// Response of `rx` to the known baseband reference (pre-ADC, at the fingerprint rate).
/// Throws NumericalError if the RX series is not linear-dominant (|a3| >= |a1|).
RxResponse estimate_rx_response(const receiver::ReceiverProfile& rx, const std::vector<cplx>& reference,
                                double sample_rate_hz, std::size_t n_fft);

FingerprintVector cancel_rx(const FingerprintVector& v, const RxResponse& response);
FingerprintVector cancel_rx(const FingerprintVector& v, const receiver::ReceiverProfile& rx,
                            const std::vector<cplx>& reference);

LdaProjection train_lda(const FingerprintDatabase& db, int kappa, const LdaOptions& options = {});
LdaProjection identity_projection();

/// Scalar spread of one class's projected references.
double reference_sigma(const std::vector<const FingerprintRecord*>& refs, const LdaProjection& W, SigmaMode mode);

/// ||W^T (s - ref)|| / sigma.
double feature_distance(const FingerprintVector& s, const FingerprintRecord& ref, const LdaProjection& W,
                        double sigma);

/// Within-vector sigma taken from `ref` itself.
double feature_distance(const FingerprintVector& s, const FingerprintRecord& ref, const LdaProjection& W);

ClassifyResult classify(const FingerprintVector& s, const FingerprintDatabase& db);
IdentifyResult identify(const FingerprintVector& s, const FingerprintDatabase& db, double lambda);

/// Mean reference distance per device, in database device order.
std::vector<ClassDistance> class_distances(const FingerprintVector& s, const FingerprintDatabase& db);

RocResult roc_eer(const std::vector<double>& genuine_scores, const std::vector<double>& imposter_scores);

FingerprintDatabase database_strategy(const FingerprintDatabase& db, const std::vector<FingerprintRecord>& new_captures,
                                      DatabaseMode mode, const Calibration* calibration = nullptr,
                                      const LdaOptions& options = {});

FingerprintVector normalize_power(const FingerprintVector& s);

std::string to_json(const FingerprintDatabase& db);
FingerprintDatabase database_from_json(const std::string& text);
void save_database(const FingerprintDatabase& db, const std::string& path);
FingerprintDatabase load_database(const std::string& path);

std::string fingerprint_to_json(const FingerprintVector& v);
FingerprintVector fingerprint_from_json(const std::string& text);

std::string sigma_mode_name(SigmaMode m);
SigmaMode parse_sigma_mode(const std::string& s);

std::string mode_name(DatabaseMode m);
DatabaseMode parse_mode(const std::string& s);

} // namespace wpli::fingerprint

#endif
