// SPDX-License-Identifier: Apache-2.0

#include "cpm/detector.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cpm {

double mse(std::span<const std::complex<double>> x,
           std::span<const std::complex<double>> y) {
    if (x.size() != y.size()) throw std::invalid_argument("mse: shape mismatch");
    if (x.empty()) throw std::invalid_argument("mse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += std::norm(x[i] - y[i]);
    }
    return acc / static_cast<double>(x.size());
}

namespace {

std::vector<double> flatten(std::span<const std::complex<double>> x, PccMode mode) {
    std::vector<double> out;
    if (mode == PccMode::reim) {
        out.reserve(2 * x.size());
        for (const auto& v : x) out.push_back(v.real());
        for (const auto& v : x) out.push_back(v.imag());
    } else {
        out.reserve(x.size());
        for (const auto& v : x) out.push_back(std::abs(v));
    }
    return out;
}

}  // namespace

double pcc(std::span<const std::complex<double>> x,
           std::span<const std::complex<double>> y, PccMode mode) {
    if (x.size() != y.size()) throw std::invalid_argument("pcc: shape mismatch");
    if (x.size() < 2) throw std::invalid_argument("pcc: need at least 2 elements");
    const auto a = flatten(x, mode);
    const auto b = flatten(y, mode);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        throw std::domain_error("pcc: degenerate input (zero variance)");
    }
    return sab / std::sqrt(saa * sbb);
}

namespace {

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_refset(const ReferenceSet& refset) {
    if (refset.e_ab_ref.empty() || refset.e_ae_ref.empty()) {
        throw std::invalid_argument("reference set: empty");
    }
    if (refset.e_ab_ref.size() != refset.e_ae_ref.size()) {
        throw std::invalid_argument("reference set: length mismatch");
    }
}

}  // namespace

double calibrate_threshold(const ReferenceSet& refset) {
    check_refset(refset);
    return 0.5 * std::abs(mean(refset.e_ab_ref) - mean(refset.e_ae_ref));
}

double midpoint_threshold(const ReferenceSet& refset) {
    check_refset(refset);
    return 0.5 * (mean(refset.e_ab_ref) + mean(refset.e_ae_ref));
}

double threshold_from_rule(const ReferenceSet& refset, ThresholdRule rule) {
    return rule == ThresholdRule::half_gap ? calibrate_threshold(refset)
                                           : midpoint_threshold(refset);
}

DetectorState::DetectorState(double e_th, UpdatePolicy policy, PccMode pcc_mode)
    : policy_(policy), pcc_mode_(pcc_mode) {
    set_threshold(e_th);
}

DetectorState::DetectorState(UpdatePolicy policy, PccMode pcc_mode)
    : policy_(policy), pcc_mode_(pcc_mode) {}

void DetectorState::set_threshold(double e_th) {
    if (!(e_th >= 0.0)) throw std::invalid_argument("e_th: must be >= 0");
    e_th_ = e_th;
}

double DetectorState::threshold() const {
    if (!e_th_) throw std::logic_error("detector: threshold not calibrated");
    return *e_th_;
}

double DetectorState::packet_error(const ChannelSnapshot& snapshot) const {
    if (!reference_) throw std::logic_error("detector: no reference snapshot");
    return mse(snapshot.h, reference_->h);
}

ErrorRecord DetectorState::decide(const ChannelSnapshot& snapshot) {
    const double th = threshold();  // throws when uncalibrated
    ErrorRecord rec;
    rec.k = snapshot.timestamp_k;
    rec.truth = snapshot.source_label;
    if (!reference_) {
        // First packet seeds the reference (initial trust assumed).
        reference_ = snapshot;
        rec.e = 0.0;
        rec.pcc = 1.0;
        rec.verdict = Verdict::accept;
        return rec;
    }
    rec.e = mse(snapshot.h, reference_->h);
    try {
        rec.pcc = pcc(snapshot.h, reference_->h, pcc_mode_);
    } catch (const std::domain_error&) {
        rec.pcc = std::numeric_limits<double>::quiet_NaN();
    }
    rec.verdict = rec.e < th ? Verdict::accept : Verdict::drop;
    if (policy_ == UpdatePolicy::always || rec.verdict == Verdict::accept) {
        reference_ = snapshot;
    }
    return rec;
}

}  // namespace cpm
