// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "cpm/detector.hpp"
#include "cpm/rng.hpp"
#include "oracles.hpp"

using cpm::ChannelSnapshot;
using cpm::DetectorState;
using cpm::mse;
using cpm::pcc;
using cpm::ReferenceSet;
using cpm::UpdatePolicy;
using cpm::Verdict;
using std::complex;

namespace {

std::vector<complex<double>> random_vector(cpm::Rng& rng, std::size_t n) {
    std::vector<complex<double>> v(n);
    for (auto& x : v) x = rng.cnormal(1.0);
    return v;
}

ChannelSnapshot snapshot_of(std::vector<complex<double>> h, std::uint64_t k = 0) {
    ChannelSnapshot s;
    s.h = std::move(h);
    s.timestamp_k = k;
    return s;
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("mse: zero iff equal, hand value on a 1x2 example") {
    const std::vector<complex<double>> x = {{1.0, 0.0}, {0.0, 0.0}};
    const std::vector<complex<double>> y = {{0.0, 0.0}, {1.0, 0.0}};
    CHECK(mse(x, x) == 0.0);
    CHECK(mse(x, y) == 1.0);  // (1 + 1) / 2
}

TEST_CASE("mse equals the brute-force oracle on random matrices") {
    cpm::Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t rows = 1 + rng.word() % 4;
        const std::size_t cols = 1 + rng.word() % 8;
        const auto x = random_vector(rng, rows * cols);
        const auto y = random_vector(rng, rows * cols);
        CHECK(std::abs(mse(x, y) - oracle::brute_mse(x, y)) < 1e-12);
    }
}

TEST_CASE("mse symmetry and positive definiteness") {
    cpm::Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = random_vector(rng, 32);
        const auto y = random_vector(rng, 32);
        CHECK(mse(x, y) == mse(y, x));
        CHECK(mse(x, y) > 0.0);
        CHECK(mse(x, x) == 0.0);
    }
}

TEST_CASE("mse scales with |a|^2") {
    cpm::Rng rng(3);
    const auto x = random_vector(rng, 16);
    const auto y = random_vector(rng, 16);
    const double a = 2.0;  // exact in binary floating point
    std::vector<complex<double>> ax(16);
    std::vector<complex<double>> ay(16);
    for (std::size_t i = 0; i < 16; ++i) {
        ax[i] = a * x[i];
        ay[i] = a * y[i];
    }
    CHECK(mse(ax, ay) == a * a * mse(x, y));
}

TEST_CASE("mse rejects shape mismatch and empty input") {
    const std::vector<complex<double>> x(4, 0.0);
    const std::vector<complex<double>> y(5, 0.0);
    const std::vector<complex<double>> empty;
    CHECK_THROWS_AS(mse(x, y), std::invalid_argument);
    CHECK_THROWS_AS(mse(empty, empty), std::invalid_argument);
}

TEST_CASE("pcc: identity, anticorrelation, exact linear dependence") {
    cpm::Rng rng(4);
    const auto x = random_vector(rng, 64);
    std::vector<complex<double>> neg(64);
    for (std::size_t i = 0; i < 64; ++i) neg[i] = -x[i];
    CHECK(pcc(x, x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pcc(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));

    const std::vector<complex<double>> a = {{1, 0}, {2, 0}, {3, 0}, {4, 0}};
    const std::vector<complex<double>> b = {{2, 0}, {4, 0}, {6, 0}, {8, 0}};
    CHECK(pcc(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pcc is invariant to positive affine maps of the flattened vectors") {
    cpm::Rng rng(5);
    const auto x = random_vector(rng, 32);
    const auto y = random_vector(rng, 32);
    const double a = 3.25;
    const double b = -0.75;
    // a*x + b applied to the flattened representation means scaling the
    // complex value and offsetting both components equally.
    std::vector<complex<double>> xs(32);
    std::vector<complex<double>> ys(32);
    for (std::size_t i = 0; i < 32; ++i) {
        xs[i] = complex<double>(a * x[i].real() + b, a * x[i].imag() + b);
        ys[i] = complex<double>(a * y[i].real() + b, a * y[i].imag() + b);
    }
    CHECK(pcc(xs, ys) == doctest::Approx(pcc(x, y)).epsilon(1e-9));
}

TEST_CASE("pcc rejects degenerate input") {
    const std::vector<complex<double>> flat(8, complex<double>(2.0, 2.0));
    const std::vector<complex<double>> other = {{1, 0}, {2, 0}, {3, 0}, {4, 0},
                                                {5, 0}, {6, 0}, {7, 0}, {8, 0}};
    CHECK_THROWS_AS(pcc(flat, other), std::domain_error);
    const std::vector<complex<double>> one(1, complex<double>(1.0, 0.0));
    CHECK_THROWS_AS(pcc(one, one), std::invalid_argument);
}

TEST_CASE("pcc magnitude mode ignores a pure phase rotation") {
    cpm::Rng rng(6);
    const auto x = random_vector(rng, 32);
    std::vector<complex<double>> rotated(32);
    for (std::size_t i = 0; i < 32; ++i) {
        rotated[i] = x[i] * std::polar(1.0, 1.234);
    }
    CHECK(pcc(x, rotated, cpm::PccMode::magnitude) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pcc(x, rotated, cpm::PccMode::reim) < 0.999);
}

TEST_CASE("calibrate_threshold: hand example and degenerate case") {
    ReferenceSet refset;
    refset.e_ab_ref = {0.0, 0.0, 0.0};
    refset.e_ae_ref = {4.0, 4.0, 4.0};
    CHECK(cpm::calibrate_threshold(refset) == 2.0);
    refset.e_ab_ref = refset.e_ae_ref;
    CHECK(cpm::calibrate_threshold(refset) == 0.0);
    CHECK(cpm::midpoint_threshold(refset) == 4.0);
}

TEST_CASE("calibrate_threshold rejects empty or mismatched sets") {
    ReferenceSet refset;
    CHECK_THROWS_AS(cpm::calibrate_threshold(refset), std::invalid_argument);
    refset.e_ab_ref = {1.0};
    refset.e_ae_ref = {1.0, 2.0};
    CHECK_THROWS_AS(cpm::calibrate_threshold(refset), std::invalid_argument);
}

TEST_CASE("calibrate_threshold equals half the mean gap on random sets") {
    cpm::Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        ReferenceSet refset;
        const std::size_t n = 1 + rng.word() % 50;
        double sum_ab = 0.0;
        double sum_ae = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = std::abs(rng.normal());
            const double b = std::abs(rng.normal()) * 10.0;
            refset.e_ab_ref.push_back(a);
            refset.e_ae_ref.push_back(b);
            sum_ab += a;
            sum_ae += b;
        }
        const double n_d = static_cast<double>(n);
        const double expected = 0.5 * std::abs(sum_ab / n_d - sum_ae / n_d);
        CHECK(std::abs(cpm::calibrate_threshold(refset) - expected) < 1e-12);
    }
}

TEST_CASE("decide: first snapshot seeds the reference and is accepted") {
    DetectorState det(0.5, UpdatePolicy::on_accept);
    cpm::Rng rng(8);
    const auto first = snapshot_of(random_vector(rng, 64), 0);
    const auto rec = det.decide(first);
    CHECK(rec.verdict == Verdict::accept);
    CHECK(rec.e == 0.0);
    REQUIRE(det.reference().has_value());
    CHECK(det.reference()->h == first.h);
}

TEST_CASE("decide: boundary e == e_th drops, slightly below accepts") {
    // zero reference keeps the per-bin differences exact
    const std::vector<complex<double>> ref(64, complex<double>(0.0, 0.0));
    const std::vector<complex<double>> ones(64, complex<double>(1.0, 0.0));

    DetectorState det(1.0, UpdatePolicy::on_accept);
    det.decide(snapshot_of(ref, 0));
    const auto at_boundary = det.decide(snapshot_of(ones, 1));
    CHECK(at_boundary.e == 1.0);
    CHECK(at_boundary.verdict == Verdict::drop);

    // scale so e = 1 - 1e-12 (relative)
    const double s = std::sqrt(1.0 - 1e-12);
    const std::vector<complex<double>> just_below(64, complex<double>(s, 0.0));
    const auto below = det.decide(snapshot_of(just_below, 2));
    CHECK(below.e < 1.0);
    CHECK(below.e == doctest::Approx(1.0 - 1e-12).epsilon(1e-15));
    CHECK(below.verdict == Verdict::accept);
}

TEST_CASE("decide: throws when uncalibrated, threshold must be >= 0") {
    DetectorState det{UpdatePolicy::on_accept};
    cpm::Rng rng(10);
    CHECK_FALSE(det.calibrated());
    CHECK_THROWS_AS(det.decide(snapshot_of(random_vector(rng, 8))), std::logic_error);
    CHECK_THROWS_AS(det.set_threshold(-1.0), std::invalid_argument);
    det.set_threshold(0.25);
    CHECK(det.calibrated());
}

TEST_CASE("on-accept policy: reference advances only past accepted packets") {
    cpm::Rng rng(11);
    const auto base = random_vector(rng, 64);
    DetectorState det(0.1, UpdatePolicy::on_accept);
    det.decide(snapshot_of(base, 0));

    auto far = base;
    for (auto& v : far) v += complex<double>(3.0, 0.0);
    const auto dropped = det.decide(snapshot_of(far, 1));
    CHECK(dropped.verdict == Verdict::drop);
    CHECK(det.reference()->h == base);  // unchanged

    auto near = base;
    for (auto& v : near) v += complex<double>(0.01, 0.0);
    const auto accepted = det.decide(snapshot_of(near, 2));
    CHECK(accepted.verdict == Verdict::accept);
    CHECK(det.reference()->h == near);
}

TEST_CASE("always policy: reference follows every packet") {
    cpm::Rng rng(12);
    const auto base = random_vector(rng, 64);
    DetectorState det(0.1, UpdatePolicy::always);
    det.decide(snapshot_of(base, 0));
    auto far = base;
    for (auto& v : far) v += complex<double>(3.0, 0.0);
    const auto dropped = det.decide(snapshot_of(far, 1));
    CHECK(dropped.verdict == Verdict::drop);
    CHECK(det.reference()->h == far);
}

TEST_CASE("after an all-accept run the reference is the latest snapshot") {
    cpm::Rng rng(13);
    DetectorState det(10.0, UpdatePolicy::on_accept);
    std::vector<complex<double>> last;
    auto h = random_vector(rng, 64);
    for (int k = 0; k < 20; ++k) {
        for (auto& v : h) v += rng.cnormal(0.0001);
        const auto rec = det.decide(snapshot_of(h, static_cast<std::uint64_t>(k)));
        CHECK(rec.verdict == Verdict::accept);
        last = h;
    }
    CHECK(det.reference()->h == last);
}

TEST_CASE("raising the threshold never turns an accept into a drop") {
    // replay one fixed error trace at two thresholds
    cpm::Rng rng(14);
    std::vector<double> trace(200);
    for (auto& e : trace) e = std::abs(rng.normal());
    const double low = 0.5;
    const double high = 1.5;
    for (const double e : trace) {
        const bool accept_low = e < low;
        const bool accept_high = e < high;
        if (accept_low) CHECK(accept_high);
    }
}

}  // TEST_SUITE
