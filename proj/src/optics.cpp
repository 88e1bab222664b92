#include "lws/optics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lws/errors.hpp"

namespace lws::optics {

namespace {

void require_finite_positive(double value, const char* field) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(field, "must be positive and finite");
    }
}

void require_finite_nonnegative(double value, const char* field) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw ValidationError(field, "must be non-negative and finite");
    }
}

}  // namespace

double lambertian_order(double half_power_angle_rad) {
    if (!(half_power_angle_rad > 0.0 && half_power_angle_rad < std::numbers::pi / 2.0)) {
        throw DomainError("half-power angle must lie in (0, pi/2), got " +
                          std::to_string(half_power_angle_rad));
    }
    const double c = std::cos(half_power_angle_rad);
    const double log_c = std::log(c);
    if (!(log_c < 0.0)) throw DomainError("half-power angle too small: ln(cos) underflows to 0");
    return -std::numbers::ln2 / log_c;
}

LightSource::LightSource(double transmit_power_w, double half_power_angle_rad)
    : transmit_power_w_(transmit_power_w),
      half_power_angle_rad_(half_power_angle_rad),
      lambertian_order_(0.0) {
    require_finite_positive(transmit_power_w, "transmit_power_w");
    lambertian_order_ = optics::lambertian_order(half_power_angle_rad);
}

void Photodetector::validate() const {
    require_finite_positive(area_m2, "area_m2");
    require_finite_nonnegative(responsivity_a_per_w, "responsivity_a_per_w");
    require_finite_nonnegative(dark_current_a, "dark_current_a");
    require_finite_positive(transimpedance_gain_v_per_a, "transimpedance_gain_v_per_a");
}

void LinkGeometry::validate() const {
    require_finite_positive(distance_m, "distance_m");
    constexpr double half_pi = std::numbers::pi / 2.0;
    if (!(irradiance_angle_rad >= 0.0 && irradiance_angle_rad <= half_pi)) {
        throw ValidationError("irradiance_angle_rad", "must lie in [0, pi/2]");
    }
    if (!(incidence_angle_rad >= 0.0 && incidence_angle_rad <= half_pi)) {
        throw ValidationError("incidence_angle_rad", "must lie in [0, pi/2]");
    }
    require_finite_nonnegative(lateral_offset_m, "lateral_offset_m");
    if (lateral_offset_m > distance_m) {
        throw ValidationError("lateral_offset_m", "cannot exceed distance_m");
    }
}

void ChannelParams::validate() const {
    require_finite_positive(k_lin, "k_lin");
    require_finite_positive(gamma, "gamma");
    require_finite_positive(lambertian_order, "lambertian_order");
}

double ChannelParams::k_db() const { return to_db(k_lin); }

ChannelParams ChannelParams::from_db(double k_db, double gamma, double lambertian_order) {
    ChannelParams ch{optics::from_db(k_db), gamma, lambertian_order};
    ch.validate();
    return ch;
}

ChannelParams ChannelParams::from_source(const LightSource& source, double area_m2, double gamma) {
    require_finite_positive(area_m2, "area_m2");
    const double n = source.lambertian_order();
    ChannelParams ch{(n + 1.0) * area_m2 * source.transmit_power_w() / (2.0 * std::numbers::pi), gamma, n};
    ch.validate();
    return ch;
}

double to_db(double linear) {
    if (!(linear > 0.0)) throw DomainError("dB conversion needs a positive value");
    return 10.0 * std::log10(linear);
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

double received_power_lambertian(const LightSource& source, const Photodetector& detector,
                                 const LinkGeometry& geom, double gamma) {
    detector.validate();
    geom.validate();
    require_finite_positive(gamma, "gamma");
    if (geom.incidence_angle_rad >= source.half_power_angle_rad()) return 0.0;

    const double n = source.lambertian_order();
    const double k = (n + 1.0) * detector.area_m2 * source.transmit_power_w() / (2.0 * std::numbers::pi);
    return k / std::pow(geom.distance_m, gamma) * std::pow(std::cos(geom.irradiance_angle_rad), n) *
           std::cos(geom.incidence_angle_rad);
}

double detector_voltage(const Photodetector& detector, double received_power_w) {
    if (!(received_power_w >= 0.0)) throw DomainError("received power must be non-negative");
    return detector.transimpedance_gain_v_per_a *
           (detector.dark_current_a + detector.responsivity_a_per_w * received_power_w);
}

double power_from_voltage(const Photodetector& detector, double voltage_v) {
    if (!(detector.responsivity_a_per_w > 0.0)) {
        throw DomainError("a detector with zero responsivity cannot be inverted");
    }
    return (voltage_v / detector.transimpedance_gain_v_per_a - detector.dark_current_a) /
           detector.responsivity_a_per_w;
}

double simplified_power(const ChannelParams& ch, double distance_m) {
    if (!(distance_m > 0.0)) throw DomainError("distance must be positive");
    return ch.k_lin * std::pow(distance_m, -ch.gamma);
}

double distance_from_power(const ChannelParams& ch, double power_w) {
    if (!(power_w > 0.0)) throw DomainError("power must be positive to invert the path loss");
    return std::pow(power_w / ch.k_lin, -1.0 / ch.gamma);
}

double near_field_gain_db(double lambertian_order, double distance_m, double lateral_offset_m) {
    if (!(distance_m > 0.0) || !(lateral_offset_m >= 0.0) || lateral_offset_m >= distance_m) {
        throw DomainError("near-field gain needs D > d >= 0");
    }
    const double ratio = lateral_offset_m / distance_m;
    return 5.0 * (lambertian_order + 1.0) * std::log10(1.0 - ratio * ratio);
}

double conditional_power_db(const ChannelParams& ch, double distance_m, double lateral_offset_m,
                            double far_threshold) {
    if (!(far_threshold > 0.0 && far_threshold < 1.0)) {
        throw DomainError("far_threshold must lie in (0, 1)");
    }
    const double gain_db = near_field_gain_db(ch.lambertian_order, distance_m, lateral_offset_m);
    const double far_db = ch.k_db() - ch.gamma * to_db(distance_m);
    const double ratio = lateral_offset_m / distance_m;
    return ratio * ratio < far_threshold ? far_db : far_db + gain_db;
}

double curved_power(const ChannelParams& ch, double radius_m, double beta_rad) {
    if (!(radius_m > 0.0)) throw DomainError("radius must be positive");
    if (!(beta_rad > 0.0 && beta_rad < std::numbers::pi)) {
        throw DomainError("beta must lie in (0, pi)");
    }
    const double half = beta_rad / 2.0;
    return ch.k_lin * std::pow(std::cos(half), ch.lambertian_order + 1.0) /
           std::pow(2.0 * radius_m * std::sin(half), ch.gamma);
}

}  // namespace lws::optics
