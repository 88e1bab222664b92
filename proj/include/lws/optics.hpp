#ifndef LWS_OPTICS_HPP
#define LWS_OPTICS_HPP

// Lambertian LED propagation and photodetector readout.
//
// Angles are radians and powers are watts throughout. Decibel quantities
// are 10*log10 of the linear value (dBW for powers).

namespace lws::optics {

// n = -ln 2 / ln cos(half_power_angle). Throws DomainError unless
// 0 < angle < pi/2.
double lambertian_order(double half_power_angle_rad);

class LightSource {
public:
    LightSource(double transmit_power_w, double half_power_angle_rad);

    double transmit_power_w() const noexcept { return transmit_power_w_; }
    double half_power_angle_rad() const noexcept { return half_power_angle_rad_; }
    double lambertian_order() const noexcept { return lambertian_order_; }

private:
    double transmit_power_w_;
    double half_power_angle_rad_;
    double lambertian_order_;
};

struct Photodetector {
    double area_m2 = 1e-4;
    double responsivity_a_per_w = 1.0;
    double dark_current_a = 0.0;
    double transimpedance_gain_v_per_a = 1.0;

    // Throws ValidationError naming the first field out of range.
    void validate() const;

    // Unit responsivity, unit gain, no dark current: voltage equals power.
    static Photodetector unit() { return {}; }
};

struct LinkGeometry {
    double distance_m = 1.0;
    double irradiance_angle_rad = 0.0;
    double incidence_angle_rad = 0.0;
    double lateral_offset_m = 0.0;

    void validate() const;
};

// Path-loss pair of P = K * D^-gamma plus the Lambertian order n.
struct ChannelParams {
    double k_lin = 1e-4;
    double gamma = 2.0;
    double lambertian_order = 1.0;

    void validate() const;

    double k_db() const;
    static ChannelParams from_db(double k_db, double gamma, double lambertian_order);
    // K = (n+1) A Pt / (2 pi) for a given emitter and detector area.
    static ChannelParams from_source(const LightSource& source, double area_m2, double gamma);
};

double to_db(double linear);
double from_db(double db);

// Received power for an arbitrary link. Zero outside the field of view
// (incidence angle >= half-power angle).
double received_power_lambertian(const LightSource& source, const Photodetector& detector,
                                 const LinkGeometry& geom, double gamma);

// V = g * (i_d + R * P).
double detector_voltage(const Photodetector& detector, double received_power_w);

// Inverse of detector_voltage. Requires R > 0; the result may be negative
// for noisy readings below the dark-current floor.
double power_from_voltage(const Photodetector& detector, double voltage_v);

double simplified_power(const ChannelParams& ch, double distance_m);
double distance_from_power(const ChannelParams& ch, double power_w);

inline constexpr double kDefaultFarThreshold = 0.01;

// Near-field correction 5(n+1) log10(1 - d^2/D^2).
double near_field_gain_db(double lambertian_order, double distance_m, double lateral_offset_m);

// Vehicular model in dBW: the far branch applies while d^2/D^2 < far_threshold.
double conditional_power_db(const ChannelParams& ch, double distance_m, double lateral_offset_m,
                            double far_threshold = kDefaultFarThreshold);

// Curved-road model K cos^(n+1)(beta/2) / (2 r sin(beta/2))^gamma,
// strictly decreasing in beta on (0, pi).
double curved_power(const ChannelParams& ch, double radius_m, double beta_rad);

}  // namespace lws::optics

#endif  // LWS_OPTICS_HPP
