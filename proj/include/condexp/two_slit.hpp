#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace condexp {

/// Far-field two-slit arrangement. Lengths share one unit.
struct SlitGeometry {
    double slit_width = 1.0e-4;       // a
    double slit_separation = 5.0e-4;  // d, center to center
    double wavelength = 5.0e-7;       // lambda
    double screen_distance = 1.0;     // L
    std::size_t bins = 401;           // odd, so one bin sits at s = 0
    /// Half-width of the binned screen; 0 selects 10 * lambda * L / d.
    double span = 0.0;

    double resolved_span() const;
    double bin_spacing() const;
    /// Bin centers s_k, symmetric about 0.
    std::vector<double> positions() const;

    /// Throws ValidationError for nonpositive lengths, d <= a, or an even/too small bin count.
    void validate() const;
    /// Warnings for a geometry outside the far-field regime (L < d^2 / lambda).
    std::vector<std::string> warnings() const;
};

enum class SlitTag { slit1_only, slit2_only, both_open };

std::string to_string(SlitTag tag);

/// Detection probabilities over screen bins for one arrangement.
struct SlitContext {
    SlitTag tag = SlitTag::both_open;
    std::vector<double> positions;
    std::vector<double> distribution;
};

struct SlitContexts {
    SlitContext slit1;
    SlitContext slit2;
    SlitContext both;
};

/// Slit 1 sits at -d/2 and slit 2 at +d/2. Single-slit patterns are
/// sinc^2(pi a (s -+ s_c)/(lambda L)) about each slit's projected center s_c;
/// the both-open pattern is sinc^2(pi a s/(lambda L)) cos^2(pi d s/(lambda L)).
/// Each is normalized over the bins.
SlitContexts build_contexts(const SlitGeometry& g);

/// Throws ValidationError unless the context is a nonnegative distribution summing to 1
/// within 1e-12 on a grid of matching size.
void validate_context(const SlitContext& c);

struct AdditivityReport {
    std::vector<double> positions;
    /// p12 - (p1 + p2)/2 per bin.
    std::vector<double> deficit;
    double max_abs_deficit = 0.0;
    double deficit_sum = 0.0;
    bool classical_additive = false;
};

inline constexpr double kAdditivityTolerance = 1e-9;

/// Throws ShapeError when the three grids differ.
AdditivityReport additivity_report(const SlitContext& c1, const SlitContext& c2, const SlitContext& c12,
                                   double tolerance = kAdditivityTolerance);

/// Histogram of `runs` screen hits, hit k drawn from the counter stream (seed, k).
/// Throws EmptyResultError for zero runs.
std::vector<std::uint64_t> sample_screen_hits(const SlitContext& c, std::uint64_t runs, std::uint64_t seed,
                                              std::size_t threads = 1);

} // namespace condexp
