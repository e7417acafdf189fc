#include "condexp/two_slit.hpp"

#include "condexp/errors.hpp"
#include "condexp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

namespace condexp {

double SlitGeometry::resolved_span() const {
    return span > 0.0 ? span : 10.0 * wavelength * screen_distance / slit_separation;
}

double SlitGeometry::bin_spacing() const { return 2.0 * resolved_span() / static_cast<double>(bins - 1); }

std::vector<double> SlitGeometry::positions() const {
    std::vector<double> out(bins);
    const double ds = bin_spacing();
    const auto mid = static_cast<std::ptrdiff_t>(bins / 2);
    for (std::size_t k = 0; k < bins; ++k) out[k] = static_cast<double>(static_cast<std::ptrdiff_t>(k) - mid) * ds;
    return out;
}

void SlitGeometry::validate() const {
    for (double v : {slit_width, slit_separation, wavelength, screen_distance}) {
        if (!(std::isfinite(v) && v > 0.0)) throw ValidationError("slit geometry lengths must be positive and finite");
    }
    if (!(span >= 0.0 && std::isfinite(span))) throw ValidationError("screen span must be nonnegative and finite");
    if (slit_separation <= slit_width) throw ValidationError("slit separation must exceed the slit width");
    if (bins < 3 || bins % 2 == 0) throw ValidationError("screen needs an odd number of bins, at least 3");
}

std::vector<std::string> SlitGeometry::warnings() const {
    std::vector<std::string> out;
    if (screen_distance < slit_separation * slit_separation / wavelength) {
        out.push_back("screen distance is below d^2/lambda; the far-field patterns are only approximate");
    }
    return out;
}

std::string to_string(SlitTag tag) {
    switch (tag) {
    case SlitTag::slit1_only:
        return "slit1-only";
    case SlitTag::slit2_only:
        return "slit2-only";
    case SlitTag::both_open:
        return "both-open";
    }
    return "unknown";
}

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

SlitContext normalized(SlitTag tag, std::vector<double> positions, std::vector<double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (auto& w : weights) w /= total;
    return {tag, std::move(positions), std::move(weights)};
}

} // namespace

SlitContexts build_contexts(const SlitGeometry& g) {
    g.validate();
    const auto s = g.positions();
    const double scale = std::numbers::pi / (g.wavelength * g.screen_distance);
    const double center = 0.5 * g.slit_separation;
    std::vector<double> w1(s.size());
    std::vector<double> w2(s.size());
    std::vector<double> w12(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double e1 = sinc(scale * g.slit_width * (s[k] + center));
        const double e2 = sinc(scale * g.slit_width * (s[k] - center));
        const double envelope = sinc(scale * g.slit_width * s[k]);
        const double fringe = std::cos(scale * g.slit_separation * s[k]);
        w1[k] = e1 * e1;
        w2[k] = e2 * e2;
        w12[k] = envelope * envelope * fringe * fringe;
    }
    return {normalized(SlitTag::slit1_only, s, std::move(w1)), normalized(SlitTag::slit2_only, s, std::move(w2)),
            normalized(SlitTag::both_open, s, std::move(w12))};
}

void validate_context(const SlitContext& c) {
    if (c.distribution.empty() || c.distribution.size() != c.positions.size()) {
        throw ValidationError("slit context needs one probability per screen bin");
    }
    double total = 0.0;
    for (double p : c.distribution) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("slit context has a negative or non-finite probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("slit context distribution does not sum to 1");
}

AdditivityReport additivity_report(const SlitContext& c1, const SlitContext& c2, const SlitContext& c12,
                                   double tolerance) {
    if (c1.positions != c2.positions || c1.positions != c12.positions || c1.distribution.size() != c1.positions.size() ||
        c2.distribution.size() != c1.positions.size() || c12.distribution.size() != c1.positions.size()) {
        throw ShapeError("slit contexts are defined on different screen grids");
    }
    AdditivityReport r;
    r.positions = c1.positions;
    r.deficit.resize(r.positions.size());
    for (std::size_t k = 0; k < r.deficit.size(); ++k) {
        r.deficit[k] = c12.distribution[k] - 0.5 * (c1.distribution[k] + c2.distribution[k]);
        r.max_abs_deficit = std::max(r.max_abs_deficit, std::abs(r.deficit[k]));
        r.deficit_sum += r.deficit[k];
    }
    r.classical_additive = r.max_abs_deficit < tolerance;
    return r;
}

std::vector<std::uint64_t> sample_screen_hits(const SlitContext& c, std::uint64_t runs, std::uint64_t seed,
                                              std::size_t threads) {
    validate_context(c);
    if (runs == 0) throw EmptyResultError("screen sampling needs at least one run");
    std::vector<double> cdf(c.distribution.size());
    std::partial_sum(c.distribution.begin(), c.distribution.end(), cdf.begin());

    const std::size_t workers = static_cast<std::size_t>(std::clamp<std::uint64_t>(threads, 1, runs));
    std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(cdf.size(), 0));
    auto work = [&](std::size_t w) {
        const std::uint64_t lo = runs * w / workers;
        const std::uint64_t hi = runs * (w + 1) / workers;
        for (std::uint64_t k = lo; k < hi; ++k) {
            auto rng = CounterRng::for_run(seed, k);
            ++partial[w][rng.sample(cdf)];
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    std::vector<std::uint64_t> histogram(cdf.size(), 0);
    for (const auto& p : partial) {
        for (std::size_t k = 0; k < p.size(); ++k) histogram[k] += p[k];
    }
    return histogram;
}

} // namespace condexp
