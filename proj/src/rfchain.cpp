// SPDX-License-Identifier: Apache-2.0

#include "wpli/rfchain.hpp"

#include "wpli/dsp.hpp"

#include <Eigen/Dense>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wpli::rfchain {

void MixerModel::validate() const
{
    if (!(carrier_hz > 0.0))
        throw std::invalid_argument("mixer carrier frequency must be positive");
    if (!(std::abs(quadrature_error) < kPi / 2.0))
        throw std::invalid_argument("quadrature error must satisfy |zeta| < pi/2");
}

void PaPowerSeries::validate() const
{
    if (odd.empty() || odd.size() > 5)
        throw std::invalid_argument("PA series must have 1..5 odd coefficients (order <= 9)");
    if (odd.front() == cplx(0.0, 0.0))
        throw std::invalid_argument("PA linear coefficient must be nonzero");
    for (const auto& a : odd)
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
            throw std::invalid_argument("PA coefficients must be finite");
}

double envelope_factor(int n)
{
    // C(2n+1, n+1) / 4^n
    double c = 1.0;
    for (int i = 1; i <= n; ++i)
        c = c * (n + 1 + i) / i;
    return c / std::ldexp(1.0, 2 * n);
}

ComplexSignal mix_up(const ComplexSignal& baseband, const MixerModel& mixer)
{
    baseband.validate();
    mixer.validate();
    if (baseband.domain != SignalDomain::Baseband)
        throw std::invalid_argument("mix_up expects a baseband signal");
    const cplx rot = std::polar(1.0, mixer.quadrature_error / 2.0);
    const cplx jrot = cplx(0.0, 1.0) * std::conj(rot);
    ComplexSignal out;
    out.sample_rate_hz = baseband.sample_rate_hz;
    out.domain = SignalDomain::Passband;
    out.carrier_hz = mixer.carrier_hz;
    out.samples.resize(baseband.size());
    for (std::size_t n = 0; n < baseband.size(); ++n)
        out.samples[n] = baseband.samples[n].real() * rot + baseband.samples[n].imag() * jrot;
    return out;
}

std::vector<double> real_passband(const ComplexSignal& passband)
{
    passband.validate();
    std::vector<double> out(passband.size());
    const double w = 2.0 * kPi * passband.carrier_hz / passband.sample_rate_hz;
    for (std::size_t n = 0; n < passband.size(); ++n)
        out[n] = (passband.samples[n] * std::polar(1.0, w * static_cast<double>(n))).real();
    return out;
}

std::vector<cplx> pa_envelope(const std::vector<cplx>& z, const PaPowerSeries& pa)
{
    pa.validate();
    std::vector<cplx> b(pa.odd.size());
    for (std::size_t p = 0; p < b.size(); ++p)
        b[p] = pa.odd[p] * envelope_factor(static_cast<int>(p));
    std::vector<cplx> w(z.size());
    for (std::size_t n = 0; n < z.size(); ++n) {
        const double r2 = std::norm(z[n]);
        // Horner in |z|^2
        cplx acc = b.back();
        for (std::size_t p = b.size() - 1; p-- > 0;)
            acc = acc * r2 + b[p];
        w[n] = acc * z[n];
    }
    return w;
}

PaResult pa_apply(const ComplexSignal& passband, const PaPowerSeries& pa, const BandpassFilter& bp)
{
    passband.validate();
    pa.validate();
    PaResult res;
    res.signal = passband;

    double lin = 0.0;
    double high = 0.0;
    double peak2 = 0.0;
    const cplx b0 = pa.odd[0];
    for (const auto& s : passband.samples) {
        const cplx l = b0 * s;
        lin += std::norm(l);
        peak2 = std::max(peak2, std::norm(s));
    }
    res.signal.samples = pa_envelope(passband.samples, pa);
    for (std::size_t n = 0; n < passband.size(); ++n)
        high += std::norm(res.signal.samples[n] - b0 * passband.samples[n]);
    res.higher_to_linear_power = lin > 0.0 ? high / lin : 0.0;
    if (res.higher_to_linear_power > 1.0)
        res.divergence_warning = true;
    if (pa.odd.size() > 1 && std::abs(pa.odd[1]) * peak2 >= std::abs(pa.odd[0]))
        res.divergence_warning = true;

    if (bp.half_bandwidth_hz > 0.0 && bp.half_bandwidth_hz < passband.sample_rate_hz)
        res.signal.samples = dsp::brickwall(res.signal.samples, passband.sample_rate_hz, bp.center_offset_hz,
                                            bp.half_bandwidth_hz);
    return res;
}

namespace {

struct Components {
    std::size_t P = 0;
    std::size_t n = 0;
    std::vector<std::vector<std::vector<cplx>>> S; // natural order
};

Components compute_components(const ComplexSignal& input, std::size_t P, std::size_t segment)
{
    input.validate();
    const int order = 2 * static_cast<int>(P) - 1;
    if (segment < static_cast<std::size_t>(16 * order))
        throw NumericalError("regrowth window of " + std::to_string(segment) + " samples is too short for order " +
                             std::to_string(order) + " (need >= " + std::to_string(16 * order) + ")");
    if (input.size() < segment)
        throw NumericalError("regrowth input shorter than one correlation window");
    std::vector<std::vector<cplx>> streams(P, std::vector<cplx>(input.size()));
    for (std::size_t n = 0; n < input.size(); ++n) {
        const double r2 = std::norm(input.samples[n]);
        cplx v = input.samples[n];
        for (std::size_t p = 0; p < P; ++p) {
            streams[p][n] = v;
            v *= r2;
        }
    }
    Components c;
    c.P = P;
    c.n = segment;
    c.S = dsp::welch_cross(streams, input.sample_rate_hz, segment);
    return c;
}

std::vector<double> combine(const Components& c, const std::vector<cplx>& b)
{
    std::vector<double> psd(c.n, 0.0);
    for (std::size_t p = 0; p < c.P; ++p)
        for (std::size_t q = 0; q < c.P; ++q) {
            const cplx w = b[p] * std::conj(b[q]);
            for (std::size_t k = 0; k < c.n; ++k)
                psd[k] += (w * c.S[p][q][k]).real();
        }
    return psd;
}

std::vector<cplx> scaled_coefficients(const PaPowerSeries& pa)
{
    std::vector<cplx> b(pa.odd.size());
    for (std::size_t p = 0; p < b.size(); ++p)
        b[p] = pa.odd[p] * envelope_factor(static_cast<int>(p));
    return b;
}

} // namespace

RegrowthSpectrum regrowth_spectrum(const ComplexSignal& input, const PaPowerSeries& pa, std::size_t segment)
{
    pa.validate();
    const auto c = compute_components(input, pa.odd.size(), segment);
    RegrowthSpectrum out;
    out.frequencies_hz = dsp::fftshift(dsp::fft_frequencies(segment, input.sample_rate_hz));
    out.psd = dsp::fftshift(combine(c, scaled_coefficients(pa)));
    for (auto& v : out.psd)
        v = std::max(v, 0.0);
    for (std::size_t p = 0; p < c.P; ++p)
        for (std::size_t q = 0; q < c.P; ++q)
            out.component_terms[{static_cast<int>(p), static_cast<int>(q)}] = dsp::fftshift(c.S[p][q]);
    return out;
}

namespace {

struct FitProblem {
    const Components* comp = nullptr;
    std::vector<double> log_meas; // natural order, 10log10
    std::vector<std::size_t> bins;
    std::vector<double> scale;    // per-parameter bound
    double bound = 10.0;
};

std::vector<cplx> params_to_b(const double* x, std::size_t P)
{
    std::vector<cplx> b(P);
    b[0] = cplx(std::abs(x[0]), 0.0);
    for (std::size_t p = 1; p < P; ++p)
        b[p] = cplx(x[2 * p - 1], x[2 * p]) * envelope_factor(static_cast<int>(p));
    return b;
}

double fit_loss(const gsl_vector* v, void* params)
{
    const auto* prob = static_cast<const FitProblem*>(params);
    const std::size_t dim = v->size;
    std::vector<double> x(dim);
    double penalty = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        x[i] = gsl_vector_get(v, i);
        const double lim = prob->bound * prob->scale[i];
        if (std::abs(x[i]) > lim) {
            penalty += 1e3 * (std::abs(x[i]) / lim - 1.0);
            x[i] = std::copysign(lim, x[i]);
        }
    }
    const auto b = params_to_b(x.data(), prob->comp->P);
    const auto pred = combine(*prob->comp, b);
    double acc = 0.0;
    for (std::size_t k : prob->bins) {
        const double lp = 10.0 * std::log10(std::max(pred[k], 1e-300));
        const double d = lp - prob->log_meas[k];
        acc += d * d;
    }
    return acc / static_cast<double>(prob->bins.size()) + penalty;
}

struct SimplexOutcome {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

SimplexOutcome run_simplex(FitProblem& prob, const std::vector<double>& x0, const std::vector<double>& step,
                           const FitOptions& opt)
{
    const std::size_t dim = x0.size();
    gsl_multimin_function fn{&fit_loss, dim, &prob};
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* ss = gsl_vector_alloc(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        gsl_vector_set(x, i, x0[i]);
        gsl_vector_set(ss, i, step[i]);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(s, &fn, x, ss);

    SimplexOutcome out;
    double size_ref = 0.0;
    for (double v : step)
        size_ref = std::max(size_ref, std::abs(v));
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS)
            break;
        const double size = gsl_multimin_fminimizer_size(s);
        if (size < opt.tolerance * size_ref) {
            out.converged = true;
            break;
        }
    }
    out.iterations = it;
    out.f = s->fval;
    out.x.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
        out.x[i] = gsl_vector_get(s->x, i);
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(x);
    gsl_vector_free(ss);
    return out;
}

double basis_condition(const Components& c, const std::vector<std::size_t>& bins)
{
    std::vector<std::vector<double>> cols;
    auto add = [&](std::vector<double> col) {
        double nrm = 0.0;
        for (double v : col)
            nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm > 0.0) {
            for (auto& v : col)
                v /= nrm;
            cols.push_back(std::move(col));
        }
    };
    for (std::size_t p = 0; p < c.P; ++p)
        for (std::size_t q = p; q < c.P; ++q) {
            std::vector<double> re, im;
            double nre = 0.0, nim = 0.0;
            for (std::size_t k : bins) {
                re.push_back(c.S[p][q][k].real());
                im.push_back(c.S[p][q][k].imag());
                nre += re.back() * re.back();
                nim += im.back() * im.back();
            }
            add(re);
            // Imaginary cross terms that vanish for conjugation-symmetric inputs are structural zeros.
            if (p != q && nim > 1e-12 * nre)
                add(im);
        }
    const auto m = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd G(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < cols[static_cast<std::size_t>(i)].size(); ++k)
                acc += cols[static_cast<std::size_t>(i)][k] * cols[static_cast<std::size_t>(j)][k];
            G(i, j) = acc;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0))
        return std::numeric_limits<double>::infinity();
    return std::sqrt(lmax / lmin);
}

} // namespace

FitResult fit_pa_coefficients(const std::vector<double>& measured_psd, const ComplexSignal& reference_input,
                              int order, const FitOptions& options)
{
    if (order < 1 || order > 9 || order % 2 == 0)
        throw std::invalid_argument("fit order must be odd and <= 9");
    const std::size_t P = static_cast<std::size_t>(order + 1) / 2;
    const std::size_t n = measured_psd.size();
    const auto comp = compute_components(reference_input, P, n);

    FitProblem prob;
    prob.comp = &comp;
    prob.bound = options.coefficient_bound;
    // measured_psd arrives in ascending-frequency order
    std::vector<double> natural(n);
    const std::size_t h = n / 2;
    for (std::size_t i = 0; i < n; ++i)
        natural[(i + n - h) % n] = measured_psd[i];

    prob.log_meas.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(natural[k]) || natural[k] < 0.0)
            throw DataError("measured PSD contains negative or non-finite values");
        if (natural[k] > 0.0) {
            prob.log_meas[k] = 10.0 * std::log10(natural[k]);
            prob.bins.push_back(k);
        }
    }
    if (prob.bins.size() < 2 * P)
        throw DataError("measured PSD has too few positive bins to fit");

    FitResult res;
    res.condition = basis_condition(comp, prob.bins);
    if (!(res.condition <= options.max_condition))
        throw NumericalError("ill-conditioned PA fit: component spectra condition estimate " +
                             std::to_string(res.condition));

    double sum_meas = 0.0;
    double sum_lin = 0.0;
    for (std::size_t k : prob.bins) {
        sum_meas += natural[k];
        sum_lin += comp.S[0][0][k].real();
    }
    const double a1 = std::sqrt(sum_meas / sum_lin);
    const double rms2 = reference_input.mean_power();

    const std::size_t dim = 2 * P - 1;
    prob.scale.assign(dim, 0.0);
    std::vector<double> step(dim, 0.0);
    prob.scale[0] = a1;
    step[0] = 0.1 * a1;
    for (std::size_t p = 1; p < P; ++p) {
        const double s = a1 / std::pow(rms2, static_cast<double>(p));
        prob.scale[2 * p - 1] = prob.scale[2 * p] = s;
        step[2 * p - 1] = step[2 * p] = 0.05 * s;
    }

    SimplexOutcome best;
    best.f = std::numeric_limits<double>::infinity();
    int total_iterations = 0;
    for (int sign : {+1, -1}) {
        std::vector<double> x0(dim, 0.0);
        x0[0] = a1;
        if (P > 1)
            x0[2] = sign * 0.01 * prob.scale[2];
        auto out = run_simplex(prob, x0, step, options);
        // Restart from the optimum until the objective stops improving.
        for (int r = 0; r < 4 && out.converged; ++r) {
            std::vector<double> rstep(dim);
            for (std::size_t i = 0; i < dim; ++i)
                rstep[i] = 0.1 * step[i];
            auto again = run_simplex(prob, out.x, rstep, options);
            total_iterations += again.iterations;
            if (!again.converged || again.f >= out.f * (1.0 - 1e-9))
                break;
            out = again;
        }
        total_iterations += out.iterations;
        if (!out.converged)
            continue;
        if (out.f < best.f)
            best = out;
    }
    if (!std::isfinite(best.f))
        throw NumericalError("PA fit did not converge within " + std::to_string(options.max_iterations) +
                             " simplex iterations");

    res.pa.odd.resize(P);
    res.pa.odd[0] = cplx(std::abs(best.x[0]), 0.0);
    for (std::size_t p = 1; p < P; ++p)
        res.pa.odd[p] = cplx(best.x[2 * p - 1], best.x[2 * p]);
    res.residual_db = std::sqrt(best.f);
    res.iterations = total_iterations;
    return res;
}

} // namespace wpli::rfchain
