#include "sfv/estimator.hpp"

#include <cmath>
#include <string>

#include "sfv/error.hpp"
#include "sfv/parallel.hpp"

namespace sfv {

double phi(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::exp(-s / static_cast<double>(v.size()));
}

double phi(const GridVector& v) { return phi(v.values()); }

EstimatorResult summarize(std::vector<double> values, double z) {
    EstimatorResult r;
    r.n_replicas = values.size();
    if (values.empty()) throw DomainError("summarize needs at least one value");
    double s = 0.0;
    for (double x : values) s += x;
    r.mean = s / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double x : values) ss += (x - r.mean) * (x - r.mean);
        const double var = ss / static_cast<double>(values.size() - 1);
        r.std_error = std::sqrt(var / static_cast<double>(values.size()));
    }
    r.ci_low = r.mean - z * r.std_error;
    r.ci_high = r.mean + z * r.std_error;
    r.replica_means = std::move(values);
    return r;
}

namespace {

std::uint64_t steps_for(double t, double dt) {
    const double s = t / dt;
    return static_cast<std::uint64_t>(std::llround(s));
}

}  // namespace

void ErgodicSetup::validate() const {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    const double b = effective_burn_in();
    if (!(b >= 0.0)) throw DomainError("burn_in must be >= 0");
    if (!(t_final > b)) throw DomainError("T must exceed the burn-in");
    if (replicas < 2) throw DomainError("need at least 2 replicas");
    if (steps_for(t_final, dt) <= steps_for(b, dt)) throw DomainError("no steps left after burn-in");
    if (!(z > 0.0)) throw DomainError("z must be positive");
    if (substeps == 0) throw DomainError("substeps must be >= 1");
}

ErgodicOutput ergodic_run(const ErgodicSetup& setup, const NumericalFlux& nf, const Observable& obs) {
    setup.validate();
    const GridSpec spec(setup.n_cells);
    const auto dn = discretize(setup.noise, spec);
    StepperConfig cfg;
    cfg.nu = setup.nu;
    cfg.dt = setup.dt;
    cfg.validate();
    const GridVector u0 = setup.u0 ? project(*setup.u0, spec) : GridVector::zeros(spec);

    const std::uint64_t n_total = steps_for(setup.t_final, setup.dt);
    const std::uint64_t n_burn = steps_for(setup.effective_burn_in(), setup.dt);
    const std::uint64_t n_avg = n_total - n_burn;
    const std::uint64_t every = setup.record_every;
    const std::size_t n_records = every == 0 ? 0 : static_cast<std::size_t>(n_avg / every);

    std::vector<double> means(setup.replicas, 0.0);
    std::vector<std::vector<double>> running(setup.replicas);
    parallel_for(setup.replicas, setup.threads, [&](std::size_t r) {
        Stepper stepper(nf, dn, cfg);
        auto state = TrajectoryState::initial(u0, RngStream(setup.seed, r, 0, setup.substeps));
        auto& rec = running[r];
        rec.reserve(n_records);
        double acc = 0.0;
        try {
            for (std::uint64_t l = 1; l <= n_total; ++l) {
                stepper.step(state);
                if (l <= n_burn) continue;
                acc += obs(state.u);
                const std::uint64_t k = l - n_burn;
                if (every != 0 && k % every == 0) rec.push_back(acc / static_cast<double>(k));
            }
        } catch (const StepError& e) {
            throw StepError(std::string("replica ") + std::to_string(r) + ": " + e.what(), e.step(), r);
        }
        means[r] = acc / static_cast<double>(n_avg);
    });

    ErgodicOutput out;
    out.result = summarize(std::move(means), setup.z);
    out.result.horizon = setup.t_final;
    out.result.burn_in = setup.effective_burn_in();
    out.record_times.resize(n_records);
    out.running_mean.assign(n_records, 0.0);
    for (std::size_t j = 0; j < n_records; ++j) {
        out.record_times[j] = static_cast<double>(n_burn + (j + 1) * every) * setup.dt;
        for (std::size_t r = 0; r < setup.replicas; ++r) out.running_mean[j] += running[r][j];
        out.running_mean[j] /= static_cast<double>(setup.replicas);
    }
    return out;
}

EstimatorResult ergodic_estimate(const ErgodicSetup& setup, const NumericalFlux& nf, const Observable& obs) {
    ErgodicSetup s = setup;
    s.record_every = 0;
    return ergodic_run(s, nf, obs).result;
}

WeakErrorResult combine_weak_error(const EstimatorResult& est, const EstimatorResult& ref, double z) {
    WeakErrorResult w;
    w.estimate = est;
    w.reference = ref;
    w.difference = est.mean - ref.mean;
    w.error.mean = std::abs(w.difference);
    w.error.std_error = std::hypot(est.std_error, ref.std_error);
    w.error.ci_low = w.error.mean - z * w.error.std_error;
    w.error.ci_high = w.error.mean + z * w.error.std_error;
    w.error.n_replicas = est.n_replicas;
    w.error.horizon = est.horizon;
    w.error.burn_in = est.burn_in;
    return w;
}

WeakErrorResult combine_paired_weak_error(const EstimatorResult& est, const EstimatorResult& ref, double z) {
    if (est.replica_means.size() != ref.replica_means.size()) {
        throw DomainError("paired weak error needs the same replica count");
    }
    std::vector<double> diff(est.replica_means.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = est.replica_means[i] - ref.replica_means[i];
    const auto d = summarize(std::move(diff), z);
    WeakErrorResult w;
    w.estimate = est;
    w.reference = ref;
    w.difference = d.mean;
    w.error.mean = std::abs(d.mean);
    w.error.std_error = d.std_error;
    w.error.ci_low = w.error.mean - z * d.std_error;
    w.error.ci_high = w.error.mean + z * d.std_error;
    w.error.n_replicas = d.n_replicas;
    w.error.horizon = est.horizon;
    w.error.burn_in = est.burn_in;
    w.error.replica_means = d.replica_means;
    return w;
}

WeakErrorResult weak_error(const ErgodicSetup& common, const NumericalFlux& nf, double dt, double dt_ref,
                           std::optional<std::uint64_t> seed_ref) {
    ErgodicSetup a = common;
    a.dt = dt;
    ErgodicSetup b = common;
    b.dt = dt_ref;
    b.seed = seed_ref ? *seed_ref : common.seed + 1;
    const Observable f = [](const GridVector& v) { return phi(v); };
    const auto ea = ergodic_estimate(a, nf, f);
    const auto eb = ergodic_estimate(b, nf, f);
    return combine_weak_error(ea, eb, common.z);
}

WeakErrorResult weak_error_coupled(const ErgodicSetup& common, const NumericalFlux& nf, double dt,
                                   double dt_ref) {
    const double ratio = dt / dt_ref;
    const auto r = std::llround(ratio);
    if (!(dt_ref > 0.0) || r < 1 || std::abs(ratio - static_cast<double>(r)) > 1e-9 * ratio) {
        throw DomainError("coupled weak error needs dt to be an integer multiple of dt_ref");
    }
    ErgodicSetup a = common;
    a.dt = dt;
    a.substeps = static_cast<std::uint64_t>(r);
    ErgodicSetup b = common;
    b.dt = dt_ref;
    b.substeps = 1;
    const Observable f = [](const GridVector& v) { return phi(v); };
    return combine_paired_weak_error(ergodic_estimate(a, nf, f), ergodic_estimate(b, nf, f), common.z);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("slope needs at least two (x, y) pairs");
    double sx = 0.0, sy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log slope needs positive values");
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw DomainError("log-log slope needs distinct x values");
    return sxy / sxx;
}

}  // namespace sfv
