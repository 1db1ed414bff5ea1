#include "cartex/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cartex {

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::noiseless: return "noiseless";
        case Mode::noisy: return "noisy";
        case Mode::inpaint: return "inpaint";
    }
    return "noiseless";
}

Mode parse_mode(const std::string& text) {
    if (text == "noiseless") return Mode::noiseless;
    if (text == "noisy") return Mode::noisy;
    if (text == "inpaint") return Mode::inpaint;
    throw std::invalid_argument("unknown mode '" + text + "' (expected noiseless, noisy or inpaint)");
}

SolverParams SolverParams::noiseless_defaults() { return SolverParams{}; }

SolverParams SolverParams::noisy_defaults() {
    SolverParams p;
    p.mode = Mode::noisy;
    p.beta1 = 0.1;
    p.beta2 = 2.0;
    p.gamma = 2.5;
    p.iterations = 20;
    p.lambda_refresh = 10;
    return p;
}

SolverParams SolverParams::inpaint_defaults() {
    SolverParams p;
    p.mode = Mode::inpaint;
    p.iterations = 20;
    p.lambda_refresh = 10;
    return p;
}

SolverParams SolverParams::defaults_for(Mode mode) {
    switch (mode) {
        case Mode::noiseless: return noiseless_defaults();
        case Mode::noisy: return noisy_defaults();
        case Mode::inpaint: return inpaint_defaults();
    }
    return noiseless_defaults();
}

void SolverParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    require(gamma > 0.0 && std::isfinite(gamma), "gamma must be positive");
    require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    require(beta1 >= 0.0 && beta2 >= 0.0 && std::isfinite(beta1) && std::isfinite(beta2),
            "beta1 and beta2 must be non-negative");
    require(eta1 >= 0.0 && eta2 >= 0.0 && std::isfinite(eta1) && std::isfinite(eta2),
            "eta1 and eta2 must be non-negative");
    require(iterations >= 1, "iterations must be >= 1");
    require(lambda_refresh >= 1, "lambda_refresh must be >= 1");
    require(cg_tol > 0.0, "cg_tol must be positive");
    require(cg_maxit >= 1, "cg_maxit must be >= 1");
    require(outer_limit >= 1, "outer_limit must be >= 1");
    require(constraint_tol > 0.0, "constraint_tol must be positive");
}

CgResult cg_solve(const LinearMap& op, const StackedVector& rhs, double tol, int maxit,
                  const StackedVector& x0) {
    if (!(tol > 0.0)) throw std::invalid_argument("cg tolerance must be positive");
    if (!rhs.same_shape(x0)) throw std::invalid_argument("cg: rhs and x0 differ in shape");
    CgResult out;
    const double rhs_norm = norm2(rhs);
    if (!std::isfinite(rhs_norm)) throw NumericalError("cg: right-hand side is not finite");
    if (rhs_norm == 0.0) {
        // SPD system with zero data: the solution is zero.
        out.x = StackedVector::zeros(rhs.u.width(), rhs.u.height());
        return out;
    }
    out.x = x0;
    StackedVector r = rhs - op(out.x);
    double rr = dot(r, r);
    const double target = tol * rhs_norm;
    if (std::sqrt(rr) <= target) {
        out.relative_residual = std::sqrt(rr) / rhs_norm;
        return out;
    }
    StackedVector p = r;
    for (int it = 1; it <= maxit; ++it) {
        const StackedVector q = op(p);
        const double pq = dot(p, q);
        if (!std::isfinite(pq)) throw NumericalError("cg: operator produced non-finite values");
        if (pq <= 0.0) {
            // Direction in the null space; nothing more to gain.
            out.iterations = it - 1;
            break;
        }
        const double alpha = rr / pq;
        out.x.axpy(alpha, p);
        r.axpy(-alpha, q);
        const double rr_new = dot(r, r);
        if (!std::isfinite(rr_new)) throw NumericalError("cg: residual is not finite");
        out.iterations = it;
        if (std::sqrt(rr_new) <= target) {
            rr = rr_new;
            break;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        p *= beta;
        p += r;
    }
    out.relative_residual = std::sqrt(rr) / rhs_norm;
    out.converged = std::sqrt(rr) <= target;
    return out;
}

AugmentedCoefficients soft_threshold(const AugmentedCoefficients& y, const AugmentedCoefficients& lambda) {
    if (!y.same_shape(lambda)) throw std::invalid_argument("soft_threshold: shape mismatch");
    AugmentedCoefficients out = y;
    auto shrink = [](std::span<double> v, std::span<const double> t) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double a = std::abs(v[i]) - t[i];
            v[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
        }
    };
    shrink(out.w.values(), lambda.w.values());
    shrink(out.j.values(), lambda.j.values());
    return out;
}

namespace {

Image channel_energy(const CoefficientField& c) {
    Image phi(c.width(), c.height(), 0.0);
    for (std::size_t k = 0; k < c.channels(); ++k) {
        const auto plane = c.plane(k);
        for (std::size_t i = 0; i < plane.size(); ++i) phi[i] += plane[i] * plane[i];
    }
    return phi;
}

}  // namespace

Image texturelessness(const AugmentedSystem& system, const Image& u) {
    return channel_energy(system.laplacian().apply(system.apply_W(u)));
}

AugmentedCoefficients update_lambda(const Image& phi, const SolverParams& params, std::size_t channels) {
    auto lambda = AugmentedCoefficients::zeros(channels, phi.width(), phi.height());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!(phi[i] >= 0.0)) throw std::invalid_argument("texturelessness must be non-negative");
        const double l1 = params.beta1 * std::exp(-params.eta1 * phi[i]);
        const double l2 = params.beta2 * -std::expm1(-params.eta2 * phi[i]);
        for (std::size_t k = 1; k < channels; ++k) lambda.w.at(k, i) = l1;
        for (std::size_t k = 0; k < channels; ++k) lambda.j.at(k, i) = l2;
    }
    return lambda;
}

namespace {

Image masked(Image img, const PixelMask* mask) {
    if (mask) {
        for (std::size_t i = 0; i < img.size(); ++i) {
            if (!mask->known(i)) img[i] = 0.0;
        }
    }
    return img;
}

double sup_norm(const Image& img) {
    double m = 0.0;
    for (double v : img.pixels()) m = std::max(m, std::abs(v));
    return m;
}

double weighted_l1(const AugmentedCoefficients& lambda, const AugmentedCoefficients& d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.w.size(); ++i) s += lambda.w.values()[i] * std::abs(d.w.values()[i]);
    for (std::size_t i = 0; i < d.j.size(); ++i) s += lambda.j.values()[i] * std::abs(d.j.values()[i]);
    return s;
}

// Split-Bregman state (x, d, b, lambda) advanced against a data target.
class SplitBregman {
public:
    /// `offset` is the mean removed from the data; relative splitting is
    /// reported against D of the uncentred iterate.
    SplitBregman(const AugmentedSystem& system, const Image& f, const SolverParams& params, const PixelMask* mask,
                 double offset)
        : system_(system), params_(params), mask_(mask), offset_(offset) {
        params.validate();
        if (f.width() != system.width() || f.height() != system.height()) {
            throw std::invalid_argument("input image does not match operator grid");
        }
        if (!f.all_finite()) throw NumericalError("input image has non-finite samples");
        if (mask && !mask->matches(f)) throw std::invalid_argument("mask does not match input image");
        x_ = StackedVector(mask ? neighbour_fill(f, *mask) : f, Image(f.width(), f.height(), 0.0));
        d_ = system.apply_D(x_);
        b_ = AugmentedCoefficients::zeros(system.channels(), f.width(), f.height());
    }

    const StackedVector& x() const { return x_; }

    /// x-update only, with d, b and lambda held fixed. Solved as a
    /// correction to the current x so the accuracy is relative to the
    /// change rather than to the whole right-hand side.
    IterationRecord project(const Image& target) {
        const StackedVector rhs = x_rhs(target);
        const double gamma = params_.gamma;
        const LinearMap normal = [&](const StackedVector& y) { return system_.normal_operator(y, gamma, mask_); };
        const StackedVector r = rhs - normal(x_);
        CgResult cg = cg_solve(normal, r, params_.cg_tol, params_.cg_maxit,
                               StackedVector::zeros(x_.u.width(), x_.u.height()));
        x_ += cg.x;
        if (!x_.all_finite()) throw NumericalError("solver iterate is not finite");
        IterationRecord rec;
        rec.cg_iterations = cg.iterations;
        rec.cg_residual = cg.relative_residual;
        rec.cg_converged = cg.converged;
        fill_residuals(rec, system_.apply_D(x_), target);
        return rec;
    }

    /// One split-Bregman iteration. Lambda is recomputed from the new u
    /// during the first lambda_refresh calls and held fixed afterwards.
    IterationRecord step(const Image& target) {
        CgResult cg = solve_x(target);
        const AugmentedCoefficients dx = system_.apply_D(x_);
        const bool refresh = steps_++ < params_.lambda_refresh;
        if (refresh) {
            lambda_ = update_lambda(channel_energy(system_.laplacian().apply(dx.w)), params_, system_.channels());
        }
        d_ = soft_threshold(dx + b_, lambda_);
        AugmentedCoefficients db = dx - d_;
        db *= params_.delta;
        b_ += db;

        IterationRecord rec;
        rec.cg_iterations = cg.iterations;
        rec.cg_residual = cg.relative_residual;
        rec.cg_converged = cg.converged;
        rec.lambda_updated = refresh;
        fill_residuals(rec, dx, target);
        return rec;
    }

private:
    /// Penalised energy minimised by the iteration for the current lambda.
    double energy(const StackedVector& x, const AugmentedCoefficients& dx, const Image& target) const {
        const Image gap = masked(system_.apply_A(x) - target, mask_);
        return dot(gap.pixels(), gap.pixels()) + 2.0 * params_.gamma * weighted_l1(lambda_, dx);
    }

    StackedVector x_rhs(const Image& target) const {
        StackedVector rhs = system_.apply_A_adjoint(masked(target, mask_));
        rhs.axpy(params_.gamma, system_.apply_D_adjoint(d_ - b_));
        return rhs;
    }

    CgResult solve_x(const Image& target) {
        const StackedVector rhs = x_rhs(target);
        const double gamma = params_.gamma;
        const LinearMap normal = [&](const StackedVector& y) { return system_.normal_operator(y, gamma, mask_); };
        CgResult cg = cg_solve(normal, rhs, params_.cg_tol, params_.cg_maxit, x_);
        x_ = std::move(cg.x);
        if (!x_.all_finite()) throw NumericalError("solver iterate is not finite");
        return cg;
    }

    void fill_residuals(IterationRecord& rec, const AugmentedCoefficients& dx, const Image& target) const {
        rec.splitting_residual = norm2(dx - d_);
        double dx_norm = norm2(dx);
        if (offset_ != 0.0) {
            StackedVector shifted = x_;
            shifted.u += offset_;
            dx_norm = norm2(system_.apply_D(shifted));
        }
        rec.relative_splitting = dx_norm > 0.0 ? rec.splitting_residual / dx_norm : 0.0;
        const Image data_gap = masked(system_.apply_A(x_) - target, mask_);
        rec.data_term = dot(data_gap.pixels(), data_gap.pixels());
        rec.objective = energy(x_, dx, target);
        if (!std::isfinite(rec.objective)) throw NumericalError("solver objective is not finite");
    }

    const AugmentedSystem& system_;
    const SolverParams& params_;
    const PixelMask* mask_;
    double offset_;
    StackedVector x_;
    AugmentedCoefficients d_, b_, lambda_;
    int steps_ = 0;
};

void record(DecompositionResult& result, const IterationRecord& rec, const IterationObserver& observer) {
    result.diagnostics.push_back(rec);
    result.cg_iterations_total += rec.cg_iterations;
    result.cg_iterations_max = std::max(result.cg_iterations_max, rec.cg_iterations);
    result.cg_all_converged = result.cg_all_converged && rec.cg_converged;
    if (observer) observer(rec);
}

void finish_cg_warning(DecompositionResult& result, const SolverParams& params) {
    if (!result.cg_all_converged) {
        result.warnings.push_back("conjugate gradients hit the iteration limit (" +
                                  std::to_string(params.cg_maxit) + ") before reaching the tolerance");
    }
}

DecompositionResult run_penalized(const AugmentedSystem& system, const Image& f, const SolverParams& params,
                                  const PixelMask* mask, double offset, const IterationObserver& observer) {
    SplitBregman sb(system, f, params, mask, offset);
    DecompositionResult result;
    for (int k = 0; k < params.iterations; ++k) {
        IterationRecord rec = sb.step(f);
        rec.iteration = k + 1;
        rec.constraint_residual = sup_norm(masked(f - system.apply_A(sb.x()), mask));
        record(result, rec, observer);
    }
    result.cartoon = sb.x().u;
    result.texture = sb.x().v;
    finish_cg_warning(result, params);
    return result;
}

double known_mean(const Image& f, const PixelMask* mask) {
    if (!mask) return f.mean();
    double sum = 0.0;
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            if (mask->known(x, y)) sum += f(x, y);
        }
    }
    return sum / static_cast<double>(mask->known_count());
}

// The mean is carried by the cartoon; solving on the centred image makes the
// split independent of a constant offset, and of its effect on CG tolerances.
Image centred(const Image& f, double mean) {
    Image out = f;
    out -= mean;
    return out;
}

}  // namespace

DecompositionResult solve_noisy(const AugmentedSystem& system, const Image& f, const SolverParams& params,
                                const IterationObserver& observer) {
    const double mean = known_mean(f, nullptr);
    DecompositionResult result = run_penalized(system, centred(f, mean), params, nullptr, mean, observer);
    result.cartoon += mean;
    result.residual = f - result.cartoon - result.texture;
    return result;
}

DecompositionResult solve_inpaint(const AugmentedSystem& system, const Image& f, const PixelMask& mask,
                                  const SolverParams& params, const IterationObserver& observer) {
    if (!mask.matches(f)) throw std::invalid_argument("mask does not match input image");
    if (mask.known_count() == 0) throw std::invalid_argument("mask has no known pixels");
    const PixelMask* m = mask.all_known() ? nullptr : &mask;
    const double mean = known_mean(f, m);
    DecompositionResult result = run_penalized(system, centred(f, mean), params, m, mean, observer);
    result.cartoon += mean;
    result.residual = result.cartoon + result.texture;
    return result;
}

DecompositionResult solve_noiseless(const AugmentedSystem& system, const Image& input, const SolverParams& params,
                                    const IterationObserver& observer) {
    const double mean = input.mean();
    const Image f = centred(input, mean);
    SplitBregman sb(system, f, params, nullptr, mean);
    DecompositionResult result;
    Image e(f.width(), f.height(), 0.0);
    Image gap(f.width(), f.height(), 0.0);
    for (int k = 0; k < params.iterations; ++k) {
        IterationRecord rec = sb.step(f);
        rec.pass = 0;
        rec.iteration = k + 1;
        gap = f - system.apply_A(sb.x());
        rec.constraint_residual = sup_norm(gap);
        record(result, rec, observer);
    }
    // Bregman updates on the data target; each pass re-solves x only.
    for (int pass = 1; pass <= params.outer_limit && sup_norm(gap) > params.constraint_tol; ++pass) {
        e += gap;
        IterationRecord rec = sb.project(f + e);
        rec.pass = pass;
        gap = f - system.apply_A(sb.x());
        rec.constraint_residual = sup_norm(gap);
        record(result, rec, observer);
        result.passes = pass;
    }
    result.cartoon = sb.x().u;
    result.cartoon += mean;
    result.texture = sb.x().v;
    result.residual = input - result.cartoon - result.texture;
    result.constraint_met = sup_norm(result.residual) <= params.constraint_tol;
    if (!result.constraint_met) {
        result.warnings.push_back("fidelity constraint not met after " + std::to_string(params.outer_limit) +
                                  " passes (sup residual " + std::to_string(sup_norm(result.residual)) + ")");
    }
    finish_cg_warning(result, params);
    return result;
}

namespace {

AugmentedSystem build_system(const Image& matching, const GraphParams& graph, const PixelMask* mask) {
    const PatchGraph g = build_patch_graph(matching, graph, mask);
    return AugmentedSystem(build_spline_bank(), build_laplacian(g));
}

Image make_matching_image(const Image& f, const DecomposerOptions& options) {
    if (options.solver.mode == Mode::noisy && options.sigma > 0.0) return pre_denoise(f, options.sigma, options.nlm);
    return f;
}

}  // namespace

Decomposer::Decomposer(const Image& f, DecomposerOptions options, std::optional<PixelMask> mask)
    : f_(f), options_(std::move(options)), mask_(std::move(mask)), matching_(make_matching_image(f_, options_)),
      system_(build_system(matching_, options_.graph, mask_ ? &*mask_ : nullptr)) {
    options_.solver.validate();
    if (options_.solver.mode == Mode::inpaint && !mask_) {
        throw std::invalid_argument("inpaint mode requires a mask");
    }
}

DecompositionResult Decomposer::run(const IterationObserver& observer) const {
    DecompositionResult result;
    switch (options_.solver.mode) {
        case Mode::noiseless: result = solve_noiseless(system_, f_, options_.solver, observer); break;
        case Mode::noisy: result = solve_noisy(system_, f_, options_.solver, observer); break;
        case Mode::inpaint: result = solve_inpaint(system_, f_, *mask_, options_.solver, observer); break;
    }
    const auto isolated = system_.laplacian().isolated_rows().size();
    if (isolated > 0) {
        result.warnings.push_back(std::to_string(isolated) + " pixels have no matched patches (identity rows)");
    }
    return result;
}

}  // namespace cartex
