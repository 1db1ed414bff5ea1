#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cartex/image.hpp"
#include "cartex/nonlocal_graph.hpp"
#include "cartex/noise.hpp"
#include "cartex/operators.hpp"

namespace cartex {

enum class Mode { noiseless, noisy, inpaint };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct SolverParams {
    Mode mode = Mode::noiseless;
    double beta1 = 0.30;
    double beta2 = 0.36;
    /// Texturelessness sharpness; tuned for intensities in [0, 1].
    double eta1 = 300.0;
    double eta2 = 300.0;
    double gamma = 0.1;
    double delta = 1.0;
    /// Split-Bregman iterations; in noiseless mode, before the constraint passes.
    int iterations = 15;
    /// Lambda is recomputed from u during the first lambda_refresh iterations
    /// and frozen afterwards, so later iterations minimise a fixed functional.
    int lambda_refresh = 1;
    double cg_tol = 1e-6;
    int cg_maxit = 200;
    /// Noiseless mode: x-only constraint passes after the split-Bregman
    /// iterations, and the sup-norm target for f - u - v.
    int outer_limit = 50;
    double constraint_tol = 1e-6;

    static SolverParams noiseless_defaults();
    static SolverParams noisy_defaults();
    static SolverParams inpaint_defaults();
    static SolverParams defaults_for(Mode mode);

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

struct CgResult {
    StackedVector x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = true;
};

using LinearMap = std::function<StackedVector(const StackedVector&)>;

/// Conjugate gradients for a symmetric positive semi-definite map, warm
/// started from x0. Stops when ||op(x) - rhs|| <= tol ||rhs|| or after
/// maxit iterations. Throws NumericalError on non-finite iterates.
CgResult cg_solve(const LinearMap& op, const StackedVector& rhs, double tol, int maxit,
                  const StackedVector& x0);

/// sign(y) max(|y| - lambda, 0), elementwise.
AugmentedCoefficients soft_threshold(const AugmentedCoefficients& y, const AugmentedCoefficients& lambda);

/// phi(i) = sum over channels of |(L W u)(channel, i)|^2.
Image texturelessness(const AugmentedSystem& system, const Image& u);

/// lambda1 = beta1 exp(-eta1 phi) on the W part with the low-pass plane set
/// to zero; lambda2 = beta2 (1 - exp(-eta2 phi)) on every J-part plane.
AugmentedCoefficients update_lambda(const Image& phi, const SolverParams& params, std::size_t channels);

struct IterationRecord {
    int pass = 0;       // constraint pass (noiseless mode), 0 for split-Bregman iterations
    int iteration = 0;  // split-Bregman iteration, 0 for constraint passes
    double splitting_residual = 0.0;  // ||Dx - d||
    double relative_splitting = 0.0;  // ||Dx - d|| / ||Dx||
    double data_term = 0.0;           // ||M(Ax - target)||^2
    double objective = 0.0;           // data_term + 2 gamma ||lambda Dx||_1
    bool lambda_updated = false;      // objective is comparable with the previous record only when false
    int cg_iterations = 0;
    double cg_residual = 0.0;
    bool cg_converged = true;
    double constraint_residual = 0.0;  // ||f - u - v||_inf
};

struct DecompositionResult {
    Image cartoon;
    Image texture;
    /// f - u - v in noisy mode; u + v in inpaint mode; zero-ish otherwise.
    Image residual;
    std::vector<IterationRecord> diagnostics;
    std::vector<std::string> warnings;
    bool constraint_met = true;
    int passes = 0;  // noiseless constraint passes run
    int cg_iterations_total = 0;
    int cg_iterations_max = 0;
    bool cg_all_converged = true;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

DecompositionResult solve_noisy(const AugmentedSystem& system, const Image& f, const SolverParams& params,
                                const IterationObserver& observer = {});
DecompositionResult solve_noiseless(const AugmentedSystem& system, const Image& f, const SolverParams& params,
                                    const IterationObserver& observer = {});
/// Unknown pixels of f are ignored; with an all-known mask this reduces
/// exactly to solve_noisy.
DecompositionResult solve_inpaint(const AugmentedSystem& system, const Image& f, const PixelMask& mask,
                                  const SolverParams& params, const IterationObserver& observer = {});

struct DecomposerOptions {
    GraphParams graph;
    SolverParams solver;
    /// Noise level used by the matching pre-denoiser in noisy mode.
    double sigma = 0.1;
    NlmParams nlm;
};

/// Builds the matching image, patch graph and operators for one input and
/// runs the solver selected by options.solver.mode.
class Decomposer {
public:
    Decomposer(const Image& f, DecomposerOptions options, std::optional<PixelMask> mask = std::nullopt);

    const AugmentedSystem& system() const { return system_; }
    const Image& matching_image() const { return matching_; }
    const DecomposerOptions& options() const { return options_; }

    DecompositionResult run(const IterationObserver& observer = {}) const;

private:
    Image f_;
    DecomposerOptions options_;
    std::optional<PixelMask> mask_;
    Image matching_;
    AugmentedSystem system_;
};

}  // namespace cartex
