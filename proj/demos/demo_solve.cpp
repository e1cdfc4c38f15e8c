// Minimal end-to-end use of the library: assemble a rough-coefficient kernel,
// solve the regularized equation, and certify the solution weakly.

#include <cstdio>

#include <nlperi/nlperi.hpp>

int main() {
    using namespace nlperi;
    const int n = 32;
    const double s = 0.4;

    const KernelSpec spec = KernelSpec::infinite(s);
    const CoefficientField A = CoefficientField::checkerboard(1.0, 10.0, 8);
    const GridVectorField F = meyers_data(n, s);

    SolveOptions opts;
    opts.varpi = 1.0;
    opts.cg_tol = 1e-10;
    SolveStats stats;
    const GridVectorField u = solve_regularized(spec, A, F, opts, &stats);

    const ScalarGridField rough = upsilon_s(u, s);
    const ScalarGridField proj = d_s(u, s);
    std::printf("solved in %d CG iterations, relative residual %.2e\n", stats.iterations,
                stats.final_residual);
    std::printf("|u|_2 = %.6f  |Upsilon u|_2 = %.6f  |D u|_2 = %.6f\n", lp_norm(u, 2.0),
                lp_norm(rough, 2.0), lp_norm(proj, 2.0));

    const double wr = weak_residual(u, F, spec, A, opts, 8, 42);
    std::printf("weak residual over trial fields: %.2e\n", wr);
    return wr < 1e-6 ? 0 : 1;
}
