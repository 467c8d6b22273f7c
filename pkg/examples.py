"""
Usage Examples for klift

This file demonstrates the pointwise algebra, the tensor operators and the
verification suite, both from configuration files and built in code.
"""

from klift import RunConfig, falsify, load_config, poly, run_suite, sweep
from klift.config import Perturbation
from klift.errors import PerturbationTooSmall


def example_1_coefficient_algebra():
    """Example 1: Integrable b-coefficients at one energy density."""
    print("=" * 70)
    print("EXAMPLE 1: Coefficient Algebra")
    print("=" * 70)

    from klift.lift_algebra import integrable_coefficients, integrable_denominator, metric_coefficients

    a1, a3 = poly(1.0, 1.0), poly(0.0, 1.0)
    t = 0.3
    print(f"\nD(t={t}) on the unit sphere: {integrable_denominator(a1, a3, 1.0, t):.6f}")

    lc = integrable_coefficients(a1, a3, 1.0, t)
    print(f"b1 = {lc.b1:.6f}, b2 = {lc.b2:.6f}, b3 = {lc.b3:.6f}")
    print(f"J^2 = -I identity residuals: {lc.identity_residuals()}")

    mc = metric_coefficients(lc, 1.0 + t, 1.0)
    print(f"c1 = {mc.c1:.6f}, d1 = {mc.d1:.6f}, positivity margins {mc.positivity_margins()}")


def example_2_tensors_at_a_point():
    """Example 2: J, G and N_J at a single point of T*M."""
    print("\n" + "=" * 70)
    print("EXAMPLE 2: Tensors at a Point")
    print("=" * 70)

    import numpy as np

    from klift.bundle_calculus import ChartPoint, hermitian_residual, nijenhuis
    from klift.structure import NaturalLiftStructure

    config = load_config("configs/kahler_sphere.json")
    structure = NaturalLiftStructure(config)
    pt = ChartPoint(q=[0.1, -0.2, 0.15], p=[0.3, 0.2, -0.4])

    ps = structure.at(pt)
    print(f"\nt = {ps.geometry.t:.6f}")
    print(f"|J^T G J - G| = {hermitian_residual(ps.J, ps.G):.3e}")
    N = nijenhuis(config.manifold, structure.acs_field, pt, config.step)
    print(f"|N_J| = {np.max(np.abs(N)):.3e}")


def example_3_verify_from_file():
    """Example 3: Run the whole suite from a configuration file."""
    print("\n" + "=" * 70)
    print("EXAMPLE 3: Verify a Configuration")
    print("=" * 70)

    report = run_suite(load_config("configs/kahler_sphere.json"))
    for result in report.checks:
        print(f"  {result.name:<26} {result.max_residual:.3e}  {'pass' if result.passed else 'FAIL'}")
    print(f"\nVerdicts: {report.verdicts.model_dump()}")


def example_4_config_in_code():
    """Example 4: Build a configuration in code (hyperbolic space, explicit b)."""
    print("\n" + "=" * 70)
    print("EXAMPLE 4: Configuration in Code")
    print("=" * 70)

    config = RunConfig.model_validate(
        {
            "manifold": {"n": 3, "c": -1.0},
            "coefficients": {
                "a1": {"family": "const", "value": 1.0},
                "a3": {"family": "const", "value": 0.0},
                "b_mode": {"b1": {"family": "const", "value": 0.2}, "b3": {"family": "const", "value": 0.0}},
            },
            "sampling": {"count": 10},
            "include_nabla_j": False,
        }
    )
    report = run_suite(config)
    print(f"\nalmost Kahler: {report.verdicts.almost_kahler}, integrable: {report.verdicts.integrable}")


def example_5_falsify():
    """Example 5: Perturbations that must break a structure."""
    print("\n" + "=" * 70)
    print("EXAMPLE 5: Falsification")
    print("=" * 70)

    config = load_config("configs/canonical.json")
    for text in ["b1=+0.05", "c1-scale=1.1", "mu=0.1", "b1=1e-15"]:
        try:
            info = falsify(config, Perturbation.parse(text)).falsification
            print(f"  {text:<14} -> {info.target} residual {info.residual:.3e} > {info.floor:g}")
        except PerturbationTooSmall as e:
            print(f"  {text:<14} -> too small: {e}")


def example_6_sweep():
    """Example 6: Sweep the energy density."""
    print("\n" + "=" * 70)
    print("EXAMPLE 6: Sweep over t")
    print("=" * 70)

    rows = sweep(load_config("configs/kahler_sphere.json"), "t", [0.0, 0.1, 0.2, 0.3, 0.4])
    for row in rows:
        D = "n/a" if row["D"] is None else f"{row['D']:.4f}"
        print(f"  t={row['t']:.2f}  D={D}  skipped={row['skipped']} {row['error']}")


if __name__ == "__main__":
    print("\nklift - Usage Examples\n")

    example_1_coefficient_algebra()
    example_2_tensors_at_a_point()
    example_3_verify_from_file()
    example_4_config_in_code()
    example_5_falsify()
    example_6_sweep()

    print("\n" + "=" * 70)
    print("All examples completed!")
    print("=" * 70)
