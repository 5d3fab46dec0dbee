#!/usr/bin/env python3
"""
Example usage of the detection-and-decoding bounds toolkit.
"""

from src.bounds.joint import dt_genie, ensemble_converse, joint_achievability, metaconverse
from src.bounds.preamble import detection_tradeoff, optimize_np, preamble_converse, PreambleSplit
from src.bounds.results import TargetProbabilities
from src.channel.biawgn import ChannelSpec
from src.config.settings import MonteCarloConfig
from src.simulation.oracle import validate_joint_bound
from src.utils.helpers import setup_logging, validate_environment


def main():
    """Main example usage function."""
    print("📡 Detection-and-Decoding Bounds - Example Usage")
    print("=" * 60)

    setup_logging('WARNING')

    print("🔍 Validating environment...")
    validation = validate_environment()
    if not validation['environment_valid']:
        print("❌ Environment validation failed:")
        for req in validation['missing_requirements']:
            print(f"  - {req}")
        return

    print("✅ Environment is valid")

    mc = MonteCarloConfig(samples=200_000, seed=2019)
    targets = TargetProbabilities(efa=1e-3, emd=1e-2, eie=1e-2)

    # Preamble detection in closed form
    tradeoff = detection_tradeoff(25, 1.0, 1e-4)
    print(f"\n🎯 Preamble of 25 symbols at 0 dB, FA=1e-4: MD={tradeoff.emd:.4f}")

    print("\n📊 Bounds at 6 dB, n=64 (bits per channel use):")
    spec = ChannelSpec.from_snr_db(6.0, 0.5, 64)
    for name, result in (
        ("joint achievability", joint_achievability(spec, targets, mc)),
        ("ensemble converse", ensemble_converse(spec, targets, mc)),
        ("metaconverse", metaconverse(spec, targets.eie, mc)),
        ("DT with genie detection", dt_genie(spec, targets.eie, mc)),
    ):
        print(f"   {name:<26} rate={result.rate:.4f}  "
              f"CI=[{result.ci_low / spec.n:.4f}, {result.ci_high / spec.n:.4f}]  {result.flag_string()}")

    n_p_star, preamble = optimize_np(spec.n, spec.rho, targets, mc)
    if n_p_star is not None:
        converse = preamble_converse(spec, PreambleSplit.from_total(spec.n, n_p_star), targets.eie, mc)
        print(f"   preamble achievability     rate={preamble.rate:.4f}  n_p*={n_p_star}")
        print(f"   preamble converse          rate={converse.rate:.4f}")
    else:
        print("   preamble bounds            no preamble length meets the MD target")

    print("\n🧪 Brute-force check at desk scale (n=8, M=4)...")
    report = validate_joint_bound(
        ChannelSpec.from_snr_db(6.0, 0.5, 8),
        TargetProbabilities(efa=0.1, emd=0.5, eie=0.5),
        mc=mc, n_codebooks=10, trials=10_000, m=4,
    )
    for check in report.checks:
        print(f"   {check.name}: empirical {check.empirical.value:.4f} <= {check.limit:.4f} "
              f"{'✅' if check.passed else '❌'}")

    print("\n🎉 Example usage completed!")
    print("\n💡 Command-line interface:")
    print("1. Run: python bounds_cli.py sweep configs/reference_curves.env")
    print("2. Run: python bounds_cli.py validate configs/validation_desk.env")
    print("3. Run: python bounds_cli.py tradeoff --np 25 --snr-db 0 --efa 1e-4")


if __name__ == "__main__":
    main()
