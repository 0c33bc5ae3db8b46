#!/usr/bin/env python3
"""
ROC Toolkit End-to-End Runner

Runs app.py as a subprocess on the canonical scenarios and checks the emitted
artifacts and exit codes:
1. Exact ROC of the commuting qubit pair (three vertices)
2. Bounds for identical states and for a pure pair with 3 copies
3. Gaussian thermal-loss scenario (Q_s bounds and asymptotics)
4. Adaptive sequence identity residual
5. Error reporting and byte-identical reruns

Usage:
    python local_test.py [--scenario all|exact|bounds|gaussian|sequence|errors] [--timeout 300]
"""

import argparse
import io
import json
import subprocess
import sys
import tempfile
import time
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from src.curve_io import read_curves_csv
from src.gaussian import tmsv_through_thermal_loss
from src.loader import density_to_spec, gaussian_to_spec
from src.dv_states import validate_density

APP = Path(__file__).resolve().parent / "app.py"


class CLITester:
    def __init__(self, workdir: Path, timeout: int = 300):
        self.workdir = workdir
        self.timeout = timeout

    def run(self, *args: str) -> Tuple[int, str, str]:
        start = time.time()
        proc = subprocess.run(
            [sys.executable, str(APP), "--quiet", *args],
            capture_output=True,
            text=True,
            timeout=self.timeout,
            cwd=self.workdir,
        )
        print(f"   ⏱️  {' '.join(args[:1])} finished in {time.time() - start:.2f}s (exit {proc.returncode})")
        return proc.returncode, proc.stdout, proc.stderr

    def write_state(self, name: str, spec: Dict) -> str:
        path = self.workdir / name
        path.write_text(json.dumps(spec))
        return str(path)

    def _curve(self, stdout: str, bound: str) -> Tuple[np.ndarray, np.ndarray]:
        rows = [r for r in read_curves_csv(io.StringIO(stdout)) if r.bound == bound]
        return np.array([r.beta for r in rows]), np.array([r.alpha for r in rows])

    def test_exact_qubit(self) -> bool:
        """Vertices (0,1), (3/5,1/5), (1,0) of the commuting qubit pair."""
        print("\n📝 Testing exact ROC of diag(4,1)/5 vs diag(3,2)/5")
        s1 = self.write_state("q1.json", density_to_spec(validate_density(np.diag([0.8, 0.2]))))
        s2 = self.write_state("q2.json", density_to_spec(validate_density(np.diag([0.6, 0.4]))))
        code, out, err = self.run("exact", s1, s2, "--grid", "64")
        if code != 0:
            print(f"   ❌ exit {code}: {err.strip()}")
            return False
        rows = read_curves_csv(io.StringIO(out))
        betas = np.array([r.beta for r in rows])
        alphas = np.array([r.alpha for r in rows])
        order = np.argsort(betas)
        value = float(np.interp(0.6, betas[order], alphas[order]))
        if abs(value - 0.2) > 1e-9:
            print(f"   ❌ alpha(0.6) = {value}, expected 0.2")
            return False
        print("   ✅ vertex (0.6, 0.2) reproduced")
        return True

    def test_bounds(self) -> bool:
        print("\n📝 Testing bounds on identical states and a pure pair")
        rho = density_to_spec(validate_density(np.diag([0.5, 0.3, 0.2])))
        s = self.write_state("same.json", rho)
        code, out, err = self.run("bounds", s, s, "--bounds", "fidLB,fidUB,caqcb,oaqcb", "--grid", "65")
        if code != 0:
            print(f"   ❌ exit {code}: {err.strip()}")
            return False
        for bound in {r.bound for r in read_curves_csv(io.StringIO(out))}:
            betas, alphas = self._curve(out, bound)
            deviation = float(np.max(np.abs(alphas - (1.0 - betas))))
            if deviation > 1e-9:
                print(f"   ❌ {bound} deviates from alpha = 1 - beta by {deviation:.3e}")
                return False
        print("   ✅ every bound collapses to alpha = 1 - beta")

        pure = self.write_state("pure.json", {"kind": "pure-overlap", "fidelity": 0.9})
        code, out, err = self.run("bounds", pure, "--bounds", "fidLB", "--copies", "3", "--grid", "65")
        if code != 0:
            print(f"   ❌ exit {code}: {err.strip()}")
            return False
        betas, alphas = self._curve(out, "fidLB")
        if abs(alphas[0] - 0.9 ** 6) > 1e-12:
            print(f"   ❌ 3-copy fidLB starts at {alphas[0]}, expected F^6")
            return False
        print("   ✅ 3-copy fidelity bound starts at F^6")
        return True

    def test_gaussian(self) -> bool:
        print("\n📝 Testing the thermal-loss Gaussian scenario")
        g1 = self.write_state("g1.json", gaussian_to_spec(tmsv_through_thermal_loss(4.0, 0.7, 0.4)))
        g2 = self.write_state("g2.json", gaussian_to_spec(tmsv_through_thermal_loss(4.0, 0.3, 0.6)))
        code, out, err = self.run("bounds", g1, g2, "--grid", "129", "--svg", str(self.workdir / "fig.svg"), "--log")
        if code != 0:
            print(f"   ❌ exit {code}: {err.strip()}")
            return False
        labels = {r.bound.split("(")[0] for r in read_curves_csv(io.StringIO(out))}
        expected = {"fidUB", "fidLB", "caqcb", "oaqcb", "qreLB-alpha", "qreLB-beta"}
        if labels != expected:
            print(f"   ❌ curves {sorted(labels)}, expected {sorted(expected)}")
            return False
        fid_lb, fid_ub = self._curve(out, "fidLB")[1], self._curve(out, "fidUB")[1]
        if fid_lb[0] > fid_ub[0] + 1e-9:
            print("   ❌ fidLB rises above fidUB")
            return False
        betas, alphas = self._curve(out, "oaqcb")
        if np.any(alphas < 0) or np.any(alphas > 1):
            print("   ❌ OAQCB leaves [0, 1]")
            return False
        if not (self.workdir / "fig.svg").exists():
            print("   ❌ SVG was not written")
            return False
        print("   ✅ all five bounds emitted and plotted")

        code, out, err = self.run("asymptotics", g1, g2, "--p-grid", "0.2,0.5,0.8")
        if code != 0:
            print(f"   ❌ exit {code}: {err.strip()}")
            return False
        report = json.loads(out)
        if not report["saturation"]["passed"] or not report["log_convexity"]["passed"]:
            print(f"   ❌ asymptotic checks failed: {report['saturation']['worst_deviation']}")
            return False
        print(f"   ✅ Hoeffding saturation within {report['saturation']['worst_deviation']:.2e}")

        code, _, err = self.run("exact", g1, g2)
        if code != 3:
            print(f"   ❌ exact ROC of Gaussian input exited {code}, expected 3")
            return False
        print("   ✅ exact ROC refused for Gaussian input (exit 3)")
        return True

    def test_sequence(self) -> bool:
        print("\n📝 Testing the adaptive sequence identity")
        code, out, err = self.run("sequence", "--fidelities", "0.9,0.9", "--rule", "adaptive", "--grid", "101")
        if code != 0:
            print(f"   ❌ exit {code}: {err.strip()}")
            return False
        residual = json.loads(err.strip().splitlines()[-1])["adaptive_identity_residual"]
        if residual > 1e-12:
            print(f"   ❌ residual {residual:.3e}")
            return False
        print(f"   ✅ residual {residual:.2e}")
        code, _, err = self.run("sequence", "--fidelities", "1,1", "--rule", "adaptive", "--grid", "11")
        if code != 0:
            print(f"   ❌ degenerate fidelities exited {code}")
            return False
        print("   ✅ degenerate fidelities handled")
        return True

    def test_errors(self) -> bool:
        print("\n📝 Testing error reporting and determinism")
        bad = self.write_state("bad.json", {"kind": "gaussian", "modes": 1, "mean": [0, 0],
                                            "cov": [[0.25, 0], [0, 0.25]]})
        code, _, err = self.run("bounds", bad, bad)
        try:
            record = json.loads(err.strip().splitlines()[-1])
        except (json.JSONDecodeError, IndexError):
            print(f"   ❌ no JSON error object on stderr: {err!r}")
            return False
        if code != 2 or record.get("error") != "Unphysical":
            print(f"   ❌ expected Unphysical with exit 2, got {record} / {code}")
            return False
        print("   ✅ unphysical covariance rejected (exit 2)")

        s1 = self.write_state("d1.json", density_to_spec(validate_density(np.diag([0.7, 0.2, 0.1]))))
        s2 = self.write_state("d2.json", density_to_spec(validate_density(np.diag([0.2, 0.3, 0.5]))))
        outputs = [self.run("bounds", s1, s2, "--grid", "33")[1] for _ in range(2)]
        if outputs[0] != outputs[1]:
            print("   ❌ reruns differ")
            return False
        print("   ✅ reruns are byte-identical")
        return True


def main() -> None:
    parser = argparse.ArgumentParser(
        description="End-to-end checks of the ROC command-line tool",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Everything
    python local_test.py
    # Only the Gaussian scenario, with a longer timeout
    python local_test.py --scenario gaussian --timeout 600
        """,
    )
    parser.add_argument(
        "--scenario",
        choices=["all", "exact", "bounds", "gaussian", "sequence", "errors"],
        default="all",
        help="Which scenario to run. Default: all",
    )
    parser.add_argument(
        "--timeout",
        type=int,
        default=300,
        help="Per-command timeout in seconds (default: 300)",
    )
    args = parser.parse_args()

    print("🧪 ROC Toolkit End-to-End Runner")
    print("=" * 50)

    results: List[bool] = []
    with tempfile.TemporaryDirectory() as tmp:
        tester = CLITester(Path(tmp), args.timeout)
        scenarios = {
            "exact": tester.test_exact_qubit,
            "bounds": tester.test_bounds,
            "gaussian": tester.test_gaussian,
            "sequence": tester.test_sequence,
            "errors": tester.test_errors,
        }
        for name, check in scenarios.items():
            if args.scenario in ("all", name):
                results.append(check())
            else:
                print(f"\n⏭️  Skipping {name}")

    print("\n" + "=" * 50)
    if all(results):
        print("🎉 All scenarios passed.")
        sys.exit(0)
    print("❌ Some scenarios failed. See the messages above.")
    sys.exit(1)


if __name__ == "__main__":
    main()
