"""Regenerate the packaged fixture files under src/morsesturm/fixtures.

Run from the repository root:

    python scripts/gen_fixtures.py
"""

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from morsesturm.forms import MetricForm, Subspace  # noqa: E402
from morsesturm.problem import (  # noqa: E402
    BoundaryData,
    CoefficientPath,
    MorseSturmProblem,
    WitnessSeed,
    save,
)

OUT = ROOT / "src" / "morsesturm" / "fixtures"


def flat_indefinite(name: str, s_value: float, description: str) -> MorseSturmProblem:
    g = MetricForm(np.diag([1.0, -1.0]))
    space = Subspace(np.array([[0.0], [1.0]]))
    return MorseSturmProblem(
        metric=g,
        coefficient=CoefficientPath.constant(np.zeros((2, 2))),
        boundary=BoundaryData(space, np.array([[s_value]])),
        witness_seed=WitnessSeed([0.0, 1.0], [0.0, 0.0]),
        meta={"name": name, "description": description},
    )


def harmonic(name: str, omega_over_pi: float, description: str) -> MorseSturmProblem:
    omega = omega_over_pi * np.pi
    return MorseSturmProblem(
        metric=MetricForm(np.eye(2)),
        coefficient=CoefficientPath.constant(-(omega**2) * np.eye(2)),
        boundary=BoundaryData(Subspace.zero(2), np.zeros((0, 0))),
        witness_seed=None,
        meta={"name": name, "description": description,
              "omega_over_pi": omega_over_pi},
    )


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)

    save(
        flat_indefinite(
            "exsimple", 0.0,
            "flat 2d problem, signature (1,1), timelike initial axis, "
            "zero boundary operator; no focal instants",
        ),
        OUT / "exsimple.msp.json",
    )
    save(
        flat_indefinite(
            "excausal", 1.0,
            "flat 2d problem, signature (1,1), timelike initial axis, unit "
            "boundary operator; one focal instant at t=1 with signature -1",
        ),
        OUT / "excausal.msp.json",
    )

    for k in (1, 2):
        save(
            harmonic(
                f"harmonic_{k}", float(k),
                f"isotropic oscillator with omega = {k}*pi on g = I2; "
                "endpoint t=1 is focal",
            ),
            OUT / f"harmonic_{k}.msp.json",
        )
    for tag, val in (("0p5", 0.5), ("1p5", 1.5), ("2p5", 2.5)):
        save(
            harmonic(
                f"harmonic_{tag}", val,
                f"isotropic oscillator with omega = {val}*pi on g = I2; "
                "interior focal instants only",
            ),
            OUT / f"harmonic_{tag}.msp.json",
        )

    ts = [-0.5, -0.25, 0.0, 0.25, 0.5]
    b1 = [[[t * t, t], [t, 1.0 + t]] for t in ts]
    b2 = [[[t * t, 0.0], [0.0, 1.0]] for t in ts]
    for name, mats, desc in (
        (
            "degeneracy_crossing",
            b1,
            "symmetric curve with isolated degeneracy at t=0; n_minus jumps "
            "from 1 to 0 across the degeneracy",
        ),
        (
            "degeneracy_touching",
            b2,
            "symmetric curve with isolated degeneracy at t=0; n_minus is 0 "
            "on both sides",
        ),
    ):
        payload = {
            "format": "matrix-curve",
            "version": 1,
            "ts": ts,
            "matrices": mats,
            "meta": {"name": name, "description": desc},
        }
        (OUT / f"{name}.curve.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )

    print(f"wrote fixtures to {OUT}")


if __name__ == "__main__":
    main()
