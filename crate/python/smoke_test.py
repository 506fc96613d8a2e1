#!/usr/bin/env python3
"""Smoke test for the axtower_py extension module.

Builds the cdylib with cargo, stages it on sys.path under the importable
name, and checks a handful of frozen exact values end to end.  Run from
anywhere:

    python3 python/smoke_test.py
"""

import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def stage_module(tmp: Path) -> None:
    subprocess.run(
        ["cargo", "build", "-p", "axtower-py"], cwd=ROOT, check=True
    )
    ext = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    built = ROOT / "target" / "debug" / "libaxtower_py.so"
    if not built.exists():  # e.g. macOS
        built = ROOT / "target" / "debug" / "libaxtower_py.dylib"
    shutil.copy(built, tmp / f"axtower_py{ext}")
    sys.path.insert(0, str(tmp))


def main() -> None:
    with tempfile.TemporaryDirectory() as tmpdir:
        stage_module(Path(tmpdir))
        import axtower_py as ax

        # Oscillation of pi_1 at p = 3 and the identity around it.
        cfg = ax.TowerConfig(p=3, e=1, precision=24)
        pi1 = cfg.uniformizer(1)
        assert pi1.valuation() == "1/3"
        assert ax.oscillation(pi1) == "5/6"
        assert ax.approximation_defect(pi1, 0) == "1/3"
        osc, defect_side, holds = ax.oscillation_identity(pi1)
        assert (osc, defect_side, holds) == ("5/6", "5/6", True)
        assert ax.oracle_oscillation(pi1) == "5/6"
        assert ax.ax_constants(3, 1) == ("1/6", "3/4")

        # Serialization round trip.
        again = ax.element_from_json(pi1.to_json())
        assert again.to_json() == pi1.to_json()
        assert pi1.sub(again).is_zero()

        # Ramification numerics at (p, e) = (2, 1), level 2.
        different, stated, agree = ax.different_valuation(2, 2, 1)
        assert (different, stated, agree) == ("11/4", "11/4", True)
        integral, agrees, stated_agrees = ax.herbrand_integral(2, 2, 1)
        assert (integral, agrees, stated_agrees) == ("11/4", True, True)

        # Twisted recurrence round trip over F_3: x + y^3 = 0.
        stream = ax.twist_extend(3, [[1], [1]], [[1]], 4)
        assert stream == [[1], [2], [1], [2]]
        assert ax.twist_check(3, [[1], [1]], stream)
        assert ax.twist_find(3, stream) == [[1], [1]]
        assert ax.twist_count(2, [[1], [1]], 4) == 2

        # An invariant class carrying that digit stream: sum of [x_m] eta_m,
        # where eta_m at level 3 is pi_3^(-3^(3-m)).
        cls_el = cfg.zero(3)
        for m, d in [(1, 1), (2, 2), (3, 1)]:
            cls_el = cls_el + cfg.teich_monomial(3, -(3 ** (3 - m)), [d])
        cls = ax.validate_invariant(cls_el)
        assert cls.validated
        assert cls.psi(4) == [[1], [2], [1], [0]]
        assert cls.dependence() == [[1], [1]]
        assert cls.torsion() == 1

        # Witness polynomial of the F_2 relation (1, 1) seeded with x_1 = 1.
        pol = ax.witness_polynomial(2, [[1], [1]], [[1]])
        assert pol.order == 1
        assert pol.constant().valuation() == "-1/2"
        assert [pol.defect(n) for n in (1, 2, 3)] == ["-1/4", "-1/8", "-1/16"]
        segments, positive, nonnegative = ax.newton_polygon(
            pol.stage_valuations(2)
        )
        assert nonnegative

        # Newton polygon of y^2 + y + p.
        segments, positive, nonnegative = ax.newton_polygon(
            [(0, "1"), (1, "0"), (2, "0")]
        )
        assert segments == [("-1", 1), ("0", 1)]
        assert positive and nonnegative

        # Index combinatorics: the worked (2, 3, 1) case and the sharp-bound
        # counterexample at (3, 12, 1).
        idx = ax.index_sets(2, 3, 1)
        assert (idx.tau, idx.rho) == (3, 6)
        assert idx.restricted == [(1, 5), (2, 5), (2, 6)]
        assert idx.bound == "6" and idx.bound_holds
        bad = ax.index_sets(3, 12, 1)
        assert len(bad.restricted) == 10 and not bad.bound_holds

        # Ramified support of [1] eta_1^5 at (p, e) = (2, 3).
        ram = ax.TowerConfig(p=2, e=3, precision=16)
        mono = ram.teich_monomial(1, -5, [1])
        rcls = ax.validate_invariant(mono)
        assert rcls.validated
        assert rcls.support() == [((1, 5), "0")]

        print("smoke test passed")


if __name__ == "__main__":
    main()
