"""Smoke test for the fskyrme Python bindings.

Build and install first:

    pip install --no-build-isolation -e crates/python
    python python/smoke_test.py
"""

import math
import os
import tempfile

import fskyrme

HOPF = """
grid.n = 24
grid.box_length = 3
target = s2
initializer = hopf_projection
initializer.k = 1
flow.max_iters = 20
output.snapshot_every = 10
"""


def check(cond, msg):
    if not cond:
        raise SystemExit(f"FAIL: {msg}")
    print(f"ok   {msg}")


def main():
    d, s, e = fskyrme.initial_energy(HOPF)
    check(d > 0 and s > 0 and math.isclose(d + s, e, rel_tol=1e-12), f"energy terms add up ({e:.4f})")

    q = fskyrme.initial_invariant(HOPF)
    q_lift = fskyrme.initial_invariant(HOPF, method="lift")
    check(abs(q - 1) < 0.1 and abs(q - q_lift) < 0.1, f"hopf number {q:.4f} (lift {q_lift:.4f})")

    const = "grid.n = 8\ntarget = su2\ninitializer = constant\n"
    check(fskyrme.initial_energy(const)[2] == 0.0, "constant map has zero energy")

    with tempfile.TemporaryDirectory() as out:
        passed, summary, files = fskyrme.run("minimize", HOPF, out)
        check(passed, f"minimize: {summary}")
        snap = fskyrme.read_snapshot(os.path.join(out, "snapshot_000010.bin"))
        check(
            snap["iteration"] == 10 and len(snap["values"]) == 24**3 * 3,
            f"snapshot header and payload ({snap['target']}, n={snap['n']})",
        )
        with open(os.path.join(out, "energy.csv")) as f:
            rows = [line.split(",") for line in f.read().splitlines()[1:]]
        logged = {int(r[0]): float(r[3]) for r in rows}
        check(logged[10] == snap["energy"], "snapshot energy matches energy.csv")
        totals = [float(r[3]) for r in rows]
        check(all(b <= a for a, b in zip(totals, totals[1:])), "energy ledger is monotone")

    ok, table = fskyrme.identity_table(6, samples=2, seed=1)
    algebraic = [line for line in table.splitlines() if " algebraic " in line]
    check(algebraic and all(line.endswith("PASS") for line in algebraic), "algebraic identities at n=6")

    try:
        fskyrme.initial_energy("target = s2\ninitializer = hedgehog\n")
    except ValueError as err:
        check("incompatible" in str(err), "incompatible initializer raises ValueError")
    else:
        raise SystemExit("FAIL: incompatible initializer accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
