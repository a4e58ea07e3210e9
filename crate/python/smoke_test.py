#!/usr/bin/env python3
"""Build the qsdc_py extension module and exercise it end to end.

Usage: python3 python/smoke_test.py [--skip-build]

Builds the cdylib with cargo, copies it next to this script as qsdc_py.so,
imports it, and runs a handful of checks covering the state engine, the
session runner, and the exact episode oracle.
"""

import argparse
import math
import pathlib
import shutil
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
HERE = pathlib.Path(__file__).resolve().parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "qsdc-python"],
        cwd=ROOT,
        check=True,
    )
    built = ROOT / "target" / "release" / "libqsdc_py.so"
    if not built.exists():  # e.g. macOS
        built = ROOT / "target" / "release" / "libqsdc_py.dylib"
    shutil.copy2(built, HERE / "qsdc_py.so")


def check(name, condition):
    if not condition:
        print(f"[smoke] {name}: FAIL")
        sys.exit(1)
    print(f"[smoke] {name}: PASS")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--skip-build", action="store_true",
                        help="reuse an already-built qsdc_py.so")
    args = parser.parse_args()
    if not args.skip_build:
        build()

    sys.path.insert(0, str(HERE))
    import qsdc_py

    # State engine: the shared pair measures 00 or 11, never mixed.
    pair = qsdc_py.StateVector.epr_pair()
    dist = pair.outcome_distribution([(0, "Z"), (1, "Z")])
    check(
        "EPR pair Z outcomes agree",
        math.isclose(dist["00"], 0.5, abs_tol=1e-12)
        and math.isclose(dist["11"], 0.5, abs_tol=1e-12)
        and dist["01"] == 0.0
        and dist["10"] == 0.0,
    )

    # Hadamard is an involution and preserves amplitudes exactly.
    twice = pair.hadamard(0).hadamard(0)
    check(
        "Hadamard involution",
        all(
            abs(a - b) < 1e-12
            for a, b in zip(pair.amplitudes(), twice.amplitudes())
        ),
    )

    # Clean session: the message comes back bit-exact.
    message = "1011010010110100"
    clean = qsdc_py.run_session(pairs=256, seed=7, message=message)
    check(
        "clean session delivers the message",
        not clean.aborted
        and clean.check_error_rate == 0.0
        and clean.recovered_message == message,
    )

    # Collective attack: the check trips and nothing is announced.
    attacked = qsdc_py.run_session(
        pairs=1024, seed=7, attack="collective", threshold=0.05
    )
    check(
        "collective attack is detected",
        attacked.aborted and attacked.recovered_message is None,
    )

    # Exact oracle: Z interception errors at exactly 1/2 on unflagged
    # positions; no attack means no error.
    rate = qsdc_py.exact_check_error_rate(0, False, "ir-z")
    check("Z-intercept oracle rate is 1/2", math.isclose(rate, 0.5, abs_tol=1e-12))
    rate = qsdc_py.exact_check_error_rate(0, False, "none")
    check("no-attack oracle rate is 0", abs(rate) < 1e-12)

    # Eve's ancilla marginal is uniform regardless of the encoded bit.
    table = qsdc_py.exact_distribution(1, False, "collective")
    eve_one = sum(p for outcome, p in table.items() if outcome[-1] == "1")
    check("collective ancilla marginal uniform", math.isclose(eve_one, 0.5, abs_tol=1e-12))

    # Mutual information: identity channel carries one bit, Eve's record
    # carries none.
    mi = qsdc_py.mutual_information_bits([(i % 2, i % 2) for i in range(1000)])
    check("MI of identity channel is 1 bit", math.isclose(mi, 1.0, abs_tol=1e-9))
    check("Eve MI stays below 0.01 bits", attacked.eve_mi_bits < 0.01)

    print(f"[smoke] all checks passed (qsdc_py {qsdc_py.__version__})")


if __name__ == "__main__":
    main()
