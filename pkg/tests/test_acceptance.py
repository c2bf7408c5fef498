"""
Acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line (visible even under output capture)
and then asserts the verdict.
"""

import subprocess
import sys
import time

import pytest

from pfa_rd_geo import selftest

CRITERIA = [
    selftest.criterion_affine,
    selftest.criterion_forward_inverse,
    selftest.criterion_solver,
    selftest.criterion_zero_doppler,
    selftest.criterion_scanlines,
    selftest.criterion_resampler,
    selftest.criterion_doppler,
    selftest.criterion_determinism,
]


def report(capsys, line):
    with capsys.disabled():
        print("\n" + line)


@pytest.mark.parametrize("check", CRITERIA, ids=[c.__name__ for c in CRITERIA])
def test_criterion(check, capsys):
    result = check()
    report(capsys, result.line())
    assert result.passed, result.line()


def test_criterion_9_selftest_command(capsys):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pfa_rd_geo.cli", "selftest"], capture_output=True, text=True)
    seconds = time.perf_counter() - t0
    passed = proc.returncode == 0 and seconds < 60.0
    report(capsys, "{} criterion 9: selftest command (exit {}; {:.1f} s)".format(
        "PASS" if passed else "FAIL", proc.returncode, seconds))
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert seconds < 60.0
    assert proc.stdout.count("PASS criterion") == 8
