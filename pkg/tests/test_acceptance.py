"""Acceptance criteria, one test (and one PASS/FAIL line) each.

Tolerances are pinned: every comparison is exact rational or integer
equality (tolerance 0); the three runtime limits are 5 s, 60 s and 30 s.
Run directly (`python tests/test_acceptance.py`) for just the lines.
"""
from fractions import Fraction

import pytest

from gqm import verify

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

TOLERANCE = Fraction(0)


def _report(check, note=""):
    line = f"{check.line()}  tolerance={TOLERANCE}{'  ' + note if note else ''}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert check.ok, check.detail


def test_criterion_01_finite_cl_oracle():
    c = verify.check_cl_oracle()
    _report(c, "limit 5s")
    assert c.seconds < 5.0


def test_criterion_02_commutator_chain():
    c = verify.check_commutator_chains(200, verify.DEFAULT_SEED)
    _report(c, f"{c.detail['samples']} samples")


def test_criterion_03_fill_sandwich():
    c = verify.check_fill_sandwich((2, 3, 4))
    _report(c)


def test_criterion_04_scl_commutator_f2():
    c = verify.check_f2_scl(radius=4, outer_radius=5, outer_product_length=8)
    _report(c, f"lower={c.detail.get('lower')} upper(r=4)={c.detail.get('upper_radius_4')} "
               f"upper(r=5,|g1g2|<=8)={c.detail.get('upper_radius_5_product_8')}  limit 60s")
    assert c.detail["lower"] == "1/2"
    assert Fraction(1, 2) <= Fraction(c.detail["upper_radius_4"]) <= 1
    assert c.seconds < 60.0


def test_criterion_05_separation():
    c = verify.check_separation(4)
    _report(c)


def test_criterion_06_surfaces():
    c = verify.check_surfaces()
    _report(c)


def test_criterion_07_rewrite():
    c = verify.check_rewrite(100, verify.DEFAULT_SEED)
    _report(c, "100 instances per context")


def test_criterion_08_free_product_quotient():
    c = verify.check_freeindex()
    _report(c, "limit 30s")
    assert c.detail["Z4*Z6"] == [2] and c.detail["Z2*Z3"] == []
    assert c.seconds < 30.0


def test_criterion_09_extensions():
    c = verify.check_extensions(radius=5, pair_radius=3)
    _report(c)


def test_criterion_10_section_constants():
    c = verify.check_section_constants()
    _report(c)


def test_criterion_11_duality_never_inverts():
    c = verify.check_duality(3)
    _report(c, f"{c.detail['comparisons']} comparisons")


if __name__ == "__main__":
    import sys
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
