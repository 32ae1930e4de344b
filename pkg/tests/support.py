"""Shared constants and builders for the test suite."""
from fractions import Fraction
from pathlib import Path

from kuranishi.graded_core import Element
from kuranishi.novikov import NovikovScalar

FIXTURES = Path(__file__).resolve().parent.parent / "assets" / "fixtures"
E = Fraction(3)


def scalar(text, cutoff=E):
    return NovikovScalar.parse(text, cutoff)


def element(module, cutoff=E, **coeffs):
    return Element(module, {label: scalar(text, cutoff) for label, text in coeffs.items()}, cutoff)


def read_fixture(name):
    return (FIXTURES / f"{name}.json").read_text(encoding="utf-8")
