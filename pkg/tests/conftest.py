import os
import shutil
from fractions import Fraction

import pytest

from aspmt import corpus_path
from aspmt.frontend import parse_file, prepare
from aspmt.smt import ENV_SOLVER

HAVE_SOLVER = bool(os.environ.get(ENV_SOLVER) or shutil.which("z3"))
needs_solver = pytest.mark.skipif(not HAVE_SOLVER, reason="no SMT solver (set ASPMT_SOLVER or install z3)")

Q = Fraction


def load(name):
    return parse_file(corpus_path(name))


@pytest.fixture(scope="session")
def car():
    return prepare(load("car"))


@pytest.fixture(scope="session")
def spacecraft():
    return prepare(load("spacecraft"))


@pytest.fixture(scope="session")
def watertank():
    return prepare(load("watertank"))
