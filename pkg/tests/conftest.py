import os
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from exactrng.process import IID, FiniteMixture, Markov  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

FAIR = IID((F(1, 2), F(1, 2)))
TWO_THIRDS = IID((F(2, 3), F(1, 3)))
ONE_THIRD = IID((F(1, 3), F(2, 3)))
MARKOV_H14 = Markov(((F(3, 4), F(1, 4)), (F(1, 4), F(3, 4))), (F(1, 2), F(1, 2)))
REDUCIBLE = Markov(
    ((F(1, 2), F(1, 2), F(0)), (F(1, 2), F(1, 2), F(0)), (F(0), F(0), F(1))),
    (F(1, 4), F(1, 4), F(1, 2)),
)
MIXTURE = FiniteMixture((F(1, 3), F(2, 3)), (IID((F(1, 2), F(1, 2))), IID((F(3, 4), F(1, 4)))))

# (coin, target, n) pairs used across analysis, bounds and acceptance tests
CORPUS = [
    ("fair_to_two_thirds", FAIR, TWO_THIRDS, 1),
    ("markov_to_iid", MARKOV_H14, ONE_THIRD, 4),
    ("fair_to_reducible", FAIR, REDUCIBLE, 4),
]


@pytest.fixture
def configs():
    return CONFIGS
