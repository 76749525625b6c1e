"""Numerical models of quantum Heisenberg manifolds and their pairings.

The package is split into

* :mod:`qhm.core`: the algebra, its frame, trace and matrices over it;
* :mod:`qhm.heisenberg`: the Heisenberg action and its derivations;
* :mod:`qhm.cyclic`: cocycles, Chern-Connes pairings and dual cycles;
* :mod:`qhm.modules`: the module E, its connexions and the isomorphism Phi;
* :mod:`qhm.ktheory`: the unitaries, the odd table and the Toeplitz lift;
* :mod:`qhm.harness`: the verification suites and the ``qhm`` command.
"""

from .core import (
    MatrixElement,
    QhmElement,
    QhmError,
    QhmParams,
    U1,
    U2,
    build_frame,
    distance,
    mul,
    one,
    random_element,
    star,
    trace,
)
from .cyclic import pair_even, pair_odd, standard_cocycles
from .heisenberg import GroupElem, act_alpha, derive
from .ktheory import build_unitaries, odd_table

__all__ = [
    "MatrixElement",
    "QhmElement",
    "QhmError",
    "QhmParams",
    "U1",
    "U2",
    "build_frame",
    "distance",
    "mul",
    "one",
    "random_element",
    "star",
    "trace",
    "pair_even",
    "pair_odd",
    "standard_cocycles",
    "GroupElem",
    "act_alpha",
    "derive",
    "build_unitaries",
    "odd_table",
]
