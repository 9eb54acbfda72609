"""Shared constructions for the conjugation tests: a pole-safe random
Moebius word generator and the standing catalog of conformal factors."""

import numpy as np

from conforma.bubbles import BubbleParams
from conforma.conformal import Invert, MoebiusMap, Scale, Translate
from conforma.fields import (
    BubbleField,
    ConstantField,
    GaussianBumpField,
    HarmonicPowerField,
)


def random_word(rng, n):
    """At most one inversion, translates bounded by 0.25, scales in
    +-[0.6, 1.8], so images of the shell 0.7 <= |x| <= 1.3 never reach
    the inversion pole or a domain boundary."""
    gens = []
    if rng.random() < 0.8:
        gens.append(Translate(0.25 * rng.uniform(-1, 1, size=n)))
    if rng.random() < 0.8:
        c = rng.uniform(0.6, 1.8) * (-1.0 if rng.random() < 0.3 else 1.0)
        gens.append(Scale(float(c)))
    if rng.random() < 0.7:
        gens.append(Invert())
    if rng.random() < 0.5:
        gens.append(Translate(0.15 * rng.uniform(-1, 1, size=n)))
    if rng.random() < 0.5:
        gens.append(Scale(float(rng.uniform(0.7, 1.5))))
    if not gens:
        gens.append(Scale(1.3))
    return MoebiusMap(tuple(gens))


def catalog_fields(n):
    """Five positive conformal factors with unbounded-domain evaluations."""
    return [
        BubbleField(BubbleParams(n=n, a=1.0, beta=1.0)),
        BubbleField(
            BubbleParams(n=n, a=2.0, beta=4.0, center=np.linspace(0.3, -0.2, n))
        ),
        ConstantField(n, 2.5),
        GaussianBumpField(n, base=1.0, amp=0.3, width=1.2),
        HarmonicPowerField(n),
    ]
