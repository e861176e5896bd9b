import pytest

from driftlap import grushin as G
from driftlap.errors import ConfigInvalid, ExcludedParameter, ResolutionTooLow
from driftlap.params import DriftParams
from driftlap.verify.delta import DeltaMassEstimate, delta_mass


def test_heisenberg_p2_l0_stable():
    est = delta_mass("heisenberg", DriftParams(2.0, 0.0), (0.2, 0.1, 0.05))
    assert est.converged and est.stable and est.passed
    assert est.deviation <= 0.02
    assert all(abs(m.imag) <= 1e-12 * abs(m) for m in est.masses_fine)


@pytest.mark.parametrize("space", ["heisenberg", "grushin"])
@pytest.mark.parametrize("L", [1.0, -1.0])
def test_degenerate_loci(space, L):
    est = delta_mass(space, DriftParams(2.0, L))
    assert est.degenerate and est.passed
    assert all(abs(m) <= 1e-12 for m in est.masses + est.masses_fine)


@pytest.mark.parametrize(
    "space,p,L,shape",
    [
        ("heisenberg", 3.0, 0.3, None),
        ("heisenberg", 1.5, 0.4, None),
        ("grushin", 2.0, 0.0, None),
        ("grushin", 3.0, 0.4, G.GrushinShape(0.3, -0.2, 2.0, 3)),
    ],
)
def test_stability_cases(space, p, L, shape):
    assert delta_mass(space, DriftParams(p, L), shape=shape).passed


def test_resolution_too_low():
    with pytest.raises(ResolutionTooLow):
        delta_mass("heisenberg", DriftParams(2.0, 0.0), resolution=8)


def test_bad_inputs():
    with pytest.raises(ConfigInvalid):
        delta_mass("heisenberg", DriftParams(2.0, 0.0), (0.1, 0.2))
    with pytest.raises(ConfigInvalid):
        delta_mass("heisenberg", DriftParams(2.0, 0.0), (0.1, -0.1))
    with pytest.raises(ConfigInvalid):
        delta_mass("grushin", DriftParams(3.0, 0.0), shape=G.GrushinShape(n=2))
    with pytest.raises(ConfigInvalid):
        delta_mass("grushin", DriftParams(3.0, 0.0), shape=G.GrushinShape(c=-1.0))
    with pytest.raises(ExcludedParameter):
        delta_mass("heisenberg", DriftParams(3.0, 0.25))


def test_degeneracy_wins_over_exclusion():
    # at p=4, L=0 the exponents vanish and so does the prefactor
    est = delta_mass("heisenberg", DriftParams(4.0, 0.0))
    assert est.degenerate and all(m == 0 for m in est.masses)


def test_backends_agree():
    prm = DriftParams(3.0, 0.3)
    a = delta_mass("heisenberg", prm, resolution=32, backend="numpy")
    b = delta_mass("heisenberg", prm, resolution=32, backend="numba")
    for x, y in zip(a.masses_fine, b.masses_fine):
        assert abs(x - y) <= 1e-12 * abs(x)


def test_round_trip():
    est = delta_mass("heisenberg", DriftParams(3.0, 0.3), resolution=32)
    back = DeltaMassEstimate.from_dict(est.to_dict())
    assert back.to_dict() == est.to_dict()
