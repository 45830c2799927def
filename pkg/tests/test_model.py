import numpy as np
import pytest

from qprobe.control import CPMG, CW, FID, ZENO
from qprobe.model import ProbeModel
from qprobe.spectra import OhmicSpectrum, OrnsteinUhlenbeckSpectrum


def _pointwise(m, xs, t):
    return np.array([m.with_x(x).result(t).J for x in xs])


@pytest.mark.parametrize("m,t", [
    (ProbeModel(OrnsteinUhlenbeckSpectrum(1.0, 10.0, 2), CPMG, 8), 18.3),
    (ProbeModel(OrnsteinUhlenbeckSpectrum(0.03, 10.0, 2), ZENO, 500, target="g"), 900.0),
    (ProbeModel(OrnsteinUhlenbeckSpectrum(1.0, 10.0, 4), CPMG, 4), 12.0),
    (ProbeModel(OhmicSpectrum(0.1, 10.0, 2.0), FID), 13.0),
    (ProbeModel(OrnsteinUhlenbeckSpectrum(1.0, 10.0, 2), CPMG, 8, backend="closed"), 18.3),
    (ProbeModel(OrnsteinUhlenbeckSpectrum(0.03, 10.0, 2), ZENO, 500, target="g", backend="flat"), 900.0),
])
def test_vectorized_matches_pointwise(m, t):
    xs = m.x_value * np.array([0.3, 0.8, 1.0, 2.5, 4.0])
    np.testing.assert_allclose(m.attenuation_values(xs, t), _pointwise(m, xs, t), rtol=2e-6)


def test_backend_resolution():
    lor = OrnsteinUhlenbeckSpectrum(1.0, 10.0, 2)
    assert ProbeModel(lor, CPMG, 8).resolved_backend == "exact"
    assert ProbeModel(lor, CW, 8).resolved_backend == "quadrature"
    assert ProbeModel(OrnsteinUhlenbeckSpectrum(1.0, 10.0, 4), CPMG, 8).resolved_backend == "quadrature"
    with pytest.raises(ValueError):
        ProbeModel(OhmicSpectrum(1.0, 1.0, 2.0), FID, backend="exact")
    with pytest.raises(ValueError):
        ProbeModel(lor, CW, 4, backend="exact")
    with pytest.raises(ValueError):
        ProbeModel(lor, CPMG, 4, backend="magic")
    with pytest.raises(ValueError):
        ProbeModel(lor, CPMG, 4, target="beta")
    with pytest.raises(ValueError):
        ProbeModel(lor, CPMG, 4, backend="flat").result(1.0)


def test_alpha_and_with_x():
    m = ProbeModel(OhmicSpectrum(1.0, 10.0, 2.0), CW, 4)
    assert m.alpha == 3.0
    assert ProbeModel(OhmicSpectrum(1.0, 10.0, 2.0), CW, 4, target="g").alpha == 2.0
    assert m.with_x(3.0).spectrum.tau_c == 3.0
    assert ProbeModel(OrnsteinUhlenbeckSpectrum(1, 1, 2), FID, 7).n == 1
