import math

import numpy as np
import pytest
from scipy import special as sp

from qprobe.special import lambert_w0, odd_zeta, zeta


@pytest.mark.parametrize("z", [-1 / math.e + 1e-12, -0.3, -2 * math.exp(-2), -1e-9, 0.0, 1e-6, 0.5, math.e, 10.0, 1e6, 1e300])
def test_lambert_matches_scipy(z):
    w = lambert_w0(z)
    assert w == pytest.approx(sp.lambertw(z, 0).real, rel=1e-12, abs=1e-14)
    if z != 0:
        assert w * math.exp(w) == pytest.approx(z, rel=1e-12)


def test_lambert_anchors():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, rel=1e-15)
    assert lambert_w0(-1 / math.e) == pytest.approx(-1.0, abs=1e-7)
    # DERIVED: residual check of w e^w = z at z = -2 e^-2
    assert lambert_w0(-2 * math.exp(-2)) == pytest.approx(-0.40638, abs=5e-6)


def test_lambert_rejects_below_branch_point():
    with pytest.raises(ValueError):
        lambert_w0(-0.4)


@pytest.mark.parametrize("s", [1.5, 2.0, 3.0, 4.0, 6.0, 8.5, 10.0, 30.0])
def test_zeta_matches_scipy(s):
    assert zeta(s) == pytest.approx(sp.zeta(s), rel=1e-12)
    assert odd_zeta(s) == pytest.approx((1 - 2.0 ** -s) * sp.zeta(s), rel=1e-12)


def test_zeta_closed_forms():
    assert zeta(2.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    assert zeta(4.0) == pytest.approx(math.pi ** 4 / 90, rel=1e-14)


def test_zeta_domain():
    with pytest.raises(ValueError):
        zeta(1.0)
