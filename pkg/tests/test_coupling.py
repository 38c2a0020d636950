import math

import numpy as np
import pytest

from wgqed import SingularSeparationError, build_couplings, collective_modes, nonwaveguide_coupling
from wgqed.coupling import scenario_modes

from conftest import K_A, LAMBDA, pair


def reference_coupling(gj, gl, x, phi):
    """Direct transcription, scalar only."""
    s2 = math.sin(phi) ** 2
    c2 = math.cos(phi) ** 2
    return 0.75 * math.sqrt(gj * gl) * (s2 * (-1j / x) + (1 - 3 * c2) * (1 / x**2 + 1j / x**3))


@pytest.mark.parametrize("a", [0.01, 0.05, 0.3, 0.5, 1.7])
@pytest.mark.parametrize("phi", [math.pi / 2, 0.3, 0.0])
def test_coupling_matches_transcription(a, phi):
    x = K_A * a * LAMBDA
    got = nonwaveguide_coupling(0.2, 0.3, x, phi)
    assert got == pytest.approx(reference_coupling(0.2, 0.3, x, phi), rel=1e-14)


def test_coupling_vectorized():
    x = np.array([0.5, 1.0, 2.0])
    got = nonwaveguide_coupling(0.2, 0.2, x)
    assert got.shape == (3,)
    assert got[1] == pytest.approx(reference_coupling(0.2, 0.2, 1.0, math.pi / 2))


def test_coupling_quoted_values():
    assert nonwaveguide_coupling(0.2, 0.2, K_A * 0.5 * LAMBDA) == pytest.approx(0.0152 - 0.0429j, abs=6e-5)
    assert nonwaveguide_coupling(0.2, 0.2, K_A * 0.05 * LAMBDA) == pytest.approx(1.52 + 4.36j, abs=6e-3)


def test_zero_separation_raises():
    with pytest.raises(SingularSeparationError):
        nonwaveguide_coupling(0.2, 0.2, 0.0)


def test_matrices_structure():
    cm = build_couplings(pair(0.05, 0.2))
    assert np.allclose(np.diag(cm.v_w), 0.5)
    assert np.allclose(np.diag(cm.v_nw), 0.1)
    assert np.allclose(np.diag(cm.effective), 0.6)
    assert np.allclose(cm.v_nw, cm.v_nw.T)
    assert cm.effective[0, 1] == pytest.approx((0.5 + cm.v_nw[0, 1]) * np.exp(1j * 0.05 * 2 * math.pi))


def test_no_nw_keeps_local_loss():
    cm = build_couplings(pair(0.05, 0.2, nw=False))
    assert cm.v_nw[0, 1] == 0
    assert cm.v_nw[0, 0] == pytest.approx(0.1)


def test_quoted_effective_coupling():
    # combined pair coupling for a = 0.05 lambda, gamma = 0.1
    cm = build_couplings(pair(0.05, 0.1))
    assert cm.effective[0, 1] == pytest.approx(0.52 + 2.46j, abs=6e-3)


@pytest.mark.parametrize(
    "a, nw, rates, shift",
    [
        (0.5, False, (1.1, 0.1), 0.0),
        (0.5, True, (1.115, 0.085), 0.043),
        (0.05, False, (1.0755, 0.1245), 0.1545),
        (0.05, True, (1.174, 0.026), 4.771),
    ],
)
def test_two_emitter_modes(a, nw, rates, shift):
    modes = scenario_modes(pair(a, 0.2, nw=nw))
    assert [m.decay_rate for m in modes] == pytest.approx(rates, abs=1.5e-3)
    assert [abs(m.shift) for m in modes] == pytest.approx([shift, shift], abs=1.5e-3)
    assert modes[0].linewidth == pytest.approx(2 * modes[0].decay_rate)


def test_modes_sorted_and_normalized():
    modes = collective_modes(build_couplings(pair(0.05, 0.2)))
    assert modes[0].decay_rate >= modes[1].decay_rate
    for m in modes:
        assert np.linalg.norm(m.vector) == pytest.approx(1.0)


def test_single_emitter_mode():
    from conftest import single

    (m,) = scenario_modes(single(0.2))
    assert m.eigenvalue == pytest.approx(0.6)


def test_matrix_csv(tmp_path):
    cm = build_couplings(pair(0.05, 0.2))
    p = tmp_path / "g.csv"
    cm.write_csv(p)
    rows = p.read_text().splitlines()
    assert rows[0] == "re_0,im_0,re_1,im_1"
    vals = [float(v) for v in rows[1].split(",")]
    assert vals[0] == pytest.approx(0.6)
