import dataclasses
import json

import numpy as np
import pytest

from fracwave.errors import DomainError, SingularAlphaError, SupportError
from fracwave.fracops import TimeGrid
from fracwave.solutions import build_odibat, build_quintic
from fracwave.subspace import Basis, KOperator
from fracwave.verify import (
    ResidualReport,
    SeparatedField,
    estimate_order,
    make_grid,
    nested_grids,
    verify_odibat,
    verify_pde,
    verify_quintic_system,
    verify_similarity,
)


@pytest.mark.parametrize("alpha", [0.25, 0.75, 0.1, 0.9])
def test_similarity_report(alpha):
    rep = verify_similarity(alpha)
    assert rep.target == "similarity_system"
    assert rep.max_residual <= 1e-11 and rep.passed
    assert rep.est_order is None


def test_similarity_report_flags_printed_constant():
    rep = verify_similarity(0.25)
    printed = rep.extras["printed_C0_residuals"]
    assert abs(printed[0]) > 1e-3
    assert max(abs(r) for r in printed[1:]) <= 1e-11
    assert "printed" in rep.notes
    with pytest.raises(SingularAlphaError):
        verify_similarity(0.5)


def test_quintic_system_analytic_branch():
    for alpha in (0.3, 0.9):
        rep = verify_quintic_system(alpha, -3.0, numerical=False)
        assert rep.max_residual <= 1e-10 and rep.passed


def test_quintic_system_numerical_branch():
    rep = verify_quintic_system(0.75, 1.0)
    assert rep.passed
    assert rep.max_residual <= 1e-3
    assert rep.extras["analytic_max"] <= 1e-10
    assert abs(rep.est_order - 1.25) <= 0.3
    errs = [e for _, e in rep.levels]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    for r in ratios:
        assert abs(r / 2**1.25 - 1) <= 0.25


def test_quintic_system_classical():
    rep = verify_quintic_system(1.0, 2.0, h=2**-8)
    assert rep.max_residual <= 1e-12 and rep.passed


def test_quintic_system_window_validation():
    with pytest.raises(DomainError):
        verify_quintic_system(0.5, 1.0, t_window=(0.2, 5.0))
    with pytest.raises(DomainError):
        verify_quintic_system(0.5, 1.0, t_window=(3.0, 2.0))


def quintic_pde_report(q, h=2**-9):
    return verify_pde(q, q.operator, make_grid(5.0, h, 3), levels=3)


def test_quintic_pde_converges():
    q = build_quintic(0.75, 1, 4.5, 2, 1)
    rep = quintic_pde_report(q)
    errs = [e for _, e in rep.levels]
    assert errs[0] > errs[1] > errs[2]
    assert abs(rep.est_order - 1.25) <= 0.3
    assert len(rep.x_samples) == 16


def test_quintic_pde_detects_perturbation():
    q = build_quintic(0.75, 1, 4.5, 2, 1)
    bad = dataclasses.replace(q, mubar=q.mubar * 1.01)
    assert quintic_pde_report(bad).max_residual > 10 * quintic_pde_report(q).max_residual


def test_zero_field_has_zero_residual():
    zero = SeparatedField(Basis.trig(1), lambda t: (np.zeros_like(t),) * 3, alpha=0.4)
    op = KOperator(nu=2, beta=-1, gamma_c=3, p=3, n=2, m=1)
    rep = verify_pde(zero, op, make_grid(2.0, 2**-7, 3), target="custom")
    assert rep.max_residual == 0.0 and rep.l2_residual == 0.0


def test_odibat_reports():
    rep = verify_odibat(build_odibat(1.0, 1.0, 1.0))
    assert rep.passed is None and rep.target == "odibat_pde"
    assert rep.est_order >= 0.7
    frac = verify_odibat(build_odibat(1.0, 1.0, 0.8))
    assert frac.passed is None and frac.est_order is not None
    assert np.isfinite(frac.max_residual)


def test_odibat_support_error():
    o = build_odibat(1.0, 1.0, 0.8)
    with pytest.raises(SupportError):
        verify_odibat(o, x_samples=[0.0, 7.5])


def test_determinism():
    a = verify_quintic_system(0.6, 1.0, h=2**-8, levels=3)
    b = verify_quintic_system(0.6, 1.0, h=2**-8, levels=3)
    assert a.max_residual == b.max_residual and a.to_json() == b.to_json()


def test_report_record():
    rep = verify_quintic_system(0.6, 1.0, h=2**-8, levels=3)
    rec = json.loads(rep.to_json())
    assert rec["schema"] == 1 and rec["target"] == "quintic_system"
    assert set(rec) >= {"grid", "x_samples", "max_residual", "l2_residual", "est_order", "notes"}
    assert rep.summary().startswith("quintic_system: PASS")
    with pytest.raises(DomainError):
        ResidualReport("nonsense", None, (), 0.0, 0.0)
    with pytest.raises(DomainError):
        ResidualReport("custom", None, (), -1.0, 0.0)


def test_grid_helpers():
    g = make_grid(5.0, 2**-6, 3)
    levels = nested_grids(g, 3)
    assert [s for s, _ in levels] == [4, 2, 1]
    assert levels[-1][1] == g
    with pytest.raises(DomainError):
        nested_grids(TimeGrid(0.0, 0.1, 10), 3)
    assert estimate_order([0.1, 0.05, 0.025], [1e-2, 2.5e-3, 6.25e-4]) == pytest.approx(2.0)
    assert estimate_order([0.1], [1.0]) is None
