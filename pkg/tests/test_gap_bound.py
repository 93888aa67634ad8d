import dataclasses
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sglgap import meshgen
from sglgap.gap_bound import (
    BalanceError,
    CurvatureRegimeError,
    GapBoundReport,
    balance_point,
    balance_vector,
    composed_profile,
    evaluate_ball,
    evaluate_mesh,
    gradient_sum,
    hadamard_ratio,
    make_report,
    minmax_sanity,
    test_field as field_at,
)
from sglgap.mesh_domain import IneligibleDomainError, exp_map
from sglgap.radial_eig import ball_spectrum
from sglgap.spaceform import CurvaturePair, Spaceform

MESH_KEYS = ["square", "rect-1x2", "ellipse-1.5", "hpentagon", "cap-0.6"]


# ---------------------------------------------------------------------------
# test field


def test_field_flat_identity_profile():
    rng = np.random.default_rng(0)
    p = np.array([0.2, -0.1])
    x = rng.uniform(-1, 1, (50, 2))
    P, d = field_at(0.0, p, x, lambda r: r)
    assert np.allclose(P, x - p, atol=1e-14)
    assert np.allclose(d, np.linalg.norm(x - p, axis=1), atol=1e-14)


@pytest.mark.parametrize("k", [-1.0, 1.0])
def test_field_length_is_profile(k):
    rng = np.random.default_rng(1)
    x = rng.uniform(-0.4, 0.4, (50, 2))
    P, d = field_at(k, [0.1, 0.05], x, np.tanh)
    assert np.allclose(np.linalg.norm(P, axis=1), np.tanh(d), atol=1e-14)


def test_field_vanishes_at_base_point():
    P, d = field_at(-1.0, [0.1, 0.2], np.array([[0.1, 0.2]]), lambda r: 1 + r)
    assert d[0] == 0 and np.all(P == 0)


@settings(max_examples=30)
@given(st.sampled_from([-1.0, 0.0, 1.0]), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3),
       st.floats(0.05, 0.4), st.floats(0, 2 * math.pi))
def test_gradient_sum_closed_form(k, px, py, rho, theta):
    p = np.array([px, py])
    sf = Spaceform(2, k)
    # a point at geodesic distance rho from p
    x = exp_map(k, p, rho * np.array([[math.cos(theta), math.sin(theta)]]))

    def g(r):
        return np.sin(r) + 0.3 * np.asarray(r) ** 2

    got = gradient_sum(k, p, x, g)[0]
    dg = math.cos(rho) + 0.6 * rho
    expect = dg**2 + g(rho) ** 2 / float(sf.sn(rho)) ** 2
    assert got == pytest.approx(expect, rel=1e-6)


# ---------------------------------------------------------------------------
# balance point


@pytest.mark.parametrize("key,p0", [
    ("square", (0.15, -0.1)),
    ("rect-1x2", (0.2, -0.5)),
    ("hpentagon", (0.1, 0.2)),
])
def test_balance_symmetric_domains_reach_centre(pipelines, key, p0):
    res = pipelines[key]
    prob, prof = res.extras["problem"], res.extras["hf"].profile
    bp = balance_point(prob, prof, tol=1e-8, p0=np.array(p0))
    assert bp.residual < 1e-8
    assert np.linalg.norm(bp.p) < 1e-6
    assert bp.trace[-1] == bp.residual and bp.trace[0] > bp.residual


@pytest.mark.parametrize("key", MESH_KEYS)
def test_balance_residual_on_corpus(pipelines, key):
    res = pipelines[key]
    assert res.balance.residual < 1e-6
    X, _ = balance_vector(res.extras["problem"], res.balance.p, res.extras["hf"].profile)
    assert np.linalg.norm(X) < 1e-6


def test_balance_asymmetric_domain():
    mesh = meshgen.polygon([[0, 0], [1.2, 0], [0.3, 0.9]], m=40, centre=(0.5, 0.3), name="tri")
    res = evaluate_mesh(mesh, 1.0, CurvaturePair(0.0, 0.0))
    assert res.balance.residual < 1e-6
    assert res.report.holds


def test_balance_iteration_cap(pipelines):
    res = pipelines["square"]
    with pytest.raises(BalanceError) as exc:
        balance_point(res.extras["problem"], res.extras["hf"].profile, max_iter=0, p0=np.array([0.2, 0.2]))
    assert len(exc.value.trace) == 1


# ---------------------------------------------------------------------------
# middle inequality and sanity checks


@pytest.mark.parametrize("key", MESH_KEYS + ["warped"])
def test_middle_chain(pipelines, key):
    mid = pipelines[key].middle
    assert mid.certified
    assert mid.holds and mid.chain_h and mid.chain_F
    assert mid.lhs <= mid.rhs * (1 + 1e-3)


@pytest.mark.parametrize("key", ["square", "hpentagon"])
def test_minmax_sanity(pipelines, key):
    res = pipelines[key]
    raw, proj, ok = minmax_sanity(res.extras["problem"], res.balance, res.extras["hf"].profile)
    assert ok
    # at the balance point the u1 component is already tiny
    assert np.allclose(raw, proj, rtol=1e-3)


@pytest.mark.parametrize("key", ["square", "hpentagon"])
def test_test_fields_orthogonal_to_u1(pipelines, key):
    res = pipelines[key]
    prob = res.extras["problem"]
    g = composed_profile(res.extras["hf"].profile, res.balance.sigma)
    P, _ = field_at(prob.k, res.balance.p, prob.qpts, g)
    inner = np.abs(np.sum((prob.qw * prob.u1q**2)[:, None] * P, axis=0)) / prob.mass
    assert np.all(inner < 1e-6)


# ---------------------------------------------------------------------------
# reports


def test_report_invariants(pipelines):
    for key in MESH_KEYS + ["warped"]:
        rep = pipelines[key].report
        assert rep.gap == pytest.approx(rep.lambda2 - rep.lambda1, rel=1e-14)
        assert rep.bound_rhs == pytest.approx(rep.curvature_const * rep.ball_gap, rel=1e-14)
        assert rep.relative_slack == pytest.approx((rep.bound_rhs - rep.gap) / rep.gap, rel=1e-12)
        assert rep.verdict == "holds"
        assert rep.C1 >= 1.0 - 1e-12


_BALLS = {R: ball_spectrum(Spaceform(2, 0.0), R) for R in (0.3, 0.7, 1.0, 2.0)}


@given(st.sampled_from(sorted(_BALLS)), st.floats(1.0, 200.0), st.floats(0.01, 3.0), st.floats(-2.0, 0.0))
def test_make_report_verdict(R, lam1, spread, K):
    ball = _BALLS[R]
    lam2 = lam1 + spread * ball.gap
    rep = make_report(lam1, lam2, 1.0, ball, 1.0, CurvaturePair(0.0, K), d=1.0)
    const = (math.sinh(math.sqrt(-K)) / math.sqrt(-K)) ** 2 if K < 0 else 1.0
    assert rep.curvature_const == pytest.approx(const, rel=1e-10)
    assert rep.holds == (rep.gap <= rep.bound_rhs * 1.01)


def test_make_report_rejects_zero_gap():
    with pytest.raises(ValueError):
        make_report(5.0, 5.0, 1.0, _BALLS[1.0], 1.0, CurvaturePair(0.0, 0.0), d=1.0)


def test_warped_curvature_constant(pipelines, oracle):
    rep = pipelines["warped"].report
    assert rep.curvature_const == pytest.approx(oracle["warped_curv_const"], rel=1e-12)
    assert rep.C1 == pytest.approx(oracle["warped_c1"], rel=1e-6)


def test_warped_eigenvalues(pipelines, oracle):
    rep = pipelines["warped"].report
    assert rep.lambda1 == pytest.approx(oracle["warped_R1_lambda1"], rel=1e-6)
    assert rep.lambda2 == pytest.approx(oracle["warped_R1_lambda2"], rel=1e-6)


def test_scale_coherence():
    a = evaluate_mesh(meshgen.square(1.0, n=40), 1.0, CurvaturePair(0.0, 0.0)).report
    b = evaluate_mesh(meshgen.square(2.0, n=40), 1.0, CurvaturePair(0.0, 0.0)).report
    assert b.lambda1 == pytest.approx(a.lambda1 / 4, rel=1e-9)
    assert b.gap == pytest.approx(a.gap / 4, rel=1e-9)
    assert b.R == pytest.approx(2 * a.R, rel=1e-9)
    assert b.relative_slack == pytest.approx(a.relative_slack, rel=1e-6)


def test_csv_and_json_round_trip(pipelines):
    rep = pipelines["hpentagon"].report
    back = GapBoundReport(**json.loads(rep.to_json()))
    assert back == rep
    row = rep.csv_row()
    assert len(row) == len(GapBoundReport.columns())
    fields = dataclasses.fields(GapBoundReport)
    parsed = {f.name: (v if f.type == "str" else float(v)) for f, v in zip(fields, row)}
    assert GapBoundReport(**parsed) == rep


def test_columns():
    assert GapBoundReport.columns() == [
        "lambda1", "lambda2", "gap", "alpha", "R", "ball_gap", "C1", "curvature_const",
        "bound_rhs", "verdict", "relative_slack", "d", "K_lower", "k_upper",
    ]


# ---------------------------------------------------------------------------
# balls and the ratio form


@pytest.mark.parametrize("n,k,R", [(2, 0.0, 1.0), (2, -1.0, 1.0), (2, 1.0, 0.6), (3, -1.0, 0.8), (3, 0.0, 1.0)])
def test_ball_is_sharp(n, k, R):
    rep = evaluate_ball(n, k, R)
    assert abs(rep.relative_slack) < 1e-6
    assert rep.curvature_const == 1.0


def test_ball_hemisphere_rule():
    with pytest.raises(IneligibleDomainError):
        evaluate_ball(2, 1.0, 0.8)


def test_hadamard_square_and_disk(pipelines, oracle):
    bound, ok = hadamard_ratio(pipelines["square"].report)
    assert ok
    assert bound == pytest.approx(oracle["ppw_ratio"] - 1, rel=1e-9)
    rep = pipelines["disk"].report
    bound, ok = hadamard_ratio(rep)
    assert ok
    assert rep.lambda2 / rep.lambda1 - 1 == pytest.approx(bound, rel=1e-2)


def test_hadamard_needs_flat_upper_bound(pipelines):
    with pytest.raises(CurvatureRegimeError):
        hadamard_ratio(pipelines["hpentagon"].report)


# ---------------------------------------------------------------------------
# curvature pairs


def test_lower_bound_above_upper_bound_rejected():
    with pytest.raises(ValueError):
        CurvaturePair(0.0, 0.5)


def test_upper_bound_must_match_model():
    with pytest.raises(CurvatureRegimeError):
        evaluate_mesh(meshgen.square(n=8), 1.0, CurvaturePair(0.5, 0.0))


def test_lower_K_raises_constant_only():
    mesh = meshgen.square(n=40)
    a = evaluate_mesh(mesh, 1.0, CurvaturePair(0.0, 0.0)).report
    b = evaluate_mesh(mesh, 1.0, CurvaturePair(0.0, -1.0)).report
    assert b.gap == a.gap and b.ball_gap == a.ball_gap
    c = math.sqrt(2)
    assert b.curvature_const == pytest.approx((math.sinh(c) / c) ** 2, rel=1e-12)
    assert b.bound_rhs > a.bound_rhs


def test_alpha_shrinks_comparison_ball():
    mesh = meshgen.square(n=40)
    a = evaluate_mesh(mesh, 1.0, CurvaturePair(0.0, 0.0)).report
    b = evaluate_mesh(mesh, 0.8, CurvaturePair(0.0, 0.0)).report
    assert b.R == pytest.approx(0.8 * a.R, rel=1e-9)
    assert b.ball_gap == pytest.approx(a.ball_gap / 0.64, rel=1e-9)
