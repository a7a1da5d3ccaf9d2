import io
import json

import numpy as np
import pytest

from s4rg.fixed_points import find_fixed_points, jacobian, point_ids, wilson_fisher
from s4rg.flow import FLOW_COLUMNS, Terminal, basin_scan, distance, trace, write_flow_csv
from s4rg.maps import Case, Couplings, RGMap

NN = RGMap(Case.NEAREST_NEIGHBOR)


@pytest.fixture(scope="module")
def known():
    recs = find_fixed_points(NN, ((0.0, 1.8), (0.0, 1.0)), starts=12)
    return list(zip(point_ids(recs), (r.point for r in recs))), recs


def test_start_at_gaussian_point(known):
    t = trace(NN, Couplings(1.0, 0.0), known_points=known[0])
    assert t.terminal is Terminal.CONVERGED and t.fixed_point_id == "gaussian" and t.iterations == 0
    assert t.steps[0] == t.start


def test_wf_unstable_direction(known):
    pts, recs = known
    wf = wilson_fisher(recs)
    J = jacobian(NN, wf.point)
    w, v = np.linalg.eig(J)
    d = v[:, np.argmax(np.abs(w))].real
    d /= np.max(np.abs(d))
    for sign in (1, -1):
        x = NN.vector(wf.point) + sign * 0.01 * d
        t = trace(NN, Couplings(*x), known_points=pts)
        assert not (t.terminal is Terminal.CONVERGED and t.fixed_point_id == "wilson_fisher")


def test_low_start_deterministic(known):
    # oracle: direct iteration of the tabulated map from the same start
    pts = known[0]
    a = trace(NN, Couplings(0.2, 0.05), known_points=pts)
    b = trace(NN, Couplings(0.2, 0.05), known_points=pts)
    assert a.to_json() == b.to_json()
    assert a.terminal is Terminal.CONVERGED and a.fixed_point_id == "trivial"
    x = np.array([0.2, 0.05])
    for _ in range(a.iterations):
        x = NN(x)
    assert (a.steps[-1].K, a.steps[-1].u) == (x[0], x[1])
    assert distance(a.steps[-1], Couplings(0.0, 0.0)) < 1e-9


def test_consecutive_steps_related_by_map(known):
    t = trace(NN, Couplings(0.9, 0.6), known_points=known[0])
    for c0, c1 in zip(t.steps, t.steps[1:]):
        assert NN.step(c0) == c1


def test_gaussian_line_oracle(known):
    pts = known[0]
    for k in (0.3, 0.6, 0.95):
        t = trace(NN, Couplings(k, 0.0), known_points=pts)
        assert t.terminal is Terminal.CONVERGED and t.fixed_point_id == "trivial"
        K = k
        for _ in range(t.iterations):
            K = K * K / (2 - K * K)
        assert t.steps[-1].K == pytest.approx(K, abs=1e-15)
    for k in (1.05, 1.3):
        t = trace(NN, Couplings(k, 0.0), known_points=pts)
        assert t.terminal in (Terminal.DIVERGED, Terminal.RESCALE_FAILED)
        assert t.steps[1].K > k


def test_divergence_guard():
    t = trace(NN, Couplings(1.3, 0.0), div_threshold=50.0)
    assert t.terminal in (Terminal.DIVERGED, Terminal.RESCALE_FAILED)
    for c in t.steps[:-1]:
        assert abs(c.K) <= 50.0


def test_converged_has_independent_residual(known):
    for t in basin_scan(NN, (0.1, 1.2), (0.0, 0.8), (5, 5), known_points=known[0]):
        if t.terminal is Terminal.CONVERGED:
            c = t.steps[-1]
            assert distance(NN.step(c), c) < 1e-8


def test_max_iter():
    t = trace(NN, Couplings(0.99, 0.0), max_iter=3)
    assert t.terminal is Terminal.MAX_ITER and t.iterations == 3


def test_single_cell_at_fixed_point(known):
    pts = known[0]
    scan = basin_scan(NN, (1.0, 1.0), (0.0, 0.0), (1, 1), known_points=pts)
    assert len(scan) == 1 and scan[0].fixed_point_id == "gaussian"


def test_nnn_domain_guard():
    scan = basin_scan(RGMap(Case.NEXT_NEAREST), (1.5, 2.5), (0.0, 0.0), (3, 1))
    assert [t.terminal for t in scan][-1] is Terminal.DOMAIN_ERROR
    assert scan[-1].iterations == 0


def test_flow_csv_and_json(known):
    scan = basin_scan(NN, (0.2, 0.4), (0.0, 0.1), (2, 2), known_points=known[0])
    fh = io.StringIO()
    write_flow_csv(scan, fh)
    lines = fh.getvalue().splitlines()
    assert lines[0] == ",".join(FLOW_COLUMNS) == "K0,u0,h0,b,terminal,fixed_point_id,iterations"
    assert len(lines) == 5
    assert [float(x.split(",")[0]) for x in lines[1:]] == [0.2, 0.2, 0.4, 0.4]
    d = json.loads(scan[0].to_json())
    assert d["iterations"] == len(d["steps"]) - 1
