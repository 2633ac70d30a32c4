import numpy as np
import pytest

from midpoint_vi.errors import DomainError
from midpoint_vi.time_grid import (
    KINDS,
    NodeSet,
    TimeGrid,
    project_half,
    rho,
    rho_circ_of_node,
    sigma,
    sigma_circ_of_node,
)

G = TimeGrid(0.0, 1.0, 4)


def test_grid_basics():
    assert G.step == 0.25
    assert np.allclose(G.nodes(), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(G.half_nodes(), [0.125, 0.375, 0.625, 0.875])
    assert TimeGrid.from_step(1.0, 0.5, 3).b == pytest.approx(2.5)


@pytest.mark.parametrize("args", [(0, 1, 0), (1, 1, 3), (1, 0, 2), (0, np.inf, 2), (0, 1, 2.5)])
def test_grid_rejects_bad_input(args):
    with pytest.raises(DomainError):
        TimeGrid(*args)


def test_sizes_of_every_node_set():
    n = G.n_intervals
    expected = {
        "T": n + 1, "T_plus": n, "T_minus": n, "T_pm": n - 1,
        "T_half": n, "T_half_plus": n - 1, "T_half_minus": n - 1, "T_half_pm": n - 2,
        "T_circ": 2 * n + 1, "T_circ_plus": 2 * n, "T_circ_minus": 2 * n, "T_circ_pm": 2 * n - 1,
    }
    for kind, size in expected.items():
        assert len(NodeSet(kind, G)) == size, kind
    assert len(NodeSet("T_lambda", G, 0.3)) == n
    assert set(expected) | {"T_lambda"} == set(KINDS)


def test_times_are_recomputed_not_accumulated():
    g = TimeGrid(0.0, 1.0, 10)
    assert g.node(10) == 1.0
    assert g.node(3) == 0.0 + 3 * g.step


def test_circ_interleaves_nodes_and_half_nodes():
    times = NodeSet("T_circ", G).times()
    assert np.allclose(times, np.arange(9) * 0.125)


def test_lambda_points():
    assert np.allclose(NodeSet("T_lambda", G, 0.5).times(), G.half_nodes())
    assert np.allclose(NodeSet("T_lambda", G, 0.0).times(), G.nodes()[:-1])
    with pytest.raises(DomainError):
        NodeSet("T_lambda", G, 1.0)
    with pytest.raises(DomainError):
        NodeSet("T", G, 0.5)


def test_sigma_examples():
    T, Tc = NodeSet("T", G), NodeSet("T_circ", G)
    assert T.time(sigma(T, 0)) == 0.25
    assert Tc.time(sigma(Tc, 0)) == 0.125
    with pytest.raises(DomainError):
        sigma(T, 4)


def test_rho_examples():
    T, Th = NodeSet("T", G), NodeSet("T_half", G)
    assert rho(T, 1) == 0
    assert Th.time(rho(Th, 1)) == 0.125
    with pytest.raises(DomainError):
        rho(T, 0)


def test_shift_on_subsets_respects_membership():
    with pytest.raises(DomainError):
        sigma(NodeSet("T_minus", G), 0)
    assert sigma(NodeSet("T_plus", G), 3) == 4  # the image may leave the subset


def test_project_half():
    Th = NodeSet("T_half", G)
    assert Th.time(project_half(G, 0)) == 0.125
    assert Th.time(project_half(G, 3)) == 0.875
    with pytest.raises(DomainError):
        project_half(G, 4)


def test_circ_neighbours_of_nodes():
    Th = NodeSet("T_half", G)
    assert Th.time(sigma_circ_of_node(G, 1)) == 0.375
    assert Th.time(rho_circ_of_node(G, 1)) == 0.125
    with pytest.raises(DomainError):
        rho_circ_of_node(G, 0)


def test_single_interval_grid():
    g = TimeGrid(0.0, 1.0, 1)
    assert len(NodeSet("T_pm", g)) == 0
    assert len(NodeSet("T_half_pm", g)) == 0
