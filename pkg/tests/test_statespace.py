import numpy as np
import pytest

from conftest import random_network
from thermnet.dae import DaeSystem, assemble_dae, partition, steady_state
from thermnet.errors import DegenerateNetworkError, UnknownOutputNodeError
from thermnet.statespace import compact_inputs, recover_algebraic, reduce

# published two-state matrices (two to four significant digits)
PRINTED_A = np.array([[-0.501e-3, 0.034e-3], [0.708e-6, -1.452e-6]])
PRINTED_B_COMPACT = np.array([
    [4.7e-4, 0.0, 0.0, 1.2e-5, 1.2e-5],
    [0.0, 7.2e-7, 2.9e-9, 5.7e-9, 0.0],
])
# published scalar-case matrices with the air capacity removed
PRINTED_A_CA0 = -1.376e-6
PRINTED_C_CA0 = 6.890e-2
PRINTED_D_CA0 = np.array([0.9311, 0.0, 0.0, 0.023759, 0.024311])
PRINTED_B_CA0_FIRST_TWO = np.array([6.597e-7, 7.167e-7])


def reduced(network):
    return reduce(partition(assemble_dae(network)), network.output_node)


def assert_close_per_entry(computed, printed, rtol):
    computed = np.asarray(computed, dtype=float)
    printed = np.asarray(printed, dtype=float)
    for idx in np.ndindex(printed.shape):
        want = printed[idx]
        got = computed[idx]
        if want == 0.0:
            assert got == 0.0, f"entry {idx}: expected exact zero, got {got}"
        else:
            assert abs(got - want) <= rtol * abs(want), (
                f"entry {idx}: {got} vs printed {want}"
            )


class TestReduce:
    def test_state_matrix_matches_print(self, fig3):
        ss = reduced(fig3)
        assert ss.state_names == ("a", "w")
        assert_close_per_entry(ss.a, PRINTED_A, rtol=0.02)

    def test_compact_input_matrix_matches_print(self, fig3):
        ss, cmap = compact_inputs(reduced(fig3))
        assert cmap.kept == (0, 1, 5, 6, 7)
        assert cmap.labels == ("To@Rv", "To@Rco", "Qo@so", "Qi@si", "Qg+Qhvac@a")
        assert_close_per_entry(ss.b, PRINTED_B_COMPACT, rtol=0.02)

    def test_capacitive_output_rows(self, fig3):
        ss = reduced(fig3)
        np.testing.assert_array_equal(ss.c, [1.0, 0.0])
        np.testing.assert_array_equal(ss.d, np.zeros(9))

    def test_input_label_order(self, fig3):
        ss = reduced(fig3)
        assert ss.input_labels == (
            "To@Rv", "To@Rco", "0@Rw1", "0@Rw2", "0@Rci",
            "Qo@so", "Qi@si", "Qg+Qhvac@a", "0@w",
        )

    def test_scalar_case_matches_print(self, fig3_ca0):
        ss = reduced(fig3_ca0)
        assert ss.state_names == ("w",)
        assert abs(ss.a[0, 0] - PRINTED_A_CA0) <= 0.01 * abs(PRINTED_A_CA0)
        compact, _ = compact_inputs(ss)
        assert abs(compact.c[0] - PRINTED_C_CA0) <= 0.01 * PRINTED_C_CA0
        assert_close_per_entry(compact.d, PRINTED_D_CA0, rtol=0.01)
        assert_close_per_entry(compact.b[0, :2], PRINTED_B_CA0_FIRST_TWO, rtol=0.01)

    def test_unknown_output_node(self, fig3):
        with pytest.raises(UnknownOutputNodeError):
            reduce(partition(assemble_dae(fig3)), "nowhere")

    def test_degenerate_zero_capacity_cluster(self):
        # hand-built system whose algebraic block is singular
        system = DaeSystem(
            capacity=np.array([0.0, 1.0]),
            stiffness=np.array([[0.0, 0.0], [0.0, -1.0]]),
            source_map=np.zeros((2, 1)),
            node_names=("dead", "live"),
            branch_names=("b",),
            branch_sources=(None,),
            node_sources=((), ()),
        )
        with pytest.raises(DegenerateNetworkError):
            reduce(partition(system), "live")

    def test_stability_on_random_networks(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            net = random_network(rng)
            ss = reduced(net)
            if ss.n_states:
                assert np.linalg.eigvals(ss.a).real.max() < 0


class TestCompactInputs:
    def test_everything_sourced_is_identity(self):
        from thermnet.network import GROUND, Branch, Node, ThermalNetwork

        net = ThermalNetwork(
            (Node("a", 1e4, ("Qa",)), Node("b", 0.0, ("Qb",))),
            (Branch("g1", GROUND, "a", 2.0, "To"), Branch("i1", "a", "b", 3.0, "Tm")),
            "a",
        )
        ss = reduced(net)
        compact, cmap = compact_inputs(ss)
        assert cmap.kept == tuple(range(ss.n_inputs))
        np.testing.assert_array_equal(compact.b, ss.b)

    def test_sourceless_channels_all_dropped(self):
        from thermnet.network import GROUND, Branch, Node, ThermalNetwork

        net = ThermalNetwork(
            (Node("a", 1e4),),
            (Branch("g1", GROUND, "a", 2.0, "To"),),
            "a",
        )
        ss = reduced(net)
        compact, cmap = compact_inputs(ss)
        assert cmap.kept == (0,)  # only the sourced ground branch survives
        assert compact.input_labels == ("To@g1",)

    def test_compaction_commutes_with_reduction(self, fig3):
        ss = reduced(fig3)
        compact, cmap = compact_inputs(ss)
        np.testing.assert_array_equal(compact.b, ss.b[:, list(cmap.kept)])
        np.testing.assert_array_equal(compact.d, ss.d[list(cmap.kept)])


class TestRecoverAlgebraic:
    def test_uniform_equilibrium(self, fig3):
        system = assemble_dae(fig3)
        part = partition(system)
        t = 10.0
        b, f = system.source_values({"To": t})
        theta0 = recover_algebraic(part, np.array([t, t]), b, f)
        np.testing.assert_allclose(theta0, [t, t], rtol=1e-12)

    def test_against_block_row_solve(self, fig3):
        # oracle: solve the algebraic block row directly
        rng = np.random.default_rng(32)
        system = assemble_dae(fig3)
        part = partition(system)
        for _ in range(10):
            theta_cap = rng.normal(scale=10.0, size=2)
            values = {"To": rng.normal(scale=10.0)}
            values.update({k: rng.normal(scale=50.0) for k in ("Qo", "Qi", "Qg", "Qhvac")})
            b, f = system.source_values(values)
            got = recover_algebraic(part, theta_cap, b, f)
            rhs = -(part.k12 @ theta_cap + part.kb1 @ b + f[part.zero_idx])
            oracle = np.linalg.solve(part.k11, rhs)
            np.testing.assert_allclose(got, oracle, rtol=1e-12, atol=1e-12)

    def test_empty_zero_group(self):
        from thermnet.network import GROUND, Branch, Node, ThermalNetwork

        net = ThermalNetwork(
            (Node("a", 1e4),), (Branch("g1", GROUND, "a", 2.0, "To"),), "a"
        )
        system = assemble_dae(net)
        part = partition(system)
        out = recover_algebraic(part, np.array([5.0]), np.zeros(1), np.zeros(1))
        assert out.shape == (0,)


class TestSchurConsistency:
    def test_steady_state_equivalence_on_random_networks(self):
        # reduced model equilibrium must agree with the full solve
        rng = np.random.default_rng(33)
        for _ in range(40):
            net = random_network(rng)
            system = assemble_dae(net)
            part = partition(system)
            ss = reduce(part, net.output_node)
            values = {name: rng.normal(scale=20.0) for name in net.temp_source_names}
            values.update({name: rng.normal(scale=100.0) for name in net.flow_source_names})
            b, f = system.source_values(values)
            oracle = steady_state(system, b, f)
            u = np.concatenate([b, f[part.zero_idx], f[part.cap_idx]])
            scale = max(1.0, np.abs(oracle).max())
            if ss.n_states:
                theta_cap = np.linalg.solve(ss.a, -(ss.b @ u))
            else:
                theta_cap = np.zeros(0)
            theta0 = recover_algebraic(part, theta_cap, b, f)
            assert np.abs(theta_cap - oracle[part.cap_idx]).max(initial=0.0) <= 1e-9 * scale
            assert np.abs(theta0 - oracle[part.zero_idx]).max(initial=0.0) <= 1e-9 * scale
