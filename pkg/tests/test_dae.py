import numpy as np
import pytest

from conftest import random_network
from thermnet.dae import assemble_dae, partition, steady_state
from thermnet.errors import SingularSystemError
from thermnet.network import GROUND, Branch, Node, ThermalNetwork

# stiffness and source-map of the shipped network as printed (one decimal)
FIG3_K = np.array([
    [-252.9, 0.0, 0.0, 2.9],
    [0.0, -127.9, 125.0, 2.9],
    [0.0, 125.0, -163.3, 0.0],
    [2.9, 2.9, 0.0, -5.8],
])
FIG3_KB = np.array([
    [0.0, 250.0, -2.9, 0.0, 0.0],
    [0.0, 0.0, 0.0, 2.9, -125.0],
    [38.3, 0.0, 0.0, 0.0, 125.0],
    [0.0, 0.0, 2.9, -2.9, 0.0],
])


class TestAssemble:
    def test_fig3_stiffness(self, fig3):
        system = assemble_dae(fig3)
        np.testing.assert_allclose(system.stiffness, FIG3_K, atol=0.05)

    def test_fig3_source_map(self, fig3):
        system = assemble_dae(fig3)
        np.testing.assert_allclose(system.source_map, FIG3_KB, atol=0.05)

    def test_single_branch(self):
        g, c = 7.5, 1e4
        net = ThermalNetwork(
            (Node("a", c),), (Branch("b1", GROUND, "a", g, "To"),), "a"
        )
        system = assemble_dae(net)
        np.testing.assert_allclose(system.stiffness, [[-g]])
        np.testing.assert_allclose(system.source_map, [[g]])
        np.testing.assert_allclose(system.capacity, [c])

    def test_source_values_scatter(self, fig3):
        system = assemble_dae(fig3)
        b, f = system.source_values({"To": 2.0, "Qg": 1.0, "Qhvac": 3.0})
        np.testing.assert_allclose(b, [2.0, 2.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(f, [0.0, 0.0, 4.0, 0.0])


class TestPartition:
    def test_fig3_groups_and_blocks(self, fig3):
        part = partition(assemble_dae(fig3))
        assert part.zero_names == ("so", "si")
        assert part.cap_names == ("a", "w")
        np.testing.assert_allclose(part.k11, [[-252.9, 0.0], [0.0, -127.9]], atol=0.05)
        np.testing.assert_allclose(part.k22, [[-163.3, 0.0], [0.0, -5.8]], atol=0.05)
        np.testing.assert_allclose(part.k12, [[0.0, 2.9], [125.0, 2.9]], atol=0.05)
        np.testing.assert_allclose(part.k21, [[0.0, 125.0], [2.9, 2.9]], atol=0.05)
        np.testing.assert_allclose(part.c_cap, [82e3, 4e6])

    def test_all_capacitive(self):
        net = ThermalNetwork(
            (Node("a", 1e3), Node("b", 1e4)),
            (Branch("g1", GROUND, "a", 2.0, "To"), Branch("i1", "a", "b", 3.0)),
            "b",
        )
        system = assemble_dae(net)
        part = partition(system)
        assert len(part.zero_idx) == 0
        np.testing.assert_array_equal(part.k22, system.stiffness)
        np.testing.assert_array_equal(part.kb2, system.source_map)

    def test_airless_variant_groups(self, fig3_ca0):
        part = partition(assemble_dae(fig3_ca0))
        assert part.zero_names == ("so", "si", "a")
        assert part.cap_names == ("w",)
        expected_k11 = np.array([
            [-252.9, 0.0, 0.0],
            [0.0, -127.9, 125.0],
            [0.0, 125.0, -163.3],
        ])
        np.testing.assert_allclose(part.k11, expected_k11, atol=0.05)

    def test_reassembly_recovers_operators(self, fig3):
        system = assemble_dae(fig3)
        part = partition(system)
        order = np.concatenate([part.zero_idx, part.cap_idx])
        rebuilt_k = np.block([[part.k11, part.k12], [part.k21, part.k22]])
        np.testing.assert_array_equal(rebuilt_k, system.stiffness[np.ix_(order, order)])
        rebuilt_kb = np.vstack([part.kb1, part.kb2])
        np.testing.assert_array_equal(rebuilt_kb, system.source_map[order, :])


class TestSteadyState:
    def test_uniform_equilibrium(self, fig3):
        system = assemble_dae(fig3)
        b, f = system.source_values({"To": 10.0})
        np.testing.assert_allclose(steady_state(system, b, f), np.full(4, 10.0))

    def test_hvac_step_against_independent_solve(self, fig3):
        # oracle: the hand-written balance system with the printed operator
        # values, solved directly
        system = assemble_dae(fig3)
        b, f = system.source_values({"Qhvac": 100.0})
        theta = steady_state(system, b, f)
        oracle = np.linalg.solve(FIG3_K, -(FIG3_KB @ b + f))
        np.testing.assert_allclose(theta, oracle, rtol=2e-3)

    def test_ungrounded_network_is_singular(self):
        net = ThermalNetwork(
            (Node("a", 1.0), Node("b", 1.0)),
            (Branch("i1", "a", "b", 1.0),),
            "a",
        )
        # bypass validation on purpose: the singularity check must catch it
        k = np.array([[-1.0, 1.0], [1.0, -1.0]])
        from thermnet.dae import DaeSystem

        system = DaeSystem(
            capacity=np.array([1.0, 1.0]),
            stiffness=k,
            source_map=np.zeros((2, 1)),
            node_names=("a", "b"),
            branch_names=("i1",),
            branch_sources=(None,),
            node_sources=((), ()),
        )
        with pytest.raises(SingularSystemError):
            steady_state(system, np.zeros(1), np.zeros(2))


class TestOperatorProperties:
    def test_symmetry_and_semidefiniteness(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            system = assemble_dae(random_network(rng))
            k = system.stiffness
            scale = np.linalg.norm(k)
            assert np.linalg.norm(k - k.T) <= 1e-12 * scale
            assert np.linalg.eigvalsh(k).max() <= 1e-9 * scale

    def test_orientation_flip_invariance(self):
        # reversing a branch swaps its endpoints and negates its source
        # value; K must not move at all and K_b·b must not either
        rng = np.random.default_rng(22)
        for _ in range(20):
            net = random_network(rng)
            system = assemble_dae(net)
            idx = int(rng.integers(0, net.n_branches))
            flipped_branches = list(net.branches)
            victim = flipped_branches[idx]
            flipped_branches[idx] = Branch(
                victim.name, victim.to_node, victim.from_node,
                victim.conductance, victim.temp_source,
            )
            flipped = assemble_dae(
                ThermalNetwork(net.nodes, tuple(flipped_branches), net.output_node)
            )
            np.testing.assert_allclose(
                flipped.stiffness, system.stiffness, atol=1e-12 * abs(system.stiffness).max()
            )
            values = {
                name: rng.normal() for name in set(net.temp_source_names)
            }
            b, _ = system.source_values(values)
            b_flipped, _ = flipped.source_values(values)
            if victim.temp_source is not None:
                b_flipped[idx] = -b_flipped[idx]
            np.testing.assert_allclose(
                flipped.source_map @ b_flipped, system.source_map @ b,
                atol=1e-9 * max(1.0, abs(system.source_map @ b).max()),
            )

    def test_uniform_temperature_is_equilibrium(self):
        # with every ground branch sourced, setting those channels to one
        # must balance K applied to the all-ones temperature vector
        rng = np.random.default_rng(23)
        for _ in range(20):
            net = random_network(rng, ground_sources_only=True)
            system = assemble_dae(net)
            ground_channels = np.array([
                1.0 if GROUND in (br.from_node, br.to_node) else 0.0
                for br in net.branches
            ])
            residue = system.stiffness @ np.ones(system.n) + system.source_map @ ground_channels
            assert np.abs(residue).max() <= 1e-9 * max(1.0, np.abs(system.stiffness).max())

    def test_steady_state_matches_every_row(self):
        rng = np.random.default_rng(24)
        for _ in range(20):
            net = random_network(rng)
            system = assemble_dae(net)
            values = {name: rng.normal(scale=20.0) for name in net.temp_source_names}
            values.update({name: rng.normal(scale=100.0) for name in net.flow_source_names})
            b, f = system.source_values(values)
            theta = steady_state(system, b, f)
            residue = system.stiffness @ theta + system.source_map @ b + f
            assert np.abs(residue).max() <= 1e-8 * max(1.0, np.abs(f).max(), np.abs(b).max())
