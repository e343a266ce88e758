from fractions import Fraction

import numpy as np
import pytest

from oracles import gf2_rank
from rainbowlcc.errors import GenerationError, PreconditionError
from rainbowlcc.generate import (
    GenConfig,
    constraint_rows,
    gen_constraint_kernel,
    gen_hadamard,
    gen_hadamard_ldc,
    gen_hypercube_graph,
    pack_plane_triples,
)
from rainbowlcc.instance import effective_delta, validate_lcc, validate_ldc
from rainbowlcc.rainbow import AbsentProven, check_proper, find_rainbow_cycle
from rainbowlcc.rng import make_rng


class TestHadamard:
    @pytest.mark.parametrize("k", [2, 4, 5, 6, 7, 8])
    def test_strict_valid_with_quarter_density(self, k):
        inst = gen_hadamard(k, seed=k)
        assert validate_lcc(inst).passed
        assert effective_delta(inst) >= Fraction(1, 4)

    def test_triples_xor_to_target(self):
        inst = gen_hadamard(3, seed=0, target_delta=Fraction(1, 8))
        for i, m in inst.matchings.items():
            for a, b, c in m:
                assert a ^ b ^ c == i and i not in (a, b, c)

    def test_k3_quarter_density_is_infeasible(self):
        # two disjoint triples {a, b, a^b^i} would be two 2-dim subspaces of F_2^3 meeting only in 0
        with pytest.raises(GenerationError, match="best packing has 1"):
            gen_hadamard(3, seed=0)

    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_packing_is_maximal(self, k):
        # no further triple of unused nonzero vectors {p, p', p ^ p'} exists
        packing = pack_plane_triples(k, make_rng(0, "t", k))
        used = set(packing.ravel().tolist())
        assert len(used) == 3 * len(packing)
        free = [v for v in range(1, 1 << k) if v not in used]
        assert not any(p ^ q in free and p ^ q not in (p, q) for p in free for q in free if p < q)

    def test_deterministic(self):
        assert gen_hadamard(6, seed=11) == gen_hadamard(6, seed=11)
        assert gen_hadamard(6, seed=11) != gen_hadamard(6, seed=12)

    @pytest.mark.parametrize("k,delta", [(1, Fraction(1, 4)), (21, Fraction(1, 4)), (4, Fraction(1, 3))])
    def test_preconditions(self, k, delta):
        with pytest.raises(PreconditionError):
            gen_hadamard(k, target_delta=delta)


class TestConstraintKernel:
    def test_zero_constraints(self):
        inst = gen_constraint_kernel(6, [], 1)
        assert inst.k == 6
        assert sorted(inst.rows.rows) == [1 << j for j in range(6)]

    def test_single_constraint(self):
        inst = gen_constraint_kernel(4, [0], 1)
        assert inst.k == 3
        assert inst.matchings[0].edges.tolist() == [[1, 2, 3]]
        v = inst.rows.rows
        assert v[0] == v[1] ^ v[2] ^ v[3]

    def test_64_with_8_targets_passes_lenient_validation(self):
        inst = gen_constraint_kernel(64, range(8), 4, seed=1)
        assert validate_lcc(inst, strict=False).passed
        assert inst.delta == Fraction(4, 64)

    @pytest.mark.parametrize("n,targets,per", [(32, 6, 3), (64, 10, 5), (128, 16, 6)])
    def test_dimension_identity(self, n, targets, per):
        inst = gen_constraint_kernel(n, range(targets), per, seed=n)
        checks = constraint_rows(inst)
        a = np.array([[(c >> j) & 1 for j in range(n)] for c in checks])
        assert inst.k + gf2_rank(a) == n

    @pytest.mark.parametrize("n,targets,per", [(4, [0], 0), (3, [0], 1), (8, [0], 3), (8, [9], 1)])
    def test_preconditions(self, n, targets, per):
        with pytest.raises(PreconditionError):
            gen_constraint_kernel(n, targets, per)

    def test_all_ones_survives(self):
        # every check {i} u E has four elements, so the all-ones word is always a codeword
        inst = gen_constraint_kernel(13, range(13), 4, seed=5)
        assert inst.k >= 1

    def test_deterministic(self):
        assert gen_constraint_kernel(40, range(5), 4, seed=3) == gen_constraint_kernel(40, range(5), 4, seed=3)


class TestHadamardLdc:
    def test_q2_k3_pairs(self):
        ldc = gen_hadamard_ldc(3, 2)
        assert ldc.matchings[0].edges.tolist() == [[0, 1], [2, 3], [4, 5], [6, 7]]
        assert ldc.delta == Fraction(1, 2)

    def test_q3_k2_identity(self):
        ldc = gen_hadamard_ldc(2, 3)
        for i, m in ldc.matchings.items():
            for (a, b), (alpha, beta) in zip(m.edges.tolist(), ldc.coeffs[i].tolist()):
                e = (alpha * ldc.rows[a] + beta * ldc.rows[b]) % 3
                assert e.tolist() == [int(j == i) for j in range(2)]
        assert validate_ldc(ldc).passed

    def test_odd_q_density(self):
        assert gen_hadamard_ldc(3, 5).delta == Fraction(2, 5)

    @pytest.mark.parametrize("k,q", [(2, 4), (17, 2), (0, 2)])
    def test_preconditions(self, k, q):
        with pytest.raises(PreconditionError):
            gen_hadamard_ldc(k, q)


class TestHypercube:
    def test_square(self):
        g = gen_hypercube_graph(2)
        assert sorted(g.edges) == [(0, 1, 0), (0, 2, 1), (1, 3, 1), (2, 3, 0)]

    def test_cube(self):
        g = gen_hypercube_graph(3)
        assert len(g.edges) == 12 and check_proper(g)
        assert sorted(sum(1 for e in g.edges if e[2] == c) for c in range(3)) == [4, 4, 4]

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
    def test_no_rainbow_cycle(self, d):
        assert isinstance(find_rainbow_cycle(gen_hypercube_graph(d)), AbsentProven)

    def test_range(self):
        with pytest.raises(PreconditionError):
            gen_hypercube_graph(0)


def test_gen_config_delta_range():
    assert GenConfig("hadamard", 1, 4, Fraction(1, 4)).size == 4
    with pytest.raises(PreconditionError):
        GenConfig("hadamard", 1, 4, Fraction(1, 2))
