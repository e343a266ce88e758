import json
from fractions import Fraction

import numpy as np
import pytest

from rainbowlcc.errors import FormatError, InstanceError, PreconditionError, VersionError
from rainbowlcc.generate import gen_constraint_kernel, gen_hadamard, gen_hadamard_ldc
from rainbowlcc.gf import BitMatrix
from rainbowlcc.instance import (
    LccInstance,
    LdcInstance,
    Matching,
    effective_delta,
    instance_from_dict,
    instance_to_dict,
    read_instance,
    validate_lcc,
    validate_ldc,
    write_instance,
)


def tiny_lcc(matchings, delta=Fraction(1, 8)):
    # rows of the Hadamard code on F_2^3
    return LccInstance(8, 3, 3, BitMatrix(tuple(range(8)), 3), matchings, delta)


class TestMatching:
    def test_canonical_order(self):
        m = Matching(0, [[7, 3, 5], [2, 1, 6]])
        assert m.edges.tolist() == [[1, 2, 6], [3, 5, 7]]
        assert not m.edges.flags.writeable

    def test_repeated_index_is_structural(self):
        with pytest.raises(InstanceError):
            Matching(0, [[1, 1, 2]])

    def test_range_is_structural(self):
        with pytest.raises(InstanceError):
            tiny_lcc({0: [[1, 2, 9]]})


class TestValidateLcc:
    def test_hadamard_passes(self):
        report = validate_lcc(gen_hadamard(4, seed=3))
        assert report.passed
        assert [c.name for c in report.checks] == ["disjoint", "owner_excluded", "size", "identity", "full_rank", "complete"]

    def test_planted_identity_violation(self):
        # 1 ^ 2 ^ 4 = 7, not 0
        report = validate_lcc(tiny_lcc({0: [[1, 2, 3]], 3: [[1, 2, 4]]}), strict=False)
        assert not report["identity"].passed
        assert report["identity"].counterexample == {"target": 3, "edge": [1, 2, 4]}

    def test_planted_overlap(self):
        inst = tiny_lcc({0: [[1, 2, 3], [3, 5, 6]]})
        report = validate_lcc(inst, strict=False)
        assert not report["disjoint"].passed
        assert report["disjoint"].counterexample["shared"] == 3

    def test_owner_inside_edge(self):
        # 0 ^ 1 ^ 1 is not a valid edge, but {0, 2, 3} for target 1 is: 0 ^ 2 ^ 3 = 1
        report = validate_lcc(tiny_lcc({0: [[0, 2, 3]]}), strict=False)
        assert not report["owner_excluded"].passed

    def test_size_and_strictness(self):
        inst = tiny_lcc({0: [[1, 2, 3]]}, delta=Fraction(1, 4))
        report = validate_lcc(inst, strict=False)
        assert not report["size"].passed
        assert "complete" not in [c.name for c in report.checks]
        strict = validate_lcc(tiny_lcc({0: [[1, 2, 3]]}), strict=True)
        assert not strict["complete"].passed and strict["complete"].counterexample == {"missing_target": 1}

    def test_rank_deficiency(self):
        rows = BitMatrix((0, 1, 1, 0), 2)
        report = validate_lcc(LccInstance(4, 2, 3, rows, {0: [[1, 2, 3]]}, Fraction(1, 4)), strict=False)
        assert not report["full_rank"].passed


class TestValidateLdc:
    @pytest.mark.parametrize("q,k", [(2, 4), (3, 2), (5, 2)])
    def test_hadamard_passes(self, q, k):
        assert validate_ldc(gen_hadamard_ldc(k, q)).passed

    def test_zero_coefficient(self):
        ldc = gen_hadamard_ldc(2, 3)
        coeffs = {i: np.array(a) for i, a in ldc.coeffs.items()}
        coeffs[0][0, 0] = 0
        bad = LdcInstance(ldc.n, ldc.k, 2, 3, ldc.rows, ldc.matchings, coeffs, ldc.delta)
        report = validate_ldc(bad)
        assert not report["nonzero_coeffs"].passed

    def test_sign_error(self):
        ldc = gen_hadamard_ldc(2, 3)
        coeffs = {i: np.array(a) for i, a in ldc.coeffs.items()}
        edge = ldc.matchings[1].edges[0].tolist()
        coeffs[1][0] = (-coeffs[1][0]) % 3
        report = validate_ldc(LdcInstance(ldc.n, ldc.k, 2, 3, ldc.rows, ldc.matchings, coeffs, ldc.delta))
        assert not report["identity"].passed
        assert report["identity"].counterexample["edge"] == edge


class TestEffectiveDelta:
    def test_minimum(self):
        inst = tiny_lcc({0: [[1, 2, 3], [4, 5, 6]], 7: [[1, 2, 4]]})
        assert effective_delta(inst) == Fraction(1, 8)

    def test_empty_matching_gives_zero(self):
        assert effective_delta(tiny_lcc({0: []})) == 0

    def test_no_matchings(self):
        with pytest.raises(PreconditionError):
            effective_delta(tiny_lcc({}))

    def test_at_least_declared_on_valid(self):
        inst = gen_hadamard(6, seed=2)
        assert validate_lcc(inst).passed and effective_delta(inst) >= inst.delta


class TestFileFormat:
    @pytest.mark.parametrize(
        "make",
        [
            lambda: gen_hadamard(4, seed=1),
            lambda: gen_constraint_kernel(64, range(8), 4, seed=1),
            lambda: gen_hadamard_ldc(3, 2),
            lambda: gen_hadamard_ldc(2, 5),
        ],
    )
    def test_round_trip(self, tmp_path, make):
        inst = make()
        path = tmp_path / "inst.json"
        write_instance(inst, path)
        assert read_instance(path) == inst
        write_instance(read_instance(path), tmp_path / "again.json")
        assert (tmp_path / "again.json").read_bytes() == path.read_bytes()

    def test_layout(self):
        d = instance_to_dict(gen_hadamard(4, seed=1))
        assert d["format_version"] == 1 and d["kind"] == "lcc" and d["delta"] == "1/4"
        assert d["rows"][5] == "05"
        assert all(e == sorted(e) for es in d["matchings"].values() for e in es)

    def test_noncanonical_input_tolerated(self):
        d = instance_to_dict(gen_hadamard(3, seed=1, target_delta=Fraction(1, 8)))
        d["matchings"]["0"] = [list(reversed(e)) for e in d["matchings"]["0"]]
        assert instance_from_dict(d) == instance_from_dict(instance_to_dict(gen_hadamard(3, seed=1, target_delta=Fraction(1, 8))))

    def test_truncated(self, tmp_path):
        path = tmp_path / "t.json"
        write_instance(gen_hadamard(4), path)
        path.write_text(path.read_text()[:50])
        with pytest.raises(FormatError):
            read_instance(path)

    def test_version(self, tmp_path):
        d = instance_to_dict(gen_hadamard(4))
        d["format_version"] = 99
        path = tmp_path / "v.json"
        path.write_text(json.dumps(d))
        with pytest.raises(VersionError):
            read_instance(path)

    def test_invariant_violation_on_load(self):
        d = instance_to_dict(gen_hadamard(4))
        d["matchings"]["0"][0] = [1, 1, 2]
        with pytest.raises(InstanceError):
            instance_from_dict(d)
