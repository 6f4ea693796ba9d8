import numpy as np
import pytest

from benloc.instance import (InvalidInstanceError, MipInstance,
                             MpsParseError, MpsSemanticError,
                             PermutationRecord, apply_permutation, parse_mps,
                             permute_instance, write_mps)
from benloc.synth import gen_setcover

MINIMAL = """\
NAME test
ROWS
 N  OBJ
 G  c1
COLUMNS
    MARKER0  'MARKER'  'INTORG'
    x  OBJ  1.0  c1  1.0
    y  OBJ  1.0  c1  1.0
    MARKER1  'MARKER'  'INTEND'
RHS
    RHS  c1  1.0
BOUNDS
 BV BND  x
 BV BND  y
ENDATA
"""


def small_instance():
    return MipInstance(
        name="small", sense="minimize",
        obj_coeffs=np.array([1.0, 2.0, 0.0]),
        mat_rows=np.array([0, 0, 1, 1]),
        mat_cols=np.array([0, 1, 1, 2]),
        mat_vals=np.array([1.0, -2.0, 3.0, 1.0]),
        row_senses=["<=", ">="], rhs=np.array([4.0, 1.0]),
        var_lb=np.zeros(3), var_ub=np.array([1.0, 10.0, np.inf]),
        var_types=["binary", "integer", "continuous"],
        row_names=["r1", "r2"], col_names=["a", "b", "c"])


class TestParseMps:
    def test_minimal(self):
        inst = parse_mps(MINIMAL)
        assert inst.num_rows == 1
        assert inst.num_cols == 2
        assert inst.nnz == 2
        assert inst.row_senses == [">="]
        assert inst.rhs.tolist() == [1.0]
        assert inst.var_types == ["binary", "binary"]

    def test_accepts_bytes(self):
        assert parse_mps(MINIMAL.encode()) == parse_mps(MINIMAL)

    def test_generated_setcover_nnz(self):
        inst = gen_setcover(10, 20, 0.3, seed=0)
        reparsed = parse_mps(write_mps(inst))
        assert reparsed.nnz == inst.nnz
        assert reparsed == inst

    def test_unknown_section_header(self):
        with pytest.raises(MpsParseError) as e:
            parse_mps("NAME x\nROWS\n N OBJ\nBOGUS\nENDATA\n")
        assert "BOGUS" in str(e.value)

    def test_undeclared_row_is_semantic_error(self):
        text = MINIMAL.replace("c1  1.0\n    y", "cX  1.0\n    y")
        with pytest.raises(MpsSemanticError) as e:
            parse_mps(text)
        assert "line" in str(e.value)

    def test_duplicate_entry_rejected(self):
        text = """\
NAME d
ROWS
 N  OBJ
 L  r1
COLUMNS
    x  r1  1.0
    x  r1  2.0
RHS
ENDATA
"""
        with pytest.raises(MpsSemanticError):
            parse_mps(text)

    def test_zero_coefficient_dropped_with_warning(self):
        text = """\
NAME z
ROWS
 N  OBJ
 L  r1
COLUMNS
    x  r1  1.0
    y  r1  0.0
RHS
    RHS  r1  2.0
ENDATA
"""
        with pytest.warns(UserWarning):
            inst = parse_mps(text)
        assert inst.nnz == 1
        assert inst.num_cols == 2

    def test_extra_free_row_dropped_with_warning(self):
        text = """\
NAME f
ROWS
 N  OBJ
 N  FREE2
 L  r1
COLUMNS
    x  OBJ  1.0  FREE2  5.0
    x  r1  1.0
RHS
    RHS  r1  2.0
ENDATA
"""
        with pytest.warns(UserWarning):
            inst = parse_mps(text)
        assert inst.num_rows == 1
        assert inst.nnz == 1

    def test_negative_up_without_lo_frees_lower_bound(self):
        text = """\
NAME n
ROWS
 N  OBJ
 L  r1
COLUMNS
    x  r1  1.0
RHS
BOUNDS
 UP BND  x  -2.0
ENDATA
"""
        inst = parse_mps(text)
        assert inst.var_ub[0] == -2.0
        assert inst.var_lb[0] == -np.inf

    def test_ranges_expand_to_second_row(self, fixtures_dir):
        import os
        with open(os.path.join(fixtures_dir, "mps", "ranges_l.mps")) as fh:
            inst = parse_mps(fh.read())
        # L row rhs 10 range 4 becomes 6 <= ax <= 10
        assert inst.num_rows == 2
        assert set(inst.row_senses) == {"<=", ">="}
        i_le = inst.row_senses.index("<=")
        i_ge = inst.row_senses.index(">=")
        assert inst.rhs[i_le] == 10.0
        assert inst.rhs[i_ge] == 6.0

    def test_ranges_equality_negative(self, fixtures_dir):
        import os
        with open(os.path.join(fixtures_dir, "mps", "ranges_e_neg.mps")) as fh:
            inst = parse_mps(fh.read())
        # E row rhs 5 range -3 becomes 2 <= ax <= 5
        lo = inst.rhs[inst.row_senses.index(">=")]
        hi = inst.rhs[inst.row_senses.index("<=")]
        assert (lo, hi) == (2.0, 5.0)


class TestWriteMps:
    def test_no_constraint_instance(self):
        inst = MipInstance(
            name="empty", sense="minimize", obj_coeffs=np.array([1.0]),
            mat_rows=np.array([], dtype=int), mat_cols=np.array([], dtype=int),
            mat_vals=np.array([]), row_senses=[], rhs=np.array([]),
            var_lb=np.zeros(1), var_ub=np.array([np.inf]),
            var_types=["continuous"], row_names=[], col_names=["x"])
        text = write_mps(inst)
        rows_section = text.split("ROWS\n")[1].split("COLUMNS\n")[0]
        assert rows_section.strip() == "N  OBJ"
        assert parse_mps(text) == inst

    def test_deterministic(self):
        inst = small_instance()
        assert write_mps(inst) == write_mps(inst)

    def test_round_trip_small(self):
        inst = small_instance()
        assert parse_mps(write_mps(inst)) == inst

    def test_round_trip_corpus(self, mps_corpus):
        import warnings
        for path in mps_corpus:
            with open(path) as fh:
                text = fh.read()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                first = parse_mps(text)
                again = parse_mps(write_mps(first))
            assert again == first, path

    def test_permuted_name_order(self):
        inst = small_instance()
        permuted, rec = apply_permutation(inst, [1, 0], [2, 0, 1])
        assert permuted.row_names == ["r2", "r1"]
        assert permuted.col_names == ["b", "c", "a"]
        text = write_mps(permuted)
        assert text.index("r2") < text.index("r1")


def row_profile(inst):
    """Multiset of (sense, rhs, sorted coefficient tuple) over rows."""
    out = []
    for i in range(inst.num_rows):
        _, vals = inst.row_entries(i)
        out.append((inst.row_senses[i], float(inst.rhs[i]),
                    tuple(sorted(vals))))
    return sorted(out)


class TestPermutation:
    def test_seed_zero_is_identity(self):
        inst = small_instance()
        permuted, rec = permute_instance(inst, 0)
        assert permuted == inst
        assert rec.is_identity()
        assert rec.seed == 0

    def test_counts_preserved(self):
        inst = gen_setcover(12, 25, 0.3, seed=3)
        for seed in (1, 2, 3):
            p, _ = permute_instance(inst, seed)
            assert (p.num_rows, p.num_cols, p.nnz) == (12, 25, inst.nnz)

    def test_row_profile_invariant(self):
        inst = gen_setcover(9, 17, 0.4, seed=5)
        base = row_profile(inst)
        for seed in range(1, 6):
            p, _ = permute_instance(inst, seed)
            assert row_profile(p) == base

    def test_row_activities_under_column_mapping(self):
        inst = small_instance()
        rng = np.random.default_rng(0)
        x = rng.random(inst.num_cols)
        permuted, rec = permute_instance(inst, 4)
        x_new = np.empty_like(x)
        x_new[rec.col_perm] = x

        def activities(m, point):
            acts = []
            for i in range(m.num_rows):
                cols, vals = m.row_entries(i)
                acts.append((m.row_senses[i], float(m.rhs[i]),
                             round(float(vals @ point[cols]), 12)))
            return sorted(acts)

        assert activities(permuted, x_new) == activities(inst, x)

    def test_composition(self):
        inst = gen_setcover(7, 11, 0.5, seed=1)
        once, r1 = permute_instance(inst, 11)
        twice, r2 = permute_instance(once, 12)
        composed, _ = apply_permutation(inst, r2.row_perm[r1.row_perm],
                                        r2.col_perm[r1.col_perm])
        assert twice == composed

    def test_record_json_round_trip(self):
        _, rec = permute_instance(small_instance(), 9)
        back = PermutationRecord.from_json(rec.to_json())
        assert np.array_equal(back.row_perm, rec.row_perm)
        assert np.array_equal(back.col_perm, rec.col_perm)
        assert back.seed == 9

    def test_invalid_permutation_rejected(self):
        with pytest.raises(InvalidInstanceError):
            PermutationRecord(np.array([0, 0]), np.array([0]), 1)


class TestInvariants:
    def test_duplicate_matrix_entry_rejected(self):
        with pytest.raises(InvalidInstanceError):
            MipInstance(
                name="bad", sense="minimize", obj_coeffs=np.array([1.0]),
                mat_rows=np.array([0, 0]), mat_cols=np.array([0, 0]),
                mat_vals=np.array([1.0, 2.0]), row_senses=["<="],
                rhs=np.array([1.0]), var_lb=np.zeros(1), var_ub=np.ones(1),
                var_types=["continuous"], row_names=["r"], col_names=["x"])

    def test_stored_zero_rejected(self):
        with pytest.raises(InvalidInstanceError):
            MipInstance(
                name="bad", sense="minimize", obj_coeffs=np.array([1.0]),
                mat_rows=np.array([0]), mat_cols=np.array([0]),
                mat_vals=np.array([0.0]), row_senses=["<="],
                rhs=np.array([1.0]), var_lb=np.zeros(1), var_ub=np.ones(1),
                var_types=["continuous"], row_names=["r"], col_names=["x"])

    def test_binary_bounds_enforced(self):
        with pytest.raises(InvalidInstanceError):
            MipInstance(
                name="bad", sense="minimize", obj_coeffs=np.array([1.0]),
                mat_rows=np.array([0]), mat_cols=np.array([0]),
                mat_vals=np.array([1.0]), row_senses=["<="],
                rhs=np.array([1.0]), var_lb=np.zeros(1), var_ub=np.array([2.0]),
                var_types=["binary"], row_names=["r"], col_names=["x"])
