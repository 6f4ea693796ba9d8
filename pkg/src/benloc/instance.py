"""Sparse MIP instance model, MPS reading/writing, and permutation augmentation.

The MPS reader accepts both fixed- and free-format files (section headers in
column 1, data lines indented, names without embedded blanks).  RANGES rows are
expanded into two plain inequality rows so that every stored row carries a
single sense.  The writer always emits free format and is deterministic.

Permutations are drawn from numpy's PCG64 generator so the same seed produces
the same row/column swap on every platform.  Seed 0 is reserved for the
identity permutation.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

SENSES = ("<=", ">=", "=")
VAR_TYPES = ("continuous", "binary", "integer")

_MPS_SENSE = {"L": "<=", "G": ">=", "E": "="}
_SENSE_MPS = {v: k for k, v in _MPS_SENSE.items()}


class MpsError(ValueError):
    """Base class for MPS reading problems."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class MpsParseError(MpsError):
    """Malformed section header or unreadable data line."""


class MpsSemanticError(MpsError):
    """Well-formed MPS referencing undeclared names or duplicating entries."""


class InvalidInstanceError(ValueError):
    """An instance violating the model invariants."""


@dataclass(eq=False)
class MipInstance:
    """A sparse MIP model: min/max c'x s.t. Ax {<=,>=,=} b, lb <= x <= ub."""

    name: str
    sense: str  # "minimize" | "maximize"
    obj_coeffs: np.ndarray  # (n,)
    mat_rows: np.ndarray  # (nnz,) int
    mat_cols: np.ndarray  # (nnz,) int
    mat_vals: np.ndarray  # (nnz,) float
    row_senses: list  # length m over SENSES
    rhs: np.ndarray  # (m,)
    var_lb: np.ndarray  # (n,)
    var_ub: np.ndarray  # (n,)
    var_types: list  # length n over VAR_TYPES
    row_names: list
    col_names: list
    obj_name: str = "OBJ"

    def __post_init__(self):
        self.obj_coeffs = np.asarray(self.obj_coeffs, dtype=float)
        self.mat_rows = np.asarray(self.mat_rows, dtype=np.int64)
        self.mat_cols = np.asarray(self.mat_cols, dtype=np.int64)
        self.mat_vals = np.asarray(self.mat_vals, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.var_lb = np.asarray(self.var_lb, dtype=float)
        self.var_ub = np.asarray(self.var_ub, dtype=float)
        self.row_senses = list(self.row_senses)
        self.var_types = list(self.var_types)
        self.row_names = list(self.row_names)
        self.col_names = list(self.col_names)
        self._canonicalize()
        self.validate()

    def _canonicalize(self):
        # keep coordinate entries sorted by (row, col) so equality is structural
        if self.nnz:
            order = np.lexsort((self.mat_cols, self.mat_rows))
            self.mat_rows = self.mat_rows[order]
            self.mat_cols = self.mat_cols[order]
            self.mat_vals = self.mat_vals[order]

    def validate(self):
        m, n = self.num_rows, self.num_cols
        if len(self.rhs) != m or len(self.row_names) != m:
            raise InvalidInstanceError("row arrays disagree on m")
        if not (len(self.obj_coeffs) == len(self.var_lb) == len(self.var_ub)
                == len(self.var_types) == len(self.col_names) == n):
            raise InvalidInstanceError("column arrays disagree on n")
        if self.sense not in ("minimize", "maximize"):
            raise InvalidInstanceError(f"bad sense {self.sense!r}")
        for s in self.row_senses:
            if s not in SENSES:
                raise InvalidInstanceError(f"bad row sense {s!r}")
        for t in self.var_types:
            if t not in VAR_TYPES:
                raise InvalidInstanceError(f"bad var type {t!r}")
        if self.nnz:
            if self.mat_rows.min(initial=0) < 0 or (m and self.mat_rows.max() >= m):
                raise InvalidInstanceError("matrix row index out of range")
            if self.mat_cols.min(initial=0) < 0 or (n and self.mat_cols.max() >= n):
                raise InvalidInstanceError("matrix col index out of range")
            keys = self.mat_rows * max(n, 1) + self.mat_cols
            if len(np.unique(keys)) != self.nnz:
                raise InvalidInstanceError("duplicate (row, col) entries")
            if np.any(self.mat_vals == 0.0):
                raise InvalidInstanceError("stored zero coefficient")
        for j, t in enumerate(self.var_types):
            if t == "binary" and not (0 <= self.var_lb[j] and self.var_ub[j] <= 1):
                raise InvalidInstanceError(
                    f"binary variable {self.col_names[j]} has bounds outside [0, 1]")

    @property
    def num_rows(self):
        return len(self.row_senses)

    @property
    def num_cols(self):
        return len(self.obj_coeffs)

    @property
    def nnz(self):
        return len(self.mat_vals)

    def row_entries(self, i):
        """Column indices and coefficients of row i."""
        mask = self.mat_rows == i
        return self.mat_cols[mask], self.mat_vals[mask]

    def __eq__(self, other):
        if not isinstance(other, MipInstance):
            return NotImplemented
        return (self.name == other.name
                and self.sense == other.sense
                and self.obj_name == other.obj_name
                and np.array_equal(self.obj_coeffs, other.obj_coeffs)
                and np.array_equal(self.mat_rows, other.mat_rows)
                and np.array_equal(self.mat_cols, other.mat_cols)
                and np.array_equal(self.mat_vals, other.mat_vals)
                and self.row_senses == other.row_senses
                and np.array_equal(self.rhs, other.rhs)
                and np.array_equal(self.var_lb, other.var_lb)
                and np.array_equal(self.var_ub, other.var_ub)
                and self.var_types == other.var_types
                and self.row_names == other.row_names
                and self.col_names == other.col_names)


@dataclass
class PermutationRecord:
    """Row/column bijections applied to an instance, plus the seed that made them."""

    row_perm: np.ndarray
    col_perm: np.ndarray
    seed: int

    def __post_init__(self):
        self.row_perm = np.asarray(self.row_perm, dtype=np.int64)
        self.col_perm = np.asarray(self.col_perm, dtype=np.int64)
        for p in (self.row_perm, self.col_perm):
            if not np.array_equal(np.sort(p), np.arange(len(p))):
                raise InvalidInstanceError("not a permutation")

    def is_identity(self):
        return (np.array_equal(self.row_perm, np.arange(len(self.row_perm)))
                and np.array_equal(self.col_perm, np.arange(len(self.col_perm))))

    def to_json(self):
        return json.dumps({
            "seed": int(self.seed),
            "row_perm": [int(i) for i in self.row_perm],
            "col_perm": [int(j) for j in self.col_perm],
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(np.array(d["row_perm"]), np.array(d["col_perm"]), d["seed"])


# ---------------------------------------------------------------------------
# MPS reading


def _tokens(line):
    return line.split()


def parse_mps(text):
    """Parse fixed- or free-format MPS into a MipInstance."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    name = ""
    sense = "minimize"
    obj_name = None
    free_rows = set()  # extra N rows, dropped with a warning
    row_index = {}
    row_senses = []
    row_names = []
    col_index = {}
    col_names = []
    col_integer = []
    obj_coeffs = []
    entries = {}  # (row, col) -> (value, line_no)
    rhs_map = {}
    ranges_map = {}
    bounds = {}  # col -> list of (btype, value)
    integral = False
    section = None
    pending_objsense = False
    saw_rows = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        is_header = not raw[0].isspace()
        toks = _tokens(raw)
        if is_header:
            head = toks[0].upper()
            pending_objsense = False
            if head == "NAME":
                name = toks[1] if len(toks) > 1 else ""
                section = None
            elif head == "OBJSENSE":
                if len(toks) > 1:
                    sense = "maximize" if toks[1].upper().startswith("MAX") else "minimize"
                else:
                    pending_objsense = True
                section = "OBJSENSE"
            elif head in ("ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS"):
                section = head
                if head == "ROWS":
                    saw_rows = True
            elif head == "ENDATA":
                break
            else:
                raise MpsParseError(f"unknown section header {toks[0]!r}", line_no)
            continue

        if section == "OBJSENSE" and pending_objsense:
            sense = "maximize" if toks[0].upper().startswith("MAX") else "minimize"
            pending_objsense = False
            continue
        if section == "ROWS":
            if len(toks) != 2:
                raise MpsParseError("ROWS line needs a sense and a name", line_no)
            rtype, rname = toks[0].upper(), toks[1]
            if rtype == "N":
                if obj_name is None:
                    obj_name = rname
                else:
                    warnings.warn(f"dropping extra free row {rname!r}")
                    free_rows.add(rname)
            elif rtype in _MPS_SENSE:
                if rname in row_index:
                    raise MpsSemanticError(f"duplicate row {rname!r}", line_no)
                row_index[rname] = len(row_names)
                row_names.append(rname)
                row_senses.append(_MPS_SENSE[rtype])
            else:
                raise MpsParseError(f"unknown row sense {rtype!r}", line_no)
        elif section == "COLUMNS":
            if len(toks) >= 3 and toks[1].strip("'\"").upper() == "MARKER":
                marker = toks[2].strip("'\"").upper()
                if marker == "INTORG":
                    integral = True
                elif marker == "INTEND":
                    integral = False
                else:
                    raise MpsParseError(f"unknown marker {toks[2]!r}", line_no)
                continue
            if len(toks) < 3 or len(toks) % 2 == 0:
                raise MpsParseError("COLUMNS line needs name plus (row, value) pairs",
                                    line_no)
            cname = toks[0]
            if cname not in col_index:
                col_index[cname] = len(col_names)
                col_names.append(cname)
                col_integer.append(integral)
                obj_coeffs.append(0.0)
            j = col_index[cname]
            for k in range(1, len(toks), 2):
                rname, sval = toks[k], toks[k + 1]
                try:
                    val = float(sval)
                except ValueError:
                    raise MpsParseError(f"bad coefficient {sval!r}", line_no)
                if rname == obj_name:
                    obj_coeffs[j] = val
                    continue
                if rname in free_rows:
                    continue
                if rname not in row_index:
                    raise MpsSemanticError(f"undeclared row {rname!r}", line_no)
                if val == 0.0:
                    warnings.warn(
                        f"dropping explicit zero coefficient at ({rname}, {cname})")
                    continue
                key = (row_index[rname], j)
                if key in entries:
                    raise MpsSemanticError(
                        f"duplicate entry for ({rname}, {cname})", line_no)
                entries[key] = val
        elif section == "RHS":
            _read_vector_line(toks, row_index, rhs_map, free_rows, obj_name,
                              line_no, "RHS")
        elif section == "RANGES":
            _read_vector_line(toks, row_index, ranges_map, free_rows, obj_name,
                              line_no, "RANGES")
        elif section == "BOUNDS":
            if len(toks) < 2:
                raise MpsParseError("short BOUNDS line", line_no)
            btype = toks[0].upper()
            no_value = btype in ("FR", "MI", "PL", "BV")
            want = 3 if no_value else 4
            if len(toks) == want:
                cname = toks[2]
                sval = None if no_value else toks[3]
            elif len(toks) == want - 1:
                # bound-set name omitted
                cname = toks[1]
                sval = None if no_value else toks[2]
            else:
                raise MpsParseError("malformed BOUNDS line", line_no)
            if cname not in col_index:
                raise MpsSemanticError(f"undeclared column {cname!r}", line_no)
            val = None
            if sval is not None:
                try:
                    val = float(sval)
                except ValueError:
                    raise MpsParseError(f"bad bound value {sval!r}", line_no)
            bounds.setdefault(col_index[cname], []).append((btype, val))
        elif section is None:
            raise MpsParseError("data line before any section header", line_no)

    if not saw_rows:
        raise MpsParseError("missing ROWS section")
    if obj_name is None:
        raise MpsParseError("missing objective (N) row")

    m = len(row_names)
    rhs = np.zeros(m)
    for i, v in rhs_map.items():
        rhs[i] = v

    # variable types and bounds
    n = len(col_names)
    lb = np.zeros(n)
    ub = np.full(n, INF)
    is_int = list(col_integer)
    for j, blist in bounds.items():
        for btype, val in blist:
            if btype == "UP":
                ub[j] = val
                if val < 0 and not any(bt in ("LO", "MI", "FX") for bt, _ in blist):
                    lb[j] = -INF  # classic MPS convention for negative UP
            elif btype == "LO":
                lb[j] = val
            elif btype == "FX":
                lb[j] = ub[j] = val
            elif btype == "FR":
                lb[j], ub[j] = -INF, INF
            elif btype == "MI":
                lb[j] = -INF
            elif btype == "PL":
                ub[j] = INF
            elif btype == "BV":
                is_int[j] = True
                lb[j], ub[j] = 0.0, 1.0
            elif btype == "UI":
                is_int[j] = True
                ub[j] = val
            elif btype == "LI":
                is_int[j] = True
                lb[j] = val
            else:
                raise MpsParseError(f"unknown bound type {btype!r}")

    var_types = []
    for j in range(n):
        if is_int[j]:
            var_types.append("binary" if 0 <= lb[j] and ub[j] <= 1 else "integer")
        else:
            var_types.append("continuous")

    # expand RANGES into an extra inequality row each
    mat = {k: v for k, v in entries.items()}
    for i, r in sorted(ranges_map.items()):
        if r == 0:
            continue
        s, b = row_senses[i], rhs[i]
        if s == "<=":
            new_sense, new_rhs = ">=", b - abs(r)
        elif s == ">=":
            new_sense, new_rhs = "<=", b + abs(r)
        else:  # equality becomes [min(b, b+r), max(b, b+r)]
            lo, hi = (b, b + r) if r > 0 else (b + r, b)
            row_senses[i] = ">="
            rhs[i] = lo
            new_sense, new_rhs = "<=", hi
        new_i = len(row_names)
        row_names.append(row_names[i] + "__rng")
        row_senses.append(new_sense)
        rhs = np.append(rhs, new_rhs)
        for (ri, ci), v in list(entries.items()):
            if ri == i:
                mat[(new_i, ci)] = v

    keys = sorted(mat)
    return MipInstance(
        name=name,
        sense=sense,
        obj_coeffs=np.array(obj_coeffs, dtype=float),
        mat_rows=np.array([k[0] for k in keys], dtype=np.int64),
        mat_cols=np.array([k[1] for k in keys], dtype=np.int64),
        mat_vals=np.array([mat[k] for k in keys], dtype=float),
        row_senses=row_senses,
        rhs=rhs,
        var_lb=lb,
        var_ub=ub,
        var_types=var_types,
        row_names=row_names,
        col_names=col_names,
        obj_name=obj_name,
    )


def _read_vector_line(toks, row_index, target, free_rows, obj_name, line_no, what):
    """RHS/RANGES line: optional set name then (row, value) pairs."""
    start = 0 if toks[0] in row_index or toks[0] == obj_name else 1
    rest = toks[start:]
    if not rest or len(rest) % 2:
        raise MpsParseError(f"malformed {what} line", line_no)
    for k in range(0, len(rest), 2):
        rname, sval = rest[k], rest[k + 1]
        try:
            val = float(sval)
        except ValueError:
            raise MpsParseError(f"bad {what} value {sval!r}", line_no)
        if rname == obj_name or rname in free_rows:
            warnings.warn(f"{what} entry on free row {rname!r} ignored")
            continue
        if rname not in row_index:
            raise MpsSemanticError(f"undeclared row {rname!r}", line_no)
        target[row_index[rname]] = val


# ---------------------------------------------------------------------------
# MPS writing


def _fmt(v):
    if v == INF:
        return "1e308"
    if v == -INF:
        return "-1e308"
    return repr(float(v))


def write_mps(inst):
    """Serialize to free-format MPS. Deterministic: equal instances, equal bytes."""
    out = []
    out.append(f"NAME          {inst.name}")
    if inst.sense == "maximize":
        out.append("OBJSENSE")
        out.append("    MAX")
    out.append("ROWS")
    out.append(f" N  {inst.obj_name}")
    for sense, rname in zip(inst.row_senses, inst.row_names):
        out.append(f" {_SENSE_MPS[sense]}  {rname}")

    by_col = {j: [] for j in range(inst.num_cols)}
    for i, j, v in zip(inst.mat_rows, inst.mat_cols, inst.mat_vals):
        by_col[int(j)].append((int(i), float(v)))

    out.append("COLUMNS")
    in_int = False
    marker = 0
    for j, cname in enumerate(inst.col_names):
        want_int = inst.var_types[j] in ("binary", "integer")
        if want_int != in_int:
            tag = "INTORG" if want_int else "INTEND"
            out.append(f"    MARKER{marker}  'MARKER'  '{tag}'")
            marker += 1
            in_int = want_int
        if inst.obj_coeffs[j] != 0.0:
            out.append(f"    {cname}  {inst.obj_name}  {_fmt(inst.obj_coeffs[j])}")
        for i, v in by_col[j]:
            out.append(f"    {cname}  {inst.row_names[i]}  {_fmt(v)}")
    if in_int:
        out.append(f"    MARKER{marker}  'MARKER'  'INTEND'")

    out.append("RHS")
    for i, rname in enumerate(inst.row_names):
        if inst.rhs[i] != 0.0:
            out.append(f"    RHS  {rname}  {_fmt(inst.rhs[i])}")

    out.append("BOUNDS")
    for j, cname in enumerate(inst.col_names):
        lo, hi, t = inst.var_lb[j], inst.var_ub[j], inst.var_types[j]
        if t == "binary" and lo == 0.0 and hi == 1.0:
            out.append(f" BV BND  {cname}")
            continue
        if lo == hi:
            out.append(f" FX BND  {cname}  {_fmt(lo)}")
            continue
        if lo == -INF and hi == INF:
            out.append(f" FR BND  {cname}")
            continue
        if lo == -INF:
            out.append(f" MI BND  {cname}")
        elif lo != 0.0 or t != "continuous":
            out.append(f" LO BND  {cname}  {_fmt(lo)}")
        if hi != INF:
            out.append(f" UP BND  {cname}  {_fmt(hi)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Permutation augmentation


def apply_permutation(inst, row_perm, col_perm, seed=0):
    """Move row i to row_perm[i] and column j to col_perm[j]."""
    record = PermutationRecord(row_perm, col_perm, seed)
    rp, cp = record.row_perm, record.col_perm
    m, n = inst.num_rows, inst.num_cols

    new_rhs = np.empty(m)
    new_rhs[rp] = inst.rhs
    new_senses = [None] * m
    new_rnames = [None] * m
    for i in range(m):
        new_senses[rp[i]] = inst.row_senses[i]
        new_rnames[rp[i]] = inst.row_names[i]

    new_obj = np.empty(n)
    new_obj[cp] = inst.obj_coeffs
    new_lb = np.empty(n)
    new_lb[cp] = inst.var_lb
    new_ub = np.empty(n)
    new_ub[cp] = inst.var_ub
    new_types = [None] * n
    new_cnames = [None] * n
    for j in range(n):
        new_types[cp[j]] = inst.var_types[j]
        new_cnames[cp[j]] = inst.col_names[j]

    permuted = MipInstance(
        name=inst.name,
        sense=inst.sense,
        obj_coeffs=new_obj,
        mat_rows=rp[inst.mat_rows] if inst.nnz else inst.mat_rows.copy(),
        mat_cols=cp[inst.mat_cols] if inst.nnz else inst.mat_cols.copy(),
        mat_vals=inst.mat_vals.copy(),
        row_senses=new_senses,
        rhs=new_rhs,
        var_lb=new_lb,
        var_ub=new_ub,
        var_types=new_types,
        row_names=new_rnames,
        col_names=new_cnames,
        obj_name=inst.obj_name,
    )
    return permuted, record


def permute_instance(inst, seed):
    """Random row/column permutation; seed 0 is the identity."""
    m, n = inst.num_rows, inst.num_cols
    if seed == 0:
        row_perm = np.arange(m)
        col_perm = np.arange(n)
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        row_perm = rng.permutation(m)
        col_perm = rng.permutation(n)
    return apply_permutation(inst, row_perm, col_perm, seed)
