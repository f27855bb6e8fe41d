"""Exhaustive census of models of a given order up to isomorphism.

Search order: addition tables first (only those minimal in their relabeling
orbit, since the encoding starts with ``add``), then fully symmetric ternary
tables filled cell by cell with distributivity and zero-absorption pruning,
then ``m``-tuples of compatible tables and every associative parameter table.
A candidate is emitted only if its own encoding is already the canonical one,
so no post-hoc dedup pass is needed.
"""

from __future__ import annotations

import itertools
import json
import multiprocessing
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import CheckpointError, GuardExceeded
from .model import AxiomMode, GammaSemiring, check_axioms, decode, encode_tables, find_identity_idempotents

GUARD_N = 4
GUARD_M = 3


def search_space(n: int, m: int) -> int:
    """Cardinality of the raw labeled table space."""
    return n ** (n * n) * m ** (m * m) * n ** (m * n ** 3)


def nominal_bound(n: int, m: int) -> int:
    return n ** (3 * m)


def _guard(n: int, m: int, override: bool) -> None:
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if n > 255 or m > 255:
        raise ValueError("n and m must fit in one byte")
    if not override and (n > GUARD_N or m > GUARD_M):
        size = search_space(n, m)
        raise GuardExceeded(
            f"census of order ({n}, {m}) is outside the default guard n <= {GUARD_N}, m <= {GUARD_M}; "
            f"raw search space is {size:.3e} labeled models (pass override=True to run anyway)",
            size,
        )


# ---------------------------------------------------------------------------
# addition tables


def addition_tables(n: int) -> list[np.ndarray]:
    """Commutative monoid tables with identity 0, minimal under relabelings fixing 0."""
    pairs = [(a, b) for a in range(1, n) for b in range(a, n)]
    perms = [np.array((0,) + p) for p in itertools.permutations(range(1, n))]
    out = []
    for vals in itertools.product(range(n), repeat=len(pairs)):
        A = np.zeros((n, n), dtype=np.int64)
        A[0] = A[:, 0] = np.arange(n)
        for (a, b), v in zip(pairs, vals):
            A[a, b] = A[b, a] = v
        if not np.array_equal(A[A], _assoc_rhs(A)):
            continue
        own = A.tobytes()
        minimal = True
        for s in perms[1:]:
            inv = np.argsort(s)
            if s[A[np.ix_(inv, inv)]].tobytes() < own:
                minimal = False
                break
        if minimal:
            out.append(A)
    return out


def _assoc_rhs(A: np.ndarray) -> np.ndarray:
    # [a, b, c] -> A[a, A[b, c]]; compare with A[A][a, b, c] = A[A[a, b], c]
    n = len(A)
    ar = np.arange(n)
    return A[ar[:, None, None], A[None, :, :]]


# ---------------------------------------------------------------------------
# single ternary tables


def _cells(n: int) -> list[tuple[int, int, int]]:
    return list(itertools.combinations_with_replacement(range(1, n), 3))


def _cell_index(n: int) -> np.ndarray:
    """Map every triple to its symmetric cell, or -1 when it contains 0."""
    idx = -np.ones((n, n, n), dtype=np.int64)
    for k, cell in enumerate(_cells(n)):
        for p in set(itertools.permutations(cell)):
            idx[p] = k
    return idx


def _distributivity_constraints(A: np.ndarray) -> list[list[tuple[int, int, int]]]:
    """For each cell ``k`` the constraints ``t[x] == t[y] + t[z]`` whose last cell is ``k``.

    Cell -1 stands for a triple containing 0 (value forced to 0).
    """
    n = len(A)
    idx = _cell_index(n)
    ncell = len(_cells(n))
    by_last: list[set] = [set() for _ in range(ncell)]
    for a, b, c, d in itertools.product(range(n), repeat=4):
        x = idx[A[a, b], c, d]
        y = idx[a, c, d]
        z = idx[b, c, d]
        key = (int(x), int(y), int(z))
        last = max(key)
        if last < 0:
            continue
        by_last[last].add(key)
    return [sorted(s) for s in by_last]


def _single_tables(A: np.ndarray, stats: dict) -> list[np.ndarray]:
    """Symmetric tables with zero absorption, distributivity and self-associativity."""
    n = len(A)
    cells = _cells(n)
    ncell = len(cells)
    idx = _cell_index(n)
    cons = _distributivity_constraints(A)
    vals = [0] * (ncell + 1)  # vals[-1] is the zero cell
    out = []

    def ok(k: int) -> bool:
        for x, y, z in cons[k]:
            if vals[x] != A[vals[y], vals[z]]:
                return False
        return True

    def rec(k: int) -> None:
        stats["nodes"] += 1
        if k == ncell:
            T = np.zeros((n, n, n), dtype=np.int64)
            mask = idx >= 0
            T[mask] = np.asarray(vals[:ncell], dtype=np.int64)[idx[mask]]
            if _associative(T, T):
                out.append(T)
            return
        for v in range(n):
            vals[k] = v
            if ok(k):
                rec(k + 1)
        vals[k] = 0

    rec(0)
    return out


def _associative(inner: np.ndarray, outer: np.ndarray) -> bool:
    """Both ternary associativity laws with ``inner`` nested inside ``outer``."""
    n = len(inner)
    ar = np.arange(n)
    a, b, c, d, e = np.ix_(ar, ar, ar, ar, ar)
    lhs = outer[inner[a, b, c], d, e]
    if not np.array_equal(lhs, outer[a, inner[b, c, d], e]):
        return False
    return bool(np.array_equal(lhs, outer[a, b, inner[c, d, e]]))


def parameter_tables(m: int) -> list[np.ndarray]:
    out = []
    ar = np.arange(m)
    for vals in itertools.product(range(m), repeat=m * m):
        G = np.array(vals, dtype=np.int64).reshape(m, m)
        if np.array_equal(G[G[:, :, None], ar[None, None, :]], G[ar[:, None, None], G[None, :, :]]):
            out.append(G)
    return out


# ---------------------------------------------------------------------------
# per-addition-table search


def _stabilizer(A: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Carrier relabelings (and inverses) fixing ``A``."""
    n = len(A)
    out = []
    for rest in itertools.permutations(range(1, n)):
        s = np.array((0,) + rest)
        inv = np.argsort(s)
        if np.array_equal(s[A[np.ix_(inv, inv)]], A):
            out.append((s, inv))
    return out


def _is_canonical(n: int, m: int, A, G, T, stab, pperms) -> bool:
    own = encode_tables(n, m, A, G, T)[2 + n * n:]
    for p in pperms:
        pinv = np.argsort(p)
        G2 = p[G[np.ix_(pinv, pinv)]]
        Tp = T[pinv]
        for s, sinv in stab:
            enc = G2.astype(np.uint8).tobytes() + s[Tp[np.ix_(range(m), sinv, sinv, sinv)]].astype(np.uint8).tobytes()
            if enc < own:
                return False
    return True


def search_addition_table(A: np.ndarray, m: int, mode: AxiomMode = AxiomMode(), permute_gamma: bool = True) -> tuple[list[bytes], int]:
    """Canonical encodings of every model with addition table ``A``; also the node count."""
    n = len(A)
    stats = {"nodes": 0}
    singles = _single_tables(A, stats)
    k = len(singles)
    compat = np.zeros((k, k), dtype=bool)
    for i in range(k):
        compat[i, i] = True
        for j in range(i + 1, k):
            compat[i, j] = compat[j, i] = _associative(singles[i], singles[j]) and _associative(singles[j], singles[i])
    stab = _stabilizer(A)
    pperms = [np.array(p) for p in itertools.permutations(range(m))] if permute_gamma else [np.arange(m)]
    gtabs = parameter_tables(m)
    found = []

    def tuples(prefix: list[int]) -> Iterator[list[int]]:
        if len(prefix) == m:
            yield prefix
            return
        for j in range(k):
            if all(compat[i, j] for i in prefix):
                yield from tuples(prefix + [j])

    for tup in tuples([]):
        T = np.stack([singles[i] for i in tup])
        for G in gtabs:
            stats["nodes"] += 1
            if not _is_canonical(n, m, A, G, T, stab, pperms):
                continue
            if mode.strict_t5:
                if not check_axioms(GammaSemiring(A, G, T), mode, max_witnesses=1).passed:
                    continue
            found.append(encode_tables(n, m, A, G, T))
    return found, stats["nodes"]


def _worker(args) -> tuple[int, list[bytes], int]:
    i, A, m, strict_t5, permute_gamma = args
    encs, nodes = search_addition_table(A, m, AxiomMode(strict_t5), permute_gamma)
    return i, encs, nodes


# ---------------------------------------------------------------------------
# records and checkpoints


@dataclass
class CensusRecord:
    n: int
    m: int
    mode: str
    permute_gamma: bool
    encodings: list[bytes]
    workers: int = 1
    wall_time: float = 0.0
    nodes: int = 0
    complete: bool = True
    search_space: int = 0
    nominal_bound: int = 0

    @property
    def count(self) -> int:
        return len(self.encodings)

    @property
    def within_nominal_bound(self) -> bool:
        return self.count <= self.nominal_bound

    def models(self) -> Iterator[GammaSemiring]:
        for enc in self.encodings:
            yield census_model(enc)

    def summary(self) -> dict:
        return {"count": self.count, "n": self.n, "m": self.m, "mode": self.mode}

    def to_dict(self) -> dict:
        return {
            **self.summary(),
            "permute_gamma": self.permute_gamma,
            "complete": self.complete,
            "nodes": self.nodes,
            "search_space": str(self.search_space),
            "nominal_bound": self.nominal_bound,
            "within_nominal_bound": self.within_nominal_bound,
            "workers": self.workers,
            "wall_time": self.wall_time,
        }

    def write_ndjson(self, path: str | Path) -> None:
        lines = [m.to_json() for m in self.models()]
        lines.append(json.dumps(self.summary(), sort_keys=True, separators=(",", ":")))
        _atomic_write(Path(path), "\n".join(lines) + "\n")


def census_model(enc: bytes) -> GammaSemiring:
    """Decode a census encoding, attaching the first identity idempotent if any."""
    model = decode(enc)
    ids = find_identity_idempotents(model)
    return model.with_identity(ids[0]) if ids else model


@dataclass
class SearchCheckpoint:
    """Completed addition-table indices and the encodings they produced."""

    n: int
    m: int
    mode: str
    permute_gamma: bool
    done: dict[int, list[bytes]] = field(default_factory=dict)
    nodes: int = 0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "mode": self.mode,
            "permute_gamma": self.permute_gamma,
            "nodes": self.nodes,
            "done": {str(i): [e.hex() for e in encs] for i, encs in sorted(self.done.items())},
        }

    def save(self, path: str | Path) -> None:
        _atomic_write(Path(path), json.dumps(self.to_dict(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "SearchCheckpoint":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(
                int(data["n"]),
                int(data["m"]),
                str(data["mode"]),
                bool(data["permute_gamma"]),
                {int(i): [bytes.fromhex(e) for e in encs] for i, encs in data["done"].items()},
                int(data.get("nodes", 0)),
            )
        except (OSError, ValueError, KeyError, TypeError, AttributeError) as exc:
            raise CheckpointError(f"checkpoint {path} is unreadable: {exc}") from None


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# entry points


def count_models(
    n: int,
    m: int,
    mode: AxiomMode = AxiomMode(),
    workers: int = 1,
    permute_gamma: bool = True,
    checkpoint: str | Path | None = None,
    resume: bool = False,
    override: bool = False,
    stop_after: int | None = None,
) -> CensusRecord:
    """Run the census and return its record.

    With ``checkpoint`` set, progress is saved after every addition table;
    ``resume`` continues from that file.  ``stop_after`` halts after that many
    newly finished tables and returns an incomplete record (used to simulate
    interruption).
    """
    _guard(n, m, override)
    start = time.perf_counter()
    tables = addition_tables(n)
    state = SearchCheckpoint(n, m, mode.name, permute_gamma)
    if resume and checkpoint is not None and Path(checkpoint).exists():
        state = SearchCheckpoint.load(checkpoint)
        if (state.n, state.m, state.mode, state.permute_gamma) != (n, m, mode.name, permute_gamma):
            raise CheckpointError(
                f"checkpoint is for (n={state.n}, m={state.m}, mode={state.mode}, permute_gamma={state.permute_gamma})"
            )
        if any(i >= len(tables) for i in state.done):
            raise CheckpointError("checkpoint refers to addition tables that do not exist")
    todo = [(i, tables[i], m, mode.strict_t5, permute_gamma) for i in range(len(tables)) if i not in state.done]
    finished = 0
    complete = True

    def absorb(result) -> bool:
        nonlocal finished
        i, encs, nodes = result
        state.done[i] = encs
        state.nodes += nodes
        finished += 1
        if checkpoint is not None:
            state.save(checkpoint)
        return stop_after is not None and finished >= stop_after

    if workers > 1 and len(todo) > 1:
        with multiprocessing.get_context("spawn" if os.name == "nt" else "fork").Pool(workers) as pool:
            for result in pool.imap_unordered(_worker, todo):
                if absorb(result):
                    complete = False
                    pool.terminate()
                    break
    else:
        for job in todo:
            if absorb(_worker(job)):
                complete = False
                break
    complete = complete and len(state.done) == len(tables)
    encodings = sorted(set(e for encs in state.done.values() for e in encs))
    return CensusRecord(
        n,
        m,
        mode.name,
        permute_gamma,
        encodings,
        workers=workers,
        wall_time=time.perf_counter() - start,
        nodes=state.nodes,
        complete=complete,
        search_space=search_space(n, m),
        nominal_bound=nominal_bound(n, m),
    )


def enumerate_models(n: int, m: int, mode: AxiomMode = AxiomMode(), **kwargs) -> Iterator[GammaSemiring]:
    """One canonical representative per isomorphism class, in sorted encoding order."""
    yield from count_models(n, m, mode, **kwargs).models()
