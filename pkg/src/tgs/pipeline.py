"""Five-stage run: census, spectra, homology, fuzzy closures, fingerprints.

Every stage writes one NDJSON artifact into the output directory and a
``<stage>.done`` marker holding the hashes of its input and output.  With
``resume`` a stage whose marker matches is skipped.  The manifest is written
last; timings go to a separate file so the manifest is byte-stable.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .census import _atomic_write, count_models
from .errors import TGSError
from .fuzzy import THRESHOLDS, as_fraction, assign_weights, crisp_reduction_check, fuzzy_closure
from .graph import fingerprint
from .homology import ext, ring_type_violation, tor
from .ideals import MODES, spectrum
from .model import AxiomMode, GammaSemiring, census_hash
from .modules import budget_from_env, check_module_axioms, regular_module

STAGES = ("census", "spectrum", "homology", "fuzzy", "fingerprint")


class PipelineError(TGSError):
    def __init__(self, stage: str, instance, cause: Exception):
        super().__init__(f"stage {stage} failed on instance {instance}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.instance = instance
        self.cause = cause

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "instance": self.instance,
            "error": type(self.cause).__name__,
            "message": str(self.cause),
        }


@dataclass
class PipelineConfig:
    n: int
    m: int
    axiom_mode: str = "default"
    mode: str = "literal"
    scheme: str = "uniform"
    thetas: tuple = THRESHOLDS
    hom_budget: int | None = None
    tensor_cap: int = 10_000
    workers: int = 1
    out: str = "tgs-run"
    resume: bool = False
    cumulative: bool = False  # every order n' <= n and m' <= m

    def __post_init__(self):
        self.thetas = tuple(as_fraction(t) for t in self.thetas)
        if any(not 0 <= t <= 1 for t in self.thetas):
            raise ValueError("thresholds must lie in [0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"absorption mode must be one of {MODES}")
        if self.axiom_mode not in ("default", "strict-t5"):
            raise ValueError("axiom mode must be 'default' or 'strict-t5'")
        if self.hom_budget is None:
            self.hom_budget = budget_from_env()
        if self.hom_budget <= 0 or self.tensor_cap <= 0 or self.workers <= 0:
            raise ValueError("budgets and worker counts must be positive")

    def orders(self) -> list[tuple[int, int]]:
        if not self.cumulative:
            return [(self.n, self.m)]
        return [(a, b) for a in range(1, self.n + 1) for b in range(1, self.m + 1)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["thetas"] = [str(t) for t in self.thetas]
        for k in ("out", "resume", "workers"):
            d.pop(k)  # do not affect results
        return d


@dataclass
class RunManifest:
    config: dict
    artifacts: dict[str, str]
    version: str
    findings: int
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"config": self.config, "artifacts": self.artifacts, "version": self.version, "findings": self.findings}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def verify(self, out: str | Path) -> list[str]:
        """Artifacts that are missing or whose hash changed."""
        bad = []
        for name, digest in self.artifacts.items():
            p = Path(out) / name
            if not p.exists() or _sha(p) != digest:
                bad.append(name)
        return bad


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _fan_out(fn, items: list, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with multiprocessing.get_context("fork").Pool(workers) as pool:
            return pool.map(fn, items)
    return [fn(x) for x in items]


def _read_models(path: Path) -> list[tuple[str, GammaSemiring]]:
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        data = json.loads(line)
        if "tern" in data:
            out.append((data["id"], GammaSemiring.from_dict(data)))
    return out


# ---------------------------------------------------------------------------
# per-model stage work (module-level so worker processes can pickle them)


def _spectrum_job(item):
    ident, model, mode = item
    sp = spectrum(model, mode)
    return {"id": ident, "spectrum": sp.to_dict(), "findings": []}


def _homology_job(item):
    ident, model, budget, cap = item
    if model.e is None or not model.is_group_complete():
        return {"id": ident, "status": "skipped: not group-complete with identity", "findings": []}
    R = regular_module(model)
    rep = check_module_axioms(model, R)
    findings = [] if rep.passed else ["regular module fails the module axioms"]
    bad = ring_type_violation(model, R)
    if bad is not None:
        return {"id": ident, "status": "skipped: " + bad["reason"], "module_axioms": rep.passed, "findings": findings}
    groups = {
        f"ext{d}": ext(model, R, R, d, budget).to_dict() for d in (0, 1)
    } | {f"tor{d}": tor(model, R, R, d).to_dict() for d in (0, 1)}
    for key in ("ext1", "tor1"):
        if groups[key]["cyclic_orders"]:
            findings.append(f"{key} of the regular module is nonzero")
    return {"id": ident, "status": "computed", "module_axioms": rep.passed, "groups": groups, "findings": findings}


def _fuzzy_job(item):
    ident, model, mode, scheme, thetas = item
    sp = spectrum(model, mode)
    W = assign_weights(sp, scheme)
    closures = []
    for I in sp.proper_ideals:
        closures.append({"ideal": I.key, "closures": {str(t): sorted(fuzzy_closure(sp, I, t, W)) for t in thetas}})
    crisp = crisp_reduction_check(model, sp, thetas)
    findings = [] if crisp.passed else ["unit weights do not reduce to the crisp closures"]
    return {"id": ident, "weights": W.to_dict(), "closures": closures, "crisp": crisp.passed, "findings": findings}


def _fingerprint_job(item):
    ident, model, mode, scheme = item
    fp = fingerprint(model, mode, scheme)
    return {"id": ident, "fingerprint": fp.to_dict(), "findings": list(fp.findings)}


_JOBS = {
    "spectrum": _spectrum_job,
    "homology": _homology_job,
    "fuzzy": _fuzzy_job,
    "fingerprint": _fingerprint_job,
}


def _job(args):
    stage, item = args
    try:
        return _JOBS[stage](item)
    except TGSError as exc:
        return {"id": item[0], "error": {"stage": stage, "type": type(exc).__name__, "message": str(exc)}}


# ---------------------------------------------------------------------------


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.out)
        self.timings: dict[str, float] = {}
        self.findings = 0

    def _marker(self, stage: str) -> Path:
        return self.out / f"{stage}.done"

    def _input_hash(self, stage: str) -> str:
        h = hashlib.sha256(_dump(self.config.to_dict()).encode())
        if stage != "census":
            h.update(_sha(self.out / "census.ndjson").encode())
        return h.hexdigest()

    def _skip(self, stage: str) -> bool:
        if not self.config.resume or not self._marker(stage).exists():
            return False
        try:
            mark = json.loads(self._marker(stage).read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            return False
        art = self.out / f"{stage}.ndjson"
        return art.exists() and mark.get("input") == self._input_hash(stage) and mark.get("output") == _sha(art)

    def _finish(self, stage: str, lines: list[dict]) -> None:
        art = self.out / f"{stage}.ndjson"
        _atomic_write(art, "".join(_dump(x) + "\n" for x in lines))
        _atomic_write(self._marker(stage), _dump({"input": self._input_hash(stage), "output": _sha(art)}) + "\n")

    def _count_findings(self, stage: str) -> None:
        for line in (self.out / f"{stage}.ndjson").read_text(encoding="utf-8").splitlines():
            rec = json.loads(line)
            self.findings += len(rec.get("findings", []))
            if "error" in rec:
                err = rec["error"]
                raise PipelineError(stage, rec.get("id"), TGSError(f"{err['type']}: {err['message']}"))

    def census(self) -> None:
        cfg = self.config
        lines = []
        for n, m in cfg.orders():
            rec = count_models(
                n, m, AxiomMode(cfg.axiom_mode == "strict-t5"), workers=cfg.workers,
                checkpoint=self.out / f"census-{n}-{m}.ckpt", resume=cfg.resume,
            )
            for k, model in enumerate(rec.models()):
                lines.append({"id": f"{n}.{m}.{k}", "hash": census_hash(model), **model.to_dict()})
            lines.append({"summary": rec.summary()})
        self._finish("census", lines)

    def run_stage(self, stage: str) -> None:
        if stage == "census":
            return self.census()
        cfg = self.config
        models = _read_models(self.out / "census.ndjson")
        if stage == "spectrum":
            jobs = [(i, T, cfg.mode) for i, T in models]
        elif stage == "homology":
            jobs = [(i, T, cfg.hom_budget, cfg.tensor_cap) for i, T in models]
        elif stage == "fuzzy":
            jobs = [(i, T, cfg.mode, cfg.scheme, cfg.thetas) for i, T in models]
        else:
            jobs = [(i, T, cfg.mode, cfg.scheme) for i, T in models]
        self._finish(stage, _fan_out(_job, [(stage, j) for j in jobs], cfg.workers))

    def run(self) -> RunManifest:
        self.out.mkdir(parents=True, exist_ok=True)
        manifest_path = self.out / "manifest.json"
        if manifest_path.exists():
            manifest_path.unlink()
        for stage in STAGES:
            start = time.perf_counter()
            if not self._skip(stage):
                try:
                    self.run_stage(stage)
                except PipelineError:
                    raise
                except (TGSError, ValueError, OSError) as exc:
                    raise PipelineError(stage, None, exc) from exc
            self._count_findings(stage)
            self.timings[stage] = time.perf_counter() - start
        artifacts = {f"{s}.ndjson": _sha(self.out / f"{s}.ndjson") for s in STAGES}
        man = RunManifest(self.config.to_dict(), artifacts, __version__, self.findings, dict(self.timings))
        _atomic_write(self.out / "timings.json", _dump(self.timings) + "\n")
        _atomic_write(manifest_path, man.to_json())
        return man


def run_pipeline(config: PipelineConfig) -> RunManifest:
    return Pipeline(config).run()
