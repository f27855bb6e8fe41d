import json

import pytest

from tgs.pipeline import STAGES, PipelineConfig, RunManifest, run_pipeline


def _cfg(tmp_path, name, **kw):
    return PipelineConfig(2, 2, out=str(tmp_path / name), **kw)


def test_manifest_is_byte_stable(tmp_path):
    a = run_pipeline(_cfg(tmp_path, "a"))
    b = run_pipeline(_cfg(tmp_path, "b"))
    assert a.to_json() == b.to_json()
    assert (tmp_path / "a" / "manifest.json").read_bytes() == (tmp_path / "b" / "manifest.json").read_bytes()
    assert a.verify(tmp_path / "a") == []


def test_workers_do_not_change_artifacts(tmp_path):
    a = run_pipeline(_cfg(tmp_path, "w1"))
    b = run_pipeline(_cfg(tmp_path, "w2", workers=2))
    assert a.artifacts == b.artifacts


def test_resume_skips_finished_stages(tmp_path):
    cfg = _cfg(tmp_path, "r")
    first = run_pipeline(cfg)
    out = tmp_path / "r"
    stamps = {s: (out / f"{s}.ndjson").stat().st_mtime_ns for s in STAGES}
    # drop the last artifact; only that stage should be redone
    (out / "fingerprint.ndjson").unlink()
    again = run_pipeline(_cfg(tmp_path, "r", resume=True))
    assert again.to_json() == first.to_json()
    for s in STAGES[:-1]:
        assert (out / f"{s}.ndjson").stat().st_mtime_ns == stamps[s]


def test_tampered_artifact_is_detected(tmp_path):
    man = run_pipeline(_cfg(tmp_path, "t"))
    (tmp_path / "t" / "spectrum.ndjson").write_text("{}\n")
    assert man.verify(tmp_path / "t") == ["spectrum.ndjson"]


def test_every_model_reaches_every_stage(tmp_path):
    run_pipeline(_cfg(tmp_path, "c"))
    out = tmp_path / "c"
    ids = [json.loads(x)["id"] for x in (out / "census.ndjson").read_text().splitlines() if "id" in json.loads(x)]
    assert len(ids) == 36
    for s in STAGES[1:]:
        assert [json.loads(x)["id"] for x in (out / f"{s}.ndjson").read_text().splitlines()] == ids


def test_cumulative_orders():
    assert PipelineConfig(2, 2, cumulative=True).orders() == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert PipelineConfig(2, 2).orders() == [(2, 2)]


@pytest.mark.parametrize(
    "kw", [{"thetas": ("3/2",)}, {"mode": "weird"}, {"axiom_mode": "x"}, {"workers": 0}, {"hom_budget": -1}]
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        PipelineConfig(2, 1, **kw)


def test_manifest_dict_excludes_runtime_options(tmp_path):
    d = PipelineConfig(2, 1, workers=3, out=str(tmp_path)).to_dict()
    assert "workers" not in d and "out" not in d and d["thetas"] == ["0", "1/2", "1"]
    man = RunManifest(d, {}, "0", 0, {"census": 1.0})
    assert "timings" not in json.loads(man.to_json())
