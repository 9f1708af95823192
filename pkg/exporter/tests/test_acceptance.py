"""Round-trip acceptance: containers must be consumable by the scorer.

The exporter talks to the scoring package only through the LTNT byte
format and the `lqrlab` command line, never through its Python API, so
these checks drive the consumer in a subprocess. Each check prints one
[PASS]/[FAIL] line.
"""

import json
import subprocess
import sys

import pytest

from latent_export import ExportSpec, export


def _check(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _lqrlab(*argv):
    return subprocess.run(
        [sys.executable, "-m", "lqrlab.cli", *argv],
        capture_output=True, text=True,
    )


@pytest.fixture(scope="module")
def exported(tiny_checkpoint, tone_16k, tmp_path_factory):
    out = tmp_path_factory.mktemp("ltnt") / "tone.ltnt"
    result = export(ExportSpec("encodec-24", tone_16k, str(out),
                               checkpoint=tiny_checkpoint))
    return out, result


def test_container_parses_in_consumer(exported):
    out, result = exported
    proc = _lqrlab("export-info", "--input", str(out), "--json")
    described = json.loads(proc.stdout) if proc.returncode == 0 else {}
    ok = (
        proc.returncode == 0
        and described.get("n_stages") == result.n_stages
        and described.get("dim") == result.dim
        and described.get("frames") == result.n_frames
        and described.get("sample_rate") == result.sample_rate
    )
    _check(
        "consumer parses exported container",
        ok,
        f"exit {proc.returncode}, described as {described.get('n_stages')} stages x "
        f"{described.get('frames')} frames x {described.get('dim')} dims",
    )


def test_internal_residual_check(exported):
    _, result = exported
    _check(
        "stage sums reproduce the codec arithmetic",
        result.residual_error <= 1e-5,
        f"max deviation {result.residual_error:.3g} (tolerance 1e-5)",
    )


def test_container_scores_end_to_end(exported, tmp_path):
    """Train on the exported latents and score the container, CLI only."""
    out, result = exported
    manifest = tmp_path / "train.csv"
    manifest.write_text(f"path\n{out}\n")
    model = tmp_path / "m.rvqm"
    trained = _lqrlab("train", "--manifest", str(manifest),
                      "--stages", "2", "--codebook-size", "4", "--seed", "3",
                      "--out", str(model))
    scored = _lqrlab("score", "--model", str(model), "--input", str(out), "--json")
    report = json.loads(scored.stdout) if scored.returncode == 0 else {}
    mean_lqr = report.get("mean_lqr", float("nan"))
    ok = (
        trained.returncode == 0
        and scored.returncode == 0
        and mean_lqr > 0
        and len(report.get("stage_lqr", ())) == result.n_stages
    )
    _check(
        "container trains and scores through the consumer CLI",
        ok,
        f"train exit {trained.returncode}, score exit {scored.returncode}, "
        f"mean_lqr {mean_lqr:.4g}",
    )
