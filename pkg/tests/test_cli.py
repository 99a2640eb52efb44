import json

import numpy as np
import pytest

from riesz.cli import UsageError, main, parse_config_text, parse_symbol_spec


def run_cli(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


# -- config parsing ----------------------------------------------------------

def test_parse_config_values():
    text = """
    # a comment
    delta = 1.5
    n = 42
    name = "probe"
    flag = true
    ns = [8, 16, 32]
    """
    cfg = parse_config_text(text)
    assert cfg == {"delta": 1.5, "n": 42, "name": "probe", "flag": True, "ns": [8, 16, 32]}


def test_parse_config_diagnostics_carry_line_numbers():
    with pytest.raises(UsageError) as err:
        parse_config_text("good = 1\nbad value\n")
    assert "line 2" in str(err.value)
    with pytest.raises(UsageError) as err:
        parse_config_text("x = {}\n")
    assert "line 1" in str(err.value)


def test_symbol_dsl():
    sym = parse_symbol_spec("product(bochner(delta=1),cutoff2(r0=0.25))")
    g_vals = sym.evaluate((np.array([0.0, 1.0, 1.5]),))
    assert g_vals[0] == 0.0  # cutoff2 vanishes at the origin
    assert g_vals[2] == 0.0
    scaled = parse_symbol_spec("scale(2.0, bochner(delta=1))")
    assert scaled.evaluate((np.array([0.0]),))[0] == pytest.approx(2.0)
    with pytest.raises(UsageError):
        parse_symbol_spec("warp(q=1)")
    with pytest.raises(UsageError):
        parse_symbol_spec("bochner(delta=)")


# -- exit codes --------------------------------------------------------------

def test_missing_config_is_usage_error(tmp_path):
    code, out = run_cli(tmp_path, "probe", "--config", str(tmp_path / "nope.toml"))
    assert code == 1
    assert not (out / "probe.csv").exists()


def test_malformed_sweep_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("ns = [8]\n")
    code, out = run_cli(tmp_path, "probe", "--config", str(cfg))
    assert code == 1
    assert not (out / "probe.csv").exists()


def test_precondition_violation_is_usage_error(tmp_path):
    code, out = run_cli(tmp_path, "resolvent-verify", "--set", "z=0.5+0j")
    assert code == 1


def test_probe_zero_level_run(tmp_path):
    cfg = tmp_path / "probe.toml"
    cfg.write_text('lambdas = [0.0]\nps = [2.0]\nns = [8, 16, 32, 64]\n')
    code, out = run_cli(tmp_path, "probe", "--config", str(cfg))
    assert code == 0
    lines = (out / "probe.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    ratios = [float(line.split(",")[header.index("ratio")]) for line in lines[1:]]
    assert len(ratios) == 4
    assert max(ratios) <= 1e-12
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "probe"
    assert manifest["checks"][0]["passed"]


def test_resolvent_verify_run_and_csv_schema(tmp_path):
    code, out = run_cli(
        tmp_path, "resolvent-verify", "--set", "z=2+0j", "--set", "direction=forward"
    )
    assert code == 0
    lines = (out / "resolvent-verify.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == ["direction", "n", "seminorm", "certified_tail",
                      "reconstruction_error", "contraction_sup", "operator_rel_err"]
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    assert all(row["direction"] == "forward" for row in rows)
    # one row per truncated tail index, seminorms decaying along it
    seminorms = [float(row["seminorm"]) for row in rows]
    assert all(b < a for a, b in zip(seminorms, seminorms[1:]))
    first = rows[0]
    assert float(first["reconstruction_error"]) <= float(first["certified_tail"]) + 1e-10
    assert float(first["operator_rel_err"]) <= 1e-8


def test_assertion_failure_exits_two_with_outputs(tmp_path):
    # impossible tolerance: outputs still written, exit code 2
    code, out = run_cli(
        tmp_path, "resolvent-verify", "--set", "z=2+0j", "--set", "tol_operator=1e-30"
    )
    assert code == 2
    assert (out / "resolvent-verify.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert any(not c["passed"] for c in manifest["checks"])


def test_reproducible_csv_bodies(tmp_path):
    cfg = tmp_path / "probe.toml"
    cfg.write_text('lambdas = [0.5]\nps = [2.0]\nns = [8, 16, 32, 64]\n')
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["probe", "--config", str(cfg), "--out", str(out1), "--seed", "5"]) == 0
    assert main(["probe", "--config", str(cfg), "--out", str(out2), "--seed", "5"]) == 0
    assert (out1 / "probe.csv").read_bytes() == (out2 / "probe.csv").read_bytes()


def test_workers_do_not_change_output(tmp_path):
    cfg = tmp_path / "probe.toml"
    cfg.write_text('lambdas = [0.25, 0.5]\nps = [1.0, 2.0]\nns = [8, 16, 32, 64]\n')
    out1 = tmp_path / "serial"
    out2 = tmp_path / "pool"
    assert main(["probe", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["probe", "--config", str(cfg), "--out", str(out2), "--workers", "4"]) == 0
    assert (out1 / "probe.csv").read_bytes() == (out2 / "probe.csv").read_bytes()


def test_apply_dump_and_norms_pipeline(tmp_path):
    code, out = run_cli(
        tmp_path, "apply", "--set", "symbol=bochner(delta=1)", "--set", "dump_fields=true"
    )
    assert code == 0
    base = out / "fields" / "output"
    assert base.with_suffix(".csv").exists()
    code2 = main([
        "norms",
        "--set", f"field={base}",
        "--set", 'norms=["lp(p=2)", "herz(alpha=0.5,p=2,q=1)"]',
        "--out", str(tmp_path / "norms-out"),
    ])
    assert code2 == 0
    record = json.loads((tmp_path / "norms-out" / "norms.json").read_text())
    assert set(record) == {"lp(p=2)", "herz(alpha=0.5,p=2,q=1)"}
    assert all(v > 0 for v in record.values())


def test_spectrum_map_run(tmp_path):
    code, out = run_cli(
        tmp_path,
        "spectrum-map",
        "--set", "re=[0.5, 2.0, 2]",
        "--set", "im=[0.0, 0.5, 2]",
        "--set", "ns=[8, 16, 32]",
    )
    assert code == 0
    lines = (out / "spectrum-map.csv").read_text().strip().splitlines()
    assert lines[0] == "re_z,im_z,pole,lower_bound,oracle_p2"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 4
    pole_row = [r for r in rows if r[0] == "0.5" and r[1] == "0.0"][0]
    assert pole_row[2] == "true"


def test_mikhlin_run_flags_rough_symbol(tmp_path):
    code, out = run_cli(
        tmp_path,
        "mikhlin",
        "--set", "symbol=bochner(delta=0.5)",
        "--set", "kmax=1",
        "--set", "assert_not_flagged=true",
    )
    assert code == 2  # flagged symbol fails the in-config assertion
    lines = (out / "mikhlin.csv").read_text().strip().splitlines()
    flagged = [line.split(",")[-1] for line in lines[1:]]
    assert "true" in flagged


def test_kernel_decay_run(tmp_path):
    code, out = run_cli(
        tmp_path, "kernel-decay", "--set", "n_min=20", "--set", "n_max=26"
    )
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert float(manifest["extras"]["slope"]) < 0


def test_resolvent_verify_seed_reproducibility(tmp_path):
    # the randomized operator check is seed-deterministic
    args = ["resolvent-verify", "--set", "z=2+0j", "--set", "direction=forward"]
    outs = [tmp_path / "r1", tmp_path / "r2", tmp_path / "r3"]
    assert main([*args, "--out", str(outs[0]), "--seed", "9"]) == 0
    assert main([*args, "--out", str(outs[1]), "--seed", "9"]) == 0
    assert main([*args, "--out", str(outs[2]), "--seed", "10"]) == 0
    body = [(o / "resolvent-verify.csv").read_bytes() for o in outs]
    assert body[0] == body[1]
    assert body[0] != body[2]


def test_probe_run_with_weight(tmp_path):
    cfg = tmp_path / "probe.toml"
    cfg.write_text(
        'lambdas = [0.5]\nps = [2.0]\nns = [8, 16, 32, 64]\n'
        'weight_a = 0.5\nassert_max_halving = 0.85\n'
    )
    code, out = run_cli(tmp_path, "probe", "--config", str(cfg))
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert any(c["name"] == "halving" and c["passed"] for c in manifest["checks"])
