import os
import subprocess
import sys

import numpy as np
import pytest

from muskat.cli import main
from muskat.config import ConfigError, build_config, parse_config, parse_kv_text
from muskat.grid import GridSpec, load_field, make_gaussian_bump, save_field


def write(path, text):
    path.write_text(text)
    return str(path)


MINIMAL = """
grid.dim = 1
grid.extent = 6.283185307179586
grid.points = 32
params.lambda = 1.0
params.a_mu = 0.0
initial.kind = gaussian
initial.amplitude = 0.2
initial.width = 0.5
stepper.dt = 0.05
stepper.t_end = 0.2
"""


def test_parse_minimal_defaults(tmp_path):
    cfg = parse_config(write(tmp_path / "c.cfg", MINIMAL))
    assert cfg.grid.points == 32
    assert cfg.stepper.scheme == "rk2"
    assert cfg.solver_tol == 1e-10
    assert cfg.echo["stepper.cfl"] == 0.5
    assert cfg.echo["seed"] == 0


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_kv_text("grid.dims = 2")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_kv_text("seed = 1\nseed = 2")


def test_a_mu_out_of_range():
    kv = parse_kv_text("params.a_mu = 1.2")
    with pytest.raises(ConfigError, match="a_mu must lie in"):
        build_config(kv)


def test_raw_params_arithmetic():
    kv = parse_kv_text("\n".join([
        "params.porosity = 1.0", "params.gravity = 1.0",
        "params.mu_plus = 1.0", "params.mu_minus = 1.0",
        "params.rho_plus = 1.0", "params.rho_minus = 2.0",
    ]))
    cfg = build_config(kv)
    assert cfg.params.lam == 1.0
    assert cfg.params.a_mu == 0.0


def test_raw_and_reduced_conflict():
    kv = parse_kv_text("params.lambda = 1.0\nparams.porosity = 1.0")
    with pytest.raises(ConfigError, match="not both"):
        build_config(kv)


def test_evolve_cli_and_outputs(tmp_path):
    cfg = write(tmp_path / "c.cfg", MINIMAL + f"output.dir = {tmp_path}/out\n")
    assert main(["evolve", cfg]) == 0
    outdir = tmp_path / "out"
    assert (outdir / "series.csv").exists()
    assert (outdir / "final.bin").exists()
    assert (outdir / "manifest.json").exists()
    lines = (outdir / "series.csv").read_text().strip().splitlines()
    assert lines[0] == "t,min_rt_margin,volume,sobolev_norm_s,beta_iters,dt"
    assert len(lines) == 6  # header + t=0 + 4 steps
    f = load_field(outdir / "final.bin")
    assert f.grid == GridSpec(1, 6.283185307179586, 32)


def test_evolve_rerun_is_bit_identical(tmp_path):
    cfg = write(tmp_path / "c.cfg", MINIMAL + f"output.dir = {tmp_path}/o1\n")
    assert main(["evolve", cfg]) == 0
    cfg2 = write(tmp_path / "c2.cfg", MINIMAL + f"output.dir = {tmp_path}/o2\n")
    assert main(["evolve", cfg2]) == 0
    a = (tmp_path / "o1" / "series.csv").read_bytes()
    b = (tmp_path / "o2" / "series.csv").read_bytes()
    assert a == b
    assert (tmp_path / "o1" / "final.bin").read_bytes() == \
        (tmp_path / "o2" / "final.bin").read_bytes()


def test_config_error_exit_code(tmp_path):
    bad = write(tmp_path / "bad.cfg", "grid.bogus = 1\n")
    assert main(["evolve", bad]) == 2


def test_rt_floor_exit_code(tmp_path):
    # a_mu close to 1 with a steep bump: margin dips below a high floor
    text = """
grid.dim = 1
grid.extent = 6.283185307179586
grid.points = 64
params.lambda = 1.0
params.a_mu = 0.9
initial.kind = gaussian
initial.amplitude = 1.4
initial.width = 0.45
stepper.dt = 0.01
stepper.t_end = 0.05
stepper.rt_floor = 0.9
"""
    cfg = write(tmp_path / "c.cfg", text + f"output.dir = {tmp_path}/out\n")
    code = main(["evolve", cfg])
    assert code == 4
    assert (tmp_path / "out" / "final.bin").exists()


def test_validate_cli(tmp_path):
    cfg = write(tmp_path / "c.cfg", MINIMAL + f"output.dir = {tmp_path}/v\n")
    assert main(["validate", "--suite", "difference", cfg]) == 0
    report = (tmp_path / "v" / "validate_report.csv").read_text()
    assert report.startswith("suite,check,value,threshold,passed")
    assert main(["validate", "--suite", "nonsense", cfg]) == 2


def test_symbol_cli(tmp_path):
    out = str(tmp_path / "sym.csv")
    assert main(["symbol", "--A", "0.5,0.0", "--n", "0", "--nu", "1,0",
                 "--ray", "1,1", "--num", "8", "--zmax", "4", "--out", out]) == 0
    lines = open(out).read().strip().splitlines()
    assert lines[0] == "z0,z1,re_symbol,im_symbol"
    assert len(lines) == 9
    # purely imaginary symbol
    assert all(abs(float(l.split(",")[2])) < 1e-14 for l in lines[1:])


def test_symbol_cli_parity_rejected(tmp_path):
    assert main(["symbol", "--A", "0.5", "--n", "1", "--nu", "1",
                 "--ray", "1"]) == 2


def test_field_cli(tmp_path):
    cfg = write(tmp_path / "c.cfg", MINIMAL)
    probes = write(tmp_path / "p.csv", "x0,y\n3.1,2.0\n3.1,-2.0\n")
    out = str(tmp_path / "f.csv")
    assert main(["field", cfg, "--probes", probes, "--out", out]) == 0
    lines = open(out).read().strip().splitlines()
    assert lines[0] == "probe,v0,v1,q,side"
    assert len(lines) == 3
    assert lines[1].split(",")[-1] == "1"
    assert lines[2].split(",")[-1] == "-1"


def test_rt_check_cli(tmp_path):
    g = GridSpec(1, 6.283185307179586, 32)
    snap = tmp_path / "f.bin"
    save_field(snap, make_gaussian_bump(g, 0.2, [3.14], 0.5))
    cfg = write(tmp_path / "c.cfg", MINIMAL)
    assert main(["rt-check", cfg, "--snapshot", str(snap)]) == 0


def test_missing_snapshot_is_config_error(tmp_path):
    text = MINIMAL.replace("initial.kind = gaussian",
                           "initial.kind = snapshot\ninitial.path = missing.bin")
    text = "\n".join(l for l in text.splitlines()
                     if not l.startswith(("initial.amplitude", "initial.width")))
    cfg = write(tmp_path / "c.cfg", text)
    assert main(["evolve", cfg]) == 2


def test_thread_env_bit_identity(tmp_path):
    # the determinism contract across MUSKAT_THREADS settings, via subprocesses
    results = {}
    for threads in ("1", "4"):
        outdir = tmp_path / f"t{threads}"
        cfg = write(tmp_path / f"c{threads}.cfg",
                    MINIMAL + f"output.dir = {outdir}\n")
        env = dict(os.environ, MUSKAT_THREADS=threads)
        proc = subprocess.run(
            [sys.executable, "-m", "muskat.cli", "evolve", cfg],
            env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        results[threads] = ((outdir / "series.csv").read_bytes(),
                            (outdir / "final.bin").read_bytes())
    assert results["1"] == results["4"]
