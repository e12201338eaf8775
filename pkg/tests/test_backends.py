import json
import os
import runpy
import subprocess
import sys
from pathlib import Path


from kanheads import kernels

ROOT = Path(__file__).resolve().parent.parent


def _backend_in_subprocess(env_value):
    env = dict(os.environ)
    env.pop("KANHEADS_PURE_PYTHON", None)
    if env_value is not None:
        env["KANHEADS_PURE_PYTHON"] = env_value
    out = subprocess.run([sys.executable, "-c", "from kanheads import kernels; print(kernels.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_var_forces_fallback():
    assert _backend_in_subprocess("1") == "python"


def test_default_prefers_compiled():
    expected = "cython" if "cython" in kernels.available_backends() else "python"
    assert _backend_in_subprocess(None) == expected
    assert _backend_in_subprocess("0") == expected


def test_backend_context_restores_previous():
    before = kernels.backend_name()
    with kernels.backend("python"):
        assert kernels.backend_name() == "python"
    assert kernels.backend_name() == before


def test_benchmark_script_runs(tmp_path, capsys):
    bench = runpy.run_path(str(ROOT / "benchmarks" / "bench_kernels.py"))
    out = tmp_path / "bench.json"
    assert bench["main"](["--batch", "2", "--features", "3", "--repeat", "1", "--json", str(out)]) == 0
    data = json.loads(out.read_text())["ms_per_call"]
    assert set(next(iter(data.values()))) == set(kernels.available_backends())
    assert "speedup" in capsys.readouterr().out or "cython" not in kernels.available_backends()
